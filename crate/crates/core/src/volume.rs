//! Depth-image fusion into a truncated signed distance field and the
//! tri-state occupancy grid (free / occupied / unknown) derived from it.
//!
//! Fusion is projective: each voxel center is projected into the depth
//! image and the signed distance along the camera axis, `d - z`, is folded
//! into a weighted running average clamped to the truncation band. Voxels
//! more than one truncation behind the measured surface are left untouched,
//! so space that was never observed stays `unknown`.

use thiserror::Error;

use crate::geom::{Aabb3, Pose, Vec3};

/// Default edge length of one voxel, meters.
pub const DEFAULT_VOXEL_SIZE: f64 = 0.01;
/// Truncation distance as a multiple of the voxel size.
pub const TRUNCATION_FACTOR: f64 = 4.0;
/// Cap on the per-voxel fusion weight; bounds the memory of old frames.
pub const MAX_WEIGHT: f64 = 64.0;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("invalid intrinsics: fx={fx}, fy={fy} (must be positive)")]
    InvalidIntrinsics { fx: f64, fy: f64 },
    #[error("depth buffer length {got} does not match {width}x{height}")]
    DepthSizeMismatch { got: usize, width: usize, height: usize },
    #[error("grid dump parse error at line {line}: {message}")]
    DumpParse { line: usize, message: String },
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(VolumeError::InvalidIntrinsics { fx: self.fx, fy: self.fy });
        }
        Ok(())
    }
}

/// A single depth observation: row-major depth in meters (0 or NaN means
/// no return) plus the camera-to-world pose.
///
/// The camera frame is the usual pinhole convention: +z optical axis,
/// +x right, +y down; stored depth is the camera-frame z of the surface.
#[derive(Debug, Clone)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
    pub intrinsics: Intrinsics,
    pub camera_to_world: Pose,
}

impl DepthImage {
    pub fn new(
        width: usize,
        height: usize,
        depth: Vec<f64>,
        intrinsics: Intrinsics,
        camera_to_world: Pose,
    ) -> Result<DepthImage, VolumeError> {
        intrinsics.validate()?;
        if depth.len() != width * height {
            return Err(VolumeError::DepthSizeMismatch { got: depth.len(), width, height });
        }
        Ok(DepthImage { width, height, depth, intrinsics, camera_to_world })
    }

    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.depth[v * self.width + u]
    }

    pub fn is_valid(d: f64) -> bool {
        d.is_finite() && d > 0.0
    }

    /// Back-projects pixel (u, v) with depth `d` into world coordinates.
    /// Rays pass through pixel centers (u + 0.5, v + 0.5).
    pub fn unproject(&self, u: usize, v: usize, d: f64) -> Vec3 {
        let x = (u as f64 + 0.5 - self.intrinsics.cx) * d / self.intrinsics.fx;
        let y = (v as f64 + 0.5 - self.intrinsics.cy) * d / self.intrinsics.fy;
        self.camera_to_world.transform_point(Vec3::new(x, y, d))
    }
}

/// Shared voxel lattice geometry: origin corner, voxel size, dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Vec3,
    pub voxel_size: f64,
    pub dims: [usize; 3],
}

impl GridGeometry {
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.dims[0] * (iy + self.dims[1] * iz)
    }

    /// Voxel index containing a world point (flooring rule), if in bounds.
    pub fn world_to_voxel(&self, p: Vec3) -> Option<[usize; 3]> {
        let rel = (p - self.origin) / self.voxel_size;
        if rel.x < 0.0 || rel.y < 0.0 || rel.z < 0.0 {
            return None;
        }
        let (ix, iy, iz) = (rel.x.floor() as usize, rel.y.floor() as usize, rel.z.floor() as usize);
        if ix >= self.dims[0] || iy >= self.dims[1] || iz >= self.dims[2] {
            return None;
        }
        Some([ix, iy, iz])
    }

    pub fn voxel_center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.origin
            + Vec3::new(
                (ix as f64 + 0.5) * self.voxel_size,
                (iy as f64 + 0.5) * self.voxel_size,
                (iz as f64 + 0.5) * self.voxel_size,
            )
    }

    pub fn aabb(&self) -> Aabb3 {
        let size = Vec3::new(
            self.dims[0] as f64 * self.voxel_size,
            self.dims[1] as f64 * self.voxel_size,
            self.dims[2] as f64 * self.voxel_size,
        );
        Aabb3::new(self.origin, self.origin + size)
    }
}

/// Truncated signed distance volume with per-voxel fusion weights.
#[derive(Debug, Clone)]
pub struct TsdfVolume {
    geometry: GridGeometry,
    truncation: f64,
    sdf: Vec<f64>,
    weight: Vec<f64>,
}

impl TsdfVolume {
    /// New volume with truncation = 4 x voxel size.
    pub fn new(origin: Vec3, voxel_size: f64, dims: [usize; 3]) -> TsdfVolume {
        Self::with_truncation(origin, voxel_size, dims, TRUNCATION_FACTOR * voxel_size)
    }

    pub fn with_truncation(
        origin: Vec3,
        voxel_size: f64,
        dims: [usize; 3],
        truncation: f64,
    ) -> TsdfVolume {
        let geometry = GridGeometry { origin, voxel_size, dims };
        let n = geometry.len();
        TsdfVolume { geometry, truncation, sdf: vec![0.0; n], weight: vec![0.0; n] }
    }

    /// Volume sized to cover `bounds` (inflated by one truncation band).
    pub fn covering(bounds: &Aabb3, voxel_size: f64) -> TsdfVolume {
        let pad = TRUNCATION_FACTOR * voxel_size;
        let lo = bounds.min - Vec3::new(pad, pad, pad);
        let size = bounds.size() + Vec3::new(2.0 * pad, 2.0 * pad, 2.0 * pad);
        let dims = [
            (size.x / voxel_size).ceil() as usize + 1,
            (size.y / voxel_size).ceil() as usize + 1,
            (size.z / voxel_size).ceil() as usize + 1,
        ];
        TsdfVolume::new(lo, voxel_size, dims)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn sdf_at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.sdf[self.geometry.linear(ix, iy, iz)]
    }

    pub fn weight_at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.weight[self.geometry.linear(ix, iy, iz)]
    }

    /// Fuses one depth image into the volume.
    ///
    /// For every voxel that projects onto a valid depth pixel, the signed
    /// distance `d - z` is clamped to the truncation band and averaged into
    /// the voxel; voxels behind the surface by more than the truncation are
    /// untouched. Weights increment by one per update, capped at
    /// [`MAX_WEIGHT`].
    pub fn integrate(&mut self, img: &DepthImage) -> Result<(), VolumeError> {
        img.intrinsics.validate()?;
        let world_to_cam = img.camera_to_world.inverse();
        let (fx, fy, cx, cy) = (img.intrinsics.fx, img.intrinsics.fy, img.intrinsics.cx, img.intrinsics.cy);
        let [nx, ny, nz] = self.geometry.dims;
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    let p = self.geometry.voxel_center(ix, iy, iz);
                    let q = world_to_cam.transform_point(p);
                    if q.z <= 1e-9 {
                        continue;
                    }
                    let u = (fx * q.x / q.z + cx).floor();
                    let v = (fy * q.y / q.z + cy).floor();
                    if u < 0.0 || v < 0.0 || u >= img.width as f64 || v >= img.height as f64 {
                        continue;
                    }
                    let d = img.at(u as usize, v as usize);
                    if !DepthImage::is_valid(d) {
                        continue;
                    }
                    let sdf_obs = d - q.z;
                    if sdf_obs < -self.truncation {
                        continue;
                    }
                    let sdf_obs = sdf_obs.min(self.truncation);
                    let idx = self.geometry.linear(ix, iy, iz);
                    let w = self.weight[idx];
                    self.sdf[idx] = (self.sdf[idx] * w + sdf_obs) / (w + 1.0);
                    self.weight[idx] = (w + 1.0).min(MAX_WEIGHT);
                }
            }
        }
        Ok(())
    }
}

/// State of one occupancy cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    fn code(self) -> char {
        match self {
            CellState::Free => 'F',
            CellState::Occupied => 'O',
            CellState::Unknown => 'U',
        }
    }

    fn from_code(c: char) -> Option<CellState> {
        match c {
            'F' => Some(CellState::Free),
            'O' => Some(CellState::Occupied),
            'U' => Some(CellState::Unknown),
            _ => None,
        }
    }
}

/// Result of a point query against the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellQuery {
    Free,
    Occupied,
    Unknown,
    OutOfBounds,
}

/// Voxel lattice labeling space free, occupied, or unknown.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    /// Grid with every cell set to `fill`.
    pub fn filled(origin: Vec3, voxel_size: f64, dims: [usize; 3], fill: CellState) -> OccupancyGrid {
        let geometry = GridGeometry { origin, voxel_size, dims };
        let n = geometry.len();
        OccupancyGrid { geometry, cells: vec![fill; n] }
    }

    /// Derives the tri-state grid from a fused volume: never-observed
    /// voxels are unknown; observed voxels with sdf at or below one voxel
    /// size are occupied, the rest free.
    pub fn from_tsdf(vol: &TsdfVolume) -> OccupancyGrid {
        let geometry = *vol.geometry();
        let eps_occ = geometry.voxel_size;
        let cells = vol
            .sdf
            .iter()
            .zip(vol.weight.iter())
            .map(|(&sdf, &w)| {
                if w == 0.0 {
                    CellState::Unknown
                } else if sdf <= eps_occ {
                    CellState::Occupied
                } else {
                    CellState::Free
                }
            })
            .collect();
        OccupancyGrid { geometry, cells }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cell(&self, ix: usize, iy: usize, iz: usize) -> CellState {
        self.cells[self.geometry.linear(ix, iy, iz)]
    }

    pub fn set_cell(&mut self, ix: usize, iy: usize, iz: usize, state: CellState) {
        let idx = self.geometry.linear(ix, iy, iz);
        self.cells[idx] = state;
    }

    /// Marks every cell whose center lies inside `region`.
    pub fn fill_region(&mut self, region: &Aabb3, state: CellState) {
        let [nx, ny, nz] = self.geometry.dims;
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    if region.contains(self.geometry.voxel_center(ix, iy, iz)) {
                        self.set_cell(ix, iy, iz, state);
                    }
                }
            }
        }
    }

    /// State of the voxel containing `p`, or `OutOfBounds`.
    pub fn query(&self, p: Vec3) -> CellQuery {
        match self.geometry.world_to_voxel(p) {
            None => CellQuery::OutOfBounds,
            Some([ix, iy, iz]) => match self.cell(ix, iy, iz) {
                CellState::Free => CellQuery::Free,
                CellState::Occupied => CellQuery::Occupied,
                CellState::Unknown => CellQuery::Unknown,
            },
        }
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Text dump: header plus run-length-encoded cell states in x-fastest
    /// order. Stable for golden-file comparisons.
    pub fn to_dump(&self) -> String {
        let g = &self.geometry;
        let mut out = String::new();
        out.push_str("occupancy v1\n");
        out.push_str(&format!("origin {} {} {}\n", g.origin.x, g.origin.y, g.origin.z));
        out.push_str(&format!("voxel_size {}\n", g.voxel_size));
        out.push_str(&format!("dims {} {} {}\n", g.dims[0], g.dims[1], g.dims[2]));
        out.push_str("cells\n");
        let mut runs: Vec<String> = Vec::new();
        let mut iter = self.cells.iter();
        if let Some(&first) = iter.next() {
            let mut current = first;
            let mut count = 1usize;
            for &c in iter {
                if c == current {
                    count += 1;
                } else {
                    runs.push(format!("{}{}", count, current.code()));
                    current = c;
                    count = 1;
                }
            }
            runs.push(format!("{}{}", count, current.code()));
        }
        for chunk in runs.chunks(16) {
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn from_dump(text: &str) -> Result<OccupancyGrid, VolumeError> {
        let err = |line: usize, message: &str| VolumeError::DumpParse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty dump"))?;
        if header.trim() != "occupancy v1" {
            return Err(err(1, "expected header 'occupancy v1'"));
        }
        let mut origin = Vec3::ZERO;
        let mut voxel_size = DEFAULT_VOXEL_SIZE;
        let mut dims = [0usize; 3];
        let mut cells: Vec<CellState> = Vec::new();
        let mut in_cells = false;
        for (i, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "end" {
                break;
            }
            if in_cells {
                for tok in line.split_whitespace() {
                    let (num, code) = tok.split_at(tok.len() - 1);
                    let count: usize =
                        num.parse().map_err(|_| err(i + 1, "bad run length"))?;
                    let state = CellState::from_code(code.chars().next().unwrap())
                        .ok_or_else(|| err(i + 1, "bad cell code"))?;
                    cells.extend(std::iter::repeat(state).take(count));
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("origin") => {
                    let v: Vec<f64> = parts.filter_map(|s| s.parse().ok()).collect();
                    if v.len() != 3 {
                        return Err(err(i + 1, "origin needs 3 numbers"));
                    }
                    origin = Vec3::new(v[0], v[1], v[2]);
                }
                Some("voxel_size") => {
                    voxel_size = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(i + 1, "bad voxel_size"))?;
                }
                Some("dims") => {
                    let v: Vec<usize> = parts.filter_map(|s| s.parse().ok()).collect();
                    if v.len() != 3 {
                        return Err(err(i + 1, "dims needs 3 integers"));
                    }
                    dims = [v[0], v[1], v[2]];
                }
                Some("cells") => in_cells = true,
                _ => return Err(err(i + 1, "unknown field")),
            }
        }
        let geometry = GridGeometry { origin, voxel_size, dims };
        if cells.len() != geometry.len() {
            return Err(VolumeError::DumpParse {
                line: 0,
                message: format!("cell count {} != dims product {}", cells.len(), geometry.len()),
            });
        }
        Ok(OccupancyGrid { geometry, cells })
    }
}
