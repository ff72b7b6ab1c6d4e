//! Parallel-jaw grasp generation and preference-based ranking.
//!
//! Gripper frame convention: +z is the approach direction, +y the
//! jaw-closing axis, and +x = y × z is the gripper plane normal. The pose
//! position is the tip point (midpoint between closed fingertips).
//!
//! The learned proposal model is replaced by a seeded geometric sampler:
//! antipodal point pairs whose surface normals oppose each other within a
//! friction-cone angle become candidates, each tried with several approach
//! directions around the jaw axis and rejected when the closed gripper
//! volume would intersect occupied cells.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{Aabb3, PointCloud, Pose, Quat, Vec3, UNIT_TOL};
use crate::volume::{CellQuery, OccupancyGrid};

/// Widest opening of the parallel jaw, meters.
pub const DEFAULT_MAX_JAW_WIDTH: f64 = 0.08;

#[derive(Debug, Error)]
pub enum GraspError {
    #[error("no feasible grasp candidate found")]
    NoGraspFound,
    #[error("object horizontal extent exceeds the jaw width on both axes")]
    ObjectTooWide,
    #[error("cloud must carry per-point normals")]
    MissingNormals,
    #[error("approach direction must be unit length (norm {0})")]
    InvalidApproach(f64),
}

/// One scored SE(3) grasp.
#[derive(Debug, Clone, Copy)]
pub struct GraspCandidate {
    pub pose: Pose,
    /// Jaw opening at contact, meters.
    pub width: f64,
    /// Sampler quality in [0, 1].
    pub base_score: f64,
    /// Midpoint between the closed fingertips; equals the pose position.
    pub tip_point: Vec3,
}

impl GraspCandidate {
    pub fn approach_dir(&self) -> Vec3 {
        self.pose.transform_dir(Vec3::Z)
    }

    pub fn jaw_axis(&self) -> Vec3 {
        self.pose.transform_dir(Vec3::Y)
    }

    pub fn plane_normal(&self) -> Vec3 {
        self.pose.transform_dir(Vec3::X)
    }

    pub fn dump_line(&self) -> String {
        let p = self.pose.position;
        let q = self.pose.orientation;
        format!(
            "grasp {} {} {} {} {} {} {} width {} score {}",
            p.x, p.y, p.z, q.w, q.x, q.y, q.z, self.width, self.base_score
        )
    }
}

/// Optional grasp preferences; any subset may be present.
#[derive(Debug, Clone, Copy, Default)]
pub struct GraspPreference {
    pub preferred_position: Option<Vec3>,
    pub preferred_approach_direction: Option<Vec3>,
    pub preferred_plane_normal: Option<Vec3>,
}

/// Weights combining the preference terms with the base score.
#[derive(Debug, Clone, Copy)]
pub struct PreferenceWeights {
    pub quality: f64,
    pub position: f64,
    pub approach: f64,
    pub plane_normal: f64,
    /// Length scale of the position term, meters.
    pub sigma_position: f64,
}

impl Default for PreferenceWeights {
    fn default() -> Self {
        PreferenceWeights {
            quality: 1.0,
            position: 1.0,
            approach: 1.0,
            plane_normal: 1.0,
            sigma_position: 0.05,
        }
    }
}

/// Collision proxy for the gripper body: a palm box behind two finger
/// boxes, sampled on a regular lattice for occupancy checks.
#[derive(Debug, Clone, Copy)]
pub struct GripperProxy {
    /// Palm box size (x, y, z), meters.
    pub palm: Vec3,
    /// Finger box size (x, y, z), meters; z is the finger length.
    pub finger: Vec3,
    pub max_width: f64,
    /// Lattice spacing for sample points, meters.
    pub sample_step: f64,
}

impl Default for GripperProxy {
    fn default() -> Self {
        GripperProxy {
            palm: Vec3::new(0.08, 0.08, 0.04),
            finger: Vec3::new(0.01, 0.01, 0.06),
            max_width: DEFAULT_MAX_JAW_WIDTH,
            sample_step: 0.01,
        }
    }
}

impl GripperProxy {
    fn box_lattice(center: Vec3, size: Vec3, step: f64, out: &mut Vec<Vec3>) {
        let n = |extent: f64| ((extent / step).ceil() as usize).max(1);
        let (nx, ny, nz) = (n(size.x), n(size.y), n(size.z));
        for iz in 0..=nz {
            for iy in 0..=ny {
                for ix in 0..=nx {
                    out.push(
                        center
                            + Vec3::new(
                                size.x * (ix as f64 / nx as f64 - 0.5),
                                size.y * (iy as f64 / ny as f64 - 0.5),
                                size.z * (iz as f64 / nz as f64 - 0.5),
                            ),
                    );
                }
            }
        }
    }

    /// Sample points of the gripper body in the gripper frame, with the
    /// fingers opened to `width`. The tip midpoint is the origin; fingers
    /// extend back along -z, the palm sits behind them.
    pub fn sample_points_local(&self, width: f64) -> Vec<Vec3> {
        let mut pts = Vec::new();
        let half = width * 0.5 + self.finger.y * 0.5 + 0.001;
        for side in [-1.0, 1.0] {
            Self::box_lattice(
                Vec3::new(0.0, side * half, -self.finger.z * 0.5),
                self.finger,
                self.sample_step,
                &mut pts,
            );
        }
        Self::box_lattice(
            Vec3::new(0.0, 0.0, -self.finger.z - self.palm.z * 0.5),
            self.palm,
            self.sample_step,
            &mut pts,
        );
        pts
    }

    /// Sample points in world coordinates at the given gripper pose.
    pub fn sample_points(&self, pose: &Pose, width: f64) -> Vec<Vec3> {
        self.sample_points_local(width)
            .into_iter()
            .map(|p| pose.transform_point(p))
            .collect()
    }
}

/// Sampler knobs; the seed makes candidate generation reproducible.
#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub seed: u64,
    /// Number of antipodal point pairs drawn.
    pub n_pairs: usize,
    /// Friction-cone half angle for normal anti-alignment, radians.
    pub antipodal_angle: f64,
    pub max_jaw_width: f64,
    /// Keep at most this many top-scoring candidates.
    pub max_candidates: usize,
    /// Region where occupancy is ignored (the target object's own
    /// vicinity); defaults to the cloud's box inflated by two voxels.
    pub exempt: Option<Aabb3>,
    pub gripper: GripperProxy,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            n_pairs: 2000,
            antipodal_angle: 30f64.to_radians(),
            max_jaw_width: DEFAULT_MAX_JAW_WIDTH,
            max_candidates: 10,
            exempt: None,
            gripper: GripperProxy::default(),
        }
    }
}

/// Builds a grasp frame from a tip point, jaw axis, and (possibly
/// unnormalized) approach hint projected orthogonal to the jaw.
fn frame_from(tip: Vec3, jaw: Vec3, approach_hint: Vec3) -> Option<Pose> {
    let y = jaw.normalized().ok()?;
    let z_raw = approach_hint - y * approach_hint.dot(y);
    let z = z_raw.normalized().ok()?;
    let x = y.cross(z);
    Some(Pose::new(tip, Quat::from_frame(x, y, z)))
}

/// Candidate approach hints: the base direction rotated about the jaw
/// axis in 45 degree steps within a quarter turn each way.
fn approach_hints(jaw: Vec3) -> Vec<Vec3> {
    let down = Vec3::new(0.0, 0.0, -1.0);
    let base = if down.cross(jaw).norm() > 0.1 { down } else { Vec3::X };
    let mut hints = Vec::with_capacity(5);
    for deg in [0.0f64, 45.0, -45.0, 90.0, -90.0] {
        let rot = Quat::from_axis_angle(jaw, deg.to_radians());
        hints.push(rot.rotate(base));
    }
    hints
}

struct GridCheck<'a> {
    grid: &'a OccupancyGrid,
    exempt: Aabb3,
}

impl GridCheck<'_> {
    fn collides(&self, points: &[Vec3]) -> bool {
        points.iter().any(|&p| {
            !self.exempt.contains(p) && self.grid.query(p) == CellQuery::Occupied
        })
    }

    /// Fraction of checked points with no occupied cell within one voxel;
    /// scores the margin around the gripper body.
    fn clearance(&self, points: &[Vec3]) -> f64 {
        let step = self.grid.geometry().voxel_size;
        let offsets = [
            Vec3::new(step, 0.0, 0.0),
            Vec3::new(-step, 0.0, 0.0),
            Vec3::new(0.0, step, 0.0),
            Vec3::new(0.0, -step, 0.0),
            Vec3::new(0.0, 0.0, step),
            Vec3::new(0.0, 0.0, -step),
        ];
        let mut checked = 0usize;
        let mut clear = 0usize;
        for &p in points {
            if self.exempt.contains(p) {
                continue;
            }
            checked += 1;
            let near_occupied = offsets.iter().any(|&o| {
                let q = p + o;
                !self.exempt.contains(q) && self.grid.query(q) == CellQuery::Occupied
            });
            if !near_occupied {
                clear += 1;
            }
        }
        if checked == 0 {
            1.0
        } else {
            clear as f64 / checked as f64
        }
    }
}

/// Samples antipodal grasp candidates on a cloud with normals, rejecting
/// candidates whose closed-gripper volume intersects occupied cells, and
/// returns at most the top `max_candidates` by base score (descending).
pub fn sample_adaptive_grasps(
    cloud: &PointCloud,
    grid: &OccupancyGrid,
    cfg: &SampleConfig,
) -> Result<Vec<GraspCandidate>, GraspError> {
    let normals = cloud.normals.as_ref().ok_or(GraspError::MissingNormals)?;
    let n = cloud.points.len();
    if n < 2 {
        return Err(GraspError::NoGraspFound);
    }
    let exempt = cfg.exempt.unwrap_or_else(|| {
        cloud
            .aabb()
            .expect("nonempty cloud")
            .inflate(2.0 * grid.geometry().voxel_size)
    });
    let check = GridCheck { grid, exempt };
    let cos_thresh = cfg.antipodal_angle.cos();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut candidates: Vec<GraspCandidate> = Vec::new();
    for _ in 0..cfg.n_pairs {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let (pi, pj) = (cloud.points[i], cloud.points[j]);
        let jaw_vec = pj - pi;
        let width = jaw_vec.norm();
        if width < 1e-6 || width > cfg.max_jaw_width {
            continue;
        }
        let jaw = jaw_vec / width;
        // Outward normals must oppose the closing direction within the cone.
        let align_i = normals[i].dot(-jaw);
        let align_j = normals[j].dot(jaw);
        if align_i < cos_thresh || align_j < cos_thresh {
            continue;
        }
        let tip = (pi + pj) * 0.5;
        let anti_cos = 0.5 * (align_i + align_j);
        for hint in approach_hints(jaw) {
            let pose = match frame_from(tip, jaw, hint) {
                Some(p) => p,
                None => continue,
            };
            let body = cfg.gripper.sample_points(&pose, width);
            if check.collides(&body) {
                continue;
            }
            let base_score = 0.5 * (1.0 + anti_cos) * check.clearance(&body);
            candidates.push(GraspCandidate { pose, width, base_score, tip_point: tip });
        }
    }
    if candidates.is_empty() {
        return Err(GraspError::NoGraspFound);
    }
    candidates.sort_by(|a, b| b.base_score.partial_cmp(&a.base_score).unwrap());
    candidates.truncate(cfg.max_candidates);
    Ok(candidates)
}

/// Grasp style for the central-lift strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftStyle {
    /// Tip at the top-face center.
    Top,
    /// Tip at the box center.
    Center,
}

impl LiftStyle {
    pub fn parse(s: &str) -> Option<LiftStyle> {
        match s {
            "top" => Some(LiftStyle::Top),
            "center" => Some(LiftStyle::Center),
            _ => None,
        }
    }
}

/// Top-down grasp closing at the object's center: the approach is
/// straight down and the jaw closes across the shorter horizontal extent.
pub fn central_lift_grasp(
    bbox: &Aabb3,
    style: LiftStyle,
    max_jaw_width: f64,
) -> Result<GraspCandidate, GraspError> {
    let size = bbox.size();
    let (jaw, width) = if size.x <= size.y {
        (Vec3::X, size.x)
    } else {
        (Vec3::Y, size.y)
    };
    if width > max_jaw_width {
        return Err(GraspError::ObjectTooWide);
    }
    let center = bbox.center();
    let tip = match style {
        LiftStyle::Center => center,
        LiftStyle::Top => Vec3::new(center.x, center.y, bbox.max.z),
    };
    let approach = Vec3::new(0.0, 0.0, -1.0);
    let x = jaw.cross(approach);
    let pose = Pose::new(tip, Quat::from_frame(x, jaw, approach));
    Ok(GraspCandidate { pose, width, base_score: 1.0, tip_point: tip })
}

/// Combined preference score for one candidate; terms for absent
/// preferences are omitted. The plane-normal term takes the absolute
/// cosine because a plane normal is sign-ambiguous.
pub fn preference_score(
    c: &GraspCandidate,
    pref: &GraspPreference,
    w: &PreferenceWeights,
) -> f64 {
    let mut score = w.quality * c.base_score;
    if let Some(p) = pref.preferred_position {
        let d2 = (c.tip_point - p).norm_squared();
        score += w.position * (-d2 / (2.0 * w.sigma_position * w.sigma_position)).exp();
    }
    if let Some(a) = pref.preferred_approach_direction {
        score += w.approach * c.approach_dir().dot(a).max(0.0);
    }
    if let Some(nrm) = pref.preferred_plane_normal {
        score += w.plane_normal * c.plane_normal().dot(nrm).abs();
    }
    score
}

/// Stable sort of candidates by descending preference score; ties keep
/// the original order.
pub fn rank_by_preference(
    cands: &[GraspCandidate],
    pref: &GraspPreference,
    w: &PreferenceWeights,
) -> Vec<GraspCandidate> {
    let mut scored: Vec<(f64, GraspCandidate)> = cands
        .iter()
        .map(|c| (preference_score(c, pref, w), *c))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    scored.into_iter().map(|(_, c)| c).collect()
}

/// Three-waypoint approach toward grasp point `p` along unit approach
/// vector `a`: exactly `[p - 0.1 a, p - 0.08 a, p]`.
pub fn pre_grasp_trajectory(p: Vec3, a: Vec3) -> Result<[Vec3; 3], GraspError> {
    if !a.is_unit(UNIT_TOL) {
        return Err(GraspError::InvalidApproach(a.norm()));
    }
    Ok([p - a * 0.1, p - a * 0.08, p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::distance_to_line;
    use crate::volume::CellState;

    fn empty_grid() -> OccupancyGrid {
        OccupancyGrid::filled(Vec3::new(-1.0, -1.0, 0.0), 0.01, [200, 200, 200], CellState::Free)
    }

    /// Cube surface cloud with exact outward normals, edge length `side`.
    fn cube_cloud(center: Vec3, side: f64, per_face: usize) -> PointCloud {
        let mut points = Vec::new();
        let mut normals = Vec::new();
        let h = side * 0.5;
        let axes = [
            (Vec3::X, Vec3::Y, Vec3::Z),
            (Vec3::Y, Vec3::Z, Vec3::X),
            (Vec3::Z, Vec3::X, Vec3::Y),
        ];
        let side_steps = (per_face as f64).sqrt().ceil() as usize;
        for (n, u, v) in axes {
            for sign in [-1.0, 1.0] {
                for i in 0..side_steps {
                    for j in 0..side_steps {
                        let a = (i as f64 + 0.5) / side_steps as f64 - 0.5;
                        let b = (j as f64 + 0.5) / side_steps as f64 - 0.5;
                        points.push(center + n * (sign * h) + u * (a * side) + v * (b * side));
                        normals.push(n * sign);
                    }
                }
            }
        }
        PointCloud::with_normals(points, normals).unwrap()
    }

    fn sphere_cloud(center: Vec3, radius: f64, n: usize) -> PointCloud {
        // Fibonacci sphere sampling.
        let mut points = Vec::new();
        let mut normals = Vec::new();
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        for i in 0..n {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let theta = golden * i as f64;
            let dir = Vec3::new(r * theta.cos(), y, r * theta.sin());
            points.push(center + dir * radius);
            normals.push(dir);
        }
        PointCloud::with_normals(points, normals).unwrap()
    }

    #[test]
    fn cube_grasps_align_with_face_normals() {
        let cloud = cube_cloud(Vec3::new(0.0, 0.0, 1.2), 0.06, 150);
        let grid = empty_grid();
        let cands = sample_adaptive_grasps(&cloud, &grid, &SampleConfig::default()).unwrap();
        assert!(!cands.is_empty() && cands.len() <= 10);
        for c in &cands {
            let jaw = c.jaw_axis();
            let best_axis_cos = [Vec3::X, Vec3::Y, Vec3::Z]
                .iter()
                .map(|a| jaw.dot(*a).abs())
                .fold(0.0f64, f64::max);
            let angle = best_axis_cos.clamp(-1.0, 1.0).acos().to_degrees();
            assert!(angle < 5.0, "jaw off face normal by {angle} deg");
            assert!((c.width - 0.06).abs() < 0.005, "width {}", c.width);
        }
        // Scores sorted descending.
        for pair in cands.windows(2) {
            assert!(pair[0].base_score >= pair[1].base_score);
        }
    }

    #[test]
    fn sphere_grasp_axes_pass_near_centroid() {
        let center = Vec3::new(0.1, -0.1, 1.1);
        let radius = 0.035;
        let cloud = sphere_cloud(center, radius, 400);
        let grid = empty_grid();
        let cands = sample_adaptive_grasps(&cloud, &grid, &SampleConfig::default()).unwrap();
        for c in &cands {
            let d = distance_to_line(center, c.tip_point, c.jaw_axis());
            assert!(d <= radius * 0.5 + 1e-9, "jaw line misses centroid by {d}");
        }
    }

    #[test]
    fn single_point_cloud_has_no_grasp() {
        let cloud = PointCloud::with_normals(vec![Vec3::ZERO], vec![Vec3::Z]).unwrap();
        let err = sample_adaptive_grasps(&cloud, &empty_grid(), &SampleConfig::default());
        assert!(matches!(err, Err(GraspError::NoGraspFound)));
    }

    #[test]
    fn occupied_grid_rejects_candidates() {
        let cloud = cube_cloud(Vec3::new(0.0, 0.0, 1.0), 0.06, 100);
        let mut grid = empty_grid();
        // Everything occupied except the object's own (exempt) region.
        grid.fill_region(
            &Aabb3::new(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 2.0)),
            CellState::Occupied,
        );
        let err = sample_adaptive_grasps(&cloud, &grid, &SampleConfig::default());
        assert!(matches!(err, Err(GraspError::NoGraspFound)));
    }

    #[test]
    fn returned_candidates_are_collision_free() {
        let cloud = cube_cloud(Vec3::new(0.0, 0.0, 1.0), 0.05, 120);
        let mut grid = empty_grid();
        // A wall near the cube constrains approaches from +x.
        grid.fill_region(
            &Aabb3::new(Vec3::new(0.06, -0.5, 0.5), Vec3::new(0.12, 0.5, 1.5)),
            CellState::Occupied,
        );
        let cfg = SampleConfig::default();
        let cands = sample_adaptive_grasps(&cloud, &grid, &cfg).unwrap();
        let exempt = cloud.aabb().unwrap().inflate(0.02);
        for c in &cands {
            for p in cfg.gripper.sample_points(&c.pose, c.width) {
                if !exempt.contains(p) {
                    assert_ne!(grid.query(p), CellQuery::Occupied);
                }
            }
        }
    }

    #[test]
    fn central_lift_center_and_top() {
        let bbox = Aabb3::new(Vec3::ZERO, Vec3::new(0.1, 0.1, 0.1));
        let center = central_lift_grasp(&bbox, LiftStyle::Center, 0.8).unwrap();
        assert!(center.tip_point.distance(Vec3::new(0.05, 0.05, 0.05)) < 1e-12);
        assert!(center.approach_dir().distance(Vec3::new(0.0, 0.0, -1.0)) < 1e-12);
        let top = central_lift_grasp(&bbox, LiftStyle::Top, 0.8).unwrap();
        assert!(top.tip_point.distance(Vec3::new(0.05, 0.05, 0.1)) < 1e-12);
    }

    #[test]
    fn central_lift_jaw_takes_shorter_extent() {
        let bbox = Aabb3::new(Vec3::ZERO, Vec3::new(0.12, 0.05, 0.06));
        let g = central_lift_grasp(&bbox, LiftStyle::Center, 0.08).unwrap();
        assert!(g.jaw_axis().dot(Vec3::Y).abs() > 1.0 - 1e-9);
        assert!((g.width - 0.05).abs() < 1e-12);
        // Frame is right-handed orthonormal.
        let (x, y, z) = (g.plane_normal(), g.jaw_axis(), g.approach_dir());
        assert!(x.cross(y).distance(z) < 1e-9);
    }

    #[test]
    fn central_lift_too_wide_errors() {
        let bbox = Aabb3::new(Vec3::ZERO, Vec3::new(0.2, 0.3, 0.1));
        assert!(matches!(
            central_lift_grasp(&bbox, LiftStyle::Center, 0.08),
            Err(GraspError::ObjectTooWide)
        ));
    }

    fn candidate_with(approach: Vec3, jaw: Vec3, score: f64) -> GraspCandidate {
        let pose = frame_from(Vec3::new(0.0, 0.0, 1.0), jaw, approach).unwrap();
        GraspCandidate { pose, width: 0.05, base_score: score, tip_point: pose.position }
    }

    #[test]
    fn approach_preference_reorders() {
        let a = candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::X, 0.5);
        let b = candidate_with(Vec3::Y, Vec3::X, 0.5);
        let pref = GraspPreference {
            preferred_approach_direction: Some(Vec3::Y),
            ..Default::default()
        };
        let ranked = rank_by_preference(&[a, b], &pref, &PreferenceWeights::default());
        assert!(ranked[0].approach_dir().dot(Vec3::Y) > 0.99);
    }

    #[test]
    fn no_preference_keeps_base_order() {
        let cands = vec![
            candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::X, 0.9),
            candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::Y, 0.7),
            candidate_with(Vec3::Y, Vec3::X, 0.8),
        ];
        let ranked =
            rank_by_preference(&cands, &GraspPreference::default(), &PreferenceWeights::default());
        let scores: Vec<f64> = ranked.iter().map(|c| c.base_score).collect();
        assert_eq!(scores, vec![0.9, 0.8, 0.7]);
    }

    #[test]
    fn plane_normal_term_is_sign_invariant() {
        let c = candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::X, 0.0);
        let pn = c.plane_normal();
        let w = PreferenceWeights { quality: 0.0, ..Default::default() };
        let up = GraspPreference { preferred_plane_normal: Some(pn), ..Default::default() };
        let down = GraspPreference { preferred_plane_normal: Some(-pn), ..Default::default() };
        let s_up = preference_score(&c, &up, &w);
        let s_down = preference_score(&c, &down, &w);
        assert!((s_up - 1.0).abs() < 1e-12);
        assert!((s_down - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_invariant_under_base_score_scaling() {
        let cands = vec![
            candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::X, 0.9),
            candidate_with(Vec3::new(0.0, 0.0, -1.0), Vec3::Y, 0.4),
        ];
        let w = PreferenceWeights::default();
        let ranked = rank_by_preference(&cands, &GraspPreference::default(), &w);
        let scaled: Vec<GraspCandidate> = cands
            .iter()
            .map(|c| GraspCandidate { base_score: c.base_score * 0.31, ..*c })
            .collect();
        let ranked_scaled = rank_by_preference(&scaled, &GraspPreference::default(), &w);
        assert!(ranked[0].jaw_axis().distance(ranked_scaled[0].jaw_axis()) < 1e-12);
    }

    #[test]
    fn pre_grasp_exact_waypoints() {
        let p = Vec3::new(0.5, 0.0, 1.2);
        let a = Vec3::new(0.0, 0.0, -1.0);
        let wps = pre_grasp_trajectory(p, a).unwrap();
        assert!(wps[0].distance(Vec3::new(0.5, 0.0, 1.3)) < 1e-15);
        assert!(wps[1].distance(Vec3::new(0.5, 0.0, 1.28)) < 1e-15);
        assert_eq!(wps[2], p);
        let wps = pre_grasp_trajectory(Vec3::ZERO, Vec3::X).unwrap();
        assert!(wps[0].distance(Vec3::new(-0.1, 0.0, 0.0)) < 1e-15);
        assert!(wps[1].distance(Vec3::new(-0.08, 0.0, 0.0)) < 1e-15);
        assert_eq!(wps[2], Vec3::ZERO);
    }

    #[test]
    fn pre_grasp_rejects_zero_approach() {
        assert!(matches!(
            pre_grasp_trajectory(Vec3::ZERO, Vec3::ZERO),
            Err(GraspError::InvalidApproach(_))
        ));
    }

    #[test]
    fn pre_grasp_spacing_along_approach() {
        let p = Vec3::new(0.2, -0.4, 1.1);
        let a = Vec3::new(1.0, 2.0, -0.5).normalized().unwrap();
        let wps = pre_grasp_trajectory(p, a).unwrap();
        assert!((wps[0].distance(wps[1]) - 0.02).abs() < 1e-12);
        assert!((wps[1].distance(wps[2]) - 0.08).abs() < 1e-12);
        assert_eq!(wps[2], p);
    }
}
