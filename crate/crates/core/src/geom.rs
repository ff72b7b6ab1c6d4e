//! Core geometric types shared by every other module: 3D vectors, unit
//! quaternions, rigid poses, axis-aligned boxes, and point clouds.
//!
//! Conventions: right-handed world frame with z up, angles in radians
//! internally (degrees appear only at API boundaries that specify them),
//! quaternions stored as (w, x, y, z) and normalized on construction.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Tolerance used when validating that a direction is unit length.
pub const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("axis must be unit length, got norm {0}")]
    NonUnitAxis(f64),
    #[error("degenerate direction (norm {0})")]
    DegenerateDirection(f64),
    #[error("normals length {normals} does not match points length {points}")]
    NormalsMismatch { points: usize, normals: usize },
}

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

/// A 3D vector in meters, or a unitless direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or an error for near-zero input.
    pub fn normalized(self) -> Result<Vec3, GeomError> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(GeomError::DegenerateDirection(n));
        }
        Ok(self / n)
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Vec3, t: f64) -> Vec3 {
        self + (other - self) * t
    }

    pub fn min_components(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x.min(other.x), self.y.min(other.y), self.z.min(other.z))
    }

    pub fn max_components(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x.max(other.x), self.y.max(other.y), self.z.max(other.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Any unit vector orthogonal to `self` (which must be nonzero).
    pub fn any_orthogonal(self) -> Vec3 {
        let trial = if self.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        let v = self.cross(trial);
        v.normalized().unwrap_or(Vec3::Z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

// ---------------------------------------------------------------------------
// Quat
// ---------------------------------------------------------------------------

/// Unit quaternion (w, x, y, z) representing a 3D rotation.
///
/// Normalized on construction; all constructors keep the invariant
/// `norm = 1 ± 1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds a quaternion from raw components, normalizing them.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Quat {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        debug_assert!(n > 1e-12, "zero-norm quaternion");
        Quat { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let a = axis.normalized().unwrap_or(Vec3::Z);
        let half = angle * 0.5;
        let s = half.sin();
        Quat::new(half.cos(), a.x * s, a.y * s, a.z * s)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(self) -> Quat {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Inverse rotation; equals the conjugate for unit quaternions.
    pub fn inverse(self) -> Quat {
        self.conjugate()
    }

    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Rotates a vector by this quaternion.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // q * (0, v) * q^-1 expanded through the cross-product form.
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// 3x3 rotation matrix (rows) equivalent to this quaternion.
    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Quaternion from a rotation matrix (rows); Shepperd's method.
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Quat {
        let trace = m[0][0] + m[1][1] + m[2][2];
        if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            Quat::new(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Quat::new(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Quat::new(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Quat::new(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        }
    }

    /// Rotation from orthonormal frame axes given as world-space columns.
    pub fn from_frame(x: Vec3, y: Vec3, z: Vec3) -> Quat {
        Quat::from_matrix(&[[x.x, y.x, z.x], [x.y, y.y, z.y], [x.z, y.z, z.z]])
    }

    /// Spherical linear interpolation; falls back to nlerp near parallel.
    pub fn slerp(self, other: Quat, t: f64) -> Quat {
        let mut d = self.dot(other);
        let mut o = other;
        if d < 0.0 {
            d = -d;
            o = Quat { w: -other.w, x: -other.x, y: -other.y, z: -other.z };
        }
        if d > 1.0 - 1e-10 {
            return Quat::new(
                self.w + (o.w - self.w) * t,
                self.x + (o.x - self.x) * t,
                self.y + (o.y - self.y) * t,
                self.z + (o.z - self.z) * t,
            );
        }
        let theta = d.clamp(-1.0, 1.0).acos();
        let sin_theta = theta.sin();
        let a = ((1.0 - t) * theta).sin() / sin_theta;
        let b = (t * theta).sin() / sin_theta;
        Quat::new(
            a * self.w + b * o.w,
            a * self.x + b * o.x,
            a * self.y + b * o.y,
            a * self.z + b * o.z,
        )
    }

    /// Smallest rotation angle between two orientations, radians.
    pub fn angle_to(self, other: Quat) -> f64 {
        // atan2 form keeps precision near zero where acos loses ~8 digits.
        let d = self.inverse() * other;
        let v = Vec3::new(d.x, d.y, d.z).norm();
        2.0 * v.atan2(d.w.abs())
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, o: Quat) -> Quat {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

/// Rigid transform in SE(3): position plus unit-quaternion orientation.
///
/// Serialized in scene files as the flat array `[x, y, z, qw, qx, qy, qz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { position: Vec3::ZERO, orientation: Quat::IDENTITY };

    pub fn new(position: Vec3, orientation: Quat) -> Pose {
        Pose { position, orientation }
    }

    pub fn from_position(position: Vec3) -> Pose {
        Pose { position, orientation: Quat::IDENTITY }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation.rotate(other.position),
            orientation: self.orientation * other.orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose { position: -inv.rotate(self.position), orientation: inv }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.position + self.orientation.rotate(p)
    }

    pub fn transform_dir(&self, d: Vec3) -> Vec3 {
        self.orientation.rotate(d)
    }

    /// Interpolates position linearly and orientation by slerp.
    pub fn interpolate(&self, other: &Pose, t: f64) -> Pose {
        Pose {
            position: self.position.lerp(other.position, t),
            orientation: self.orientation.slerp(other.orientation, t),
        }
    }
}

// ---------------------------------------------------------------------------
// Aabb3
// ---------------------------------------------------------------------------

/// Axis-aligned box with `min ≤ max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb3 {
    pub fn new(min: Vec3, max: Vec3) -> Aabb3 {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb3 { min, max }
    }

    /// Smallest box containing both corner points, in any order.
    pub fn from_corners(a: Vec3, b: Vec3) -> Aabb3 {
        Aabb3 { min: a.min_components(b), max: a.max_components(b) }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Aabb3> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb3 { min: first, max: first };
        for p in it {
            b.min = b.min.min_components(*p);
            b.max = b.max.max_components(*p);
        }
        Some(b)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s.x * s.y * s.z
    }

    /// Inclusive containment on all faces.
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Containment in the xy footprint only.
    pub fn footprint_contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, margin: f64) -> Aabb3 {
        let m = Vec3::new(margin, margin, margin);
        Aabb3 { min: self.min - m, max: self.max + m }
    }

    pub fn union(&self, other: &Aabb3) -> Aabb3 {
        Aabb3 {
            min: self.min.min_components(other.min),
            max: self.max.max_components(other.max),
        }
    }

    pub fn intersection(&self, other: &Aabb3) -> Option<Aabb3> {
        let min = self.min.max_components(other.min);
        let max = self.max.min_components(other.max);
        if min.x <= max.x && min.y <= max.y && min.z <= max.z {
            Some(Aabb3 { min, max })
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &Aabb3) -> bool {
        self.intersection(other).is_some()
    }

    /// Intersection-over-union of box volumes; 0 when disjoint.
    pub fn iou(&self, other: &Aabb3) -> f64 {
        let inter = match self.intersection(other) {
            Some(b) => b.volume(),
            None => return 0.0,
        };
        let union = self.volume() + other.volume() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }
}

/// Center of an axis-aligned box.
pub fn aabb_center(b: &Aabb3) -> Vec3 {
    b.center()
}

/// Inclusive point-in-box test.
pub fn point_in_aabb(p: Vec3, b: &Aabb3) -> bool {
    b.contains(p)
}

// ---------------------------------------------------------------------------
// PointCloud
// ---------------------------------------------------------------------------

/// A set of 3D points with optional per-point unit normals.
#[derive(Debug, Clone, Default)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> PointCloud {
        PointCloud { points, normals: None }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<PointCloud, GeomError> {
        if points.len() != normals.len() {
            return Err(GeomError::NormalsMismatch {
                points: points.len(),
                normals: normals.len(),
            });
        }
        Ok(PointCloud { points, normals: Some(normals) })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies a rigid transform to every point (and rotates normals).
    pub fn transformed(&self, t: &Pose) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| t.transform_point(*p)).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| t.transform_dir(*n)).collect()),
        }
    }

    pub fn aabb(&self) -> Option<Aabb3> {
        Aabb3::from_points(&self.points)
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::ZERO, |acc, p| acc + *p);
        Some(sum / self.points.len() as f64)
    }

    /// Keeps only points (and their normals) satisfying the predicate.
    pub fn filtered(&self, mut keep: impl FnMut(usize, Vec3) -> bool) -> PointCloud {
        let mut points = Vec::new();
        let mut normals = self.normals.as_ref().map(|_| Vec::new());
        for (i, p) in self.points.iter().enumerate() {
            if keep(i, *p) {
                points.push(*p);
                if let (Some(out), Some(ns)) = (normals.as_mut(), self.normals.as_ref()) {
                    out.push(ns[i]);
                }
            }
        }
        PointCloud { points, normals }
    }

    pub fn extend(&mut self, other: &PointCloud) {
        self.points.extend_from_slice(&other.points);
        match (&mut self.normals, &other.normals) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (Some(_), None) => self.normals = None,
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Rotations about arbitrary axis lines
// ---------------------------------------------------------------------------

/// Rotates `point` by `angle` radians about the line through `axis_point`
/// with direction `axis_dir` (Rodrigues formula).
///
/// `axis_dir` must be unit length within 1e-6.
pub fn rotate_about_axis(
    point: Vec3,
    axis_dir: Vec3,
    axis_point: Vec3,
    angle: f64,
) -> Result<Vec3, GeomError> {
    if !axis_dir.is_unit(UNIT_TOL) {
        return Err(GeomError::NonUnitAxis(axis_dir.norm()));
    }
    let k = axis_dir;
    let v = point - axis_point;
    let (s, c) = angle.sin_cos();
    let rotated = v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
    Ok(axis_point + rotated)
}

/// Distance from a point to the line through `origin` with direction `dir`
/// (unit length assumed).
pub fn distance_to_line(p: Vec3, origin: Vec3, dir: Vec3) -> f64 {
    let v = p - origin;
    (v - dir * v.dot(dir)).norm()
}

/// Orthogonal projection of a point onto the line through `origin` with
/// unit direction `dir`.
pub fn project_onto_line(p: Vec3, origin: Vec3, dir: Vec3) -> Vec3 {
    origin + dir * (p - origin).dot(dir)
}

// ---------------------------------------------------------------------------
// Symmetric 3x3 eigendecomposition (Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) and matching unit eigenvectors of a symmetric
/// 3x3 matrix, via cyclic Jacobi rotations.
pub fn sym_eigen3(m: [[f64; 3]; 3]) -> ([f64; 3], [Vec3; 3]) {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..32 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-24 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-30 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v[k][p];
                let vkq = v[k][q];
                v[k][p] = c * vkp - s * vkq;
                v[k][q] = s * vkp + c * vkq;
            }
        }
    }
    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|i| (a[i][i], Vec3::new(v[0][i], v[1][i], v[2][i])))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    (
        [pairs[0].0, pairs[1].0, pairs[2].0],
        [pairs[0].1, pairs[1].1, pairs[2].1],
    )
}
