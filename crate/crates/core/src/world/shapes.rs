//! Primitive shapes composing scene objects: solid boxes, open boxes
//! (five-panel containers), cylinders, and spheres. All queries operate in
//! the shape's local frame with the shape centered at the origin;
//! cylinders are axis-aligned with local z.

use crate::geom::{Aabb3, Vec3};

/// Which face of an open box is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub fn axis(self) -> usize {
        match self {
            Face::PosX | Face::NegX => 0,
            Face::PosY | Face::NegY => 1,
            Face::PosZ | Face::NegZ => 2,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Face::PosX | Face::PosY | Face::PosZ => 1.0,
            Face::NegX | Face::NegY | Face::NegZ => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Face::PosX => "posx",
            Face::NegX => "negx",
            Face::PosY => "posy",
            Face::NegY => "negy",
            Face::PosZ => "posz",
            Face::NegZ => "negz",
        }
    }

    pub fn parse(s: &str) -> Option<Face> {
        match s {
            "posx" => Some(Face::PosX),
            "negx" => Some(Face::NegX),
            "posy" => Some(Face::PosY),
            "negy" => Some(Face::NegY),
            "posz" => Some(Face::PosZ),
            "negz" => Some(Face::NegZ),
            _ => None,
        }
    }
}

/// Primitive geometry of one rigid part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Box { size: Vec3 },
    /// Container: five wall slabs of thickness `wall`, missing the `open`
    /// face. `size` is the outer extent.
    OpenBox { size: Vec3, wall: f64, open: Face },
    Cylinder { radius: f64, height: f64 },
    Sphere { radius: f64 },
}

fn vec_component(v: Vec3, axis: usize) -> f64 {
    match axis {
        0 => v.x,
        1 => v.y,
        _ => v.z,
    }
}

fn with_component(mut v: Vec3, axis: usize, value: f64) -> Vec3 {
    match axis {
        0 => v.x = value,
        1 => v.y = value,
        _ => v.z = value,
    }
    v
}

fn axis_unit(axis: usize) -> Vec3 {
    match axis {
        0 => Vec3::X,
        1 => Vec3::Y,
        _ => Vec3::Z,
    }
}

impl ShapeKind {
    pub fn local_aabb(&self) -> Aabb3 {
        let half = match *self {
            ShapeKind::Box { size } | ShapeKind::OpenBox { size, .. } => size * 0.5,
            ShapeKind::Cylinder { radius, height } => Vec3::new(radius, radius, height * 0.5),
            ShapeKind::Sphere { radius } => Vec3::new(radius, radius, radius),
        };
        Aabb3::new(-half, half)
    }

    /// Box slabs approximating the shape: one for a solid box, five for an
    /// open box; cylinders and spheres are handled analytically and return
    /// their bounding slab.
    pub fn slabs(&self) -> Vec<(Vec3, Vec3)> {
        match *self {
            ShapeKind::Box { size } => vec![(Vec3::ZERO, size)],
            ShapeKind::OpenBox { size, wall, open } => {
                let mut out = Vec::with_capacity(5);
                for face in [Face::PosX, Face::NegX, Face::PosY, Face::NegY, Face::PosZ, Face::NegZ] {
                    if face == open {
                        continue;
                    }
                    let axis = face.axis();
                    let extent = vec_component(size, axis);
                    let center = with_component(
                        Vec3::ZERO,
                        axis,
                        face.sign() * (extent - wall) * 0.5,
                    );
                    let slab = with_component(size, axis, wall);
                    out.push((center, slab));
                }
                out
            }
            ShapeKind::Cylinder { .. } | ShapeKind::Sphere { .. } => {
                let b = self.local_aabb();
                vec![(b.center(), b.size())]
            }
        }
    }

    /// Inner cavity of a container, extending to the plane of the open
    /// face; `None` for non-container shapes.
    pub fn interior_local(&self) -> Option<Aabb3> {
        match *self {
            ShapeKind::OpenBox { size, wall, open } => {
                let mut min = -(size * 0.5) + Vec3::new(wall, wall, wall);
                let mut max = size * 0.5 - Vec3::new(wall, wall, wall);
                let axis = open.axis();
                if open.sign() > 0.0 {
                    max = with_component(max, axis, vec_component(size * 0.5, axis));
                } else {
                    min = with_component(min, axis, -vec_component(size * 0.5, axis));
                }
                Some(Aabb3::new(min, max))
            }
            _ => None,
        }
    }

    /// Signed-ish distance from a local point to the shape surface;
    /// non-positive inside.
    pub fn distance(&self, p: Vec3) -> f64 {
        match *self {
            ShapeKind::Box { size } => box_distance(p, size),
            ShapeKind::OpenBox { .. } => self
                .slabs()
                .into_iter()
                .map(|(c, s)| box_distance(p - c, s))
                .fold(f64::INFINITY, f64::min),
            ShapeKind::Cylinder { radius, height } => {
                let dr = (p.x * p.x + p.y * p.y).sqrt() - radius;
                let dz = p.z.abs() - height * 0.5;
                if dr <= 0.0 && dz <= 0.0 {
                    dr.max(dz)
                } else {
                    let dr = dr.max(0.0);
                    let dz = dz.max(0.0);
                    (dr * dr + dz * dz).sqrt()
                }
            }
            ShapeKind::Sphere { radius } => p.norm() - radius,
        }
    }

    /// Width of the shape's support projection along a local direction
    /// (unit length assumed).
    pub fn extent_along(&self, dir: Vec3) -> f64 {
        match *self {
            ShapeKind::Box { size } | ShapeKind::OpenBox { size, .. } => {
                size.x * dir.x.abs() + size.y * dir.y.abs() + size.z * dir.z.abs()
            }
            ShapeKind::Cylinder { radius, height } => {
                2.0 * radius * (dir.x * dir.x + dir.y * dir.y).sqrt() + height * dir.z.abs()
            }
            ShapeKind::Sphere { radius } => 2.0 * radius,
        }
    }

    /// Nearest ray intersection `t` (for unnormalized `dir`, `t` is in
    /// units of `dir`) and the outward local normal at the hit.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, t_min: f64) -> Option<(f64, Vec3)> {
        match *self {
            ShapeKind::Box { size } => ray_box(origin, dir, Vec3::ZERO, size, t_min),
            ShapeKind::OpenBox { .. } => self
                .slabs()
                .into_iter()
                .filter_map(|(c, s)| ray_box(origin, dir, c, s, t_min))
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap()),
            ShapeKind::Cylinder { radius, height } => {
                ray_cylinder(origin, dir, radius, height, t_min)
            }
            ShapeKind::Sphere { radius } => ray_sphere(origin, dir, radius, t_min),
        }
    }

    /// Surface sample points with outward normals, roughly `step` apart.
    pub fn surface_points(&self, step: f64) -> Vec<(Vec3, Vec3)> {
        let mut out = Vec::new();
        match *self {
            ShapeKind::Box { size } => sample_box(Vec3::ZERO, size, step, &mut out),
            ShapeKind::OpenBox { .. } => {
                for (c, s) in self.slabs() {
                    sample_box(c, s, step, &mut out);
                }
                // Panel faces overlap where walls meet; drop points buried
                // inside a neighboring panel.
                out.retain(|(p, _)| self.distance(*p) >= -1e-9);
            }
            ShapeKind::Cylinder { radius, height } => {
                let n_theta = ((2.0 * std::f64::consts::PI * radius / step).ceil() as usize).max(8);
                let n_z = ((height / step).ceil() as usize).max(2);
                for iz in 0..=n_z {
                    let z = height * (iz as f64 / n_z as f64 - 0.5);
                    for it in 0..n_theta {
                        let theta = 2.0 * std::f64::consts::PI * it as f64 / n_theta as f64;
                        let n = Vec3::new(theta.cos(), theta.sin(), 0.0);
                        out.push((n * radius + Vec3::new(0.0, 0.0, z), n));
                    }
                }
                // Caps.
                let n_r = ((radius / step).ceil() as usize).max(1);
                for sign in [-1.0, 1.0] {
                    for ir in 0..=n_r {
                        let r = radius * ir as f64 / n_r as f64;
                        let n_t = ((2.0 * std::f64::consts::PI * r / step).ceil() as usize).max(1);
                        for it in 0..n_t {
                            let theta = 2.0 * std::f64::consts::PI * it as f64 / n_t as f64;
                            out.push((
                                Vec3::new(r * theta.cos(), r * theta.sin(), sign * height * 0.5),
                                Vec3::new(0.0, 0.0, sign),
                            ));
                        }
                    }
                }
            }
            ShapeKind::Sphere { radius } => {
                let area = 4.0 * std::f64::consts::PI * radius * radius;
                let n = ((area / (step * step)).ceil() as usize).clamp(32, 4000);
                let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
                for i in 0..n {
                    let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - y * y).sqrt();
                    let theta = golden * i as f64;
                    let dir = Vec3::new(r * theta.cos(), y, r * theta.sin());
                    out.push((dir * radius, dir));
                }
            }
        }
        out
    }
}

fn box_distance(p: Vec3, size: Vec3) -> f64 {
    let h = size * 0.5;
    let q = Vec3::new(p.x.abs() - h.x, p.y.abs() - h.y, p.z.abs() - h.z);
    let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
    let inside = q.x.max(q.y).max(q.z).min(0.0);
    outside + inside
}

fn ray_box(origin: Vec3, dir: Vec3, center: Vec3, size: Vec3, t_min: f64) -> Option<(f64, Vec3)> {
    let h = size * 0.5;
    let o = origin - center;
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut normal = Vec3::ZERO;
    for axis in 0..3 {
        let od = vec_component(o, axis);
        let dd = vec_component(dir, axis);
        let hh = vec_component(h, axis);
        if dd.abs() < 1e-12 {
            if od.abs() > hh {
                return None;
            }
            continue;
        }
        let mut t0 = (-hh - od) / dd;
        let mut t1 = (hh - od) / dd;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        // The entry normal is the face on the side the ray comes from.
        if t0 > t_enter {
            t_enter = t0;
            normal = axis_unit(axis) * (-dd.signum());
        }
        t_exit = t_exit.min(t1);
    }
    if t_enter > t_exit || t_exit < t_min {
        return None;
    }
    if t_enter >= t_min {
        Some((t_enter, normal))
    } else {
        None // origin inside the box; treated as no forward surface
    }
}

fn ray_sphere(origin: Vec3, dir: Vec3, radius: f64, t_min: f64) -> Option<(f64, Vec3)> {
    let a = dir.dot(dir);
    let b = 2.0 * origin.dot(dir);
    let c = origin.dot(origin) - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
        if t >= t_min {
            let p = origin + dir * t;
            return Some((t, p.normalized().unwrap_or(Vec3::Z)));
        }
    }
    None
}

fn ray_cylinder(origin: Vec3, dir: Vec3, radius: f64, height: f64, t_min: f64) -> Option<(f64, Vec3)> {
    let h = height * 0.5;
    let mut best: Option<(f64, Vec3)> = None;
    let mut consider = |t: f64, n: Vec3| {
        if t >= t_min && best.map_or(true, |(bt, _)| t < bt) {
            best = Some((t, n));
        }
    };
    // Side surface.
    let a = dir.x * dir.x + dir.y * dir.y;
    if a > 1e-12 {
        let b = 2.0 * (origin.x * dir.x + origin.y * dir.y);
        let c = origin.x * origin.x + origin.y * origin.y - radius * radius;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                let z = origin.z + dir.z * t;
                if z.abs() <= h {
                    let p = origin + dir * t;
                    let n = Vec3::new(p.x, p.y, 0.0).normalized().unwrap_or(Vec3::X);
                    consider(t, n);
                }
            }
        }
    }
    // Caps.
    if dir.z.abs() > 1e-12 {
        for sign in [-1.0, 1.0] {
            let t = (sign * h - origin.z) / dir.z;
            let p = origin + dir * t;
            if p.x * p.x + p.y * p.y <= radius * radius {
                consider(t, Vec3::new(0.0, 0.0, sign));
            }
        }
    }
    best
}

fn sample_box(center: Vec3, size: Vec3, step: f64, out: &mut Vec<(Vec3, Vec3)>) {
    let h = size * 0.5;
    let counts = |a: f64| ((a / step).ceil() as usize).max(1);
    let (nx, ny, nz) = (counts(size.x), counts(size.y), counts(size.z));
    // Six faces, sampled on regular lattices.
    for (axis, n_u, n_v) in [(0usize, ny, nz), (1, nx, nz), (2, nx, ny)] {
        for sign in [-1.0, 1.0] {
            let normal = axis_unit(axis) * sign;
            let face_center = center + normal * vec_component(h, axis);
            let (u_axis, v_axis) = match axis {
                0 => (1usize, 2usize),
                1 => (0, 2),
                _ => (0, 1),
            };
            for iu in 0..=n_u {
                for iv in 0..=n_v {
                    let du = vec_component(size, u_axis) * (iu as f64 / n_u as f64 - 0.5);
                    let dv = vec_component(size, v_axis) * (iv as f64 / n_v as f64 - 0.5);
                    let p = face_center
                        + axis_unit(u_axis) * du
                        + axis_unit(v_axis) * dv;
                    out.push((p, normal));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_ray_hits_front_face() {
        let shape = ShapeKind::Box { size: Vec3::new(0.2, 0.2, 0.2) };
        let (t, n) = shape
            .ray_hit(Vec3::new(-1.0, 0.0, 0.0), Vec3::X, 0.0)
            .unwrap();
        assert!((t - 0.9).abs() < 1e-12);
        assert!(n.distance(-Vec3::X) < 1e-12);
        assert!(shape.ray_hit(Vec3::new(-1.0, 0.5, 0.0), Vec3::X, 0.0).is_none());
    }

    #[test]
    fn open_box_ray_passes_through_opening() {
        let shape = ShapeKind::OpenBox {
            size: Vec3::new(0.2, 0.2, 0.1),
            wall: 0.01,
            open: Face::PosZ,
        };
        // Straight down through the opening hits the bottom's inner face.
        let (t, n) = shape
            .ray_hit(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0)
            .unwrap();
        assert!((t - (1.0 - (-0.04))).abs() < 1e-9, "t = {t}");
        assert!(n.distance(Vec3::Z) < 1e-12);
        // Down onto the rim hits the wall top at the outer surface.
        let (t, _) = shape
            .ray_hit(Vec3::new(0.095, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0)
            .unwrap();
        assert!((t - 0.95).abs() < 1e-9);
    }

    #[test]
    fn sphere_and_cylinder_rays() {
        let sph = ShapeKind::Sphere { radius: 0.05 };
        let (t, n) = sph.ray_hit(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0).unwrap();
        assert!((t - 0.95).abs() < 1e-12);
        assert!(n.distance(Vec3::Z) < 1e-12);
        let cyl = ShapeKind::Cylinder { radius: 0.04, height: 0.1 };
        let (t, n) = cyl.ray_hit(Vec3::new(-1.0, 0.0, 0.0), Vec3::X, 0.0).unwrap();
        assert!((t - 0.96).abs() < 1e-12);
        assert!(n.distance(-Vec3::X) < 1e-12);
        let (t, n) = cyl.ray_hit(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0).unwrap();
        assert!((t - 0.95).abs() < 1e-12);
        assert!(n.distance(Vec3::Z) < 1e-12);
    }

    #[test]
    fn interior_of_open_box() {
        let shape = ShapeKind::OpenBox {
            size: Vec3::new(0.2, 0.3, 0.1),
            wall: 0.01,
            open: Face::PosZ,
        };
        let interior = shape.interior_local().unwrap();
        assert!((interior.min.z - (-0.04)).abs() < 1e-12);
        assert!((interior.max.z - 0.05).abs() < 1e-12);
        assert!((interior.min.x - (-0.09)).abs() < 1e-12);
        assert!(ShapeKind::Sphere { radius: 0.1 }.interior_local().is_none());
    }

    #[test]
    fn distances_and_extents() {
        let b = ShapeKind::Box { size: Vec3::new(0.1, 0.2, 0.3) };
        assert!((b.distance(Vec3::new(0.15, 0.0, 0.0)) - 0.1).abs() < 1e-12);
        assert!(b.distance(Vec3::ZERO) < 0.0);
        assert!((b.extent_along(Vec3::X) - 0.1).abs() < 1e-12);
        assert!((b.extent_along(Vec3::Y) - 0.2).abs() < 1e-12);
        let s = ShapeKind::Sphere { radius: 0.04 };
        assert!((s.extent_along(Vec3::new(0.3, 0.5, 0.8).normalized().unwrap()) - 0.08).abs() < 1e-12);
    }

    #[test]
    fn surface_points_carry_outward_normals() {
        for shape in [
            ShapeKind::Box { size: Vec3::new(0.06, 0.06, 0.06) },
            ShapeKind::Sphere { radius: 0.03 },
            ShapeKind::Cylinder { radius: 0.03, height: 0.08 },
            ShapeKind::OpenBox { size: Vec3::new(0.15, 0.15, 0.07), wall: 0.01, open: Face::PosZ },
        ] {
            let samples = shape.surface_points(0.01);
            assert!(samples.len() > 30);
            let mut outward = 0usize;
            for (p, n) in &samples {
                assert!((n.norm() - 1.0).abs() < 1e-9);
                // On the surface: distance near zero.
                assert!(shape.distance(*p).abs() < 1e-6, "{shape:?} point {p:?}");
                if shape.distance(*p + *n * 0.005) > 0.004 {
                    outward += 1;
                }
            }
            // Seam points where panels meet may step into a neighbor;
            // everywhere else the normal leads outward.
            assert!(
                outward as f64 >= 0.85 * samples.len() as f64,
                "{shape:?}: only {outward}/{} normals lead outward",
                samples.len()
            );
        }
    }
}
