//! Object-level perception: merging per-view 2D detections into 3D
//! percepts by back-projection and box overlap, part-cloud extraction,
//! and RANSAC plane detection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{sym_eigen3, Aabb3, PointCloud, Vec3};
use crate::volume::{DepthImage, DEFAULT_VOXEL_SIZE};

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("detection references view {view_id} but only {views} views were given")]
    UnknownView { view_id: usize, views: usize },
    #[error("part '{0}' not found")]
    PartNotFound(String),
    #[error("no plane with at least {min_inliers} inliers")]
    NoPlaneFound { min_inliers: usize },
}

/// One 2D detection in a single view, in pixel coordinates
/// (u_min, v_min, u_max, v_max).
#[derive(Debug, Clone)]
pub struct Detection2D {
    pub view_id: usize,
    pub label: String,
    pub box2d: [f64; 4],
    pub confidence: f64,
}

/// Named axis-aligned region for one labeled part of an object.
#[derive(Debug, Clone)]
pub struct PartRegion {
    pub name: String,
    pub aabb: Aabb3,
}

/// One object-level percept: merged cloud, 3D box, and optional part
/// regions attached from the scene's ground-truth labels.
#[derive(Debug, Clone)]
pub struct ObjectPercept {
    /// Unique name in the scene; multiple instances of one label get
    /// suffixes by ascending x of the box center ("apple_0", "apple_1").
    pub name: String,
    pub label: String,
    pub bbox3d: Aabb3,
    pub cloud: PointCloud,
    pub support_surface_z: Option<f64>,
    pub parts: Vec<PartRegion>,
}

impl ObjectPercept {
    pub fn center(&self) -> Vec3 {
        self.bbox3d.center()
    }

    /// One line per percept: name, box, cloud size, support height.
    pub fn dump_line(&self) -> String {
        let b = &self.bbox3d;
        let support = match self.support_surface_z {
            Some(z) => format!("{z}"),
            None => "-".to_string(),
        };
        format!(
            "percept {} label {} bbox {} {} {} {} {} {} points {} support {}",
            self.name,
            self.label,
            b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z,
            self.cloud.len(),
            support,
        )
    }
}

/// Detected plane `n · x = offset` with its supporting inlier count.
#[derive(Debug, Clone, Copy)]
pub struct PlaneInfo {
    pub normal: Vec3,
    pub offset: f64,
    pub inlier_count: usize,
}

/// Knobs for multi-view matching.
#[derive(Debug, Clone, Copy)]
pub struct MatchConfig {
    /// Minimum 3D IoU between back-projected boxes for merging.
    pub iou_threshold: f64,
    /// Fallback merge criterion: intersection over the smaller volume.
    /// A straight-down view of a box yields a flat, near-zero-volume
    /// AABB whose IoU with a fuller side view vanishes; containment of
    /// the flat box in the fuller one still identifies the same object.
    pub containment_threshold: f64,
    /// Upper bound on back-projected pixels per detection box.
    pub max_points_per_box: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            iou_threshold: 0.25,
            containment_threshold: 0.5,
            max_points_per_box: 5000,
        }
    }
}

/// Merge test between two back-projected boxes, padded by one voxel so
/// single-face (flat) clouds have usable volume.
fn boxes_match(a: &Aabb3, b: &Aabb3, cfg: &MatchConfig) -> bool {
    let a = a.inflate(DEFAULT_VOXEL_SIZE);
    let b = b.inflate(DEFAULT_VOXEL_SIZE);
    if a.iou(&b) >= cfg.iou_threshold {
        return true;
    }
    let inter = match a.intersection(&b) {
        Some(x) => x.volume(),
        None => return false,
    };
    let smaller = a.volume().min(b.volume());
    smaller > 0.0 && inter / smaller >= cfg.containment_threshold
}

/// Output of [`match_views`]: percepts plus human-readable warnings for
/// detections that were dropped rather than failing the call.
#[derive(Debug, Clone, Default)]
pub struct MatchResult {
    pub percepts: Vec<ObjectPercept>,
    pub warnings: Vec<String>,
}

struct BackProjection {
    label: String,
    cloud: PointCloud,
    aabb: Aabb3,
}

fn back_project(
    det: &Detection2D,
    img: &DepthImage,
    normal_map: Option<&[Vec3]>,
    instance_map: Option<&[i32]>,
    max_points: usize,
) -> Option<BackProjection> {
    let u0 = det.box2d[0].max(0.0).floor() as usize;
    let v0 = det.box2d[1].max(0.0).floor() as usize;
    let u1 = (det.box2d[2].ceil() as usize).min(img.width);
    let v1 = (det.box2d[3].ceil() as usize).min(img.height);
    if u0 >= u1 || v0 >= v1 {
        return None;
    }
    // With an oracle instance map, scope the box to its dominant instance
    // (what a segmentation head would provide); plain boxes also pick up
    // background surfaces behind the object.
    let keep_id = instance_map.and_then(|map| {
        let mut counts: std::collections::HashMap<i32, usize> = Default::default();
        for v in v0..v1 {
            for u in u0..u1 {
                let id = map[v * img.width + u];
                if id >= 0 && DepthImage::is_valid(img.at(u, v)) {
                    *counts.entry(id).or_default() += 1;
                }
            }
        }
        counts
            .into_iter()
            .max_by_key(|&(id, n)| (n, std::cmp::Reverse(id)))
            .map(|(id, _)| id)
    });
    let total = (u1 - u0) * (v1 - v0);
    let stride = total.div_ceil(max_points).max(1);
    let mut points = Vec::new();
    let mut normals = normal_map.map(|_| Vec::new());
    let mut k = 0usize;
    for v in v0..v1 {
        for u in u0..u1 {
            k += 1;
            if (k - 1) % stride != 0 {
                continue;
            }
            let d = img.at(u, v);
            if !DepthImage::is_valid(d) {
                continue;
            }
            if let (Some(id), Some(map)) = (keep_id, instance_map) {
                if map[v * img.width + u] != id {
                    continue;
                }
            }
            points.push(img.unproject(u, v, d));
            if let (Some(ns), Some(map)) = (normals.as_mut(), normal_map) {
                ns.push(map[v * img.width + u]);
            }
        }
    }
    if points.is_empty() {
        return None;
    }
    let aabb = Aabb3::from_points(&points)?;
    let cloud = PointCloud { points, normals };
    Some(BackProjection { label: det.label.clone(), cloud, aabb })
}

/// Merges per-view detections into object percepts.
///
/// Each detection is back-projected through its depth image; same-label
/// projections whose 3D boxes overlap with IoU at or above the threshold
/// are merged transitively. Detections with no valid depth pixels are
/// dropped with a warning. Output is independent of detection order.
pub fn match_views(
    detections: &[Detection2D],
    views: &[DepthImage],
    normal_maps: &[Vec<Vec3>],
    instance_maps: &[Vec<i32>],
    cfg: &MatchConfig,
) -> Result<MatchResult, PerceptionError> {
    let mut result = MatchResult::default();
    // Sort for permutation invariance of the merge step.
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        let da = &detections[a];
        let db = &detections[b];
        (da.view_id, &da.label, da.box2d[0].to_bits(), da.box2d[1].to_bits())
            .cmp(&(db.view_id, &db.label, db.box2d[0].to_bits(), db.box2d[1].to_bits()))
    });
    let mut projections: Vec<BackProjection> = Vec::new();
    for &i in &order {
        let det = &detections[i];
        if det.view_id >= views.len() {
            return Err(PerceptionError::UnknownView {
                view_id: det.view_id,
                views: views.len(),
            });
        }
        let normals = normal_maps.get(det.view_id).map(|m| m.as_slice());
        let instances = instance_maps.get(det.view_id).map(|m| m.as_slice());
        match back_project(det, &views[det.view_id], normals, instances, cfg.max_points_per_box) {
            Some(bp) => projections.push(bp),
            None => result.warnings.push(format!(
                "dropped detection '{}' in view {}: no valid depth pixels",
                det.label, det.view_id
            )),
        }
    }
    // Union-find over same-label projections with IoU >= threshold.
    let n = projections.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if projections[i].label != projections[j].label {
                continue;
            }
            if boxes_match(&projections[i].aabb, &projections[j].aabb, cfg) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    struct Merged {
        label: String,
        cloud: PointCloud,
        bbox: Aabb3,
    }
    let mut merged: Vec<Merged> = Vec::new();
    for (_, members) in groups {
        let label = projections[members[0]].label.clone();
        let mut cloud = PointCloud::default();
        cloud.normals = projections[members[0]].cloud.normals.as_ref().map(|_| Vec::new());
        for &m in &members {
            cloud.extend(&projections[m].cloud);
        }
        let bbox = cloud.aabb().expect("merged cloud is nonempty");
        merged.push(Merged { label, cloud, bbox });
    }
    // Instance naming: single instance keeps the bare label; multiple
    // instances get _k suffixes by ascending x of the box center.
    let mut by_label: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    for (i, m) in merged.iter().enumerate() {
        by_label.entry(m.label.clone()).or_default().push(i);
    }
    for (label, mut idxs) in by_label {
        idxs.sort_by(|&a, &b| {
            merged[a]
                .bbox
                .center()
                .x
                .partial_cmp(&merged[b].bbox.center().x)
                .unwrap()
        });
        let multiple = idxs.len() > 1;
        for (k, &i) in idxs.iter().enumerate() {
            let m = &merged[i];
            let name = if multiple { format!("{label}_{k}") } else { label.clone() };
            let support = m.bbox.min.z;
            result.percepts.push(ObjectPercept {
                name,
                label: label.clone(),
                bbox3d: m.bbox,
                cloud: m.cloud.clone(),
                support_surface_z: Some(support),
                parts: Vec::new(),
            });
        }
    }
    Ok(result)
}

/// Points of one named part of a percept; the empty query returns the
/// whole cloud. Part labels come from the scene definition.
pub fn extract_part_cloud(
    percept: &ObjectPercept,
    part_query: &str,
) -> Result<PointCloud, PerceptionError> {
    if part_query.is_empty() {
        return Ok(percept.cloud.clone());
    }
    let part = percept
        .parts
        .iter()
        .find(|p| p.name == part_query)
        .ok_or_else(|| PerceptionError::PartNotFound(part_query.to_string()))?;
    let region = part.aabb.inflate(DEFAULT_VOXEL_SIZE);
    Ok(percept.cloud.filtered(|_, p| region.contains(p)))
}

/// RANSAC settings; seeded for deterministic fits.
#[derive(Debug, Clone, Copy)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Inlier distance tolerance, meters.
    pub tolerance: f64,
    pub min_inliers: usize,
    pub seed: u64,
    /// Maximum number of planes extracted sequentially.
    pub max_planes: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig { iterations: 200, tolerance: 0.005, min_inliers: 50, seed: 0, max_planes: 4 }
    }
}

struct PlaneCandidate {
    normal: Vec3,
    offset: f64,
    inliers: Vec<usize>,
    centroid: Vec3,
}

fn fit_plane_least_squares(points: &[Vec3], idx: &[usize]) -> Option<(Vec3, f64, Vec3)> {
    if idx.len() < 3 {
        return None;
    }
    let centroid = idx.iter().fold(Vec3::ZERO, |a, &i| a + points[i]) / idx.len() as f64;
    let mut cov = [[0.0f64; 3]; 3];
    for &i in idx {
        let d = points[i] - centroid;
        let row = [d.x, d.y, d.z];
        for (r, &dr) in row.iter().enumerate() {
            for (c, &dc) in row.iter().enumerate() {
                cov[r][c] += dr * dc;
            }
        }
    }
    let (_, vecs) = sym_eigen3(cov);
    let normal = vecs[0].normalized().ok()?;
    Some((normal, normal.dot(centroid), centroid))
}

fn ransac_single_plane(
    points: &[Vec3],
    available: &[usize],
    cfg: &RansacConfig,
    rng: &mut ChaCha8Rng,
) -> Option<PlaneCandidate> {
    if available.len() < 3 {
        return None;
    }
    let mut best: Option<(usize, Vec3, f64)> = None;
    for _ in 0..cfg.iterations {
        let a = available[rng.random_range(0..available.len())];
        let b = available[rng.random_range(0..available.len())];
        let c = available[rng.random_range(0..available.len())];
        if a == b || b == c || a == c {
            continue;
        }
        let n = (points[b] - points[a]).cross(points[c] - points[a]);
        let n = match n.normalized() {
            Ok(n) => n,
            Err(_) => continue,
        };
        let d = n.dot(points[a]);
        let count = available
            .iter()
            .filter(|&&i| (n.dot(points[i]) - d).abs() <= cfg.tolerance)
            .count();
        if best.as_ref().map_or(true, |(bc, _, _)| count > *bc) {
            best = Some((count, n, d));
        }
    }
    let (count, n, d) = best?;
    if count < cfg.min_inliers {
        return None;
    }
    let inliers: Vec<usize> = available
        .iter()
        .copied()
        .filter(|&i| (n.dot(points[i]) - d).abs() <= cfg.tolerance)
        .collect();
    // Least-squares refinement over the consensus set.
    let (normal, offset, centroid) = fit_plane_least_squares(points, &inliers)?;
    let inliers: Vec<usize> = available
        .iter()
        .copied()
        .filter(|&i| (normal.dot(points[i]) - offset).abs() <= cfg.tolerance)
        .collect();
    if inliers.len() < cfg.min_inliers {
        return None;
    }
    Some(PlaneCandidate { normal, offset, inliers, centroid })
}

/// Fits planes to the percept's cloud by sequential RANSAC and returns the
/// plane whose inlier centroid is nearest to `position`, with the normal
/// canonicalized to point toward the hemisphere containing `position`.
pub fn detect_plane_near(
    percept: &ObjectPercept,
    position: Vec3,
    cfg: &RansacConfig,
) -> Result<PlaneInfo, PerceptionError> {
    let points = &percept.cloud.points;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut available: Vec<usize> = (0..points.len()).collect();
    let mut candidates: Vec<PlaneCandidate> = Vec::new();
    for _ in 0..cfg.max_planes {
        match ransac_single_plane(points, &available, cfg, &mut rng) {
            Some(plane) => {
                let inlier_set: std::collections::HashSet<usize> =
                    plane.inliers.iter().copied().collect();
                available.retain(|i| !inlier_set.contains(i));
                candidates.push(plane);
            }
            None => break,
        }
    }
    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            a.centroid
                .distance(position)
                .partial_cmp(&b.centroid.distance(position))
                .unwrap()
        })
        .ok_or(PerceptionError::NoPlaneFound { min_inliers: cfg.min_inliers })?;
    let mut normal = best.normal;
    let mut offset = best.offset;
    if normal.dot(position - best.centroid) < 0.0 {
        normal = -normal;
        offset = -offset;
    }
    Ok(PlaneInfo { normal, offset, inlier_count: best.inliers.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Pose, Quat};
    use crate::volume::Intrinsics;

    fn plane_percept(normal: Vec3, offset: f64, n: usize) -> ObjectPercept {
        // Deterministic lattice of points on the plane n·x = offset.
        let normal = normal.normalized().unwrap();
        let u = normal.any_orthogonal();
        let v = normal.cross(u);
        let side = (n as f64).sqrt().ceil() as usize;
        let mut points = Vec::new();
        for i in 0..n {
            let a = ((i / side) as f64 / side as f64 - 0.5) * 0.4;
            let b = ((i % side) as f64 / side as f64 - 0.5) * 0.4;
            points.push(normal * offset + u * a + v * b);
        }
        let cloud = PointCloud::new(points);
        let bbox3d = cloud.aabb().unwrap();
        ObjectPercept {
            name: "plane".into(),
            label: "plane".into(),
            bbox3d,
            cloud,
            support_surface_z: None,
            parts: Vec::new(),
        }
    }

    #[test]
    fn plane_fit_recovers_horizontal_plane() {
        let percept = plane_percept(Vec3::Z, 1.05, 400);
        let plane =
            detect_plane_near(&percept, Vec3::new(0.0, 0.0, 2.0), &RansacConfig::default())
                .unwrap();
        assert!(plane.normal.dot(Vec3::Z) > 1.0 - 1e-9);
        assert!((plane.offset - 1.05).abs() < 1e-6);
        assert!(plane.inlier_count >= 50);
    }

    #[test]
    fn plane_normal_canonicalized_toward_query() {
        let percept = plane_percept(Vec3::Z, 1.05, 400);
        let below =
            detect_plane_near(&percept, Vec3::new(0.0, 0.0, 0.0), &RansacConfig::default())
                .unwrap();
        assert!(below.normal.dot(Vec3::Z) < -(1.0 - 1e-9));
        assert!((below.offset + 1.05).abs() < 1e-6);
    }

    #[test]
    fn too_few_points_is_no_plane() {
        let percept = plane_percept(Vec3::Z, 1.0, 3);
        let err = detect_plane_near(&percept, Vec3::ZERO, &RansacConfig::default());
        assert!(matches!(err, Err(PerceptionError::NoPlaneFound { .. })));
    }

    #[test]
    fn random_plane_orientations_recovered_tightly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() + 0.2,
            )
            .normalized()
            .unwrap();
            let offset = 0.5 + rng.random::<f64>();
            let percept = plane_percept(n, offset, 300);
            let query = n * (offset + 0.5);
            let plane = detect_plane_near(&percept, query, &RansacConfig::default()).unwrap();
            let angle = plane.normal.dot(n).clamp(-1.0, 1.0).acos().to_degrees();
            assert!(angle < 0.1, "normal error {angle} deg");
            assert!((plane.offset - offset).abs() < 1e-4);
        }
    }

    fn looking_down_camera() -> Pose {
        Pose::new(Vec3::new(0.0, 0.0, 2.0), Quat::from_axis_angle(Vec3::X, std::f64::consts::PI))
    }

    fn render_box_depth(cam: &Pose, box3d: &Aabb3) -> DepthImage {
        // Tiny synthetic z-buffer: top face of the box plus table at z=1.0.
        let w = 64;
        let h = 64;
        let intr = Intrinsics { fx: 64.0, fy: 64.0, cx: 32.0, cy: 32.0 };
        let world_to_cam = cam.inverse();
        let mut depth = vec![0.0f64; w * h];
        for v in 0..h {
            for u in 0..w {
                // Ray through the pixel in camera frame.
                let x = (u as f64 + 0.5 - intr.cx) / intr.fx;
                let y = (v as f64 + 0.5 - intr.cy) / intr.fy;
                let dir_world = cam.transform_dir(Vec3::new(x, y, 1.0));
                let origin = cam.position;
                // Intersect with box top and with the table plane z = 1.
                let mut best = f64::INFINITY;
                if dir_world.z < 0.0 {
                    let t_top = (box3d.max.z - origin.z) / dir_world.z;
                    let p = origin + dir_world * t_top;
                    if t_top > 0.0 && box3d.footprint_contains(p) {
                        best = best.min(t_top);
                    }
                    let t_table = (1.0 - origin.z) / dir_world.z;
                    best = best.min(t_table);
                }
                if best.is_finite() {
                    let hit = origin + dir_world * best;
                    depth[v * w + u] = world_to_cam.transform_point(hit).z;
                }
            }
        }
        DepthImage::new(w, h, depth, intr, *cam).unwrap()
    }

    #[test]
    fn two_views_of_one_box_merge() {
        let box3d = Aabb3::new(Vec3::new(-0.05, -0.05, 1.0), Vec3::new(0.05, 0.05, 1.06));
        let cam = looking_down_camera();
        let img = render_box_depth(&cam, &box3d);
        let det = |view_id| Detection2D {
            view_id,
            label: "cube".into(),
            box2d: [22.0, 22.0, 42.0, 42.0],
            confidence: 1.0,
        };
        let result = match_views(
            &[det(0), det(1)],
            &[img.clone(), img],
            &[],
            &[],
            &MatchConfig::default(),
        )
        .unwrap();
        assert_eq!(result.percepts.len(), 1, "{:?}", result.warnings);
        assert_eq!(result.percepts[0].name, "cube");
        // Brute-force IoU of the two identical projections is 1.
    }

    #[test]
    fn disjoint_same_label_boxes_get_suffixes() {
        let box_a = Aabb3::new(Vec3::new(-0.45, -0.1, 1.0), Vec3::new(-0.35, 0.0, 1.06));
        let box_b = Aabb3::new(Vec3::new(0.35, 0.0, 1.0), Vec3::new(0.45, 0.1, 1.06));
        let cam = looking_down_camera();
        // Render each box in isolation so the detections don't overlap.
        let img_a = render_box_depth(&cam, &box_a);
        let img_b = render_box_depth(&cam, &box_b);
        let dets = vec![
            Detection2D { view_id: 0, label: "apple".into(), box2d: [2.0, 22.0, 14.0, 36.0], confidence: 1.0 },
            Detection2D { view_id: 1, label: "apple".into(), box2d: [50.0, 28.0, 62.0, 42.0], confidence: 1.0 },
        ];
        let result = match_views(&dets, &[img_a, img_b], &[], &[], &MatchConfig::default()).unwrap();
        assert_eq!(result.percepts.len(), 2);
        assert_eq!(result.percepts[0].name, "apple_0");
        assert_eq!(result.percepts[1].name, "apple_1");
        assert!(result.percepts[0].center().x < result.percepts[1].center().x);
    }

    #[test]
    fn empty_detections_empty_output() {
        let result = match_views(&[], &[], &[], &[], &MatchConfig::default()).unwrap();
        assert!(result.percepts.is_empty());
        assert!(result.warnings.is_empty());
    }

    #[test]
    fn detection_without_depth_is_dropped_with_warning() {
        let cam = looking_down_camera();
        let intr = Intrinsics { fx: 64.0, fy: 64.0, cx: 8.0, cy: 8.0 };
        let img = DepthImage::new(16, 16, vec![0.0; 256], intr, cam).unwrap();
        let det = Detection2D {
            view_id: 0,
            label: "ghost".into(),
            box2d: [2.0, 2.0, 10.0, 10.0],
            confidence: 0.9,
        };
        let result = match_views(&[det], &[img], &[], &[], &MatchConfig::default()).unwrap();
        assert!(result.percepts.is_empty());
        assert_eq!(result.warnings.len(), 1);
    }

    #[test]
    fn match_views_is_permutation_invariant() {
        let box3d = Aabb3::new(Vec3::new(-0.05, -0.05, 1.0), Vec3::new(0.05, 0.05, 1.06));
        let cam = looking_down_camera();
        let img = render_box_depth(&cam, &box3d);
        let d0 = Detection2D { view_id: 0, label: "cube".into(), box2d: [22.0, 22.0, 42.0, 42.0], confidence: 1.0 };
        let d1 = Detection2D { view_id: 1, label: "cube".into(), box2d: [23.0, 22.0, 42.0, 42.0], confidence: 1.0 };
        let a = match_views(&[d0.clone(), d1.clone()], &[img.clone(), img.clone()], &[], &[], &MatchConfig::default()).unwrap();
        let b = match_views(&[d1, d0], &[img.clone(), img], &[], &[], &MatchConfig::default()).unwrap();
        assert_eq!(a.percepts.len(), b.percepts.len());
        for (pa, pb) in a.percepts.iter().zip(b.percepts.iter()) {
            assert_eq!(pa.name, pb.name);
            assert_eq!(pa.cloud.len(), pb.cloud.len());
            assert!(pa.bbox3d.min.distance(pb.bbox3d.min) < 1e-12);
        }
    }

    #[test]
    fn center_accessor_matches_bbox_center() {
        let percept = plane_percept(Vec3::Z, 1.0, 100);
        assert!(percept.center().distance(percept.bbox3d.center()) < 1e-12);
    }

    #[test]
    fn part_extraction_filters_by_region() {
        let mut percept = plane_percept(Vec3::Z, 1.0, 100);
        percept.parts.push(PartRegion {
            name: "handle".into(),
            aabb: Aabb3::new(Vec3::new(-0.05, -0.05, 0.9), Vec3::new(0.05, 0.05, 1.1)),
        });
        let part = extract_part_cloud(&percept, "handle").unwrap();
        assert!(!part.is_empty());
        assert!(part.len() < percept.cloud.len());
        let whole = extract_part_cloud(&percept, "").unwrap();
        assert_eq!(whole.len(), percept.cloud.len());
        assert!(matches!(
            extract_part_cloud(&percept, "lid"),
            Err(PerceptionError::PartNotFound(_))
        ));
    }
}
