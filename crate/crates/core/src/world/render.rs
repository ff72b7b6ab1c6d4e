//! Multi-view depth rendering by analytic ray casting, with oracle 2D
//! detections standing in for a learned detector: each visible object's
//! ground-truth box is projected into the image and clipped.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{Pose, Vec3};
use crate::perception::Detection2D;
use crate::volume::{DepthImage, Intrinsics};

use super::{WorldState, WorldError};

/// Objects need at least this many visible pixels to be detected.
const MIN_VISIBLE_PIXELS: usize = 3;
/// Hits closer than this to the camera are ignored.
const NEAR_CLIP: f64 = 0.05;

/// One depth camera. The camera frame is the pinhole convention:
/// +z optical axis, +x right, +y down.
#[derive(Debug, Clone)]
pub struct Camera {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub intrinsics: Intrinsics,
    pub camera_to_world: Pose,
}

impl Camera {
    /// Camera at `eye` looking at `target`, image "up" matching world up
    /// (or world y when looking straight down).
    pub fn look_at(
        name: &str,
        eye: Vec3,
        target: Vec3,
        width: usize,
        height: usize,
        focal: f64,
    ) -> Camera {
        let forward = (target - eye).normalized().expect("eye != target");
        let up_hint = if forward.z.abs() > 0.99 { Vec3::Y } else { Vec3::Z };
        let right = forward.cross(up_hint).normalized().expect("non-degenerate up");
        let down = forward.cross(right);
        let orientation = crate::geom::Quat::from_frame(right, down, forward);
        Camera {
            name: name.to_string(),
            width,
            height,
            intrinsics: Intrinsics {
                fx: focal,
                fy: focal,
                cx: width as f64 / 2.0,
                cy: height as f64 / 2.0,
            },
            camera_to_world: Pose::new(eye, orientation),
        }
    }
}

/// Output of [`render_views`]: depth images, per-pixel world normals
/// (zero where no surface was hit), and oracle detections.
#[derive(Debug, Clone)]
pub struct RenderResult {
    pub views: Vec<DepthImage>,
    pub normal_maps: Vec<Vec<Vec3>>,
    pub detections: Vec<Detection2D>,
}

/// Z-buffer render of all objects at their current joint values, plus
/// oracle detections: projected ground-truth boxes of objects with enough
/// visible pixels, optionally jittered by a few pixels.
pub fn render_views(
    state: &WorldState,
    cameras: &[Camera],
    mut jitter: Option<(&mut ChaCha8Rng, f64)>,
) -> Result<RenderResult, WorldError> {
    if cameras.is_empty() {
        return Err(WorldError::NoCameras);
    }
    // World poses of every (object, part) pair, fixed for the render.
    let mut prims: Vec<(usize, Pose, Pose, &super::Part)> = Vec::new();
    for (oi, obj) in state.objects.iter().enumerate() {
        for part in &obj.parts {
            let pose = state.part_world_pose(obj, part);
            prims.push((oi, pose, pose.inverse(), part));
        }
    }
    let mut views = Vec::with_capacity(cameras.len());
    let mut normal_maps = Vec::with_capacity(cameras.len());
    let mut detections = Vec::new();
    for (view_id, cam) in cameras.iter().enumerate() {
        let (w, h) = (cam.width, cam.height);
        let mut depth = vec![0.0f64; w * h];
        let mut normals = vec![Vec3::ZERO; w * h];
        let mut hit_counts = vec![0usize; state.objects.len()];
        let intr = &cam.intrinsics;
        for v in 0..h {
            for u in 0..w {
                // With dir_cam z = 1, the hit parameter t is the depth.
                let dir_cam = Vec3::new(
                    (u as f64 + 0.5 - intr.cx) / intr.fx,
                    (v as f64 + 0.5 - intr.cy) / intr.fy,
                    1.0,
                );
                let dir_world = cam.camera_to_world.transform_dir(dir_cam);
                let origin = cam.camera_to_world.position;
                let mut best: Option<(f64, Vec3, usize)> = None;
                for (oi, pose, inv, part) in &prims {
                    let o_local = inv.transform_point(origin);
                    let d_local = inv.transform_dir(dir_world);
                    if let Some((t, n_local)) = part.shape.ray_hit(o_local, d_local, NEAR_CLIP) {
                        if best.as_ref().map_or(true, |(bt, _, _)| t < *bt) {
                            best = Some((t, pose.transform_dir(n_local), *oi));
                        }
                    }
                }
                if let Some((t, mut n, oi)) = best {
                    depth[v * w + u] = t;
                    if n.dot(dir_world) > 0.0 {
                        n = -n;
                    }
                    normals[v * w + u] = n;
                    hit_counts[oi] += 1;
                }
            }
        }
        // Oracle detections: projected ground-truth boxes of visible objects.
        let world_to_cam = cam.camera_to_world.inverse();
        for (oi, obj) in state.objects.iter().enumerate() {
            if hit_counts[oi] < MIN_VISIBLE_PIXELS {
                continue;
            }
            let aabb = state.object_world_aabb(obj);
            let mut u_min = f64::INFINITY;
            let mut v_min = f64::INFINITY;
            let mut u_max = f64::NEG_INFINITY;
            let mut v_max = f64::NEG_INFINITY;
            let mut valid = 0usize;
            for corner in aabb.corners() {
                let q = world_to_cam.transform_point(corner);
                if q.z < 0.01 {
                    continue;
                }
                valid += 1;
                let u = intr.fx * q.x / q.z + intr.cx;
                let v = intr.fy * q.y / q.z + intr.cy;
                u_min = u_min.min(u);
                v_min = v_min.min(v);
                u_max = u_max.max(u);
                v_max = v_max.max(v);
            }
            if valid < 8 {
                continue; // partially behind the camera; skip the box
            }
            if let Some((rng, px)) = jitter.as_mut() {
                u_min += (rng.random::<f64>() - 0.5) * 2.0 * *px;
                v_min += (rng.random::<f64>() - 0.5) * 2.0 * *px;
                u_max += (rng.random::<f64>() - 0.5) * 2.0 * *px;
                v_max += (rng.random::<f64>() - 0.5) * 2.0 * *px;
            }
            let u_min = u_min.max(0.0);
            let v_min = v_min.max(0.0);
            let u_max = u_max.min(w as f64);
            let v_max = v_max.min(h as f64);
            if u_max - u_min < 1.0 || v_max - v_min < 1.0 {
                continue;
            }
            detections.push(Detection2D {
                view_id,
                label: obj.label.clone(),
                box2d: [u_min, v_min, u_max, v_max],
                confidence: 1.0,
            });
        }
        views.push(
            DepthImage::new(w, h, depth, *intr, cam.camera_to_world)
                .expect("camera intrinsics validated by construction"),
        );
        normal_maps.push(normals);
    }
    Ok(RenderResult { views, normal_maps, detections })
}

/// The standard three-camera rig (left, right, top) around the table.
pub fn default_cameras(workspace_center: Vec3, table_height: f64) -> Vec<Camera> {
    let focus = Vec3::new(workspace_center.x, workspace_center.y, table_height + 0.1);
    vec![
        Camera::look_at(
            "left",
            Vec3::new(workspace_center.x, workspace_center.y - 0.75, table_height + 0.6),
            focus,
            160,
            120,
            140.0,
        ),
        Camera::look_at(
            "right",
            Vec3::new(workspace_center.x, workspace_center.y + 0.75, table_height + 0.6),
            focus,
            160,
            120,
            140.0,
        ),
        Camera::look_at(
            "top",
            Vec3::new(workspace_center.x, workspace_center.y, table_height + 1.0),
            focus,
            160,
            120,
            140.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb3;
    use crate::perception::{match_views, MatchConfig};
    use crate::world::{Category, Part, PartBinding, GripperState, SceneObject, ShapeKind};

    fn single_box_world() -> WorldState {
        let table = SceneObject {
            name: "table".into(),
            label: "table".into(),
            category: Category::Support,
            pose: Pose::IDENTITY,
            parts: vec![Part {
                name: "base".into(),
                shape: ShapeKind::Box { size: Vec3::new(1.2, 1.2, 0.04) },
                local_pose: Pose::from_position(Vec3::new(0.0, 0.0, 1.03)),
                binding: PartBinding::Base,
            }],
            joints: vec![],
            graspable: false,
        };
        let cube = SceneObject {
            name: "cube".into(),
            label: "cube".into(),
            category: Category::Independent,
            pose: Pose::from_position(Vec3::new(0.0, 0.0, 1.08)),
            parts: vec![Part {
                name: "base".into(),
                shape: ShapeKind::Box { size: Vec3::new(0.08, 0.08, 0.06) },
                local_pose: Pose::IDENTITY,
                binding: PartBinding::Base,
            }],
            joints: vec![],
            graspable: true,
        };
        WorldState {
            objects: vec![table, cube],
            gripper: GripperState {
                pose: Pose::from_position(Vec3::new(-0.4, 0.0, 1.5)),
                open_fraction: 1.0,
                attached: None,
            },
            table_height: 1.05,
            workspace: Aabb3::new(Vec3::new(-0.6, -0.6, 1.0), Vec3::new(0.6, 0.6, 1.9)),
            cameras: default_cameras(Vec3::new(0.0, 0.0, 0.0), 1.05),
        }
    }

    #[test]
    fn render_requires_cameras() {
        let w = single_box_world();
        assert!(matches!(render_views(&w, &[], None), Err(WorldError::NoCameras)));
    }

    #[test]
    fn detection_back_projects_onto_ground_truth() {
        let w = single_box_world();
        let cams = w.cameras.clone();
        let r = render_views(&w, &cams, None).unwrap();
        assert_eq!(r.views.len(), 3);
        assert!(!r.detections.is_empty());
        let result = match_views(&r.detections, &r.views, &r.normal_maps, &MatchConfig::default())
            .unwrap();
        let cubes: Vec<_> =
            result.percepts.iter().filter(|p| p.label == "cube").collect();
        assert_eq!(cubes.len(), 1, "{:?}", result.percepts.iter().map(|p| &p.name).collect::<Vec<_>>());
        let percept = cubes[0];
        let truth = w.object_world_aabb(w.object("cube").unwrap());
        let iou = percept.bbox3d.iou(&truth);
        assert!(iou >= 0.5, "percept box IoU with ground truth {iou}");
        // Normals came through the pipeline.
        assert!(percept.cloud.normals.is_some());
    }

    #[test]
    fn occluded_object_yields_no_detection() {
        let mut w = single_box_world();
        // A coin-sized object fully inside the cube: never visible.
        w.objects.push(SceneObject {
            name: "hidden".into(),
            label: "hidden".into(),
            category: Category::Independent,
            pose: Pose::from_position(Vec3::new(0.0, 0.0, 1.08)),
            parts: vec![Part {
                name: "base".into(),
                shape: ShapeKind::Sphere { radius: 0.01 },
                local_pose: Pose::IDENTITY,
                binding: PartBinding::Base,
            }],
            joints: vec![],
            graspable: true,
        });
        let cams = w.cameras.clone();
        let r = render_views(&w, &cams, None).unwrap();
        assert!(r.detections.iter().all(|d| d.label != "hidden"));
    }

    #[test]
    fn depth_values_match_geometry() {
        let w = single_box_world();
        // Top camera straight above: depth to the cube top face.
        let cam = &w.cameras[2];
        let r = render_views(&w, std::slice::from_ref(cam), None).unwrap();
        let img = &r.views[0];
        let center = img.at(img.width / 2, img.height / 2);
        // Camera at table + 1.0 = 2.05, cube top at 1.11.
        assert!((center - 0.94).abs() < 0.01, "depth {center}");
    }
}
