//! Procedural scene construction: templates are instantiated with seeded
//! randomized sizes and counts, rejection-sampled onto the table without
//! overlap, and each scene is emitted together with the manipulation
//! tasks that are feasible in it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::articulation::JointType;
use crate::geom::{Aabb3, Pose, Vec3};
use crate::grasp::GraspPreference;

use super::render::default_cameras;
use super::shapes::{Face, ShapeKind};
use super::tasks::{ManipulationUnit, SuccessCheck, TaskDescriptor};
use super::{
    Category, GripperState, Joint, Part, PartBinding, SceneObject, WorldState, WorldError,
};

/// Shape prototype with randomization ranges.
#[derive(Debug, Clone)]
pub enum ProtoShape {
    Sphere { radius: [f64; 2] },
    Box { size_min: Vec3, size_max: Vec3 },
    Cylinder { radius: [f64; 2], height: [f64; 2] },
    OpenBox { size_min: Vec3, size_max: Vec3, wall: f64 },
    /// Cabinet with `drawers` stacked prismatic drawers.
    CabinetDrawers { drawers: usize },
    /// Cabinet with one revolute door.
    CabinetDoor,
}

/// One object template: label, category, prototype, instance count range.
#[derive(Debug, Clone)]
pub struct ObjectTemplate {
    pub label: String,
    pub category: Category,
    pub proto: ProtoShape,
    pub count: [usize; 2],
}

/// Initial articulation state for generated joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointStart {
    Closed,
    Open,
    /// Seeded coin flip between closed and open per joint.
    Random,
}

/// Scene generation settings.
#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub templates: Vec<ObjectTemplate>,
    pub table_height: f64,
    pub workspace: Aabb3,
    pub max_attempts: usize,
    pub joint_start: JointStart,
    /// When set, one small independent object may start inside a container.
    pub fill_containers: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            templates: Vec::new(),
            table_height: 1.05,
            workspace: Aabb3::new(Vec3::new(-0.55, -0.55, 1.05), Vec3::new(0.25, 0.55, 1.85)),
            max_attempts: 200,
            joint_start: JointStart::Closed,
            fill_containers: false,
        }
    }
}

/// A generated scene and the task specs feasible in it.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub state: WorldState,
    pub tasks: Vec<TaskDescriptor>,
}

fn uniform(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    range[0] + (range[1] - range[0]) * rng.random::<f64>()
}

fn uniform_vec(rng: &mut ChaCha8Rng, lo: Vec3, hi: Vec3) -> Vec3 {
    Vec3::new(
        uniform(rng, [lo.x, hi.x]),
        uniform(rng, [lo.y, hi.y]),
        uniform(rng, [lo.z, hi.z]),
    )
}

struct Draft {
    object: SceneObject,
    /// Regions other objects must avoid (object bound plus clearances
    /// such as a cabinet's drawer/door swing frontage).
    keepout: Vec<Aabb3>,
}

fn simple_object(label: &str, category: Category, shape: ShapeKind, graspable: bool) -> SceneObject {
    SceneObject {
        name: label.to_string(),
        label: label.to_string(),
        category,
        pose: Pose::IDENTITY,
        parts: vec![Part {
            name: "base".into(),
            shape,
            local_pose: Pose::IDENTITY,
            binding: PartBinding::Base,
        }],
        joints: vec![],
        graspable,
    }
}

const DRAWER_PITCH: f64 = 0.2;
const DRAWER_TRAVEL: f64 = 0.22;
const DOOR_RANGE: f64 = 1.745; // ~100 degrees

fn cabinet_with_drawers(label: &str, drawers: usize, width: f64) -> SceneObject {
    let depth = 0.35;
    let height = drawers as f64 * DRAWER_PITCH + 0.04;
    let mut parts = vec![Part {
        name: "base".into(),
        shape: ShapeKind::OpenBox {
            size: Vec3::new(depth, width, height),
            wall: 0.02,
            open: Face::NegX,
        },
        local_pose: Pose::IDENTITY,
        binding: PartBinding::Base,
    }];
    let mut joints = Vec::new();
    for k in 0..drawers {
        let z = -height / 2.0 + 0.1 + DRAWER_PITCH * k as f64;
        parts.push(Part {
            name: format!("drawer_{k}"),
            shape: ShapeKind::OpenBox {
                size: Vec3::new(0.3, width - 0.09, 0.16),
                wall: 0.01,
                open: Face::PosZ,
            },
            local_pose: Pose::from_position(Vec3::new(0.005, 0.0, z)),
            binding: PartBinding::Joint(k),
        });
        parts.push(Part {
            name: format!("handle_{k}"),
            shape: ShapeKind::Box { size: Vec3::new(0.02, 0.1, 0.02) },
            local_pose: Pose::from_position(Vec3::new(-0.175, 0.0, z)),
            binding: PartBinding::Joint(k),
        });
        joints.push(Joint {
            joint_type: JointType::Prismatic,
            axis: Vec3::new(-1.0, 0.0, 0.0),
            position: Vec3::new(0.0, 0.0, z),
            limits: (0.0, DRAWER_TRAVEL),
            value: 0.0,
        });
    }
    SceneObject {
        name: label.to_string(),
        label: label.to_string(),
        category: Category::Articulated,
        pose: Pose::IDENTITY,
        parts,
        joints,
        graspable: false,
    }
}

fn cabinet_with_door(label: &str) -> SceneObject {
    let size = Vec3::new(0.3, 0.4, 0.35);
    let parts = vec![
        Part {
            name: "base".into(),
            shape: ShapeKind::OpenBox { size, wall: 0.02, open: Face::NegX },
            local_pose: Pose::IDENTITY,
            binding: PartBinding::Base,
        },
        Part {
            name: "door_0".into(),
            shape: ShapeKind::Box { size: Vec3::new(0.02, 0.38, 0.33) },
            local_pose: Pose::from_position(Vec3::new(-0.14, 0.0, 0.0)),
            binding: PartBinding::Joint(0),
        },
        Part {
            name: "handle_0".into(),
            shape: ShapeKind::Box { size: Vec3::new(0.02, 0.02, 0.12) },
            local_pose: Pose::from_position(Vec3::new(-0.16, 0.15, 0.0)),
            binding: PartBinding::Joint(0),
        },
    ];
    let joints = vec![Joint {
        joint_type: JointType::Revolute,
        axis: Vec3::Z,
        position: Vec3::new(-0.14, -0.19, 0.0),
        limits: (0.0, DOOR_RANGE),
        value: 0.0,
    }];
    SceneObject {
        name: label.to_string(),
        label: label.to_string(),
        category: Category::Articulated,
        pose: Pose::IDENTITY,
        parts,
        joints,
        graspable: false,
    }
}

fn instantiate(
    template: &ObjectTemplate,
    rng: &mut ChaCha8Rng,
) -> SceneObject {
    match &template.proto {
        ProtoShape::Sphere { radius } => simple_object(
            &template.label,
            template.category,
            ShapeKind::Sphere { radius: uniform(rng, *radius) },
            true,
        ),
        ProtoShape::Box { size_min, size_max } => simple_object(
            &template.label,
            template.category,
            ShapeKind::Box { size: uniform_vec(rng, *size_min, *size_max) },
            template.category == Category::Independent,
        ),
        ProtoShape::Cylinder { radius, height } => simple_object(
            &template.label,
            template.category,
            ShapeKind::Cylinder {
                radius: uniform(rng, *radius),
                height: uniform(rng, *height),
            },
            template.category == Category::Independent,
        ),
        ProtoShape::OpenBox { size_min, size_max, wall } => simple_object(
            &template.label,
            template.category,
            ShapeKind::OpenBox {
                size: uniform_vec(rng, *size_min, *size_max),
                wall: *wall,
                open: Face::PosZ,
            },
            false,
        ),
        ProtoShape::CabinetDrawers { drawers } => {
            let width = uniform(rng, [0.42, 0.5]);
            cabinet_with_drawers(&template.label, *drawers, width)
        }
        ProtoShape::CabinetDoor => cabinet_with_door(&template.label),
    }
}

fn shape_half_height(obj: &SceneObject) -> f64 {
    obj.parts
        .iter()
        .map(|p| {
            let b = p.shape.local_aabb();
            (p.local_pose.position.z + b.max.z).abs().max((p.local_pose.position.z + b.min.z).abs())
        })
        .fold(0.0, f64::max)
}

/// Generates a scene deterministically from the seed: non-overlapping
/// placements on the table inside the workspace, plus the feasible task
/// list.
pub fn generate_scene(seed: u64, config: &SceneConfig) -> Result<GeneratedScene, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws = config.workspace;
    let table_height = config.table_height;
    let table = {
        let margin = 0.1;
        let size = Vec3::new(
            ws.size().x + 2.0 * margin,
            ws.size().y + 2.0 * margin,
            0.04,
        );
        let center = ws.center();
        SceneObject {
            name: "table".into(),
            label: "table".into(),
            category: Category::Support,
            pose: Pose::IDENTITY,
            parts: vec![Part {
                name: "base".into(),
                shape: ShapeKind::Box { size },
                local_pose: Pose::from_position(Vec3::new(
                    center.x,
                    center.y,
                    table_height - 0.02,
                )),
                binding: PartBinding::Base,
            }],
            joints: vec![],
            graspable: false,
        }
    };
    // Instantiate all template instances; articulated ones place first
    // since they claim the largest footprint plus a frontage strip.
    let mut pending: Vec<SceneObject> = Vec::new();
    for template in &config.templates {
        let count = if template.count[0] >= template.count[1] {
            template.count[0]
        } else {
            rng.random_range(template.count[0]..=template.count[1])
        };
        for _ in 0..count {
            pending.push(instantiate(template, &mut rng));
        }
    }
    pending.sort_by_key(|o| match o.category {
        Category::Articulated => 0,
        Category::Container => 1,
        _ => 2,
    });

    let mut placed: Vec<Draft> = Vec::new();
    let place_state = |objects: Vec<SceneObject>| WorldState {
        objects,
        gripper: GripperState {
            pose: Pose::from_position(Vec3::ZERO),
            open_fraction: 1.0,
            attached: None,
        },
        table_height,
        workspace: ws,
        cameras: vec![],
    };
    for mut obj in pending {
        let half_h = shape_half_height(&obj);
        let mut ok = false;
        for _ in 0..config.max_attempts {
            let (x, y) = if obj.category == Category::Articulated {
                // Against the back edge so drawers and doors swing free.
                (uniform(&mut rng, [-0.04, 0.02]), uniform(&mut rng, [-0.2, 0.2]))
            } else {
                (
                    uniform(&mut rng, [ws.min.x + 0.08, ws.max.x - 0.12]),
                    uniform(&mut rng, [ws.min.y + 0.18, ws.max.y - 0.18]),
                )
            };
            obj.pose = Pose::from_position(Vec3::new(x, y, table_height + half_h));
            let probe = place_state(vec![obj.clone()]);
            let aabb = probe.object_world_aabb(&probe.objects[0]);
            if aabb.min.x < ws.min.x + 0.01
                || aabb.max.x > ws.max.x - 0.01
                || aabb.min.y < ws.min.y + 0.01
                || aabb.max.y > ws.max.y - 0.01
            {
                continue;
            }
            let inflated = aabb.inflate(0.02);
            if placed.iter().any(|d| d.keepout.iter().any(|k| k.overlaps(&inflated))) {
                continue;
            }
            let mut keepout = vec![aabb];
            if obj.category == Category::Articulated {
                // Frontage strip: drawer travel / door swing plus grasp room.
                let reach = 0.3;
                keepout.push(Aabb3::new(
                    Vec3::new(aabb.min.x - reach, aabb.min.y - 0.05, aabb.min.z),
                    Vec3::new(aabb.min.x, aabb.max.y + 0.05, aabb.max.z),
                ));
            }
            placed.push(Draft { object: obj.clone(), keepout });
            ok = true;
            break;
        }
        if !ok {
            return Err(WorldError::GenerationFailed(format!(
                "could not place '{}' after {} attempts",
                obj.label, config.max_attempts
            )));
        }
    }
    let mut objects: Vec<SceneObject> = placed.into_iter().map(|d| d.object).collect();

    // Joint initial values.
    for obj in objects.iter_mut() {
        for joint in obj.joints.iter_mut() {
            let open = match config.joint_start {
                JointStart::Closed => false,
                JointStart::Open => true,
                JointStart::Random => rng.random::<f64>() < 0.5,
            };
            if open {
                joint.value = joint.limits.0 + 0.8 * joint.range();
            }
        }
    }

    // Optionally drop one small independent object into a container.
    if config.fill_containers {
        let container_idx = objects.iter().position(|o| o.category == Category::Container);
        let item_idx = objects
            .iter()
            .position(|o| o.category == Category::Independent && o.graspable);
        if let (Some(ci), Some(ii)) = (container_idx, item_idx) {
            let probe = place_state(objects.clone());
            if let Some(interior) =
                probe.part_interior_world(&probe.objects[ci], &probe.objects[ci].parts[0])
            {
                let item_box = probe.object_world_aabb(&probe.objects[ii]);
                let half = item_box.size() * 0.5;
                if half.x * 2.0 < interior.size().x - 0.02 && half.y * 2.0 < interior.size().y - 0.02
                {
                    let center = interior.center();
                    objects[ii].pose.position =
                        Vec3::new(center.x, center.y, interior.min.z + half.z);
                }
            }
        }
    }

    // Instance naming: bare label when unique, otherwise suffix by
    // ascending x of the object center.
    let mut by_label: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    for (i, o) in objects.iter().enumerate() {
        by_label.entry(o.label.clone()).or_default().push(i);
    }
    for (label, mut idxs) in by_label {
        if idxs.len() < 2 {
            continue;
        }
        idxs.sort_by(|&a, &b| {
            objects[a]
                .pose
                .position
                .x
                .partial_cmp(&objects[b].pose.position.x)
                .unwrap()
        });
        for (k, &i) in idxs.iter().enumerate() {
            objects[i].name = format!("{label}_{k}");
        }
    }

    let mut all = vec![table];
    all.extend(objects);
    let center = ws.center();
    let state = WorldState {
        objects: all,
        gripper: GripperState {
            pose: Pose::new(
                Vec3::new(ws.min.x + 0.15, ws.max.y - 0.2, table_height + 0.47),
                crate::geom::Quat::from_axis_angle(Vec3::X, std::f64::consts::PI),
            ),
            open_fraction: 1.0,
            attached: None,
        },
        table_height,
        workspace: ws,
        cameras: default_cameras(Vec3::new(center.x, center.y, 0.0), table_height),
    };
    let tasks = emit_tasks(&state);
    Ok(GeneratedScene { state, tasks })
}

fn articulation_preference(state: &WorldState, obj: &SceneObject, j: usize) -> GraspPreference {
    let joint = &obj.joints[j];
    let handle = obj
        .parts
        .iter()
        .find(|p| p.name == format!("handle_{j}"))
        .or_else(|| obj.parts.iter().find(|p| p.name.starts_with("handle")));
    let position = handle.map(|h| state.part_world_aabb(obj, h).center());
    let approach = match joint.joint_type {
        // Pull axis points out of the cabinet; approach is its opposite.
        JointType::Prismatic => -obj.pose.transform_dir(joint.axis),
        JointType::Revolute => {
            // Perpendicular to the door plane at the current angle.
            let rot = crate::geom::Quat::from_axis_angle(joint.axis, joint.value);
            obj.pose.transform_dir(rot.rotate(Vec3::X))
        }
    };
    let plane_normal = match joint.joint_type {
        JointType::Revolute => Some(obj.pose.transform_dir(joint.axis)),
        JointType::Prismatic => None,
    };
    GraspPreference {
        preferred_position: position,
        preferred_approach_direction: Some(approach),
        preferred_plane_normal: plane_normal,
    }
}

/// Feasible task specs for a generated scene, spanning the pick-and-place,
/// drawer, door, place-in-drawer, and multi-stage families.
fn emit_tasks(state: &WorldState) -> Vec<TaskDescriptor> {
    let mut tasks = Vec::new();
    let independents: Vec<&SceneObject> = state
        .objects
        .iter()
        .filter(|o| o.category == Category::Independent && o.graspable)
        .collect();
    let containers: Vec<&SceneObject> =
        state.objects.iter().filter(|o| o.category == Category::Container).collect();
    let down = GraspPreference {
        preferred_approach_direction: Some(Vec3::new(0.0, 0.0, -1.0)),
        ..Default::default()
    };
    // Pick and place.
    for obj in &independents {
        if let Some(container) = containers.first() {
            tasks.push(TaskDescriptor {
                name: format!("place_{}_onto_{}", obj.name, container.name),
                units: vec![
                    ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: "pick".into(),
                        preference: down,
                    },
                    ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: format!("place-onto:{}", container.name),
                        preference: GraspPreference::default(),
                    },
                ],
                checks: vec![SuccessCheck::PlaceOnto {
                    object: obj.name.clone(),
                    receptacle: container.name.clone(),
                }],
            });
        } else {
            // Free spot on the other side of the table.
            let here = state.object_world_aabb(obj).center();
            let target = Vec3::new(
                here.x.clamp(state.workspace.min.x + 0.15, state.workspace.max.x - 0.15),
                -here.y.signum() * 0.25,
                here.z,
            );
            tasks.push(TaskDescriptor {
                name: format!("move_{}", obj.name),
                units: vec![
                    ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: "pick".into(),
                        preference: down,
                    },
                    ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: format!("place-at:{} {} {}", target.x, target.y, target.z),
                        preference: GraspPreference::default(),
                    },
                ],
                checks: vec![SuccessCheck::PlaceNear {
                    object: obj.name.clone(),
                    target,
                    tol: 0.05,
                }],
            });
        }
    }
    // Articulation tasks.
    for obj in state.objects.iter().filter(|o| o.category == Category::Articulated) {
        for (j, joint) in obj.joints.iter().enumerate() {
            let pref = articulation_preference(state, obj, j);
            let closed = joint.value <= joint.limits.0 + 0.1 * joint.range();
            let opened = joint.value >= joint.limits.0 + 0.7 * joint.range();
            let kind = match joint.joint_type {
                JointType::Prismatic => "drawer",
                JointType::Revolute => "door",
            };
            if closed {
                tasks.push(TaskDescriptor {
                    name: format!("open_{kind}_{j}_of_{}", obj.name),
                    units: vec![ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: format!("open:{j}"),
                        preference: pref.clone(),
                    }],
                    checks: vec![SuccessCheck::JointOpen { object: obj.name.clone(), joint: j }],
                });
            }
            if opened {
                tasks.push(TaskDescriptor {
                    name: format!("close_{kind}_{j}_of_{}", obj.name),
                    units: vec![ManipulationUnit {
                        object_name: obj.name.clone(),
                        instruction: format!("close:{j}"),
                        preference: pref.clone(),
                    }],
                    checks: vec![SuccessCheck::JointClosed { object: obj.name.clone(), joint: j }],
                });
            }
            // Place into a drawer (opening it first when needed).
            if joint.joint_type == JointType::Prismatic {
                if let Some(item) = independents.first() {
                    let mut units = Vec::new();
                    if closed {
                        units.push(ManipulationUnit {
                            object_name: obj.name.clone(),
                            instruction: format!("open:{j}"),
                            preference: pref.clone(),
                        });
                    }
                    units.push(ManipulationUnit {
                        object_name: item.name.clone(),
                        instruction: format!("place-into:{}.drawer_{j}", obj.name),
                        preference: down,
                    });
                    tasks.push(TaskDescriptor {
                        name: format!("place_{}_in_drawer_{j}_of_{}", item.name, obj.name),
                        units,
                        checks: vec![SuccessCheck::PlaceIn {
                            object: item.name.clone(),
                            receptacle: obj.name.clone(),
                            part: Some(format!("drawer_{j}")),
                        }],
                    });
                }
                // Multi-stage: open, then fill with two objects.
                if independents.len() >= 2 && closed {
                    let a = independents[0];
                    let b = independents[1];
                    tasks.push(TaskDescriptor {
                        name: format!("fill_drawer_{j}_of_{}", obj.name),
                        units: vec![
                            ManipulationUnit {
                                object_name: obj.name.clone(),
                                instruction: format!("open:{j}"),
                                preference: pref.clone(),
                            },
                            ManipulationUnit {
                                object_name: a.name.clone(),
                                instruction: format!("place-into:{}.drawer_{j}", obj.name),
                                preference: down,
                            },
                            ManipulationUnit {
                                object_name: b.name.clone(),
                                instruction: format!("place-into:{}.drawer_{j}", obj.name),
                                preference: down,
                            },
                        ],
                        checks: vec![
                            SuccessCheck::JointOpen { object: obj.name.clone(), joint: j },
                            SuccessCheck::PlaceIn {
                                object: a.name.clone(),
                                receptacle: obj.name.clone(),
                                part: Some(format!("drawer_{j}")),
                            },
                            SuccessCheck::PlaceIn {
                                object: b.name.clone(),
                                receptacle: obj.name.clone(),
                                part: Some(format!("drawer_{j}")),
                            },
                        ],
                    });
                }
            }
        }
    }
    tasks
}

/// Parses the scene-config text format.
pub fn parse_config(text: &str) -> Result<SceneConfig, WorldError> {
    let err = |line: usize, message: String| WorldError::SceneParse { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "scene-config v1" => {}
        _ => return Err(err(1, "expected header 'scene-config v1'".into())),
    }
    let mut config = SceneConfig::default();
    for (i, raw) in lines {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64, WorldError> {
            s.parse().map_err(|_| err(lineno, format!("bad number '{s}'")))
        };
        match t[0] {
            "table_height" if t.len() == 2 => config.table_height = num(t[1])?,
            "max_attempts" if t.len() == 2 => {
                config.max_attempts =
                    t[1].parse().map_err(|_| err(lineno, "bad max_attempts".into()))?
            }
            "fill_containers" if t.len() == 2 => config.fill_containers = t[1] == "1",
            "joint_start" if t.len() == 2 => {
                config.joint_start = match t[1] {
                    "closed" => JointStart::Closed,
                    "open" => JointStart::Open,
                    "random" => JointStart::Random,
                    other => return Err(err(lineno, format!("bad joint_start '{other}'"))),
                }
            }
            "workspace" if t.len() == 7 => {
                config.workspace = Aabb3::new(
                    Vec3::new(num(t[1])?, num(t[2])?, num(t[3])?),
                    Vec3::new(num(t[4])?, num(t[5])?, num(t[6])?),
                );
            }
            "template" if t.len() >= 5 => {
                let label = t[1].to_string();
                let category = Category::parse(t[2])
                    .ok_or_else(|| err(lineno, format!("bad category '{}'", t[2])))?;
                let count_at = t
                    .iter()
                    .position(|&s| s == "count")
                    .ok_or_else(|| err(lineno, "template missing 'count LO HI'".into()))?;
                if count_at + 2 >= t.len() {
                    return Err(err(lineno, "count needs two integers".into()));
                }
                let count = [
                    t[count_at + 1].parse().map_err(|_| err(lineno, "bad count".into()))?,
                    t[count_at + 2].parse().map_err(|_| err(lineno, "bad count".into()))?,
                ];
                let body = &t[3..count_at];
                let proto = match body[0] {
                    "sphere" if body.len() == 3 => {
                        ProtoShape::Sphere { radius: [num(body[1])?, num(body[2])?] }
                    }
                    "box" if body.len() == 7 => ProtoShape::Box {
                        size_min: Vec3::new(num(body[1])?, num(body[2])?, num(body[3])?),
                        size_max: Vec3::new(num(body[4])?, num(body[5])?, num(body[6])?),
                    },
                    "cylinder" if body.len() == 5 => ProtoShape::Cylinder {
                        radius: [num(body[1])?, num(body[3])?],
                        height: [num(body[2])?, num(body[4])?],
                    },
                    "openbox" if body.len() == 9 && body[7] == "wall" => ProtoShape::OpenBox {
                        size_min: Vec3::new(num(body[1])?, num(body[2])?, num(body[3])?),
                        size_max: Vec3::new(num(body[4])?, num(body[5])?, num(body[6])?),
                        wall: num(body[8])?,
                    },
                    "drawers" if body.len() == 2 => ProtoShape::CabinetDrawers {
                        drawers: body[1].parse().map_err(|_| err(lineno, "bad drawer count".into()))?,
                    },
                    "door" if body.len() == 1 => ProtoShape::CabinetDoor,
                    other => return Err(err(lineno, format!("bad template shape '{other}'"))),
                };
                config.templates.push(ObjectTemplate { label, category, proto, count });
            }
            other => return Err(err(lineno, format!("unknown directive '{other}'"))),
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::scenefile::scene_to_text;

    fn fruit_and_cabinet_config() -> SceneConfig {
        SceneConfig {
            templates: vec![
                ObjectTemplate {
                    label: "apple".into(),
                    category: Category::Independent,
                    proto: ProtoShape::Sphere { radius: [0.028, 0.034] },
                    count: [1, 1],
                },
                ObjectTemplate {
                    label: "bowl".into(),
                    category: Category::Container,
                    proto: ProtoShape::OpenBox {
                        size_min: Vec3::new(0.15, 0.15, 0.06),
                        size_max: Vec3::new(0.17, 0.17, 0.07),
                        wall: 0.01,
                    },
                    count: [1, 1],
                },
                ObjectTemplate {
                    label: "cabinet".into(),
                    category: Category::Articulated,
                    proto: ProtoShape::CabinetDrawers { drawers: 2 },
                    count: [1, 1],
                },
            ],
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_identical_scene_files() {
        let cfg = fruit_and_cabinet_config();
        let a = generate_scene(11, &cfg).unwrap();
        let b = generate_scene(11, &cfg).unwrap();
        assert_eq!(scene_to_text(&a.state), scene_to_text(&b.state));
        let c = generate_scene(12, &cfg).unwrap();
        assert_ne!(scene_to_text(&a.state), scene_to_text(&c.state));
    }

    #[test]
    fn placements_do_not_overlap() {
        let cfg = fruit_and_cabinet_config();
        for seed in 0..10 {
            let scene = generate_scene(seed, &cfg).unwrap();
            let movable: Vec<&SceneObject> = scene
                .state
                .objects
                .iter()
                .filter(|o| o.category != Category::Support)
                .collect();
            for i in 0..movable.len() {
                for j in (i + 1)..movable.len() {
                    let a = scene.state.object_world_aabb(movable[i]);
                    let b = scene.state.object_world_aabb(movable[j]);
                    assert!(
                        a.intersection(&b).map_or(0.0, |x| x.volume()) < 1e-12,
                        "seed {seed}: {} overlaps {}",
                        movable[i].name,
                        movable[j].name
                    );
                }
            }
        }
    }

    #[test]
    fn overpacked_scene_fails() {
        let cfg = SceneConfig {
            templates: vec![ObjectTemplate {
                label: "crate".into(),
                category: Category::Independent,
                proto: ProtoShape::Box {
                    size_min: Vec3::new(0.3, 0.3, 0.1),
                    size_max: Vec3::new(0.3, 0.3, 0.1),
                },
                count: [20, 20],
            }],
            max_attempts: 50,
            ..Default::default()
        };
        assert!(matches!(
            generate_scene(0, &cfg),
            Err(WorldError::GenerationFailed(_))
        ));
    }

    #[test]
    fn tasks_cover_families() {
        let cfg = fruit_and_cabinet_config();
        let scene = generate_scene(3, &cfg).unwrap();
        let names: Vec<&str> = scene.tasks.iter().map(|t| t.name.as_str()).collect();
        assert!(names.iter().any(|n| n.starts_with("place_apple_onto")), "{names:?}");
        assert!(names.iter().any(|n| n.starts_with("open_drawer")), "{names:?}");
        assert!(names.iter().any(|n| n.starts_with("place_apple_in_drawer")), "{names:?}");
        // Objects resolve and drawers start closed.
        let cab = scene.state.object("cabinet").unwrap();
        assert_eq!(cab.joints.len(), 2);
        assert_eq!(cab.joints[0].value, 0.0);
    }

    #[test]
    fn open_start_emits_close_tasks() {
        let cfg = SceneConfig {
            joint_start: JointStart::Open,
            ..fruit_and_cabinet_config()
        };
        let scene = generate_scene(5, &cfg).unwrap();
        assert!(scene.tasks.iter().any(|t| t.name.starts_with("close_drawer")));
        let cab = scene.state.object("cabinet").unwrap();
        assert!(cab.joints[0].value > 0.1);
    }

    #[test]
    fn config_text_round_trips_through_generation() {
        let text = "scene-config v1\n\
            joint_start closed\n\
            template apple independent sphere 0.028 0.034 count 1 1\n\
            template cube independent box 0.05 0.05 0.05 0.06 0.06 0.06 count 1 1\n\
            template bowl container openbox 0.15 0.15 0.06 0.17 0.17 0.07 wall 0.01 count 1 1\n\
            template cabinet articulated drawers 2 count 1 1\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.templates.len(), 4);
        let scene = generate_scene(1, &cfg).unwrap();
        assert!(scene.state.object("apple").is_some());
        assert!(scene.state.object("cube").is_some());
        assert!(scene.state.object("table").is_some());
    }

    #[test]
    fn multiple_instances_get_x_ordered_suffixes() {
        let cfg = SceneConfig {
            templates: vec![ObjectTemplate {
                label: "apple".into(),
                category: Category::Independent,
                proto: ProtoShape::Sphere { radius: [0.03, 0.03] },
                count: [2, 2],
            }],
            ..Default::default()
        };
        let scene = generate_scene(9, &cfg).unwrap();
        let a0 = scene.state.object("apple_0").unwrap();
        let a1 = scene.state.object("apple_1").unwrap();
        assert!(a0.pose.position.x < a1.pose.position.x);
    }
}
