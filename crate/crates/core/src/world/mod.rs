//! Deterministic kinematic scene simulator: objects composed of primitive
//! parts bound to a base or to articulation joints, a free-flying gripper
//! with attach/detach semantics, multi-view depth rendering with oracle
//! detections, task success predicates, and procedural scene generation.
//!
//! There are no dynamics: settling is instantaneous vertical projection
//! onto the highest support surface, and pulling an attached joint-bound
//! part updates the joint value by projecting the gripper motion onto the
//! joint axis (prismatic) or arc angle (revolute), clamped to limits.

mod procgen;
mod render;
mod scenefile;
mod shapes;
mod tasks;

pub use procgen::{generate_scene, parse_config, GeneratedScene, JointStart, ObjectTemplate, ProtoShape, SceneConfig};
pub use render::{default_cameras, render_views, Camera, RenderResult};
pub use scenefile::{parse_scene, scene_to_text};
pub use shapes::{Face, ShapeKind};
pub use tasks::{parse_tasks, tasks_to_text, ManipulationUnit, SuccessCheck, TaskDescriptor};

use thiserror::Error;

use crate::articulation::{JointType, PartClass, PartTruth};
use crate::geom::{project_onto_line, Aabb3, PointCloud, Pose, Vec3};
use crate::grasp::DEFAULT_MAX_JAW_WIDTH;
use crate::perception::PartRegion;
use crate::plan::{GripperAction, Trajectory};

/// Gripper tip must be within this distance of a part surface to attach.
pub const ATTACH_EPSILON: f64 = 0.02;
/// Open fractions below this count as "closed" for attachment.
pub const ATTACH_OPEN_THRESHOLD: f64 = 0.5;
/// An attached part may deviate from the gripper tip by at most this much
/// before the grasp is considered torn off.
pub const GRASP_SLIP_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("sequencing fault: {0}")]
    SequencingFault(String),
    #[error("grasp miss: {0}")]
    GraspMiss(String),
    #[error("'{0}' is not attached")]
    NotAttached(String),
    #[error("execution fault: {0}")]
    ExecutionFault(String),
    #[error("invalid task spec: {0}")]
    InvalidSpec(String),
    #[error("scene generation failed: {0}")]
    GenerationFailed(String),
    #[error("scene parse error at line {line}: {message}")]
    SceneParse { line: usize, message: String },
    #[error("render requires at least one camera")]
    NoCameras,
}

/// Object category, used by scene generation and task emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Independent,
    Container,
    Articulated,
    /// Fixed scene furniture such as the table.
    Support,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Independent => "independent",
            Category::Container => "container",
            Category::Articulated => "articulated",
            Category::Support => "support",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        match s {
            "independent" => Some(Category::Independent),
            "container" => Some(Category::Container),
            "articulated" => Some(Category::Articulated),
            "support" => Some(Category::Support),
            _ => None,
        }
    }
}

/// What a part is rigidly bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartBinding {
    Base,
    Joint(usize),
}

/// One named rigid sub-shape of an object.
#[derive(Debug, Clone)]
pub struct Part {
    pub name: String,
    pub shape: ShapeKind,
    /// Pose of the shape in the object frame (at joint value zero for
    /// joint-bound parts).
    pub local_pose: Pose,
    pub binding: PartBinding,
}

/// One articulation joint, in the object frame.
#[derive(Debug, Clone)]
pub struct Joint {
    pub joint_type: JointType,
    pub axis: Vec3,
    pub position: Vec3,
    pub limits: (f64, f64),
    pub value: f64,
}

impl Joint {
    pub fn range(&self) -> f64 {
        self.limits.1 - self.limits.0
    }
}

/// A scene object: uniquely named, with a detection label, primitive
/// parts, and optional joints.
#[derive(Debug, Clone)]
pub struct SceneObject {
    pub name: String,
    pub label: String,
    pub category: Category,
    pub pose: Pose,
    pub parts: Vec<Part>,
    pub joints: Vec<Joint>,
    pub graspable: bool,
}

/// Binding of an object (or one of its joint-bound parts) to the gripper.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub object: String,
    pub part: usize,
    /// When the grasped part is joint-bound, gripper motion drives this
    /// joint instead of the object base.
    pub joint: Option<usize>,
    /// Object base pose expressed in the gripper frame.
    pub grasp_offset: Pose,
    /// Grasp point in the part's local frame, for the slip check.
    pub part_grasp_local: Vec3,
}

/// Gripper state: pose of the tip frame, opening fraction, attachment.
#[derive(Debug, Clone)]
pub struct GripperState {
    pub pose: Pose,
    pub open_fraction: f64,
    pub attached: Option<Attachment>,
}

/// Complete world state.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub objects: Vec<SceneObject>,
    pub gripper: GripperState,
    pub table_height: f64,
    pub workspace: Aabb3,
    pub cameras: Vec<Camera>,
}

impl WorldState {
    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    fn require_index(&self, name: &str) -> Result<usize, WorldError> {
        self.object_index(name)
            .ok_or_else(|| WorldError::UnknownObject(name.to_string()))
    }

    /// Rigid transform applied by a joint at its current value, in the
    /// object frame.
    fn joint_transform(joint: &Joint) -> Pose {
        match joint.joint_type {
            JointType::Prismatic => Pose::from_position(joint.axis * joint.value),
            JointType::Revolute => {
                let rot = crate::geom::Quat::from_axis_angle(joint.axis, joint.value);
                Pose::new(joint.position - rot.rotate(joint.position), rot)
            }
        }
    }

    /// World pose of one part at the current joint values.
    pub fn part_world_pose(&self, obj: &SceneObject, part: &Part) -> Pose {
        let inner = match part.binding {
            PartBinding::Base => part.local_pose,
            PartBinding::Joint(j) => Self::joint_transform(&obj.joints[j]).compose(&part.local_pose),
        };
        obj.pose.compose(&inner)
    }

    /// World axis-aligned bound of one part (its oriented box's AABB).
    pub fn part_world_aabb(&self, obj: &SceneObject, part: &Part) -> Aabb3 {
        let pose = self.part_world_pose(obj, part);
        let local = part.shape.local_aabb();
        Aabb3::from_points(&local.corners().map(|c| pose.transform_point(c)))
            .expect("eight corners")
    }

    /// Union of all part bounds at the current configuration.
    pub fn object_world_aabb(&self, obj: &SceneObject) -> Aabb3 {
        let mut it = obj.parts.iter();
        let first = it.next().expect("objects have at least one part");
        let mut acc = self.part_world_aabb(obj, first);
        for p in it {
            acc = acc.union(&self.part_world_aabb(obj, p));
        }
        acc
    }

    /// Named world-frame regions for an object's parts, excluding the
    /// implicit base part.
    pub fn part_regions(&self, obj: &SceneObject) -> Vec<PartRegion> {
        obj.parts
            .iter()
            .filter(|p| p.name != "base")
            .map(|p| PartRegion { name: p.name.clone(), aabb: self.part_world_aabb(obj, p) })
            .collect()
    }

    /// Interior cavity of a container part in world coordinates (assumes
    /// the part is kept near axis-aligned, which generated scenes do).
    pub fn part_interior_world(&self, obj: &SceneObject, part: &Part) -> Option<Aabb3> {
        let interior = part.shape.interior_local()?;
        let pose = self.part_world_pose(obj, part);
        Aabb3::from_points(&interior.corners().map(|c| pose.transform_point(c)))
    }

    /// Distance from a world point to the nearest part surface of an
    /// object; returns (distance, part index). Non-positive inside.
    pub fn distance_to_object(&self, p: Vec3, obj: &SceneObject) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0usize);
        for (i, part) in obj.parts.iter().enumerate() {
            let local = self.part_world_pose(obj, part).inverse().transform_point(p);
            let d = part.shape.distance(local);
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Uniform surface sample of an object (or one named part) with
    /// outward world-frame normals.
    pub fn surface_cloud(&self, obj: &SceneObject, part_name: Option<&str>, step: f64) -> PointCloud {
        let mut points = Vec::new();
        let mut normals = Vec::new();
        for part in &obj.parts {
            if let Some(name) = part_name {
                if part.name != name {
                    continue;
                }
            }
            let pose = self.part_world_pose(obj, part);
            for (p, n) in part.shape.surface_points(step) {
                points.push(pose.transform_point(p));
                normals.push(pose.transform_dir(n));
            }
        }
        PointCloud::with_normals(points, normals).expect("matched lengths")
    }

    /// Ground-truth part decomposition for the articulation oracle: one
    /// entry per part with its class and world-frame joint parameters.
    pub fn articulation_truth(&self, obj: &SceneObject, step: f64) -> Vec<PartTruth> {
        obj.parts
            .iter()
            .map(|part| {
                let pose = self.part_world_pose(obj, part);
                let points: Vec<Vec3> = part
                    .shape
                    .surface_points(step)
                    .into_iter()
                    .map(|(p, _)| pose.transform_point(p))
                    .collect();
                match part.binding {
                    PartBinding::Base => PartTruth {
                        points,
                        class: PartClass::Static,
                        joint_position: Vec3::ZERO,
                        joint_axis: Vec3::Z,
                    },
                    PartBinding::Joint(j) => {
                        let joint = &obj.joints[j];
                        PartTruth {
                            points,
                            class: match joint.joint_type {
                                JointType::Revolute => PartClass::Revolute,
                                JointType::Prismatic => PartClass::Prismatic,
                            },
                            joint_position: obj.pose.transform_point(joint.position),
                            joint_axis: obj.pose.transform_dir(joint.axis),
                        }
                    }
                }
            })
            .collect()
    }

    /// Assigns per-point classes and joint truth to arbitrary world points
    /// (e.g. a percept cloud): each point takes the nearest part within
    /// `tol`, others are dropped. Returns one PartTruth per part.
    pub fn assign_points_to_parts(
        &self,
        obj: &SceneObject,
        points: &[Vec3],
        tol: f64,
    ) -> Vec<PartTruth> {
        let mut buckets: Vec<Vec<Vec3>> = vec![Vec::new(); obj.parts.len()];
        for &p in points {
            let (d, pi) = self.distance_to_object(p, obj);
            if d <= tol {
                buckets[pi].push(p);
            }
        }
        let mut out = Vec::new();
        for (pi, pts) in buckets.into_iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let part = &obj.parts[pi];
            out.push(match part.binding {
                PartBinding::Base => PartTruth {
                    points: pts,
                    class: PartClass::Static,
                    joint_position: Vec3::ZERO,
                    joint_axis: Vec3::Z,
                },
                PartBinding::Joint(j) => {
                    let joint = &obj.joints[j];
                    PartTruth {
                        points: pts,
                        class: match joint.joint_type {
                            JointType::Revolute => PartClass::Revolute,
                            JointType::Prismatic => PartClass::Prismatic,
                        },
                        joint_position: obj.pose.transform_point(joint.position),
                        joint_axis: obj.pose.transform_dir(joint.axis),
                    }
                }
            });
        }
        out
    }

    /// World-frame axis line and metadata of one joint.
    pub fn joint_world(&self, obj: &SceneObject, j: usize) -> crate::articulation::JointInfo {
        let joint = &obj.joints[j];
        crate::articulation::JointInfo {
            joint_position: obj.pose.transform_point(joint.position),
            joint_axis: obj.pose.transform_dir(joint.axis),
            joint_type: joint.joint_type,
            limits: joint.limits,
            value: joint.value,
        }
    }

    // -----------------------------------------------------------------
    // State transitions
    // -----------------------------------------------------------------

    /// Follows a trajectory waypoint by waypoint: the gripper takes each
    /// pose, an attached object moves rigidly with it (or drives its
    /// joint), and any waypoint outside the workspace rolls the whole call
    /// back with an execution fault.
    pub fn step_follow(&mut self, traj: &Trajectory) -> Result<(), WorldError> {
        if traj.waypoints.is_empty() {
            return Ok(());
        }
        let mut next = self.clone();
        let mut prev_tip = next.gripper.pose.position;
        for w in &traj.waypoints {
            let p = w.pose.position;
            if !next.workspace.contains(p) {
                return Err(WorldError::ExecutionFault(format!(
                    "waypoint ({:.3}, {:.3}, {:.3}) exits the workspace",
                    p.x, p.y, p.z
                )));
            }
            next.gripper.pose = w.pose;
            if let Some(att) = next.gripper.attached.clone() {
                let oi = next.require_index(&att.object)?;
                match att.joint {
                    None => {
                        next.objects[oi].pose = w.pose.compose(&att.grasp_offset);
                    }
                    Some(ji) => {
                        let obj = &next.objects[oi];
                        let axis_w = obj.pose.transform_dir(obj.joints[ji].axis);
                        let jpos_w = obj.pose.transform_point(obj.joints[ji].position);
                        let tip = w.pose.position;
                        let delta = match obj.joints[ji].joint_type {
                            JointType::Prismatic => (tip - prev_tip).dot(axis_w),
                            JointType::Revolute => {
                                let r0 = prev_tip - project_onto_line(prev_tip, jpos_w, axis_w);
                                let r1 = tip - project_onto_line(tip, jpos_w, axis_w);
                                if r0.norm() < 1e-9 || r1.norm() < 1e-9 {
                                    0.0
                                } else {
                                    r0.cross(r1).dot(axis_w).atan2(r0.dot(r1))
                                }
                            }
                        };
                        let joint = &mut next.objects[oi].joints[ji];
                        let (lo, hi) = joint.limits;
                        joint.value = (joint.value + delta).clamp(lo, hi);
                        // Slip check: the grasped part must stay under the tip.
                        let obj = &next.objects[oi];
                        let part_pose = next.part_world_pose(obj, &obj.parts[att.part]);
                        let grasp_now = part_pose.transform_point(att.part_grasp_local);
                        if grasp_now.distance(tip) > GRASP_SLIP_TOLERANCE {
                            return Err(WorldError::ExecutionFault(
                                "grasped part separated from the gripper (joint limit or wrong direction)"
                                    .to_string(),
                            ));
                        }
                    }
                }
            }
            match w.gripper_action {
                GripperAction::Open => next.gripper.open_fraction = 1.0,
                GripperAction::Close => next.gripper.open_fraction = 0.0,
                GripperAction::None => {}
            }
            prev_tip = w.pose.position;
        }
        *self = next;
        Ok(())
    }

    pub fn open_gripper(&mut self) {
        // The attachment persists until an explicit detach; programs call
        // detach right after opening.
        self.gripper.open_fraction = 1.0;
    }

    pub fn close_gripper(&mut self) {
        self.gripper.open_fraction = 0.0;
    }

    /// Binds the named object to the gripper. Requires a closed gripper
    /// and the tip within [`ATTACH_EPSILON`] of one of the object's part
    /// surfaces; the part extent across the jaw must fit the jaw width.
    pub fn attach(&mut self, name: &str) -> Result<(), WorldError> {
        if self.gripper.open_fraction >= ATTACH_OPEN_THRESHOLD {
            return Err(WorldError::SequencingFault(
                "attach requires the gripper to be closed".to_string(),
            ));
        }
        if let Some(att) = &self.gripper.attached {
            return Err(WorldError::SequencingFault(format!(
                "'{}' is already attached",
                att.object
            )));
        }
        let oi = self.require_index(name)?;
        let tip = self.gripper.pose.position;
        let (dist, pi) = self.distance_to_object(tip, &self.objects[oi]);
        if dist > ATTACH_EPSILON {
            return Err(WorldError::GraspMiss(format!(
                "gripper tip is {dist:.3} m from '{name}' (max {ATTACH_EPSILON})"
            )));
        }
        let obj = &self.objects[oi];
        let part = &obj.parts[pi];
        let part_pose = self.part_world_pose(obj, part);
        let jaw_world = self.gripper.pose.transform_dir(Vec3::Y);
        let jaw_local = part_pose.orientation.inverse().rotate(jaw_world);
        let extent = part.shape.extent_along(jaw_local);
        if extent > DEFAULT_MAX_JAW_WIDTH + 0.01 {
            return Err(WorldError::GraspMiss(format!(
                "part '{}' spans {extent:.3} m across the jaw (max {:.3})",
                part.name,
                DEFAULT_MAX_JAW_WIDTH + 0.01
            )));
        }
        let joint = match part.binding {
            PartBinding::Base => None,
            PartBinding::Joint(j) => Some(j),
        };
        if joint.is_none() && !obj.graspable {
            return Err(WorldError::GraspMiss(format!("'{name}' is not graspable")));
        }
        let grasp_offset = self.gripper.pose.inverse().compose(&obj.pose);
        let part_grasp_local = part_pose.inverse().transform_point(tip);
        self.gripper.attached = Some(Attachment {
            object: name.to_string(),
            part: pi,
            joint,
            grasp_offset,
            part_grasp_local,
        });
        Ok(())
    }

    /// Releases the named object. Requires an open gripper; a released
    /// free object settles vertically onto the highest support below it.
    pub fn detach(&mut self, name: &str) -> Result<(), WorldError> {
        if self.gripper.open_fraction < ATTACH_OPEN_THRESHOLD {
            return Err(WorldError::SequencingFault(
                "detach requires the gripper to be open".to_string(),
            ));
        }
        match &self.gripper.attached {
            Some(att) if att.object == name => {}
            _ => return Err(WorldError::NotAttached(name.to_string())),
        }
        let att = self.gripper.attached.take().expect("checked above");
        if att.joint.is_none() {
            let oi = self.require_index(name)?;
            self.settle(oi);
        }
        Ok(())
    }

    /// Drops an object vertically onto the highest support surface below
    /// its bottom: the table plane, another object's top face, or a
    /// container interior bottom when the object hangs over the cavity.
    fn settle(&mut self, oi: usize) {
        let aabb = self.object_world_aabb(&self.objects[oi]);
        let bottom = aabb.min.z;
        let center = aabb.center();
        let mut support = self.table_height;
        for (j, other) in self.objects.iter().enumerate() {
            if j == oi {
                continue;
            }
            for part in &other.parts {
                if let Some(interior) = self.part_interior_world(other, part) {
                    if interior.footprint_contains(center) && interior.min.z <= bottom + 1e-6 {
                        support = support.max(interior.min.z);
                        continue;
                    }
                }
                let paabb = self.part_world_aabb(other, part);
                if paabb.footprint_contains(center) && paabb.max.z <= bottom + 1e-6 {
                    support = support.max(paabb.max.z);
                }
            }
        }
        self.objects[oi].pose.position.z += support - bottom;
    }

    // -----------------------------------------------------------------
    // Task predicates
    // -----------------------------------------------------------------

    /// Evaluates one success check against the current state.
    pub fn check_success(&self, check: &SuccessCheck) -> Result<bool, WorldError> {
        match check {
            SuccessCheck::PlaceOnto { object, receptacle } => {
                let oi = self.require_index(object)?;
                let ri = self.require_index(receptacle)?;
                let obj_box = self.object_world_aabb(&self.objects[oi]);
                let center = obj_box.center();
                // Resting on the receptacle: footprint containment plus
                // the bottom within 1 cm of one of its support heights
                // (top face or container interior bottom).
                let rec = &self.objects[ri];
                let rec_box = self.object_world_aabb(rec);
                if !rec_box.footprint_contains(center) {
                    return Ok(false);
                }
                let bottom = obj_box.min.z;
                let mut supports = vec![rec_box.max.z];
                for part in &rec.parts {
                    supports.push(self.part_world_aabb(rec, part).max.z);
                    if let Some(interior) = self.part_interior_world(rec, part) {
                        supports.push(interior.min.z);
                    }
                }
                Ok(supports.iter().any(|s| (bottom - s).abs() <= 0.01))
            }
            SuccessCheck::PlaceNear { object, target, tol } => {
                let oi = self.require_index(object)?;
                let center = self.object_world_aabb(&self.objects[oi]).center();
                Ok(center.distance(*target) <= *tol)
            }
            SuccessCheck::JointOpen { object, joint } => {
                let oi = self.require_index(object)?;
                let j = self.objects[oi]
                    .joints
                    .get(*joint)
                    .ok_or_else(|| WorldError::InvalidSpec(format!("no joint {joint} on {object}")))?;
                Ok(j.value >= j.limits.0 + 0.7 * j.range())
            }
            SuccessCheck::JointClosed { object, joint } => {
                let oi = self.require_index(object)?;
                let j = self.objects[oi]
                    .joints
                    .get(*joint)
                    .ok_or_else(|| WorldError::InvalidSpec(format!("no joint {joint} on {object}")))?;
                Ok(j.value <= j.limits.0 + 0.1 * j.range())
            }
            SuccessCheck::PlaceIn { object, receptacle, part } => {
                let oi = self.require_index(object)?;
                let ri = self.require_index(receptacle)?;
                let center = self.object_world_aabb(&self.objects[oi]).center();
                let rec = &self.objects[ri];
                for rp in &rec.parts {
                    if let Some(name) = part {
                        if &rp.name != name {
                            continue;
                        }
                    }
                    if let Some(interior) = self.part_interior_world(rec, rp) {
                        if interior.contains(center) {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
        }
    }

    /// All-or-nothing conjunction over a task's checks.
    pub fn task_success(&self, checks: &[SuccessCheck]) -> Result<bool, WorldError> {
        if checks.is_empty() {
            return Err(WorldError::InvalidSpec("task has no success checks".to_string()));
        }
        for c in checks {
            if !self.check_success(c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
