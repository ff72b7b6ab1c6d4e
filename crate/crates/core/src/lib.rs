//! Deterministic tabletop manipulation engine.
//!
//! The crate is organized as a pipeline over a simulated kinematic world:
//! depth images are fused into a truncated signed distance field and a
//! tri-state occupancy grid ([`volume`]), multi-view detections become
//! object-level percepts ([`perception`]), articulated joints are recovered
//! by clustering per-point predictions ([`articulation`]), grasp candidates
//! are sampled and ranked by preference ([`grasp`]), trajectories are
//! produced by zeroth-order sampling under occupancy constraints ([`plan`]),
//! and straight-line behavior programs drive the whole stack through a
//! small statically verified DSL ([`runtime`]).

pub mod articulation;
pub mod geom;
pub mod grasp;
pub mod perception;
pub mod plan;
pub mod volume;
pub mod world;

pub mod prelude {
    pub use crate::geom::{Aabb3, PointCloud, Pose, Quat, Vec3};
}
