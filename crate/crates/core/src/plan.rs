//! Trajectory generation: straight-line moves, arc paths about revolute
//! joints, and zeroth-order optimized free-space paths.
//!
//! The free-space planner samples candidate trajectories (the straight
//! line plus Gaussian-perturbed control-point variants), rejects any whose
//! swept gripper volume touches occupied space or leaves the workspace,
//! and returns the feasible candidate with the lowest control cost. Given
//! the same seed the result is bit-reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geom::{Aabb3, Pose, Quat, Vec3, UNIT_TOL};
use crate::grasp::GripperProxy;
use crate::volume::{CellQuery, OccupancyGrid};

/// Fixed per-waypoint duration used for finite-difference velocities.
pub const DEFAULT_DT: f64 = 0.1;
/// Default weight of the squared-acceleration term in the control cost.
pub const DEFAULT_ACCEL_WEIGHT: f64 = 1.0;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{which} position is outside the workspace")]
    OutsideWorkspace { which: &'static str },
    #[error("planning failed: {attempted} candidates all infeasible (best infeasible cost {best_cost:.4}{})",
        .first_collision.map(|p| format!(", first collision near ({:.3}, {:.3}, {:.3})", p.x, p.y, p.z)).unwrap_or_default())]
    PlanningFailed {
        attempted: usize,
        best_cost: f64,
        first_collision: Option<Vec3>,
    },
}

/// Discrete gripper command attached to a waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GripperAction {
    None,
    Open,
    Close,
}

impl GripperAction {
    pub fn as_str(self) -> &'static str {
        match self {
            GripperAction::None => "none",
            GripperAction::Open => "open",
            GripperAction::Close => "close",
        }
    }
}

/// One trajectory sample: pose, linear velocity, gripper command.
#[derive(Debug, Clone, Copy)]
pub struct Waypoint {
    pub pose: Pose,
    pub velocity: Vec3,
    pub gripper_action: GripperAction,
}

/// An ordered waypoint sequence with its control cost.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    pub cost: f64,
}

impl Trajectory {
    /// Wraps waypoints, computing the stored cost with the default
    /// acceleration weight.
    pub fn new(waypoints: Vec<Waypoint>) -> Trajectory {
        let cost = control_cost(&waypoints);
        Trajectory { waypoints, cost }
    }

    pub fn last_pose(&self) -> Option<Pose> {
        self.waypoints.last().map(|w| w.pose)
    }

    /// One waypoint per line: pose, velocity, gripper action.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for w in &self.waypoints {
            let p = w.pose.position;
            let q = w.pose.orientation;
            let v = w.velocity;
            out.push_str(&format!(
                "wp {} {} {} {} {} {} {} {} {} {} {}\n",
                p.x, p.y, p.z, q.w, q.x, q.y, q.z, v.x, v.y, v.z,
                w.gripper_action.as_str()
            ));
        }
        out
    }
}

/// Path length plus weighted squared second differences:
/// `Σ‖Δx‖ + λ · Σ‖Δ²x‖²`.
pub fn control_cost_weighted(waypoints: &[Waypoint], accel_weight: f64) -> f64 {
    let pos: Vec<Vec3> = waypoints.iter().map(|w| w.pose.position).collect();
    let mut cost = 0.0;
    for pair in pos.windows(2) {
        cost += (pair[1] - pair[0]).norm();
    }
    for triple in pos.windows(3) {
        let dd = triple[2] - triple[1] * 2.0 + triple[0];
        cost += accel_weight * dd.norm_squared();
    }
    cost
}

/// [`control_cost_weighted`] with the default acceleration weight.
pub fn control_cost(waypoints: &[Waypoint]) -> f64 {
    control_cost_weighted(waypoints, DEFAULT_ACCEL_WEIGHT)
}

/// Central finite-difference velocities with Δt = [`DEFAULT_DT`];
/// one-sided at the ends, zero for single-point paths.
fn velocities(positions: &[Vec3]) -> Vec<Vec3> {
    let n = positions.len();
    let mut out = vec![Vec3::ZERO; n];
    if n < 2 {
        return out;
    }
    out[0] = (positions[1] - positions[0]) / DEFAULT_DT;
    out[n - 1] = (positions[n - 1] - positions[n - 2]) / DEFAULT_DT;
    for i in 1..n - 1 {
        out[i] = (positions[i + 1] - positions[i - 1]) / (2.0 * DEFAULT_DT);
    }
    out
}

fn assemble(positions: Vec<Vec3>, orientations: Vec<Quat>) -> Trajectory {
    let vels = velocities(&positions);
    let waypoints = positions
        .into_iter()
        .zip(orientations)
        .zip(vels)
        .map(|((p, q), v)| Waypoint {
            pose: Pose::new(p, q),
            velocity: v,
            gripper_action: GripperAction::None,
        })
        .collect();
    Trajectory::new(waypoints)
}

/// Evenly spaced straight-line trajectory from `start` along `axis`
/// (normalized internally) by `distance`, orientation held constant.
pub fn straight_line(
    start: &Pose,
    axis: Vec3,
    distance: f64,
    n: usize,
) -> Result<Trajectory, PlanError> {
    if distance <= 0.0 {
        return Err(PlanError::InvalidArgument(format!("distance must be positive, got {distance}")));
    }
    if n < 2 {
        return Err(PlanError::InvalidArgument(format!("need at least 2 waypoints, got {n}")));
    }
    let dir = axis
        .normalized()
        .map_err(|_| PlanError::InvalidArgument("zero-length axis".to_string()))?;
    let positions: Vec<Vec3> = (0..n)
        .map(|k| start.position + dir * (distance * k as f64 / (n - 1) as f64))
        .collect();
    let orientations = vec![start.orientation; n];
    Ok(assemble(positions, orientations))
}

/// Rotational path of `n` poses around a revolute joint: waypoint k is the
/// current pose rotated by `k·angle/n` degrees about the joint axis line
/// (position via Rodrigues, orientation pre-multiplied). The current pose
/// itself is not included; the final waypoint sits at exactly `angle_deg`.
pub fn arc_path_around_joint(
    current: &Pose,
    joint_axis: Vec3,
    joint_position: Vec3,
    n: usize,
    angle_deg: f64,
) -> Result<Trajectory, PlanError> {
    if !joint_axis.is_unit(UNIT_TOL) {
        return Err(PlanError::InvalidArgument(format!(
            "joint axis must be unit length, norm {}",
            joint_axis.norm()
        )));
    }
    if n < 1 {
        return Err(PlanError::InvalidArgument("need at least 1 waypoint".to_string()));
    }
    let total = angle_deg.to_radians();
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    for k in 1..=n {
        let theta = total * (k as f64 / n as f64);
        let rot = Quat::from_axis_angle(joint_axis, theta);
        positions.push(joint_position + rot.rotate(current.position - joint_position));
        orientations.push(rot * current.orientation);
    }
    Ok(assemble(positions, orientations))
}

/// Builds a trajectory through the given poses verbatim, with
/// finite-difference velocities.
pub fn path_from_poses(poses: &[Pose]) -> Result<Trajectory, PlanError> {
    if poses.is_empty() {
        return Err(PlanError::InvalidArgument("empty pose list".to_string()));
    }
    let positions: Vec<Vec3> = poses.iter().map(|p| p.position).collect();
    let orientations: Vec<Quat> = poses.iter().map(|p| p.orientation).collect();
    Ok(assemble(positions, orientations))
}

/// How unknown cells are treated during collision checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownPolicy {
    Free,
    Occupied,
}

/// Constraint set for free-space planning: workspace bounds, the occupancy
/// grid, the unknown-cell policy, and an optional region (the target
/// object's vicinity) exempted from collision checks.
#[derive(Debug, Clone)]
pub struct PlanConstraints<'a> {
    pub workspace: Aabb3,
    pub grid: &'a OccupancyGrid,
    pub treat_unknown_as: UnknownPolicy,
    pub exempt_region: Option<Aabb3>,
}

/// Sampler parameters; all planner randomness derives from `seed`.
#[derive(Debug, Clone)]
pub struct PlanParams {
    pub seed: u64,
    /// Number of candidate trajectories (the straight line counts as the
    /// first, unperturbed one).
    pub samples: usize,
    /// Interior control points perturbed per candidate.
    pub control_points: usize,
    /// Isotropic Gaussian sigma for control-point perturbations, meters.
    pub sigma: f64,
    /// Waypoints per candidate trajectory.
    pub waypoints: usize,
    pub gripper: GripperProxy,
    pub accel_weight: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            seed: 0,
            samples: 256,
            control_points: 3,
            sigma: 0.1,
            waypoints: 20,
            gripper: GripperProxy::default(),
            accel_weight: DEFAULT_ACCEL_WEIGHT,
        }
    }
}

/// True when the gripper body at `pose` touches disallowed cells.
pub fn pose_collides(pose: &Pose, c: &PlanConstraints, gripper: &GripperProxy) -> bool {
    for p in gripper.sample_points(pose, gripper.max_width) {
        if let Some(ex) = &c.exempt_region {
            if ex.contains(p) {
                continue;
            }
        }
        match c.grid.query(p) {
            CellQuery::Occupied => return true,
            CellQuery::Unknown if c.treat_unknown_as == UnknownPolicy::Occupied => return true,
            _ => {}
        }
    }
    false
}

/// First colliding gripper sample point at `pose`, if any.
fn collision_point(pose: &Pose, c: &PlanConstraints, gripper: &GripperProxy) -> Option<Vec3> {
    for p in gripper.sample_points(pose, gripper.max_width) {
        if let Some(ex) = &c.exempt_region {
            if ex.contains(p) {
                continue;
            }
        }
        match c.grid.query(p) {
            CellQuery::Occupied => return Some(p),
            CellQuery::Unknown if c.treat_unknown_as == UnknownPolicy::Occupied => return Some(p),
            _ => {}
        }
    }
    None
}

/// Checks the swept gripper volume along a trajectory, interpolating each
/// segment at steps no larger than one voxel.
fn trajectory_collision(
    traj: &Trajectory,
    c: &PlanConstraints,
    gripper: &GripperProxy,
) -> Option<Vec3> {
    let step = c.grid.geometry().voxel_size;
    for w in &traj.waypoints {
        if !c.workspace.contains(w.pose.position) {
            return Some(w.pose.position);
        }
    }
    for pair in traj.waypoints.windows(2) {
        let (a, b) = (pair[0].pose, pair[1].pose);
        let dist = a.position.distance(b.position);
        let substeps = (dist / step).ceil() as usize;
        for s in 0..=substeps {
            let t = if substeps == 0 { 0.0 } else { s as f64 / substeps as f64 };
            let pose = a.interpolate(&b, t);
            if let Some(p) = collision_point(&pose, c, gripper) {
                return Some(p);
            }
        }
    }
    None
}

fn candidate_trajectory(
    start: &Pose,
    goal: &Pose,
    offsets: &[Vec3],
    m: usize,
    accel_weight: f64,
) -> Trajectory {
    // Piecewise-linear control polyline: start, K perturbed interior
    // points at even fractions, goal.
    let k = offsets.len();
    let mut ctrl = Vec::with_capacity(k + 2);
    ctrl.push(start.position);
    for (j, off) in offsets.iter().enumerate() {
        let t = (j + 1) as f64 / (k + 1) as f64;
        ctrl.push(start.position.lerp(goal.position, t) + *off);
    }
    ctrl.push(goal.position);
    let segments = ctrl.len() - 1;
    let mut positions = Vec::with_capacity(m);
    let mut orientations = Vec::with_capacity(m);
    for i in 0..m {
        let t = i as f64 / (m - 1) as f64;
        let x = t * segments as f64;
        let seg = (x.floor() as usize).min(segments - 1);
        let local = x - seg as f64;
        positions.push(ctrl[seg].lerp(ctrl[seg + 1], local));
        orientations.push(start.orientation.slerp(goal.orientation, t));
    }
    let vels = velocities(&positions);
    let waypoints: Vec<Waypoint> = positions
        .into_iter()
        .zip(orientations)
        .zip(vels)
        .map(|((p, q), v)| Waypoint {
            pose: Pose::new(p, q),
            velocity: v,
            gripper_action: GripperAction::None,
        })
        .collect();
    let cost = control_cost_weighted(&waypoints, accel_weight);
    Trajectory { waypoints, cost }
}

/// Zeroth-order trajectory optimization: samples candidates, keeps the
/// feasible ones, and returns the minimum-cost survivor.
pub fn plan_free_path(
    start: &Pose,
    goal: &Pose,
    constraints: &PlanConstraints,
    params: &PlanParams,
) -> Result<Trajectory, PlanError> {
    if !constraints.workspace.contains(start.position) {
        return Err(PlanError::OutsideWorkspace { which: "start" });
    }
    if !constraints.workspace.contains(goal.position) {
        return Err(PlanError::OutsideWorkspace { which: "goal" });
    }
    let m = params.waypoints.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let normal = Normal::new(0.0, params.sigma.max(1e-12)).unwrap();
    let mut best: Option<Trajectory> = None;
    let mut best_infeasible_cost = f64::INFINITY;
    let mut first_collision = None;
    for s in 0..params.samples.max(1) {
        let offsets: Vec<Vec3> = if s == 0 {
            vec![Vec3::ZERO; params.control_points]
        } else {
            (0..params.control_points)
                .map(|_| {
                    Vec3::new(
                        normal.sample(&mut rng),
                        normal.sample(&mut rng),
                        normal.sample(&mut rng),
                    )
                })
                .collect()
        };
        let cand = candidate_trajectory(start, goal, &offsets, m, params.accel_weight);
        match trajectory_collision(&cand, constraints, &params.gripper) {
            None => {
                if best.as_ref().map_or(true, |b| cand.cost < b.cost) {
                    best = Some(cand);
                }
            }
            Some(p) => {
                if cand.cost < best_infeasible_cost {
                    best_infeasible_cost = cand.cost;
                    first_collision = Some(p);
                }
            }
        }
    }
    best.ok_or(PlanError::PlanningFailed {
        attempted: params.samples.max(1),
        best_cost: best_infeasible_cost,
        first_collision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::distance_to_line;
    use crate::volume::CellState;
    use std::f64::consts::FRAC_PI_2;

    fn wp(x: f64, y: f64, z: f64) -> Waypoint {
        Waypoint {
            pose: Pose::from_position(Vec3::new(x, y, z)),
            velocity: Vec3::ZERO,
            gripper_action: GripperAction::None,
        }
    }

    #[test]
    fn control_cost_basics() {
        assert_eq!(control_cost(&[wp(0.0, 0.0, 0.0)]), 0.0);
        let two = [wp(0.0, 0.0, 0.0), wp(0.5, 0.0, 0.0)];
        assert!((control_cost(&two) - 0.5).abs() < 1e-12);
        let collinear = [wp(0.0, 0.0, 0.0), wp(0.1, 0.0, 0.0), wp(0.2, 0.0, 0.0)];
        assert!((control_cost(&collinear) - 0.2).abs() < 1e-12);
        // A kink adds a positive acceleration term.
        let kinked = [wp(0.0, 0.0, 0.0), wp(0.1, 0.05, 0.0), wp(0.2, 0.0, 0.0)];
        assert!(control_cost(&kinked) > control_cost(&collinear));
    }

    #[test]
    fn control_cost_rigid_invariance() {
        let wps = [wp(0.0, 0.0, 0.0), wp(0.1, 0.02, 0.0), wp(0.25, -0.03, 0.1)];
        let t = Pose::new(
            Vec3::new(0.3, -0.2, 0.5),
            Quat::from_axis_angle(Vec3::new(1.0, 1.0, 0.2), 0.8),
        );
        let moved: Vec<Waypoint> = wps
            .iter()
            .map(|w| Waypoint { pose: t.compose(&w.pose), ..*w })
            .collect();
        assert!((control_cost(&wps) - control_cost(&moved)).abs() < 1e-9);
    }

    #[test]
    fn straight_line_endpoints_and_midpoint() {
        let start = Pose::from_position(Vec3::ZERO);
        let t = straight_line(&start, Vec3::new(0.0, 0.0, 2.0), 0.1, 2).unwrap();
        assert_eq!(t.waypoints.len(), 2);
        assert!((t.waypoints[0].pose.position.z - 0.0).abs() < 1e-15);
        assert!((t.waypoints[1].pose.position.z - 0.1).abs() < 1e-15);
        let t3 = straight_line(&start, Vec3::Z, 0.1, 3).unwrap();
        assert!((t3.waypoints[1].pose.position.z - 0.05).abs() < 1e-12);
        assert!(matches!(
            straight_line(&start, Vec3::Z, 0.0, 2),
            Err(PlanError::InvalidArgument(_))
        ));
        assert!(matches!(
            straight_line(&start, Vec3::ZERO, 0.1, 2),
            Err(PlanError::InvalidArgument(_))
        ));
    }

    #[test]
    fn trajectory_cost_invariant_holds() {
        let start = Pose::from_position(Vec3::ZERO);
        let t = straight_line(&start, Vec3::X, 0.3, 7).unwrap();
        assert!((t.cost - control_cost(&t.waypoints)).abs() < 1e-9);
    }

    #[test]
    fn arc_path_quarter_turn_hand_computed() {
        let current = Pose::from_position(Vec3::new(0.4, 0.0, 1.0));
        let t = arc_path_around_joint(&current, Vec3::Z, Vec3::ZERO, 2, 90.0).unwrap();
        assert_eq!(t.waypoints.len(), 2);
        let p0 = t.waypoints[0].pose.position;
        let p1 = t.waypoints[1].pose.position;
        assert!(p0.distance(Vec3::new(0.2828427124746190, 0.2828427124746190, 1.0)) < 1e-12);
        assert!(p1.distance(Vec3::new(0.0, 0.4, 1.0)) < 1e-12);
    }

    #[test]
    fn arc_path_zero_angle_stays_put() {
        let current = Pose::new(
            Vec3::new(0.2, 0.1, 1.1),
            Quat::from_axis_angle(Vec3::Y, 0.3),
        );
        let t = arc_path_around_joint(&current, Vec3::Z, Vec3::ZERO, 5, 0.0).unwrap();
        for w in &t.waypoints {
            assert!(w.pose.position.distance(current.position) < 1e-12);
            assert!(w.pose.orientation.angle_to(current.orientation) < 1e-12);
        }
    }

    #[test]
    fn arc_path_constant_axis_distance_and_inverse() {
        let current = Pose::new(
            Vec3::new(0.4, 0.0, 1.0),
            Quat::from_axis_angle(Vec3::X, 0.4),
        );
        let axis = Vec3::new(0.2, -0.3, 0.93).normalized().unwrap();
        let origin = Vec3::new(0.05, 0.02, 1.0);
        let t = arc_path_around_joint(&current, axis, origin, 8, 70.0).unwrap();
        let d0 = distance_to_line(current.position, origin, axis);
        for w in &t.waypoints {
            let d = distance_to_line(w.pose.position, origin, axis);
            assert!((d - d0).abs() < 1e-9);
        }
        // Endpoint orientation equals rotation(angle) applied to current.
        let expect =
            Quat::from_axis_angle(axis, 70f64.to_radians()) * current.orientation;
        assert!(t.last_pose().unwrap().orientation.angle_to(expect) < 1e-9);
        // Arc then inverse arc returns to the start pose.
        let end = t.last_pose().unwrap();
        let back = arc_path_around_joint(&end, axis, origin, 8, -70.0).unwrap();
        let final_pose = back.last_pose().unwrap();
        assert!(final_pose.position.distance(current.position) < 1e-9);
        assert!(final_pose.orientation.angle_to(current.orientation) < 1e-9);
    }

    #[test]
    fn arc_path_rejects_non_unit_axis() {
        let current = Pose::from_position(Vec3::X);
        assert!(matches!(
            arc_path_around_joint(&current, Vec3::new(0.0, 0.0, 2.0), Vec3::ZERO, 2, 10.0),
            Err(PlanError::InvalidArgument(_))
        ));
    }

    fn test_workspace() -> Aabb3 {
        Aabb3::new(Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 2.0))
    }

    fn free_grid() -> OccupancyGrid {
        OccupancyGrid::filled(Vec3::new(-1.0, -1.0, 0.0), 0.01, [200, 200, 200], CellState::Free)
    }

    #[test]
    fn empty_grid_returns_straight_line() {
        let grid = free_grid();
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: None,
        };
        let start = Pose::from_position(Vec3::new(-0.5, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, 0.0, 1.0));
        let t = plan_free_path(&start, &goal, &c, &PlanParams::default()).unwrap();
        // The straight line is sampled first and has minimal cost.
        for w in &t.waypoints {
            assert!(w.pose.position.y.abs() < 1e-12);
            assert!((w.pose.position.z - 1.0).abs() < 1e-12);
        }
        assert!((t.cost - 1.0).abs() < 1e-9);
    }

    #[test]
    fn goal_outside_workspace_is_precondition_error() {
        let grid = free_grid();
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: None,
        };
        let start = Pose::from_position(Vec3::new(0.0, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(3.0, 0.0, 1.0));
        assert!(matches!(
            plan_free_path(&start, &goal, &c, &PlanParams::default()),
            Err(PlanError::OutsideWorkspace { which: "goal" })
        ));
    }

    fn slab_grid_with_gap(gap_center_y: f64) -> OccupancyGrid {
        let mut grid = free_grid();
        // A vertical slab at x in [-0.05, 0.05] blocking the direct path,
        // with a gap around gap_center_y.
        grid.fill_region(
            &Aabb3::new(Vec3::new(-0.05, -1.0, 0.0), Vec3::new(0.05, 1.0, 2.0)),
            CellState::Occupied,
        );
        grid.fill_region(
            &Aabb3::new(
                Vec3::new(-0.06, gap_center_y - 0.18, 0.0),
                Vec3::new(0.06, gap_center_y + 0.18, 2.0),
            ),
            CellState::Free,
        );
        grid
    }

    #[test]
    fn obstructed_scene_yields_collision_free_path() {
        let grid = slab_grid_with_gap(0.15);
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: None,
        };
        let start = Pose::from_position(Vec3::new(-0.5, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, 0.0, 1.0));
        let params = PlanParams { seed: 42, ..Default::default() };
        let t = plan_free_path(&start, &goal, &c, &params).unwrap();
        // Independent dense re-check at 2x waypoint resolution.
        for pair in t.waypoints.windows(2) {
            for s in 0..=2 {
                let pose = pair[0].pose.interpolate(&pair[1].pose, s as f64 / 2.0);
                assert!(!pose_collides(&pose, &c, &params.gripper));
            }
        }
    }

    #[test]
    fn fully_blocked_scene_fails_with_diagnostics() {
        let mut grid = free_grid();
        grid.fill_region(
            &Aabb3::new(Vec3::new(-0.05, -1.0, 0.0), Vec3::new(0.05, 1.0, 2.0)),
            CellState::Occupied,
        );
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: None,
        };
        let start = Pose::from_position(Vec3::new(-0.5, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, 0.0, 1.0));
        let err = plan_free_path(&start, &goal, &c, &PlanParams::default());
        match err {
            Err(PlanError::PlanningFailed { attempted, first_collision, .. }) => {
                assert_eq!(attempted, 256);
                assert!(first_collision.is_some());
            }
            other => panic!("expected planning failure, got {other:?}"),
        }
    }

    #[test]
    fn same_seed_is_bit_reproducible() {
        let grid = slab_grid_with_gap(-0.15);
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: None,
        };
        let start = Pose::from_position(Vec3::new(-0.5, 0.1, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, -0.1, 1.0));
        let params = PlanParams { seed: 7, ..Default::default() };
        let a = plan_free_path(&start, &goal, &c, &params).unwrap();
        let b = plan_free_path(&start, &goal, &c, &params).unwrap();
        assert_eq!(a.waypoints.len(), b.waypoints.len());
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        for (wa, wb) in a.waypoints.iter().zip(b.waypoints.iter()) {
            assert_eq!(wa.pose.position.x.to_bits(), wb.pose.position.x.to_bits());
            assert_eq!(wa.pose.position.y.to_bits(), wb.pose.position.y.to_bits());
            assert_eq!(wa.pose.position.z.to_bits(), wb.pose.position.z.to_bits());
        }
    }

    #[test]
    fn unknown_policy_occupied_blocks_unknown_cells() {
        let mut grid = free_grid();
        grid.fill_region(
            &Aabb3::new(Vec3::new(-0.05, -1.0, 0.0), Vec3::new(0.05, 1.0, 2.0)),
            CellState::Unknown,
        );
        let start = Pose::from_position(Vec3::new(-0.5, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, 0.0, 1.0));
        let strict = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Occupied,
            exempt_region: None,
        };
        assert!(plan_free_path(&start, &goal, &strict, &PlanParams::default()).is_err());
        let relaxed = PlanConstraints { treat_unknown_as: UnknownPolicy::Free, ..strict };
        assert!(plan_free_path(&start, &goal, &relaxed, &PlanParams::default()).is_ok());
    }

    #[test]
    fn exempt_region_is_ignored_in_collisions() {
        let mut grid = free_grid();
        let block = Aabb3::new(Vec3::new(-0.05, -0.2, 0.8), Vec3::new(0.05, 0.2, 1.2));
        grid.fill_region(&block, CellState::Occupied);
        let start = Pose::from_position(Vec3::new(-0.5, 0.0, 1.0));
        let goal = Pose::from_position(Vec3::new(0.5, 0.0, 1.0));
        let c = PlanConstraints {
            workspace: test_workspace(),
            grid: &grid,
            treat_unknown_as: UnknownPolicy::Free,
            exempt_region: Some(block.inflate(0.12)),
        };
        let t = plan_free_path(&start, &goal, &c, &PlanParams::default()).unwrap();
        assert!(t.cost < 1.2);
    }

    #[test]
    fn velocity_finite_differences() {
        let start = Pose::from_position(Vec3::ZERO);
        let t = straight_line(&start, Vec3::X, 0.2, 5).unwrap();
        // Even spacing 0.05 m per step, dt 0.1 s: interior speed 0.5 m/s.
        for w in &t.waypoints[1..4] {
            assert!((w.velocity.x - 0.5).abs() < 1e-9);
        }
        assert!((t.waypoints[0].velocity.x - 0.5).abs() < 1e-9);
    }
}
