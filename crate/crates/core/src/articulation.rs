//! Articulated-object joint estimation from per-point predictions.
//!
//! Each point carries a class (static / revolute / prismatic), an offset
//! toward its part centroid, a vector to its projection on the joint axis,
//! and the axis direction. Points are grouped per class by DBSCAN on the
//! centroid-shifted positions `p + offset`; each cluster votes for one
//! joint: the axis direction is the dominant eigenvector of the direction
//! scatter and the axis point is the mean of the projected positions
//! `p + axis_projection`.
//!
//! The neural predictor that produces these per-point fields is out of
//! scope; [`oracle_predictions`] derives them from ground truth with
//! configurable Gaussian noise instead.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geom::{sym_eigen3, Vec3};

/// Default DBSCAN neighborhood radius for part clustering, meters.
pub const DEFAULT_EPS: f64 = 0.05;
/// Default DBSCAN minimum neighborhood size.
pub const DEFAULT_MIN_PTS: usize = 10;

#[derive(Debug, Error)]
pub enum ArticulationError {
    #[error("no non-static predictions to estimate joints from")]
    NoJointsFound,
    #[error("prediction and truth lengths differ or are empty ({preds} vs {truth})")]
    LengthMismatch { preds: usize, truth: usize },
}

/// Per-point semantic class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartClass {
    Static,
    Revolute,
    Prismatic,
}

/// Kind of articulation joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointType {
    Revolute,
    Prismatic,
}

impl JointType {
    pub fn as_str(self) -> &'static str {
        match self {
            JointType::Revolute => "revolute",
            JointType::Prismatic => "prismatic",
        }
    }

    pub fn parse(s: &str) -> Option<JointType> {
        match s {
            "revolute" => Some(JointType::Revolute),
            "prismatic" => Some(JointType::Prismatic),
            _ => None,
        }
    }
}

/// One point's predicted fields.
#[derive(Debug, Clone, Copy)]
pub struct PointPrediction {
    pub position: Vec3,
    pub class: PartClass,
    /// Vector from the point toward its part centroid.
    pub offset: Vec3,
    /// Vector from the point to its orthogonal projection on the joint axis.
    pub axis_projection: Vec3,
    /// Unit direction of the joint axis.
    pub axis_direction: Vec3,
}

/// Full joint record: estimated axis plus limits and current displacement
/// (the latter two come from scene ground truth, not estimation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointInfo {
    pub joint_position: Vec3,
    pub joint_axis: Vec3,
    pub joint_type: JointType,
    /// (lo, hi) in radians for revolute, meters for prismatic.
    pub limits: (f64, f64),
    pub value: f64,
}

impl JointInfo {
    pub fn range(&self) -> f64 {
        self.limits.1 - self.limits.0
    }
}

/// One estimated joint together with the prediction indices that voted
/// for it.
#[derive(Debug, Clone)]
pub struct JointEstimate {
    pub point_indices: Vec<usize>,
    pub joint_position: Vec3,
    pub joint_axis: Vec3,
    pub joint_type: JointType,
}

/// Density clustering over 3D points. Returns one label per point,
/// -1 for noise; labels are deterministic in input order.
pub fn dbscan(points: &[Vec3], eps: f64, min_pts: usize) -> Vec<i32> {
    assert!(eps > 0.0 && min_pts >= 1);
    let n = points.len();
    let mut labels = vec![-1i32; n];
    let mut visited = vec![false; n];
    let eps_sq = eps * eps;
    let neighbors = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| (points[i] - points[j]).norm_squared() <= eps_sq)
            .collect()
    };
    let mut next_label = 0i32;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seed = neighbors(i);
        if seed.len() < min_pts {
            continue; // noise unless later claimed as a border point
        }
        let label = next_label;
        next_label += 1;
        labels[i] = label;
        let mut queue: Vec<usize> = seed;
        let mut qi = 0;
        while qi < queue.len() {
            let j = queue[qi];
            qi += 1;
            if labels[j] == -1 {
                labels[j] = label;
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nb = neighbors(j);
            if nb.len() >= min_pts {
                queue.extend(nb);
            }
        }
    }
    labels
}

/// Clustering knobs for joint estimation.
#[derive(Debug, Clone, Copy)]
pub struct EstimateConfig {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig { eps: DEFAULT_EPS, min_pts: DEFAULT_MIN_PTS }
    }
}

/// Groups non-static predictions into part clusters and votes per cluster
/// for joint axis, position, and type.
pub fn estimate_joints(
    preds: &[PointPrediction],
    cfg: &EstimateConfig,
) -> Result<Vec<JointEstimate>, ArticulationError> {
    let mut estimates = Vec::new();
    let mut any_non_static = false;
    for class in [PartClass::Revolute, PartClass::Prismatic] {
        let idx: Vec<usize> = preds
            .iter()
            .enumerate()
            .filter(|(_, p)| p.class == class)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        any_non_static = true;
        let shifted: Vec<Vec3> = idx.iter().map(|&i| preds[i].position + preds[i].offset).collect();
        let labels = dbscan(&shifted, cfg.eps, cfg.min_pts);
        let n_clusters = labels.iter().copied().max().unwrap_or(-1) + 1;
        for label in 0..n_clusters {
            let members: Vec<usize> = idx
                .iter()
                .zip(labels.iter())
                .filter(|(_, &l)| l == label)
                .map(|(&i, _)| i)
                .collect();
            if members.len() < cfg.min_pts {
                continue;
            }
            // Sign-robust direction voting: dominant eigenvector of the
            // direction scatter, oriented toward the mean direction.
            let mut scatter = [[0.0f64; 3]; 3];
            let mut mean_dir = Vec3::ZERO;
            let mut axis_point = Vec3::ZERO;
            for &i in &members {
                let d = preds[i].axis_direction;
                let row = [d.x, d.y, d.z];
                for (r, &dr) in row.iter().enumerate() {
                    for (c, &dc) in row.iter().enumerate() {
                        scatter[r][c] += dr * dc;
                    }
                }
                mean_dir = mean_dir + d;
                axis_point = axis_point + preds[i].position + preds[i].axis_projection;
            }
            let count = members.len() as f64;
            axis_point = axis_point / count;
            let (_, vecs) = sym_eigen3(scatter);
            let mut axis = vecs[2];
            if axis.dot(mean_dir) < 0.0 {
                axis = -axis;
            }
            let joint_type = match class {
                PartClass::Revolute => JointType::Revolute,
                PartClass::Prismatic => JointType::Prismatic,
                PartClass::Static => unreachable!(),
            };
            estimates.push(JointEstimate {
                point_indices: members,
                joint_position: axis_point,
                joint_axis: axis,
                joint_type,
            });
        }
    }
    if !any_non_static {
        return Err(ArticulationError::NoJointsFound);
    }
    Ok(estimates)
}

/// Per-point loss components, each averaged over all points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLoss {
    pub total: f64,
    pub class: f64,
    pub offset: f64,
    pub projection: f64,
    pub direction: f64,
}

/// `‖v̂ − v‖ − (v/‖v‖ · v̂/‖v̂‖)`; the cosine term is defined as 0 when
/// either vector has zero norm.
fn vector_loss(pred: Vec3, truth: Vec3) -> f64 {
    let dist = (pred - truth).norm();
    let np = pred.norm();
    let nt = truth.norm();
    let cos = if np < 1e-12 || nt < 1e-12 { 0.0 } else { pred.dot(truth) / (np * nt) };
    dist - cos
}

/// Combined prediction loss: mean over points of the 0/1 class error plus
/// the vector loss applied to offsets, axis projections, and directions.
pub fn gamma_loss(
    preds: &[PointPrediction],
    truth: &[PointPrediction],
) -> Result<GammaLoss, ArticulationError> {
    if preds.is_empty() || preds.len() != truth.len() {
        return Err(ArticulationError::LengthMismatch { preds: preds.len(), truth: truth.len() });
    }
    let n = preds.len() as f64;
    let mut class = 0.0;
    let mut offset = 0.0;
    let mut projection = 0.0;
    let mut direction = 0.0;
    for (p, t) in preds.iter().zip(truth.iter()) {
        if p.class != t.class {
            class += 1.0;
        }
        offset += vector_loss(p.offset, t.offset);
        projection += vector_loss(p.axis_projection, t.axis_projection);
        direction += vector_loss(p.axis_direction, t.axis_direction);
    }
    class /= n;
    offset /= n;
    projection /= n;
    direction /= n;
    Ok(GammaLoss {
        total: class + offset + projection + direction,
        class,
        offset,
        projection,
        direction,
    })
}

/// Ground truth for one rigid part: its surface points, class, and (for
/// articulated parts) the joint axis line in the same frame as the points.
#[derive(Debug, Clone)]
pub struct PartTruth {
    pub points: Vec<Vec3>,
    pub class: PartClass,
    pub joint_position: Vec3,
    pub joint_axis: Vec3,
}

/// Gaussian noise levels applied per prediction field.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleNoise {
    pub sigma_offset: f64,
    pub sigma_projection: f64,
    pub sigma_direction: f64,
    /// Probability of flipping a point's class to a random other class.
    pub class_error_rate: f64,
}

fn gauss_vec(rng: &mut impl Rng, sigma: f64) -> Vec3 {
    if sigma <= 0.0 {
        return Vec3::ZERO;
    }
    let normal = Normal::new(0.0, sigma).unwrap();
    Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng))
}

/// Derives per-point predictions from ground-truth parts, standing in for
/// the learned predictor. With zero noise the output is exact.
pub fn oracle_predictions(
    parts: &[PartTruth],
    noise: &OracleNoise,
    rng: &mut impl Rng,
) -> Vec<PointPrediction> {
    let mut out = Vec::new();
    for part in parts {
        if part.points.is_empty() {
            continue;
        }
        let centroid =
            part.points.iter().fold(Vec3::ZERO, |a, p| a + *p) / part.points.len() as f64;
        for &p in &part.points {
            let mut class = part.class;
            if noise.class_error_rate > 0.0 && rng.random::<f64>() < noise.class_error_rate {
                class = match (class, rng.random_range(0..2)) {
                    (PartClass::Static, 0) => PartClass::Revolute,
                    (PartClass::Static, _) => PartClass::Prismatic,
                    (PartClass::Revolute, 0) => PartClass::Static,
                    (PartClass::Revolute, _) => PartClass::Prismatic,
                    (PartClass::Prismatic, 0) => PartClass::Static,
                    (PartClass::Prismatic, _) => PartClass::Revolute,
                };
            }
            let offset = centroid - p + gauss_vec(rng, noise.sigma_offset);
            let (axis_projection, axis_direction) = if part.class == PartClass::Static {
                // No joint: the projection is zero and the direction is a
                // fixed placeholder unit vector.
                (gauss_vec(rng, noise.sigma_projection), Vec3::Z)
            } else {
                let on_axis = crate::geom::project_onto_line(p, part.joint_position, part.joint_axis);
                let v = on_axis - p + gauss_vec(rng, noise.sigma_projection);
                let d = (part.joint_axis + gauss_vec(rng, noise.sigma_direction))
                    .normalized()
                    .unwrap_or(part.joint_axis);
                (v, d)
            };
            out.push(PointPrediction { position: p, class, offset, axis_projection, axis_direction });
        }
    }
    out
}

/// Columnar text dump of predictions (one point per line) for golden
/// tests: `p ĉ ô v̂ d̂`.
pub fn predictions_to_text(preds: &[PointPrediction]) -> String {
    let mut out = String::new();
    out.push_str("predictions v1\n");
    for p in preds {
        let c = match p.class {
            PartClass::Static => 0,
            PartClass::Revolute => 1,
            PartClass::Prismatic => 2,
        };
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {} {} {} {} {}\n",
            p.position.x, p.position.y, p.position.z, c,
            p.offset.x, p.offset.y, p.offset.z,
            p.axis_projection.x, p.axis_projection.y, p.axis_projection.z,
            p.axis_direction.x, p.axis_direction.y, p.axis_direction.z,
        ));
    }
    out
}
