//! Human-readable scene files: a versioned line-oriented text format
//! covering the workspace, gripper, cameras, and objects with their parts
//! and joints. Poses are flat arrays `x y z qw qx qy qz`; writing and
//! re-parsing a scene reproduces it exactly.

use crate::articulation::JointType;
use crate::geom::{Aabb3, Pose, Quat, Vec3};
use crate::volume::Intrinsics;

use super::render::Camera;
use super::shapes::{Face, ShapeKind};
use super::{
    Category, GripperState, Joint, Part, PartBinding, SceneObject, WorldState, WorldError,
};

fn fmt_pose(p: &Pose) -> String {
    format!(
        "{} {} {} {} {} {} {}",
        p.position.x, p.position.y, p.position.z,
        p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z
    )
}

fn fmt_shape(s: &ShapeKind) -> String {
    match *s {
        ShapeKind::Box { size } => format!("box {} {} {}", size.x, size.y, size.z),
        ShapeKind::OpenBox { size, wall, open } => format!(
            "openbox {} {} {} wall {} open {}",
            size.x, size.y, size.z, wall, open.as_str()
        ),
        ShapeKind::Cylinder { radius, height } => format!("cylinder {radius} {height}"),
        ShapeKind::Sphere { radius } => format!("sphere {radius}"),
    }
}

/// Serializes a world state to scene text.
pub fn scene_to_text(state: &WorldState) -> String {
    let mut out = String::from("scene v1\n");
    out.push_str(&format!("table_height {}\n", state.table_height));
    let w = &state.workspace;
    out.push_str(&format!(
        "workspace {} {} {} {} {} {}\n",
        w.min.x, w.min.y, w.min.z, w.max.x, w.max.y, w.max.z
    ));
    out.push_str(&format!(
        "gripper pose {} open {}\n",
        fmt_pose(&state.gripper.pose),
        state.gripper.open_fraction
    ));
    for c in &state.cameras {
        out.push_str(&format!(
            "camera {} {} {} {} {} {} {} pose {}\n",
            c.name,
            c.width,
            c.height,
            c.intrinsics.fx,
            c.intrinsics.fy,
            c.intrinsics.cx,
            c.intrinsics.cy,
            fmt_pose(&c.camera_to_world)
        ));
    }
    for o in &state.objects {
        out.push_str(&format!(
            "object {} label {} category {} graspable {} pose {}\n",
            o.name,
            o.label,
            o.category.as_str(),
            if o.graspable { 1 } else { 0 },
            fmt_pose(&o.pose)
        ));
        for p in &o.parts {
            let bind = match p.binding {
                PartBinding::Base => "base".to_string(),
                PartBinding::Joint(j) => format!("joint {j}"),
            };
            out.push_str(&format!(
                "part {} {} bind {} pose {}\n",
                p.name,
                fmt_shape(&p.shape),
                bind,
                fmt_pose(&p.local_pose)
            ));
        }
        for j in &o.joints {
            out.push_str(&format!(
                "joint {} axis {} {} {} position {} {} {} limits {} {} value {}\n",
                j.joint_type.as_str(),
                j.axis.x, j.axis.y, j.axis.z,
                j.position.x, j.position.y, j.position.z,
                j.limits.0, j.limits.1,
                j.value
            ));
        }
        out.push_str("end\n");
    }
    out
}

struct Cursor<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(tokens: Vec<&'a str>, line: usize) -> Self {
        Cursor { tokens, pos: 0, line }
    }

    fn err(&self, message: impl Into<String>) -> WorldError {
        WorldError::SceneParse { line: self.line, message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str, WorldError> {
        let t = self.tokens.get(self.pos).copied().ok_or_else(|| self.err("unexpected end of line"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, word: &str) -> Result<(), WorldError> {
        let t = self.next()?;
        if t != word {
            return Err(self.err(format!("expected '{word}', got '{t}'")));
        }
        Ok(())
    }

    fn number(&mut self) -> Result<f64, WorldError> {
        let t = self.next()?;
        t.parse().map_err(|_| self.err(format!("expected a number, got '{t}'")))
    }

    fn usize(&mut self) -> Result<usize, WorldError> {
        let t = self.next()?;
        t.parse().map_err(|_| self.err(format!("expected an integer, got '{t}'")))
    }

    fn vec3(&mut self) -> Result<Vec3, WorldError> {
        Ok(Vec3::new(self.number()?, self.number()?, self.number()?))
    }

    fn pose(&mut self) -> Result<Pose, WorldError> {
        let p = self.vec3()?;
        let w = self.number()?;
        let x = self.number()?;
        let y = self.number()?;
        let z = self.number()?;
        Ok(Pose::new(p, Quat::new(w, x, y, z)))
    }

    fn shape(&mut self) -> Result<ShapeKind, WorldError> {
        let kind = self.next()?;
        match kind {
            "box" => Ok(ShapeKind::Box { size: self.vec3()? }),
            "openbox" => {
                let size = self.vec3()?;
                self.expect("wall")?;
                let wall = self.number()?;
                self.expect("open")?;
                let face = self.next()?;
                let open = Face::parse(face).ok_or_else(|| self.err(format!("bad face '{face}'")))?;
                Ok(ShapeKind::OpenBox { size, wall, open })
            }
            "cylinder" => Ok(ShapeKind::Cylinder { radius: self.number()?, height: self.number()? }),
            "sphere" => Ok(ShapeKind::Sphere { radius: self.number()? }),
            other => Err(self.err(format!("unknown shape '{other}'"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

/// Parses scene text into a world state.
pub fn parse_scene(text: &str) -> Result<WorldState, WorldError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "scene v1" => {}
        _ => {
            return Err(WorldError::SceneParse {
                line: 1,
                message: "expected header 'scene v1'".to_string(),
            })
        }
    }
    let mut table_height = 1.05;
    let mut workspace: Option<Aabb3> = None;
    let mut gripper: Option<GripperState> = None;
    let mut cameras: Vec<Camera> = Vec::new();
    let mut objects: Vec<SceneObject> = Vec::new();
    let mut current: Option<SceneObject> = None;
    for (i, raw) in lines {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut c = Cursor::new(line.split_whitespace().collect(), lineno);
        match c.next()? {
            "table_height" => table_height = c.number()?,
            "workspace" => {
                let min = c.vec3()?;
                let max = c.vec3()?;
                workspace = Some(Aabb3::new(min, max));
            }
            "gripper" => {
                c.expect("pose")?;
                let pose = c.pose()?;
                c.expect("open")?;
                let open_fraction = c.number()?;
                gripper = Some(GripperState { pose, open_fraction, attached: None });
            }
            "camera" => {
                let name = c.next()?.to_string();
                let width = c.usize()?;
                let height = c.usize()?;
                let fx = c.number()?;
                let fy = c.number()?;
                let cx = c.number()?;
                let cy = c.number()?;
                c.expect("pose")?;
                let camera_to_world = c.pose()?;
                cameras.push(Camera {
                    name,
                    width,
                    height,
                    intrinsics: Intrinsics { fx, fy, cx, cy },
                    camera_to_world,
                });
            }
            "object" => {
                if current.is_some() {
                    return Err(c.err("nested object block"));
                }
                let name = c.next()?.to_string();
                c.expect("label")?;
                let label = c.next()?.to_string();
                c.expect("category")?;
                let cat = c.next()?;
                let category =
                    Category::parse(cat).ok_or_else(|| c.err(format!("bad category '{cat}'")))?;
                c.expect("graspable")?;
                let graspable = c.usize()? != 0;
                c.expect("pose")?;
                let pose = c.pose()?;
                current = Some(SceneObject {
                    name,
                    label,
                    category,
                    pose,
                    parts: Vec::new(),
                    joints: Vec::new(),
                    graspable,
                });
            }
            "part" => {
                let obj = current.as_mut().ok_or_else(|| c.err("part outside object"))?;
                let name = c.next()?.to_string();
                let shape = c.shape()?;
                c.expect("bind")?;
                let binding = match c.next()? {
                    "base" => PartBinding::Base,
                    "joint" => PartBinding::Joint(c.usize()?),
                    other => return Err(c.err(format!("bad binding '{other}'"))),
                };
                c.expect("pose")?;
                let local_pose = c.pose()?;
                obj.parts.push(Part { name, shape, local_pose, binding });
            }
            "joint" => {
                let obj = current.as_mut().ok_or_else(|| c.err("joint outside object"))?;
                let kind = c.next()?;
                let joint_type = JointType::parse(kind)
                    .ok_or_else(|| c.err(format!("bad joint type '{kind}'")))?;
                c.expect("axis")?;
                let axis = c.vec3()?;
                c.expect("position")?;
                let position = c.vec3()?;
                c.expect("limits")?;
                let lo = c.number()?;
                let hi = c.number()?;
                c.expect("value")?;
                let value = c.number()?;
                obj.joints.push(Joint { joint_type, axis, position, limits: (lo, hi), value });
            }
            "end" => {
                let obj = current.take().ok_or_else(|| c.err("end outside object"))?;
                if obj.parts.is_empty() {
                    return Err(c.err(format!("object '{}' has no parts", obj.name)));
                }
                for p in &obj.parts {
                    if let PartBinding::Joint(j) = p.binding {
                        if j >= obj.joints.len() {
                            return Err(c.err(format!(
                                "part '{}' binds to missing joint {j}",
                                p.name
                            )));
                        }
                    }
                }
                objects.push(obj);
            }
            other => return Err(c.err(format!("unknown directive '{other}'"))),
        }
        if !c.done() && !matches!(line.chars().next(), Some('#')) {
            return Err(c.err("trailing tokens"));
        }
    }
    if current.is_some() {
        return Err(WorldError::SceneParse { line: 0, message: "unterminated object".into() });
    }
    let workspace = workspace.ok_or(WorldError::SceneParse {
        line: 0,
        message: "missing workspace".into(),
    })?;
    let gripper = gripper.unwrap_or(GripperState {
        pose: Pose::from_position(Vec3::new(-0.35, 0.0, table_height + 0.5)),
        open_fraction: 1.0,
        attached: None,
    });
    // Unique object names.
    for (i, a) in objects.iter().enumerate() {
        for b in objects.iter().skip(i + 1) {
            if a.name == b.name {
                return Err(WorldError::SceneParse {
                    line: 0,
                    message: format!("duplicate object name '{}'", a.name),
                });
            }
        }
    }
    Ok(WorldState { objects, gripper, table_height, workspace, cameras })
}
