//! Object-centric manipulation units and task success specifications,
//! with a line-oriented versioned text format.

use crate::geom::Vec3;
use crate::grasp::GraspPreference;

use super::WorldError;

/// One object-centric subtask: the object, an instruction tag, and the
/// grasp preference to use when touching it.
#[derive(Debug, Clone)]
pub struct ManipulationUnit {
    pub object_name: String,
    /// Instruction tag such as "pick", "open", "close",
    /// "place-into:<receptacle>" or "place-onto:<receptacle>".
    pub instruction: String,
    pub preference: GraspPreference,
}

/// One success predicate evaluated against the final world state.
#[derive(Debug, Clone, PartialEq)]
pub enum SuccessCheck {
    /// Object rests on the receptacle with its center over the footprint.
    PlaceOnto { object: String, receptacle: String },
    /// Object center within `tol` of a target point.
    PlaceNear { object: String, target: Vec3, tol: f64 },
    /// Joint value at or above 70% of its range.
    JointOpen { object: String, joint: usize },
    /// Joint value at or below 10% of its range.
    JointClosed { object: String, joint: usize },
    /// Object center inside a container interior (optionally one part).
    PlaceIn { object: String, receptacle: String, part: Option<String> },
}

/// A named task: its manipulation units plus the success conjunction.
#[derive(Debug, Clone)]
pub struct TaskDescriptor {
    pub name: String,
    pub units: Vec<ManipulationUnit>,
    pub checks: Vec<SuccessCheck>,
}

fn fmt_vec(v: Vec3) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

fn pref_to_text(p: &GraspPreference) -> String {
    let mut out = String::new();
    if let Some(v) = p.preferred_position {
        out.push_str(&format!(" position {}", fmt_vec(v)));
    }
    if let Some(v) = p.preferred_approach_direction {
        out.push_str(&format!(" approach {}", fmt_vec(v)));
    }
    if let Some(v) = p.preferred_plane_normal {
        out.push_str(&format!(" normal {}", fmt_vec(v)));
    }
    out
}

/// Serializes tasks to the versioned text format.
pub fn tasks_to_text(tasks: &[TaskDescriptor]) -> String {
    let mut out = String::from("tasks v1\n");
    for t in tasks {
        out.push_str(&format!("task {}\n", t.name));
        for u in &t.units {
            out.push_str(&format!(
                "unit {} {}{}\n",
                u.object_name,
                u.instruction,
                pref_to_text(&u.preference)
            ));
        }
        for c in &t.checks {
            match c {
                SuccessCheck::PlaceOnto { object, receptacle } => {
                    out.push_str(&format!("success place-onto {object} {receptacle}\n"));
                }
                SuccessCheck::PlaceNear { object, target, tol } => {
                    out.push_str(&format!(
                        "success place-near {object} {} {tol}\n",
                        fmt_vec(*target)
                    ));
                }
                SuccessCheck::JointOpen { object, joint } => {
                    out.push_str(&format!("success open {object} {joint}\n"));
                }
                SuccessCheck::JointClosed { object, joint } => {
                    out.push_str(&format!("success close {object} {joint}\n"));
                }
                SuccessCheck::PlaceIn { object, receptacle, part } => match part {
                    Some(p) => {
                        out.push_str(&format!("success place-in {object} {receptacle} {p}\n"))
                    }
                    None => out.push_str(&format!("success place-in {object} {receptacle}\n")),
                },
            }
        }
        out.push_str("end\n");
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> WorldError {
    WorldError::SceneParse { line, message: message.into() }
}

fn parse_pref(tokens: &[&str], line: usize) -> Result<GraspPreference, WorldError> {
    let mut pref = GraspPreference::default();
    let mut i = 0;
    while i < tokens.len() {
        let take3 = |i: usize| -> Result<Vec3, WorldError> {
            if i + 3 >= tokens.len() + 0 && tokens.len() < i + 4 {
                return Err(parse_err(line, "preference needs 3 numbers"));
            }
            let nums: Result<Vec<f64>, _> =
                tokens[i + 1..i + 4].iter().map(|s| s.parse::<f64>()).collect();
            let nums = nums.map_err(|_| parse_err(line, "bad preference number"))?;
            Ok(Vec3::new(nums[0], nums[1], nums[2]))
        };
        match tokens[i] {
            "position" => {
                pref.preferred_position = Some(take3(i)?);
                i += 4;
            }
            "approach" => {
                pref.preferred_approach_direction = Some(take3(i)?);
                i += 4;
            }
            "normal" => {
                pref.preferred_plane_normal = Some(take3(i)?);
                i += 4;
            }
            other => return Err(parse_err(line, format!("unknown preference '{other}'"))),
        }
    }
    Ok(pref)
}

/// Parses the versioned task text format.
pub fn parse_tasks(text: &str) -> Result<Vec<TaskDescriptor>, WorldError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "tasks v1" => {}
        _ => return Err(parse_err(1, "expected header 'tasks v1'")),
    }
    let mut tasks = Vec::new();
    let mut current: Option<TaskDescriptor> = None;
    for (i, raw) in lines {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "task" => {
                if current.is_some() {
                    return Err(parse_err(lineno, "nested task block"));
                }
                if tokens.len() != 2 {
                    return Err(parse_err(lineno, "task needs a name"));
                }
                current = Some(TaskDescriptor {
                    name: tokens[1].to_string(),
                    units: Vec::new(),
                    checks: Vec::new(),
                });
            }
            "unit" => {
                let t = current.as_mut().ok_or_else(|| parse_err(lineno, "unit outside task"))?;
                if tokens.len() < 3 {
                    return Err(parse_err(lineno, "unit needs object and instruction"));
                }
                t.units.push(ManipulationUnit {
                    object_name: tokens[1].to_string(),
                    instruction: tokens[2].to_string(),
                    preference: parse_pref(&tokens[3..], lineno)?,
                });
            }
            "success" => {
                let t = current
                    .as_mut()
                    .ok_or_else(|| parse_err(lineno, "success outside task"))?;
                if tokens.len() < 2 {
                    return Err(parse_err(lineno, "success needs a kind"));
                }
                let check = match tokens[1] {
                    "place-onto" if tokens.len() == 4 => SuccessCheck::PlaceOnto {
                        object: tokens[2].to_string(),
                        receptacle: tokens[3].to_string(),
                    },
                    "place-near" if tokens.len() == 7 => {
                        let nums: Result<Vec<f64>, _> =
                            tokens[3..7].iter().map(|s| s.parse::<f64>()).collect();
                        let nums = nums.map_err(|_| parse_err(lineno, "bad number"))?;
                        SuccessCheck::PlaceNear {
                            object: tokens[2].to_string(),
                            target: Vec3::new(nums[0], nums[1], nums[2]),
                            tol: nums[3],
                        }
                    }
                    "open" if tokens.len() == 4 => SuccessCheck::JointOpen {
                        object: tokens[2].to_string(),
                        joint: tokens[3].parse().map_err(|_| parse_err(lineno, "bad joint"))?,
                    },
                    "close" if tokens.len() == 4 => SuccessCheck::JointClosed {
                        object: tokens[2].to_string(),
                        joint: tokens[3].parse().map_err(|_| parse_err(lineno, "bad joint"))?,
                    },
                    "place-in" if tokens.len() == 4 || tokens.len() == 5 => SuccessCheck::PlaceIn {
                        object: tokens[2].to_string(),
                        receptacle: tokens[3].to_string(),
                        part: tokens.get(4).map(|s| s.to_string()),
                    },
                    other => {
                        return Err(parse_err(lineno, format!("unknown success kind '{other}'")))
                    }
                };
                t.checks.push(check);
            }
            "end" => {
                let t = current.take().ok_or_else(|| parse_err(lineno, "end outside task"))?;
                tasks.push(t);
            }
            other => return Err(parse_err(lineno, format!("unknown directive '{other}'"))),
        }
    }
    if current.is_some() {
        return Err(parse_err(0, "unterminated task block"));
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_text_round_trip() {
        let tasks = vec![TaskDescriptor {
            name: "open_then_fill".into(),
            units: vec![
                ManipulationUnit {
                    object_name: "cabinet".into(),
                    instruction: "open".into(),
                    preference: GraspPreference {
                        preferred_approach_direction: Some(Vec3::X),
                        ..Default::default()
                    },
                },
                ManipulationUnit {
                    object_name: "apple".into(),
                    instruction: "place-into:cabinet.drawer_0".into(),
                    preference: GraspPreference::default(),
                },
            ],
            checks: vec![
                SuccessCheck::JointOpen { object: "cabinet".into(), joint: 0 },
                SuccessCheck::PlaceIn {
                    object: "apple".into(),
                    receptacle: "cabinet".into(),
                    part: Some("drawer_0".into()),
                },
            ],
        }];
        let text = tasks_to_text(&tasks);
        let back = parse_tasks(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].name, "open_then_fill");
        assert_eq!(back[0].units.len(), 2);
        assert_eq!(back[0].checks, tasks[0].checks);
        assert_eq!(tasks_to_text(&back), text);
    }

    #[test]
    fn unknown_success_kind_is_invalid() {
        let text = "tasks v1\ntask t\nsuccess teleport apple\nend\n";
        assert!(parse_tasks(text).is_err());
    }
}
