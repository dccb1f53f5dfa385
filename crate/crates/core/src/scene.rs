//! 2D disk-object scenes and timestamped trajectories.
//!
//! A scene is a finite map from identifiers to disks; regions are ordinary
//! disks whose identifiers carry the `reg_` prefix. A trajectory is a
//! non-empty sequence of scenes over a rigid universe: the identifier set must
//! be identical in every frame.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::formula::{Ident, IdentKind};

/// Tolerance for the unit-norm check on headings.
pub const HEADING_UNIT_TOL: f64 = 1e-9;

/// A disk with optional unit heading.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskObject {
    pub id: Ident,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub heading: Option<(f64, f64)>,
}

impl DiskObject {
    pub fn new(id: Ident, x: f64, y: f64, radius: f64) -> Self {
        DiskObject {
            id,
            x,
            y,
            radius,
            heading: None,
        }
    }

    pub fn with_heading(mut self, ux: f64, uy: f64) -> Self {
        self.heading = Some((ux, uy));
        self
    }

    fn check(&self) -> Result<(), TrajectoryError> {
        if self.radius.is_nan() || self.radius <= 0.0 {
            return Err(TrajectoryError::Invariant(format!(
                "object `{}` has non-positive radius {}",
                self.id, self.radius
            )));
        }
        if let Some((ux, uy)) = self.heading {
            let norm = (ux * ux + uy * uy).sqrt();
            if (norm - 1.0).abs() > HEADING_UNIT_TOL {
                return Err(TrajectoryError::Invariant(format!(
                    "object `{}` heading ({ux}, {uy}) has norm {norm}, not unit",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// All object poses at one time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneState {
    objects: BTreeMap<String, DiskObject>,
}

impl SceneState {
    pub fn new() -> Self {
        SceneState::default()
    }

    /// Inserts an object; replaces any previous object with the same id.
    pub fn insert(&mut self, obj: DiskObject) {
        self.objects.insert(obj.id.name().to_string(), obj);
    }

    pub fn get(&self, id: &Ident) -> Option<&DiskObject> {
        self.objects.get(id.name())
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(|s| s.as_str())
    }

    pub fn objects(&self) -> impl Iterator<Item = &DiskObject> {
        self.objects.values()
    }
}

/// A non-empty sequence of scenes with a fixed identifier universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<SceneState>,
    step_seconds: f64,
}

impl Trajectory {
    /// Builds a trajectory, enforcing the non-empty and rigid-universe rules.
    pub fn new(states: Vec<SceneState>, step_seconds: f64) -> Result<Self, TrajectoryError> {
        if states.is_empty() {
            return Err(TrajectoryError::Invariant("trajectory has no frames".into()));
        }
        if step_seconds.is_nan() || step_seconds <= 0.0 {
            return Err(TrajectoryError::Invariant(format!(
                "step_seconds must be positive, got {step_seconds}"
            )));
        }
        let universe: Vec<&str> = states[0].ids().collect();
        for (t, state) in states.iter().enumerate() {
            let ids: Vec<&str> = state.ids().collect();
            if ids != universe {
                return Err(TrajectoryError::Invariant(format!(
                    "frame {t} has object ids {ids:?}, frame 0 has {universe:?}"
                )));
            }
            for obj in state.objects() {
                obj.check()?;
            }
        }
        Ok(Trajectory { states, step_seconds })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, t: usize) -> Option<&SceneState> {
        self.states.get(t)
    }

    pub fn states(&self) -> &[SceneState] {
        &self.states
    }

    pub fn step_seconds(&self) -> f64 {
        self.step_seconds
    }
}

/// Errors from loading or constructing trajectories.
#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// The input is not syntactically valid JSON.
    #[error("parse error: {0}")]
    Parse(String),
    /// The JSON is well-formed but does not match the trajectory schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// A type invariant is violated (radius, heading norm, rigid universe).
    #[error("invariant error: {0}")]
    Invariant(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryFile {
    step_seconds: f64,
    frames: Vec<FrameFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameFile {
    t: usize,
    objects: Vec<ObjectFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectFile {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    x: f64,
    y: f64,
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    heading: Option<(f64, f64)>,
}

/// Loads and validates a trajectory from the documented JSON format.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory, TrajectoryError> {
    let text = std::fs::read_to_string(path)?;
    parse_trajectory_json(&text)
}

/// Same as [`load_trajectory`] for an open reader.
pub fn read_trajectory(mut reader: impl Read) -> Result<Trajectory, TrajectoryError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_trajectory_json(&text)
}

/// Parses the trajectory JSON format from a string.
pub fn parse_trajectory_json(text: &str) -> Result<Trajectory, TrajectoryError> {
    let file: TrajectoryFile = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            TrajectoryError::Parse(e.to_string())
        } else {
            TrajectoryError::Schema(e.to_string())
        }
    })?;

    let mut states = Vec::with_capacity(file.frames.len());
    for (idx, frame) in file.frames.into_iter().enumerate() {
        if frame.t != idx {
            return Err(TrajectoryError::Schema(format!(
                "frame {idx} declares t={}, frames must be in order starting at 0",
                frame.t
            )));
        }
        let mut state = SceneState::new();
        for obj in frame.objects {
            let id = Ident::new(obj.id.clone())
                .map_err(|e| TrajectoryError::Schema(format!("frame {idx}: {e}")))?;
            if let Some(kind) = &obj.kind {
                let declared = match kind.as_str() {
                    "object" => IdentKind::Object,
                    "region" => IdentKind::Region,
                    other => {
                        return Err(TrajectoryError::Schema(format!(
                            "frame {idx}: unknown kind `{other}` for `{}`",
                            obj.id
                        )))
                    }
                };
                if declared != id.kind() {
                    return Err(TrajectoryError::Schema(format!(
                        "frame {idx}: id `{}` prefix contradicts declared kind `{kind}`",
                        obj.id
                    )));
                }
            }
            if state.get(&id).is_some() {
                return Err(TrajectoryError::Schema(format!(
                    "frame {idx}: duplicate object id `{}`",
                    obj.id
                )));
            }
            let mut disk = DiskObject::new(id, obj.x, obj.y, obj.r);
            disk.heading = obj.heading;
            state.insert(disk);
        }
        states.push(state);
    }
    Trajectory::new(states, file.step_seconds)
}

/// Serializes a trajectory back to the documented JSON format.
pub fn trajectory_to_json(traj: &Trajectory) -> String {
    let file = TrajectoryFile {
        step_seconds: traj.step_seconds(),
        frames: traj
            .states()
            .iter()
            .enumerate()
            .map(|(t, state)| FrameFile {
                t,
                objects: state
                    .objects()
                    .map(|o| ObjectFile {
                        id: o.id.name().to_string(),
                        kind: Some(match o.id.kind() {
                            IdentKind::Object => "object".to_string(),
                            IdentKind::Region => "region".to_string(),
                        }),
                        x: o.x,
                        y: o.y,
                        r: o.radius,
                        heading: o.heading,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("trajectory serialization cannot fail")
}
