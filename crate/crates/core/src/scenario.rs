//! Scripted headless runs over an in-process [`LocalSpace`].
//!
//! A script names a world, a list of steps (pointer traces, waits and
//! assertions) and a tick budget. Runs are deterministic: the same script
//! and seed produce identical [`RunMetrics`]. See `docs/scenario-format.md`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::PointerSample;
use crate::interaction::Mode;
use crate::latency::{LatencyChannel, LatencyConfig};
use crate::space::{HelloOutcome, LocalSpace, SpaceConfig};
use crate::trace::{load_trace, TraceFileError};
use crate::view::SceneFrame;
use crate::wire::{Body, Hello, Role, WireMessage};
use crate::world::{Actuation, Command, RobotStart, WorldError, WorldFile, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Trace {
        file: PathBuf,
    },
    Wait {
        ms: u64,
    },
    AssertPose {
        x_mm: Option<f64>,
        y_mm: Option<f64>,
        heading_deg: Option<f64>,
        #[serde(default = "default_tol_mm")]
        tol_mm: f64,
        #[serde(default = "default_tol_deg")]
        tol_deg: f64,
    },
    AssertObject {
        id: String,
        field: ObjectField,
        value: f64,
        #[serde(default)]
        tol: f64,
    },
    AssertCollisions {
        count: u64,
    },
    AssertMode {
        mode: Mode,
    },
    AssertLocked {
        id: Option<String>,
    },
}

fn default_tol_mm() -> f64 {
    1.0
}

fn default_tol_deg() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectField {
    Openness,
    /// Light state as 0 or 1.
    On,
    XMm,
    YMm,
    /// Robot-to-wheelchair centre distance.
    RobotGapMm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    pub world: PathBuf,
    pub seed: Option<u64>,
    pub timeout_ticks: u64,
    pub latency: Option<LatencyConfig>,
    /// Overrides the robot start pose of the world file.
    pub start: Option<RobotStart>,
    #[serde(default, rename = "step")]
    pub steps: Vec<Step>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub step: usize,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub completion_ticks: u64,
    pub commands_issued: u64,
    pub collision_count: u64,
    pub success: bool,
    pub assertions: Vec<AssertionResult>,
}

impl RunMetrics {
    pub fn failures(&self) -> impl Iterator<Item = &AssertionResult> {
        self.assertions.iter().filter(|a| !a.passed)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("trace {path}: {source}")]
    Trace {
        path: String,
        #[source]
        source: TraceFileError,
    },
    #[error("server refused the session: {0}")]
    Refused(String),
}

impl ScenarioScript {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ScenarioError> {
        let mut s: ScenarioScript =
            toml::from_str(text).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        s.base_dir = base_dir.to_path_buf();
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// A script that replays one trace with no assertions.
    pub fn replay(world: PathBuf, trace: PathBuf) -> Self {
        Self {
            world,
            seed: None,
            timeout_ticks: u64::MAX,
            latency: None,
            start: None,
            steps: vec![Step::Trace { file: trace }],
            base_dir: PathBuf::new(),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// A fully loaded script: world built and traces read, nothing simulated.
pub struct Prepared {
    pub script: ScenarioScript,
    pub world: WorldState,
    traces: Vec<Vec<PointerSample>>,
}

pub fn prepare(script: &ScenarioScript) -> Result<Prepared, ScenarioError> {
    let mut world = WorldFile::load(&script.resolve(&script.world))?.build()?;
    if let Some(seed) = script.seed {
        world.rng_seed = seed;
    }
    if let Some(start) = script.start {
        world.robot = start.to_state();
        world.cup_contacts.clear();
    }
    let mut traces = Vec::new();
    for step in &script.steps {
        match step {
            Step::Trace { file } => {
                let path = script.resolve(file);
                let t = load_trace(&path).map_err(|source| ScenarioError::Trace {
                    path: path.display().to_string(),
                    source,
                })?;
                traces.push(t);
            }
            Step::AssertObject { id, .. } | Step::AssertLocked { id: Some(id) } => {
                if world.object(id).is_none() {
                    return Err(ScenarioError::Invalid(format!(
                        "assertion references unknown object `{id}`"
                    )));
                }
            }
            _ => {}
        }
    }
    Ok(Prepared {
        script: script.clone(),
        world,
        traces,
    })
}

pub fn run_scenario(script: &ScenarioScript) -> Result<RunMetrics, ScenarioError> {
    run_prepared(prepare(script)?, SpaceConfig::default())
}

pub fn run_prepared(prepared: Prepared, config: SpaceConfig) -> Result<RunMetrics, ScenarioError> {
    Ok(execute(prepared, config)?.0)
}

/// Like [`run_prepared`], also returning every applied command in order.
pub fn run_prepared_with_log(
    prepared: Prepared,
    config: SpaceConfig,
) -> Result<(RunMetrics, Vec<Command>), ScenarioError> {
    let (metrics, space, _) = execute(prepared, config)?;
    let log = space.stats().command_log.iter().map(|(_, c)| c.clone()).collect();
    Ok((metrics, log))
}

/// Runs the script and returns the last frame its session received.
pub fn final_frame(prepared: Prepared, config: SpaceConfig) -> Result<Option<SceneFrame>, ScenarioError> {
    let (_, space, session) = execute(prepared, config)?;
    Ok(space.last_frame(&session).cloned())
}

fn execute(
    prepared: Prepared,
    config: SpaceConfig,
) -> Result<(RunMetrics, LocalSpace, String), ScenarioError> {
    let Prepared {
        script,
        world,
        traces,
    } = prepared;
    let mut space = LocalSpace::new(world, config);
    let hello = WireMessage::new(
        "",
        1,
        Body::Hello(Hello {
            role: Role::Control,
            client: "scenario".into(),
        }),
    );
    let session = match space.hello(0, &hello) {
        HelloOutcome::Accepted { session_id, .. } => session_id,
        HelloOutcome::Rejected(m) => return Err(ScenarioError::Refused(format!("{:?}", m.body))),
    };
    let mut up = LatencyChannel::new(script.latency.unwrap_or_default());
    let mut seq = 1;
    let mut now = 0u64;
    let mut traces = traces.into_iter();
    let mut assertions = Vec::new();

    for (index, step) in script.steps.iter().enumerate() {
        match step {
            Step::Trace { .. } => {
                let trace = traces.next().expect("one trace per trace step");
                let base = now;
                for sample in trace {
                    seq += 1;
                    let mut s = sample;
                    s.t_ms += base;
                    let msg = WireMessage::new(session.clone(), seq, Body::Pointer(s));
                    up.send(s.t_ms, msg);
                    now = now.max(s.t_ms);
                }
                while let Some((at, msg)) = up.pop_next() {
                    space.receive(at, &msg);
                    now = now.max(at);
                }
            }
            Step::Wait { ms } => {
                now += ms;
                space.advance_to(now);
            }
            _ => {
                let state = space.session_state(&session).expect("session open");
                assertions.push(check(
                    index,
                    step,
                    space.world(),
                    state.mode,
                    &state.locked_object,
                ));
            }
        }
    }
    space.advance_to(now);
    let interval = config.frame_interval_ms.max(1);
    let completion_ticks = now.div_ceil(interval);
    if completion_ticks > script.timeout_ticks {
        assertions.push(AssertionResult {
            step: script.steps.len(),
            description: "timeout".into(),
            passed: false,
            detail: format!("{completion_ticks} ticks > budget {}", script.timeout_ticks),
        });
    }
    let metrics = RunMetrics {
        completion_ticks,
        commands_issued: space.stats().commands_applied,
        collision_count: space.world().collision_count,
        success: assertions.iter().all(|a| a.passed),
        assertions,
    };
    Ok((metrics, space, session))
}

fn check(
    index: usize,
    step: &Step,
    world: &WorldState,
    mode: Mode,
    locked: &Option<String>,
) -> AssertionResult {
    let (description, passed, detail) = match step {
        Step::AssertPose {
            x_mm,
            y_mm,
            heading_deg,
            tol_mm,
            tol_deg,
        } => {
            let r = &world.robot;
            let mut ok = true;
            if let Some(x) = x_mm {
                ok &= (r.x_mm - x).abs() <= *tol_mm;
            }
            if let Some(y) = y_mm {
                ok &= (r.y_mm - y).abs() <= *tol_mm;
            }
            if let Some(h) = heading_deg {
                let d = (r.heading_deg - h + 540.0).rem_euclid(360.0) - 180.0;
                ok &= d.abs() <= *tol_deg;
            }
            let want = |v: &Option<f64>| v.map_or("*".to_string(), |v| v.to_string());
            (
                format!(
                    "pose ({}, {}) heading {}",
                    want(x_mm),
                    want(y_mm),
                    want(heading_deg)
                ),
                ok,
                format!(
                    "robot at ({:.3}, {:.3}) heading {:.3}",
                    r.x_mm, r.y_mm, r.heading_deg
                ),
            )
        }
        Step::AssertObject {
            id,
            field,
            value,
            tol,
        } => {
            let actual = object_field(world, id, *field);
            let ok = actual.is_some_and(|a| (a - value).abs() <= *tol);
            (
                format!("{id}.{field:?} = {value} ± {tol}"),
                ok,
                actual.map_or("object missing".into(), |a| format!("actual {a}")),
            )
        }
        Step::AssertCollisions { count } => (
            format!("collisions = {count}"),
            world.collision_count == *count,
            format!("actual {}", world.collision_count),
        ),
        Step::AssertMode { mode: want } => (
            format!("mode = {want:?}"),
            mode == *want,
            format!("actual {mode:?}"),
        ),
        Step::AssertLocked { id } => (
            format!("locked = {}", id.as_deref().unwrap_or("none")),
            locked == id,
            format!("actual {}", locked.as_deref().unwrap_or("none")),
        ),
        Step::Trace { .. } | Step::Wait { .. } => unreachable!("not an assertion"),
    };
    AssertionResult {
        step: index,
        description,
        passed,
        detail,
    }
}

fn object_field(world: &WorldState, id: &str, field: ObjectField) -> Option<f64> {
    let obj = world.object(id)?;
    match (field, &obj.actuation) {
        (ObjectField::Openness, a) => a.openness(),
        (ObjectField::On, Actuation::Light { on }) => Some(if *on { 1.0 } else { 0.0 }),
        (ObjectField::XMm, Actuation::Wheelchair { x_mm, .. }) => Some(*x_mm),
        (ObjectField::YMm, Actuation::Wheelchair { y_mm, .. }) => Some(*y_mm),
        (ObjectField::XMm, _) => Some(crate::geometry::vertex_mean(&obj.footprint).x),
        (ObjectField::YMm, _) => Some(crate::geometry::vertex_mean(&obj.footprint).y),
        (ObjectField::RobotGapMm, _) => world.robot_gap_mm(id),
        _ => None,
    }
}
