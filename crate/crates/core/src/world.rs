//! Deterministic simulation of the local space.
//!
//! The robot is a disc moving in the ground plane. Every command is one
//! bounded quantum of change; continuous processes (door and curtain slew,
//! wheelchair following) advance only in [`WorldState::tick`].

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_in_polygon, point_segment_distance, Point};

pub type ObjectId = String;

/// Quanta and rates of the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub step_mm: f64,
    pub turn_step_deg: f64,
    pub post_step_mm: f64,
    pub pan_step_deg: f64,
    pub zoom_step: f64,
    /// Openness change per second for doors and curtains.
    pub slew_per_s: f64,
    pub follow_gap_mm: f64,
    pub follow_speed_mm_s: f64,
    pub push_step_mm: f64,
    pub robot_radius_mm: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            step_mm: 100.0,
            turn_step_deg: 15.0,
            post_step_mm: 50.0,
            pan_step_deg: 10.0,
            zoom_step: 1.25,
            slew_per_s: 0.25,
            follow_gap_mm: 600.0,
            follow_speed_mm_s: 100.0,
            push_step_mm: 100.0,
            robot_radius_mm: 250.0,
        }
    }
}

pub const POST_RANGE_MM: (f64, f64) = (1200.0, 1750.0);
pub const PAN_RANGE_DEG: (f64, f64) = (-90.0, 90.0);
pub const TILT_RANGE_DEG: (f64, f64) = (-30.0, 30.0);
pub const ZOOM_RANGE: (f64, f64) = (1.0, 4.0);

/// Contact tolerance in mm.
const CONTACT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x_mm: f64,
    pub y_mm: f64,
    pub heading_deg: f64,
    pub post_height_mm: f64,
    pub pan_deg: f64,
    pub tilt_deg: f64,
    pub zoom_factor: f64,
}

impl Default for RobotState {
    fn default() -> Self {
        Self {
            x_mm: 0.0,
            y_mm: 0.0,
            heading_deg: 0.0,
            post_height_mm: POST_RANGE_MM.0,
            pan_deg: 0.0,
            tilt_deg: 0.0,
            zoom_factor: 1.0,
        }
    }
}

impl RobotState {
    pub fn position(&self) -> Point {
        Point::new(self.x_mm, self.y_mm)
    }

    pub fn forward(&self) -> Point {
        let h = self.heading_deg.to_radians();
        Point::new(h.cos(), h.sin())
    }

    /// Clamps every ranged quantity into its legal interval.
    pub fn clamp(&mut self) {
        self.post_height_mm = self.post_height_mm.clamp(POST_RANGE_MM.0, POST_RANGE_MM.1);
        self.pan_deg = self.pan_deg.clamp(PAN_RANGE_DEG.0, PAN_RANGE_DEG.1);
        self.tilt_deg = self.tilt_deg.clamp(TILT_RANGE_DEG.0, TILT_RANGE_DEG.1);
        self.zoom_factor = self.zoom_factor.clamp(ZOOM_RANGE.0, ZOOM_RANGE.1);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectClass {
    PasswordDoor,
    Curtain,
    LightingTree,
    Wheelchair,
    PlainObstacle,
}

impl ObjectClass {
    pub fn command_set(self) -> Vec<Verb> {
        match self {
            ObjectClass::PasswordDoor => vec![Verb::PressButton],
            ObjectClass::Curtain => vec![Verb::DragSlide],
            ObjectClass::LightingTree => vec![Verb::Toggle],
            ObjectClass::Wheelchair => vec![Verb::PushStep],
            ObjectClass::PlainObstacle => Vec::new(),
        }
    }

    pub fn style(self) -> &'static str {
        match self {
            ObjectClass::PasswordDoor => "door",
            ObjectClass::Curtain => "curtain",
            ObjectClass::LightingTree => "light",
            ObjectClass::Wheelchair => "wheelchair",
            ObjectClass::PlainObstacle => "obstacle",
        }
    }
}

/// Class-specific actuation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state")]
pub enum Actuation {
    Door {
        openness: f64,
        target: f64,
        entered: String,
        password: String,
    },
    Curtain {
        openness: f64,
        target: f64,
    },
    Light {
        on: bool,
    },
    Wheelchair {
        x_mm: f64,
        y_mm: f64,
        heading_deg: f64,
        speed_mm_s: f64,
    },
    Inert,
}

impl Actuation {
    pub fn openness(&self) -> Option<f64> {
        match self {
            Actuation::Door { openness, .. } | Actuation::Curtain { openness, .. } => Some(*openness),
            _ => None,
        }
    }
}

/// Password keypad mounted beside a door: 3 columns by 4 rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub x_mm: f64,
    pub y_mm: f64,
    /// Height of the panel centre.
    pub z_mm: f64,
    /// Direction the panel face points to (towards the viewer).
    pub facing_deg: f64,
    pub button_mm: f64,
    pub gap_mm: f64,
}

/// Keypad labels, row-major from the top-left.
pub const KEYPAD: [[&str; 3]; 4] = [
    ["button_1", "button_2", "button_3"],
    ["button_4", "button_5", "button_6"],
    ["button_7", "button_8", "button_9"],
    ["clear", "button_0", "enter"],
];

impl PanelSpec {
    /// Each button as (part id, 3D corner quad in world mm).
    pub fn buttons(&self) -> Vec<(String, [[f64; 3]; 4])> {
        let f = self.facing_deg.to_radians();
        // Viewer's right when looking at the face.
        let (rx, ry) = (-f.sin(), f.cos());
        let pitch = self.button_mm + self.gap_mm;
        let half = self.button_mm / 2.0;
        let mut out = Vec::with_capacity(12);
        for (row, labels) in KEYPAD.iter().enumerate() {
            for (col, label) in labels.iter().enumerate() {
                let along = (col as f64 - 1.0) * pitch;
                let up = (1.5 - row as f64) * pitch;
                let cx = self.x_mm + rx * along;
                let cy = self.y_mm + ry * along;
                let cz = self.z_mm + up;
                let corner = |s: f64, t: f64| [cx + rx * s, cy + ry * s, cz + t];
                out.push((
                    label.to_string(),
                    [
                        corner(-half, half),
                        corner(half, half),
                        corner(half, -half),
                        corner(-half, -half),
                    ],
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleObjectRecord {
    pub id: ObjectId,
    pub name: String,
    pub class: ObjectClass,
    /// Convex ground footprint, world mm.
    pub footprint: Vec<Point>,
    pub height_mm: f64,
    /// Simulated 2D-barcode location.
    pub tag_anchor: Point,
    pub tag_height_mm: f64,
    pub command_set: Vec<Verb>,
    pub actuation: Actuation,
    pub panel: Option<PanelSpec>,
}

impl TeleObjectRecord {
    /// Whether the footprint currently stops the robot.
    pub fn blocks(&self) -> bool {
        match &self.actuation {
            Actuation::Door { openness, .. } => *openness < 1.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cup {
    pub x_mm: f64,
    pub y_mm: f64,
    pub radius_mm: f64,
}

impl Cup {
    pub fn center(&self) -> Point {
        Point::new(self.x_mm, self.y_mm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verb {
    StepForward,
    StepBackward,
    StepTurnLeft,
    StepTurnRight,
    PostUp,
    PostDown,
    PanLeft,
    PanRight,
    ZoomIn,
    ZoomOut,
    PressButton,
    DragSlide,
    Toggle,
    PushStep,
}

impl Verb {
    pub const BASE: [Verb; 4] = [
        Verb::StepForward,
        Verb::StepBackward,
        Verb::StepTurnLeft,
        Verb::StepTurnRight,
    ];
    pub const HEAD: [Verb; 6] = [
        Verb::PostUp,
        Verb::PostDown,
        Verb::PanLeft,
        Verb::PanRight,
        Verb::ZoomIn,
        Verb::ZoomOut,
    ];

    pub fn is_base(self) -> bool {
        Self::BASE.contains(&self)
    }

    pub fn is_head(self) -> bool {
        Self::HEAD.contains(&self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    RobotBase,
    RobotHead,
    Object(ObjectId),
}

/// Verb-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Params {
    None,
    Button(String),
    Slide(f64),
    Push { dx: f64, dy: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub target: Target,
    pub verb: Verb,
    pub params: Params,
}

impl Command {
    pub fn robot(verb: Verb) -> Command {
        let target = if verb.is_head() {
            Target::RobotHead
        } else {
            Target::RobotBase
        };
        Command {
            target,
            verb,
            params: Params::None,
        }
    }

    pub fn object(id: impl Into<ObjectId>, verb: Verb, params: Params) -> Command {
        Command {
            target: Target::Object(id.into()),
            verb,
            params,
        }
    }

    pub fn is_robot(&self) -> bool {
        matches!(self.target, Target::RobotBase | Target::RobotHead)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("unknown object `{0}`")]
    UnknownObject(ObjectId),
    #[error("verb {verb:?} is not in the command set of {target:?}")]
    VerbNotAllowed { target: Target, verb: Verb },
    #[error("bad parameters for {verb:?}: {reason}")]
    BadParams { verb: Verb, reason: String },
    #[error("invalid world description: {0}")]
    Invalid(String),
    #[error("cannot read world file {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub name: String,
    pub robot: RobotState,
    pub objects: Vec<TeleObjectRecord>,
    pub obstacles: Vec<Cup>,
    pub collision_count: u64,
    pub sim_time_ms: u64,
    pub rng_seed: u64,
    pub params: SimParams,
    /// Wheelchair the robot is trailing, engaged by a push.
    pub follow: Option<ObjectId>,
    /// Cups currently touching the robot (for edge-triggered counting).
    pub cup_contacts: BTreeSet<usize>,
}

impl WorldState {
    pub fn empty(seed: u64) -> Self {
        Self {
            name: "empty".into(),
            robot: RobotState::default(),
            objects: Vec::new(),
            obstacles: Vec::new(),
            collision_count: 0,
            sim_time_ms: 0,
            rng_seed: seed,
            params: SimParams::default(),
            follow: None,
            cup_contacts: BTreeSet::new(),
        }
    }

    pub fn object(&self, id: &str) -> Option<&TeleObjectRecord> {
        self.objects.iter().find(|o| o.id == id)
    }

    fn object_mut(&mut self, id: &str) -> Option<&mut TeleObjectRecord> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    pub fn collisions(&self) -> u64 {
        self.collision_count
    }

    /// Applies one command. On error the world is left untouched.
    pub fn apply(&mut self, cmd: &Command) -> Result<(), WorldError> {
        self.check(cmd)?;
        let p = self.params;
        match cmd.verb {
            Verb::StepForward | Verb::StepBackward => {
                self.follow = None;
                let sign = if cmd.verb == Verb::StepForward { 1.0 } else { -1.0 };
                let dir = self.robot.forward().scale(sign);
                self.move_robot(dir, p.step_mm);
            }
            Verb::StepTurnLeft | Verb::StepTurnRight => {
                self.follow = None;
                let sign = if cmd.verb == Verb::StepTurnLeft { 1.0 } else { -1.0 };
                let r = &mut self.robot;
                r.heading_deg = (r.heading_deg + sign * p.turn_step_deg).rem_euclid(360.0);
            }
            Verb::PostUp => self.robot.post_height_mm += p.post_step_mm,
            Verb::PostDown => self.robot.post_height_mm -= p.post_step_mm,
            Verb::PanLeft => self.robot.pan_deg += p.pan_step_deg,
            Verb::PanRight => self.robot.pan_deg -= p.pan_step_deg,
            Verb::ZoomIn => self.robot.zoom_factor *= p.zoom_step,
            Verb::ZoomOut => self.robot.zoom_factor /= p.zoom_step,
            Verb::PressButton | Verb::DragSlide | Verb::Toggle | Verb::PushStep => {
                self.actuate(cmd)?;
            }
        }
        self.robot.clamp();
        Ok(())
    }

    fn check(&self, cmd: &Command) -> Result<(), WorldError> {
        let allowed = match &cmd.target {
            Target::RobotBase => cmd.verb.is_base(),
            Target::RobotHead => cmd.verb.is_head(),
            Target::Object(id) => self
                .object(id)
                .ok_or_else(|| WorldError::UnknownObject(id.clone()))?
                .command_set
                .contains(&cmd.verb),
        };
        if !allowed {
            return Err(WorldError::VerbNotAllowed {
                target: cmd.target.clone(),
                verb: cmd.verb,
            });
        }
        let bad = |reason: &str| WorldError::BadParams {
            verb: cmd.verb,
            reason: reason.into(),
        };
        match (cmd.verb, &cmd.params) {
            (Verb::PressButton, Params::Button(b)) => {
                if !KEYPAD.iter().flatten().any(|k| k == b) {
                    return Err(bad("unknown button"));
                }
            }
            (Verb::PressButton, _) => return Err(bad("expected a button id")),
            (Verb::DragSlide, Params::Slide(d)) if d.is_finite() => {}
            (Verb::DragSlide, _) => return Err(bad("expected a finite slide delta")),
            (Verb::PushStep, Params::Push { dx, dy }) => {
                if !(dx.is_finite() && dy.is_finite()) || dx.hypot(*dy) == 0.0 {
                    return Err(bad("push vector must be finite and non-zero"));
                }
            }
            (Verb::PushStep, _) => return Err(bad("expected a push vector")),
            _ => {}
        }
        Ok(())
    }

    fn actuate(&mut self, cmd: &Command) -> Result<(), WorldError> {
        let Target::Object(id) = &cmd.target else {
            unreachable!("checked by caller");
        };
        let push_step = self.params.push_step_mm;
        let obj = self
            .object_mut(id)
            .ok_or_else(|| WorldError::UnknownObject(id.clone()))?;
        match (&mut obj.actuation, &cmd.params) {
            (
                Actuation::Door {
                    target,
                    entered,
                    password,
                    ..
                },
                Params::Button(button),
            ) => match button.as_str() {
                "clear" => entered.clear(),
                "enter" => {
                    if entered != password {
                        entered.clear();
                    }
                }
                digit => {
                    entered.push_str(digit.trim_start_matches("button_"));
                    if entered == password {
                        *target = 1.0;
                        entered.clear();
                    } else if entered.len() >= password.len() {
                        entered.clear();
                    }
                }
            },
            (Actuation::Curtain { openness, target }, Params::Slide(delta)) => {
                *openness = (*openness + delta).clamp(0.0, 1.0);
                *target = *openness;
            }
            (Actuation::Light { on }, Params::None) => *on = !*on,
            (
                Actuation::Wheelchair {
                    x_mm,
                    y_mm,
                    heading_deg,
                    ..
                },
                Params::Push { dx, dy },
            ) => {
                let n = dx.hypot(*dy);
                let (ux, uy) = (dx / n, dy / n);
                let (mx, my) = (ux * push_step, uy * push_step);
                *x_mm += mx;
                *y_mm += my;
                *heading_deg = uy.atan2(ux).to_degrees();
                for p in &mut obj.footprint {
                    p.x += mx;
                    p.y += my;
                }
                obj.tag_anchor.x += mx;
                obj.tag_anchor.y += my;
                self.follow = Some(id.clone());
            }
            _ => {
                return Err(WorldError::BadParams {
                    verb: cmd.verb,
                    reason: "parameters do not match the object state".into(),
                })
            }
        }
        Ok(())
    }

    /// Advances continuous processes by `dt_ms`.
    pub fn tick(&mut self, dt_ms: u64) {
        if dt_ms == 0 {
            return;
        }
        let dt_s = dt_ms as f64 / 1000.0;
        let max_slew = self.params.slew_per_s * dt_s;
        for obj in &mut self.objects {
            if let Actuation::Door { openness, target, .. } | Actuation::Curtain { openness, target } =
                &mut obj.actuation
            {
                let diff = *target - *openness;
                if diff != 0.0 {
                    *openness = if diff.abs() <= max_slew {
                        *target
                    } else {
                        *openness + max_slew.copysign(diff)
                    };
                }
            }
        }
        self.follow_step(dt_s);
        self.sim_time_ms += dt_ms;
    }

    fn follow_step(&mut self, dt_s: f64) {
        let Some(id) = self.follow.clone() else {
            return;
        };
        let Some(Actuation::Wheelchair { x_mm, y_mm, .. }) = self.object(&id).map(|o| o.actuation.clone())
        else {
            self.follow = None;
            return;
        };
        let gap_vec = Point::new(x_mm, y_mm).sub(self.robot.position());
        let gap = gap_vec.norm();
        let excess = gap - self.params.follow_gap_mm;
        if excess <= 0.0 {
            return;
        }
        let dir = gap_vec.scale(1.0 / gap);
        let bearing = dir.y.atan2(dir.x).to_degrees().rem_euclid(360.0);
        let turn = (bearing - self.robot.heading_deg + 540.0).rem_euclid(360.0) - 180.0;
        if turn.abs() > 1e-6 {
            self.robot.heading_deg = bearing;
        }
        let dist = excess.min(self.params.follow_speed_mm_s * dt_s);
        self.move_robot(dir, dist);
    }

    /// Moves the robot up to `dist` along unit `dir`, stopping at first contact.
    /// Returns the distance actually travelled.
    fn move_robot(&mut self, dir: Point, dist: f64) -> f64 {
        let start = self.robot.position();
        let free = self.free_distance(start, dir, dist);
        let end = start.add(dir.scale(free));
        self.robot.x_mm = end.x;
        self.robot.y_mm = end.y;
        self.update_contacts();
        free
    }

    fn free_distance(&self, p0: Point, dir: Point, dist: f64) -> f64 {
        let r = self.params.robot_radius_mm;
        let mut s = dist;
        for cup in &self.obstacles {
            s = s.min(disc_contact(p0, dir, cup.center(), r + cup.radius_mm));
        }
        for obj in self.objects.iter().filter(|o| o.blocks()) {
            if point_in_polygon(p0, &obj.footprint) {
                continue;
            }
            s = s.min(polygon_contact(p0, dir, &obj.footprint, r));
        }
        s.max(0.0)
    }

    fn update_contacts(&mut self) {
        let p = self.robot.position();
        let r = self.params.robot_radius_mm;
        let now: BTreeSet<usize> = self
            .obstacles
            .iter()
            .enumerate()
            .filter(|(_, c)| p.dist(c.center()) <= r + c.radius_mm + CONTACT_EPS)
            .map(|(i, _)| i)
            .collect();
        let fresh = now.difference(&self.cup_contacts).count() as u64;
        self.collision_count += fresh;
        self.cup_contacts = now;
    }

    /// Centre-to-centre distance between robot and a wheelchair.
    pub fn robot_gap_mm(&self, id: &str) -> Option<f64> {
        match &self.object(id)?.actuation {
            Actuation::Wheelchair { x_mm, y_mm, .. } => {
                Some(Point::new(*x_mm, *y_mm).dist(self.robot.position()))
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("world state is always serializable")
    }
}

/// Pure form of [`WorldState::apply`].
pub fn apply_command(world: &WorldState, cmd: &Command) -> Result<WorldState, WorldError> {
    let mut next = world.clone();
    next.apply(cmd)?;
    Ok(next)
}

/// Pure form of [`WorldState::tick`].
pub fn tick(world: &WorldState, dt_ms: u64) -> WorldState {
    let mut next = world.clone();
    next.tick(dt_ms);
    next
}

/// First travel distance at which a point moving along unit `dir` from `p0`
/// comes within `radius` of `center`. Infinite if never, zero if already
/// touching and heading inward.
fn disc_contact(p0: Point, dir: Point, center: Point, radius: f64) -> f64 {
    let w = p0.sub(center);
    let b = dir.dot(w);
    let c = w.dot(w) - radius * radius;
    if w.norm() <= radius + CONTACT_EPS {
        return if b < 0.0 { 0.0 } else { f64::INFINITY };
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let s = -b - disc.sqrt();
    if s >= 0.0 {
        s
    } else {
        f64::INFINITY
    }
}

fn polygon_contact(p0: Point, dir: Point, poly: &[Point], radius: f64) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        best = best.min(disc_contact(p0, dir, a, radius));
        let edge = b.sub(a);
        let len = edge.norm();
        if len == 0.0 {
            continue;
        }
        let normal = Point::new(-edge.y / len, edge.x / len);
        let d0 = normal.dot(p0.sub(a));
        let rate = normal.dot(dir);
        let within = |q: Point| {
            let t = q.sub(a).dot(edge) / (len * len);
            (0.0..=1.0).contains(&t)
        };
        if d0.abs() <= radius + CONTACT_EPS {
            if point_segment_distance(p0, a, b) <= radius + CONTACT_EPS && d0 * rate < 0.0 && within(p0) {
                best = 0.0;
            }
            continue;
        }
        if rate == 0.0 || d0 * rate > 0.0 {
            continue;
        }
        let s = (d0.abs() - radius) / rate.abs();
        if s >= 0.0 && within(p0.add(dir.scale(s))) {
            best = best.min(s);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// World description files

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub robot: RobotStart,
    #[serde(default)]
    pub params: SimParams,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub cups: Vec<Cup>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RobotStart {
    #[serde(default)]
    pub x_mm: f64,
    #[serde(default)]
    pub y_mm: f64,
    #[serde(default)]
    pub heading_deg: f64,
    pub post_height_mm: Option<f64>,
    #[serde(default)]
    pub pan_deg: f64,
    #[serde(default)]
    pub tilt_deg: f64,
    pub zoom_factor: Option<f64>,
}

impl RobotStart {
    pub fn to_state(self) -> RobotState {
        let mut r = RobotState {
            x_mm: self.x_mm,
            y_mm: self.y_mm,
            heading_deg: self.heading_deg.rem_euclid(360.0),
            post_height_mm: self.post_height_mm.unwrap_or(POST_RANGE_MM.0),
            pan_deg: self.pan_deg,
            tilt_deg: self.tilt_deg,
            zoom_factor: self.zoom_factor.unwrap_or(1.0),
        };
        r.clamp();
        r
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TagSpec {
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: String,
    pub name: String,
    pub class: ObjectClass,
    pub footprint: Vec<[f64; 2]>,
    pub height_mm: f64,
    pub tag: TagSpec,
    pub password: Option<String>,
    pub panel: Option<PanelSpec>,
    #[serde(default)]
    pub openness: f64,
    #[serde(default)]
    pub on: bool,
}

impl WorldFile {
    pub fn parse(text: &str) -> Result<WorldFile, WorldError> {
        toml::from_str(text).map_err(|e| WorldError::Invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<WorldFile, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<WorldState, WorldError> {
        let mut world = WorldState::empty(self.seed);
        world.name = self.name.clone();
        world.params = self.params;
        world.robot = self.robot.to_state();
        world.obstacles = self.cups.clone();
        let mut seen = BTreeSet::new();
        for spec in &self.objects {
            if spec.id == crate::view::GROUND_ID || spec.id.starts_with("cup_") {
                return Err(WorldError::Invalid(format!("reserved object id `{}`", spec.id)));
            }
            if !seen.insert(spec.id.clone()) {
                return Err(WorldError::Invalid(format!("duplicate object id `{}`", spec.id)));
            }
            world.objects.push(spec.to_record()?);
        }
        for (i, c) in self.cups.iter().enumerate() {
            if c.radius_mm <= 0.0 {
                return Err(WorldError::Invalid(format!("cup {i} has non-positive radius")));
            }
        }
        world.update_contacts();
        world.collision_count = 0;
        Ok(world)
    }
}

impl ObjectSpec {
    fn to_record(&self) -> Result<TeleObjectRecord, WorldError> {
        let invalid = |msg: &str| WorldError::Invalid(format!("object `{}`: {msg}", self.id));
        if self.footprint.len() < 3 {
            return Err(invalid("footprint needs at least 3 points"));
        }
        if self.height_mm <= 0.0 {
            return Err(invalid("height must be positive"));
        }
        let footprint: Vec<Point> = self.footprint.iter().map(|p| Point::new(p[0], p[1])).collect();
        let openness = self.openness.clamp(0.0, 1.0);
        let actuation = match self.class {
            ObjectClass::PasswordDoor => {
                let password = self
                    .password
                    .clone()
                    .ok_or_else(|| invalid("a password door needs a password"))?;
                if password.is_empty() || !password.chars().all(|c| c.is_ascii_digit()) {
                    return Err(invalid("password must be a non-empty digit string"));
                }
                if self.panel.is_none() {
                    return Err(invalid("a password door needs a panel"));
                }
                Actuation::Door {
                    openness,
                    target: openness,
                    entered: String::new(),
                    password,
                }
            }
            ObjectClass::Curtain => Actuation::Curtain {
                openness,
                target: openness,
            },
            ObjectClass::LightingTree => Actuation::Light { on: self.on },
            ObjectClass::Wheelchair => {
                let c = crate::geometry::vertex_mean(&footprint);
                Actuation::Wheelchair {
                    x_mm: c.x,
                    y_mm: c.y,
                    heading_deg: 0.0,
                    speed_mm_s: 0.0,
                }
            }
            ObjectClass::PlainObstacle => Actuation::Inert,
        };
        Ok(TeleObjectRecord {
            id: self.id.clone(),
            name: self.name.clone(),
            class: self.class,
            footprint,
            height_mm: self.height_mm,
            tag_anchor: Point::new(self.tag.x_mm, self.tag.y_mm),
            tag_height_mm: self.tag.z_mm,
            command_set: self.class.command_set(),
            actuation,
            panel: if self.class == ObjectClass::PasswordDoor {
                self.panel
            } else {
                None
            },
        })
    }
}
