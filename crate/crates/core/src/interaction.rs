//! Session state machine: touch, recognition, knowledge and control loops.
//!
//! [`handle_intent`] is pure. It turns one routed gesture into an ordered
//! effect list that always ends with a single [`Effect::FrameRefresh`]; the
//! caller executes the effects and then calls [`feedback_delivered`] once the
//! refreshed frame is out, which closes a control loop back to `Touch`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BBox, Point};
use crate::gesture::{Direction, Gesture, GestureKind, Region, RoutedIntent};
use crate::recognition::{RecognitionError, RecognitionResult};
use crate::view::MarkerKind;
use crate::world::{Command, ObjectId, Params, Verb, KEYPAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Touch,
    /// A lasso is waiting for its recognition result.
    Recognition,
    Knowledge,
    /// A command was emitted and its visual feedback is not yet delivered.
    Control,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub mode: Mode,
    pub locked_object: Option<ObjectId>,
    /// Verbs the locked object accepts.
    pub locked_verbs: Vec<Verb>,
    /// Image bbox of the locked object in the latest frame.
    pub locked_bbox: Option<BBox>,
    pub pending_digit_panel: Option<Vec<(String, Vec<Point>)>>,
    pub last_frame_id: u64,
    /// Robot heading of the latest frame, used to turn image drags into
    /// world push directions.
    pub view_heading_deg: f64,
    pub marker_draft: Option<Vec<Point>>,
    /// Marker mode, toggled by a long press.
    pub marker_mode: bool,
}

impl Default for SessionState {
    fn default() -> Self {
        Self {
            mode: Mode::Touch,
            locked_object: None,
            locked_verbs: Vec::new(),
            locked_bbox: None,
            pending_digit_panel: None,
            last_frame_id: 0,
            view_heading_deg: 0.0,
            marker_draft: None,
            marker_mode: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Effect {
    Command(Command),
    RecognitionRequest {
        lasso_px: Vec<Point>,
    },
    LassoEcho {
        path_px: Vec<Point>,
    },
    /// `bbox: None` removes the lock box.
    LockOverlay {
        object_id: ObjectId,
        bbox: Option<BBox>,
    },
    MarkerStroke {
        kind: MarkerKind,
        stroke_px: Vec<Point>,
    },
    MarkerMode(bool),
    Hint(String),
    FrameRefresh,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InteractionError {
    #[error("{kind:?} is a one-finger gesture")]
    NotTwoFinger { kind: GestureKind },
    #[error("no robot command for {kind:?} {direction:?} in the {region:?} region")]
    NoMapping {
        kind: GestureKind,
        direction: Direction,
        region: Region,
    },
}

/// Two-finger gesture to robot verb. Lower region drives the base, upper
/// region drives the head.
pub fn gesture_to_robot_command(g: &Gesture) -> Result<Command, InteractionError> {
    use Direction as D;
    use GestureKind as K;
    let verb = match (g.kind, g.region, g.direction) {
        (K::TwoFingerStroke, Region::Lower, D::Down) => Some(Verb::StepForward),
        (K::TwoFingerStroke, Region::Lower, D::Up) => Some(Verb::StepBackward),
        (K::TwoFingerStroke, Region::Lower, D::Right) => Some(Verb::StepTurnLeft),
        (K::TwoFingerStroke, Region::Lower, D::Left) => Some(Verb::StepTurnRight),
        (K::TwoFingerStroke, Region::Upper, D::Up) => Some(Verb::PostUp),
        (K::TwoFingerStroke, Region::Upper, D::Down) => Some(Verb::PostDown),
        (K::TwoFingerStroke, Region::Upper, D::Left) => Some(Verb::PanLeft),
        (K::TwoFingerStroke, Region::Upper, D::Right) => Some(Verb::PanRight),
        (K::Pinch, Region::Upper, D::Out) => Some(Verb::ZoomIn),
        (K::Pinch, Region::Upper, D::In) => Some(Verb::ZoomOut),
        (k, _, _) if !k.is_two_finger() => {
            return Err(InteractionError::NotTwoFinger { kind: k });
        }
        _ => None,
    };
    verb.map(Command::robot).ok_or(InteractionError::NoMapping {
        kind: g.kind,
        direction: g.direction,
        region: g.region,
    })
}

fn finish(mut effects: Vec<Effect>) -> Vec<Effect> {
    effects.push(Effect::FrameRefresh);
    effects
}

const HINT_LASSO: &str = "lasso the object's tag to lock on before operating it";

pub fn handle_intent(state: &SessionState, intent: &RoutedIntent) -> (SessionState, Vec<Effect>) {
    let mut s = state.clone();
    let g = &intent.gesture;
    // A new gesture means the previous feedback was seen.
    if s.mode == Mode::Control {
        s.mode = Mode::Touch;
    }

    if g.kind.is_two_finger() {
        return match gesture_to_robot_command(g) {
            Ok(cmd) => {
                s.mode = Mode::Control;
                (s, finish(vec![Effect::Command(cmd)]))
            }
            Err(e) => (s, finish(vec![Effect::Hint(e.to_string())])),
        };
    }

    if g.kind == GestureKind::LongPress {
        s.marker_mode = !s.marker_mode;
        s.marker_draft = None;
        s.mode = Mode::Touch;
        let on = s.marker_mode;
        return (s, finish(vec![Effect::MarkerMode(on)]));
    }

    if s.marker_mode {
        let kind = match g.kind {
            GestureKind::Drag => MarkerKind::RouteEdge,
            GestureKind::Lasso => MarkerKind::Obstacle,
            _ => MarkerKind::Door,
        };
        let stroke_px = if kind == MarkerKind::Door {
            vec![g.anchor_px]
        } else {
            g.path_px.clone()
        };
        // The knowledge loop closes within this call.
        s.mode = Mode::Touch;
        s.marker_draft = None;
        return (s, finish(vec![Effect::MarkerStroke { kind, stroke_px }]));
    }

    match g.kind {
        GestureKind::Lasso => {
            s.mode = Mode::Recognition;
            let effects = vec![
                Effect::LassoEcho {
                    path_px: g.path_px.clone(),
                },
                Effect::RecognitionRequest {
                    lasso_px: g.path_px.clone(),
                },
            ];
            (s, finish(effects))
        }
        GestureKind::Tap | GestureKind::Drag => {
            let locked = match (&intent.target, &s.locked_object) {
                (Some(t), Some(l)) if t == l => l.clone(),
                (Some(_), _) => return (s, finish(vec![Effect::Hint(HINT_LASSO.into())])),
                (None, _) => return (s, finish(Vec::new())),
            };
            match object_command(&s, &locked, intent) {
                Some(cmd) => {
                    s.mode = Mode::Control;
                    (s, finish(vec![Effect::Command(cmd)]))
                }
                None => (s, finish(Vec::new())),
            }
        }
        _ => (s, finish(Vec::new())),
    }
}

fn object_command(s: &SessionState, id: &str, intent: &RoutedIntent) -> Option<Command> {
    let g = &intent.gesture;
    let has = |v: Verb| s.locked_verbs.contains(&v);
    match g.kind {
        GestureKind::Tap if has(Verb::PressButton) => {
            let part = intent.target_part.as_ref()?;
            KEYPAD
                .iter()
                .flatten()
                .any(|k| k == part)
                .then(|| Command::object(id, Verb::PressButton, Params::Button(part.clone())))
        }
        GestureKind::Tap if has(Verb::Toggle) => Some(Command::object(id, Verb::Toggle, Params::None)),
        GestureKind::Drag if has(Verb::DragSlide) => {
            let width = s.locked_bbox?.width();
            let (a, b) = (g.path_px.first()?, g.path_px.last()?);
            (width > 0.0).then(|| Command::object(id, Verb::DragSlide, Params::Slide((b.x - a.x) / width)))
        }
        GestureKind::Drag if has(Verb::PushStep) => {
            let (a, b) = (g.path_px.first()?, g.path_px.last()?);
            // Image up is robot forward, image right is robot right.
            let (fwd, right) = (a.y - b.y, b.x - a.x);
            let h = s.view_heading_deg.to_radians();
            let dx = fwd * h.cos() + right * h.sin();
            let dy = fwd * h.sin() - right * h.cos();
            (dx.hypot(dy) > 0.0).then(|| Command::object(id, Verb::PushStep, Params::Push { dx, dy }))
        }
        _ => None,
    }
}

/// Applies a recognition outcome for the pending lasso.
pub fn complete_recognition(
    state: &SessionState,
    outcome: Result<Option<RecognitionResult>, RecognitionError>,
    command_set: &[Verb],
) -> (SessionState, Vec<Effect>) {
    let mut s = state.clone();
    s.mode = Mode::Touch;
    let effects = match outcome {
        Ok(Some(r)) => {
            s.locked_object = Some(r.object_id.clone());
            s.locked_verbs = command_set.to_vec();
            s.locked_bbox = Some(r.image_bbox);
            s.pending_digit_panel = r.panel_layout;
            vec![Effect::LockOverlay {
                object_id: r.object_id,
                bbox: Some(r.image_bbox),
            }]
        }
        Ok(None) => vec![Effect::Hint("no tag inside the lasso".into())],
        // An accidental scribble.
        Err(_) => Vec::new(),
    };
    (s, finish(effects))
}

/// Drops the lock and returns to the touch module.
pub fn on_track_lost(state: &SessionState) -> SessionState {
    let mut s = state.clone();
    if s.locked_object.is_none() && s.mode == Mode::Touch {
        return s;
    }
    s.locked_object = None;
    s.locked_verbs.clear();
    s.locked_bbox = None;
    s.pending_digit_panel = None;
    s.mode = Mode::Touch;
    s
}

/// Closes a control loop once its refreshed frame has been delivered.
pub fn feedback_delivered(state: &SessionState) -> SessionState {
    let mut s = state.clone();
    if s.mode == Mode::Control {
        s.mode = Mode::Touch;
    }
    s
}
