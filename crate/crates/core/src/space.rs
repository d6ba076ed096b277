//! The local-space server without any I/O: sessions, the shared world, the
//! 10 Hz frame clock, and the gesture → intent → command pipeline.
//!
//! Callers feed decoded messages in with a timestamp and get back addressed
//! outbound messages. All world mutation happens inside these calls, so
//! commands from different connections can never interleave.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::gesture::{route, GestureConfig, GestureEngine, PointerSample};
use crate::interaction::{
    complete_recognition, feedback_delivered, handle_intent, on_track_lost, Effect, SessionState,
};
use crate::knowledge::{Advisory, MarkerStore};
use crate::recognition::{Recognizer, TagRegistryRecognizer, TrackUpdate, Tracker, LOSS_WINDOW};
use crate::view::{compose_frame, CameraRig, Overlay, SceneFrame};
use crate::wire::{
    Ack, Body, ErrorBody, Hello, ObjectStatus, ObjectSummary, Overlays, Role, StateUpdate, Welcome,
    WireMessage,
};
use crate::world::{Command, WorldState};

pub const FRAME_INTERVAL_MS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub frame_interval_ms: u64,
    pub gesture: GestureConfig,
    pub rig: CameraRig,
    pub loss_window: u32,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        let rig = CameraRig::default();
        Self {
            frame_interval_ms: FRAME_INTERVAL_MS,
            gesture: GestureConfig {
                seam_row: rig.seam_row as f64,
                ..GestureConfig::default()
            },
            rig,
            loss_window: LOSS_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceStats {
    pub gestures: u64,
    pub robot_gestures: u64,
    pub commands_applied: u64,
    pub robot_commands_applied: u64,
    pub commands_rejected: u64,
    pub advisories: u64,
    /// (server time, command) for every applied command.
    pub command_log: Vec<(u64, Command)>,
}

/// A message addressed to one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub session_id: String,
    pub message: WireMessage,
}

#[derive(Debug)]
pub enum HelloOutcome {
    Accepted {
        session_id: String,
        messages: Vec<Outbound>,
    },
    /// Unnumbered error for a refused connection.
    Rejected(WireMessage),
}

struct Session {
    role: Role,
    out_seq: u64,
    last_in_seq: Option<u64>,
    engine: GestureEngine,
    state: SessionState,
    tracker: Tracker,
    last_frame: SceneFrame,
    hint: Option<String>,
    advisory: Option<u64>,
    last_command: Option<Command>,
}

pub struct LocalSpace {
    world: WorldState,
    config: SpaceConfig,
    recognizer: Box<dyn Recognizer + Send>,
    sessions: BTreeMap<String, Session>,
    control: Option<String>,
    markers: MarkerStore,
    next_session: u64,
    frame_id: u64,
    next_tick_at: u64,
    stats: SpaceStats,
}

impl LocalSpace {
    pub fn new(world: WorldState, config: SpaceConfig) -> Self {
        let next_tick_at = world.sim_time_ms + config.frame_interval_ms;
        Self {
            world,
            config,
            recognizer: Box::new(TagRegistryRecognizer),
            sessions: BTreeMap::new(),
            control: None,
            markers: MarkerStore::default(),
            next_session: 1,
            frame_id: 0,
            next_tick_at,
            stats: SpaceStats::default(),
        }
    }

    pub fn with_recognizer(mut self, recognizer: Box<dyn Recognizer + Send>) -> Self {
        self.recognizer = recognizer;
        self
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn stats(&self) -> &SpaceStats {
        &self.stats
    }

    pub fn markers(&self) -> &MarkerStore {
        &self.markers
    }

    pub fn set_markers(&mut self, markers: MarkerStore) {
        self.markers = markers;
    }

    pub fn session_state(&self, id: &str) -> Option<&SessionState> {
        self.sessions.get(id).map(|s| &s.state)
    }

    pub fn last_frame(&self, id: &str) -> Option<&SceneFrame> {
        self.sessions.get(id).map(|s| &s.last_frame)
    }

    pub fn control_session(&self) -> Option<&str> {
        self.control.as_deref()
    }

    pub fn now(&self) -> u64 {
        self.world.sim_time_ms
    }

    /// Opens a session. The first message a connection sends must be Hello.
    pub fn hello(&mut self, now_ms: u64, msg: &WireMessage) -> HelloOutcome {
        let mut out = self.advance_to(now_ms);
        let Body::Hello(Hello { role, .. }) = &msg.body else {
            return HelloOutcome::Rejected(error_msg("", "handshake", "expected Hello"));
        };
        if *role == Role::Control && self.control.is_some() {
            return HelloOutcome::Rejected(error_msg("", "busy", "robot busy"));
        }
        let id = format!("s{}", self.next_session);
        self.next_session += 1;
        if *role == Role::Control {
            self.control = Some(id.clone());
        }
        let frame = self.compose();
        let session = Session {
            role: *role,
            out_seq: 0,
            last_in_seq: None,
            engine: GestureEngine::new(self.config.gesture),
            state: SessionState {
                view_heading_deg: self.world.robot.heading_deg,
                ..SessionState::default()
            },
            tracker: Tracker::new(self.config.loss_window),
            last_frame: frame.clone(),
            hint: None,
            advisory: None,
            last_command: None,
        };
        self.sessions.insert(id.clone(), session);
        let welcome = Welcome {
            session_id: id.clone(),
            role: *role,
            world_name: self.world.name.clone(),
            objects: self
                .world
                .objects
                .iter()
                .map(|o| ObjectSummary {
                    id: o.id.clone(),
                    name: o.name.clone(),
                    class: o.class,
                })
                .collect(),
            canvas_width: self.config.rig.canvas_width,
            canvas_height: self.config.rig.canvas_height,
            seam_row: self.config.rig.seam_row,
            overlap_rows: self.config.rig.overlap_rows,
            frame_interval_ms: self.config.frame_interval_ms,
        };
        self.push(&mut out, &id, Body::Welcome(welcome));
        self.send_frame(&mut out, &id, &frame);
        let update = self.state_update(&id);
        self.push(&mut out, &id, Body::StateUpdate(Box::new(update)));
        HelloOutcome::Accepted {
            session_id: id,
            messages: out,
        }
    }

    /// Handles one message from an established session.
    pub fn receive(&mut self, now_ms: u64, msg: &WireMessage) -> Vec<Outbound> {
        let mut out = self.advance_to(now_ms);
        let id = msg.session_id.clone();
        let Some(session) = self.sessions.get_mut(&id) else {
            return out;
        };
        if session.last_in_seq.is_some_and(|last| msg.seq <= last) {
            self.push_error(&mut out, &id, "seq", "sequence number not increasing");
            return out;
        }
        session.last_in_seq = Some(msg.seq);
        match &msg.body {
            Body::Pointer(sample) => {
                self.push(&mut out, &id, Body::Ack(Ack { ack_seq: msg.seq }));
                if self.sessions[&id].role != Role::Control {
                    self.push_error(&mut out, &id, "view_only", "view-only session cannot steer");
                } else {
                    self.pointer(&mut out, &id, *sample);
                }
            }
            Body::Bye(_) => self.disconnect(&id),
            Body::Hello(_) => self.push_error(&mut out, &id, "handshake", "already connected"),
            other => {
                let t = other.type_name();
                self.push_error(
                    &mut out,
                    &id,
                    "unexpected",
                    &format!("unexpected {t} from client"),
                );
            }
        }
        out
    }

    /// Ends a session. Markers are kept server-wide.
    pub fn disconnect(&mut self, id: &str) {
        self.sessions.remove(id);
        if self.control.as_deref() == Some(id) {
            self.control = None;
        }
    }

    /// Runs frame ticks up to `now_ms`, broadcasting a frame at each.
    pub fn advance_to(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        while self.next_tick_at <= now_ms {
            let dt = self.next_tick_at - self.world.sim_time_ms;
            self.world.tick(dt);
            self.next_tick_at += self.config.frame_interval_ms;
            let frame = self.compose();
            let ids: Vec<String> = self.sessions.keys().cloned().collect();
            for id in ids {
                self.track(&id, &frame);
                self.send_frame(&mut out, &id, &frame);
            }
        }
        out
    }

    fn pointer(&mut self, out: &mut Vec<Outbound>, id: &str, sample: PointerSample) {
        let session = self.sessions.get_mut(id).expect("caller checked");
        let gesture = match session.engine.ingest(sample) {
            Ok(Some(g)) => g,
            Ok(None) => return,
            Err(e) => {
                self.push_error(out, id, "gesture", &e.to_string());
                return;
            }
        };
        self.stats.gestures += 1;
        if gesture.kind.is_two_finger() {
            self.stats.robot_gestures += 1;
        }
        let intent = match route(&gesture, &session.last_frame) {
            Ok(i) => i,
            Err(e) => {
                self.push_error(out, id, "route", &e.to_string());
                return;
            }
        };
        let (state, effects) = handle_intent(&session.state, &intent);
        session.state = state;
        session.hint = None;
        let refresh = self.run_effects(out, id, effects);
        if refresh {
            let frame = self.compose();
            let ids: Vec<String> = self.sessions.keys().cloned().collect();
            for other in ids {
                self.send_frame(out, &other, &frame);
                let update = self.state_update(&other);
                self.push(out, &other, Body::StateUpdate(Box::new(update)));
            }
            let session = self.sessions.get_mut(id).expect("session still open");
            session.state = feedback_delivered(&session.state);
        }
    }

    /// Executes effects in order; returns whether a refresh was requested.
    fn run_effects(&mut self, out: &mut Vec<Outbound>, id: &str, effects: Vec<Effect>) -> bool {
        let mut refresh = false;
        for effect in effects {
            match effect {
                Effect::Command(cmd) => self.execute(out, id, cmd),
                Effect::RecognitionRequest { lasso_px } => {
                    let session = &self.sessions[id];
                    let outcome = self.recognizer.recognize(&session.last_frame, &lasso_px);
                    let verbs = match &outcome {
                        Ok(Some(r)) => self
                            .world
                            .object(&r.object_id)
                            .map(|o| o.command_set.clone())
                            .unwrap_or_default(),
                        _ => Vec::new(),
                    };
                    let (state, more) = complete_recognition(&session.state, outcome, &verbs);
                    let session = self.sessions.get_mut(id).expect("session open");
                    match &state.locked_object {
                        Some(obj) => session.tracker.lock(obj.clone()),
                        None => session.tracker.release(),
                    }
                    session.state = state;
                    // Nested effects end with their own refresh, merged here.
                    refresh |= self.run_effects(out, id, more);
                }
                Effect::LassoEcho { path_px } => {
                    let o = Overlays {
                        overlays: vec![Overlay::LassoEcho { path_px }],
                    };
                    self.push(out, id, Body::Overlay(o));
                }
                Effect::LockOverlay { .. } | Effect::MarkerMode(_) => {}
                Effect::MarkerStroke { kind, stroke_px } => {
                    let frame = self.sessions[id].last_frame.clone();
                    if let Err(e) = self.markers.add_marker(&stroke_px, kind, &frame) {
                        self.push_error(out, id, "marker", &e.to_string());
                    }
                }
                Effect::Hint(text) => {
                    self.sessions.get_mut(id).expect("session open").hint = Some(text.clone());
                    let o = Overlays {
                        overlays: vec![Overlay::Hint { text }],
                    };
                    self.push(out, id, Body::Overlay(o));
                }
                Effect::FrameRefresh => refresh = true,
            }
        }
        refresh
    }

    fn execute(&mut self, out: &mut Vec<Outbound>, id: &str, cmd: Command) {
        let advisory = match self.markers.advisory_check(&self.world, &cmd) {
            Advisory::Clear => None,
            Advisory::Warning(m) => {
                self.stats.advisories += 1;
                Some(m)
            }
        };
        match self.world.apply(&cmd) {
            Ok(()) => {
                self.stats.commands_applied += 1;
                if cmd.is_robot() {
                    self.stats.robot_commands_applied += 1;
                }
                self.stats.command_log.push((self.world.sim_time_ms, cmd.clone()));
                let session = self.sessions.get_mut(id).expect("session open");
                session.advisory = advisory;
                session.last_command = Some(cmd);
            }
            Err(e) => {
                self.stats.commands_rejected += 1;
                self.push_error(out, id, "command", &e.to_string());
            }
        }
    }

    fn track(&mut self, id: &str, frame: &SceneFrame) {
        let session = self.sessions.get_mut(id).expect("session open");
        match session.tracker.track(frame) {
            Some(TrackUpdate::Visible(b)) => session.state.locked_bbox = Some(b),
            Some(TrackUpdate::Lost) => {
                session.state = on_track_lost(&session.state);
                session.hint = Some("lost track of the locked object".into());
            }
            Some(TrackUpdate::Occluded { .. }) | None => {}
        }
    }

    fn compose(&mut self) -> SceneFrame {
        self.frame_id += 1;
        compose_frame(&self.world, &self.config.rig, self.frame_id)
    }

    fn send_frame(&mut self, out: &mut Vec<Outbound>, id: &str, base: &SceneFrame) {
        let mut frame = base.clone();
        let session = self.sessions.get_mut(id).expect("session open");
        if let (Some(obj), Some(bbox)) = (&session.state.locked_object, session.state.locked_bbox) {
            frame.overlays.push(Overlay::LockBox {
                object_id: obj.clone(),
                bbox,
            });
        }
        frame
            .overlays
            .extend(self.markers.overlays(&frame.rig, &frame.robot));
        if let Some(m) = session.advisory {
            frame.overlays.push(Overlay::Advisory { marker_id: m });
        }
        if let Some(text) = &session.hint {
            frame.overlays.push(Overlay::Hint { text: text.clone() });
        }
        session.state.last_frame_id = frame.frame_id;
        session.state.view_heading_deg = frame.robot.heading_deg;
        session.last_frame = frame.clone();
        self.push(out, id, Body::Frame(Box::new(frame)));
    }

    fn state_update(&self, id: &str) -> StateUpdate {
        let s = &self.sessions[id];
        StateUpdate {
            sim_time_ms: self.world.sim_time_ms,
            robot: self.world.robot,
            collision_count: self.world.collision_count,
            objects: self
                .world
                .objects
                .iter()
                .map(|o| ObjectStatus {
                    id: o.id.clone(),
                    actuation: o.actuation.clone(),
                })
                .collect(),
            mode: s.state.mode,
            locked_object: s.state.locked_object.clone(),
            marker_mode: s.state.marker_mode,
            marker_count: self.markers.markers.len(),
            commands_applied: self.stats.commands_applied,
            last_command: s.last_command.clone(),
            advisory: s.advisory,
        }
    }

    fn push(&mut self, out: &mut Vec<Outbound>, id: &str, body: Body) {
        let session = self.sessions.get_mut(id).expect("session open");
        session.out_seq += 1;
        out.push(Outbound {
            session_id: id.to_string(),
            message: WireMessage::new(id, session.out_seq, body),
        });
    }

    fn push_error(&mut self, out: &mut Vec<Outbound>, id: &str, code: &str, message: &str) {
        self.push(
            out,
            id,
            Body::Error(ErrorBody {
                code: code.into(),
                message: message.into(),
            }),
        );
    }
}

fn error_msg(session_id: &str, code: &str, message: &str) -> WireMessage {
    WireMessage::new(
        session_id,
        0,
        Body::Error(ErrorBody {
            code: code.into(),
            message: message.into(),
        }),
    )
}
