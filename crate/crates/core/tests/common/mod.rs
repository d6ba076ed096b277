#![allow(dead_code)]

use std::path::PathBuf;

use tiui_core::gesture::PointerSample;
use tiui_core::interaction::SessionState;
use tiui_core::scenario::ScenarioScript;
use tiui_core::space::{HelloOutcome, LocalSpace, Outbound, SpaceConfig};
use tiui_core::trace::load_trace;
use tiui_core::wire::{Body, Hello, Role, WireMessage};
use tiui_core::world::{RobotStart, WorldFile, WorldState};

pub fn assets() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets"))
}

pub fn world(name: &str) -> WorldState {
    let path = assets().join("worlds").join(format!("{name}.toml"));
    WorldFile::load(&path).unwrap().build().unwrap()
}

pub fn world_at(name: &str, start: RobotStart) -> WorldState {
    let mut w = world(name);
    w.robot = start.to_state();
    w.cup_contacts.clear();
    w
}

pub fn script(name: &str) -> ScenarioScript {
    ScenarioScript::load(&assets().join("scenarios").join(format!("{name}.toml"))).unwrap()
}

pub fn trace(name: &str) -> Vec<PointerSample> {
    load_trace(&assets().join("traces").join(name)).unwrap()
}

/// One control session on a local space, fed without latency.
pub struct Driver {
    pub space: LocalSpace,
    pub session: String,
    pub seq: u64,
    pub now: u64,
    pub inbox: Vec<WireMessage>,
}

impl Driver {
    pub fn new(world: WorldState) -> Self {
        Self::with_config(world, SpaceConfig::default())
    }

    pub fn with_config(world: WorldState, config: SpaceConfig) -> Self {
        let mut space = LocalSpace::new(world, config);
        let hello = WireMessage::new(
            "",
            1,
            Body::Hello(Hello {
                role: Role::Control,
                client: "test".into(),
            }),
        );
        let HelloOutcome::Accepted { session_id, messages } = space.hello(0, &hello) else {
            panic!("control session refused");
        };
        Self {
            space,
            session: session_id,
            seq: 1,
            now: 0,
            inbox: messages.into_iter().map(|o| o.message).collect(),
        }
    }

    fn collect(&mut self, out: Vec<Outbound>) {
        let id = self.session.clone();
        self.inbox
            .extend(out.into_iter().filter(|o| o.session_id == id).map(|o| o.message));
    }

    /// Sends a trace whose times are relative to the current clock.
    pub fn play(&mut self, samples: &[PointerSample]) {
        let base = self.now;
        for s in samples {
            let mut s = *s;
            s.t_ms += base;
            self.seq += 1;
            self.now = self.now.max(s.t_ms);
            let msg = WireMessage::new(self.session.clone(), self.seq, Body::Pointer(s));
            let out = self.space.receive(s.t_ms, &msg);
            self.collect(out);
        }
    }

    pub fn wait(&mut self, ms: u64) {
        self.now += ms;
        let out = self.space.advance_to(self.now);
        self.collect(out);
    }

    pub fn state(&self) -> &SessionState {
        self.space.session_state(&self.session).unwrap()
    }

    pub fn world(&self) -> &WorldState {
        self.space.world()
    }

    pub fn errors(&self) -> Vec<String> {
        self.inbox
            .iter()
            .filter_map(|m| match &m.body {
                Body::Error(e) => Some(format!("{}: {}", e.code, e.message)),
                _ => None,
            })
            .collect()
    }
}

/// Prints the acceptance line and fails the test on FAIL.
pub fn verdict(criterion: &str, ok: bool, detail: impl std::fmt::Display) {
    let mark = if ok { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {mark} {criterion}: {detail}");
    assert!(ok, "{criterion}: {detail}");
}
