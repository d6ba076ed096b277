//! Synthetic pointer traces for canonical gestures.
//!
//! Used to build the bundled trace files and by tests. All builders start at
//! `t0` and space move samples 16 ms apart.

use std::f64::consts::TAU;

use crate::geometry::Point;
use crate::gesture::{Phase, PointerSample};

pub const SAMPLE_MS: u64 = 16;
/// Horizontal half-distance between the two fingers of a stroke.
pub const FINGER_HALF_GAP: f64 = 50.0;

fn s(id: u32, phase: Phase, p: Point, t: u64) -> PointerSample {
    PointerSample::new(id, phase, p.x, p.y, t)
}

pub fn tap(at: Point, t0: u64) -> Vec<PointerSample> {
    vec![s(0, Phase::Down, at, t0), s(0, Phase::Up, at, t0 + 80)]
}

pub fn long_press(at: Point, t0: u64) -> Vec<PointerSample> {
    vec![
        s(0, Phase::Down, at, t0),
        s(0, Phase::Move, at, t0 + 250),
        s(0, Phase::Up, at, t0 + 600),
    ]
}

/// Straight one-finger drag with `steps` move samples.
pub fn drag(from: Point, to: Point, steps: usize, t0: u64) -> Vec<PointerSample> {
    let steps = steps.max(1);
    let mut out = vec![s(0, Phase::Down, from, t0)];
    let mut t = t0;
    for k in 1..=steps {
        t += SAMPLE_MS;
        let p = from.add(to.sub(from).scale(k as f64 / steps as f64));
        out.push(s(0, Phase::Move, p, t));
    }
    out.push(s(0, Phase::Up, to, t + SAMPLE_MS));
    out
}

/// Closed circular lasso with `n` points on the circle.
pub fn lasso(center: Point, radius: f64, n: usize, t0: u64) -> Vec<PointerSample> {
    let n = n.max(3);
    let at = |k: usize| {
        let a = TAU * k as f64 / n as f64;
        Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
    };
    let mut out = vec![s(0, Phase::Down, at(0), t0)];
    let mut t = t0;
    for k in 1..=n {
        t += SAMPLE_MS;
        out.push(s(0, Phase::Move, at(k % n), t));
    }
    out.push(s(0, Phase::Up, at(0), t + SAMPLE_MS));
    out
}

/// Two fingers side by side translating by `delta`.
pub fn two_finger_stroke(center: Point, delta: Point, steps: usize, t0: u64) -> Vec<PointerSample> {
    let off = Point::new(FINGER_HALF_GAP, 0.0);
    two_finger(center.sub(off), center.add(off), delta, delta, steps, t0)
}

/// Two fingers on a horizontal line moving apart (`grow > 0`) or together.
pub fn pinch(center: Point, half_gap: f64, grow: f64, steps: usize, t0: u64) -> Vec<PointerSample> {
    let off = Point::new(half_gap, 0.0);
    let d = Point::new(grow / 2.0, 0.0);
    two_finger(center.sub(off), center.add(off), d.scale(-1.0), d, steps, t0)
}

fn two_finger(a0: Point, b0: Point, da: Point, db: Point, steps: usize, t0: u64) -> Vec<PointerSample> {
    let steps = steps.max(1);
    let mut out = vec![s(0, Phase::Down, a0, t0), s(1, Phase::Down, b0, t0 + 4)];
    let mut t = t0 + 4;
    for k in 1..=steps {
        t += SAMPLE_MS;
        let f = k as f64 / steps as f64;
        out.push(s(0, Phase::Move, a0.add(da.scale(f)), t));
        out.push(s(1, Phase::Move, b0.add(db.scale(f)), t));
    }
    out.push(s(0, Phase::Up, a0.add(da), t + SAMPLE_MS));
    out.push(s(1, Phase::Up, b0.add(db), t + SAMPLE_MS + 4));
    out
}

/// Time of the last sample, or `t0` for an empty trace.
pub fn end_time(trace: &[PointerSample], t0: u64) -> u64 {
    trace.iter().map(|p| p.t_ms).max().unwrap_or(t0)
}

/// Concatenates gesture builders with a fixed pause between them.
pub struct TraceBuilder {
    samples: Vec<PointerSample>,
    t: u64,
    pause_ms: u64,
}

impl TraceBuilder {
    pub fn new(pause_ms: u64) -> Self {
        Self {
            samples: Vec::new(),
            t: 0,
            pause_ms,
        }
    }

    pub fn push(&mut self, build: impl FnOnce(u64) -> Vec<PointerSample>) -> &mut Self {
        let part = build(self.t);
        self.t = end_time(&part, self.t) + self.pause_ms;
        self.samples.extend(part);
        self
    }

    pub fn finish(&mut self) -> Vec<PointerSample> {
        std::mem::take(&mut self.samples)
    }
}
