//! Finger-touch gesture interpretation.
//!
//! [`GestureEngine`] is a sequential automaton fed one [`PointerSample`] at a
//! time. A *contact* starts when a pointer goes down with no other pointer
//! active and ends when every pointer in it has lifted. One-pointer contacts
//! become tap, long-press, drag or lasso; two-pointer contacts become a
//! two-finger stroke or a pinch. Each contact yields at most one gesture.
//!
//! [`route`] then places a finished gesture on a [`SceneFrame`]: screen region
//! from the seam row, hit target for one-finger gestures, and a ground point
//! for one-finger gestures on empty floor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{vertex_mean, Point};
use crate::view::{self, SceneFrame, GROUND_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Down,
    Move,
    Up,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Down => "down",
            Phase::Move => "move",
            Phase::Up => "up",
        }
    }
}

/// One raw pointer event in FDF canvas pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerSample {
    pub pointer_id: u32,
    pub phase: Phase,
    pub x_px: f64,
    pub y_px: f64,
    /// Milliseconds since session start.
    pub t_ms: u64,
}

impl PointerSample {
    pub fn new(pointer_id: u32, phase: Phase, x_px: f64, y_px: f64, t_ms: u64) -> Self {
        Self {
            pointer_id,
            phase,
            x_px,
            y_px,
            t_ms,
        }
    }

    pub fn pos(&self) -> Point {
        Point::new(self.x_px, self.y_px)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GestureKind {
    Tap,
    LongPress,
    Drag,
    Lasso,
    TwoFingerStroke,
    Pinch,
}

impl GestureKind {
    pub fn is_two_finger(self) -> bool {
        matches!(self, GestureKind::TwoFingerStroke | GestureKind::Pinch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    None,
    Up,
    Down,
    Left,
    Right,
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Upper,
    Lower,
}

impl Region {
    pub fn of_row(y_px: f64, seam_row: f64) -> Region {
        if y_px < seam_row {
            Region::Upper
        } else {
            Region::Lower
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gesture {
    pub kind: GestureKind,
    pub direction: Direction,
    pub region: Region,
    pub anchor_px: Point,
    pub path_px: Vec<Point>,
    pub duration_ms: u64,
}

/// Classification thresholds. All distances in pixels, times in ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureConfig {
    pub tap_max_ms: u64,
    pub move_tolerance_px: f64,
    pub long_press_ms: u64,
    pub lasso_closure_px: f64,
    pub lasso_min_samples: usize,
    pub stroke_min_px: f64,
    /// Row separating the Upper (FF) and Lower (DF) regions.
    pub seam_row: f64,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            tap_max_ms: 300,
            move_tolerance_px: 12.0,
            long_press_ms: 500,
            lasso_closure_px: 15.0,
            lasso_min_samples: 20,
            stroke_min_px: 40.0,
            seam_row: 440.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GestureError {
    #[error("pointer {pointer_id}: {phase:?} arrived out of phase order")]
    OutOfOrder { pointer_id: u32, phase: Phase },
    #[error("pointer {pointer_id}: timestamp {t_ms} ms precedes previous {last_ms} ms")]
    TimeReversal {
        pointer_id: u32,
        t_ms: u64,
        last_ms: u64,
    },
    #[error("pointer {pointer_id}: a contact accepts at most two pointers")]
    TooManyPointers { pointer_id: u32 },
    #[error("pointer {pointer_id} never lifted")]
    Unterminated { pointer_id: u32 },
}

/// A malformed trace, with the index of the first offending sample.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("sample {index}: {source}")]
pub struct TraceError {
    pub index: usize,
    #[source]
    pub source: GestureError,
}

#[derive(Debug, Clone)]
struct Track {
    pointer_id: u32,
    samples: Vec<PointerSample>,
    lifted: bool,
}

impl Track {
    fn first(&self) -> &PointerSample {
        &self.samples[0]
    }

    fn last(&self) -> &PointerSample {
        self.samples.last().expect("track is never empty")
    }

    fn excursion(&self) -> f64 {
        let start = self.first().pos();
        self.samples
            .iter()
            .map(|s| s.pos().dist(start))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
struct Contact {
    tracks: Vec<Track>,
    /// Number of pointers that ever joined (a lifted pointer still counts).
    joined: usize,
    emitted: bool,
    poisoned: bool,
}

impl Contact {
    fn start_ms(&self) -> u64 {
        self.tracks.iter().map(|t| t.first().t_ms).min().unwrap_or(0)
    }

    fn end_ms(&self) -> u64 {
        self.tracks.iter().map(|t| t.last().t_ms).max().unwrap_or(0)
    }

    fn track_mut(&mut self, pointer_id: u32) -> Option<&mut Track> {
        self.tracks.iter_mut().find(|t| t.pointer_id == pointer_id)
    }

    fn long_press_pending(&self) -> bool {
        !self.emitted && !self.poisoned && self.joined == 1 && self.tracks.len() == 1
    }
}

/// Incremental gesture classifier for one session.
#[derive(Debug, Clone, Default)]
pub struct GestureEngine {
    config: GestureConfig,
    contact: Option<Contact>,
    /// Extra fingers ignored until they lift.
    ignored: Vec<u32>,
}

impl GestureEngine {
    pub fn new(config: GestureConfig) -> Self {
        Self {
            config,
            contact: None,
            ignored: Vec::new(),
        }
    }

    pub fn config(&self) -> &GestureConfig {
        &self.config
    }

    /// True while a contact is open.
    pub fn is_active(&self) -> bool {
        self.contact.is_some()
    }

    /// Timer check: emits a long-press once the hold threshold has elapsed at
    /// session time `now_ms` without the pointer leaving the tolerance disc.
    pub fn poll(&mut self, now_ms: u64) -> Option<Gesture> {
        let cfg = self.config;
        let contact = self.contact.as_mut()?;
        if !contact.long_press_pending() {
            return None;
        }
        let track = &contact.tracks[0];
        let start = track.first();
        if now_ms.saturating_sub(start.t_ms) >= cfg.long_press_ms && track.excursion() < cfg.move_tolerance_px
        {
            contact.emitted = true;
            let anchor = pixel_anchor(&track.samples);
            let gesture = Gesture {
                kind: GestureKind::LongPress,
                direction: Direction::None,
                region: Region::of_row(anchor.y, cfg.seam_row),
                anchor_px: anchor,
                path_px: Vec::new(),
                duration_ms: now_ms - start.t_ms,
            };
            return Some(gesture);
        }
        None
    }

    /// Feeds one sample. Returns a gesture at the moment it becomes unambiguous.
    pub fn ingest(&mut self, sample: PointerSample) -> Result<Option<Gesture>, GestureError> {
        let id = sample.pointer_id;
        if let Some(pos) = self.ignored.iter().position(|&p| p == id) {
            if sample.phase == Phase::Up {
                self.ignored.remove(pos);
            }
            return Ok(None);
        }

        // A validity failure drops only this pointer's accumulator.
        if let Err(e) = self.validate(&sample) {
            if !matches!(e, GestureError::TooManyPointers { .. }) {
                self.reset_pointer(id);
            }
            return Err(e);
        }

        // Timer expiry is judged before the new sample is folded in.
        let timed_out = self.poll(sample.t_ms);

        match sample.phase {
            Phase::Down => match self.contact.as_mut() {
                None => {
                    self.contact = Some(Contact {
                        tracks: vec![Track {
                            pointer_id: id,
                            samples: vec![sample],
                            lifted: false,
                        }],
                        joined: 1,
                        emitted: false,
                        poisoned: false,
                    });
                }
                Some(contact) => {
                    contact.tracks.push(Track {
                        pointer_id: id,
                        samples: vec![sample],
                        lifted: false,
                    });
                    contact.joined += 1;
                }
            },
            Phase::Move | Phase::Up => {
                let contact = self.contact.as_mut().expect("validated");
                let track = contact.track_mut(id).expect("validated");
                track.samples.push(sample);
                if sample.phase == Phase::Up {
                    track.lifted = true;
                }
            }
        }

        if timed_out.is_some() {
            self.close_if_done();
            return Ok(timed_out);
        }

        let done = self
            .contact
            .as_ref()
            .is_some_and(|c| c.tracks.iter().all(|t| t.lifted));
        if done {
            let contact = self.contact.take().expect("checked");
            if contact.emitted || contact.poisoned {
                return Ok(None);
            }
            return Ok(classify_contact(&contact, &self.config));
        }
        Ok(None)
    }

    fn close_if_done(&mut self) {
        if self
            .contact
            .as_ref()
            .is_some_and(|c| c.tracks.iter().all(|t| t.lifted))
        {
            self.contact = None;
        }
    }

    fn validate(&mut self, sample: &PointerSample) -> Result<(), GestureError> {
        let id = sample.pointer_id;
        let out_of_order = GestureError::OutOfOrder {
            pointer_id: id,
            phase: sample.phase,
        };
        match sample.phase {
            Phase::Down => {
                if let Some(contact) = &self.contact {
                    if contact.tracks.iter().any(|t| t.pointer_id == id) {
                        return Err(out_of_order);
                    }
                    if contact.joined >= 2 {
                        self.ignored.push(id);
                        return Err(GestureError::TooManyPointers { pointer_id: id });
                    }
                }
                Ok(())
            }
            Phase::Move | Phase::Up => {
                let track = self
                    .contact
                    .as_ref()
                    .and_then(|c| c.tracks.iter().find(|t| t.pointer_id == id));
                match track {
                    Some(t) if !t.lifted => {
                        let last = t.last().t_ms;
                        if sample.t_ms < last {
                            Err(GestureError::TimeReversal {
                                pointer_id: id,
                                t_ms: sample.t_ms,
                                last_ms: last,
                            })
                        } else {
                            Ok(())
                        }
                    }
                    _ => Err(out_of_order),
                }
            }
        }
    }

    fn reset_pointer(&mut self, pointer_id: u32) {
        if let Some(contact) = self.contact.as_mut() {
            let before = contact.tracks.len();
            contact.tracks.retain(|t| t.pointer_id != pointer_id);
            if contact.tracks.len() != before {
                contact.poisoned = true;
            }
            if contact.tracks.is_empty() || contact.tracks.iter().all(|t| t.lifted) {
                self.contact = None;
            }
        }
    }

    /// Pointer ids still down (for end-of-trace checks).
    fn open_pointers(&self) -> Vec<u32> {
        self.contact
            .as_ref()
            .map(|c| {
                c.tracks
                    .iter()
                    .filter(|t| !t.lifted)
                    .map(|t| t.pointer_id)
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Anchor for stationary gestures: the pixel containing the sample mean.
fn pixel_anchor(samples: &[PointerSample]) -> Point {
    let pts: Vec<Point> = samples.iter().map(|s| s.pos()).collect();
    let m = vertex_mean(&pts);
    Point::new(m.x.floor(), m.y.floor())
}

fn classify_contact(contact: &Contact, cfg: &GestureConfig) -> Option<Gesture> {
    let duration_ms = contact.end_ms() - contact.start_ms();
    match contact.tracks.as_slice() {
        [track] => classify_single(track, duration_ms, cfg),
        [a, b] => classify_pair(a, b, duration_ms, cfg),
        _ => None,
    }
}

fn classify_single(track: &Track, duration_ms: u64, cfg: &GestureConfig) -> Option<Gesture> {
    let start = track.first();
    let region = Region::of_row(start.y_px, cfg.seam_row);
    if track.excursion() < cfg.move_tolerance_px {
        if duration_ms <= cfg.tap_max_ms {
            let anchor = pixel_anchor(&track.samples);
            return Some(Gesture {
                kind: GestureKind::Tap,
                direction: Direction::None,
                region: Region::of_row(anchor.y, cfg.seam_row),
                anchor_px: anchor,
                path_px: Vec::new(),
                duration_ms,
            });
        }
        if duration_ms >= cfg.long_press_ms {
            let anchor = pixel_anchor(&track.samples);
            return Some(Gesture {
                kind: GestureKind::LongPress,
                direction: Direction::None,
                region: Region::of_row(anchor.y, cfg.seam_row),
                anchor_px: anchor,
                path_px: Vec::new(),
                duration_ms,
            });
        }
        // Held too long for a tap, released before a long-press.
        return None;
    }
    let path: Vec<Point> = track.samples.iter().map(|s| s.pos()).collect();
    let closed = track.last().pos().dist(start.pos()) <= cfg.lasso_closure_px;
    if closed && track.samples.len() >= cfg.lasso_min_samples {
        let anchor = vertex_mean(&path);
        Some(Gesture {
            kind: GestureKind::Lasso,
            direction: Direction::None,
            region: Region::of_row(anchor.y, cfg.seam_row),
            anchor_px: anchor,
            path_px: path,
            duration_ms,
        })
    } else {
        Some(Gesture {
            kind: GestureKind::Drag,
            direction: dominant_direction(track.last().pos().sub(start.pos())),
            region,
            anchor_px: start.pos(),
            path_px: path,
            duration_ms,
        })
    }
}

fn classify_pair(a: &Track, b: &Track, duration_ms: u64, cfg: &GestureConfig) -> Option<Gesture> {
    let (a0, a1) = (a.first().pos(), a.last().pos());
    let (b0, b1) = (b.first().pos(), b.last().pos());
    let mean = a1.sub(a0).add(b1.sub(b0)).scale(0.5);
    let spread = a1.dist(b1) - a0.dist(b0);
    let axis = mean.x.abs().max(mean.y.abs());
    let start = a0.add(b0).scale(0.5);
    let end = a1.add(b1).scale(0.5);
    let region = Region::of_row(start.y, cfg.seam_row);
    let (kind, direction) = if spread.abs() >= cfg.stroke_min_px && spread.abs() > axis {
        let dir = if spread > 0.0 {
            Direction::Out
        } else {
            Direction::In
        };
        (GestureKind::Pinch, dir)
    } else if axis >= cfg.stroke_min_px {
        (GestureKind::TwoFingerStroke, dominant_direction(mean))
    } else {
        return None;
    };
    Some(Gesture {
        kind,
        direction,
        region,
        anchor_px: start,
        path_px: vec![start, end],
        duration_ms,
    })
}

/// Dominant axis of a displacement in image coordinates (y grows downward).
pub fn dominant_direction(d: Point) -> Direction {
    if d.x == 0.0 && d.y == 0.0 {
        Direction::None
    } else if d.x.abs() > d.y.abs() {
        if d.x > 0.0 {
            Direction::Right
        } else {
            Direction::Left
        }
    } else if d.y > 0.0 {
        Direction::Down
    } else {
        Direction::Up
    }
}

/// Batch classification: identical to feeding [`GestureEngine::ingest`] in order.
pub fn classify_trace(trace: &[PointerSample], config: GestureConfig) -> Result<Vec<Gesture>, TraceError> {
    let mut engine = GestureEngine::new(config);
    let mut out = Vec::new();
    for (index, sample) in trace.iter().enumerate() {
        match engine.ingest(*sample) {
            Ok(Some(g)) => out.push(g),
            Ok(None) => {}
            Err(source) => return Err(TraceError { index, source }),
        }
    }
    if let Some(&pointer_id) = engine.open_pointers().first() {
        let index = trace
            .iter()
            .rposition(|s| s.pointer_id == pointer_id)
            .unwrap_or(0);
        return Err(TraceError {
            index,
            source: GestureError::Unterminated { pointer_id },
        });
    }
    Ok(out)
}

/// A gesture placed on a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedIntent {
    pub gesture: Gesture,
    pub target: Option<String>,
    pub target_part: Option<String>,
    /// Ground point (world mm) under a Lower-region one-finger gesture that
    /// missed every object.
    pub ground_hit: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("gesture anchor ({x}, {y}) lies outside the {width}x{height} frame")]
    AnchorOutOfFrame { x: f64, y: f64, width: u32, height: u32 },
}

pub fn route(gesture: &Gesture, frame: &SceneFrame) -> Result<RoutedIntent, RouteError> {
    let a = gesture.anchor_px;
    if !(a.x >= 0.0 && a.y >= 0.0 && a.x < frame.width as f64 && a.y < frame.height as f64) {
        return Err(RouteError::AnchorOutOfFrame {
            x: a.x,
            y: a.y,
            width: frame.width,
            height: frame.height,
        });
    }
    let mut gesture = gesture.clone();
    gesture.region = Region::of_row(a.y, frame.seam_row as f64);
    if gesture.kind.is_two_finger() {
        return Ok(RoutedIntent {
            gesture,
            target: None,
            target_part: None,
            ground_hit: None,
        });
    }
    let hit = view::hit_test(frame, a).filter(|(id, _)| id != GROUND_ID);
    let (target, target_part) = match hit {
        Some((id, part)) => (Some(id), part),
        None => (None, None),
    };
    let ground_hit = if target.is_none() && gesture.region == Region::Lower {
        view::back_project_ground(frame, a).ok().flatten()
    } else {
        None
    };
    Ok(RoutedIntent {
        gesture,
        target,
        target_part,
        ground_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Phase::*;

    fn s(id: u32, phase: Phase, x: f64, y: f64, t: u64) -> PointerSample {
        PointerSample::new(id, phase, x, y, t)
    }

    #[test]
    fn tap_is_emitted_on_up() {
        let mut e = GestureEngine::default();
        assert_eq!(e.ingest(s(0, Down, 100.0, 400.0, 0)).unwrap(), None);
        let g = e.ingest(s(0, Up, 102.0, 401.0, 180)).unwrap().unwrap();
        assert_eq!(g.kind, GestureKind::Tap);
        assert_eq!(g.anchor_px, Point::new(101.0, 400.0));
        assert!(g.path_px.is_empty());
        assert_eq!(g.duration_ms, 180);
    }

    #[test]
    fn long_press_fires_on_timer_and_only_once() {
        let mut e = GestureEngine::default();
        e.ingest(s(0, Down, 100.0, 400.0, 0)).unwrap();
        assert_eq!(e.poll(499), None);
        let g = e.poll(600).unwrap();
        assert_eq!(g.kind, GestureKind::LongPress);
        assert!(g.path_px.is_empty());
        assert_eq!(e.poll(700), None);
        assert_eq!(e.ingest(s(0, Up, 100.0, 400.0, 800)).unwrap(), None);
        assert!(!e.is_active());
    }

    #[test]
    fn long_press_from_late_up() {
        let mut e = GestureEngine::default();
        e.ingest(s(0, Down, 50.0, 50.0, 0)).unwrap();
        let g = e.ingest(s(0, Up, 51.0, 50.0, 700)).unwrap().unwrap();
        assert_eq!(g.kind, GestureKind::LongPress);
    }

    #[test]
    fn indecisive_hold_yields_nothing() {
        let mut e = GestureEngine::default();
        e.ingest(s(0, Down, 50.0, 50.0, 0)).unwrap();
        assert_eq!(e.ingest(s(0, Up, 50.0, 50.0, 400)).unwrap(), None);
    }

    #[test]
    fn drag_is_open_path() {
        let trace = vec![
            s(0, Down, 100.0, 100.0, 0),
            s(0, Move, 130.0, 102.0, 20),
            s(0, Move, 160.0, 104.0, 40),
            s(0, Up, 200.0, 105.0, 60),
        ];
        let out = classify_trace(&trace, GestureConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, GestureKind::Drag);
        assert_eq!(out[0].direction, Direction::Right);
        assert_eq!(out[0].anchor_px, Point::new(100.0, 100.0));
        assert_eq!(out[0].path_px.len(), 4);
    }

    #[test]
    fn two_finger_downward_stroke_in_lower_region() {
        let mut trace = vec![s(0, Down, 370.0, 700.0, 0), s(1, Down, 430.0, 700.0, 5)];
        for k in 1..=8 {
            let y = 700.0 + 10.0 * k as f64;
            trace.push(s(0, Move, 370.0, y, 5 + 10 * k));
            trace.push(s(1, Move, 430.0, y, 6 + 10 * k));
        }
        trace.push(s(0, Up, 370.0, 780.0, 100));
        trace.push(s(1, Up, 430.0, 780.0, 101));
        let out = classify_trace(&trace, GestureConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, GestureKind::TwoFingerStroke);
        assert_eq!(out[0].direction, Direction::Down);
        assert_eq!(out[0].region, Region::Lower);
    }

    #[test]
    fn pinch_out() {
        let trace = vec![
            s(0, Down, 380.0, 200.0, 0),
            s(1, Down, 420.0, 200.0, 0),
            s(0, Move, 340.0, 200.0, 50),
            s(1, Move, 460.0, 200.0, 50),
            s(0, Up, 330.0, 200.0, 90),
            s(1, Up, 470.0, 200.0, 90),
        ];
        let out = classify_trace(&trace, GestureConfig::default()).unwrap();
        assert_eq!(out[0].kind, GestureKind::Pinch);
        assert_eq!(out[0].direction, Direction::Out);
        assert_eq!(out[0].region, Region::Upper);
    }

    #[test]
    fn out_of_order_sample_is_rejected_and_pointer_reset() {
        let mut e = GestureEngine::default();
        let err = e.ingest(s(3, Move, 1.0, 1.0, 0)).unwrap_err();
        assert!(matches!(err, GestureError::OutOfOrder { pointer_id: 3, .. }));
        e.ingest(s(0, Down, 10.0, 10.0, 0)).unwrap();
        let err = e.ingest(s(0, Down, 10.0, 10.0, 5)).unwrap_err();
        assert!(matches!(err, GestureError::OutOfOrder { .. }));
        assert!(!e.is_active());
        // The engine is usable again afterwards.
        e.ingest(s(0, Down, 10.0, 10.0, 10)).unwrap();
        let g = e.ingest(s(0, Up, 10.0, 10.0, 50)).unwrap().unwrap();
        assert_eq!(g.kind, GestureKind::Tap);
    }

    #[test]
    fn time_reversal_is_rejected() {
        let mut e = GestureEngine::default();
        e.ingest(s(0, Down, 10.0, 10.0, 100)).unwrap();
        let err = e.ingest(s(0, Up, 10.0, 10.0, 50)).unwrap_err();
        assert!(matches!(err, GestureError::TimeReversal { .. }));
    }

    #[test]
    fn classify_trace_reports_first_bad_index() {
        let trace = vec![
            s(0, Down, 10.0, 10.0, 0),
            s(0, Up, 10.0, 10.0, 50),
            s(0, Up, 10.0, 10.0, 60),
        ];
        let err = classify_trace(&trace, GestureConfig::default()).unwrap_err();
        assert_eq!(err.index, 2);
        let open = vec![s(0, Down, 10.0, 10.0, 0), s(0, Move, 11.0, 10.0, 5)];
        let err = classify_trace(&open, GestureConfig::default()).unwrap_err();
        assert_eq!(err.index, 1);
        assert!(matches!(err.source, GestureError::Unterminated { .. }));
    }

    #[test]
    fn empty_trace() {
        assert!(classify_trace(&[], GestureConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn third_finger_is_refused() {
        let mut e = GestureEngine::default();
        e.ingest(s(0, Down, 10.0, 10.0, 0)).unwrap();
        e.ingest(s(1, Down, 60.0, 10.0, 0)).unwrap();
        let err = e.ingest(s(2, Down, 90.0, 10.0, 1)).unwrap_err();
        assert!(matches!(err, GestureError::TooManyPointers { pointer_id: 2 }));
        assert_eq!(e.ingest(s(2, Up, 90.0, 10.0, 2)).unwrap(), None);
    }

    #[test]
    fn direction_ties_go_vertical() {
        assert_eq!(dominant_direction(Point::new(5.0, 5.0)), Direction::Down);
        assert_eq!(dominant_direction(Point::new(-6.0, 5.0)), Direction::Left);
    }
}
