//! Operator-drawn markers anchored to the ground plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_segment_distance, segment_hits_polygon, segments_intersect, Point};
use crate::view::{back_project_ground, CameraRig, MarkerKind, Overlay, SceneFrame};
use crate::world::{Command, RobotState, Verb, WorldState};

pub const SAVE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub id: u64,
    pub kind: MarkerKind,
    pub world_polyline: Vec<Point>,
    /// Simulation time of creation.
    pub created_at: u64,
}

impl Marker {
    pub fn is_region(&self) -> bool {
        self.kind == MarkerKind::Obstacle && self.world_polyline.len() >= 3
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KnowledgeError {
    #[error("marker stroke is empty")]
    EmptyStroke,
    #[error("stroke point {index} does not reach the ground")]
    NoGround { index: usize },
    #[error("session save: {0}")]
    BadSave(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Advisory {
    Clear,
    Warning(u64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkerStore {
    pub markers: Vec<Marker>,
    pub next_id: u64,
}

#[derive(Serialize, Deserialize)]
struct SaveFile {
    version: u32,
    markers: Vec<Marker>,
    next_id: u64,
}

impl MarkerStore {
    /// Back-projects a stroke drawn on `frame` and stores it.
    pub fn add_marker(
        &mut self,
        stroke_px: &[Point],
        kind: MarkerKind,
        frame: &SceneFrame,
    ) -> Result<Marker, KnowledgeError> {
        if stroke_px.is_empty() {
            return Err(KnowledgeError::EmptyStroke);
        }
        let mut world_polyline = Vec::with_capacity(stroke_px.len());
        for (index, p) in stroke_px.iter().enumerate() {
            match back_project_ground(frame, *p) {
                Ok(Some(g)) => world_polyline.push(g),
                _ => return Err(KnowledgeError::NoGround { index }),
            }
        }
        let marker = Marker {
            id: self.next_id,
            kind,
            world_polyline,
            created_at: frame.sim_time_ms,
        };
        self.next_id += 1;
        self.markers.push(marker.clone());
        Ok(marker)
    }

    /// DF-layer overlays for every marker with at least one visible point.
    pub fn overlays(&self, rig: &CameraRig, robot: &RobotState) -> Vec<Overlay> {
        self.markers
            .iter()
            .filter_map(|m| {
                let points_px: Vec<Point> = m
                    .world_polyline
                    .iter()
                    .filter_map(|p| rig.project_df(robot, [p.x, p.y, 0.0]))
                    .collect();
                (!points_px.is_empty()).then_some(Overlay::Marker {
                    marker_id: m.id,
                    kind: m.kind,
                    points_px,
                })
            })
            .collect()
    }

    pub fn advisory_check(&self, world: &WorldState, cmd: &Command) -> Advisory {
        advisory_check(world, cmd, &self.markers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SaveFile {
            version: SAVE_VERSION,
            markers: self.markers.clone(),
            next_id: self.next_id,
        })
        .expect("markers are always serializable")
    }

    pub fn from_json(text: &str) -> Result<MarkerStore, KnowledgeError> {
        let save: SaveFile =
            serde_json::from_str(text).map_err(|e| KnowledgeError::BadSave(e.to_string()))?;
        if save.version != SAVE_VERSION {
            return Err(KnowledgeError::BadSave(format!(
                "unsupported version {}",
                save.version
            )));
        }
        if save.markers.iter().any(|m| m.id >= save.next_id) {
            return Err(KnowledgeError::BadSave("marker id not below next_id".into()));
        }
        Ok(MarkerStore {
            markers: save.markers,
            next_id: save.next_id,
        })
    }
}

/// Warns when a base step's centre sweep touches an obstacle marker. Never
/// blocks and never mutates.
pub fn advisory_check(world: &WorldState, cmd: &Command, markers: &[Marker]) -> Advisory {
    let sign = match cmd.verb {
        Verb::StepForward => 1.0,
        Verb::StepBackward => -1.0,
        Verb::StepTurnLeft | Verb::StepTurnRight => 0.0,
        _ => return Advisory::Clear,
    };
    let a = world.robot.position();
    let b = a.add(world.robot.forward().scale(sign * world.params.step_mm));
    for m in markers.iter().filter(|m| m.kind == MarkerKind::Obstacle) {
        let pl = &m.world_polyline;
        let hit = if m.is_region() {
            segment_hits_polygon(a, b, pl)
        } else if pl.len() == 1 {
            point_segment_distance(pl[0], a, b) < 1e-9
        } else {
            pl.windows(2).any(|s| segments_intersect(a, b, s[0], s[1]))
        };
        if hit {
            return Advisory::Warning(m.id);
        }
    }
    Advisory::Clear
}
