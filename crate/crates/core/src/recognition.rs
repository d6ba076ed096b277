//! Object recognition from a lassoed region, and frame-to-frame tracking of
//! a locked object.
//!
//! Recognizers plug in through [`Recognizer`]. The bundled one reads the
//! simulated 2D-barcode tags that the view pipeline draws as `tag` parts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{area, centroid, point_in_polygon, BBox, Point};
use crate::view::{Layer, SceneFrame, TAG_PART};
use crate::world::ObjectId;

pub const MIN_LASSO_AREA_PX2: f64 = 100.0;
pub const LOSS_WINDOW: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub object_id: ObjectId,
    pub image_bbox: BBox,
    /// Sub-elements in image space, for objects that have any.
    pub panel_layout: Option<Vec<(String, Vec<Point>)>>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecognitionError {
    #[error("lasso area {area_px2:.1} px² is below {MIN_LASSO_AREA_PX2} px²")]
    Degenerate { area_px2: f64 },
}

/// A recognizer maps (frame, closed lasso polygon) to at most one object.
/// Implementations must be pure in their inputs.
pub trait Recognizer {
    fn recognize(
        &self,
        frame: &SceneFrame,
        lasso: &[Point],
    ) -> Result<Option<RecognitionResult>, RecognitionError>;
}

/// Resolves lassos through the tag billboards in the frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct TagRegistryRecognizer;

impl Recognizer for TagRegistryRecognizer {
    fn recognize(
        &self,
        frame: &SceneFrame,
        lasso: &[Point],
    ) -> Result<Option<RecognitionResult>, RecognitionError> {
        recognize(frame, lasso)
    }
}

/// Tag-registry recognition. When several tags are enclosed, the one nearest
/// the lasso centroid wins; ties go to the earlier primitive.
pub fn recognize(frame: &SceneFrame, lasso: &[Point]) -> Result<Option<RecognitionResult>, RecognitionError> {
    let a = area(lasso);
    if a < MIN_LASSO_AREA_PX2 {
        return Err(RecognitionError::Degenerate { area_px2: a });
    }
    let c = centroid(lasso);
    let mut best: Option<(f64, &str)> = None;
    for prim in frame.layer(Layer::FF) {
        if prim.part_id.as_deref() != Some(TAG_PART) {
            continue;
        }
        let anchor = centroid(&prim.polygon_px);
        if !point_in_polygon(anchor, lasso) {
            continue;
        }
        let d = anchor.dist(c);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, &prim.object_id));
        }
    }
    let Some((_, id)) = best else {
        return Ok(None);
    };
    let image_bbox = frame
        .object_bbox(id, Layer::FF)
        .expect("the tag itself is an FF primitive");
    let buttons: Vec<(String, Vec<Point>)> = frame
        .layer(Layer::FF)
        .filter(|p| p.object_id == id && p.style == "panel:button")
        .filter_map(|p| Some((p.part_id.clone()?, p.polygon_px.clone())))
        .collect();
    Ok(Some(RecognitionResult {
        object_id: id.to_string(),
        image_bbox,
        panel_layout: (!buttons.is_empty()).then_some(buttons),
        confidence: 1.0,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrackUpdate {
    Visible(BBox),
    /// Not visible, but still inside the loss window.
    Occluded {
        missed: u32,
    },
    Lost,
}

/// Follows one locked object across frames. Reports `Lost` once per loss
/// episode, after which the tracker is idle until relocked.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracker {
    locked: Option<ObjectId>,
    missed: u32,
    loss_window: u32,
}

impl Default for Tracker {
    fn default() -> Self {
        Self::new(LOSS_WINDOW)
    }
}

impl Tracker {
    pub fn new(loss_window: u32) -> Self {
        Self {
            locked: None,
            missed: 0,
            loss_window: loss_window.max(1),
        }
    }

    pub fn lock(&mut self, id: ObjectId) {
        self.locked = Some(id);
        self.missed = 0;
    }

    pub fn release(&mut self) {
        self.locked = None;
        self.missed = 0;
    }

    pub fn locked(&self) -> Option<&str> {
        self.locked.as_deref()
    }

    /// `None` while idle.
    pub fn track(&mut self, frame: &SceneFrame) -> Option<TrackUpdate> {
        let id = self.locked.as_ref()?;
        if let Some(b) = frame.object_bbox(id, Layer::FF) {
            self.missed = 0;
            return Some(TrackUpdate::Visible(b));
        }
        self.missed += 1;
        if self.missed >= self.loss_window {
            self.release();
            Some(TrackUpdate::Lost)
        } else {
            Some(TrackUpdate::Occluded { missed: self.missed })
        }
    }
}
