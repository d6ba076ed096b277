//! FF/DF camera models and the stitched FDF frame.
//!
//! World frame: x/y on the ground (mm), z up. The forward-facing camera is a
//! pinhole on the pan-tilt head at the top of the post. The downward-facing
//! camera is an equidistant fisheye looking straight down, fixed to the base
//! heading. The FDF canvas stacks the FF image on top of the DF image: FF
//! primitives are clipped to rows `[0, seam + overlap)`, DF primitives to
//! `[seam - overlap, height)`, and FF primitives come later in the list so
//! they win hit tests inside the overlap band. No blending happens anywhere.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{area, circle_polygon, clip_to_rect, convex_hull, point_in_polygon, BBox, Point};
use crate::world::{Actuation, ObjectClass, RobotState, TeleObjectRecord, WorldState};

pub const GROUND_ID: &str = "ground";
pub const TAG_PART: &str = "tag";
pub const CLOTH_PART: &str = "cloth";
pub const TAG_SIZE_MM: f64 = 80.0;
pub const CUP_HEIGHT_MM: f64 = 110.0;
const NEAR_MM: f64 = 10.0;
const EDGE_SUBDIVISIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeCamera {
    pub focal_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Mount offset ahead of the base centre.
    pub mount_forward_mm: f64,
    /// Mount offset below the post top.
    pub mount_drop_mm: f64,
}

impl PinholeCamera {
    /// Camera-frame point (X right, Y down, Z along the optical axis) to
    /// image pixels, ignoring image bounds.
    pub fn project_unbounded(&self, v: &Vector3<f64>, zoom: f64) -> Option<Point> {
        if v.z <= 0.0 {
            return None;
        }
        let f = self.focal_px * zoom;
        Some(Point::new(f * v.x / v.z + self.cx, f * v.y / v.z + self.cy))
    }

    pub fn project(&self, v: &Vector3<f64>, zoom: f64) -> Option<Point> {
        self.project_unbounded(v, zoom)
            .filter(|p| in_image(*p, self.width, self.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisheyeCamera {
    /// Equidistant scale: image radius per radian off-axis.
    pub f_theta: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub fov_deg: f64,
    pub mount_forward_mm: f64,
    pub mount_drop_mm: f64,
}

impl FisheyeCamera {
    fn half_fov(&self) -> f64 {
        self.fov_deg.to_radians() / 2.0
    }

    /// Camera-frame point to image pixels: r = f_theta * theta, azimuth kept.
    pub fn project(&self, v: &Vector3<f64>) -> Option<Point> {
        let rho = v.x.hypot(v.y);
        let theta = rho.atan2(v.z);
        if theta > self.half_fov() || (rho == 0.0 && v.z <= 0.0) {
            return None;
        }
        let p = if rho == 0.0 {
            Point::new(self.cx, self.cy)
        } else {
            let r = self.f_theta * theta;
            Point::new(self.cx + r * v.x / rho, self.cy + r * v.y / rho)
        };
        in_image(p, self.width, self.height).then_some(p)
    }

    /// Unit viewing ray for an image pixel, or none beyond the field of view.
    pub fn unproject(&self, p: Point) -> Option<Vector3<f64>> {
        let (dx, dy) = (p.x - self.cx, p.y - self.cy);
        let r = dx.hypot(dy);
        let theta = r / self.f_theta;
        if theta > self.half_fov() {
            return None;
        }
        if r == 0.0 {
            return Some(Vector3::new(0.0, 0.0, 1.0));
        }
        let s = theta.sin();
        Some(Vector3::new(s * dx / r, s * dy / r, theta.cos()))
    }
}

fn in_image(p: Point, w: u32, h: u32) -> bool {
    p.x >= 0.0 && p.y >= 0.0 && p.x < w as f64 && p.y < h as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub ff: PinholeCamera,
    pub df: FisheyeCamera,
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub seam_row: u32,
    pub overlap_rows: u32,
}

impl Default for CameraRig {
    fn default() -> Self {
        Self {
            ff: PinholeCamera {
                focal_px: 700.0,
                cx: 400.0,
                cy: 270.0,
                width: 800,
                height: 540,
                mount_forward_mm: 50.0,
                mount_drop_mm: 0.0,
            },
            df: FisheyeCamera {
                f_theta: 180.0,
                cx: 400.0,
                cy: 310.0,
                width: 800,
                height: 620,
                fov_deg: 180.0,
                mount_forward_mm: 150.0,
                mount_drop_mm: 100.0,
            },
            canvas_width: 800,
            canvas_height: 1000,
            seam_row: 440,
            overlap_rows: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ViewError {
    #[error("pixel ({x}, {y}) is outside the canvas")]
    OutOfCanvas { x: f64, y: f64 },
    #[error("pixel ({x}, {y}) lies in the FF-only band above row {df_top}")]
    FfOnlyRegion { x: f64, y: f64, df_top: u32 },
    #[error("invalid camera rig: {0}")]
    InvalidRig(String),
}

/// Orthonormal camera pose; `axes` are the camera X, Y, Z in world coordinates.
#[derive(Debug, Clone, Copy)]
struct Pose {
    origin: Vector3<f64>,
    axes: [Vector3<f64>; 3],
}

impl Pose {
    fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = p - self.origin;
        Vector3::new(d.dot(&self.axes[0]), d.dot(&self.axes[1]), d.dot(&self.axes[2]))
    }

    fn to_world(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.axes[0] * v.x + self.axes[1] * v.y + self.axes[2] * v.z
    }
}

impl CameraRig {
    pub fn validate(&self) -> Result<(), ViewError> {
        let bad = |m: &str| Err(ViewError::InvalidRig(m.into()));
        if !(self.ff.focal_px > 0.0) || !(self.df.f_theta > 0.0) {
            return bad("focal lengths must be positive");
        }
        if self.df.fov_deg < 160.0 {
            return bad("fisheye field of view must be at least 160 degrees");
        }
        if self.overlap_rows > self.seam_row {
            return bad("overlap exceeds seam row");
        }
        if self.df_top() + self.df.height != self.canvas_height {
            return bad("DF image must fill the canvas from seam - overlap to the bottom");
        }
        if self.ff.height < self.ff_bottom() || self.ff.width != self.canvas_width {
            return bad("FF image must cover rows [0, seam + overlap) at canvas width");
        }
        Ok(())
    }

    /// First canvas row of the DF layer.
    pub fn df_top(&self) -> u32 {
        self.seam_row - self.overlap_rows
    }

    /// Canvas row bounding the FF layer (exclusive).
    pub fn ff_bottom(&self) -> u32 {
        self.seam_row + self.overlap_rows
    }

    fn ff_rect(&self) -> BBox {
        BBox {
            min_x: 0.0,
            min_y: 0.0,
            max_x: self.canvas_width as f64,
            max_y: self.ff_bottom() as f64,
        }
    }

    fn df_rect(&self) -> BBox {
        BBox {
            min_x: 0.0,
            min_y: self.df_top() as f64,
            max_x: self.canvas_width as f64,
            max_y: self.canvas_height as f64,
        }
    }

    fn ff_pose(&self, robot: &RobotState) -> Pose {
        let h = robot.heading_deg.to_radians();
        let yaw = (robot.heading_deg + robot.pan_deg).to_radians();
        let pitch = robot.tilt_deg.to_radians();
        let origin = Vector3::new(
            robot.x_mm + self.ff.mount_forward_mm * h.cos(),
            robot.y_mm + self.ff.mount_forward_mm * h.sin(),
            robot.post_height_mm - self.ff.mount_drop_mm,
        );
        let forward = Vector3::new(yaw.cos() * pitch.cos(), yaw.sin() * pitch.cos(), pitch.sin());
        let right = Vector3::new(yaw.sin(), -yaw.cos(), 0.0);
        let down = Vector3::new(yaw.cos() * pitch.sin(), yaw.sin() * pitch.sin(), -pitch.cos());
        Pose {
            origin,
            axes: [right, down, forward],
        }
    }

    fn df_pose(&self, robot: &RobotState) -> Pose {
        let h = robot.heading_deg.to_radians();
        let origin = Vector3::new(
            robot.x_mm + self.df.mount_forward_mm * h.cos(),
            robot.y_mm + self.df.mount_forward_mm * h.sin(),
            robot.post_height_mm - self.df.mount_drop_mm,
        );
        // Image up is robot forward; image right is robot right.
        let right = Vector3::new(h.sin(), -h.cos(), 0.0);
        let back = Vector3::new(-h.cos(), -h.sin(), 0.0);
        let down = Vector3::new(0.0, 0.0, -1.0);
        Pose {
            origin,
            axes: [right, back, down],
        }
    }

    /// World point to FF canvas pixel; none if behind the camera or off-image.
    pub fn project_ff(&self, robot: &RobotState, p: [f64; 3]) -> Option<Point> {
        let v = self.ff_pose(robot).to_camera(&Vector3::from(p));
        self.ff.project(&v, robot.zoom_factor)
    }

    /// World point to DF canvas pixel; none beyond half the field of view.
    pub fn project_df(&self, robot: &RobotState, p: [f64; 3]) -> Option<Point> {
        let v = self.df_pose(robot).to_camera(&Vector3::from(p));
        self.df
            .project(&v)
            .map(|q| Point::new(q.x, q.y + self.df_top() as f64))
    }

    /// Inverse fisheye ray through a DF canvas pixel, intersected with z = 0.
    /// `Ok(None)` when the ray does not descend (at or above the horizon).
    pub fn back_project_ground(&self, robot: &RobotState, px: Point) -> Result<Option<Point>, ViewError> {
        if !in_image(px, self.canvas_width, self.canvas_height) {
            return Err(ViewError::OutOfCanvas { x: px.x, y: px.y });
        }
        if px.y < self.df_top() as f64 {
            return Err(ViewError::FfOnlyRegion {
                x: px.x,
                y: px.y,
                df_top: self.df_top(),
            });
        }
        let local = Point::new(px.x, px.y - self.df_top() as f64);
        let Some(ray) = self.df.unproject(local) else {
            return Ok(None);
        };
        // Camera Z points straight down, so descent rate is ray.z.
        if ray.z <= 1e-9 {
            return Ok(None);
        }
        let pose = self.df_pose(robot);
        let t = pose.origin.z / ray.z;
        let hit = pose.to_world(&(ray * t));
        Ok(Some(Point::new(hit.x, hit.y)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    FF,
    DF,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub object_id: String,
    pub part_id: Option<String>,
    pub polygon_px: Vec<Point>,
    pub layer: Layer,
    pub style: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkerKind {
    Obstacle,
    RouteEdge,
    Door,
}

/// Session-level decorations drawn above the primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "overlay")]
pub enum Overlay {
    /// Green box around the locked object.
    LockBox {
        object_id: String,
        bbox: BBox,
    },
    /// Red echo of the lasso awaiting recognition.
    LassoEcho {
        path_px: Vec<Point>,
    },
    Marker {
        marker_id: u64,
        kind: MarkerKind,
        points_px: Vec<Point>,
    },
    Advisory {
        marker_id: u64,
    },
    Hint {
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    pub frame_id: u64,
    pub sim_time_ms: u64,
    pub width: u32,
    pub height: u32,
    pub seam_row: u32,
    pub overlap_rows: u32,
    /// Pose the frame was rendered from (needed to back-project).
    pub robot: RobotState,
    pub rig: CameraRig,
    pub primitives: Vec<Primitive>,
    pub overlays: Vec<Overlay>,
}

impl SceneFrame {
    pub fn layer(&self, layer: Layer) -> impl Iterator<Item = &Primitive> {
        self.primitives.iter().filter(move |p| p.layer == layer)
    }

    /// Bounding box of an object's primitives in one layer.
    pub fn object_bbox(&self, object_id: &str, layer: Layer) -> Option<BBox> {
        self.layer(layer)
            .filter(|p| p.object_id == object_id)
            .filter_map(|p| BBox::of(&p.polygon_px))
            .reduce(BBox::union)
    }
}

/// Topmost primitive containing `px`.
pub fn hit_test(frame: &SceneFrame, px: Point) -> Option<(String, Option<String>)> {
    frame
        .primitives
        .iter()
        .rev()
        .find(|p| point_in_polygon(px, &p.polygon_px))
        .map(|p| (p.object_id.clone(), p.part_id.clone()))
}

pub fn back_project_ground(frame: &SceneFrame, px: Point) -> Result<Option<Point>, ViewError> {
    frame.rig.back_project_ground(&frame.robot, px)
}

/// Renders the world into a frame. Pure in (world, rig, frame_id).
pub fn compose_frame(world: &WorldState, rig: &CameraRig, frame_id: u64) -> SceneFrame {
    let robot = &world.robot;
    let mut primitives = Vec::new();

    // DF layer: ground disc, then footprints.
    let df_rect = rig.df_rect();
    let horizon = rig.df.f_theta * rig.df.half_fov().min(FRAC_PI_2);
    let center = Point::new(rig.df.cx, rig.df.cy + rig.df_top() as f64);
    let ground = clip_to_rect(&circle_polygon(center, horizon, 72), df_rect);
    if ground.len() >= 3 {
        primitives.push(Primitive {
            object_id: GROUND_ID.into(),
            part_id: None,
            polygon_px: ground,
            layer: Layer::DF,
            style: "ground".into(),
        });
    }
    for obj in &world.objects {
        if let Some(fp) = visible_footprint(obj) {
            if let Some(poly) = project_ground_polygon(rig, robot, &fp) {
                primitives.push(Primitive {
                    object_id: obj.id.clone(),
                    part_id: None,
                    polygon_px: poly,
                    layer: Layer::DF,
                    style: format!("footprint:{}", obj.class.style()),
                });
            }
        }
    }
    for (i, cup) in world.obstacles.iter().enumerate() {
        let ring = circle_polygon(cup.center(), cup.radius_mm, 12);
        if let Some(poly) = project_ground_polygon(rig, robot, &ring) {
            primitives.push(Primitive {
                object_id: cup_id(i),
                part_id: None,
                polygon_px: poly,
                layer: Layer::DF,
                style: "footprint:cup".into(),
            });
        }
    }

    // FF layer, far to near so nearer things end up on top.
    let pose = rig.ff_pose(robot);
    let mut ff_items: Vec<(f64, String, Vec<Primitive>)> = Vec::new();
    for obj in &world.objects {
        let prims = ff_object_primitives(rig, robot, obj);
        if !prims.is_empty() {
            let c = crate::geometry::vertex_mean(&obj.footprint);
            let depth = pose
                .to_camera(&Vector3::new(c.x, c.y, obj.height_mm / 2.0))
                .norm();
            ff_items.push((depth, obj.id.clone(), prims));
        }
    }
    for (i, cup) in world.obstacles.iter().enumerate() {
        let ring = circle_polygon(cup.center(), cup.radius_mm, 12);
        if let Some(poly) = project_prism_ff(rig, robot, &ring, 0.0, CUP_HEIGHT_MM) {
            let depth = pose
                .to_camera(&Vector3::new(cup.x_mm, cup.y_mm, CUP_HEIGHT_MM / 2.0))
                .norm();
            ff_items.push((
                depth,
                cup_id(i),
                vec![Primitive {
                    object_id: cup_id(i),
                    part_id: None,
                    polygon_px: poly,
                    layer: Layer::FF,
                    style: "cup".into(),
                }],
            ));
        }
    }
    ff_items.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    primitives.extend(ff_items.into_iter().flat_map(|(_, _, p)| p));

    SceneFrame {
        frame_id,
        sim_time_ms: world.sim_time_ms,
        width: rig.canvas_width,
        height: rig.canvas_height,
        seam_row: rig.seam_row,
        overlap_rows: rig.overlap_rows,
        robot: *robot,
        rig: *rig,
        primitives,
        overlays: Vec::new(),
    }
}

pub fn cup_id(index: usize) -> String {
    format!("cup_{index}")
}

/// Footprint as currently drawn: a sliding door shrinks as it opens.
fn visible_footprint(obj: &TeleObjectRecord) -> Option<Vec<Point>> {
    match &obj.actuation {
        Actuation::Door { openness, .. } if *openness > 0.0 => {
            if *openness >= 1.0 {
                return None;
            }
            let (a, b) = longest_edge(&obj.footprint);
            let shift = b.sub(a).scale(*openness);
            // Slide the far half of the slab towards `a`.
            Some(
                obj.footprint
                    .iter()
                    .map(|p| {
                        if p.sub(a).dot(b.sub(a)) > b.sub(a).dot(b.sub(a)) / 2.0 {
                            p.sub(shift)
                        } else {
                            *p
                        }
                    })
                    .collect(),
            )
        }
        _ => Some(obj.footprint.clone()),
    }
}

fn longest_edge(poly: &[Point]) -> (Point, Point) {
    let n = poly.len();
    (0..n)
        .map(|i| (poly[i], poly[(i + 1) % n]))
        .max_by(|x, y| x.0.dist(x.1).total_cmp(&y.0.dist(y.1)))
        .expect("footprints have at least three points")
}

fn project_ground_polygon(rig: &CameraRig, robot: &RobotState, poly: &[Point]) -> Option<Vec<Point>> {
    let n = poly.len();
    let mut pts = Vec::with_capacity(n * EDGE_SUBDIVISIONS);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for k in 0..EDGE_SUBDIVISIONS {
            let t = k as f64 / EDGE_SUBDIVISIONS as f64;
            let p = a.add(b.sub(a).scale(t));
            if let Some(q) = rig.project_df(robot, [p.x, p.y, 0.0]) {
                pts.push(q);
            }
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let clipped = clip_to_rect(&pts, rig.df_rect());
    (clipped.len() >= 3 && area(&clipped) > 0.0).then_some(clipped)
}

/// Projects a convex solid given by its 3D vertices and edges into the FF
/// layer: near-plane clip, project, hull, clip to the FF band.
fn project_solid_ff(
    rig: &CameraRig,
    robot: &RobotState,
    vertices: &[Vector3<f64>],
    edges: &[(usize, usize)],
) -> Option<Vec<Point>> {
    let pose = rig.ff_pose(robot);
    let cam: Vec<Vector3<f64>> = vertices.iter().map(|v| pose.to_camera(v)).collect();
    let mut kept: Vec<Vector3<f64>> = cam.iter().filter(|v| v.z >= NEAR_MM).copied().collect();
    for &(i, j) in edges {
        let (a, b) = (cam[i], cam[j]);
        if (a.z < NEAR_MM) != (b.z < NEAR_MM) {
            let t = (NEAR_MM - a.z) / (b.z - a.z);
            kept.push(a + (b - a) * t);
        }
    }
    let projected: Vec<Point> = kept
        .iter()
        .filter_map(|v| rig.ff.project_unbounded(v, robot.zoom_factor))
        .collect();
    if projected.len() < 3 {
        return None;
    }
    let hull = convex_hull(&projected);
    let clipped = clip_to_rect(&hull, rig.ff_rect());
    (clipped.len() >= 3 && area(&clipped) > 0.0).then_some(clipped)
}

fn project_prism_ff(
    rig: &CameraRig,
    robot: &RobotState,
    footprint: &[Point],
    z0: f64,
    z1: f64,
) -> Option<Vec<Point>> {
    let n = footprint.len();
    let mut vertices = Vec::with_capacity(2 * n);
    for z in [z0, z1] {
        vertices.extend(footprint.iter().map(|p| Vector3::new(p.x, p.y, z)));
    }
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        edges.push((i, j));
        edges.push((n + i, n + j));
        edges.push((i, n + i));
    }
    project_solid_ff(rig, robot, &vertices, &edges)
}

fn project_quad_ff(rig: &CameraRig, robot: &RobotState, quad: &[[f64; 3]; 4]) -> Option<Vec<Point>> {
    let vertices: Vec<Vector3<f64>> = quad.iter().map(|c| Vector3::from(*c)).collect();
    project_solid_ff(rig, robot, &vertices, &[(0, 1), (1, 2), (2, 3), (3, 0)])
}

/// Tag square facing the camera, centred on the projected anchor.
fn project_tag_ff(rig: &CameraRig, robot: &RobotState, obj: &TeleObjectRecord) -> Option<Vec<Point>> {
    let pose = rig.ff_pose(robot);
    let a = obj.tag_anchor;
    let v = pose.to_camera(&Vector3::new(a.x, a.y, obj.tag_height_mm));
    if v.z < NEAR_MM {
        return None;
    }
    let center = rig.ff.project_unbounded(&v, robot.zoom_factor)?;
    let half = rig.ff.focal_px * robot.zoom_factor * TAG_SIZE_MM / (2.0 * v.z);
    let square = vec![
        Point::new(center.x - half, center.y - half),
        Point::new(center.x + half, center.y - half),
        Point::new(center.x + half, center.y + half),
        Point::new(center.x - half, center.y + half),
    ];
    // Tags are only usable when fully in the FF band.
    let rect = rig.ff_rect();
    square.iter().all(|p| rect.contains(*p)).then_some(square)
}

fn ff_object_primitives(rig: &CameraRig, robot: &RobotState, obj: &TeleObjectRecord) -> Vec<Primitive> {
    let mut out = Vec::new();
    let prim = |part: Option<&str>, poly: Vec<Point>, style: String| Primitive {
        object_id: obj.id.clone(),
        part_id: part.map(str::to_string),
        polygon_px: poly,
        layer: Layer::FF,
        style,
    };
    if let Some(fp) = visible_footprint(obj) {
        if let Some(poly) = project_prism_ff(rig, robot, &fp, 0.0, obj.height_mm) {
            out.push(prim(None, poly, body_style(obj)));
        }
    }
    if let (ObjectClass::Curtain, Actuation::Curtain { openness, .. }) = (obj.class, &obj.actuation) {
        if *openness < 1.0 {
            let (a, b) = longest_edge(&obj.footprint);
            let e = a.add(b.sub(a).scale(1.0 - openness));
            let quad = [
                [a.x, a.y, obj.height_mm],
                [e.x, e.y, obj.height_mm],
                [e.x, e.y, 0.0],
                [a.x, a.y, 0.0],
            ];
            if let Some(poly) = project_quad_ff(rig, robot, &quad) {
                out.push(prim(Some(CLOTH_PART), poly, "curtain:cloth".into()));
            }
        }
    }
    if let Some(panel) = &obj.panel {
        for (part, quad) in panel.buttons() {
            if let Some(poly) = project_quad_ff(rig, robot, &quad) {
                out.push(prim(Some(&part), poly, "panel:button".into()));
            }
        }
    }
    if let Some(poly) = project_tag_ff(rig, robot, obj) {
        out.push(prim(Some(TAG_PART), poly, "tag".into()));
    }
    out
}

fn body_style(obj: &TeleObjectRecord) -> String {
    let base = obj.class.style();
    match &obj.actuation {
        Actuation::Light { on } => format!("{base}:{}", if *on { "on" } else { "off" }),
        Actuation::Door { openness, .. } if *openness > 0.0 => format!("{base}:opening"),
        _ => base.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optical_axis_hits_principal_point() {
        let rig = CameraRig::default();
        for z in [10.0, 500.0, 1e6] {
            let p = rig.ff.project(&Vector3::new(0.0, 0.0, z), 1.0).unwrap();
            assert_eq!(p, Point::new(rig.ff.cx, rig.ff.cy));
        }
    }

    #[test]
    fn pinhole_formula() {
        let mut rig = CameraRig::default();
        rig.ff.focal_px = 800.0;
        let p = rig.ff.project(&Vector3::new(100.0, 0.0, 1000.0), 1.0).unwrap();
        assert_eq!(p.x, 480.0);
        assert!(rig.ff.project(&Vector3::new(0.0, 0.0, -5.0), 1.0).is_none());
    }

    #[test]
    fn fisheye_radius_is_linear_in_angle() {
        let mut rig = CameraRig::default();
        rig.df.f_theta = 300.0;
        rig.df.width = 2000;
        rig.df.height = 2000;
        rig.df.cx = 1000.0;
        rig.df.cy = 1000.0;
        let theta: f64 = 0.5;
        let p = rig
            .df
            .project(&Vector3::new(theta.sin(), 0.0, theta.cos()))
            .unwrap();
        assert!((p.dist(Point::new(1000.0, 1000.0)) - 150.0).abs() < 1e-9);
        assert_eq!(
            rig.df.project(&Vector3::new(0.0, 0.0, 1.0)).unwrap(),
            Point::new(1000.0, 1000.0)
        );
        // Beyond half the FOV.
        assert!(rig.df.project(&Vector3::new(1.0, 0.0, -0.1)).is_none());
    }

    #[test]
    fn default_rig_is_consistent() {
        CameraRig::default().validate().unwrap();
    }

    #[test]
    fn image_centre_back_projects_under_the_camera() {
        let rig = CameraRig::default();
        let robot = RobotState {
            x_mm: 300.0,
            y_mm: -200.0,
            heading_deg: 90.0,
            ..RobotState::default()
        };
        let px = Point::new(rig.df.cx, rig.df.cy + rig.df_top() as f64);
        let g = rig.back_project_ground(&robot, px).unwrap().unwrap();
        assert!((g.x - 300.0).abs() < 1e-9);
        assert!((g.y - (-200.0 + rig.df.mount_forward_mm)).abs() < 1e-9);
    }

    #[test]
    fn horizon_and_ff_band() {
        let rig = CameraRig::default();
        let robot = RobotState::default();
        let horizon = rig.df.f_theta * FRAC_PI_2;
        let px = Point::new(rig.df.cx + horizon, rig.df.cy + rig.df_top() as f64);
        assert_eq!(rig.back_project_ground(&robot, px).unwrap(), None);
        assert!(matches!(
            rig.back_project_ground(&robot, Point::new(10.0, 10.0)),
            Err(ViewError::FfOnlyRegion { .. })
        ));
    }

    #[test]
    fn empty_world_has_only_ground() {
        let w = WorldState::empty(0);
        let f = compose_frame(&w, &CameraRig::default(), 1);
        assert_eq!(f.primitives.len(), 1);
        assert_eq!(f.primitives[0].object_id, GROUND_ID);
        assert_eq!(f.primitives[0].layer, Layer::DF);
        let bottom = Point::new(400.0, 700.0);
        assert_eq!(hit_test(&f, bottom), Some((GROUND_ID.to_string(), None)));
    }

    #[test]
    fn later_primitive_wins() {
        let mut f = compose_frame(&WorldState::empty(0), &CameraRig::default(), 0);
        let sq = |id: &str| Primitive {
            object_id: id.into(),
            part_id: None,
            polygon_px: vec![
                Point::new(100.0, 100.0),
                Point::new(200.0, 100.0),
                Point::new(200.0, 200.0),
                Point::new(100.0, 200.0),
            ],
            layer: Layer::FF,
            style: String::new(),
        };
        f.primitives.push(sq("a"));
        f.primitives.push(sq("b"));
        assert_eq!(hit_test(&f, Point::new(150.0, 150.0)).unwrap().0, "b");
    }
}
