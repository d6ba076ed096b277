mod common;

use proptest::prelude::*;
use tiui_core::geometry::{point_in_polygon, Point};
use tiui_core::view::{compose_frame, hit_test, CameraRig, Layer, ViewError, GROUND_ID};
use tiui_core::world::{Command, RobotStart, RobotState, Verb, KEYPAD};

/// Pinhole projection written as two plane rotations (yaw about z, then
/// pitch about the camera's left axis) instead of a basis change.
fn oracle_ff(robot: &RobotState, p: [f64; 3]) -> (f64, f64) {
    let h = robot.heading_deg.to_radians();
    let (ox, oy, oz) = (
        robot.x_mm + 50.0 * h.cos(),
        robot.y_mm + 50.0 * h.sin(),
        robot.post_height_mm,
    );
    let (dx, dy, dz) = (p[0] - ox, p[1] - oy, p[2] - oz);
    let yaw = (robot.heading_deg + robot.pan_deg).to_radians();
    let ahead = dx * yaw.cos() + dy * yaw.sin();
    let left = -dx * yaw.sin() + dy * yaw.cos();
    let pitch = robot.tilt_deg.to_radians();
    let fwd = ahead * pitch.cos() + dz * pitch.sin();
    let up = -ahead * pitch.sin() + dz * pitch.cos();
    let f = 700.0 * robot.zoom_factor;
    (400.0 - f * left / fwd, 270.0 - f * up / fwd)
}

fn door_view() -> RobotStart {
    RobotStart {
        x_mm: 1000.0,
        y_mm: 600.0,
        ..RobotStart::default()
    }
}

#[test]
fn keypad_projects_to_twelve_buttons_where_the_oracle_says() {
    let w = common::world_at("smart_home", door_view());
    let frame = compose_frame(&w, &CameraRig::default(), 0);
    let panel = w.object("door").unwrap().panel.unwrap();
    let buttons = panel.buttons();
    assert_eq!(buttons.len(), 12);
    for (label, quad) in &buttons {
        let prim = frame
            .layer(Layer::FF)
            .find(|p| p.object_id == "door" && p.part_id.as_deref() == Some(label.as_str()))
            .unwrap_or_else(|| panic!("{label} missing"));
        assert_eq!(prim.polygon_px.len(), 4, "{label} clipped");
        for (corner, px) in quad.iter().zip(&prim.polygon_px) {
            let (u, v) = oracle_ff(&w.robot, *corner);
            assert!(
                (px.x - u).abs() < 1e-6 && (px.y - v).abs() < 1e-6,
                "{label}: {px:?} vs ({u}, {v})"
            );
        }
    }
    // Keypad rows read top to bottom, columns left to right on screen.
    let centre = |label: &str| {
        let prim = frame
            .layer(Layer::FF)
            .find(|p| p.part_id.as_deref() == Some(label))
            .unwrap();
        tiui_core::geometry::vertex_mean(&prim.polygon_px)
    };
    for row in KEYPAD {
        assert!(centre(row[0]).x < centre(row[1]).x && centre(row[1]).x < centre(row[2]).x);
    }
    assert!(centre("button_1").y < centre("button_4").y);
    assert!(centre("button_7").y < centre("button_0").y);
}

#[test]
fn buttons_sit_on_top_of_the_door_body() {
    let w = common::world_at("smart_home", door_view());
    let frame = compose_frame(&w, &CameraRig::default(), 0);
    for prim in frame.layer(Layer::FF).filter(|p| p.style == "panel:button") {
        let c = tiui_core::geometry::vertex_mean(&prim.polygon_px);
        assert_eq!(hit_test(&frame, c), Some(("door".into(), prim.part_id.clone())));
    }
}

#[test]
fn layers_respect_their_row_bands() {
    let rig = CameraRig::default();
    for name in ["smart_home", "course"] {
        let w = common::world(name);
        let frame = compose_frame(&w, &rig, 0);
        for p in &frame.primitives {
            let (lo, hi) = match p.layer {
                Layer::FF => (0.0, rig.ff_bottom() as f64),
                Layer::DF => (rig.df_top() as f64, rig.canvas_height as f64),
            };
            for q in &p.polygon_px {
                assert!(
                    q.y >= lo - 1e-9 && q.y <= hi + 1e-9,
                    "{} {:?} at {q:?}",
                    p.object_id,
                    p.layer
                );
                assert!(q.x >= -1e-9 && q.x <= rig.canvas_width as f64 + 1e-9);
            }
        }
        // DF primitives come first.
        let first_ff = frame.primitives.iter().position(|p| p.layer == Layer::FF);
        if let Some(i) = first_ff {
            assert!(frame.primitives[i..].iter().all(|p| p.layer == Layer::FF));
        }
    }
}

#[test]
fn back_projection_rejects_the_ff_only_band() {
    let w = common::world("smart_home");
    let rig = CameraRig::default();
    let err = rig
        .back_project_ground(&w.robot, Point::new(400.0, 100.0))
        .unwrap_err();
    assert!(matches!(err, ViewError::FfOnlyRegion { .. }));
    let err = rig
        .back_project_ground(&w.robot, Point::new(400.0, 1000.0))
        .unwrap_err();
    assert!(matches!(err, ViewError::OutOfCanvas { .. }));
    // Straight below the fisheye centre is the point under the lens.
    let g = rig
        .back_project_ground(&w.robot, Point::new(400.0, (310 + rig.df_top()) as f64))
        .unwrap()
        .unwrap();
    let h = w.robot.heading_deg.to_radians();
    assert!((g.x - (w.robot.x_mm + 150.0 * h.cos())).abs() < 1e-9);
    assert!((g.y - (w.robot.y_mm + 150.0 * h.sin())).abs() < 1e-9);
}

#[test]
fn open_door_leaves_the_ground_view() {
    let mut w = common::world_at("smart_home", door_view());
    let rig = CameraRig::default();
    let count = |w: &tiui_core::world::WorldState| {
        compose_frame(w, &rig, 0)
            .layer(Layer::DF)
            .filter(|p| p.object_id == "door")
            .count()
    };
    assert_eq!(count(&w), 1);
    for d in "2468".chars() {
        w.apply(&Command::object(
            "door",
            Verb::PressButton,
            tiui_core::world::Params::Button(format!("button_{d}")),
        ))
        .unwrap();
    }
    w.tick(10_000);
    assert_eq!(count(&w), 0);
}

fn pose() -> impl Strategy<Value = RobotState> {
    (
        -3000.0..3000.0f64,
        -3000.0..3000.0f64,
        0.0..360.0f64,
        1200.0..1750.0f64,
        -90.0..90.0f64,
        -30.0..30.0f64,
        1.0..4.0f64,
    )
        .prop_map(|(x, y, h, post, pan, tilt, zoom)| {
            RobotStart {
                x_mm: x,
                y_mm: y,
                heading_deg: h,
                post_height_mm: Some(post),
                pan_deg: pan,
                tilt_deg: tilt,
                zoom_factor: Some(zoom),
            }
            .to_state()
        })
}

proptest! {
    #[test]
    fn ground_pixels_round_trip(robot in pose(), u in 0.0..800.0f64, v in 380.0..1000.0f64) {
        let rig = CameraRig::default();
        if let Ok(Some(g)) = rig.back_project_ground(&robot, Point::new(u, v)) {
            let back = rig.project_df(&robot, [g.x, g.y, 0.0]).unwrap();
            prop_assert!(back.dist(Point::new(u, v)) < 1e-6);
        }
    }

    #[test]
    fn ff_projection_matches_the_rotation_oracle(
        robot in pose(),
        r in 300.0..6000.0f64,
        bearing in -40.0..40.0f64,
        z in 0.0..2500.0f64,
    ) {
        let rig = CameraRig::default();
        let a = (robot.heading_deg + robot.pan_deg + bearing).to_radians();
        let p = [robot.x_mm + r * a.cos(), robot.y_mm + r * a.sin(), z];
        if let Some(px) = rig.project_ff(&robot, p) {
            let (u, v) = oracle_ff(&robot, p);
            prop_assert!((px.x - u).abs() < 1e-6 && (px.y - v).abs() < 1e-6);
        }
    }

    #[test]
    fn hit_test_finds_the_topmost_containing_primitive(robot in pose(), u in 0.0..800.0f64, v in 0.0..1000.0f64) {
        let mut w = common::world("smart_home");
        w.robot = robot;
        let frame = compose_frame(&w, &CameraRig::default(), 0);
        let p = Point::new(u, v);
        let hit = hit_test(&frame, p);
        let containing: Vec<_> = frame.primitives.iter().filter(|q| point_in_polygon(p, &q.polygon_px)).collect();
        match containing.last() {
            None => prop_assert!(hit.is_none()),
            Some(top) => prop_assert_eq!(&hit, &Some((top.object_id.clone(), top.part_id.clone()))),
        }
        if v < 380.0 {
            prop_assert!(hit.as_ref().is_none_or(|(id, _)| id != GROUND_ID));
        }
    }

    #[test]
    fn composing_is_pure(robot in pose(), id in any::<u64>()) {
        let mut w = common::world("course");
        w.robot = robot;
        let rig = CameraRig::default();
        prop_assert_eq!(compose_frame(&w, &rig, id), compose_frame(&w, &rig, id));
    }
}
