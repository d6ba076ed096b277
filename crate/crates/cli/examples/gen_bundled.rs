//! Regenerates the bundled trace files under `assets/traces`.
//!
//! Touch targets are found by projecting world points through the default
//! camera rig from each scenario's start pose, so the traces stay valid if a
//! world file is edited. Run with `cargo run -p tiui-cli --example gen_bundled`.

use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use tiui_core::geometry::Point;
use tiui_core::gesture::PointerSample;
use tiui_core::synth::{drag, lasso, tap, two_finger_stroke, TraceBuilder};
use tiui_core::trace::write_trace;
use tiui_core::view::{compose_frame, hit_test, CameraRig, Layer};
use tiui_core::world::{RobotStart, WorldFile, WorldState};

const PAUSE_MS: u64 = 150;
const LOWER_CENTRE: Point = Point::new(400.0, 650.0);

fn assets() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets"))
}

fn save(name: &str, samples: &[PointerSample]) -> Result<()> {
    let path = assets().join("traces").join(name);
    std::fs::write(&path, write_trace(samples)).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} ({} samples)", path.display(), samples.len());
    Ok(())
}

fn world_at(file: &Path, start: RobotStart) -> Result<WorldState> {
    let mut w = WorldFile::load(file)?.build()?;
    w.robot = start.to_state();
    Ok(w)
}

fn forward(t: u64) -> Vec<PointerSample> {
    two_finger_stroke(LOWER_CENTRE, Point::new(0.0, 100.0), 6, t)
}

fn turn_left(t: u64) -> Vec<PointerSample> {
    two_finger_stroke(LOWER_CENTRE, Point::new(100.0, 0.0), 6, t)
}

fn course() -> Result<()> {
    for (leg, steps) in [(1, 20), (2, 15), (3, 20), (4, 15)] {
        let mut b = TraceBuilder::new(PAUSE_MS);
        for _ in 0..steps {
            b.push(forward);
        }
        for _ in 0..6 {
            b.push(turn_left);
        }
        save(&format!("course_leg{leg}.trace"), &b.finish())?;
    }
    Ok(())
}

fn tag_px(w: &WorldState, id: &str) -> Result<Point> {
    let rig = CameraRig::default();
    let o = w.object(id).context("object")?;
    rig.project_ff(&w.robot, [o.tag_anchor.x, o.tag_anchor.y, o.tag_height_mm])
        .with_context(|| format!("tag of {id} is not in view"))
}

fn door() -> Result<()> {
    let start = RobotStart {
        x_mm: 1000.0,
        y_mm: 600.0,
        ..RobotStart::default()
    };
    let w = world_at(&assets().join("worlds/smart_home.toml"), start)?;
    let rig = CameraRig::default();
    let tag = tag_px(&w, "door")?;
    save("door_lasso.trace", &lasso(tag, 45.0, 32, 0))?;

    let panel = w.object("door").and_then(|o| o.panel).context("door panel")?;
    let frame = compose_frame(&w, &rig, 0);
    let mut b = TraceBuilder::new(PAUSE_MS);
    for digit in ["button_2", "button_4", "button_6", "button_8"] {
        let (_, quad) = panel
            .buttons()
            .into_iter()
            .find(|(id, _)| id == digit)
            .context("button")?;
        let c = [0, 1, 2].map(|k| quad.iter().map(|q| q[k]).sum::<f64>() / 4.0);
        let px = rig.project_ff(&w.robot, c).context("button in view")?;
        let at = Point::new(px.x.round(), px.y.round());
        let hit = hit_test(&frame, at);
        ensure!(
            hit == Some(("door".into(), Some(digit.into()))),
            "{digit} at {at:?} hits {hit:?}"
        );
        b.push(|t| tap(at, t));
    }
    save("door_code.trace", &b.finish())
}

fn curtain() -> Result<()> {
    let start = RobotStart {
        x_mm: 0.0,
        y_mm: 1000.0,
        heading_deg: 90.0,
        ..RobotStart::default()
    };
    let w = world_at(&assets().join("worlds/smart_home.toml"), start)?;
    let frame = compose_frame(&w, &CameraRig::default(), 0);
    save("curtain_lasso.trace", &lasso(tag_px(&w, "curtain")?, 45.0, 32, 0))?;
    let bbox = frame
        .object_bbox("curtain", Layer::FF)
        .context("curtain in view")?;
    let from = Point::new((bbox.min_x + 0.2 * bbox.width()).round(), 300.0);
    let to = Point::new(from.x + 0.6 * bbox.width(), 300.0);
    ensure!(hit_test(&frame, from).is_some_and(|(id, _)| id == "curtain"));
    println!(
        "curtain bbox width {:.2} px, drag {:.2} px",
        bbox.width(),
        to.x - from.x
    );
    save("curtain_drag.trace", &drag(from, to, 12, 0))
}

fn wheelchair() -> Result<()> {
    let start = RobotStart {
        x_mm: -1500.0,
        y_mm: -2100.0,
        heading_deg: 90.0,
        tilt_deg: -30.0,
        ..RobotStart::default()
    };
    let w = world_at(&assets().join("worlds/smart_home.toml"), start)?;
    let frame = compose_frame(&w, &CameraRig::default(), 0);
    save(
        "wheelchair_lasso.trace",
        &lasso(tag_px(&w, "wheelchair")?, 90.0, 32, 0),
    )?;
    let from = Point::new(400.0, 420.0);
    ensure!(
        hit_test(&frame, from).is_some_and(|(id, _)| id == "wheelchair"),
        "push start misses the wheelchair"
    );
    save(
        "wheelchair_push.trace",
        &drag(from, Point::new(400.0, 270.0), 10, 0),
    )
}

fn basics() -> Result<()> {
    save("step_forward.trace", &forward(0))?;
    save("tap.trace", &tap(Point::new(400.0, 800.0), 0))?;
    save("empty.trace", &[])
}

fn main() -> Result<()> {
    std::fs::create_dir_all(assets().join("traces"))?;
    course()?;
    door()?;
    curtain()?;
    wheelchair()?;
    basics()
}
