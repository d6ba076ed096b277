mod common;

use tiui_core::interaction::Mode;
use tiui_core::latency::LatencyConfig;
use tiui_core::scenario::{run_scenario, ScenarioError, ScenarioScript, Step};
use tiui_core::trace::TraceFileError;

use common::{assets, script};

#[test]
fn bundled_scenarios_pass() {
    for name in ["course", "door", "curtain", "wheelchair"] {
        let m = run_scenario(&script(name)).unwrap();
        let failed: Vec<_> = m.failures().collect();
        assert!(m.success, "{name}: {failed:?}");
        assert!(!m.assertions.is_empty());
    }
}

#[test]
fn course_fails_at_the_pose_check_when_a_leg_is_missing() {
    let mut s = script("course");
    // Drop the second leg.
    let removed = s.steps.remove(2);
    assert!(matches!(removed, Step::Trace { .. }));
    let m = run_scenario(&s).unwrap();
    assert!(!m.success);
    let first = m.failures().next().unwrap();
    assert_eq!(first.step, 2);
    assert!(first.description.starts_with("pose"), "{first:?}");
}

#[test]
fn course_tolerates_injected_latency() {
    let mut s = script("course");
    s.latency = Some(LatencyConfig {
        mean_ms: 100.0,
        jitter_ms: 30.0,
        seed: 5,
    });
    let m = run_scenario(&s).unwrap();
    assert!(m.success, "{:?}", m.failures().collect::<Vec<_>>());
    assert_eq!(m.commands_issued, 94);
}

#[test]
fn budget_overrun_is_a_failure() {
    let mut s = script("curtain");
    s.timeout_ticks = 5;
    let m = run_scenario(&s).unwrap();
    assert!(!m.success);
    assert_eq!(m.failures().last().unwrap().description, "timeout");
}

#[test]
fn mode_and_lock_assertions() {
    let mut s = script("door");
    s.steps.push(Step::AssertMode { mode: Mode::Touch });
    s.steps.push(Step::AssertLocked { id: None });
    let m = run_scenario(&s).unwrap();
    let last = &m.assertions[m.assertions.len() - 1];
    assert!(m.assertions[m.assertions.len() - 2].passed);
    assert!(!last.passed, "the door stays locked on");
}

#[test]
fn scripts_are_validated_before_running() {
    let base = assets().join("scenarios");
    let bad = ScenarioScript::parse(
        r#"
world = "../worlds/smart_home.toml"
timeout_ticks = 10
[[step]]
type = "assert_object"
id = "piano"
field = "openness"
value = 1.0
"#,
        &base,
    )
    .unwrap();
    assert!(matches!(run_scenario(&bad), Err(ScenarioError::Invalid(_))));

    let unknown_step = ScenarioScript::parse(
        "world = \"x.toml\"\ntimeout_ticks = 1\n[[step]]\ntype = \"dance\"\n",
        &base,
    );
    assert!(matches!(unknown_step, Err(ScenarioError::Invalid(_))));
}

#[test]
fn trace_version_mismatch_is_reported() {
    let dir = std::env::temp_dir().join(format!("tiui-scenario-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("old.trace"), "# tiui-trace v0\n0 down 1 1 0\n").unwrap();
    let world = assets().join("worlds/smart_home.toml");
    let text = format!(
        "world = {:?}\ntimeout_ticks = 10\n[[step]]\ntype = \"trace\"\nfile = \"old.trace\"\n",
        world.display().to_string()
    );
    let s = ScenarioScript::parse(&text, &dir).unwrap();
    match run_scenario(&s) {
        Err(ScenarioError::Trace { source, .. }) => {
            assert_eq!(source, TraceFileError::VersionMismatch { found: "v0".into() })
        }
        other => panic!("unexpected {other:?}"),
    }
    std::fs::remove_dir_all(dir).ok();
}
