use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;
use tiui_core::geometry::Point;
use tiui_core::gesture::PointerSample;
use tiui_core::synth::{long_press, tap, two_finger_stroke, TraceBuilder};
use tiui_core::trace::{parse_trace, write_trace};
use tiui_core::wire::{self, Body, Hello, Role, StateUpdate, StreamDecoder, WireMessage};
use tiui_core::world::{Command as WorldCommand, Verb};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tiui"));
    c.env_remove("TIUI_CONFIG")
        .env_remove("TIUI_PORT")
        .env_remove("TIUI_SEED")
        .env_remove("TIUI_ASSETS");
    c
}

fn assets() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets"))
}

fn trace(name: &str) -> Vec<PointerSample> {
    let text = std::fs::read_to_string(assets().join("traces").join(format!("{name}.trace"))).unwrap();
    parse_trace(&text).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("run tiui")
}

/// A `tiui serve` or `tiui record` child on an ephemeral port; killed on drop.
struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(sub: &str, extra: &[&str]) -> Server {
        let mut child = bin()
            .arg(sub)
            .args(["--port", "0"])
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn tiui");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Server { child, addr }
    }

    fn wait_exit(&mut self, limit: Duration) -> bool {
        let deadline = Instant::now() + limit;
        while Instant::now() < deadline {
            if let Some(status) = self.child.try_wait().unwrap() {
                return status.success();
            }
            std::thread::sleep(Duration::from_millis(20));
        }
        false
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Raw-TCP protocol client.
struct Client {
    stream: TcpStream,
    decoder: StreamDecoder,
    session: String,
    seq: u64,
}

impl Client {
    /// Connects and sends Hello; returns the first reply (Welcome or Error).
    fn connect(addr: &str, role: Role) -> (Client, WireMessage) {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
        let mut c = Client {
            stream,
            decoder: StreamDecoder::default(),
            session: String::new(),
            seq: 0,
        };
        c.send(Body::Hello(Hello {
            role,
            client: "cli-test".into(),
        }));
        let first = c.next(Duration::from_secs(5)).expect("handshake reply");
        if let Body::Welcome(w) = &first.body {
            c.session = w.session_id.clone();
        }
        (c, first)
    }

    fn send(&mut self, body: Body) {
        self.seq += 1;
        let m = WireMessage::new(self.session.clone(), self.seq, body);
        self.stream.write_all(&wire::encode(&m).unwrap()).unwrap();
    }

    fn send_trace(&mut self, samples: &[PointerSample]) {
        for s in samples {
            self.send(Body::Pointer(*s));
        }
    }

    fn next(&mut self, limit: Duration) -> Option<WireMessage> {
        let deadline = Instant::now() + limit;
        let mut buf = [0u8; 8192];
        loop {
            if let Some(m) = self.decoder.next_message().unwrap() {
                return Some(m);
            }
            if Instant::now() > deadline {
                return None;
            }
            match self.stream.read(&mut buf) {
                Ok(0) => return None,
                Ok(n) => self.decoder.push(&buf[..n]),
                Err(e)
                    if matches!(
                        e.kind(),
                        std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                    ) => {}
                Err(e) => panic!("read: {e}"),
            }
        }
    }

    fn state_until(&mut self, pred: impl Fn(&StateUpdate) -> bool) -> StateUpdate {
        let deadline = Instant::now() + Duration::from_secs(10);
        while Instant::now() < deadline {
            if let Some(m) = self.next(Duration::from_millis(200)) {
                if let Body::StateUpdate(s) = m.body {
                    if pred(&s) {
                        return *s;
                    }
                }
            }
        }
        panic!("state never reached");
    }
}

fn replay_commands(trace_path: &Path) -> Vec<WorldCommand> {
    let out = run(&["replay", "--trace", trace_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    serde_json::from_value(v["commands"].clone()).unwrap()
}

#[test]
fn serve_steers_the_robot_over_tcp() {
    let server = Server::start("serve", &[]);
    let (mut c, welcome) = Client::connect(&server.addr, Role::Control);
    let Body::Welcome(w) = welcome.body else {
        panic!("expected Welcome, got {welcome:?}")
    };
    assert_eq!((w.canvas_width, w.canvas_height, w.seam_row), (800, 1000, 440));
    let start = c.state_until(|_| true);
    assert_eq!(start.commands_applied, 0);

    c.send_trace(&trace("step_forward"));
    let after = c.state_until(|s| s.commands_applied >= 1);
    assert_eq!(after.last_command.map(|c| c.verb), Some(Verb::StepForward));
    let h = start.robot.heading_deg.to_radians();
    let moved = (
        after.robot.x_mm - start.robot.x_mm,
        after.robot.y_mm - start.robot.y_mm,
    );
    assert!((moved.0 - 100.0 * h.cos()).abs() < 1e-9, "{moved:?}");
    assert!((moved.1 - 100.0 * h.sin()).abs() < 1e-9, "{moved:?}");
}

#[test]
fn a_second_controller_is_turned_away() {
    let server = Server::start("serve", &[]);
    let (_first, w) = Client::connect(&server.addr, Role::Control);
    assert!(matches!(w.body, Body::Welcome(_)));
    let (_second, reply) = Client::connect(&server.addr, Role::Control);
    match reply.body {
        Body::Error(e) => assert_eq!(e.message, "robot busy"),
        other => panic!("expected refusal, got {other:?}"),
    }
    let (_viewer, reply) = Client::connect(&server.addr, Role::View);
    assert!(matches!(reply.body, Body::Welcome(_)));
}

#[test]
fn websocket_clients_speak_the_same_protocol() {
    use tungstenite::stream::MaybeTlsStream;
    use tungstenite::Message;

    let server = Server::start("serve", &[]);
    let (mut ws, _) = tungstenite::connect(format!("ws://{}/ws", server.addr)).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_mut() {
        s.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
    }
    let read = |ws: &mut tungstenite::WebSocket<_>| -> Option<WireMessage> {
        match ws.read() {
            Ok(Message::Text(t)) => Some(wire::decode(t.as_bytes()).unwrap().0),
            _ => None,
        }
    };
    let hello = WireMessage::new(
        "",
        1,
        Body::Hello(Hello {
            role: Role::Control,
            client: "ws".into(),
        }),
    );
    ws.send(Message::text(
        String::from_utf8(wire::encode(&hello).unwrap()).unwrap(),
    ))
    .unwrap();
    let deadline = Instant::now() + Duration::from_secs(5);
    let session = loop {
        assert!(Instant::now() < deadline, "no Welcome");
        if let Some(WireMessage {
            body: Body::Welcome(w),
            ..
        }) = read(&mut ws)
        {
            break w.session_id;
        }
    };
    // Bare JSON envelopes are accepted as well as framed ones.
    for (i, s) in trace("step_forward").into_iter().enumerate() {
        let m = WireMessage::new(session.clone(), i as u64 + 2, Body::Pointer(s));
        ws.send(Message::text(wire::encode_json(&m).unwrap())).unwrap();
    }
    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        assert!(Instant::now() < deadline, "StepForward never applied");
        if let Some(WireMessage {
            body: Body::StateUpdate(s),
            ..
        }) = read(&mut ws)
        {
            if s.commands_applied == 1 {
                assert_eq!(s.last_command.as_ref().map(|c| c.verb), Some(Verb::StepForward));
                break;
            }
        }
    }
}

fn http_get(addr: &str, path: &str) -> (String, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: test\r\n\r\n").unwrap();
    let mut text = String::new();
    s.read_to_string(&mut text).unwrap();
    let (head, body) = text.split_once("\r\n\r\n").unwrap();
    (head.lines().next().unwrap().to_string(), body.to_string())
}

#[test]
fn serve_hosts_the_static_bundle() {
    let server = Server::start("serve", &[]);
    let (status, body) = http_get(&server.addr, "/");
    assert_eq!(status, "HTTP/1.1 200 OK");
    assert!(body.contains("<canvas"));
    assert_eq!(http_get(&server.addr, "/missing.js").0, "HTTP/1.1 404 Not Found");
    assert_eq!(
        http_get(&server.addr, "/../Cargo.toml").0,
        "HTTP/1.1 404 Not Found"
    );

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let custom = Server::start("serve", &["--static-dir", dir.path().to_str().unwrap()]);
    let (status, body) = http_get(&custom.addr, "/app.js");
    assert_eq!(
        (status.as_str(), body.as_str()),
        ("HTTP/1.1 200 OK", "console.log(1)")
    );
}

#[test]
fn recorded_sessions_replay_to_the_same_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rec.trace");
    let mut server = Server::start("record", &["--out", out.to_str().unwrap()]);
    let original = trace("course_leg1");
    {
        let (mut c, _) = Client::connect(&server.addr, Role::Control);
        c.send_trace(&original);
        c.state_until(|s| s.commands_applied >= 1);
    }
    assert!(server.wait_exit(Duration::from_secs(10)), "record did not stop");
    let recorded = parse_trace(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(recorded, original);
    let bundled = assets().join("traces/course_leg1.trace");
    let replayed = replay_commands(&out);
    assert!(!replayed.is_empty());
    assert_eq!(replayed, replay_commands(&bundled));
}

#[test]
fn markers_persist_across_reconnects_and_restarts() {
    let dir = tempfile::tempdir().unwrap();
    let save = dir.path().join("markers.json");
    let args = ["--session-file", save.to_str().unwrap()];
    let gestures = TraceBuilder::new(150)
        .push(|t| long_press(Point::new(400.0, 900.0), t))
        .push(|t| two_finger_stroke(Point::new(400.0, 650.0), Point::new(0.0, 100.0), 6, t))
        .push(|t| tap(Point::new(300.0, 800.0), t))
        .finish();
    {
        let server = Server::start("serve", &args);
        {
            let (mut c, _) = Client::connect(&server.addr, Role::Control);
            c.send_trace(&gestures);
            c.state_until(|s| s.marker_count == 1);
        }
        let (mut again, _) = Client::connect(&server.addr, Role::Control);
        assert_eq!(again.state_until(|_| true).marker_count, 1);
    }
    let saved = std::fs::read_to_string(&save).unwrap();
    assert!(saved.contains("\"version\""));
    let server = Server::start("serve", &args);
    let (mut c, _) = Client::connect(&server.addr, Role::View);
    assert_eq!(c.state_until(|_| true).marker_count, 1);
}

#[test]
fn scenario_exit_codes_follow_the_verdict() {
    let ok = run(&["scenario", "door"]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("door: success=true"));

    let json = run(&["scenario", "curtain", "--json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["success"], Value::Bool(true));

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("bad.toml");
    let world = assets().join("worlds/smart_home.toml");
    std::fs::write(
        &script,
        format!(
            "world = {:?}\ntimeout_ticks = 10\n[[step]]\ntype = \"assert_mode\"\nmode = \"Control\"\n",
            world.to_str().unwrap()
        ),
    )
    .unwrap();
    let bad = run(&["scenario", script.to_str().unwrap()]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn render_writes_a_canvas_sized_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("frame.ppm");
    let r = run(&["render", "--out", out.to_str().unwrap()]);
    assert!(r.status.success());
    let bytes = std::fs::read(&out).unwrap();
    let header = b"P6\n800 1000\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 800 * 1000 * 3);
}

#[test]
fn bad_trace_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let old = dir.path().join("old.trace");
    std::fs::write(&old, write_trace(&[]).replace("v1", "v0")).unwrap();
    let r = run(&["replay", "--trace", old.to_str().unwrap()]);
    assert!(!r.status.success());
    assert!(
        String::from_utf8_lossy(&r.stderr).contains("v0"),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
}
