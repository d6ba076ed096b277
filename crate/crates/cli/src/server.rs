//! Network front end for [`LocalSpace`].
//!
//! One listener accepts three kinds of connection, told apart by peeking at
//! the first bytes:
//! - an HTTP `GET` with `Upgrade: websocket` carries wire messages, one per
//!   text frame;
//! - any other `GET` is answered from the static directory (the browser
//!   client bundle);
//! - anything else is a raw TCP stream of framed wire messages.
//!
//! All world mutation happens on the dispatcher thread under one lock, so
//! commands serialize in arrival order. Each session has its own pair of
//! latency channels.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use log::{debug, info, warn};
use tiui_core::gesture::PointerSample;
use tiui_core::knowledge::MarkerStore;
use tiui_core::latency::{LatencyChannel, LatencyConfig};
use tiui_core::space::{HelloOutcome, LocalSpace, Outbound};
use tiui_core::trace::write_trace;
use tiui_core::wire::{self, Body, StreamDecoder, WireMessage};
use tungstenite::Message;

const DISPATCH_PERIOD: Duration = Duration::from_millis(2);

pub struct ServerOptions {
    pub latency: LatencyConfig,
    pub static_dir: Option<PathBuf>,
    pub session_file: Option<PathBuf>,
    /// Capture the first control session's pointer stream to this file and
    /// stop when that session ends.
    pub record_to: Option<PathBuf>,
}

enum Outgoing {
    Msg(WireMessage),
    Close,
}

struct Conn {
    tx: Sender<Outgoing>,
    up: LatencyChannel<WireMessage>,
    down: LatencyChannel<WireMessage>,
}

struct Recorder {
    path: PathBuf,
    session: Option<String>,
    samples: Vec<PointerSample>,
}

struct Core {
    space: LocalSpace,
    start: Instant,
    latency: LatencyConfig,
    conns: BTreeMap<String, Conn>,
    opened: u64,
    session_file: Option<PathBuf>,
    saved_markers: usize,
    recorder: Option<Recorder>,
}

impl Core {
    fn now(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn route(&mut self, at: u64, out: Vec<Outbound>) {
        for o in out {
            if let Some(c) = self.conns.get_mut(&o.session_id) {
                c.down.send(at, o.message);
            }
        }
    }

    fn dispatch(&mut self) {
        let now = self.now();
        let ids: Vec<String> = self.conns.keys().cloned().collect();
        for id in &ids {
            let due = match self.conns.get_mut(id) {
                Some(c) => c.up.deliver(now),
                None => continue,
            };
            for msg in due {
                if let Body::Pointer(s) = &msg.body {
                    if let Some(r) = self.recorder.as_mut() {
                        if r.session.as_deref() == Some(id.as_str()) {
                            r.samples.push(*s);
                        }
                    }
                }
                let bye = matches!(msg.body, Body::Bye(_));
                let out = self.space.receive(now, &msg);
                self.route(now, out);
                if bye {
                    if let Some(c) = self.conns.get(id) {
                        let _ = c.tx.send(Outgoing::Close);
                    }
                }
            }
        }
        let out = self.space.advance_to(now);
        self.route(now, out);
        for c in self.conns.values_mut() {
            for m in c.down.deliver(now) {
                let _ = c.tx.send(Outgoing::Msg(m));
            }
        }
        self.save_markers();
    }

    fn save_markers(&mut self) {
        let n = self.space.markers().markers.len();
        if n == self.saved_markers {
            return;
        }
        self.saved_markers = n;
        if let Some(path) = &self.session_file {
            if let Err(e) = std::fs::write(path, self.space.markers().to_json()) {
                warn!("cannot write session file {}: {e}", path.display());
            }
        }
    }

    /// Returns the session id, or the refusal to send before closing.
    fn open(&mut self, hello: &WireMessage, tx: Sender<Outgoing>) -> Result<String, WireMessage> {
        let now = self.now();
        match self.space.hello(now, hello) {
            HelloOutcome::Accepted { session_id, messages } => {
                self.opened += 1;
                let seed = self.latency.seed.wrapping_add(self.opened * 2);
                let cfg = |s| LatencyConfig {
                    seed: s,
                    ..self.latency
                };
                self.conns.insert(
                    session_id.clone(),
                    Conn {
                        tx,
                        up: LatencyChannel::new(cfg(seed)),
                        down: LatencyChannel::new(cfg(seed + 1)),
                    },
                );
                if let Some(r) = self.recorder.as_mut() {
                    if r.session.is_none() && self.space.control_session() == Some(session_id.as_str()) {
                        r.session = Some(session_id.clone());
                    }
                }
                self.route(now, messages);
                info!("session {session_id} opened");
                Ok(session_id)
            }
            HelloOutcome::Rejected(m) => Err(m),
        }
    }

    fn incoming(&mut self, msg: WireMessage) {
        let now = self.now();
        if let Some(c) = self.conns.get_mut(&msg.session_id) {
            c.up.send(now, msg);
        }
    }

    /// Returns true when recording is complete and the server should stop.
    fn close(&mut self, id: &str) -> bool {
        // Deliver whatever is still in flight from this client first.
        if let Some(mut c) = self.conns.remove(id) {
            while let Some((_, msg)) = c.up.pop_next() {
                if let Body::Pointer(s) = &msg.body {
                    if let Some(r) = self.recorder.as_mut() {
                        if r.session.as_deref() == Some(id) {
                            r.samples.push(*s);
                        }
                    }
                }
                let now = self.now();
                let _ = self.space.receive(now, &msg);
            }
        }
        self.space.disconnect(id);
        self.save_markers();
        info!("session {id} closed");
        match &self.recorder {
            Some(r) if r.session.as_deref() == Some(id) => {
                if let Err(e) = std::fs::write(&r.path, write_trace(&r.samples)) {
                    warn!("cannot write trace {}: {e}", r.path.display());
                }
                true
            }
            _ => false,
        }
    }
}

pub struct Server {
    listener: TcpListener,
    core: Arc<Mutex<Core>>,
    static_dir: Option<PathBuf>,
    stop: Arc<AtomicBool>,
}

impl Server {
    pub fn bind(addr: &str, space: LocalSpace, opts: ServerOptions) -> Result<Server> {
        let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
        let mut space = space;
        if let Some(path) = &opts.session_file {
            if path.exists() {
                let text = std::fs::read_to_string(path)?;
                let store = MarkerStore::from_json(&text)
                    .with_context(|| format!("loading session file {}", path.display()))?;
                space.set_markers(store);
            }
        }
        let saved_markers = space.markers().markers.len();
        let core = Core {
            space,
            start: Instant::now(),
            latency: opts.latency,
            conns: BTreeMap::new(),
            opened: 0,
            session_file: opts.session_file,
            saved_markers,
            recorder: opts.record_to.map(|path| Recorder {
                path,
                session: None,
                samples: Vec::new(),
            }),
        };
        Ok(Server {
            listener,
            core: Arc::new(Mutex::new(core)),
            static_dir: opts.static_dir,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until stopped (recording finished) or the listener fails.
    pub fn run(self) -> Result<()> {
        let core = Arc::clone(&self.core);
        let stop = Arc::clone(&self.stop);
        let dispatcher = thread::spawn(move || {
            while !stop.load(Ordering::Relaxed) {
                core.lock().expect("core lock").dispatch();
                thread::sleep(DISPATCH_PERIOD);
            }
        });
        self.listener.set_nonblocking(true)?;
        while !self.stop.load(Ordering::Relaxed) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    stream.set_nonblocking(false)?;
                    let core = Arc::clone(&self.core);
                    let stop = Arc::clone(&self.stop);
                    let static_dir = self.static_dir.clone();
                    thread::spawn(move || {
                        if let Err(e) = handle(stream, core, stop, static_dir.as_deref()) {
                            debug!("connection {peer}: {e:#}");
                        }
                    });
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(e.into()),
            }
        }
        let _ = dispatcher.join();
        Ok(())
    }
}

fn handle(
    stream: TcpStream,
    core: Arc<Mutex<Core>>,
    stop: Arc<AtomicBool>,
    static_dir: Option<&Path>,
) -> Result<()> {
    let head = peek_head(&stream)?;
    if head.starts_with(b"GET ") {
        let text = String::from_utf8_lossy(&head).to_ascii_lowercase();
        if text.contains("upgrade: websocket") {
            return serve_websocket(stream, core, stop);
        }
        return serve_static(stream, &head, static_dir);
    }
    serve_tcp(stream, core, stop)
}

/// Peeks until the request head is complete (for HTTP) or anything arrives.
fn peek_head(stream: &TcpStream) -> io::Result<Vec<u8>> {
    let mut buf = vec![0u8; 8192];
    let deadline = Instant::now() + Duration::from_secs(5);
    loop {
        let n = stream.peek(&mut buf)?;
        if n == 0 {
            return Ok(Vec::new());
        }
        let got = &buf[..n];
        let http = got.starts_with(b"GET ") || b"GET ".starts_with(got);
        if !http || got.windows(4).any(|w| w == b"\r\n\r\n") || n == buf.len() || Instant::now() > deadline {
            return Ok(got.to_vec());
        }
        thread::sleep(Duration::from_millis(2));
    }
}

fn finish_session(core: &Arc<Mutex<Core>>, stop: &AtomicBool, id: &str) {
    if core.lock().expect("core lock").close(id) {
        stop.store(true, Ordering::Relaxed);
    }
}

fn serve_tcp(stream: TcpStream, core: Arc<Mutex<Core>>, stop: Arc<AtomicBool>) -> Result<()> {
    let mut reader = stream.try_clone()?;
    let mut writer = stream;
    let mut decoder = StreamDecoder::default();
    let mut buf = [0u8; 4096];

    // Handshake: the first message must be Hello.
    let hello = loop {
        if let Some(m) = decoder.next_message()? {
            break m;
        }
        let n = reader.read(&mut buf)?;
        if n == 0 {
            return Ok(());
        }
        decoder.push(&buf[..n]);
    };
    let (tx, rx) = channel();
    let id = match core.lock().expect("core lock").open(&hello, tx) {
        Ok(id) => id,
        Err(refusal) => {
            writer.write_all(&wire::encode(&refusal)?)?;
            return Ok(());
        }
    };
    let write_thread = thread::spawn(move || tcp_writer(writer, rx));

    let result = (|| -> Result<()> {
        loop {
            while let Some(m) = decoder.next_message()? {
                core.lock().expect("core lock").incoming(m);
            }
            let n = reader.read(&mut buf)?;
            if n == 0 {
                return Ok(());
            }
            decoder.push(&buf[..n]);
        }
    })();
    finish_session(&core, &stop, &id);
    let _ = reader.shutdown(std::net::Shutdown::Both);
    let _ = write_thread.join();
    result
}

fn tcp_writer(mut w: TcpStream, rx: Receiver<Outgoing>) {
    for out in rx {
        match out {
            Outgoing::Msg(m) => match wire::encode(&m) {
                Ok(bytes) => {
                    if w.write_all(&bytes).is_err() {
                        break;
                    }
                }
                Err(e) => warn!("dropping unencodable message: {e}"),
            },
            Outgoing::Close => {
                let _ = w.shutdown(std::net::Shutdown::Both);
                break;
            }
        }
    }
}

fn serve_websocket(stream: TcpStream, core: Arc<Mutex<Core>>, stop: Arc<AtomicBool>) -> Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| anyhow::anyhow!("websocket handshake: {e}"))?;
    let hello = loop {
        match ws.read()? {
            Message::Text(t) => break decode_text(t.as_bytes())?,
            Message::Binary(b) => break decode_text(&b)?,
            Message::Close(_) => return Ok(()),
            _ => continue,
        }
    };
    let (tx, rx) = channel();
    let id = match core.lock().expect("core lock").open(&hello, tx) {
        Ok(id) => id,
        Err(refusal) => {
            ws.send(Message::text(String::from_utf8(wire::encode(&refusal)?)?))?;
            let _ = ws.close(None);
            return Ok(());
        }
    };
    ws.get_mut().set_read_timeout(Some(Duration::from_millis(5)))?;
    let result = (|| -> Result<()> {
        loop {
            while let Ok(out) = rx.try_recv() {
                match out {
                    Outgoing::Msg(m) => ws.send(Message::text(String::from_utf8(wire::encode(&m)?)?))?,
                    Outgoing::Close => {
                        let _ = ws.close(None);
                        return Ok(());
                    }
                }
            }
            match ws.read() {
                Ok(Message::Text(t)) => {
                    let m = decode_text(t.as_bytes())?;
                    core.lock().expect("core lock").incoming(m);
                }
                Ok(Message::Binary(b)) => {
                    let m = decode_text(&b)?;
                    core.lock().expect("core lock").incoming(m);
                }
                Ok(Message::Close(_)) => return Ok(()),
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                    return Ok(())
                }
                Err(e) => return Err(e.into()),
            }
        }
    })();
    finish_session(&core, &stop, &id);
    result
}

/// A WebSocket text frame holds exactly one framed message; a bare JSON
/// envelope is accepted too.
fn decode_text(bytes: &[u8]) -> Result<WireMessage> {
    if bytes.first() == Some(&b'{') {
        return Ok(wire::decode_json_at(bytes, 0)?);
    }
    let (m, used) = wire::decode(bytes)?;
    if used != bytes.len() {
        anyhow::bail!("trailing bytes after message at offset {used}");
    }
    Ok(m)
}

fn serve_static(mut stream: TcpStream, head: &[u8], dir: Option<&Path>) -> Result<()> {
    // Consume the request head we peeked at.
    let end = head
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .map_or(head.len(), |i| i + 4);
    let mut sink = vec![0u8; end];
    stream.read_exact(&mut sink)?;
    let line = String::from_utf8_lossy(head);
    let target = line.split_whitespace().nth(1).unwrap_or("/");
    let path = target.split(['?', '#']).next().unwrap_or("/");
    let (status, ctype, body) = match dir.and_then(|d| resolve_static(d, path)) {
        Some(file) => match std::fs::read(&file) {
            Ok(bytes) => ("200 OK", content_type(&file), bytes),
            Err(_) => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
        },
        None => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
    };
    let header = format!(
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(header.as_bytes())?;
    stream.write_all(&body)?;
    Ok(())
}

fn resolve_static(dir: &Path, url_path: &str) -> Option<PathBuf> {
    let rel = url_path.trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    if rel.split('/').any(|seg| seg == ".." || seg.contains('\\')) {
        return None;
    }
    let p = dir.join(rel);
    if p.is_dir() {
        Some(p.join("index.html"))
    } else {
        Some(p)
    }
}

fn content_type(p: &Path) -> &'static str {
    match p.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("map") => "application/json",
        _ => "application/octet-stream",
    }
}
