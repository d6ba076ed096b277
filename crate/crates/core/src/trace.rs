//! Pointer trace files.
//!
//! ```text
//! # tiui-trace v1
//! 0 down 350 600 0
//! 0 up 350 600 80
//! ```
//!
//! One sample per line: `pointer_id phase x_px y_px t_ms`. Blank lines and
//! further `#` lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::gesture::{Phase, PointerSample};

pub const TRACE_HEADER: &str = "# tiui-trace v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceFileError {
    #[error("missing trace header, expected `{TRACE_HEADER}`")]
    MissingHeader,
    #[error("unsupported trace version `{found}`, expected `{TRACE_HEADER}`")]
    VersionMismatch { found: String },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

pub fn write_trace(samples: &[PointerSample]) -> String {
    let mut out = String::with_capacity(24 * samples.len() + 16);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in samples {
        writeln!(
            out,
            "{} {} {} {} {}",
            s.pointer_id,
            s.phase.as_str(),
            s.x_px,
            s.y_px,
            s.t_ms
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<PointerSample>, TraceFileError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim(),
            None => return Err(TraceFileError::MissingHeader),
        }
    };
    if header != TRACE_HEADER {
        return Err(match header.strip_prefix("# tiui-trace ") {
            Some(v) => TraceFileError::VersionMismatch { found: v.to_string() },
            None => TraceFileError::MissingHeader,
        });
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| TraceFileError::Syntax { line: i + 1, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, phase, x, y, t] = fields[..] else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        let phase = match phase {
            "down" => Phase::Down,
            "move" => Phase::Move,
            "up" => Phase::Up,
            other => return Err(err(format!("unknown phase `{other}`"))),
        };
        let num = |s: &str, what: &str| -> Result<f64, TraceFileError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {what} `{s}`")))
        };
        out.push(PointerSample {
            pointer_id: id.parse().map_err(|_| err(format!("bad pointer id `{id}`")))?,
            phase,
            x_px: num(x, "x")?,
            y_px: num(y, "y")?,
            t_ms: t.parse().map_err(|_| err(format!("bad time `{t}`")))?,
        });
    }
    Ok(out)
}

pub fn load_trace(path: &Path) -> Result<Vec<PointerSample>, TraceFileError> {
    let text = std::fs::read_to_string(path).map_err(|e| TraceFileError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_trace(&text)
}
