use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{process_event, to_jsonl, GestureEvent, InteractionState, SceneContext};

use super::{load_scene, resolve_path, LoadError, ScenePaths, SessionConfig};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp {t} is earlier than the previous event ({prev})")]
    Decreasing { line: usize, prev: u64, t: u64 },
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Parse a line-delimited gesture trace. Blank lines are skipped; the trace
/// is rejected as a whole if any timestamp goes backwards.
pub fn parse_trace(text: &str) -> Result<Vec<GestureEvent>, TraceError> {
    let mut events = Vec::new();
    let mut prev: Option<u64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let ev: GestureEvent = serde_json::from_str(raw).map_err(|e| TraceError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if let Some(p) = prev.filter(|p| ev.t < *p) {
            return Err(TraceError::Decreasing { line, prev: p, t: ev.t });
        }
        prev = Some(ev.t);
        events.push(ev);
    }
    Ok(events)
}

/// Fixture files for one replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(flatten)]
    pub scene: ScenePaths,
    pub trace: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    /// Feedback as JSON lines.
    pub log: String,
    pub state: InteractionState,
    pub events: usize,
    /// `None` when no expected log was given.
    pub matched: Option<bool>,
}

/// Run events through the engine in order, starting from `state`.
pub fn replay_events(
    ctx: &SceneContext,
    mut state: InteractionState,
    events: &[GestureEvent],
) -> (InteractionState, String) {
    let mut log = String::new();
    for ev in events {
        let (next, feedback) = process_event(ctx, &state, ev);
        state = next;
        log.push_str(&to_jsonl(&feedback));
    }
    (state, log)
}

fn read_text(path: &Path) -> Result<String, TraceError> {
    fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load the scene, replay the whole trace from a fresh session and compare
/// the log byte-wise with the expected one if given.
pub fn replay_trace(rec: &TraceRecord, session: &SessionConfig) -> Result<ReplayOutcome, TraceError> {
    let root = session.fixture_root.as_deref();
    let events = parse_trace(&read_text(&resolve_path(&rec.trace, root))?)?;
    let loaded = load_scene(&rec.scene, session)?;
    let ctx = Arc::new(SceneContext::new(loaded.snapshot));
    let (state, log) = replay_events(&ctx, InteractionState::default(), &events);
    let matched = match &rec.expected {
        Some(p) => Some(read_text(&resolve_path(p, root))? == log),
        None => None,
    };
    Ok(ReplayOutcome {
        log,
        state,
        events: events.len(),
        matched,
    })
}
