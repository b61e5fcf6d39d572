//! JSON envelope protocol, one envelope per message.
//!
//! Client to server:
//!
//! | kind | payload | reply |
//! |---|---|---|
//! | `LoadScene` | `{scene, detections?, annotations?, config?: ["k=v"], state?}` | `Snapshot {report, snapshot}` |
//! | `Gesture` | a gesture event | one `Feedback` per feedback event, then `Layout` if the layout changed |
//! | `Configure` | `{set: ["k=v", ...]}` | `Configure {config}` |
//! | `Snapshot` | `{}` or `{restore: <state file>}` | `Snapshot {state}` |
//!
//! Anything that cannot be applied is answered with `Error {reason, request_seq}`
//! and the connection carries on.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::config::Config;
use crate::engine::{process_event, GestureEvent, InteractionState, SceneContext};

use super::{load_scene, snapshot_export, snapshot_restore, ScenePaths, SessionConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    LoadScene,
    Gesture,
    Configure,
    Snapshot,
    Layout,
    Feedback,
    Error,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub kind: EnvelopeKind,
    /// Kept verbatim so feedback lines survive transport byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Box<RawValue>>,
}

impl Envelope {
    pub fn new<T: Serialize>(seq: u64, kind: EnvelopeKind, payload: &T) -> Self {
        let raw = serde_json::value::to_raw_value(payload).expect("payload serialization is infallible");
        Self {
            seq,
            kind,
            payload: Some(raw),
        }
    }

    pub fn payload_str(&self) -> &str {
        self.payload.as_deref().map(RawValue::get).unwrap_or("null")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadSceneRequest {
    #[serde(flatten)]
    pub paths: ScenePaths,
    #[serde(default)]
    pub config: Vec<String>,
    /// Start from an exported state instead of a fresh session.
    #[serde(default)]
    pub state: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigureRequest {
    set: Vec<String>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SnapshotRequest {
    #[serde(default)]
    restore: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct ErrorPayload<'a> {
    reason: &'a str,
    request_seq: Option<u64>,
}

/// One connection's session: its scene, engine state and envelope counters.
/// Transport-agnostic; feed it message text, send back what it returns.
#[derive(Debug)]
pub struct ConnectionHost {
    cfg: SessionConfig,
    ctx: Option<Arc<SceneContext>>,
    state: InteractionState,
    out_seq: u64,
    last_in_seq: Option<u64>,
    last_event_t: Option<u64>,
}

impl ConnectionHost {
    pub fn new(cfg: SessionConfig) -> Self {
        Self {
            cfg,
            ctx: None,
            state: InteractionState::default(),
            out_seq: 0,
            last_in_seq: None,
            last_event_t: None,
        }
    }

    pub fn state(&self) -> &InteractionState {
        &self.state
    }

    pub fn context(&self) -> Option<&Arc<SceneContext>> {
        self.ctx.as_ref()
    }

    fn envelope<T: Serialize>(&mut self, kind: EnvelopeKind, payload: &T) -> String {
        self.out_seq += 1;
        serde_json::to_string(&Envelope::new(self.out_seq, kind, payload))
            .expect("envelope serialization is infallible")
    }

    fn error(&mut self, reason: &str, request_seq: Option<u64>) -> String {
        log::debug!("protocol error: {reason}");
        self.envelope(EnvelopeKind::Error, &ErrorPayload { reason, request_seq })
    }

    /// Handle one incoming message. Never panics on bad input.
    pub fn handle_text(&mut self, text: &str) -> Vec<String> {
        let env: Envelope = match serde_json::from_str(text) {
            Ok(e) => e,
            Err(e) => return vec![self.error(&format!("malformed envelope: {e}"), None)],
        };
        if self.last_in_seq.is_some_and(|last| env.seq <= last) {
            let reason = format!(
                "seq {} does not follow {}",
                env.seq,
                self.last_in_seq.unwrap_or_default()
            );
            return vec![self.error(&reason, Some(env.seq))];
        }
        self.last_in_seq = Some(env.seq);
        let seq = env.seq;
        let result = match env.kind {
            EnvelopeKind::LoadScene => self.load(env.payload_str()),
            EnvelopeKind::Gesture => self.gesture(env.payload_str()),
            EnvelopeKind::Configure => self.configure(env.payload_str()),
            EnvelopeKind::Snapshot => self.snapshot(env.payload.as_deref().map(RawValue::get)),
            other => Err(format!("`{other:?}` is not accepted from clients")),
        };
        result.unwrap_or_else(|reason| vec![self.error(&reason, Some(seq))])
    }

    fn load(&mut self, payload: &str) -> Result<Vec<String>, String> {
        let req: LoadSceneRequest = serde_json::from_str(payload).map_err(|e| format!("bad LoadScene payload: {e}"))?;
        let mut cfg = self.cfg.clone();
        cfg.overrides.extend(req.config.iter().cloned());
        let loaded = load_scene(&req.paths, &cfg).map_err(|e| e.to_string())?;
        let state = match &req.state {
            Some(v) => snapshot_restore(v.to_string().as_bytes()).map_err(|e| format!("bad state: {e}"))?,
            None => InteractionState::default(),
        };
        let reply = serde_json::json!({ "report": loaded.report, "snapshot": loaded.snapshot });
        self.ctx = Some(Arc::new(SceneContext::new(loaded.snapshot)));
        self.state = state;
        self.cfg = cfg;
        self.last_event_t = None;
        Ok(vec![self.envelope(EnvelopeKind::Snapshot, &reply)])
    }

    fn gesture(&mut self, payload: &str) -> Result<Vec<String>, String> {
        let ctx = self.ctx.clone().ok_or("no scene loaded")?;
        let ev: GestureEvent = serde_json::from_str(payload).map_err(|e| format!("bad Gesture payload: {e}"))?;
        if let Some(last) = self.last_event_t.filter(|last| ev.t < *last) {
            return Err(format!("gesture t={} is earlier than {last}", ev.t));
        }
        self.last_event_t = Some(ev.t);
        let (next, feedback) = process_event(&ctx, &self.state, &ev);
        let layout_changed = next.layout != self.state.layout;
        self.state = next;
        let mut out: Vec<String> = feedback
            .iter()
            .map(|f| self.envelope(EnvelopeKind::Feedback, f))
            .collect();
        if layout_changed {
            let export = self.state.layout.export();
            out.push(self.envelope(EnvelopeKind::Layout, &export));
        }
        Ok(out)
    }

    fn configure(&mut self, payload: &str) -> Result<Vec<String>, String> {
        let req: ConfigureRequest = serde_json::from_str(payload).map_err(|e| format!("bad Configure payload: {e}"))?;
        let base: Config = self.ctx.as_ref().map(|c| c.config.clone()).unwrap_or_default();
        let mut config = base;
        for o in &req.set {
            config.apply_override(o).map_err(|e| e.to_string())?;
        }
        if let Some(ctx) = &self.ctx {
            let mut snapshot = ctx.snapshot.clone();
            snapshot.config = config.clone();
            self.ctx = Some(Arc::new(SceneContext::new(snapshot)));
        }
        self.cfg.overrides.extend(req.set);
        Ok(vec![self.envelope(
            EnvelopeKind::Configure,
            &serde_json::json!({ "config": config }),
        )])
    }

    fn snapshot(&mut self, payload: Option<&str>) -> Result<Vec<String>, String> {
        let req: SnapshotRequest = match payload {
            Some(p) if p.trim() != "null" => {
                serde_json::from_str(p).map_err(|e| format!("bad Snapshot payload: {e}"))?
            }
            _ => SnapshotRequest::default(),
        };
        if let Some(v) = req.restore {
            self.state = snapshot_restore(v.to_string().as_bytes()).map_err(|e| format!("bad state: {e}"))?;
        }
        let bytes = snapshot_export(&self.state);
        if let Some(path) = &self.cfg.persistence {
            std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        let file: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
        Ok(vec![self.envelope(EnvelopeKind::Snapshot, &file)])
    }
}
