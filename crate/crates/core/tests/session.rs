use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use proxy_core::session::{
    load_scene, parse_trace, replay_events, replay_trace, snapshot_export, snapshot_restore, ConnectionHost, Envelope,
    EnvelopeKind, LoadError, ScenePaths, SessionConfig, TraceError, TraceRecord,
};
use proxy_core::{GestureEvent, InteractionState, SceneContext};

const SCENES: [&str; 4] = ["office", "kitchen", "building", "drone"];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn context(name: &str) -> SceneContext {
    let paths = ScenePaths::new(fixtures().join(format!("{name}.scene.json")));
    SceneContext::new(load_scene(&paths, &SessionConfig::default()).unwrap().snapshot)
}

fn trace(name: &str) -> Vec<GestureEvent> {
    parse_trace(&fs::read_to_string(fixtures().join(format!("traces/{name}-01.jsonl"))).unwrap()).unwrap()
}

fn golden(name: &str) -> String {
    fs::read_to_string(fixtures().join(format!("golden/{name}-01.feedback.jsonl"))).unwrap()
}

#[test]
fn export_and_restore_resume_identically() {
    for name in SCENES {
        let ctx = context(name);
        let events = trace(name);
        let (whole_state, whole_log) = replay_events(&ctx, InteractionState::default(), &events);
        for split in [1, events.len() / 3, events.len() / 2, events.len() - 1] {
            let (mid, head) = replay_events(&ctx, InteractionState::default(), &events[..split]);
            let bytes = snapshot_export(&mid);
            let restored = snapshot_restore(&bytes).unwrap();
            assert_eq!(restored, mid, "{name} split {split}");
            assert_eq!(snapshot_export(&restored), bytes);
            let (end, tail) = replay_events(&ctx, restored, &events[split..]);
            assert_eq!(end, whole_state, "{name} split {split}");
            assert_eq!(head + &tail, whole_log, "{name} split {split}");
        }
    }
}

#[test]
fn fresh_state_round_trips() {
    let bytes = snapshot_export(&InteractionState::default());
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["format"], "proxy-session-state/1");
    assert_eq!(snapshot_restore(&bytes).unwrap(), InteractionState::default());
}

#[test]
fn corrupted_state_files_are_schema_errors() {
    let good = snapshot_export(&InteractionState::default());
    let truncated = &good[..good.len() / 2];
    assert!(snapshot_restore(truncated).is_err());

    let mut v: Value = serde_json::from_slice(&good).unwrap();
    v["format"] = "proxy-session-state/0".into();
    assert!(snapshot_restore(v.to_string().as_bytes()).is_err());

    let mut v: Value = serde_json::from_slice(&good).unwrap();
    v["extra"] = 1.into();
    assert!(snapshot_restore(v.to_string().as_bytes()).is_err());

    let mut v: Value = serde_json::from_slice(&good).unwrap();
    v["state"]["mode"] = "Flying".into();
    let err = snapshot_restore(v.to_string().as_bytes()).unwrap_err();
    assert!(err.to_string().contains("mode"), "{err}");
}

#[test]
fn missing_files_name_the_path() {
    let paths = ScenePaths::new(fixtures().join("nowhere.scene.json"));
    let err = load_scene(&paths, &SessionConfig::default()).unwrap_err();
    assert!(matches!(err, LoadError::Io { .. }));
    assert!(err.to_string().contains("nowhere.scene.json"), "{err}");

    let paths = ScenePaths {
        detections: Some(fixtures().join("nowhere.detections.json")),
        ..ScenePaths::new(fixtures().join("office.scene.json"))
    };
    let err = load_scene(&paths, &SessionConfig::default()).unwrap_err();
    assert!(err.to_string().contains("nowhere.detections.json"), "{err}");
}

#[test]
fn schema_errors_point_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_slice(&fs::read(fixtures().join("office.scene.json")).unwrap()).unwrap();
    v["nodes"][0]["bbox"] = "wide".into();
    let path = dir.path().join("bad.scene.json");
    fs::write(&path, v.to_string()).unwrap();
    let err = load_scene(&ScenePaths::new(&path), &SessionConfig::default()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("bad.scene.json") && msg.contains("nodes[0].bbox"), "{msg}");
}

#[test]
fn twin_scenes_bypass_the_spatializer() {
    let load = |name: &str| {
        load_scene(
            &ScenePaths::new(fixtures().join(format!("{name}.scene.json"))),
            &SessionConfig::default(),
        )
        .unwrap()
    };
    let building = load("building");
    assert!(building.report.spatializer_bypassed);
    assert!(building.report.to_string().ends_with("spatializer bypassed"));
    assert!(!load("office").report.spatializer_bypassed);
}

#[test]
fn config_overrides_apply_and_bad_ones_fail() {
    let paths = ScenePaths::new(fixtures().join("office.scene.json"));
    let cfg = SessionConfig {
        overrides: vec!["hold_duration_ms=800".into()],
        ..SessionConfig::default()
    };
    assert_eq!(load_scene(&paths, &cfg).unwrap().snapshot.config.hold_duration_ms, 800);

    let cfg = SessionConfig {
        overrides: vec!["no_such_knob=1".into()],
        ..SessionConfig::default()
    };
    assert!(matches!(load_scene(&paths, &cfg), Err(LoadError::Config(_))));
}

#[test]
fn decreasing_timestamps_are_rejected() {
    let text = "{\"t\":5,\"type\":\"Tick\",\"dt\":0.1}\n\n{\"t\":4,\"type\":\"Tick\",\"dt\":0.1}\n";
    match parse_trace(text) {
        Err(TraceError::Decreasing { line, prev, t }) => assert_eq!((line, prev, t), (3, 5, 4)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn trace_records_replay_relative_to_the_fixture_root() {
    let rec: TraceRecord = serde_json::from_value(serde_json::json!({
        "scene": "kitchen.scene.json",
        "trace": "traces/kitchen-01.jsonl",
        "expected": "golden/kitchen-01.feedback.jsonl",
    }))
    .unwrap();
    let cfg = SessionConfig {
        fixture_root: Some(fixtures()),
        ..SessionConfig::default()
    };
    let outcome = replay_trace(&rec, &cfg).unwrap();
    assert_eq!(outcome.matched, Some(true));
    assert_eq!(outcome.log, golden("kitchen"));
}

fn envelope(seq: u64, kind: &str, payload: &str) -> String {
    format!(r#"{{"seq":{seq},"kind":"{kind}","payload":{payload}}}"#)
}

fn feedback_log(replies: &[String]) -> String {
    let mut log = String::new();
    for r in replies {
        let env: Envelope = serde_json::from_str(r).unwrap();
        if env.kind == EnvelopeKind::Feedback {
            log.push_str(env.payload_str());
            log.push('\n');
        }
    }
    log
}

#[test]
fn interleaved_connections_do_not_share_state() {
    let cfg = SessionConfig {
        fixture_root: Some(fixtures()),
        ..SessionConfig::default()
    };
    let mut a = ConnectionHost::new(cfg.clone());
    let mut b = ConnectionHost::new(cfg);
    a.handle_text(&envelope(1, "LoadScene", r#"{"scene":"office.scene.json"}"#));
    b.handle_text(&envelope(1, "LoadScene", r#"{"scene":"drone.scene.json"}"#));
    let text_a = fs::read_to_string(fixtures().join("traces/office-01.jsonl")).unwrap();
    let text_b = fs::read_to_string(fixtures().join("traces/drone-01.jsonl")).unwrap();
    let (mut la, mut lb) = (text_a.lines(), text_b.lines());
    let (mut ra, mut rb) = (Vec::new(), Vec::new());
    let mut seq = 1;
    loop {
        seq += 1;
        let (x, y) = (la.next(), lb.next());
        if x.is_none() && y.is_none() {
            break;
        }
        if let Some(line) = x {
            ra.extend(a.handle_text(&envelope(seq, "Gesture", line)));
        }
        if let Some(line) = y {
            rb.extend(b.handle_text(&envelope(seq, "Gesture", line)));
        }
    }
    assert_eq!(feedback_log(&ra), golden("office"));
    assert_eq!(feedback_log(&rb), golden("drone"));
}

#[test]
fn layout_envelopes_follow_layout_changes() {
    let mut host = ConnectionHost::new(SessionConfig {
        fixture_root: Some(fixtures()),
        ..SessionConfig::default()
    });
    host.handle_text(&envelope(1, "LoadScene", r#"{"scene":"office.scene.json"}"#));
    let mut replies = Vec::new();
    for (i, line) in fs::read_to_string(fixtures().join("traces/office-01.jsonl"))
        .unwrap()
        .lines()
        .take(3)
        .enumerate()
    {
        replies.extend(host.handle_text(&envelope(i as u64 + 2, "Gesture", line)));
    }
    let kinds: Vec<EnvelopeKind> = replies
        .iter()
        .map(|r| serde_json::from_str::<Envelope>(r).unwrap().kind)
        .collect();
    assert_eq!(kinds.last(), Some(&EnvelopeKind::Layout));
    let last: Value = serde_json::from_str(replies.last().unwrap()).unwrap();
    assert_eq!(
        last["payload"]["boxes"].as_array().unwrap().len(),
        host.state().layout.boxes.len()
    );
}

#[test]
fn protocol_errors_keep_the_connection_usable() {
    let dir = tempfile::tempdir().unwrap();
    let persist = dir.path().join("state.json");
    let mut host = ConnectionHost::new(SessionConfig {
        fixture_root: Some(fixtures()),
        persistence: Some(persist.clone()),
        ..SessionConfig::default()
    });
    let kind = |replies: &[String]| serde_json::from_str::<Envelope>(&replies[0]).unwrap().kind;

    assert_eq!(
        kind(&host.handle_text(r#"{"seq":1,"kind":"Gesture","payload":{"t":0,"type":"Tick","dt":0.1}}"#)),
        EnvelopeKind::Error
    );
    assert_eq!(kind(&host.handle_text("\u{0}garbage")), EnvelopeKind::Error);
    assert_eq!(
        kind(&host.handle_text(&envelope(2, "LoadScene", r#"{"scene":"missing.json"}"#))),
        EnvelopeKind::Error
    );
    assert_eq!(
        kind(&host.handle_text(&envelope(3, "LoadScene", r#"{"scene":"office.scene.json"}"#))),
        EnvelopeKind::Snapshot
    );
    assert_eq!(
        kind(&host.handle_text(&envelope(3, "Snapshot", "{}"))),
        EnvelopeKind::Error
    );
    assert!(host
        .handle_text(&envelope(4, "Gesture", r#"{"t":50,"type":"GazeMove","px":[480,440]}"#))
        .is_empty());
    assert_eq!(
        kind(&host.handle_text(&envelope(5, "Gesture", r#"{"t":40,"type":"Tick","dt":0.1}"#))),
        EnvelopeKind::Error
    );
    assert_eq!(
        kind(&host.handle_text(&envelope(6, "Configure", r#"{"set":["zoom_in_ratio=1.6"]}"#))),
        EnvelopeKind::Configure
    );
    assert_eq!(host.context().unwrap().config.zoom_in_ratio, 1.6);
    assert_eq!(
        kind(&host.handle_text(&envelope(7, "Configure", r#"{"set":["zoom_in_ratio=abc"]}"#))),
        EnvelopeKind::Error
    );

    let snap = host.handle_text(&envelope(8, "Snapshot", "{}"));
    assert_eq!(kind(&snap), EnvelopeKind::Snapshot);
    let saved = fs::read(&persist).unwrap();
    assert_eq!(snapshot_restore(&saved).unwrap(), *host.state());
    assert_eq!(host.state().gaze_px, Some([480.0, 440.0]));
}
