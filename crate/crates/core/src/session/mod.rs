//! Session hosting: fixture loading, trace replay, state persistence and the
//! live envelope protocol.

mod protocol;
mod server;
mod trace;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::engine::InteractionState;
use crate::perception::{
    build_hierarchy, enrich_attributes, AnnotatorSource, DetectionSource, FixtureAnnotations, FixtureDetections,
    SourceError,
};
use crate::scene::{parse_json_with_warnings, validate_snapshot, SceneSnapshot, SchemaError, Violation};

pub use protocol::{ConnectionHost, Envelope, EnvelopeKind, LoadSceneRequest};
pub use server::{serve_session, spawn_server, BindError};
pub use trace::{parse_trace, replay_events, replay_trace, ReplayOutcome, TraceError, TraceRecord};

/// Root for relative fixture paths when set.
pub const FIXTURE_DIR_ENV: &str = "PROXY_FIXTURE_DIR";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error("detection or annotation source failed: {0}")]
    Source(#[from] SourceError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Fixture files making up one scene.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenePaths {
    pub scene: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detections: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<PathBuf>,
}

impl ScenePaths {
    pub fn new(scene: impl Into<PathBuf>) -> Self {
        Self {
            scene: scene.into(),
            ..Self::default()
        }
    }

    pub fn resolved(&self, root: Option<&Path>) -> Self {
        Self {
            scene: resolve_path(&self.scene, root),
            detections: self.detections.as_deref().map(|p| resolve_path(p, root)),
            annotations: self.annotations.as_deref().map(|p| resolve_path(p, root)),
        }
    }
}

/// Relative paths are taken from `root`, falling back to
/// `$PROXY_FIXTURE_DIR`, then the working directory.
pub fn resolve_path(path: &Path, root: Option<&Path>) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match root
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(FIXTURE_DIR_ENV).map(PathBuf::from))
    {
        Some(r) => r.join(path),
        None => path.to_path_buf(),
    }
}

/// Per-session settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// `key=value` config overrides, applied in order.
    #[serde(default)]
    pub overrides: Vec<String>,
    /// Directory relative fixture paths are resolved against.
    #[serde(default)]
    pub fixture_root: Option<PathBuf>,
    /// Where `Snapshot` requests also write the exported state.
    #[serde(default)]
    pub persistence: Option<PathBuf>,
}

impl SessionConfig {
    pub fn apply(&self, base: &Config) -> Result<Config, ConfigError> {
        let mut cfg = base.clone();
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg)
    }
}

/// Result of validating a loaded scene.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub nodes: usize,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
    pub spatializer_bypassed: bool,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nodes, {} violations", self.nodes, self.violations.len())?;
        if self.spatializer_bypassed {
            write!(f, ", spatializer bypassed")?;
        }
        for w in &self.warnings {
            write!(f, "\nwarning: {w}")?;
        }
        for v in &self.violations {
            write!(f, "\n{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedScene {
    /// Carries the effective config, overrides applied.
    pub snapshot: SceneSnapshot,
    pub report: ValidationReport,
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn schema(path: &Path) -> impl FnOnce(SchemaError) -> LoadError + '_ {
    move |source| LoadError::Schema {
        path: path.to_path_buf(),
        source,
    }
}

/// Load a scene from fixture files. With a detection fixture the node tree
/// is rebuilt by recursive detection over the whole image; an annotation
/// fixture is merged into whatever nodes result.
pub fn load_scene(paths: &ScenePaths, session: &SessionConfig) -> Result<LoadedScene, LoadError> {
    let paths = paths.resolved(session.fixture_root.as_deref());
    let (mut snapshot, mut warnings) =
        parse_json_with_warnings::<SceneSnapshot>(&read(&paths.scene)?).map_err(schema(&paths.scene))?;
    snapshot.config = session.apply(&snapshot.config)?;

    let detections = match &paths.detections {
        Some(p) => {
            let (d, w) = FixtureDetections::parse(&read(p)?).map_err(schema(p))?;
            warnings.extend(w);
            Some(d)
        }
        None => None,
    };
    let annotations = match &paths.annotations {
        Some(p) => {
            let (a, w) = FixtureAnnotations::parse(&read(p)?).map_err(schema(p))?;
            warnings.extend(w);
            Some(a)
        }
        None => None,
    };
    let detector = detections.as_ref().map(|d| d as &dyn DetectionSource);
    let annotator = annotations.as_ref().map(|a| a as &dyn AnnotatorSource);
    rebuild_nodes(&mut snapshot, detector, annotator)?;

    let violations = validate_snapshot(&snapshot);
    if !violations.is_empty() {
        return Err(LoadError::Schema {
            path: paths.scene,
            source: SchemaError::Invalid(violations),
        });
    }
    let report = ValidationReport {
        nodes: snapshot.node_count(),
        violations,
        warnings,
        spatializer_bypassed: snapshot.spatializer_bypassed(),
    };
    Ok(LoadedScene { snapshot, report })
}

/// Replace the snapshot's nodes with a detected hierarchy and/or enrich
/// them with annotations.
pub fn rebuild_nodes(
    snapshot: &mut SceneSnapshot,
    detector: Option<&dyn DetectionSource>,
    annotator: Option<&dyn AnnotatorSource>,
) -> Result<(), SourceError> {
    if let Some(d) = detector {
        snapshot.nodes = build_hierarchy(d, snapshot.image_box(), &snapshot.config)?;
    }
    if let Some(a) = annotator {
        let report = enrich_attributes(&mut snapshot.nodes, a);
        for (id, msg) in report.failed {
            log::warn!("annotation failed for {id}: {msg}");
        }
    }
    Ok(())
}

const STATE_FORMAT: &str = "proxy-session-state/1";

#[derive(Serialize)]
struct StateFileRef<'a> {
    format: &'a str,
    state: &'a InteractionState,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    format: String,
    state: InteractionState,
}

/// Serialize a whole interaction state (selection, groups, level, layout,
/// hand and gesture progress) to a restorable file.
pub fn snapshot_export(state: &InteractionState) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&StateFileRef {
        format: STATE_FORMAT,
        state,
    })
    .expect("state serialization is infallible");
    out.push(b'\n');
    out
}

pub fn snapshot_restore(bytes: &[u8]) -> Result<InteractionState, SchemaError> {
    let (file, _) = parse_json_with_warnings::<StateFile>(bytes)?;
    if file.format != STATE_FORMAT {
        return Err(SchemaError::Malformed {
            path: "format".into(),
            message: format!("expected `{STATE_FORMAT}`, found `{}`", file.format),
        });
    }
    Ok(file.state)
}
