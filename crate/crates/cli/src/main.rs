use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use proxy_core::engine::{activate_proxies, Emitter, Hand, InteractionState, SceneContext};
use proxy_core::session::{
    load_scene, parse_trace, replay_events, resolve_path, serve_session, snapshot_export, snapshot_restore, ScenePaths,
    SessionConfig, FIXTURE_DIR_ENV,
};

#[derive(Parser)]
#[command(
    name = "proxyctl",
    version,
    about = "Validate scenes, replay gesture traces and host proxy sessions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a scene and print its validation report.
    Validate(SceneArgs),
    /// Replay a gesture trace and print or compare the feedback log.
    Replay(ReplayArgs),
    /// Serve live sessions over WebSocket.
    Serve(ServeArgs),
    /// Write the proxy layout after a trace, or after activating at a gaze point.
    ExportLayout(ExportArgs),
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Rebuild the hierarchy from this detection fixture.
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Merge attributes from this annotation fixture.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Config override, `field=value`; repeatable.
    #[arg(long = "config", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Root for relative fixture paths.
    #[arg(long, env = FIXTURE_DIR_ENV)]
    fixture_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn session(&self) -> SessionConfig {
        SessionConfig {
            overrides: self.overrides.clone(),
            fixture_root: self.fixture_dir.clone(),
            persistence: None,
        }
    }
}

impl SceneArgs {
    fn paths(&self) -> ScenePaths {
        ScenePaths {
            scene: self.scene.clone(),
            detections: self.detections.clone(),
            annotations: self.annotations.clone(),
        }
    }
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long)]
    trace: PathBuf,
    /// Compare the log byte-wise against this file; exit 1 on mismatch.
    #[arg(long)]
    expected: Option<PathBuf>,
    /// Write the log here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from a previously exported state.
    #[arg(long)]
    restore_state: Option<PathBuf>,
    /// Export the final state here.
    #[arg(long)]
    save_state: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8765)]
    port: u16,
    /// Where Snapshot requests also write the exported state.
    #[arg(long)]
    persist: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, conflicts_with = "gaze")]
    trace: Option<PathBuf>,
    /// Activate at this gaze pixel, `x,y`.
    #[arg(long, value_parser = parse_point)]
    gaze: Option<[f64; 2]>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected `x,y`")?;
    let x = x.trim().parse().map_err(|e| format!("{e}"))?;
    let y = y.trim().parse().map_err(|e| format!("{e}"))?;
    Ok([x, y])
}

fn load_context(args: &SceneArgs) -> Result<Arc<SceneContext>> {
    let loaded = load_scene(&args.paths(), &args.common.session())?;
    log::info!("{}", loaded.report);
    Ok(Arc::new(SceneContext::new(loaded.snapshot)))
}

fn read_trace(path: &Path, common: &CommonArgs) -> Result<Vec<proxy_core::GestureEvent>> {
    let path = resolve_path(path, common.fixture_dir.as_deref());
    let text = fs::read_to_string(&path).with_context(|| path.display().to_string())?;
    parse_trace(&text).with_context(|| path.display().to_string())
}

fn validate(args: &SceneArgs) -> Result<ExitCode> {
    let loaded = load_scene(&args.paths(), &args.common.session())?;
    println!("{}", loaded.report);
    Ok(ExitCode::SUCCESS)
}

fn first_difference(a: &str, b: &str) -> Option<(usize, String, String)> {
    let mut la = a.lines();
    let mut lb = b.lines();
    for n in 1.. {
        match (la.next(), lb.next()) {
            (None, None) => return None,
            (x, y) if x != y => {
                return Some((n, x.unwrap_or("<end>").to_string(), y.unwrap_or("<end>").to_string()));
            }
            _ => {}
        }
    }
    None
}

fn replay(args: &ReplayArgs) -> Result<ExitCode> {
    let common = &args.scene.common;
    let events = read_trace(&args.trace, common)?;
    let ctx = load_context(&args.scene)?;
    let start = match &args.restore_state {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| p.display().to_string())?;
            snapshot_restore(&bytes).with_context(|| p.display().to_string())?
        }
        None => InteractionState::default(),
    };
    let (state, log) = replay_events(&ctx, start, &events);
    if let Some(p) = &args.save_state {
        fs::write(p, snapshot_export(&state)).with_context(|| p.display().to_string())?;
    }
    match &args.out {
        Some(p) => fs::write(p, &log).with_context(|| p.display().to_string())?,
        None => print!("{log}"),
    }
    let Some(expected) = &args.expected else {
        return Ok(ExitCode::SUCCESS);
    };
    let expected = resolve_path(expected, common.fixture_dir.as_deref());
    let want = fs::read_to_string(&expected).with_context(|| expected.display().to_string())?;
    match first_difference(&want, &log) {
        None => {
            eprintln!("match: {} events, {} feedback lines", events.len(), log.lines().count());
            Ok(ExitCode::SUCCESS)
        }
        Some((line, want, got)) => {
            eprintln!("mismatch at line {line}\n  expected: {want}\n  actual:   {got}");
            Ok(ExitCode::from(1))
        }
    }
}

fn export_layout(args: &ExportArgs) -> Result<ExitCode> {
    let ctx = load_context(&args.scene)?;
    let state = if let Some(trace) = &args.trace {
        let events = read_trace(trace, &args.scene.common)?;
        replay_events(&ctx, InteractionState::default(), &events).0
    } else if let Some(gaze) = args.gaze {
        let mut state = InteractionState {
            gaze_px: Some(gaze),
            ..InteractionState::default()
        };
        let mut out = Emitter::new(0);
        activate_proxies(&ctx, &mut state, &mut out, Hand::Right)?;
        state
    } else {
        bail!("either --trace or --gaze is required");
    };
    let mut json = serde_json::to_string_pretty(&state.layout.export())?;
    json.push('\n');
    fs::write(&args.out, json).with_context(|| args.out.display().to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(a) => validate(&a),
        Command::Replay(a) => replay(&a),
        Command::ExportLayout(a) => export_layout(&a),
        Command::Serve(a) => {
            let mut cfg = a.common.session();
            cfg.persistence = a.persist;
            serve_session(cfg, a.port)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
