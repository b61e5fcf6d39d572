//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Tolerances:
//! - dedup threshold 0.75 (strict `>`), no slack
//! - raycast: nearest-hit distance and point within 1e-6 m
//! - layout: gaps at least pitch - 1e-9 m, pitch = proxy_size + min_gap
//! - lazy-follow: alpha within 1e-9, dead-zone anchor bit-identical
//! - golden logs: byte-identical

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

use proxy_core::engine::{follow_alpha, lazy_follow_tick};
use proxy_core::perception::{DetectionSource, FixtureDetections, RegionQuery, MAX_DEPTH};
use proxy_core::scene::TriangleMesh;
use proxy_core::session::{
    load_scene, parse_trace, replay_events, spawn_server, Envelope, EnvelopeKind, ScenePaths, SessionConfig,
};
use proxy_core::spatial::MIN_HIT_T;
use proxy_core::{
    build_hierarchy, dedup_detections, intersect_mesh, process_event, solve_layout, BBox2D, Config, Detection,
    InteractionState, Ray, SceneContext, SceneIndex, SourceError, Vec3,
};

const SCENES: [&str; 4] = ["office", "kitchen", "building", "drone"];

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:.2?}, budget {budget:?}"))?;
    Ok(took)
}

// Independent overlap measure for the dedup check.
fn overlap(a: &BBox2D, b: &BBox2D) -> f64 {
    let w = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let h = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    if w <= 0.0 || h <= 0.0 {
        return 0.0;
    }
    let inter = w * h;
    inter / (a.w * a.h + b.w * b.h - inter)
}

fn random_detections(rng: &mut ChaCha8Rng) -> Vec<Detection> {
    let n = rng.random_range(0..=50);
    let mut out: Vec<Detection> = Vec::with_capacity(n);
    while out.len() < n {
        // Half of the boxes jitter an earlier one so duplicates are common.
        let bbox = match out.len() {
            k if k > 0 && rng.random_bool(0.5) => {
                let base = out[rng.random_range(0..k)].bbox;
                let j = base.w.min(base.h) * 0.15;
                BBox2D::new(
                    base.x + rng.random_range(-j..=j),
                    base.y + rng.random_range(-j..=j),
                    base.w * rng.random_range(0.85..1.15),
                    base.h * rng.random_range(0.85..1.15),
                )
            }
            _ => BBox2D::new(
                rng.random_range(0.0..1000.0),
                rng.random_range(0.0..700.0),
                rng.random_range(4.0..300.0),
                rng.random_range(4.0..300.0),
            ),
        };
        let label = ["book", "cup", "shelf"][rng.random_range(0..3)];
        out.push(Detection::new(bbox, label, rng.random_range(0.0..=1.0)));
    }
    out
}

fn dedup_contract() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0D0);
    let mut removed_total = 0usize;
    for set in 0..10_000 {
        let input = random_detections(&mut rng);
        let kept = dedup_detections(&input, 0.75);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                let v = overlap(&a.bbox, &b.bbox);
                ensure(v <= 0.75, || format!("set {set}: survivors overlap at IoU {v}"))?;
            }
        }
        let mut pool: Vec<&Detection> = kept.iter().collect();
        for d in &input {
            if let Some(pos) = pool.iter().position(|k| *k == d) {
                pool.swap_remove(pos);
                continue;
            }
            removed_total += 1;
            let covered = kept
                .iter()
                .any(|k| overlap(&k.bbox, &d.bbox) > 0.75 && k.bbox.w * k.bbox.h >= d.bbox.w * d.bbox.h);
            ensure(covered, || {
                format!("set {set}: {:?} removed without a larger duplicate", d.bbox)
            })?;
        }
        ensure(pool.is_empty(), || {
            format!("set {set}: output contains boxes not in the input")
        })?;
    }
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!("10000 sets, {removed_total} duplicates removed, {took:.2?}"))
}

struct Recording<'a> {
    inner: &'a FixtureDetections,
    keys: RefCell<BTreeSet<String>>,
}

impl DetectionSource for Recording<'_> {
    fn detect(&self, query: &RegionQuery) -> Result<Vec<Detection>, SourceError> {
        self.keys.borrow_mut().insert(query.key.clone());
        self.inner.detect(query)
    }
}

fn check_one_level(name: &str) -> Result<usize, String> {
    let fx = fixtures();
    let loaded = load_scene(
        &ScenePaths::new(fx.join(format!("{name}.scene.json"))),
        &SessionConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let ctx = SceneContext::new(loaded.snapshot);
    let events = parse_trace(&read(&fx.join(format!("traces/{name}-01.jsonl")))?).map_err(|e| e.to_string())?;
    let mut state = InteractionState::default();
    for (i, ev) in events.iter().enumerate() {
        state = process_event(&ctx, &state, ev).0;
        for id in &state.visible {
            let level = ctx.index.get(id).map(|n| n.level);
            ensure(level == Some(state.active_level), || {
                format!(
                    "{name} event {i}: `{id}` visible at level {level:?}, active {}",
                    state.active_level
                )
            })?;
        }
        let partitions: Vec<_> = state.semantic.iter().flat_map(|s| &s.partitions).collect();
        for b in &state.layout.boxes {
            let ok = state.visible.contains(&b.id)
                || partitions.iter().any(|p| p.id == b.id)
                || state.groups.iter().any(|g| g.id == b.id);
            ensure(ok, || {
                format!("{name} event {i}: layout box `{}` is not at the active level", b.id)
            })?;
        }
        for p in &partitions {
            for m in &p.members {
                ensure(state.visible.contains(m), || {
                    format!("{name} event {i}: partition member `{m}` hidden")
                })?;
            }
        }
    }
    Ok(events.len())
}

fn hierarchy_contract() -> Outcome {
    let fx = fixtures();
    let mut notes = Vec::new();
    for name in ["office", "kitchen", "building"] {
        let plain = ScenePaths::new(fx.join(format!("{name}.scene.json")));
        let loaded = load_scene(&plain, &SessionConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure(loaded.report.violations.is_empty(), || {
            format!("{name}: {} violations", loaded.report.violations.len())
        })?;
        let rebuilt_paths = ScenePaths {
            detections: Some(fx.join(format!("{name}.detections.json"))),
            annotations: Some(fx.join(format!("{name}.annotations.json"))),
            ..plain
        };
        let rebuilt = load_scene(&rebuilt_paths, &SessionConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure(rebuilt.report.violations.is_empty(), || {
            format!("{name}: rebuilt tree has violations")
        })?;
        // Detection yields image-space trees; twin positions come from the scene file.
        let strip = |nodes: &[proxy_core::SceneNode]| {
            let mut nodes = nodes.to_vec();
            for n in &mut nodes {
                n.walk_mut(&mut |n| n.world_pos = None);
            }
            nodes
        };
        ensure(strip(&rebuilt.snapshot.nodes) == strip(&loaded.snapshot.nodes), || {
            format!("{name}: tree built from detections differs from the scene file")
        })?;

        let (dets, _) = FixtureDetections::parse(
            fs::read(fx.join(format!("{name}.detections.json")))
                .map_err(|e| e.to_string())?
                .as_slice(),
        )
        .map_err(|e| e.to_string())?;
        let rec = Recording {
            inner: &dets,
            keys: RefCell::new(BTreeSet::new()),
        };
        let cfg = loaded.snapshot.config.clone();
        let nodes = build_hierarchy(&rec, loaded.snapshot.image_box(), &cfg).map_err(|e| e.to_string())?;
        let keys = rec.keys.into_inner();
        let mut small = 0;
        let mut stack: Vec<_> = nodes.iter().collect();
        while let Some(n) = stack.pop() {
            let expandable = n.level < MAX_DEPTH && n.bbox.min_side() >= cfg.min_bbox_px;
            ensure(keys.contains(&n.id) == expandable, || {
                format!(
                    "{name}: `{}` ({}px side) queried={}",
                    n.id,
                    n.bbox.min_side(),
                    keys.contains(&n.id)
                )
            })?;
            if n.bbox.min_side() < cfg.min_bbox_px {
                small += 1;
                ensure(n.children.is_empty(), || {
                    format!("{name}: `{}` below min size has children", n.id)
                })?;
            }
            stack.extend(n.children.iter());
        }
        let count = SceneIndex::new(&loaded.snapshot).iter().count();
        notes.push(format!("{name} {count} nodes/{small} leaf-by-size"));
    }
    let mut events = 0;
    for name in SCENES {
        events += check_one_level(name)?;
    }
    Ok(format!(
        "{}; one level bound over {events} replayed events",
        notes.join(", ")
    ))
}

// Brute-force oracle: plane hit, then an inside test by edge orientation.
fn nearest_by_planes(origin: &Vec3, dir: &Vec3, mesh: &TriangleMesh) -> Option<(f64, Vec3)> {
    let mut best: Option<(f64, Vec3)> = None;
    for tri in &mesh.triangles {
        let [a, b, c] = tri.map(|i| mesh.vertices[i]);
        let n = (b - a).cross(&(c - a));
        let denom = n.dot(dir);
        if denom.abs() < 1e-12 {
            continue;
        }
        let t = n.dot(&(a - origin)) / denom;
        if t < MIN_HIT_T {
            continue;
        }
        let p = origin + dir * t;
        let inside = [(a, b), (b, c), (c, a)]
            .iter()
            .all(|(u, v)| (v - u).cross(&(p - u)).dot(&n) >= 0.0);
        if inside && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, p));
        }
    }
    best
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-r..r),
        rng.random_range(-r..r),
        rng.random_range(-r..r),
    )
}

fn raycast_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut mesh = TriangleMesh::default();
    for i in 0..120 {
        let c = random_vec(&mut rng, 2.0);
        for _ in 0..3 {
            mesh.vertices.push(c + random_vec(&mut rng, 0.6));
        }
        mesh.triangles.push([3 * i, 3 * i + 1, 3 * i + 2]);
    }
    let mut hits = 0;
    for k in 0..1000 {
        let origin = random_vec(&mut rng, 3.0);
        let dir = if k % 2 == 0 {
            // Aim at an interior point of a random triangle.
            let tri = mesh.triangles[rng.random_range(0..mesh.triangles.len())];
            let (mut u, mut v): (f64, f64) = (rng.random_range(0.05..0.9), rng.random_range(0.05..0.9));
            if u + v > 0.95 {
                (u, v) = (0.95 - u, 0.95 - v);
            }
            let [a, b, c] = tri.map(|i| mesh.vertices[i]);
            a + (b - a) * u.max(0.02) + (c - a) * v.max(0.02) - origin
        } else {
            random_vec(&mut rng, 1.0)
        };
        if dir.norm() < 1e-3 {
            continue;
        }
        let ray = Ray::new(origin, dir);
        let got = intersect_mesh(&ray, &mesh);
        let want = nearest_by_planes(&ray.origin, &ray.direction, &mesh);
        match (got, want) {
            (None, None) => {}
            (Some(h), Some((t, p))) => {
                hits += 1;
                ensure((h.t - t).abs() <= 1e-6 && (h.point - p).norm() <= 1e-6, || {
                    format!("ray {k}: t {} vs oracle {t}", h.t)
                })?;
            }
            (g, w) => return Err(format!("ray {k}: engine {g:?}, oracle {w:?}")),
        }
    }

    // Planes with a closed-form answer.
    let mut analytic = 0;
    for k in 0..200 {
        let d = rng.random_range(0.5..4.0);
        let plane = TriangleMesh {
            vertices: vec![
                Vec3::new(-50.0, -50.0, d),
                Vec3::new(50.0, -50.0, d),
                Vec3::new(50.0, 50.0, d),
                Vec3::new(-50.0, 50.0, d),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        };
        let origin = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..0.4),
        );
        let dir = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.3..1.0),
        )
        .normalize();
        let t = (d - origin.z) / dir.z;
        let h = intersect_mesh(&Ray::new(origin, dir), &plane).ok_or(format!("plane case {k} missed"))?;
        ensure(
            (h.t - t).abs() <= 1e-6 && (h.point - (origin + dir * t)).norm() <= 1e-6,
            || format!("plane case {k}: t {} vs {t}", h.t),
        )?;
        let away = intersect_mesh(&Ray::new(origin, -dir), &plane);
        ensure(away.is_none(), || format!("plane case {k}: hit behind the origin"))?;
        analytic += 1;
    }
    let took = within_budget(start, Duration::from_secs(5))?;
    Ok(format!(
        "1000 rays ({hits} hits) match the scan, {analytic} plane cases, {took:.2?}"
    ))
}

fn separation_axis(delta: &Vec3) -> usize {
    let a = delta.map(f64::abs);
    if a.x >= a.y && a.x >= a.z {
        0
    } else if a.y >= a.z {
        1
    } else {
        2
    }
}

fn random_positions(rng: &mut ChaCha8Rng) -> BTreeMap<String, Vec3> {
    let n = rng.random_range(1..=20);
    let spread = [0.05, 0.5, 3.0][rng.random_range(0..3)];
    let mut out = BTreeMap::new();
    let mut prev = Vec3::zeros();
    for i in 0..n {
        let mut p = random_vec(rng, spread);
        // Some near-ties on one axis.
        if i > 0 && rng.random_bool(0.3) {
            let k = rng.random_range(0..3);
            p[k] = prev[k] + rng.random_range(-0.01..0.01);
        }
        prev = p;
        out.insert(format!("1.{}", i + 1), p);
    }
    out
}

fn layout_suite() -> Outcome {
    let start = Instant::now();
    let cfg = Config::default();
    let pitch = cfg.proxy_size_m + cfg.min_gap_m;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A70);
    let mut pairs = 0usize;
    for scene in 0..1000 {
        let positions = random_positions(&mut rng);
        let anchor = random_vec(&mut rng, 0.5);
        let first = solve_layout(&positions, anchor, &cfg).map_err(|e| e.to_string())?;
        let second = solve_layout(&positions, anchor, &cfg).map_err(|e| e.to_string())?;
        let bits = |l: &proxy_core::ProxyLayout| -> Vec<u64> {
            l.boxes
                .iter()
                .flat_map(|b| {
                    b.center
                        .iter()
                        .chain([&b.half_extent, &l.scale_used])
                        .map(|v| v.to_bits())
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        ensure(first == second && bits(&first) == bits(&second), || {
            format!("scene {scene}: runs differ")
        })?;
        ensure(first.boxes.len() == positions.len(), || {
            format!("scene {scene}: box count")
        })?;

        let ids: Vec<_> = positions.keys().collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                pairs += 1;
                let world = positions[*b] - positions[*a];
                let k = separation_axis(&world);
                let la = first.get(a).ok_or("missing box")?.center;
                let lb = first.get(b).ok_or("missing box")?.center;
                let gap = (lb[k] - la[k]).abs();
                ensure(gap >= pitch - 1e-9, || {
                    format!("scene {scene}: {a}/{b} gap {gap} on axis {k}")
                })?;
                if world[k].abs() > cfg.tie_tolerance_m {
                    ensure((lb[k] - la[k]).signum() == world[k].signum(), || {
                        format!("scene {scene}: {a}/{b} order flipped on axis {k}")
                    })?;
                }
            }
        }
    }
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!("1000 scenes, {pairs} pairs, pitch {pitch:.3} m, {took:.2?}"))
}

fn lazy_follow() -> Outcome {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF011);
    for case in 0..10_000 {
        let anchor = random_vec(&mut rng, 1.0);
        let dir = random_vec(&mut rng, 1.0);
        if dir.norm() < 1e-3 {
            continue;
        }
        let dir = dir.normalize();
        let dt = rng.random_range(0.001..0.5);

        let near = anchor + dir * rng.random_range(0.0..=cfg.follow_threshold_m * 0.999_999);
        let kept = lazy_follow_tick(anchor, near, dt, &cfg);
        ensure(kept == anchor, || {
            format!("case {case}: anchor moved inside the dead zone")
        })?;

        let far = anchor + dir * rng.random_range(cfg.follow_threshold_m * 1.000_001..1.5);
        let next = lazy_follow_tick(anchor, far, dt, &cfg);
        ensure((far - next).norm() < (far - anchor).norm(), || {
            format!("case {case}: not contracting")
        })?;
        let alpha = 1.0 - (-dt / cfg.follow_time_constant_s).exp();
        ensure(
            (follow_alpha(dt, cfg.follow_time_constant_s) - alpha).abs() <= 1e-9,
            || {
                format!(
                    "case {case}: alpha {} vs {alpha}",
                    follow_alpha(dt, cfg.follow_time_constant_s)
                )
            },
        )?;
        let want = anchor + (far - anchor) * alpha;
        ensure((next - want).norm() <= 1e-9, || {
            format!("case {case}: step off by {}", (next - want).norm())
        })?;

        // Repeated ticks toward a stationary hand shrink the distance until
        // it falls inside the dead zone, then stop.
        let mut a = anchor;
        for _ in 0..200 {
            let b = lazy_follow_tick(a, far, 0.02, &cfg);
            let (d0, d1) = ((far - a).norm(), (far - b).norm());
            if d0 > cfg.follow_threshold_m {
                ensure(d1 < d0, || format!("case {case}: iteration did not contract"))?;
            } else {
                ensure(b == a, || format!("case {case}: moved after settling"))?;
                break;
            }
            a = b;
        }
    }
    Ok("10000 cases: dead zone fixed, contraction beyond, alpha within 1e-9".into())
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn replay_log(name: &str) -> Result<String, String> {
    let fx = fixtures();
    let loaded = load_scene(
        &ScenePaths::new(fx.join(format!("{name}.scene.json"))),
        &SessionConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let ctx = SceneContext::new(loaded.snapshot);
    let events = parse_trace(&read(&fx.join(format!("traces/{name}-01.jsonl")))?).map_err(|e| e.to_string())?;
    Ok(replay_events(&ctx, InteractionState::default(), &events).1)
}

fn golden(name: &str) -> Result<String, String> {
    read(&fixtures().join(format!("golden/{name}-01.feedback.jsonl")))
}

fn parse_log(log: &str) -> Vec<Value> {
    log.lines()
        .map(|l| serde_json::from_str(l).expect("feedback line is JSON"))
        .collect()
}

fn of_type<'a>(log: &'a [Value], ty: &'a str) -> impl Iterator<Item = &'a Value> + 'a {
    log.iter().filter(move |v| v["type"] == ty)
}

fn ids(v: &Value) -> Vec<String> {
    v.as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect())
        .unwrap_or_default()
}

fn narrative_checks(logs: &BTreeMap<&str, Vec<Value>>, exp: &Value) -> Result<(), String> {
    let office = &logs["office"];
    let e = &exp["office"];
    let selections: Vec<_> = of_type(office, "SelectionChanged").map(|v| ids(&v["ids"])).collect();
    ensure(selections.contains(&ids(&e["xr_books"])), || {
        "office: no selection equals the XR books".into()
    })?;
    let panels: Vec<_> = of_type(office, "ShowPanel")
        .take(3)
        .map(|v| v["id"].as_str().unwrap_or("").to_string())
        .collect();
    ensure(panels == ids(&e["skimmed"]), || format!("office: skimmed {panels:?}"))?;
    let sum = e["container_price_sum"]
        .as_f64()
        .ok_or("expectations lack the price sum")?;
    let agg = of_type(office, "AggregateComputed")
        .filter(|v| v["key"] == "price")
        .last()
        .ok_or("office: no price aggregate")?;
    ensure(agg["value"].as_f64() == Some(sum), || {
        format!("office: aggregate {} vs {sum}", agg["value"])
    })?;
    let members = of_type(office, "GroupUpdated")
        .filter(|v| v["id"] == agg["id"])
        .last()
        .map(|v| ids(&v["members"]));
    ensure(members == Some(ids(&e["container_members"])), || {
        format!("office: container members {members:?}")
    })?;

    let kitchen = &logs["kitchen"];
    let e = &exp["kitchen"];
    let layouts: Vec<Vec<String>> = of_type(kitchen, "LayoutUpdated")
        .map(|v| {
            v["layout"]["boxes"]
                .as_array()
                .map(|b| b.iter().map(|x| x["id"].as_str().unwrap_or("").to_string()).collect())
                .unwrap_or_default()
        })
        .collect();
    for key in ["microwave_parts", "panel_parts"] {
        ensure(layouts.contains(&ids(&e[key])), || {
            format!("kitchen: no layout shows {key}")
        })?;
    }
    ensure(of_type(kitchen, "LevelChanged").any(|v| v["level"] == 2), || {
        "kitchen: level 2 never bound".into()
    })?;

    let building = &logs["building"];
    for p in exp["building"]["department_partitions"]
        .as_array()
        .ok_or("bad expectations")?
    {
        let id = format!("group:department={}", p["department"].as_str().unwrap_or(""));
        let got = of_type(building, "GroupUpdated")
            .find(|v| v["id"] == id.as_str())
            .map(|v| ids(&v["members"]));
        ensure(got == Some(ids(&p["members"])), || {
            format!("building: {id} members {got:?}")
        })?;
    }

    let drone = &logs["drone"];
    let e = &exp["drone"];
    let selections: Vec<_> = of_type(drone, "SelectionChanged").map(|v| ids(&v["ids"])).collect();
    for key in ["full_battery", "left_half"] {
        ensure(selections.contains(&ids(&e[key])), || {
            format!("drone: no selection equals {key}")
        })?;
    }
    let cmd = of_type(drone, "CommandIssued").next().ok_or("drone: no command")?;
    ensure(ids(&cmd["ids"]) == ids(&e["left_half"]), || {
        format!("drone: command ids {}", cmd["ids"])
    })?;
    let v: Vec<f64> = cmd["vector"]
        .as_array()
        .ok_or("drone: no vector")?
        .iter()
        .filter_map(Value::as_f64)
        .collect();
    ensure(
        v.len() == 3 && v[0].abs() < 1e-9 && v[1].abs() < 1e-9 && v[2] > 0.0,
        || format!("drone: command vector {v:?} is not forward"),
    )?;
    Ok(())
}

fn golden_traces() -> Outcome {
    let start = Instant::now();
    let mut logs = BTreeMap::new();
    let mut lines = 0;
    for name in SCENES {
        let first = replay_log(name)?;
        let second = replay_log(name)?;
        ensure(first == second, || format!("{name}: two replays differ"))?;
        ensure(first == golden(name)?, || {
            format!("{name}: replay differs from the frozen log")
        })?;
        lines += first.lines().count();
        logs.insert(name, parse_log(&first));
    }
    let took = within_budget(start, Duration::from_secs(5))?;
    let exp: Value = serde_json::from_str(&read(&fixtures().join("expectations.json"))?).map_err(|e| e.to_string())?;
    narrative_checks(&logs, &exp)?;
    Ok(format!(
        "4 traces, {lines} lines byte-identical and deterministic, {took:.2?}"
    ))
}

fn dual_feedback() -> Outcome {
    let mut checked = 0;
    for name in SCENES {
        let log = parse_log(&golden(name)?);
        for (i, ev) in log.iter().enumerate() {
            if ev["type"] != "SelectionChanged" {
                continue;
            }
            let batch: Vec<_> = log.iter().filter(|v| v["t"] == ev["t"]).collect();
            for id in ids(&ev["ids"]) {
                for ty in ["HighlightObject", "HighlightProxy"] {
                    let found = batch
                        .iter()
                        .any(|v| v["type"] == ty && v["id"] == id.as_str() && v["color"] != "none");
                    ensure(found, || format!("{name} line {}: `{id}` lacks {ty}", i + 1))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} selected ids carry both highlights"))
}

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn recv(ws: &mut Client) -> Result<Envelope, String> {
    loop {
        match ws.read().map_err(|e| e.to_string())? {
            Message::Text(t) => return serde_json::from_str(t.as_str()).map_err(|e| e.to_string()),
            Message::Close(_) => return Err("server closed the connection".into()),
            _ => {}
        }
    }
}

fn send(ws: &mut Client, text: String) -> Result<(), String> {
    ws.send(Message::text(text)).map_err(|e| e.to_string())
}

fn service_equivalence() -> Outcome {
    let fx = fixtures();
    let cfg = SessionConfig {
        fixture_root: Some(fx.clone()),
        ..SessionConfig::default()
    };
    let addr = spawn_server(cfg, 0).map_err(|e| e.to_string())?;
    let url = format!("ws://{addr}");
    let (mut ws, _) = tungstenite::connect(&url).map_err(|e| e.to_string())?;

    send(
        &mut ws,
        r#"{"seq":1,"kind":"LoadScene","payload":{"scene":"office.scene.json"}}"#.into(),
    )?;
    let reply = recv(&mut ws)?;
    ensure(reply.kind == EnvelopeKind::Snapshot, || {
        format!("LoadScene answered with {:?}", reply.kind)
    })?;

    let trace = read(&fx.join("traces/office-01.jsonl"))?;
    let mut seq = 1;
    let mut sent = 0;
    for line in trace.lines().filter(|l| !l.trim().is_empty()) {
        seq += 1;
        sent += 1;
        send(&mut ws, format!(r#"{{"seq":{seq},"kind":"Gesture","payload":{line}}}"#))?;
        if sent == 7 {
            // Garbage mid-stream must not end the session.
            send(&mut ws, "{not json".into())?;
            send(&mut ws, format!(r#"{{"seq":{seq},"kind":"Gesture","payload":{line}}}"#))?;
            seq += 1;
            send(&mut ws, format!(r#"{{"seq":{seq},"kind":"Feedback"}}"#))?;
        }
    }
    seq += 1;
    send(&mut ws, format!(r#"{{"seq":{seq},"kind":"Snapshot"}}"#))?;

    let mut log = String::new();
    let mut errors = 0;
    let mut last_seq = reply.seq;
    loop {
        let env = recv(&mut ws)?;
        ensure(env.seq > last_seq, || {
            format!("outgoing seq {} after {last_seq}", env.seq)
        })?;
        last_seq = env.seq;
        match env.kind {
            EnvelopeKind::Feedback => {
                log.push_str(env.payload_str());
                log.push('\n');
            }
            EnvelopeKind::Error => {
                errors += 1;
                if errors > 3 {
                    return Err(format!("unexpected error reply: {}", env.payload_str()));
                }
            }
            EnvelopeKind::Snapshot => break,
            _ => {}
        }
    }
    ensure(errors == 3, || format!("expected 3 error replies, got {errors}"))?;
    ensure(log == golden("office")?, || {
        "streamed feedback differs from the replay log".into()
    })?;
    ws.close(None).ok();

    // The server keeps accepting after a connection ends.
    let (mut again, _) = tungstenite::connect(&url).map_err(|e| e.to_string())?;
    send(&mut again, "]]".into())?;
    let env = recv(&mut again)?;
    ensure(env.kind == EnvelopeKind::Error, || {
        "second client got no error reply".into()
    })?;
    again.close(None).ok();
    Ok(format!(
        "{sent} gestures streamed, {} feedback lines identical, 3 malformed envelopes answered",
        log.lines().count()
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 8] = [
        ("dedup contract", dedup_contract),
        ("hierarchy contract", hierarchy_contract),
        ("raycast oracle", raycast_oracle),
        ("layout suite", layout_suite),
        ("lazy-follow", lazy_follow),
        ("golden traces", golden_traces),
        ("dual-feedback invariant", dual_feedback),
        ("service equivalence", service_equivalence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
