//! Feature operations. Each takes the scene context, mutates the session
//! state in place and appends feedback to an [`Emitter`]; on error the
//! state is left as it was.

use std::collections::BTreeMap;

use crate::geometry::{Aabb, Point2, Vec3};
use crate::layout::{solve_layout, ProxyBox, ProxyLayout};
use crate::perception::extend_gaze_region;
use crate::scene::{AttributeSet, AttributeValue};
use crate::spatial::{estimate_positions, metric_radius_px};

use super::event::Hand;
use super::feedback::{
    AttributeProxy, FeedbackEvent, FeedbackKind, NoticeCode, GAZE_COLOR, NO_COLOR, PALETTE, SELECTED_COLOR,
};
use super::state::{
    GroupContainer, InteractionState, Mode, Partition, PinnedAttributes, SelectionSet, SemanticGrouping, ZoomFrame,
};
use super::{EngineError, SceneContext};

/// Surface paths closer than this at their ends count as closed (meters).
const LASSO_CLOSE_M: f64 = 0.01;

/// Collects the feedback produced while handling one event.
#[derive(Debug)]
pub struct Emitter {
    t: u64,
    events: Vec<FeedbackEvent>,
}

impl Emitter {
    pub fn new(t: u64) -> Self {
        Self { t, events: Vec::new() }
    }

    pub fn emit(&mut self, kind: FeedbackKind) {
        self.events.push(FeedbackEvent { t: self.t, kind });
    }

    pub fn notice(&mut self, err: &EngineError) {
        if let Some(code) = err.code() {
            self.emit(FeedbackKind::Notice {
                code,
                detail: err.to_string(),
            });
        }
    }

    pub fn events(&self) -> &[FeedbackEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<FeedbackEvent> {
        self.events
    }
}

/// Replace the selection, with dual highlights for every selected id and
/// cleared highlights for every dropped one. Without `force`, an unchanged
/// selection emits nothing.
pub fn set_selection(state: &mut InteractionState, out: &mut Emitter, ids: Vec<String>, force: bool) {
    let next = SelectionSet::from_ids(ids);
    if !force && next == state.selection {
        return;
    }
    out.emit(FeedbackKind::SelectionChanged {
        ids: next.ids().to_vec(),
    });
    for old in state.selection.ids() {
        if !next.contains(old) {
            highlight(out, old, NO_COLOR);
        }
    }
    for id in next.ids() {
        highlight(out, id, SELECTED_COLOR);
    }
    state.selection = next;
}

fn highlight(out: &mut Emitter, id: &str, color: &str) {
    out.emit(FeedbackKind::HighlightObject {
        id: id.to_string(),
        color: color.to_string(),
    });
    out.emit(FeedbackKind::HighlightProxy {
        id: id.to_string(),
        color: color.to_string(),
    });
}

fn default_anchor(ctx: &SceneContext) -> Vec3 {
    let head = &ctx.snapshot.head;
    head.position + head.rotation() * Vec3::new(0.0, 0.25, 0.35)
}

/// Lay out `ids` around the current anchor, storing their world positions.
fn relayout(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, positions: BTreeMap<String, Vec3>) {
    let anchor = state.anchor();
    state.layout = solve_layout(&positions, anchor, &ctx.config).unwrap_or_else(|_| ProxyLayout::empty(anchor));
    state.world_positions = positions;
    out.emit(FeedbackKind::LayoutUpdated {
        layout: state.layout.clone(),
    });
}

fn relayout_visible(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter) {
    let placement = estimate_positions(&ctx.snapshot, &ctx.index, state.visible.iter().map(String::as_str));
    if !placement.unplaced.is_empty() {
        out.emit(FeedbackKind::Notice {
            code: NoticeCode::Unplaced,
            detail: placement.unplaced.join(","),
        });
    }
    relayout(ctx, state, out, placement.positions);
}

fn clear_selection(state: &mut InteractionState, out: &mut Emitter) {
    if !state.selection.is_empty() {
        set_selection(state, out, Vec::new(), true);
    }
}

/// Gaze+Pinch activation: proxies for the Level-1 objects overlapping the
/// gaze region, laid out at the triggering hand.
pub fn activate_proxies(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    hand: Hand,
) -> Result<(), EngineError> {
    let gaze = state.gaze_px.ok_or(EngineError::NoGaze)?;
    let radius = metric_radius_px(&ctx.snapshot, gaze, ctx.config.gaze_extension_m);
    let region = extend_gaze_region(gaze, radius, ctx.snapshot.image_size)
        .map_err(|e| EngineError::GazeOutsideImage(e.to_string()))?;
    let visible: Vec<String> = ctx
        .index
        .level_one()
        .filter(|n| n.root_bbox.intersects(&region))
        .map(|n| n.id.clone())
        .collect();
    let placement = estimate_positions(&ctx.snapshot, &ctx.index, visible.iter().map(String::as_str));
    if placement.positions.is_empty() {
        return Err(EngineError::NoObjectsInRegion);
    }

    let was_deeper = state.mode != Mode::Idle && state.active_level != 1;
    clear_selection(state, out);
    if let Some(old) = state.gaze_target.take() {
        highlight(out, &old, NO_COLOR);
    }
    let anchor = state.hand(hand).point.unwrap_or_else(|| default_anchor(ctx));
    let keep = (
        state.gaze_px,
        state.left,
        state.right,
        std::mem::take(&mut state.groups),
        state.next_container,
    );
    *state = InteractionState {
        gaze_px: keep.0,
        left: keep.1,
        right: keep.2,
        groups: keep.3,
        next_container: keep.4,
        ..InteractionState::default()
    };
    state.layout.anchor = anchor;
    state.visible = visible;
    state.mode = Mode::ProxiesActive;
    state.follow_hand = hand;
    state.activation_pending = true;

    if !placement.unplaced.is_empty() {
        out.emit(FeedbackKind::Notice {
            code: NoticeCode::Unplaced,
            detail: placement.unplaced.join(","),
        });
    }
    relayout(ctx, state, out, placement.positions);
    if was_deeper {
        out.emit(FeedbackKind::LevelChanged { level: 1 });
    }

    // smallest visible box under the gaze is the default target
    let target = state
        .visible
        .iter()
        .filter_map(|id| ctx.index.get(id))
        .filter(|n| n.root_bbox.contains_point(gaze))
        .min_by(|a, b| a.root_bbox.area().total_cmp(&b.root_bbox.area()))
        .map(|n| n.id.clone());
    if let Some(id) = &target {
        highlight(out, id, GAZE_COLOR);
    }
    state.gaze_target = target;
    Ok(())
}

/// Attributes shown on a proxy's panel.
fn panel_attributes(ctx: &SceneContext, state: &InteractionState, id: &str) -> Option<AttributeSet> {
    if let Some(node) = ctx.index.get(id) {
        return Some(node.attributes.clone());
    }
    if let Some(p) = state.partition(id) {
        let mut attrs = AttributeSet::new();
        let key = state.grouping_key.clone().unwrap_or_default();
        attrs.insert(key, p.value.clone());
        attrs.insert("members".into(), AttributeValue::Number(p.members.len() as f64));
        return Some(attrs);
    }
    let c = state.container(id)?;
    let mut attrs = AttributeSet::new();
    attrs.insert("members".into(), AttributeValue::Number(c.members.len() as f64));
    for key in numeric_keys(ctx, &c.members) {
        let sum = c
            .members
            .iter()
            .filter_map(|m| ctx.index.get(m)?.attributes.get(&key)?.as_number())
            .sum();
        attrs.insert(key, AttributeValue::Number(sum));
    }
    Some(attrs)
}

fn centroid(points: impl Iterator<Item = Vec3>) -> Option<Vec3> {
    let (sum, n) = points.fold((Vec3::zeros(), 0usize), |(s, n), p| (s + p, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// World point a panel for `id` is attached to.
fn panel_anchor(ctx: &SceneContext, state: &InteractionState, id: &str) -> Vec3 {
    if let Some(p) = state.world_positions.get(id) {
        return *p;
    }
    let members: Vec<String> = match state.container(id) {
        Some(c) => c.members.clone(),
        None => vec![id.to_string()],
    };
    let placement = estimate_positions(&ctx.snapshot, &ctx.index, members.iter().map(String::as_str));
    centroid(placement.positions.values().copied()).unwrap_or_else(|| {
        let local = state.container(id).map(|c| c.cube.center).unwrap_or_default();
        state.anchor() + local
    })
}

/// Skim the hand across the panel: entering a proxy shows its attribute
/// panel at the object, leaving hides it. Selection is untouched.
pub fn skim_update(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, world_point: Vec3) {
    let p = state.to_layout(&world_point);
    let target = ctx.hit_test.proxy_at(state, &p);
    let Some(contact) = state.contact.as_ref() else {
        return;
    };
    if contact.current == target {
        return;
    }
    if state.panel.take().is_some() {
        out.emit(FeedbackKind::HidePanel);
    }
    if let Some(id) = &target {
        let attributes = panel_attributes(ctx, state, id).unwrap_or_default();
        let at = panel_anchor(ctx, state, id);
        out.emit(FeedbackKind::ShowPanel {
            id: id.clone(),
            attributes,
            at,
        });
        state.panel = Some(id.clone());
    }
    let contact = state.contact.as_mut().expect("checked above");
    if let Some(id) = &target {
        contact.visited.push(id.clone());
    }
    contact.current = target;
}

/// Ids of single proxies whose boxes meet `region` (layout frame).
pub fn brush_hits(state: &InteractionState, region: &Aabb) -> Vec<String> {
    state
        .proxy_boxes()
        .filter(|b| b.aabb().intersects(region))
        .map(|b| b.id.clone())
        .collect()
}

/// Two-hand brush: select every proxy meeting the box spanned by the hands.
pub fn brush_update(state: &mut InteractionState, out: &mut Emitter, left: Vec3, right: Vec3) -> Vec<String> {
    let region = Aabb::spanning(&state.to_layout(&left), &state.to_layout(&right));
    let hits = brush_hits(state, &region);
    set_selection(state, out, hits.clone(), false);
    hits
}

fn proxy_box<'a>(state: &'a InteractionState, id: &str) -> Option<&'a ProxyBox> {
    state.proxy_boxes().find(|b| b.id == id)
}

/// Pin one attribute proxy per attribute of the held proxy, in a row just
/// below it.
pub fn pin_attributes(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    proxy_id: &str,
) -> Result<(), EngineError> {
    let held = proxy_box(state, proxy_id).ok_or_else(|| EngineError::UnknownId(proxy_id.to_string()))?;
    let attrs = panel_attributes(ctx, state, proxy_id).unwrap_or_default();
    let pitch = ctx.config.proxy_pitch();
    let n = attrs.len() as f64;
    let proxies: Vec<AttributeProxy> = attrs
        .into_iter()
        .enumerate()
        .map(|(i, (key, value))| {
            let id = format!("attr:{proxy_id}:{key}");
            let offset = Vec3::new((i as f64 - (n - 1.0) / 2.0) * pitch, pitch, 0.0);
            AttributeProxy {
                cube: ProxyBox {
                    id: id.clone(),
                    center: held.center + offset,
                    half_extent: ctx.config.proxy_size_m / 2.0,
                },
                id,
                key,
                value,
            }
        })
        .collect();
    state.panel = None;
    state.contact = None;
    out.emit(FeedbackKind::HidePanel);
    out.emit(FeedbackKind::AttributesPinned {
        id: proxy_id.to_string(),
        proxies: proxies.clone(),
    });
    state.pinned_attributes = Some(PinnedAttributes {
        node: proxy_id.to_string(),
        proxies,
        hover: None,
    });
    state.mode = Mode::FilterPinned;
    Ok(())
}

/// Select every visible object sharing the attribute proxy's key and value.
pub fn attribute_filter(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    attribute_proxy: &str,
) -> Result<(), EngineError> {
    let ap = state
        .pinned_attributes
        .as_ref()
        .and_then(|p| p.proxies.iter().find(|a| a.id == attribute_proxy))
        .ok_or_else(|| EngineError::UnknownId(attribute_proxy.to_string()))?;
    let (key, value) = (ap.key.clone(), ap.value.clone());
    let ids: Vec<String> = state
        .visible
        .iter()
        .filter(|id| {
            ctx.index
                .get(id)
                .and_then(|n| n.attributes.get(&key))
                .is_some_and(|v| *v == value)
        })
        .cloned()
        .collect();
    set_selection(state, out, ids, true);
    Ok(())
}

fn reference_attributes(ctx: &SceneContext, state: &InteractionState, id: &str) -> Option<AttributeSet> {
    let first_member = |members: &[String]| {
        members
            .first()
            .and_then(|m| ctx.index.get(m))
            .map(|n| n.attributes.clone())
    };
    if let Some(n) = ctx.index.get(id) {
        return Some(n.attributes.clone());
    }
    if let Some(p) = state.partition(id) {
        return first_member(&p.members);
    }
    state.container(id).and_then(|c| first_member(&c.members))
}

/// Partition the visible objects by one attribute, color each partition and
/// replace the proxies with one proxy per partition.
pub fn semantic_group(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    proxy_id: &str,
    key: Option<&str>,
) -> Result<(), EngineError> {
    let attrs =
        reference_attributes(ctx, state, proxy_id).ok_or_else(|| EngineError::UnknownId(proxy_id.to_string()))?;
    let key = match key {
        Some(k) => k.to_string(),
        None => attrs
            .keys()
            .next()
            .cloned()
            .ok_or_else(|| EngineError::NoAttributes(proxy_id.to_string()))?,
    };

    let mut partitions: Vec<Partition> = Vec::new();
    for id in &state.visible {
        let Some(value) = ctx.index.get(id).and_then(|n| n.attributes.get(&key)) else {
            continue;
        };
        match partitions.iter_mut().find(|p| p.value == *value) {
            Some(p) => p.members.push(id.clone()),
            None => {
                let color = PALETTE[partitions.len() % PALETTE.len()].to_string();
                partitions.push(Partition {
                    id: format!("group:{key}={value}"),
                    value: value.clone(),
                    members: vec![id.clone()],
                    color,
                });
            }
        }
    }

    for p in &partitions {
        out.emit(FeedbackKind::GroupUpdated {
            id: p.id.clone(),
            members: p.members.clone(),
            collapsed: None,
        });
        for m in &p.members {
            out.emit(FeedbackKind::HighlightObject {
                id: m.clone(),
                color: p.color.clone(),
            });
        }
        out.emit(FeedbackKind::HighlightProxy {
            id: p.id.clone(),
            color: p.color.clone(),
        });
    }

    let placement = estimate_positions(&ctx.snapshot, &ctx.index, state.visible.iter().map(String::as_str));
    let positions: BTreeMap<String, Vec3> = partitions
        .iter()
        .filter_map(|p| {
            centroid(p.members.iter().filter_map(|m| placement.positions.get(m).copied())).map(|c| (p.id.clone(), c))
        })
        .collect();
    state.semantic = Some(SemanticGrouping {
        key: key.clone(),
        partitions,
    });
    state.grouping_key = Some(key);
    relayout(ctx, state, out, positions);

    let kept: Vec<String> = state
        .selection
        .ids()
        .iter()
        .filter(|id| state.selectable(id))
        .cloned()
        .collect();
    set_selection(state, out, kept, false);
    Ok(())
}

/// Discrete two-hand zoom. `ratio` is the current hand distance over the
/// distance when the gesture began; values inside the dead zone do nothing.
pub fn zoom_level(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    ratio: f64,
    focus: Option<&str>,
) -> Result<(), EngineError> {
    let cfg = &ctx.config;
    if ratio >= cfg.zoom_in_ratio {
        let Some(focus) = focus else {
            return Ok(());
        };
        if state.container(focus).is_some_and(|c| c.collapsed) {
            return expand_container(state, out, focus);
        }
        if let Some(p) = state.partition(focus) {
            let members = p.members.clone();
            state.zoom_stack.push(ZoomFrame {
                level: state.active_level,
                visible: state.visible.clone(),
            });
            state.semantic = None;
            state.grouping_key = None;
            clear_selection(state, out);
            state.visible = members;
            relayout_visible(ctx, state, out);
            return Ok(());
        }
        if !ctx.index.contains(focus) {
            return Err(EngineError::NoChildren(focus.to_string()));
        }
        let children: Vec<String> = ctx.index.children(focus).into_iter().map(|n| n.id.clone()).collect();
        if children.is_empty() {
            return Err(EngineError::NoChildren(focus.to_string()));
        }
        state.zoom_stack.push(ZoomFrame {
            level: state.active_level,
            visible: state.visible.clone(),
        });
        state.semantic = None;
        state.grouping_key = None;
        clear_selection(state, out);
        state.active_level += 1;
        state.visible = children;
        out.emit(FeedbackKind::LevelChanged {
            level: state.active_level,
        });
        relayout_visible(ctx, state, out);
    } else if ratio <= cfg.zoom_out_ratio {
        if let Some(focus) = focus {
            if state.container(focus).is_some_and(|c| !c.collapsed) {
                return collapse_container(ctx, state, out, focus);
            }
        }
        if state.semantic.is_some() {
            state.semantic = None;
            state.grouping_key = None;
            let kept: Vec<String> = state
                .selection
                .ids()
                .iter()
                .filter(|id| state.selectable(id))
                .cloned()
                .collect();
            set_selection(state, out, kept, false);
            relayout_visible(ctx, state, out);
            return Ok(());
        }
        let frame = state.zoom_stack.pop().ok_or(EngineError::AtRoot)?;
        clear_selection(state, out);
        let changed = frame.level != state.active_level;
        state.active_level = frame.level;
        state.visible = frame.visible;
        if changed {
            out.emit(FeedbackKind::LevelChanged {
                level: state.active_level,
            });
        }
        relayout_visible(ctx, state, out);
    }
    Ok(())
}

/// Turn an empty brush region into a persistent cube container.
pub fn create_container(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    region: &Aabb,
) -> Result<String, EngineError> {
    let _ = ctx;
    if !brush_hits(state, region).is_empty() {
        return Err(EngineError::RegionNotEmpty);
    }
    let half = region.half_extents().max();
    if half.is_nan() || half <= 1e-9 {
        return Err(EngineError::DegenerateRegion);
    }
    let id = format!("container-{}", state.next_container);
    state.next_container += 1;
    let cube = ProxyBox {
        id: id.clone(),
        center: region.center(),
        half_extent: half,
    };
    state.groups.push(GroupContainer {
        id: id.clone(),
        members: Vec::new(),
        collapsed: false,
        cube: cube.clone(),
        expanded_half_extent: half,
    });
    out.emit(FeedbackKind::GroupCreated { id: id.clone(), cube });
    Ok(id)
}

/// Keys (in the first member's order) that are numeric on every member.
fn numeric_keys(ctx: &SceneContext, members: &[String]) -> Vec<String> {
    let Some(first) = members.first().and_then(|m| ctx.index.get(m)) else {
        return Vec::new();
    };
    first
        .attributes
        .keys()
        .filter(|k| {
            members.iter().all(|m| {
                ctx.index
                    .get(m)
                    .and_then(|n| n.attributes.get(*k))
                    .and_then(AttributeValue::as_number)
                    .is_some()
            })
        })
        .cloned()
        .collect()
}

/// Clone a proxy into a container. Adding an existing member changes nothing.
pub fn add_to_container(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    container_id: &str,
    proxy_id: &str,
) -> Result<(), EngineError> {
    if !ctx.index.contains(proxy_id) {
        return Err(EngineError::UnknownId(proxy_id.to_string()));
    }
    let c = state
        .container_mut(container_id)
        .ok_or_else(|| EngineError::UnknownId(container_id.to_string()))?;
    if c.members.iter().any(|m| m == proxy_id) {
        return Ok(());
    }
    c.members.push(proxy_id.to_string());
    let (members, collapsed) = (c.members.clone(), c.collapsed);
    out.emit(FeedbackKind::GroupUpdated {
        id: container_id.to_string(),
        members,
        collapsed: Some(collapsed),
    });
    let members = state
        .container(container_id)
        .map(|c| c.members.clone())
        .unwrap_or_default();
    for key in numeric_keys(ctx, &members) {
        out.emit(aggregate_group(ctx, state, container_id, &key)?);
    }
    Ok(())
}

/// Shrink a container into a single proxy-sized box.
pub fn collapse_container(
    ctx: &SceneContext,
    state: &mut InteractionState,
    out: &mut Emitter,
    container_id: &str,
) -> Result<(), EngineError> {
    let half = ctx.config.proxy_size_m / 2.0;
    let c = state
        .container_mut(container_id)
        .ok_or_else(|| EngineError::UnknownId(container_id.to_string()))?;
    if c.members.is_empty() {
        return Err(EngineError::EmptyContainer(container_id.to_string()));
    }
    if c.collapsed {
        return Ok(());
    }
    c.collapsed = true;
    c.expanded_half_extent = c.cube.half_extent;
    c.cube.half_extent = half;
    out.emit(FeedbackKind::GroupUpdated {
        id: c.id.clone(),
        members: c.members.clone(),
        collapsed: Some(true),
    });
    Ok(())
}

pub fn expand_container(
    state: &mut InteractionState,
    out: &mut Emitter,
    container_id: &str,
) -> Result<(), EngineError> {
    let c = state
        .container_mut(container_id)
        .ok_or_else(|| EngineError::UnknownId(container_id.to_string()))?;
    if !c.collapsed {
        return Ok(());
    }
    c.collapsed = false;
    c.cube.half_extent = c.expanded_half_extent;
    out.emit(FeedbackKind::GroupUpdated {
        id: c.id.clone(),
        members: c.members.clone(),
        collapsed: Some(false),
    });
    if state.selection.contains(container_id) {
        let kept: Vec<String> = state
            .selection
            .ids()
            .iter()
            .filter(|i| *i != container_id)
            .cloned()
            .collect();
        set_selection(state, out, kept, false);
    }
    Ok(())
}

/// Sum of a numeric attribute over a container's members.
pub fn aggregate_group(
    ctx: &SceneContext,
    state: &InteractionState,
    container_id: &str,
    key: &str,
) -> Result<FeedbackKind, EngineError> {
    let c = state
        .container(container_id)
        .ok_or_else(|| EngineError::UnknownId(container_id.to_string()))?;
    let mut total = 0.0;
    for m in &c.members {
        let v = ctx
            .index
            .get(m)
            .and_then(|n| n.attributes.get(key))
            .and_then(AttributeValue::as_number)
            .ok_or_else(|| EngineError::NonNumericAttribute {
                member: m.clone(),
                key: key.to_string(),
            })?;
        total += v;
    }
    Ok(FeedbackKind::AggregateComputed {
        id: container_id.to_string(),
        key: key.to_string(),
        value: total,
    })
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point2, polygon: &[Point2]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Select proxies whose centers, projected onto the surface (layout x/y),
/// fall inside a closed path.
pub fn lasso_select(state: &mut InteractionState, out: &mut Emitter, path: &[Point2]) -> Result<(), EngineError> {
    let closed = match (path.first(), path.last()) {
        (Some(a), Some(b)) if path.len() >= 3 => {
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() <= LASSO_CLOSE_M
        }
        _ => false,
    };
    if !closed {
        return Err(EngineError::OpenPath);
    }
    let ids: Vec<String> = state
        .proxy_boxes()
        .filter(|b| point_in_polygon([b.center.x, b.center.y], path))
        .map(|b| b.id.clone())
        .collect();
    set_selection(state, out, ids, true);
    Ok(())
}

/// Issue a move command for the selection. Actuation happens elsewhere.
pub fn drag_selection(state: &InteractionState, out: &mut Emitter, displacement: Vec3) -> Result<(), EngineError> {
    if state.selection.is_empty() {
        return Err(EngineError::EmptySelection);
    }
    out.emit(FeedbackKind::CommandIssued {
        ids: state.selection.ids().to_vec(),
        vector: displacement,
    });
    Ok(())
}
