use crate::geometry::{Aabb, Vec3};

use super::event::{GestureEvent, GestureKind, Hand};
use super::feedback::FeedbackKind;
use super::follow::lazy_follow_tick;
use super::ops::{
    activate_proxies, add_to_container, attribute_filter, brush_hits, brush_update, create_container, drag_selection,
    lasso_select, pin_attributes, semantic_group, set_selection, skim_update, zoom_level, Emitter,
};
use super::state::{Contact, Hold, HoldTarget, InteractionState, Mode, TwoHand};
use super::{EngineError, FeedbackEvent, SceneContext};

/// Apply one gesture event. Never fails: gestures that cannot be applied
/// produce a `Notice` (or nothing) and leave the state consistent.
pub fn process_event(
    ctx: &SceneContext,
    state: &InteractionState,
    ev: &GestureEvent,
) -> (InteractionState, Vec<FeedbackEvent>) {
    let mut next = state.clone();
    let mut out = Emitter::new(ev.t);
    fire_due_hold(ctx, &mut next, &mut out, ev.t);
    step(ctx, &mut next, &mut out, ev);
    (next, out.into_events())
}

fn report(out: &mut Emitter, result: Result<(), EngineError>) {
    if let Err(e) = result {
        log::debug!("gesture not applied: {e}");
        out.notice(&e);
    }
}

/// Run `op` on a scratch copy so a failed operation leaves no trace.
fn attempt(
    state: &mut InteractionState,
    out: &mut Emitter,
    op: impl FnOnce(&mut InteractionState, &mut Emitter) -> Result<(), EngineError>,
) {
    let mut scratch = state.clone();
    let mut buffer = Emitter::new(0);
    match op(&mut scratch, &mut buffer) {
        Ok(()) => {
            *state = scratch;
            for e in buffer.into_events() {
                out.emit(e.kind);
            }
        }
        Err(e) => report(out, Err(e)),
    }
}

fn fire_due_hold(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, t: u64) {
    let Some(hold) = state.hold.as_ref() else {
        return;
    };
    let HoldTarget::Proxy(id) = &hold.target else {
        return;
    };
    if hold.fired || t < hold.started + ctx.config.hold_duration_ms {
        return;
    }
    let id = id.clone();
    let mut ok = false;
    attempt(state, out, |s, o| {
        pin_attributes(ctx, s, o, &id)?;
        ok = true;
        Ok(())
    });
    match ok {
        true => {
            if let Some(h) = state.hold.as_mut() {
                h.fired = true;
            }
        }
        false => state.hold = None,
    }
}

fn step(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, ev: &GestureEvent) {
    match &ev.kind {
        GestureKind::GazeMove { px } => state.gaze_px = Some(*px),
        GestureKind::HandMove { hand, point } => hand_move(ctx, state, out, *hand, *point),
        GestureKind::PinchStart { hand } => pinch_start(ctx, state, out, *hand),
        GestureKind::PinchEnd { hand } => pinch_end(ctx, state, out, *hand),
        GestureKind::Tap { point } => tap(ctx, state, out, ev.t, point),
        GestureKind::DoubleTap { point, key } => {
            state.last_tap = None;
            if let Some(id) = ctx.hit_test.proxy_at(state, &state.to_layout(point)) {
                attempt(state, out, |s, o| semantic_group(ctx, s, o, &id, key.as_deref()));
            }
        }
        GestureKind::HoldStart { point } => hold_start(ctx, state, ev.t, point),
        GestureKind::HoldEnd => hold_end(state, out, ev.t),
        GestureKind::SurfacePathPoint { point } => {
            if state.mode != Mode::Idle {
                state.surface_path.push(*point);
            }
        }
        GestureKind::SurfacePathEnd => {
            let path = std::mem::take(&mut state.surface_path);
            if state.mode != Mode::Idle {
                attempt(state, out, |s, o| lasso_select(s, o, &path));
            }
        }
        GestureKind::Tick { dt } => tick(ctx, state, out, *dt),
        GestureKind::Unknown => {}
    }
}

fn hand_move(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, hand: Hand, point: Vec3) {
    state.hand_mut(hand).point = Some(point);
    match state.mode {
        Mode::Skimming if state.contact.as_ref().is_some_and(|c| c.hand == hand) => {
            skim_update(ctx, state, out, point);
        }
        Mode::FilterPinned => {
            let p = state.to_layout(&point);
            let Some(pinned) = state.pinned_attributes.as_ref() else {
                return;
            };
            let inside = pinned
                .proxies
                .iter()
                .find(|a| a.cube.aabb().contains(&p))
                .map(|a| a.id.clone());
            if inside == pinned.hover {
                return;
            }
            if let Some(p) = state.pinned_attributes.as_mut() {
                p.hover = inside.clone();
            }
            if let Some(id) = inside {
                attempt(state, out, |s, o| attribute_filter(ctx, s, o, &id));
            }
        }
        Mode::ZoomPending => {
            let (Some(l), Some(r)) = (state.left.point, state.right.point) else {
                return;
            };
            let Some(th) = state.two_hand.as_ref() else {
                return;
            };
            if th.zoom_fired || th.initial_distance <= 0.0 {
                return;
            }
            let ratio = (l - r).norm() / th.initial_distance;
            let cfg = &ctx.config;
            if ratio >= cfg.zoom_in_ratio || ratio <= cfg.zoom_out_ratio {
                let focus = th.focus.clone();
                if let Some(th) = state.two_hand.as_mut() {
                    th.zoom_fired = true;
                }
                attempt(state, out, |s, o| zoom_level(ctx, s, o, ratio, focus.as_deref()));
            }
        }
        Mode::Brushing | Mode::ContainerPlacing => brush_move(state, out),
        _ => {}
    }
}

fn brush_move(state: &mut InteractionState, out: &mut Emitter) {
    let (Some(l), Some(r)) = (state.left.point, state.right.point) else {
        return;
    };
    let region = Aabb::spanning(&state.to_layout(&l), &state.to_layout(&r));
    let touched = state.two_hand.as_ref().is_some_and(|th| th.touched);
    // an empty-space brush is placing a container and leaves the selection alone
    let hits = if touched || !brush_hits(state, &region).is_empty() {
        brush_update(state, out, l, r)
    } else {
        Vec::new()
    };
    if let Some(th) = state.two_hand.as_mut() {
        th.touched |= !hits.is_empty();
        th.region = Some(region);
        state.mode = if th.touched {
            Mode::Brushing
        } else {
            Mode::ContainerPlacing
        };
    }
}

/// Bounds of everything on the panel, padded by one pitch.
fn interaction_volume(ctx: &SceneContext, state: &InteractionState) -> Option<Aabb> {
    let pad = ctx.config.proxy_pitch();
    let boxes = state
        .layout
        .boxes
        .iter()
        .chain(state.groups.iter().map(|g| &g.cube))
        .map(|b| b.aabb());
    boxes
        .reduce(|a, b| Aabb {
            min: a.min.inf(&b.min),
            max: a.max.sup(&b.max),
        })
        .map(|a| Aabb {
            min: a.min.add_scalar(-pad),
            max: a.max.add_scalar(pad),
        })
}

fn hide_panel(state: &mut InteractionState, out: &mut Emitter) {
    if state.panel.take().is_some() {
        out.emit(FeedbackKind::HidePanel);
    }
}

fn pinch_start(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, hand: Hand) {
    state.hand_mut(hand).pinching = true;
    let two_hands = state.hand(hand.other()).pinching;
    match state.mode {
        Mode::Idle => attempt(state, out, |s, o| activate_proxies(ctx, s, o, hand)),
        Mode::ProxiesActive | Mode::Skimming | Mode::Dragging if two_hands => two_hand_start(ctx, state, out),
        Mode::ProxiesActive => {
            let Some(point) = state.hand(hand).point else {
                state.mode = Mode::Skimming;
                state.contact = Some(Contact {
                    hand,
                    start: None,
                    current: None,
                    visited: Vec::new(),
                });
                return;
            };
            let p = state.to_layout(&point);
            if !interaction_volume(ctx, state).is_some_and(|v| v.contains(&p)) {
                attempt(state, out, |s, o| activate_proxies(ctx, s, o, hand));
                return;
            }
            let hit = ctx.hit_test.proxy_at(state, &p);
            state.contact = Some(Contact {
                hand,
                start: Some(point),
                current: None,
                visited: Vec::new(),
            });
            if hit.is_some_and(|id| state.selection.contains(&id)) {
                state.mode = Mode::Dragging;
            } else {
                state.mode = Mode::Skimming;
                skim_update(ctx, state, out, point);
            }
        }
        _ => {}
    }
}

fn two_hand_start(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter) {
    let (Some(l), Some(r)) = (state.left.point, state.right.point) else {
        return;
    };
    hide_panel(state, out);
    state.contact = None;
    state.activation_pending = false;
    let mid = state.to_layout(&((l + r) / 2.0));
    let focus = ctx.hit_test.proxy_at(state, &mid).or_else(|| {
        state
            .groups
            .iter()
            .find(|g| !g.collapsed && g.cube.aabb().contains(&mid))
            .map(|g| g.id.clone())
    });
    let zoom = focus.is_some();
    state.two_hand = Some(TwoHand {
        initial_distance: (l - r).norm(),
        focus,
        zoom_fired: false,
        touched: false,
        region: None,
    });
    if zoom {
        state.mode = Mode::ZoomPending;
    } else {
        state.mode = Mode::ContainerPlacing;
        brush_move(state, out);
    }
}

fn pinch_end(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, hand: Hand) {
    state.hand_mut(hand).pinching = false;
    if let Some(th) = state.two_hand.take() {
        if state.mode == Mode::ContainerPlacing && !th.touched {
            if let Some(region) = th.region {
                attempt(state, out, |s, o| create_container(ctx, s, o, &region).map(|_| ()));
            }
        }
        state.mode = Mode::ProxiesActive;
        return;
    }
    if state.activation_pending && hand == state.follow_hand {
        state.activation_pending = false;
        if let Some(id) = state.gaze_target.take() {
            set_selection(state, out, vec![id], true);
        }
        return;
    }
    let Some(contact) = state.contact.as_ref() else {
        return;
    };
    if contact.hand != hand {
        return;
    }
    let contact = state.contact.take().expect("checked above");
    match state.mode {
        Mode::Skimming => {
            hide_panel(state, out);
            let mut touched = contact.visited.clone();
            touched.sort();
            touched.dedup();
            if let [only] = touched.as_slice() {
                set_selection(state, out, vec![only.clone()], true);
            }
        }
        Mode::Dragging => {
            if let (Some(start), Some(end)) = (contact.start, state.hand(hand).point) {
                let result = drag_selection(state, out, end - start);
                report(out, result);
            }
        }
        _ => {}
    }
    state.mode = Mode::ProxiesActive;
}

fn tap(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, t: u64, point: &Vec3) {
    if state.mode == Mode::Idle {
        return;
    }
    let p = state.to_layout(point);
    let hit = ctx.hit_test.proxy_at(state, &p);
    if let Some(Hold {
        target: HoldTarget::Container(cid),
        ..
    }) = &state.hold
    {
        let cid = cid.clone();
        if let Some(id) = hit.filter(|id| *id != cid) {
            attempt(state, out, |s, o| add_to_container(ctx, s, o, &cid, &id));
        }
        return;
    }
    let Some(id) = hit else {
        state.last_tap = None;
        return;
    };
    match state.last_tap.take() {
        Some((t0, prev)) if prev == id && t.saturating_sub(t0) <= ctx.config.double_tap_window_ms => {
            attempt(state, out, |s, o| semantic_group(ctx, s, o, &id, None));
        }
        _ => state.last_tap = Some((t, id)),
    }
}

fn hold_start(ctx: &SceneContext, state: &mut InteractionState, t: u64, point: &Vec3) {
    if state.mode != Mode::ProxiesActive || state.hold.is_some() {
        return;
    }
    let p = state.to_layout(point);
    let target = match ctx.hit_test.proxy_at(state, &p) {
        Some(id) => HoldTarget::Proxy(id),
        None => match state.groups.iter().find(|g| !g.collapsed && g.cube.aabb().contains(&p)) {
            Some(g) => HoldTarget::Container(g.id.clone()),
            None => return,
        },
    };
    let fired = matches!(target, HoldTarget::Container(_));
    state.hold = Some(Hold {
        started: t,
        target,
        fired,
    });
}

fn hold_end(state: &mut InteractionState, out: &mut Emitter, t: u64) {
    let Some(hold) = state.hold.take() else {
        return;
    };
    if let HoldTarget::Proxy(_) = hold.target {
        if hold.fired {
            state.pinned_attributes = None;
            state.mode = Mode::ProxiesActive;
            out.emit(FeedbackKind::AttributesUnpinned);
        } else {
            report(
                out,
                Err(EngineError::HoldTooShort {
                    held_ms: t.saturating_sub(hold.started),
                }),
            );
        }
    }
}

fn tick(ctx: &SceneContext, state: &mut InteractionState, out: &mut Emitter, dt: f64) {
    if state.mode != Mode::ProxiesActive || state.activation_pending || state.hold.is_some() {
        return;
    }
    let Some(hand) = state.hand(state.follow_hand).point else {
        return;
    };
    let anchor = state.anchor();
    let next = lazy_follow_tick(anchor, hand, dt, &ctx.config);
    if next != anchor {
        state.layout.anchor = next;
        out.emit(FeedbackKind::LayoutUpdated {
            layout: state.layout.clone(),
        });
    }
}
