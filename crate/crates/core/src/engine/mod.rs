//! Gesture-driven interaction state machine.
//!
//! [`process_event`] is a pure transition from `(state, event)` to
//! `(state', feedback)`. Everything a session needs besides its state (the
//! scene, its index, the effective config and the hit-test strategy) lives
//! in a shared, read-only [`SceneContext`].
//!
//! Dispatch rules, by event:
//!
//! | event | effect |
//! |---|---|
//! | `PinchStart`, idle | activate proxies around the gaze point |
//! | `PinchStart`, away from the proxy panel | re-activate at the new gaze point |
//! | `PinchStart` on a selected proxy | begin drag, released as `CommandIssued` |
//! | `PinchStart` elsewhere on the panel | begin skim contact |
//! | second hand pinches, midpoint inside a proxy | zoom on that proxy |
//! | second hand pinches, midpoint in free space | brush; a brush that never touches a proxy becomes a container on release |
//! | `PinchEnd` of the activating pinch | select the gaze target |
//! | `PinchEnd` after touching exactly one proxy | select it |
//! | `HoldStart` on a proxy, held `hold_duration_ms` | pin attribute proxies until `HoldEnd` |
//! | `HoldStart` on an expanded container | `Tap`s on proxies add them to it |
//! | `DoubleTap`, or two `Tap`s on one proxy within the window | semantic grouping |
//! | `SurfacePathEnd` | lasso over the collected surface path |
//! | `Tick` with no contact | lazy-follow the activating hand |

mod dispatch;
mod event;
mod feedback;
mod follow;
mod ops;
mod state;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::config::Config;
use crate::geometry::Vec3;
use crate::scene::{SceneIndex, SceneSnapshot};

pub use dispatch::process_event;
pub use event::{GestureEvent, GestureKind, Hand};
pub use feedback::{
    to_jsonl, AttributeProxy, FeedbackEvent, FeedbackKind, NoticeCode, GAZE_COLOR, NO_COLOR, PALETTE, SELECTED_COLOR,
};
pub use follow::{follow_alpha, lazy_follow_tick};
pub use ops::{
    activate_proxies, add_to_container, aggregate_group, attribute_filter, brush_hits, brush_update,
    collapse_container, create_container, drag_selection, expand_container, lasso_select, pin_attributes,
    point_in_polygon, semantic_group, set_selection, skim_update, zoom_level, Emitter,
};
pub use state::{
    Contact, GroupContainer, HandState, Hold, HoldTarget, InteractionState, Mode, Partition, PinnedAttributes,
    SelectionSet, SemanticGrouping, TwoHand, ZoomFrame,
};

/// Decides which proxy a layout-frame point is touching.
pub trait HitTest: Send + Sync {
    fn proxy_at(&self, state: &InteractionState, point: &Vec3) -> Option<String>;
}

/// Geometric containment; overlapping boxes resolve to the nearest center.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoxContainment;

impl HitTest for BoxContainment {
    fn proxy_at(&self, state: &InteractionState, point: &Vec3) -> Option<String> {
        let mut best: Option<(f64, &str)> = None;
        for b in state.proxy_boxes() {
            if b.aabb().contains(point) {
                let d = (b.center - point).norm();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, &b.id));
                }
            }
        }
        best.map(|(_, id)| id.to_string())
    }
}

pub struct SceneContext {
    pub snapshot: SceneSnapshot,
    pub index: SceneIndex,
    pub config: Config,
    pub hit_test: Box<dyn HitTest>,
}

impl fmt::Debug for SceneContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SceneContext")
            .field("nodes", &self.snapshot.node_count())
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl SceneContext {
    /// Uses the snapshot's own config.
    pub fn new(snapshot: SceneSnapshot) -> Self {
        let config = snapshot.config.clone();
        Self::with_config(snapshot, config)
    }

    pub fn with_config(snapshot: SceneSnapshot, config: Config) -> Self {
        let index = SceneIndex::new(&snapshot);
        Self {
            snapshot,
            index,
            config,
            hit_test: Box::new(BoxContainment),
        }
    }

    pub fn with_hit_test(mut self, hit_test: Box<dyn HitTest>) -> Self {
        self.hit_test = hit_test;
        self
    }
}

/// Why an operation could not be applied. Surfaced as `Notice` feedback.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("no gaze point has been reported")]
    NoGaze,
    #[error("{0}")]
    GazeOutsideImage(String),
    #[error("no objects in the gaze region")]
    NoObjectsInRegion,
    #[error("hold released after {held_ms} ms")]
    HoldTooShort { held_ms: u64 },
    #[error("`{0}` has no children")]
    NoChildren(String),
    #[error("already at the top level")]
    AtRoot,
    #[error("`{0}` has no attributes to group by")]
    NoAttributes(String),
    #[error("container `{0}` is empty")]
    EmptyContainer(String),
    #[error("brush region has no volume")]
    DegenerateRegion,
    #[error("brush region overlaps proxies")]
    RegionNotEmpty,
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("member `{member}` has no numeric `{key}`")]
    NonNumericAttribute { member: String, key: String },
    #[error("surface path is not closed")]
    OpenPath,
    #[error("nothing is selected")]
    EmptySelection,
}

impl EngineError {
    /// Notice code, or `None` for errors that silently fall through.
    pub fn code(&self) -> Option<NoticeCode> {
        Some(match self {
            EngineError::NoGaze => NoticeCode::NoGaze,
            EngineError::GazeOutsideImage(_) => NoticeCode::GazeOutsideImage,
            EngineError::NoObjectsInRegion => NoticeCode::NoObjectsInRegion,
            EngineError::HoldTooShort { .. } => NoticeCode::HoldTooShort,
            EngineError::NoChildren(_) => NoticeCode::NoChildren,
            EngineError::AtRoot => NoticeCode::AtRoot,
            EngineError::NoAttributes(_) => NoticeCode::NoAttributes,
            EngineError::EmptyContainer(_) => NoticeCode::EmptyContainer,
            EngineError::DegenerateRegion => NoticeCode::DegenerateRegion,
            EngineError::RegionNotEmpty => return None,
            EngineError::UnknownId(_) => NoticeCode::UnknownId,
            EngineError::NonNumericAttribute { .. } => NoticeCode::NonNumericAttribute,
            EngineError::OpenPath => NoticeCode::OpenPath,
            EngineError::EmptySelection => NoticeCode::EmptySelection,
        })
    }
}

/// One scene plus one evolving interaction state.
#[derive(Debug, Clone)]
pub struct Session {
    ctx: Arc<SceneContext>,
    state: InteractionState,
}

impl Session {
    pub fn new(ctx: Arc<SceneContext>) -> Self {
        Self {
            ctx,
            state: InteractionState::default(),
        }
    }

    pub fn with_state(ctx: Arc<SceneContext>, state: InteractionState) -> Self {
        Self { ctx, state }
    }

    pub fn handle(&mut self, ev: &GestureEvent) -> Vec<FeedbackEvent> {
        let (next, feedback) = process_event(&self.ctx, &self.state, ev);
        self.state = next;
        feedback
    }

    pub fn state(&self) -> &InteractionState {
        &self.state
    }

    pub fn context(&self) -> &Arc<SceneContext> {
        &self.ctx
    }
}
