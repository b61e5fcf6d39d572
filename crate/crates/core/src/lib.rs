//! Headless engine for hand-held object proxies.
//!
//! A scene (image-space object hierarchy plus camera, head pose and room
//! mesh) is turned into a compact arrangement of small proxy boxes near the
//! user's hand, and a gesture state machine maps pinches, taps, holds and
//! hand motion on those proxies to selection, filtering, grouping, zoom and
//! command feedback.
//!
//! - [`perception`]: detection dedup, recursive hierarchy building, attribute enrichment
//! - [`scene`]: snapshot format, validation and the read-only [`SceneIndex`]
//! - [`spatial`]: pixel rays, ray/mesh intersection, world placement
//! - [`layout`]: order-preserving, minimum-gap proxy layout
//! - [`engine`]: the interaction state machine
//! - [`session`]: fixture loading, trace replay, persistence, WebSocket service

pub mod config;
pub mod engine;
pub mod geometry;
pub mod layout;
pub mod perception;
pub mod scene;
pub mod session;
pub mod spatial;

pub use config::{Config, ConfigError};
pub use engine::{
    process_event, EngineError, FeedbackEvent, FeedbackKind, GestureEvent, GestureKind, Hand, InteractionState, Mode,
    SceneContext, Session,
};
pub use geometry::{iou, Aabb, Axis, BBox2D, Point2, Vec3};
pub use layout::{solve_layout, ProxyBox, ProxyLayout};
pub use perception::{build_hierarchy, dedup_detections, Detection, SourceError};
pub use scene::{parse_snapshot, validate_snapshot, SceneIndex, SceneNode, SceneSnapshot, SchemaError, Violation};
pub use spatial::{intersect_mesh, HitResult, Ray};
