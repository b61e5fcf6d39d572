use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub fn other(self) -> Hand {
        match self {
            Hand::Left => Hand::Right,
            Hand::Right => Hand::Left,
        }
    }
}

/// Pre-classified input event. One JSON object per trace line, e.g.
/// `{"t":120,"type":"HandMove","hand":"right","point":[0.1,0.0,0.4]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    /// Milliseconds; non-decreasing within a trace.
    pub t: u64,
    #[serde(flatten)]
    pub kind: GestureKind,
}

impl GestureEvent {
    pub fn new(t: u64, kind: GestureKind) -> Self {
        Self { t, kind }
    }
}

/// Hand and tap points are world-frame meters. Surface path points are
/// meters in the surface plane (the layout's x/y plane).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum GestureKind {
    GazeMove {
        px: Point2,
    },
    PinchStart {
        hand: Hand,
    },
    PinchEnd {
        hand: Hand,
    },
    HandMove {
        hand: Hand,
        point: Vec3,
    },
    Tap {
        point: Vec3,
    },
    HoldStart {
        point: Vec3,
    },
    HoldEnd,
    DoubleTap {
        point: Vec3,
        /// Attribute to group by; defaults to the node's first attribute.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        key: Option<String>,
    },
    SurfacePathPoint {
        point: Point2,
    },
    SurfacePathEnd,
    Tick {
        /// Seconds since the previous tick.
        dt: f64,
    },
    /// Any event type this engine does not know; ignored.
    #[serde(other)]
    Unknown,
}
