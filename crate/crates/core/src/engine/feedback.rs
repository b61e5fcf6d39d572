use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::layout::{ProxyBox, ProxyLayout};
use crate::scene::AttributeSet;

pub const SELECTED_COLOR: &str = "#ffd400";
pub const GAZE_COLOR: &str = "#4fc3f7";
/// Removes a highlight.
pub const NO_COLOR: &str = "none";
/// Semantic partitions take colors from here in partition order.
pub const PALETTE: [&str; 8] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub t: u64,
    #[serde(flatten)]
    pub kind: FeedbackKind,
}

/// A proxy standing for one attribute value of a held object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeProxy {
    pub id: String,
    pub key: String,
    pub value: crate::scene::AttributeValue,
    #[serde(rename = "box")]
    pub cube: ProxyBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoticeCode {
    NoGaze,
    GazeOutsideImage,
    NoObjectsInRegion,
    Unplaced,
    HoldTooShort,
    NoChildren,
    AtRoot,
    NoAttributes,
    EmptyContainer,
    DegenerateRegion,
    UnknownId,
    NonNumericAttribute,
    OpenPath,
    EmptySelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FeedbackKind {
    HighlightObject {
        id: String,
        color: String,
    },
    HighlightProxy {
        id: String,
        color: String,
    },
    ShowPanel {
        id: String,
        attributes: AttributeSet,
        /// World position the panel is attached to.
        at: Vec3,
    },
    HidePanel,
    SelectionChanged {
        ids: Vec<String>,
    },
    LevelChanged {
        level: u32,
    },
    GroupCreated {
        id: String,
        #[serde(rename = "box")]
        cube: ProxyBox,
    },
    GroupUpdated {
        id: String,
        members: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        collapsed: Option<bool>,
    },
    AggregateComputed {
        id: String,
        key: String,
        value: f64,
    },
    CommandIssued {
        ids: Vec<String>,
        vector: Vec3,
    },
    LayoutUpdated {
        layout: ProxyLayout,
    },
    AttributesPinned {
        id: String,
        proxies: Vec<AttributeProxy>,
    },
    AttributesUnpinned,
    /// A gesture was recognized but could not be applied.
    Notice {
        code: NoticeCode,
        detail: String,
    },
}

impl FeedbackKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeedbackKind::HighlightObject { .. } => "HighlightObject",
            FeedbackKind::HighlightProxy { .. } => "HighlightProxy",
            FeedbackKind::ShowPanel { .. } => "ShowPanel",
            FeedbackKind::HidePanel => "HidePanel",
            FeedbackKind::SelectionChanged { .. } => "SelectionChanged",
            FeedbackKind::LevelChanged { .. } => "LevelChanged",
            FeedbackKind::GroupCreated { .. } => "GroupCreated",
            FeedbackKind::GroupUpdated { .. } => "GroupUpdated",
            FeedbackKind::AggregateComputed { .. } => "AggregateComputed",
            FeedbackKind::CommandIssued { .. } => "CommandIssued",
            FeedbackKind::LayoutUpdated { .. } => "LayoutUpdated",
            FeedbackKind::AttributesPinned { .. } => "AttributesPinned",
            FeedbackKind::AttributesUnpinned => "AttributesUnpinned",
            FeedbackKind::Notice { .. } => "Notice",
        }
    }
}

/// Render feedback as line-delimited JSON, one event per line.
pub fn to_jsonl(events: &[FeedbackEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e).expect("feedback serialization is infallible"));
        out.push('\n');
    }
    out
}
