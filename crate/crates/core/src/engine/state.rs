use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Point2, Vec3};
use crate::layout::{ProxyBox, ProxyLayout};
use crate::scene::AttributeValue;

use super::event::Hand;
use super::feedback::AttributeProxy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Idle,
    ProxiesActive,
    Skimming,
    /// Single-hand pinch that started on a selected proxy.
    Dragging,
    Brushing,
    FilterPinned,
    ContainerPlacing,
    ZoomPending,
}

/// Insertion-ordered set of node or group ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelectionSet(Vec<String>);

impl SelectionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut s = Self::new();
        for id in ids {
            s.insert(id.into());
        }
        s
    }

    /// Returns false if already present.
    pub fn insert(&mut self, id: String) -> bool {
        if self.contains(&id) {
            return false;
        }
        self.0.push(id);
        true
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.iter().any(|s| s == id)
    }

    pub fn retain(&mut self, f: impl FnMut(&String) -> bool) {
        self.0.retain(f);
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// User-made group: a persistent cube holding cloned proxies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupContainer {
    pub id: String,
    pub members: Vec<String>,
    pub collapsed: bool,
    #[serde(rename = "box")]
    pub cube: ProxyBox,
    /// Size to restore when the container is expanded again.
    pub expanded_half_extent: f64,
}

/// One value class of a semantic grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub id: String,
    pub value: AttributeValue,
    pub members: Vec<String>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticGrouping {
    pub key: String,
    pub partitions: Vec<Partition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedAttributes {
    pub node: String,
    pub proxies: Vec<AttributeProxy>,
    /// Attribute proxy the hand is currently inside, if any.
    pub hover: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HandState {
    pub pinching: bool,
    pub point: Option<Vec3>,
}

/// A single-hand pinch on the proxy panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub hand: Hand,
    /// World point where the pinch started.
    pub start: Option<Vec3>,
    /// Proxy currently under the hand.
    pub current: Option<String>,
    /// Proxies entered during this contact, in entry order.
    pub visited: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoHand {
    pub initial_distance: f64,
    /// Proxy or container the zoom acts on; `None` for a brush.
    pub focus: Option<String>,
    pub zoom_fired: bool,
    /// Whether the brush region ever touched a proxy.
    pub touched: bool,
    pub region: Option<Aabb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HoldTarget {
    Proxy(String),
    Container(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hold {
    pub started: u64,
    pub target: HoldTarget,
    pub fired: bool,
}

/// Visible set saved when descending a level, restored on the way up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomFrame {
    pub level: u32,
    pub visible: Vec<String>,
}

/// Everything the engine knows about one session apart from the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionState {
    pub mode: Mode,
    pub active_level: u32,
    /// Object ids at `active_level` currently represented.
    pub visible: Vec<String>,
    pub zoom_stack: Vec<ZoomFrame>,
    pub layout: ProxyLayout,
    /// World position behind each layout box.
    pub world_positions: BTreeMap<String, Vec3>,
    pub selection: SelectionSet,
    pub groups: Vec<GroupContainer>,
    pub semantic: Option<SemanticGrouping>,
    pub grouping_key: Option<String>,
    pub pinned_attributes: Option<PinnedAttributes>,
    pub gaze_px: Option<Point2>,
    pub gaze_target: Option<String>,
    pub left: HandState,
    pub right: HandState,
    pub follow_hand: Hand,
    /// The activating pinch is still held; its release selects the gaze target.
    pub activation_pending: bool,
    pub contact: Option<Contact>,
    pub two_hand: Option<TwoHand>,
    pub hold: Option<Hold>,
    pub last_tap: Option<(u64, String)>,
    pub surface_path: Vec<Point2>,
    pub panel: Option<String>,
    pub next_container: u32,
}

impl Default for InteractionState {
    fn default() -> Self {
        Self {
            mode: Mode::Idle,
            active_level: 1,
            visible: Vec::new(),
            zoom_stack: Vec::new(),
            layout: ProxyLayout::empty(Vec3::zeros()),
            world_positions: BTreeMap::new(),
            selection: SelectionSet::new(),
            groups: Vec::new(),
            semantic: None,
            grouping_key: None,
            pinned_attributes: None,
            gaze_px: None,
            gaze_target: None,
            left: HandState::default(),
            right: HandState::default(),
            follow_hand: Hand::Right,
            activation_pending: false,
            contact: None,
            two_hand: None,
            hold: None,
            last_tap: None,
            surface_path: Vec::new(),
            panel: None,
            next_container: 1,
        }
    }
}

impl InteractionState {
    pub fn anchor(&self) -> Vec3 {
        self.layout.anchor
    }

    pub fn hand(&self, hand: Hand) -> &HandState {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }

    pub fn hand_mut(&mut self, hand: Hand) -> &mut HandState {
        match hand {
            Hand::Left => &mut self.left,
            Hand::Right => &mut self.right,
        }
    }

    /// World point to layout frame.
    pub fn to_layout(&self, world: &Vec3) -> Vec3 {
        world - self.layout.anchor
    }

    pub fn container(&self, id: &str) -> Option<&GroupContainer> {
        self.groups.iter().find(|g| g.id == id)
    }

    pub fn container_mut(&mut self, id: &str) -> Option<&mut GroupContainer> {
        self.groups.iter_mut().find(|g| g.id == id)
    }

    pub fn partition(&self, id: &str) -> Option<&Partition> {
        self.semantic
            .as_ref()
            .and_then(|s| s.partitions.iter().find(|p| p.id == id))
    }

    /// Boxes that behave as single proxies: layout boxes then collapsed
    /// containers.
    pub fn proxy_boxes(&self) -> impl Iterator<Item = &ProxyBox> {
        self.layout
            .boxes
            .iter()
            .chain(self.groups.iter().filter(|g| g.collapsed).map(|g| &g.cube))
    }

    /// Ids a selection may legally contain.
    pub fn selectable(&self, id: &str) -> bool {
        self.visible.iter().any(|v| v == id) || self.container(id).is_some() || self.partition(id).is_some()
    }
}
