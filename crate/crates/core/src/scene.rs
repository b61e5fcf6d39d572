//! Scene snapshot: the attribute-enriched object hierarchy together with the
//! mesh and camera context it was captured with, plus the fixture file
//! format and its validation rules.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::geometry::{contains, BBox2D, Vec3};

/// Attribute value as produced by the annotator: free text or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Number(f64),
    Text(String),
}

impl AttributeValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttributeValue::Number(n) => Some(*n),
            AttributeValue::Text(_) => None,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Number(n) => write!(f, "{n}"),
            AttributeValue::Text(s) => f.write_str(s),
        }
    }
}

/// Attributes keep the order in which the fixture (or annotator) declared
/// them; that order is significant for default grouping keys.
pub type AttributeSet = IndexMap<String, AttributeValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneNode {
    pub id: String,
    pub label: String,
    /// In the pixel frame of the parent's crop (the image for Level 1).
    pub bbox: BBox2D,
    pub level: u32,
    #[serde(default)]
    pub attributes: AttributeSet,
    #[serde(default)]
    pub children: Vec<SceneNode>,
    /// Authored position for digital-twin scenes; bypasses raycasting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world_pos: Option<Vec3>,
}

impl SceneNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>, bbox: BBox2D, level: u32) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            bbox,
            level,
            attributes: AttributeSet::new(),
            children: Vec::new(),
            world_pos: None,
        }
    }

    /// Pre-order walk over this node and all descendants.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a SceneNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut SceneNode)) {
        f(self);
        for c in &mut self.children {
            c.walk_mut(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    /// Unit quaternion as `[w, x, y, z]`.
    pub quaternion: [f64; 4],
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            quaternion: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn rotation(&self) -> nalgebra::UnitQuaternion<f64> {
        let [w, x, y, z] = self.quaternion;
        nalgebra::UnitQuaternion::new_normalize(nalgebra::Quaternion::new(w, x, y, z))
    }

    pub fn quaternion_norm(&self) -> f64 {
        self.quaternion.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Corner positions of triangle `i`. Panics on out-of-range indices,
    /// which validation rules out.
    pub fn corners(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    /// `[width, height]` in pixels.
    pub image_size: [f64; 2],
    pub camera: CameraIntrinsics,
    pub head: Pose,
    #[serde(default)]
    pub mesh: TriangleMesh,
    #[serde(default)]
    pub config: Config,
    #[serde(default)]
    pub nodes: Vec<SceneNode>,
}

impl SceneSnapshot {
    pub fn image_box(&self) -> BBox2D {
        BBox2D::new(0.0, 0.0, self.image_size[0], self.image_size[1])
    }

    /// True when every node carries an authored position, so no raycast is
    /// needed to place anything.
    pub fn spatializer_bypassed(&self) -> bool {
        let mut all = !self.nodes.is_empty();
        for n in &self.nodes {
            n.walk(&mut |n| all &= n.world_pos.is_some());
        }
        all
    }

    pub fn node_count(&self) -> usize {
        let mut count = 0;
        for n in &self.nodes {
            n.walk(&mut |_| count += 1);
        }
        count
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serialization is infallible")
    }
}

/// One broken invariant, located by JSON path and (when applicable) node id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub path: String,
    pub node_id: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path)?;
        if let Some(id) = &self.node_id {
            write!(f, " (id `{id}`)")?;
        }
        write!(f, ": {}: {}", self.rule, self.detail)
    }
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("{} violation(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone)]
pub struct ParsedSnapshot {
    pub snapshot: SceneSnapshot,
    /// JSON paths of fields that were present but not understood.
    pub warnings: Vec<String>,
}

/// Deserialize with serde_path_to_error for located errors and
/// serde_ignored to record unknown fields.
pub(crate) fn parse_json_with_warnings<T: serde::de::DeserializeOwned>(
    bytes: &[u8],
) -> Result<(T, Vec<String>), SchemaError> {
    let mut warnings = Vec::new();
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let mut record = |path: serde_ignored::Path| warnings.push(format!("unknown field ignored: {path}"));
    let ignoring = serde_ignored::Deserializer::new(&mut de, &mut record);
    let value: T = serde_path_to_error::deserialize(ignoring).map_err(|e| SchemaError::Malformed {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| SchemaError::Malformed {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok((value, warnings))
}

/// Parse a scene fixture and reject it unless it validates cleanly.
pub fn parse_snapshot(bytes: &[u8]) -> Result<ParsedSnapshot, SchemaError> {
    let (snapshot, warnings) = parse_json_with_warnings::<SceneSnapshot>(bytes)?;
    let violations = validate_snapshot(&snapshot);
    if !violations.is_empty() {
        return Err(SchemaError::Invalid(violations));
    }
    Ok(ParsedSnapshot { snapshot, warnings })
}

pub fn serialize_snapshot(s: &SceneSnapshot) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(s).expect("snapshot serialization is infallible");
    out.push(b'\n');
    out
}

/// Check every type invariant. Never fails; an empty list means valid.
pub fn validate_snapshot(s: &SceneSnapshot) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule: &'static str, path: String, node_id: Option<&str>, detail: String| {
        out.push(Violation {
            rule,
            path,
            node_id: node_id.map(str::to_string),
            detail,
        })
    };

    for problem in s.config.problems() {
        push("config-invalid", "config".into(), None, problem);
    }
    let [iw, ih] = s.image_size;
    if !(iw.is_finite() && ih.is_finite() && iw > 0.0 && ih > 0.0) {
        push("image-size", "image_size".into(), None, format!("{iw}x{ih}"));
    }
    let cam = &s.camera;
    if !(cam.fx.is_finite() && cam.fy.is_finite() && cam.fx > 0.0 && cam.fy > 0.0)
        || !(cam.cx.is_finite() && cam.cy.is_finite())
    {
        push("camera-intrinsics", "camera".into(), None, format!("{cam:?}"));
    }
    if (s.head.quaternion_norm() - 1.0).abs() > 1e-6 {
        push(
            "pose-quaternion",
            "head.quaternion".into(),
            None,
            format!("norm {}", s.head.quaternion_norm()),
        );
    }
    if !s.head.position.iter().all(|v| v.is_finite()) {
        push("pose-position", "head.position".into(), None, "non-finite".into());
    }

    for (i, v) in s.mesh.vertices.iter().enumerate() {
        if !v.iter().all(|c| c.is_finite()) {
            push(
                "mesh-nonfinite",
                format!("mesh.vertices[{i}]"),
                None,
                "non-finite vertex".into(),
            );
        }
    }
    let nv = s.mesh.vertices.len();
    for (i, tri) in s.mesh.triangles.iter().enumerate() {
        let path = format!("mesh.triangles[{i}]");
        if tri.iter().any(|&k| k >= nv) {
            push("mesh-index", path, None, format!("{tri:?} with {nv} vertices"));
            continue;
        }
        let [a, b, c] = s.mesh.corners(i);
        let area2 = (b - a).cross(&(c - a)).norm();
        if area2.is_nan() || area2 <= 1e-12 {
            push("mesh-degenerate", path, None, "zero-area triangle".into());
        }
    }

    let mut seen: HashSet<&str> = HashSet::new();
    let image = s.image_box();
    for (i, n) in s.nodes.iter().enumerate() {
        validate_node(n, &format!("nodes[{i}]"), 1, &image, &mut seen, &mut push);
    }
    out
}

fn validate_node<'a>(
    n: &'a SceneNode,
    path: &str,
    expected_level: u32,
    frame: &BBox2D,
    seen: &mut HashSet<&'a str>,
    push: &mut impl FnMut(&'static str, String, Option<&str>, String),
) {
    let id = Some(n.id.as_str());
    if n.id.is_empty() {
        push("id-empty", path.to_string(), None, "node id is empty".into());
    } else if !seen.insert(&n.id) {
        push(
            "duplicate-id",
            path.to_string(),
            id,
            format!("id `{}` appears more than once", n.id),
        );
    }
    if n.level != expected_level {
        push(
            "level-sequence",
            path.to_string(),
            id,
            format!("level {} where {} expected", n.level, expected_level),
        );
    }
    if !n.bbox.is_valid() {
        push("bbox-invalid", path.to_string(), id, format!("{:?}", n.bbox));
    } else if !contains(frame, &n.bbox, 0.0) {
        push(
            "bbox-containment",
            path.to_string(),
            id,
            format!("{:?} outside parent frame {}x{}", n.bbox, frame.w, frame.h),
        );
    }
    for (k, v) in &n.attributes {
        if let AttributeValue::Number(x) = v {
            if !x.is_finite() {
                push("attribute-nonfinite", path.to_string(), id, format!("attribute `{k}`"));
            }
        }
    }
    if let Some(p) = &n.world_pos {
        if !p.iter().all(|c| c.is_finite()) {
            push(
                "world-pos-nonfinite",
                path.to_string(),
                id,
                "non-finite world_pos".into(),
            );
        }
    }
    let child_frame = BBox2D::new(0.0, 0.0, n.bbox.w, n.bbox.h);
    for (j, c) in n.children.iter().enumerate() {
        validate_node(
            c,
            &format!("{path}.children[{j}]"),
            n.level + 1,
            &child_frame,
            seen,
            push,
        );
    }
}

/// A flattened node with its box converted to image coordinates.
#[derive(Debug, Clone)]
pub struct IndexedNode {
    pub id: String,
    pub label: String,
    pub level: u32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub root_bbox: BBox2D,
    pub attributes: AttributeSet,
    pub world_pos: Option<Vec3>,
}

/// Id lookup and root-frame boxes over a validated snapshot.
#[derive(Debug, Clone, Default)]
pub struct SceneIndex {
    nodes: Vec<IndexedNode>,
    by_id: HashMap<String, usize>,
}

impl SceneIndex {
    pub fn new(s: &SceneSnapshot) -> Self {
        let mut idx = SceneIndex::default();
        for n in &s.nodes {
            idx.insert(n, None, [0.0, 0.0]);
        }
        idx
    }

    fn insert(&mut self, n: &SceneNode, parent: Option<usize>, origin: [f64; 2]) -> usize {
        let root_bbox = n.bbox.offset(origin);
        let at = self.nodes.len();
        self.nodes.push(IndexedNode {
            id: n.id.clone(),
            label: n.label.clone(),
            level: n.level,
            parent,
            children: Vec::new(),
            root_bbox,
            attributes: n.attributes.clone(),
            world_pos: n.world_pos,
        });
        self.by_id.insert(n.id.clone(), at);
        for c in &n.children {
            let ci = self.insert(c, Some(at), [root_bbox.x, root_bbox.y]);
            self.nodes[at].children.push(ci);
        }
        at
    }

    pub fn get(&self, id: &str) -> Option<&IndexedNode> {
        self.by_id.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// All nodes in pre-order.
    pub fn iter(&self) -> impl Iterator<Item = &IndexedNode> {
        self.nodes.iter()
    }

    pub fn level_one(&self) -> impl Iterator<Item = &IndexedNode> {
        self.nodes.iter().filter(|n| n.parent.is_none())
    }

    pub fn children(&self, id: &str) -> Vec<&IndexedNode> {
        self.get(id)
            .map(|n| n.children.iter().map(|&c| &self.nodes[c]).collect())
            .unwrap_or_default()
    }

    pub fn parent(&self, id: &str) -> Option<&IndexedNode> {
        self.get(id).and_then(|n| n.parent).map(|p| &self.nodes[p])
    }
}
