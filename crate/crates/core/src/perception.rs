//! Turns a detection source into the attribute-enriched object hierarchy.
//!
//! Detection and attribute extraction are abstracted behind
//! [`DetectionSource`] and [`AnnotatorSource`]. The crate ships fixture-backed
//! implementations and an adapter for an external JSON endpoint; no model
//! inference happens here.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::geometry::{iou, BBox2D, Point2};
use crate::scene::{parse_json_with_warnings, AttributeSet, SceneNode, SchemaError};

/// Region key used for the top-level (whole frame) query.
pub const ROOT_KEY: &str = "root";
/// Id prefix of the root region; Level-k ids carry k further components.
pub const ROOT_ID: &str = "1";
/// Hard stop for recursion, independent of box size.
pub const MAX_DEPTH: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox2D,
    pub label: String,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: BBox2D, label: impl Into<String>, score: f64) -> Self {
        Self {
            bbox,
            label: label.into(),
            score,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("source unavailable: {0}")]
    Unavailable(String),
    #[error("source returned an invalid response: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum PerceptionError {
    #[error("gaze point ({x}, {y}) lies outside the {w}x{h} image")]
    GazeOutsideImage { x: f64, y: f64, w: f64, h: f64 },
}

/// A detection request: `key` names the region (`"root"` or the id of the
/// node whose crop is being searched), `region` is in that query's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub key: String,
    pub region: BBox2D,
    pub depth: u32,
}

pub trait DetectionSource {
    /// Boxes must lie inside `query.region`, in the same frame.
    fn detect(&self, query: &RegionQuery) -> Result<Vec<Detection>, SourceError>;
}

pub trait AnnotatorSource {
    fn annotate(&self, id: &str, label: &str) -> Result<AttributeSet, SourceError>;
}

/// Square region of half-width `radius_px` around the gaze point, clamped to
/// the image.
pub fn extend_gaze_region(gaze_px: Point2, radius_px: f64, image_size: [f64; 2]) -> Result<BBox2D, PerceptionError> {
    let [w, h] = image_size;
    let [x, y] = gaze_px;
    if !(x >= 0.0 && x <= w && y >= 0.0 && y <= h) {
        return Err(PerceptionError::GazeOutsideImage { x, y, w, h });
    }
    let x0 = (x - radius_px).max(0.0);
    let y0 = (y - radius_px).max(0.0);
    let x1 = (x + radius_px).min(w);
    let y1 = (y + radius_px).min(h);
    Ok(BBox2D::new(x0, y0, x1 - x0, y1 - y0))
}

fn rank(a: &(usize, &Detection), b: &(usize, &Detection)) -> Ordering {
    b.1.bbox
        .area()
        .total_cmp(&a.1.bbox.area())
        .then_with(|| b.1.score.total_cmp(&a.1.score))
        .then_with(|| a.1.label.cmp(&b.1.label))
        .then_with(|| a.0.cmp(&b.0))
}

/// Size-ordered duplicate removal.
///
/// Detections are ranked by area (descending), then score (descending), label
/// and input position. A detection is dropped when its IoU with an
/// already-kept one exceeds `threshold`.
pub fn dedup_detections(ds: &[Detection], threshold: f64) -> Vec<Detection> {
    let mut ranked: Vec<(usize, &Detection)> = ds.iter().enumerate().collect();
    ranked.sort_by(rank);
    let mut kept: Vec<Detection> = Vec::with_capacity(ds.len());
    for (_, d) in ranked {
        if kept.iter().all(|k| iou(&k.bbox, &d.bbox) <= threshold) {
            kept.push(d.clone());
        }
    }
    kept
}

fn clip(b: &BBox2D, frame: &BBox2D) -> Option<BBox2D> {
    let x0 = b.x.max(frame.x);
    let y0 = b.y.max(frame.y);
    let x1 = b.right().min(frame.right());
    let y1 = b.bottom().min(frame.bottom());
    (x1 > x0 && y1 > y0).then(|| BBox2D::new(x0, y0, x1 - x0, y1 - y0))
}

/// Recursive detection over `region` (image frame). Each kept box becomes a
/// node; its crop is searched again until nothing is found, the box is
/// smaller than `cfg.min_bbox_px` on a side, or [`MAX_DEPTH`] is reached.
/// Duplicates are removed within each crop independently.
pub fn build_hierarchy(src: &dyn DetectionSource, region: BBox2D, cfg: &Config) -> Result<Vec<SceneNode>, SourceError> {
    detect_level(src, ROOT_KEY, ROOT_ID, region, 1, cfg)
}

fn detect_level(
    src: &dyn DetectionSource,
    key: &str,
    id_prefix: &str,
    region: BBox2D,
    depth: u32,
    cfg: &Config,
) -> Result<Vec<SceneNode>, SourceError> {
    let query = RegionQuery {
        key: key.to_string(),
        region,
        depth,
    };
    let mut found = Vec::new();
    for d in src.detect(&query)? {
        if !(0.0..=1.0).contains(&d.score) {
            return Err(SourceError::Invalid(format!(
                "score {} for `{}` outside [0, 1]",
                d.score, d.label
            )));
        }
        if let Some(bbox) = clip(&d.bbox, &region) {
            found.push(Detection { bbox, ..d });
        }
    }
    let kept = dedup_detections(&found, cfg.iou_dedup_threshold);

    let mut nodes = Vec::with_capacity(kept.len());
    for (i, d) in kept.into_iter().enumerate() {
        let id = format!("{id_prefix}.{}", i + 1);
        let mut node = SceneNode::new(id, d.label, d.bbox, depth);
        if depth < MAX_DEPTH && d.bbox.min_side() >= cfg.min_bbox_px {
            let crop = BBox2D::new(0.0, 0.0, d.bbox.w, d.bbox.h);
            node.children = detect_level(src, &node.id, &node.id, crop, depth + 1, cfg)?;
        }
        nodes.push(node);
    }
    Ok(nodes)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnrichReport {
    pub enriched: usize,
    /// Nodes whose annotation failed; they keep their previous attributes.
    pub failed: Vec<(String, String)>,
}

/// Merge annotator output into every node; annotator values win on key
/// conflicts. Tree shape is never changed.
pub fn enrich_attributes(nodes: &mut [SceneNode], ann: &dyn AnnotatorSource) -> EnrichReport {
    let mut report = EnrichReport::default();
    for root in nodes.iter_mut() {
        root.walk_mut(&mut |n| match ann.annotate(&n.id, &n.label) {
            Ok(attrs) => {
                for (k, v) in attrs {
                    n.attributes.insert(k, v);
                }
                report.enriched += 1;
            }
            Err(e) => report.failed.push((n.id.clone(), e.to_string())),
        });
    }
    report
}

/// Detection fixture: region key (`"root"` or a node id) to the boxes a
/// detector returns for that region.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixtureDetections(pub BTreeMap<String, Vec<Detection>>);

impl FixtureDetections {
    pub fn parse(bytes: &[u8]) -> Result<(Self, Vec<String>), SchemaError> {
        parse_json_with_warnings(bytes)
    }
}

impl DetectionSource for FixtureDetections {
    fn detect(&self, query: &RegionQuery) -> Result<Vec<Detection>, SourceError> {
        Ok(self.0.get(&query.key).cloned().unwrap_or_default())
    }
}

/// Annotation fixture: node id to attributes. Unknown ids annotate to `{}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixtureAnnotations(pub BTreeMap<String, AttributeSet>);

impl FixtureAnnotations {
    pub fn parse(bytes: &[u8]) -> Result<(Self, Vec<String>), SchemaError> {
        parse_json_with_warnings(bytes)
    }
}

impl AnnotatorSource for FixtureAnnotations {
    fn annotate(&self, id: &str, _label: &str) -> Result<AttributeSet, SourceError> {
        Ok(self.0.get(id).cloned().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectRequest {
    pub region: BBox2D,
    pub depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectResponse {
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotateRequest {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotateResponse {
    pub attributes: AttributeSet,
}

/// Request/response transport for an external detector or annotator.
pub trait JsonEndpoint {
    fn call(&self, request: serde_json::Value) -> Result<serde_json::Value, SourceError>;
}

impl<F> JsonEndpoint for F
where
    F: Fn(serde_json::Value) -> Result<serde_json::Value, SourceError>,
{
    fn call(&self, request: serde_json::Value) -> Result<serde_json::Value, SourceError> {
        self(request)
    }
}

/// Adapts an external endpoint to both source traits.
pub struct ExternalSource<E> {
    endpoint: E,
}

impl<E: JsonEndpoint> ExternalSource<E> {
    pub fn new(endpoint: E) -> Self {
        Self { endpoint }
    }

    fn round_trip<Req: Serialize, Resp: serde::de::DeserializeOwned>(&self, req: &Req) -> Result<Resp, SourceError> {
        let body = serde_json::to_value(req).map_err(|e| SourceError::Invalid(e.to_string()))?;
        let resp = self.endpoint.call(body)?;
        serde_json::from_value(resp).map_err(|e| SourceError::Invalid(e.to_string()))
    }
}

impl<E: JsonEndpoint> DetectionSource for ExternalSource<E> {
    fn detect(&self, query: &RegionQuery) -> Result<Vec<Detection>, SourceError> {
        let req = DetectRequest {
            region: query.region,
            depth: query.depth,
            key: Some(query.key.clone()),
        };
        Ok(self.round_trip::<_, DetectResponse>(&req)?.detections)
    }
}

impl<E: JsonEndpoint> AnnotatorSource for ExternalSource<E> {
    fn annotate(&self, id: &str, label: &str) -> Result<AttributeSet, SourceError> {
        let req = AnnotateRequest {
            id: id.to_string(),
            label: label.to_string(),
        };
        Ok(self.round_trip::<_, AnnotateResponse>(&req)?.attributes)
    }
}
