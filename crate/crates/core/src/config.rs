use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Engine tuning knobs. Every field can be overridden per session through
/// [`Config::set`], using the field name as the key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// How far the gaze region is grown around the gaze point, in meters.
    pub gaze_extension_m: f64,
    /// Detections overlapping a larger one by more than this are dropped.
    pub iou_dedup_threshold: f64,
    /// Boxes with a side below this many pixels are not searched for parts.
    pub min_bbox_px: f64,
    pub min_gap_m: f64,
    pub proxy_size_m: f64,
    pub workspace_extent_m: f64,
    /// World offsets at or below this do not produce an ordering constraint.
    pub tie_tolerance_m: f64,
    pub follow_threshold_m: f64,
    pub follow_time_constant_s: f64,
    pub hold_duration_ms: u64,
    pub double_tap_window_ms: u64,
    pub zoom_in_ratio: f64,
    pub zoom_out_ratio: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            gaze_extension_m: 0.20,
            iou_dedup_threshold: 0.75,
            min_bbox_px: 24.0,
            min_gap_m: 0.005,
            proxy_size_m: 0.03,
            workspace_extent_m: 0.30,
            tie_tolerance_m: 0.02,
            follow_threshold_m: 0.15,
            follow_time_constant_s: 0.15,
            hold_duration_ms: 500,
            double_tap_window_ms: 300,
            zoom_in_ratio: 1.4,
            zoom_out_ratio: 0.7,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("config invariant violated: {0}")]
    Invariant(String),
}

impl Config {
    /// Apply a single `key=value` override. The result is re-validated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let float = || value.trim().parse::<f64>().map_err(|_| bad());
        let int = || value.trim().parse::<u64>().map_err(|_| bad());
        let mut next = self.clone();
        match key {
            "gaze_extension_m" => next.gaze_extension_m = float()?,
            "iou_dedup_threshold" => next.iou_dedup_threshold = float()?,
            "min_bbox_px" => next.min_bbox_px = float()?,
            "min_gap_m" => next.min_gap_m = float()?,
            "proxy_size_m" => next.proxy_size_m = float()?,
            "workspace_extent_m" => next.workspace_extent_m = float()?,
            "tie_tolerance_m" => next.tie_tolerance_m = float()?,
            "follow_threshold_m" => next.follow_threshold_m = float()?,
            "follow_time_constant_s" => next.follow_time_constant_s = float()?,
            "hold_duration_ms" => next.hold_duration_ms = int()?,
            "double_tap_window_ms" => next.double_tap_window_ms = int()?,
            "zoom_in_ratio" => next.zoom_in_ratio = float()?,
            "zoom_out_ratio" => next.zoom_out_ratio = float()?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        if let Some(problem) = next.problems().into_iter().next() {
            return Err(ConfigError::Invariant(problem));
        }
        *self = next;
        Ok(())
    }

    /// Parse and apply a `key=value` string as given on the command line.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: spec.to_string(),
            value: String::new(),
        })?;
        self.set(key.trim(), value)
    }

    /// Human-readable list of broken invariants; empty when valid.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("gaze_extension_m", self.gaze_extension_m),
            ("min_bbox_px", self.min_bbox_px),
            ("min_gap_m", self.min_gap_m),
            ("proxy_size_m", self.proxy_size_m),
            ("workspace_extent_m", self.workspace_extent_m),
            ("tie_tolerance_m", self.tie_tolerance_m),
            ("follow_threshold_m", self.follow_threshold_m),
            ("follow_time_constant_s", self.follow_time_constant_s),
            ("zoom_in_ratio", self.zoom_in_ratio),
            ("zoom_out_ratio", self.zoom_out_ratio),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be positive and finite"));
            }
        }
        if self.hold_duration_ms == 0 {
            out.push("hold_duration_ms must be positive".into());
        }
        if self.double_tap_window_ms == 0 {
            out.push("double_tap_window_ms must be positive".into());
        }
        if !(self.zoom_out_ratio < 1.0 && 1.0 < self.zoom_in_ratio) {
            out.push("zoom ratios must satisfy zoom_out_ratio < 1 < zoom_in_ratio".into());
        }
        if !(self.iou_dedup_threshold > 0.0 && self.iou_dedup_threshold <= 1.0) {
            out.push("iou_dedup_threshold must lie in (0, 1]".into());
        }
        out
    }

    /// Layout pitch: the minimum center distance between two proxies.
    pub fn proxy_pitch(&self) -> f64 {
        self.proxy_size_m + self.min_gap_m
    }
}
