//! Compact, order-preserving proxy layout.
//!
//! World positions are centered and uniformly scaled into the hand
//! workspace. Each pair of objects is assigned a separation axis (its axis of
//! largest world offset), and along that axis the pair must end up at least
//! one proxy pitch apart. Those requirements form a difference-constraint
//! system that is ordered consistently with the world coordinates, so a
//! single forward pass per axis, in ascending world order, yields the
//! componentwise-smallest feasible layout at or above the scaled targets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::geometry::{Aabb, Axis, Vec3};

/// Upper bound on the uniform scale applied to world offsets.
pub const MAX_SCALE: f64 = 10.0;
const MIN_EXTENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingConstraint {
    pub axis: Axis,
    pub before: String,
    pub after: String,
    pub world_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyBox {
    pub id: String,
    /// Relative to the layout anchor.
    pub center: Vec3,
    pub half_extent: f64,
}

impl ProxyBox {
    pub fn aabb(&self) -> Aabb {
        Aabb::cube(&self.center, self.half_extent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub a: String,
    pub b: String,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyLayout {
    pub anchor: Vec3,
    pub scale_used: f64,
    pub boxes: Vec<ProxyBox>,
    #[serde(default)]
    pub separation: Vec<Separation>,
}

/// The on-disk layout export consumed by clients and golden tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutExport {
    pub anchor: Vec3,
    pub scale_used: f64,
    pub boxes: Vec<ProxyBox>,
}

impl ProxyLayout {
    pub fn empty(anchor: Vec3) -> Self {
        Self {
            anchor,
            scale_used: 1.0,
            boxes: Vec::new(),
            separation: Vec::new(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&ProxyBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.boxes.iter().map(|b| b.id.as_str())
    }

    pub fn separation_axis(&self, a: &str, b: &str) -> Option<Axis> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.separation.iter().find(|s| s.a == a && s.b == b).map(|s| s.axis)
    }

    pub fn export(&self) -> LayoutExport {
        LayoutExport {
            anchor: self.anchor,
            scale_used: self.scale_used,
            boxes: self.boxes.clone(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("no placed positions to lay out")]
    EmptyInput,
}

/// Strategy for turning world positions into a layout. The forward pass is
/// the only implementation shipped.
pub trait LayoutSolver {
    fn solve(&self, positions: &BTreeMap<String, Vec3>, anchor: Vec3, cfg: &Config)
        -> Result<ProxyLayout, LayoutError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ForwardPass;

impl LayoutSolver for ForwardPass {
    fn solve(
        &self,
        positions: &BTreeMap<String, Vec3>,
        anchor: Vec3,
        cfg: &Config,
    ) -> Result<ProxyLayout, LayoutError> {
        solve_layout(positions, anchor, cfg)
    }
}

/// One constraint per pair and axis whose world offset exceeds the tie
/// tolerance, oriented by coordinate.
pub fn derive_constraints(positions: &BTreeMap<String, Vec3>, cfg: &Config) -> Vec<OrderingConstraint> {
    let entries: Vec<_> = positions.iter().collect();
    let mut out = Vec::new();
    for (i, (id_a, pa)) in entries.iter().enumerate() {
        for (id_b, pb) in &entries[i + 1..] {
            for axis in Axis::ALL {
                let k = axis.index();
                let delta = pb[k] - pa[k];
                if delta.abs() <= cfg.tie_tolerance_m {
                    continue;
                }
                let (before, after) = if delta > 0.0 { (id_a, id_b) } else { (id_b, id_a) };
                out.push(OrderingConstraint {
                    axis,
                    before: before.to_string(),
                    after: after.to_string(),
                    world_delta: delta.abs(),
                });
            }
        }
    }
    out
}

/// Axis of largest absolute offset; ties prefer X, then Y.
pub fn dominant_axis(delta: &Vec3) -> Axis {
    let mut best = Axis::X;
    for axis in [Axis::Y, Axis::Z] {
        if delta[axis.index()].abs() > delta[best.index()].abs() {
            best = axis;
        }
    }
    best
}

/// Separation axis for every unordered pair, keyed `(smaller id, larger id)`.
pub fn assign_separation_axes(positions: &BTreeMap<String, Vec3>, _cfg: &Config) -> BTreeMap<(String, String), Axis> {
    let entries: Vec<_> = positions.iter().collect();
    let mut out = BTreeMap::new();
    for (i, (id_a, pa)) in entries.iter().enumerate() {
        for (id_b, pb) in &entries[i + 1..] {
            out.insert((id_a.to_string(), id_b.to_string()), dominant_axis(&(*pb - *pa)));
        }
    }
    out
}

pub fn solve_layout(
    positions: &BTreeMap<String, Vec3>,
    anchor: Vec3,
    cfg: &Config,
) -> Result<ProxyLayout, LayoutError> {
    if positions.is_empty() {
        return Err(LayoutError::EmptyInput);
    }
    let ids: Vec<&String> = positions.keys().collect();
    let world: Vec<Vec3> = positions.values().copied().collect();
    let n = world.len();

    let centroid = world.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n as f64;
    let centered: Vec<Vec3> = world.iter().map(|p| p - centroid).collect();
    let extent = Axis::ALL
        .iter()
        .map(|a| {
            let k = a.index();
            let (lo, hi) = centered.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[k]), hi.max(p[k]))
            });
            hi - lo
        })
        .fold(0.0, f64::max);
    let scale = (cfg.workspace_extent_m / extent.max(MIN_EXTENT)).min(MAX_SCALE);

    let axes = assign_separation_axes(positions, cfg);
    // separation lookup by index pair
    let mut sep = vec![vec![Axis::X; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let axis = axes[&(ids[i].clone(), ids[j].clone())];
            sep[i][j] = axis;
            sep[j][i] = axis;
        }
    }

    let pitch = cfg.proxy_pitch();
    let mut coords = vec![Vec3::zeros(); n];
    for axis in Axis::ALL {
        let k = axis.index();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| world[a][k].total_cmp(&world[b][k]).then_with(|| ids[a].cmp(ids[b])));
        for (rank, &i) in order.iter().enumerate() {
            let mut c = scale * centered[i][k];
            for &p in &order[..rank] {
                if sep[p][i] == axis {
                    c = c.max(coords[p][k] + pitch);
                }
            }
            coords[i][k] = c;
        }
    }

    let half_extent = cfg.proxy_size_m / 2.0;
    let boxes = ids
        .iter()
        .zip(coords)
        .map(|(id, center)| ProxyBox {
            id: id.to_string(),
            center,
            half_extent,
        })
        .collect();
    let separation = axes
        .into_iter()
        .map(|((a, b), axis)| Separation { a, b, axis })
        .collect();
    Ok(ProxyLayout {
        anchor,
        scale_used: scale,
        boxes,
        separation,
    })
}
