//! Pixel rays and mesh intersection: places detected objects in 3D by casting
//! from the head through each box center onto the scene mesh.
//!
//! The camera model is an undistorted pinhole. Camera axes are x right, y
//! down, z forward; the head pose maps camera axes into the world.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vec3};
use crate::scene::{CameraIntrinsics, Pose, SceneIndex, SceneSnapshot, TriangleMesh};

/// Hits closer than this are treated as self-intersections.
pub const MIN_HIT_T: f64 = 1e-6;
/// Depth assumed for the gaze point when its ray misses the mesh.
pub const FALLBACK_DEPTH_M: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitResult {
    pub point: Vec3,
    pub t: f64,
    pub triangle_index: usize,
}

pub fn pixel_ray(head: &Pose, cam: &CameraIntrinsics, px: Point2) -> Ray {
    let local = Vec3::new((px[0] - cam.cx) / cam.fx, (px[1] - cam.cy) / cam.fy, 1.0);
    Ray::new(head.position, head.rotation() * local.normalize())
}

/// Project a world point back to pixels; `None` behind the camera.
pub fn project(head: &Pose, cam: &CameraIntrinsics, point: &Vec3) -> Option<Point2> {
    let local = head.rotation().inverse() * (point - head.position);
    if local.z <= 0.0 {
        return None;
    }
    Some([cam.fx * local.x / local.z + cam.cx, cam.fy * local.y / local.z + cam.cy])
}

/// Möller–Trumbore test against one triangle; returns the ray parameter.
fn ray_triangle(ray: &Ray, [v0, v1, v2]: [Vec3; 3]) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = ray.direction.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-12 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - v0;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.direction.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t >= MIN_HIT_T).then_some(t)
}

/// Nearest hit along the ray; equal distances resolve to the lowest
/// triangle index.
pub fn intersect_mesh(ray: &Ray, mesh: &TriangleMesh) -> Option<HitResult> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..mesh.triangles.len() {
        if let Some(t) = ray_triangle(ray, mesh.corners(i)) {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
    }
    best.map(|(t, triangle_index)| HitResult {
        point: ray.at(t),
        t,
        triangle_index,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Placement {
    pub positions: BTreeMap<String, Vec3>,
    /// Ray length to the hit, for raycast placements only. Large values
    /// usually mean the center ray went past the object.
    pub hit_depth: BTreeMap<String, f64>,
    pub unplaced: Vec<String>,
}

/// 3D position for each requested node: the authored `world_pos` when
/// present, otherwise the mesh hit of the ray through its box center.
pub fn estimate_positions<'a>(
    snapshot: &SceneSnapshot,
    index: &SceneIndex,
    ids: impl IntoIterator<Item = &'a str>,
) -> Placement {
    let mut out = Placement::default();
    for id in ids {
        let Some(node) = index.get(id) else {
            out.unplaced.push(id.to_string());
            continue;
        };
        if let Some(p) = node.world_pos {
            out.positions.insert(id.to_string(), p);
            continue;
        }
        let ray = pixel_ray(&snapshot.head, &snapshot.camera, node.root_bbox.center());
        match intersect_mesh(&ray, &snapshot.mesh) {
            Some(hit) => {
                out.positions.insert(id.to_string(), hit.point);
                out.hit_depth.insert(id.to_string(), hit.t);
            }
            None => out.unplaced.push(id.to_string()),
        }
    }
    out
}

/// Convert a metric radius around the gaze point to pixels, using the depth
/// of the gaze ray's mesh hit (or [`FALLBACK_DEPTH_M`] on a miss).
pub fn metric_radius_px(snapshot: &SceneSnapshot, gaze_px: Point2, meters: f64) -> f64 {
    let ray = pixel_ray(&snapshot.head, &snapshot.camera, gaze_px);
    let depth = intersect_mesh(&ray, &snapshot.mesh)
        .map(|hit| (snapshot.head.rotation().inverse() * (hit.point - snapshot.head.position)).z)
        .filter(|z| *z > 0.0)
        .unwrap_or(FALLBACK_DEPTH_M);
    meters * snapshot.camera.fx / depth
}
