//! Small geometry vocabulary shared by every stage: pixel boxes, 3D vectors
//! and the three layout axes.

use serde::{Deserialize, Serialize};

/// 3D vector in meters. Serialized as `[x, y, z]`.
pub type Vec3 = nalgebra::Vector3<f64>;

/// 2D point in pixels or surface meters. Serialized as `[x, y]`.
pub type Point2 = [f64; 2];

/// Axis-aligned pixel rectangle with a top-left origin.
///
/// Serialized as `[x, y, w, h]`. Construction is unchecked; use
/// [`BBox2D::is_valid`] (or snapshot validation) to enforce the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox2D {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BBox2D {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox2D> for [f64; 4] {
    fn from(b: BBox2D) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BBox2D {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Positive size, finite, non-negative origin.
    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite())
            && self.w > 0.0
            && self.h > 0.0
            && self.x >= 0.0
            && self.y >= 0.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> Point2 {
        [self.x + self.w / 2.0, self.y + self.h / 2.0]
    }

    pub fn min_side(&self) -> f64 {
        self.w.min(self.h)
    }

    /// Shift into the frame of a parent whose origin sits at `origin`.
    pub fn offset(&self, origin: Point2) -> Self {
        Self::new(self.x + origin[0], self.y + origin[1], self.w, self.h)
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        p[0] >= self.x && p[0] <= self.right() && p[1] >= self.y && p[1] <= self.bottom()
    }

    pub fn intersection_area(&self, other: &Self) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.intersection_area(other) > 0.0
    }
}

/// Intersection over union of two valid boxes, in `[0, 1]`.
pub fn iou(a: &BBox2D, b: &BBox2D) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// True iff `child` lies within `parent` grown by `slack_px` on every side.
pub fn contains(parent: &BBox2D, child: &BBox2D, slack_px: f64) -> bool {
    child.x >= parent.x - slack_px
        && child.y >= parent.y - slack_px
        && child.right() <= parent.right() + slack_px
        && child.bottom() <= parent.bottom() + slack_px
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Axis-aligned 3D box, used for proxy hit tests and brush regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn spanning(a: &Vec3, b: &Vec3) -> Self {
        Self {
            min: a.inf(b),
            max: a.sup(b),
        }
    }

    pub fn cube(center: &Vec3, half_extent: f64) -> Self {
        let h = Vec3::repeat(half_extent);
        Self {
            min: center - h,
            max: center + h,
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Closed-interval overlap, so touching faces count and a degenerate
    /// (point) box intersects any box that contains it.
    pub fn intersects(&self, other: &Self) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) / 2.0
    }

    pub fn half_extents(&self) -> Vec3 {
        (self.max - self.min) / 2.0
    }
}
