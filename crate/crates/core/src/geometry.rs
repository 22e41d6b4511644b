//! Shared planar/spatial helpers.
//!
//! World frame: x east, y north, z up (metres). Headings (listener yaw and
//! world bearings) are measured counter-clockwise from +y, so a heading of
//! `-π/2` points east.

use nalgebra::{Point2, Point3, Vector2};
use std::f64::consts::PI;

pub type P2 = Point2<f64>;
pub type P3 = Point3<f64>;
pub type V2 = Vector2<f64>;

/// Speed of sound used throughout (m/s).
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Unit vector pointing along `heading`.
pub fn heading_vector(heading: f64) -> V2 {
    V2::new(-heading.sin(), heading.cos())
}

/// Heading of a planar vector. Zero vectors map to 0.
pub fn heading_of(v: &V2) -> f64 {
    if v.norm_squared() == 0.0 {
        return 0.0;
    }
    (-v.x).atan2(v.y)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Absolute angular difference in `[0, π]`.
pub fn angle_between(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

pub fn horizontal(p: &P3) -> P2 {
    P2::new(p.x, p.y)
}

pub fn at_height(p: &P2, z: f64) -> P3 {
    P3::new(p.x, p.y, z)
}

/// Axis-aligned square/rectangle in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: P2,
    pub max: P2,
}

impl Rect {
    pub fn new(min: P2, max: P2) -> Self {
        Self { min, max }
    }

    /// Square of side `side` centred on `center`.
    pub fn square(center: P2, side: f64) -> Self {
        let h = side / 2.0;
        Self {
            min: P2::new(center.x - h, center.y - h),
            max: P2::new(center.x + h, center.y + h),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> P2 {
        nalgebra::center(&self.min, &self.max)
    }

    /// Closed containment.
    pub fn contains(&self, p: &P2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Open containment (boundary excluded).
    pub fn contains_strict(&self, p: &P2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    pub fn clamp(&self, p: &P2) -> P2 {
        P2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    /// Rectangle shrunk by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> Self {
        Self {
            min: P2::new(self.min.x + margin, self.min.y + margin),
            max: P2::new(self.max.x - margin, self.max.y - margin),
        }
    }

    /// Distance from an interior point to the nearest edge.
    pub fn distance_to_edge(&self, p: &P2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }

    /// Parameter `t ≥ 0` at which the ray `origin + t·dir` leaves the rectangle.
    /// `origin` must lie inside.
    pub fn exit_distance(&self, origin: &P2, dir: &V2) -> f64 {
        let mut t = f64::INFINITY;
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min.x, self.max.x),
            (origin.y, dir.y, self.min.y, self.max.y),
        ] {
            if d > 0.0 {
                t = t.min((hi - o) / d);
            } else if d < 0.0 {
                t = t.min((lo - o) / d);
            }
        }
        t.max(0.0)
    }
}
