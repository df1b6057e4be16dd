//! Planar primitives shared by the map, sensor and planner code.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// A point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Linear interpolation, `t = 0` gives `self`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;

    fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }
}

impl Sub for Point {
    type Output = Point;

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Closest distance from `p` to any point of the segment.
    pub fn distance_to_point(&self, p: Point) -> f64 {
        let ab = self.b - self.a;
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return self.a.distance(p);
        }
        let t = ((p - self.a).dot(ab) / len2).clamp(0.0, 1.0);
        self.a.lerp(self.b, t).distance(p)
    }
}

/// A disc obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub const fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Signed distance from `p` to the circle boundary (negative inside).
    pub fn clearance(&self, p: Point) -> f64 {
        self.center.distance(p) - self.radius
    }
}

/// Distance along the ray `origin + t * dir` (unit `dir`, `t >= 0`) to `seg`.
pub fn ray_segment(origin: Point, dir: Point, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-12 {
        return None;
    }
    let w = seg.a - origin;
    let t = w.cross(e) / denom;
    let u = w.cross(dir) / denom;
    if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Distance along the ray (unit `dir`) to the first boundary crossing of `circle`.
///
/// Origins inside the circle report zero.
pub fn ray_circle(origin: Point, dir: Point, circle: &Circle) -> Option<f64> {
    let oc = origin - circle.center;
    let c = oc.dot(oc) - circle.radius * circle.radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = oc.dot(dir);
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}

/// Total length of a polyline.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_perpendicular_wall() {
        let wall = Segment::new(Point::new(0.0, 2.0), Point::new(15.0, 2.0));
        let t = ray_segment(Point::new(5.0, 0.0), Point::new(0.0, 1.0), &wall).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ray_misses_parallel_and_behind() {
        let wall = Segment::new(Point::new(0.0, 2.0), Point::new(15.0, 2.0));
        assert!(ray_segment(Point::new(5.0, 0.0), Point::new(1.0, 0.0), &wall).is_none());
        assert!(ray_segment(Point::new(5.0, 0.0), Point::new(0.0, -1.0), &wall).is_none());
    }

    #[test]
    fn ray_circle_front_surface() {
        let c = Circle::new(Point::new(1.0, 0.0), 0.3);
        let t = ray_circle(Point::new(0.0, 0.0), Point::new(1.0, 0.0), &c).unwrap();
        assert!((t - 0.7).abs() < 1e-12);
        assert!(ray_circle(Point::new(0.0, 0.0), Point::new(-1.0, 0.0), &c).is_none());
    }

    #[test]
    fn segment_point_distance() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(4.0, 0.0));
        assert_eq!(s.distance_to_point(Point::new(2.0, 3.0)), 3.0);
        assert_eq!(s.distance_to_point(Point::new(7.0, 4.0)), 5.0);
    }
}
