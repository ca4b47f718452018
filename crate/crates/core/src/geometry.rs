//! Planar points, segments and the line-of-sight test.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction of `other` seen from `self`, in (−π, π].
    pub fn bearing_to(&self, other: &Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }
}

/// Sign of the turn p → q → r: positive counter-clockwise, zero collinear.
fn orientation(p: &Point, q: &Point, r: &Point) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

/// Whether `q`, known collinear with `p`–`r`, lies within their bounding box.
fn on_segment(p: &Point, q: &Point, r: &Point) -> bool {
    q.x >= p.x.min(r.x) && q.x <= p.x.max(r.x) && q.y >= p.y.min(r.y) && q.y <= p.y.max(r.y)
}

/// Closed-segment intersection; touching endpoints and collinear overlaps
/// count.
pub fn segments_intersect(s: &Segment, t: &Segment) -> bool {
    let o1 = orientation(&s.a, &s.b, &t.a);
    let o2 = orientation(&s.a, &s.b, &t.b);
    let o3 = orientation(&t.a, &t.b, &s.a);
    let o4 = orientation(&t.a, &t.b, &s.b);
    let opposite = |u: f64, v: f64| (u > 0.0 && v < 0.0) || (u < 0.0 && v > 0.0);
    if opposite(o1, o2) && opposite(o3, o4) {
        return true;
    }
    (o1 == 0.0 && on_segment(&s.a, &t.a, &s.b))
        || (o2 == 0.0 && on_segment(&s.a, &t.b, &s.b))
        || (o3 == 0.0 && on_segment(&t.a, &s.a, &t.b))
        || (o4 == 0.0 && on_segment(&t.a, &s.b, &t.b))
}

/// True when the segment from `a` to `b` meets none of the obstacles.
pub fn los_test(a: Point, b: Point, obstacles: &[Segment]) -> bool {
    let path = Segment::new(a, b);
    !obstacles.iter().any(|o| segments_intersect(&path, o))
}
