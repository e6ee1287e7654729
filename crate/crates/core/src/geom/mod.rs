//! Planar geometry: points, rectangles, convex clipping and the Voronoi complex.

mod cells;
mod complex;
pub mod dump;
mod region;
mod sample;

pub use cells::{cells_meeting, CellsMeeting, RegionGraph};
pub use complex::{build_complex, VoronoiComplex};
pub use region::{Boundary, BoundaryKind, RegionSpec};
pub use sample::{sample_poisson, window_margin, PointSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance below which clipped areas and overlap lengths count as zero.
pub(crate) const GEOM_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(self, o: Point) -> f64 {
        let (dx, dy) = (self.x - o.x, self.y - o.y);
        dx * dx + dy * dy
    }

    pub fn dist(self, o: Point) -> f64 {
        self.dist2(o).sqrt()
    }

    fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl From<Point> for robust::Coord<f64> {
    fn from(p: Point) -> Self {
        robust::Coord { x: p.x, y: p.y }
    }
}

/// Exact orientation test: positive iff `a, b, c` turn counter-clockwise.
pub fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(a.into(), b.into(), c.into())
}

/// Exact in-circle test: positive iff `d` lies strictly inside the circle
/// through the counter-clockwise triangle `a, b, c`.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    robust::incircle(a.into(), b.into(), c.into(), d.into())
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Rect {
    pub const fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self { xmin, ymin, xmax, ymax }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn is_empty(&self) -> bool {
        !(self.xmax > self.xmin && self.ymax > self.ymin)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.xmin >= self.xmin && o.xmax <= self.xmax && o.ymin >= self.ymin && o.ymax <= self.ymax
    }

    /// `o` lies in the open interior of `self`.
    pub fn strictly_contains_rect(&self, o: &Rect) -> bool {
        o.xmin > self.xmin && o.xmax < self.xmax && o.ymin > self.ymin && o.ymax < self.ymax
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.xmin <= o.xmax && o.xmin <= self.xmax && self.ymin <= o.ymax && o.ymin <= self.ymax
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(
            self.xmin.min(o.xmin),
            self.ymin.min(o.ymin),
            self.xmax.max(o.xmax),
            self.ymax.max(o.ymax),
        )
    }

    pub fn shrink(&self, m: f64) -> Rect {
        Rect::new(self.xmin + m, self.ymin + m, self.xmax - m, self.ymax - m)
    }

    pub fn grow(&self, m: f64) -> Rect {
        self.shrink(-m)
    }

    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            r.xmin = r.xmin.min(p.x);
            r.ymin = r.ymin.min(p.y);
            r.xmax = r.xmax.max(p.x);
            r.ymax = r.ymax.max(p.y);
        }
        r
    }

    pub(crate) fn as_array(&self) -> [f64; 4] {
        [self.xmin, self.ymin, self.xmax, self.ymax]
    }

    /// Corners in counter-clockwise order, starting bottom-left.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
            Point::new(self.xmin, self.ymax),
        ]
    }
}

/// Sampling window; a non-degenerate rectangle with finite coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Rect", into = "Rect")]
pub struct Window(Rect);

impl Window {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let r = Rect::new(xmin, ymin, xmax, ymax);
        if !r.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::param("window", "coordinates must be finite"));
        }
        if r.is_empty() {
            return Err(Error::param("window", "xmin < xmax and ymin < ymax required"));
        }
        Ok(Self(r))
    }

    pub fn rect(&self) -> &Rect {
        &self.0
    }

    pub fn area(&self) -> f64 {
        self.0.area()
    }
}

impl TryFrom<Rect> for Window {
    type Error = Error;
    fn try_from(r: Rect) -> Result<Self> {
        Window::new(r.xmin, r.ymin, r.xmax, r.ymax)
    }
}

impl From<Window> for Rect {
    fn from(w: Window) -> Rect {
        w.0
    }
}

/// Signed area (positive for counter-clockwise polygons).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        s += a.x * b.y - a.y * b.x;
    }
    0.5 * s
}

/// Clip a convex polygon to the half-plane `a*x + b*y <= c`.
pub fn clip_halfplane(poly: &[Point], a: f64, b: f64, c: f64, out: &mut Vec<Point>) {
    out.clear();
    let n = poly.len();
    if n == 0 {
        return;
    }
    let side = |p: Point| a * p.x + b * p.y - c;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            out.push(p.lerp(q, sp / (sp - sq)));
        }
    }
}

/// Clip a convex polygon to a rectangle.
pub fn clip_to_rect(poly: &[Point], r: &Rect) -> Vec<Point> {
    let mut a = poly.to_vec();
    let mut b = Vec::with_capacity(poly.len() + 4);
    for (nx, ny, c) in [(-1.0, 0.0, -r.xmin), (1.0, 0.0, r.xmax), (0.0, -1.0, -r.ymin), (0.0, 1.0, r.ymax)] {
        clip_halfplane(&a, nx, ny, c, &mut b);
        std::mem::swap(&mut a, &mut b);
        if a.is_empty() {
            break;
        }
    }
    a
}

/// Area of a convex polygon intersected with a rectangle.
pub fn clipped_area(poly: &[Point], r: &Rect) -> f64 {
    polygon_area(&clip_to_rect(poly, r))
}

/// Parameter interval `[t0, t1]` of the segment `p + t(q - p)`, `t in [0, 1]`,
/// inside the closed rectangle (Liang-Barsky).
pub fn segment_rect_interval(p: Point, q: Point, r: &Rect) -> Option<(f64, f64)> {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (den, num) in [(-dx, p.x - r.xmin), (dx, r.xmax - p.x), (-dy, p.y - r.ymin), (dy, r.ymax - p.y)] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Length of a segment inside a closed rectangle.
pub fn segment_rect_overlap(p: Point, q: Point, r: &Rect) -> f64 {
    segment_rect_interval(p, q, r).map_or(0.0, |(a, b)| (b - a) * p.dist(q))
}

/// Parameter interval of a segment inside a closed counter-clockwise convex
/// polygon (Cyrus-Beck).
pub fn segment_convex_interval(p: Point, q: Point, poly: &[Point]) -> Option<(f64, f64)> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let d = Point::new(q.x - p.x, q.y - p.y);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        // Inside is left of a->b: cross(b - a, x - a) >= 0.
        let ex = b.x - a.x;
        let ey = b.y - a.y;
        let num = ex * (p.y - a.y) - ey * (p.x - a.x);
        let den = ex * d.y - ey * d.x;
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Point-in-closed-convex-polygon test with a relative tolerance.
pub fn convex_contains(poly: &[Point], x: Point) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let scale = Rect::bounding(poly.iter().copied()).diameter().max(1.0);
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        (b.x - a.x) * (x.y - a.y) - (b.y - a.y) * (x.x - a.x) >= -1e-9 * scale * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point> {
        Rect::new(x0, y0, x0 + s, y0 + s).corners().to_vec()
    }

    #[test]
    fn area_and_clip() {
        let sq = square(0.0, 0.0, 2.0);
        assert_eq!(polygon_area(&sq), 4.0);
        assert!((clipped_area(&sq, &Rect::new(1.0, 1.0, 5.0, 5.0)) - 1.0).abs() < 1e-12);
        assert_eq!(clipped_area(&sq, &Rect::new(3.0, 3.0, 5.0, 5.0)), 0.0);
        // Edge contact only.
        assert!(clipped_area(&sq, &Rect::new(2.0, 0.0, 3.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn halfplane_clip_of_triangle() {
        let tri = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.0, 2.0)];
        let mut out = Vec::new();
        clip_halfplane(&tri, 1.0, 0.0, 1.0, &mut out);
        assert!((polygon_area(&out) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn segment_overlaps() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        let l = segment_rect_overlap(Point::new(-1.0, 0.5), Point::new(3.0, 0.5), &r);
        assert!((l - 1.0).abs() < 1e-12);
        assert_eq!(segment_rect_overlap(Point::new(-1.0, 2.0), Point::new(3.0, 2.0), &r), 0.0);
        let sq = square(0.0, 0.0, 1.0);
        let (a, b) = segment_convex_interval(Point::new(-1.0, 0.5), Point::new(3.0, 0.5), &sq).unwrap();
        assert!((a - 0.25).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
        // Segment along an edge of the polygon is inside the closed set.
        let (a, b) = segment_convex_interval(Point::new(0.0, -1.0), Point::new(0.0, 2.0), &sq).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12 && (b - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn window_rejects_degenerate() {
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Window::new(0.0, 0.0, f64::NAN, 1.0).is_err());
        let w: Result<Window, _> = serde_json::from_str(r#"{"xmin":0,"ymin":0,"xmax":-1,"ymax":1}"#);
        assert!(w.is_err());
    }
}
