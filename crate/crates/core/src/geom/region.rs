use serde::{Deserialize, Serialize};

use super::{Point, Rect};
use crate::error::{Error, Result};

/// Regions on which events are evaluated. All kinds are finite unions of
/// axis-aligned rectangles.
///
/// Annulus variants are square annuli `B_R \ B_r` around `center`, optionally
/// restricted to the upper half-plane, the first quadrant, or the complement
/// of the first quadrant. `orientation` rotates a variant by that many quarter
/// turns counter-clockwise about its center.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    Rectangle {
        #[serde(default)]
        center: Point,
        lambda1: f64,
        lambda2: f64,
    },
    Annulus {
        #[serde(default)]
        center: Point,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    HalfPlaneAnnulus {
        #[serde(default)]
        center: Point,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        #[serde(default)]
        orientation: u8,
    },
    QuarterPlaneAnnulus {
        #[serde(default)]
        center: Point,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        #[serde(default)]
        orientation: u8,
    },
    ComplementOfQuarterPlaneAnnulus {
        #[serde(default)]
        center: Point,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        #[serde(default)]
        orientation: u8,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Left,
    Right,
    Bottom,
    Top,
    Inner,
    Outer,
    Side,
}

/// One boundary component, given as a polyline. The inner component of an
/// annulus kind is listed in traversal order; for `r = 0` it degenerates to
/// the single point `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    pub kind: BoundaryKind,
    pub polyline: Vec<Point>,
    pub closed: bool,
}

impl Boundary {
    /// Consecutive segments, including the closing one for loops.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.polyline.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.polyline[i], self.polyline[(i + 1) % n]))
    }
}

impl RegionSpec {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const BOTTOM: usize = 2;
    pub const TOP: usize = 3;
    pub const INNER: usize = 0;
    pub const OUTER: usize = 1;

    pub fn rectangle(center: Point, lambda1: f64, lambda2: f64) -> Self {
        RegionSpec::Rectangle { center, lambda1, lambda2 }
    }

    /// The square `[-h, h]^2` around `center`.
    pub fn square(center: Point, h: f64) -> Self {
        Self::rectangle(center, h, h)
    }

    pub fn annulus(center: Point, r: f64, big_r: f64) -> Self {
        RegionSpec::Annulus { center, r, big_r }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let c = self.center();
        if !(finite(c.x) && finite(c.y)) {
            return Err(Error::param("center", "must be finite"));
        }
        match *self {
            RegionSpec::Rectangle { lambda1, lambda2, .. } => {
                if !(finite(lambda1) && lambda1 > 0.0) {
                    return Err(Error::param("lambda1", "must be finite and positive"));
                }
                if !(finite(lambda2) && lambda2 > 0.0) {
                    return Err(Error::param("lambda2", "must be finite and positive"));
                }
            }
            _ => {
                let (r, big_r) = self.radii().expect("annulus kind");
                if !(finite(r) && finite(big_r) && 0.0 <= r && r <= big_r) {
                    return Err(Error::param("r", format!("need 0 <= r <= R, got r={r}, R={big_r}")));
                }
                if self.orientation() > 3 {
                    return Err(Error::param("orientation", "quarter turns must be in 0..=3"));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Point {
        match *self {
            RegionSpec::Rectangle { center, .. }
            | RegionSpec::Annulus { center, .. }
            | RegionSpec::HalfPlaneAnnulus { center, .. }
            | RegionSpec::QuarterPlaneAnnulus { center, .. }
            | RegionSpec::ComplementOfQuarterPlaneAnnulus { center, .. } => center,
        }
    }

    /// `(r, R)` for annulus kinds.
    pub fn radii(&self) -> Option<(f64, f64)> {
        match *self {
            RegionSpec::Rectangle { .. } => None,
            RegionSpec::Annulus { r, big_r, .. }
            | RegionSpec::HalfPlaneAnnulus { r, big_r, .. }
            | RegionSpec::QuarterPlaneAnnulus { r, big_r, .. }
            | RegionSpec::ComplementOfQuarterPlaneAnnulus { r, big_r, .. } => Some((r, big_r)),
        }
    }

    fn orientation(&self) -> u8 {
        match *self {
            RegionSpec::HalfPlaneAnnulus { orientation, .. }
            | RegionSpec::QuarterPlaneAnnulus { orientation, .. }
            | RegionSpec::ComplementOfQuarterPlaneAnnulus { orientation, .. } => orientation,
            _ => 0,
        }
    }

    pub fn is_annulus_kind(&self) -> bool {
        !matches!(self, RegionSpec::Rectangle { .. })
    }

    /// Full annuli have a closed inner loop; the variants have an inner arc.
    pub fn is_cyclic(&self) -> bool {
        matches!(self, RegionSpec::Annulus { .. })
    }

    /// `r == R`: the region has no area.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.radii(), Some((r, big_r)) if r >= big_r)
    }

    fn place(&self, p: Point) -> Point {
        let (x, y) = match self.orientation() % 4 {
            0 => (p.x, p.y),
            1 => (-p.y, p.x),
            2 => (-p.x, -p.y),
            _ => (p.y, -p.x),
        };
        let c = self.center();
        Point::new(c.x + x, c.y + y)
    }

    fn place_rect(&self, r: Rect) -> Rect {
        Rect::bounding(r.corners().map(|p| self.place(p)))
    }

    /// Disjoint-interior rectangles whose union is the region. Empty when the
    /// region is degenerate.
    pub fn pieces(&self) -> Vec<Rect> {
        let canonical: Vec<Rect> = match *self {
            RegionSpec::Rectangle { lambda1: a, lambda2: b, .. } => vec![Rect::new(-a, -b, a, b)],
            RegionSpec::Annulus { r, big_r: s, .. } => vec![
                Rect::new(-s, r, s, s),
                Rect::new(-s, -s, s, -r),
                Rect::new(-s, -r, -r, r),
                Rect::new(r, -r, s, r),
            ],
            RegionSpec::HalfPlaneAnnulus { r, big_r: s, .. } => vec![
                Rect::new(-s, r, s, s),
                Rect::new(-s, 0.0, -r, r),
                Rect::new(r, 0.0, s, r),
            ],
            RegionSpec::QuarterPlaneAnnulus { r, big_r: s, .. } => {
                vec![Rect::new(0.0, r, s, s), Rect::new(r, 0.0, s, r)]
            }
            RegionSpec::ComplementOfQuarterPlaneAnnulus { r, big_r: s, .. } => vec![
                Rect::new(-s, r, 0.0, s),
                Rect::new(-s, -s, s, -r),
                Rect::new(-s, -r, -r, r),
                Rect::new(r, -r, s, 0.0),
            ],
        };
        canonical
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| self.place_rect(r))
            .collect()
    }

    pub fn bbox(&self) -> Rect {
        let canonical = match *self {
            RegionSpec::Rectangle { lambda1: a, lambda2: b, .. } => Rect::new(-a, -b, a, b),
            RegionSpec::Annulus { big_r: s, .. } => Rect::new(-s, -s, s, s),
            RegionSpec::HalfPlaneAnnulus { big_r: s, .. } => Rect::new(-s, 0.0, s, s),
            RegionSpec::QuarterPlaneAnnulus { big_r: s, .. } => Rect::new(0.0, 0.0, s, s),
            RegionSpec::ComplementOfQuarterPlaneAnnulus { big_r: s, .. } => Rect::new(-s, -s, s, s),
        };
        self.place_rect(canonical)
    }

    pub fn diameter(&self) -> f64 {
        self.bbox().diameter()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.pieces().iter().any(|r| r.contains(p))
    }

    /// Boundary components. Rectangles: left, right, bottom, top (indices
    /// [`Self::LEFT`]..[`Self::TOP`]). Annulus kinds: inner, outer, then the
    /// two straight sides for the half- and quarter-plane variants.
    pub fn boundaries(&self) -> Vec<Boundary> {
        let p = |x: f64, y: f64| Point::new(x, y);
        let open = |kind, pts: Vec<Point>| Boundary {
            kind,
            polyline: pts,
            closed: false,
        };
        let mut out = match *self {
            RegionSpec::Rectangle { lambda1: a, lambda2: b, .. } => vec![
                open(BoundaryKind::Left, vec![p(-a, -b), p(-a, b)]),
                open(BoundaryKind::Right, vec![p(a, -b), p(a, b)]),
                open(BoundaryKind::Bottom, vec![p(-a, -b), p(a, -b)]),
                open(BoundaryKind::Top, vec![p(-a, b), p(a, b)]),
            ],
            RegionSpec::Annulus { r, big_r: s, .. } => {
                let ring = |h: f64| vec![p(h, -h), p(h, h), p(-h, h), p(-h, -h)];
                vec![
                    Boundary {
                        kind: BoundaryKind::Inner,
                        polyline: if r > 0.0 { ring(r) } else { vec![p(0.0, 0.0)] },
                        closed: r > 0.0,
                    },
                    Boundary {
                        kind: BoundaryKind::Outer,
                        polyline: ring(s),
                        closed: true,
                    },
                ]
            }
            RegionSpec::HalfPlaneAnnulus { r, big_r: s, .. } => vec![
                open(BoundaryKind::Inner, arc(&[p(r, 0.0), p(r, r), p(-r, r), p(-r, 0.0)], r)),
                open(BoundaryKind::Outer, vec![p(s, 0.0), p(s, s), p(-s, s), p(-s, 0.0)]),
                open(BoundaryKind::Side, vec![p(r, 0.0), p(s, 0.0)]),
                open(BoundaryKind::Side, vec![p(-s, 0.0), p(-r, 0.0)]),
            ],
            RegionSpec::QuarterPlaneAnnulus { r, big_r: s, .. } => vec![
                open(BoundaryKind::Inner, arc(&[p(r, 0.0), p(r, r), p(0.0, r)], r)),
                open(BoundaryKind::Outer, vec![p(s, 0.0), p(s, s), p(0.0, s)]),
                open(BoundaryKind::Side, vec![p(r, 0.0), p(s, 0.0)]),
                open(BoundaryKind::Side, vec![p(0.0, s), p(0.0, r)]),
            ],
            RegionSpec::ComplementOfQuarterPlaneAnnulus { r, big_r: s, .. } => vec![
                open(
                    BoundaryKind::Inner,
                    arc(&[p(0.0, r), p(-r, r), p(-r, -r), p(r, -r), p(r, 0.0)], r),
                ),
                open(BoundaryKind::Outer, vec![p(0.0, s), p(-s, s), p(-s, -s), p(s, -s), p(s, 0.0)]),
                open(BoundaryKind::Side, vec![p(0.0, r), p(0.0, s)]),
                open(BoundaryKind::Side, vec![p(r, 0.0), p(s, 0.0)]),
            ],
        };
        for b in &mut out {
            for q in &mut b.polyline {
                *q = self.place(*q);
            }
        }
        out
    }
}

fn arc(pts: &[Point], r: f64) -> Vec<Point> {
    if r > 0.0 {
        pts.to_vec()
    } else {
        vec![Point::new(0.0, 0.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polygon_area;

    fn area(reg: &RegionSpec) -> f64 {
        reg.pieces().iter().map(|r| r.area()).sum()
    }

    fn all_kinds(r: f64, s: f64, o: u8) -> Vec<RegionSpec> {
        let center = Point::new(1.5, -2.0);
        vec![
            RegionSpec::annulus(center, r, s),
            RegionSpec::HalfPlaneAnnulus { center, r, big_r: s, orientation: o },
            RegionSpec::QuarterPlaneAnnulus { center, r, big_r: s, orientation: o },
            RegionSpec::ComplementOfQuarterPlaneAnnulus { center, r, big_r: s, orientation: o },
        ]
    }

    #[test]
    fn annulus_areas() {
        for o in 0..4 {
            let [full, half, quarter, comp]: [RegionSpec; 4] = all_kinds(2.0, 5.0, o).try_into().unwrap();
            let ring = 100.0 - 16.0;
            assert!((area(&full) - ring).abs() < 1e-12);
            assert!((area(&half) - ring / 2.0).abs() < 1e-12);
            assert!((area(&quarter) - ring / 4.0).abs() < 1e-12);
            assert!((area(&comp) - 3.0 * ring / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pieces_have_disjoint_interiors() {
        for reg in all_kinds(1.0, 3.0, 1) {
            let p = reg.pieces();
            for a in 0..p.len() {
                for b in a + 1..p.len() {
                    let poly = p[a].corners();
                    assert!(crate::geom::clipped_area(&poly, &p[b]) < 1e-12);
                }
            }
            assert!(p.iter().all(|r| reg.bbox().contains_rect(r)));
        }
    }

    #[test]
    fn degenerate_and_zero_radius() {
        for reg in all_kinds(3.0, 3.0, 0) {
            assert!(reg.is_degenerate());
            assert!(reg.pieces().is_empty());
        }
        for reg in all_kinds(0.0, 3.0, 2) {
            let inner = &reg.boundaries()[RegionSpec::INNER];
            assert_eq!(inner.polyline, vec![reg.center()]);
            assert!(area(&reg) > 0.0);
        }
    }

    #[test]
    fn validation() {
        assert!(RegionSpec::rectangle(Point::default(), 0.0, 1.0).validate().is_err());
        assert!(RegionSpec::annulus(Point::default(), 3.0, 2.0).validate().is_err());
        assert!(RegionSpec::annulus(Point::default(), -1.0, 2.0).validate().is_err());
        assert!(RegionSpec::annulus(Point::default(), 2.0, 2.0).validate().is_ok());
        let bad = RegionSpec::QuarterPlaneAnnulus { center: Point::default(), r: 1.0, big_r: 2.0, orientation: 4 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn boundary_endpoints_lie_on_region() {
        for reg in all_kinds(1.0, 4.0, 3) {
            for b in reg.boundaries() {
                for q in &b.polyline {
                    assert!(reg.contains(*q), "{:?} {:?}", b.kind, q);
                }
            }
        }
    }

    #[test]
    fn inner_loop_is_counter_clockwise() {
        let reg = RegionSpec::annulus(Point::default(), 1.0, 2.0);
        assert!(polygon_area(&reg.boundaries()[0].polyline) > 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let json = r#"{"kind":"quarter-plane-annulus","r":4,"R":16,"orientation":1}"#;
        let reg: RegionSpec = serde_json::from_str(json).unwrap();
        assert_eq!(reg.radii(), Some((4.0, 16.0)));
        let back: RegionSpec = serde_json::from_str(&serde_json::to_string(&reg).unwrap()).unwrap();
        assert_eq!(reg, back);
        assert!(serde_json::from_str::<RegionSpec>(r#"{"kind":"disc","r":1}"#).is_err());
    }
}
