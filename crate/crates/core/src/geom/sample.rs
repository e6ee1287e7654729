use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Point, Rect, Window};
use crate::error::{Error, Result};
use crate::stream::SeedPath;

/// A realisation of the Poisson environment in a finite window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub window: Window,
    pub intensity: f64,
    pub stream: Option<SeedPath>,
}

impl PointSet {
    /// Wrap explicit points (hand-built environments, tests). Rejects points
    /// outside the window and exact duplicates.
    pub fn from_points(points: Vec<Point>, window: Window) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.rect().contains(**p)) {
            return Err(Error::param("points", format!("({}, {}) lies outside the window", p.x, p.y)));
        }
        if has_duplicates(&points) {
            return Err(Error::DegenerateGeometry("coincident points".into()));
        }
        let intensity = points.len() as f64 / window.area();
        Ok(Self {
            points,
            window,
            intensity,
            stream: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Padding between a region of diameter `diam` and the sampling window.
pub fn window_margin(diam: f64) -> f64 {
    let l = diam.max(1.0).ln().max(0.0);
    (4.0 * l.sqrt()).max(10.0)
}

pub fn sample_poisson(window: Window, intensity: f64, stream: &SeedPath) -> Result<PointSet> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::param("intensity", "must be finite and positive"));
    }
    let r = *window.rect();
    let mean = intensity * r.area();
    let mut rng = stream.rng();
    let n = Poisson::new(mean)
        .map_err(|e| Error::param("intensity", e.to_string()))?
        .sample(&mut rng) as usize;
    let mut points: Vec<Point> = (0..n).map(|_| uniform_in(&r, &mut rng)).collect();
    resample_duplicates(&mut points, &r, &mut rng);
    Ok(PointSet {
        points,
        window,
        intensity,
        stream: Some(*stream),
    })
}

fn uniform_in<R: Rng>(r: &Rect, rng: &mut R) -> Point {
    Point::new(
        r.xmin + rng.random::<f64>() * r.width(),
        r.ymin + rng.random::<f64>() * r.height(),
    )
}

fn sorted_order(points: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(a.cmp(&b))
    });
    order
}

fn has_duplicates(points: &[Point]) -> bool {
    sorted_order(points).windows(2).any(|w| points[w[0]] == points[w[1]])
}

/// Redraw every point that coincides with a lower-indexed one until all are
/// distinct. Only the later copy moves, so the outcome depends on the stream
/// alone.
fn resample_duplicates<R: Rng>(points: &mut [Point], r: &Rect, rng: &mut R) {
    loop {
        let order = sorted_order(points);
        let mut dups: Vec<usize> = order
            .windows(2)
            .filter(|w| points[w[0]] == points[w[1]])
            .map(|w| w[0].max(w[1]))
            .collect();
        if dups.is_empty() {
            return;
        }
        dups.sort_unstable();
        dups.dedup();
        for i in dups {
            points[i] = uniform_in(r, rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_floor_and_growth() {
        assert_eq!(window_margin(0.0), 10.0);
        assert_eq!(window_margin(100.0), 10.0);
        let big = 1e200;
        assert!((window_margin(big) - 4.0 * big.ln().sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_intensity() {
        let w = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        for lam in [0.0, -1.0, f64::NAN] {
            assert!(matches!(sample_poisson(w, lam, &SeedPath::root(0)), Err(Error::Parameter { .. })));
        }
    }

    #[test]
    fn deterministic_and_inside() {
        let w = Window::new(-5.0, -5.0, 5.0, 5.0).unwrap();
        let a = sample_poisson(w, 2.0, &SeedPath::root(11)).unwrap();
        let b = sample_poisson(w, 2.0, &SeedPath::root(11)).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| w.rect().contains(*p)));
        assert!(!has_duplicates(&a.points));
    }

    #[test]
    fn duplicates_are_redrawn() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        let mut pts = vec![Point::new(0.5, 0.5); 5];
        pts.push(Point::new(0.1, 0.1));
        let mut rng = SeedPath::root(3).rng();
        resample_duplicates(&mut pts, &r, &mut rng);
        assert!(!has_duplicates(&pts));
        assert_eq!(pts[0], Point::new(0.5, 0.5));
        assert_eq!(pts[5], Point::new(0.1, 0.1));
    }

    #[test]
    fn from_points_validates() {
        let w = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(PointSet::from_points(vec![Point::new(2.0, 0.0)], w).is_err());
        assert!(PointSet::from_points(vec![Point::new(0.2, 0.2), Point::new(0.2, 0.2)], w).is_err());
    }
}
