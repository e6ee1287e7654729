use crate::error::{Error, Result};
use crate::geom::{build_complex, clip_halfplane, orient2d, Point, PointSet, RegionSpec, Window};

/// Largest distance from a point of `region` to the nearest nucleus lying in
/// `region`. `None` when the region holds no nucleus.
///
/// Each nucleus's Voronoi cell (relative to the nuclei in the region) is
/// clipped to every rectangle of the region; distance to the nucleus is
/// convex on each clipped piece, so the maximum sits at a vertex.
pub fn largest_empty_radius(points: &PointSet, region: &RegionSpec) -> Result<Option<f64>> {
    empty_radius(points, region, false)
}

fn empty_radius(points: &PointSet, region: &RegionSpec, all_pairs: bool) -> Result<Option<f64>> {
    region.validate()?;
    let pieces = region.pieces();
    let inside: Vec<Point> = points
        .points
        .iter()
        .copied()
        .filter(|p| pieces.iter().any(|r| r.contains(*p)))
        .collect();
    if inside.is_empty() {
        return Ok(None);
    }
    let neighbor_lists = neighbor_lists(&inside, region, all_pairs)?;
    let mut best: f64 = 0.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, &p) in inside.iter().enumerate() {
        for piece in &pieces {
            a.clear();
            a.extend_from_slice(&piece.corners());
            for &j in &neighbor_lists[i] {
                let q = inside[j];
                let (dx, dy) = (q.x - p.x, q.y - p.y);
                clip_halfplane(&a, dx, dy, dx * 0.5 * (p.x + q.x) + dy * 0.5 * (p.y + q.y), &mut b);
                std::mem::swap(&mut a, &mut b);
                if a.is_empty() {
                    break;
                }
            }
            for v in &a {
                best = best.max(v.dist(p));
            }
        }
    }
    Ok(Some(best))
}

fn neighbor_lists(inside: &[Point], region: &RegionSpec, all_pairs: bool) -> Result<Vec<Vec<usize>>> {
    let n = inside.len();
    let general_position = n >= 3 && (2..n).any(|k| orient2d(inside[0], inside[1], inside[k]) != 0.0);
    if all_pairs || !general_position || n <= 32 {
        return Ok((0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect());
    }
    let bb = region.bbox().grow(1.0);
    let window = Window::new(bb.xmin, bb.ymin, bb.xmax, bb.ymax)?;
    let c = build_complex(&PointSet::from_points(inside.to_vec(), window)?)?;
    Ok((0..n).map(|i| c.neighbors(i).iter().map(|&j| j as usize).collect()).collect())
}

/// `Dense_delta(D)`: every point of `D` is within `delta * diam(D)` of a
/// nucleus inside `D`.
pub fn detect_dense(points: &PointSet, region: &RegionSpec, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    Ok(largest_empty_radius(points, region)?.is_some_and(|r| r < delta * region.diameter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sample_poisson;
    use crate::stream::SeedPath;

    fn grid_radius(points: &PointSet, region: &RegionSpec, steps: usize) -> f64 {
        let inside: Vec<Point> = points.points.iter().copied().filter(|p| region.contains(*p)).collect();
        let mut best: f64 = 0.0;
        for piece in region.pieces() {
            for a in 0..=steps {
                for b in 0..=steps {
                    let u = Point::new(
                        piece.xmin + piece.width() * a as f64 / steps as f64,
                        piece.ymin + piece.height() * b as f64 / steps as f64,
                    );
                    let d = inside.iter().map(|q| q.dist(u)).fold(f64::INFINITY, f64::min);
                    best = best.max(d);
                }
            }
        }
        best
    }

    #[test]
    fn empty_region_is_not_dense() {
        let w = Window::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let ps = PointSet::from_points(vec![Point::new(9.0, 9.0)], w).unwrap();
        let d = RegionSpec::square(Point::new(3.0, 3.0), 1.0);
        assert!(!detect_dense(&ps, &d, 0.9).unwrap());
    }

    #[test]
    fn single_central_nucleus() {
        let w = Window::new(-5.0, -5.0, 5.0, 5.0).unwrap();
        let ps = PointSet::from_points(vec![Point::new(0.0, 0.0)], w).unwrap();
        let d = RegionSpec::square(Point::default(), 1.0);
        let r = largest_empty_radius(&ps, &d).unwrap().unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        // diam = 2 sqrt 2, so delta just above 1/2 covers the half-diagonal.
        assert!(detect_dense(&ps, &d, 0.51).unwrap());
        assert!(!detect_dense(&ps, &d, 0.49).unwrap());
    }

    #[test]
    fn matches_fine_grid_on_random_sets() {
        let w = Window::new(-12.0, -12.0, 12.0, 12.0).unwrap();
        let regions = [
            RegionSpec::square(Point::default(), 6.0),
            RegionSpec::annulus(Point::new(0.5, 0.0), 2.0, 7.0),
            RegionSpec::ComplementOfQuarterPlaneAnnulus {
                center: Point::default(),
                r: 1.0,
                big_r: 8.0,
                orientation: 1,
            },
        ];
        for seed in 0..6 {
            let ps = sample_poisson(w, 0.4, &SeedPath::root(seed)).unwrap();
            for reg in &regions {
                let exact = largest_empty_radius(&ps, reg).unwrap().unwrap();
                let approx = grid_radius(&ps, reg, 120);
                let spacing = reg.bbox().width() / 120.0;
                assert!(approx <= exact + 1e-9, "{approx} > {exact}");
                assert!(exact - approx <= spacing, "{exact} vs {approx}");
            }
        }
    }

    #[test]
    fn delaunay_and_all_pairs_agree() {
        let w = Window::new(-30.0, -30.0, 30.0, 30.0).unwrap();
        let ps = sample_poisson(w, 1.0, &SeedPath::root(77)).unwrap();
        for reg in [RegionSpec::square(Point::default(), 6.0), RegionSpec::annulus(Point::default(), 3.0, 9.0)] {
            let fast = empty_radius(&ps, &reg, false).unwrap().unwrap();
            let slow = empty_radius(&ps, &reg, true).unwrap().unwrap();
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }
}
