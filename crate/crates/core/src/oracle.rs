//! Brute-force references for small instances.
//!
//! Nothing here touches the triangulation or the cluster machinery used by
//! the detectors. Cells are rebuilt by clipping the window with every
//! bisector, Voronoi edges by clipping every bisector line with every other
//! half-plane, and events are decided by explicit path search or exhaustive
//! enumeration. Intended for up to a few dozen nuclei.

use std::collections::HashMap;

use rand::Rng;

use crate::coloring::Coloring;
use crate::error::Result;
use crate::geom::{
    clip_halfplane, polygon_area, sample_poisson, segment_convex_interval, segment_rect_interval,
    Point, PointSet, Rect, RegionSpec, Window,
};
use crate::stream::SeedPath;

const EPS: f64 = 1e-9;

/// Cell of nucleus `i` by clipping the window with all bisectors.
pub fn brute_cell(points: &[Point], window: &Rect, i: usize) -> Vec<Point> {
    let p = points[i];
    let mut a = window.corners().to_vec();
    let mut b = Vec::new();
    for (k, &q) in points.iter().enumerate() {
        if k == i {
            continue;
        }
        let (dx, dy) = (q.x - p.x, q.y - p.y);
        clip_halfplane(&a, dx, dy, 0.5 * (dx * (p.x + q.x) + dy * (p.y + q.y)), &mut b);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Shared Voronoi edge of nuclei `i` and `j` inside the window, if it has
/// positive length.
pub fn brute_edge(points: &[Point], window: &Rect, i: usize, j: usize) -> Option<(Point, Point)> {
    let (p, q) = (points[i], points[j]);
    let m = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    let (dx, dy) = (q.y - p.y, p.x - q.x);
    let len = dx.hypot(dy);
    let reach = 4.0 * (window.diameter() + m.dist(Point::new(window.xmin, window.ymin))) / len;
    let a = Point::new(m.x - dx * reach, m.y - dy * reach);
    let b = Point::new(m.x + dx * reach, m.y + dy * reach);
    let (mut t0, mut t1) = segment_rect_interval(a, b, window)?;
    let (ex, ey) = (b.x - a.x, b.y - a.y);
    for (k, &o) in points.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        // Keep points at least as close to p as to o: n.x <= c.
        let (nx, ny) = (o.x - p.x, o.y - p.y);
        let c = 0.5 * (nx * (p.x + o.x) + ny * (p.y + o.y));
        let base = nx * a.x + ny * a.y - c;
        let slope = nx * ex + ny * ey;
        if slope == 0.0 {
            if base > 0.0 {
                return None;
            }
        } else {
            let t = -base / slope;
            if slope > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
        }
        if t0 >= t1 {
            return None;
        }
    }
    let s = Point::new(a.x + ex * t0, a.y + ey * t0);
    let e = Point::new(a.x + ex * t1, a.y + ey * t1);
    (s.dist(e) > EPS).then_some((s, e))
}

fn region_overlap(region_pieces: &[Rect], a: Point, b: Point) -> f64 {
    region_pieces
        .iter()
        .filter_map(|r| segment_rect_interval(a, b, r))
        .map(|(t0, t1)| (t1 - t0) * a.dist(b))
        .sum()
}

/// Site graph of a region rebuilt from scratch. A site is a connected
/// component of a cell clipped to the region; parts of one cell in different
/// pieces are joined when their polygons share a boundary segment.
#[derive(Clone, Debug)]
pub struct BruteRegion {
    pub region: RegionSpec,
    /// Nucleus index of each site, nondecreasing.
    pub cells: Vec<usize>,
    /// Boundary components touched, bit `k` for `region.boundaries()[k]`.
    pub touch: Vec<u8>,
    pub adj: Vec<Vec<usize>>,
    /// First position along the inner boundary, for sites touching it.
    pub inner_pos: Vec<Option<f64>>,
}

fn share_segment(a: &[Point], b: &[Point]) -> bool {
    let edges = |p: &[Point]| -> Vec<(Point, Point)> { (0..p.len()).map(|k| (p[k], p[(k + 1) % p.len()])).collect() };
    for (p, q) in edges(a) {
        let len = p.dist(q);
        if len <= EPS {
            continue;
        }
        let (ux, uy) = ((q.x - p.x) / len, (q.y - p.y) / len);
        for (r, s) in edges(b) {
            let off = |x: Point| ((x.x - p.x) * uy - (x.y - p.y) * ux).abs();
            if off(r) > 1e-9 || off(s) > 1e-9 {
                continue;
            }
            let t = |x: Point| (x.x - p.x) * ux + (x.y - p.y) * uy;
            let (lo, hi) = (t(r).min(t(s)), t(r).max(t(s)));
            if hi.min(len) - lo.max(0.0) > EPS {
                return true;
            }
        }
    }
    false
}

impl BruteRegion {
    pub fn new(points: &[Point], window: &Rect, region: &RegionSpec) -> Self {
        let pieces = if region.is_degenerate() { Vec::new() } else { region.pieces() };
        let boundaries = region.boundaries();
        let mut cells = Vec::new();
        // Per site: (piece, clipped polygon) parts.
        let mut site_parts: Vec<Vec<(usize, Vec<Point>)>> = Vec::new();
        let mut scratch = Vec::new();
        for i in 0..points.len() {
            if pieces.is_empty() {
                break;
            }
            let poly = brute_cell(points, window, i);
            let mut parts: Vec<(usize, Vec<Point>)> = Vec::new();
            for (k, r) in pieces.iter().enumerate() {
                let mut a = poly.clone();
                for (nx, ny, c) in [(-1.0, 0.0, -r.xmin), (1.0, 0.0, r.xmax), (0.0, -1.0, -r.ymin), (0.0, 1.0, r.ymax)] {
                    clip_halfplane(&a, nx, ny, c, &mut scratch);
                    std::mem::swap(&mut a, &mut scratch);
                }
                if polygon_area(&a) > EPS {
                    parts.push((k, a));
                }
            }
            let mut label: Vec<usize> = (0..parts.len()).collect();
            loop {
                let mut changed = false;
                for a in 0..parts.len() {
                    for b in a + 1..parts.len() {
                        if label[a] != label[b] && share_segment(&parts[a].1, &parts[b].1) {
                            let l = label[a].min(label[b]);
                            let old = label[a].max(label[b]);
                            label.iter_mut().filter(|x| **x == old).for_each(|x| *x = l);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let mut roots: Vec<usize> = label.clone();
            roots.sort_unstable();
            roots.dedup();
            for r in roots {
                cells.push(i);
                site_parts.push(
                    parts
                        .iter()
                        .zip(&label)
                        .filter(|(_, &l)| l == r)
                        .map(|(p, _)| p.clone())
                        .collect(),
                );
            }
        }
        let n = cells.len();
        let mut touch = vec![0u8; n];
        let mut inner_pos = vec![None; n];
        // A boundary stretch inside the cell belongs to the site owning the
        // piece whose closed rectangle contains it.
        for u in 0..n {
            let poly = brute_cell(points, window, cells[u]);
            for (piece, _) in &site_parts[u] {
                for (k, b) in boundaries.iter().enumerate() {
                    for (s, (a, c)) in b.segments().enumerate() {
                        let (Some((t0, t1)), Some((r0, r1))) =
                            (segment_convex_interval(a, c, &poly), segment_rect_interval(a, c, &pieces[*piece]))
                        else {
                            continue;
                        };
                        let (lo, hi) = (t0.max(r0), t1.min(r1));
                        if (hi - lo) * a.dist(c) > EPS {
                            touch[u] |= 1 << k;
                            if region.is_annulus_kind() && k == RegionSpec::INNER {
                                let pos = s as f64 + lo;
                                inner_pos[u] = Some(inner_pos[u].map_or(pos, |q: f64| q.min(pos)));
                            }
                        }
                    }
                }
            }
        }
        if region.is_annulus_kind() && region.radii().is_some_and(|(r, _)| r == 0.0) && n > 0 {
            let c = region.center();
            let holder = (0..n)
                .min_by(|&a, &b| points[cells[a]].dist2(c).total_cmp(&points[cells[b]].dist2(c)))
                .expect("nonempty");
            touch[holder] |= 1 << RegionSpec::INNER;
            inner_pos[holder] = Some(0.0);
        }
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in u + 1..n {
                if cells[u] == cells[v] {
                    continue;
                }
                let Some((a, b)) = brute_edge(points, window, cells[u], cells[v]) else { continue };
                let joined = site_parts[u].iter().any(|(k, _)| {
                    site_parts[v].iter().any(|(m, _)| k == m) && region_overlap(&pieces[*k..=*k], a, b) > EPS
                });
                if joined {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        Self {
            region: region.clone(),
            cells,
            touch,
            adj,
            inner_pos,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn touches(&self, u: usize, k: usize) -> bool {
        self.touch[u] & (1 << k) != 0
    }

    /// Inclusion-minimal monochromatic paths from the inner to the outer
    /// boundary, as node bitmasks with their color and start position.
    pub fn crossing_paths(&self, coloring: &Coloring) -> Vec<CrossingPath> {
        assert!(self.len() <= 64, "brute-force paths need at most 64 nodes");
        let (inner, outer) = (RegionSpec::INNER, RegionSpec::OUTER);
        let black = |u: usize| coloring.is_black(self.cells[u]);
        let mut found: HashMap<u64, CrossingPath> = HashMap::new();
        for s in 0..self.len() {
            if !self.touches(s, inner) {
                continue;
            }
            let color = black(s);
            let start = self.inner_pos[s].unwrap_or(0.0);
            let mut stack: Vec<(usize, u64)> = vec![(s, 1u64 << s)];
            while let Some((u, mask)) = stack.pop() {
                if self.touches(u, outer) {
                    found.entry(mask).or_insert(CrossingPath { mask, black: color, start });
                    continue;
                }
                for &v in &self.adj[u] {
                    if mask >> v & 1 == 0 && black(v) == color && !self.touches(v, inner) {
                        stack.push((v, mask | 1 << v));
                    }
                }
            }
        }
        let all: Vec<CrossingPath> = found.into_values().collect();
        let mut minimal: Vec<CrossingPath> = all
            .iter()
            .filter(|p| !all.iter().any(|q| q.mask != p.mask && q.mask & p.mask == q.mask))
            .copied()
            .collect();
        minimal.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.mask.cmp(&b.mask)));
        minimal
    }

    /// Arm event by explicit search for disjoint alternating paths.
    pub fn arms(&self, coloring: &Coloring, j: u32) -> bool {
        if self.region.is_degenerate() {
            return true;
        }
        let paths = self.crossing_paths(coloring);
        let cyclic = self.region.is_cyclic();
        let alternating = if j.is_multiple_of(2) { j } else { j - 1 } as usize;
        let mut chosen: Vec<usize> = Vec::new();
        search(&paths, alternating, cyclic, j % 2 == 1, 0, 0, &mut chosen)
    }

    /// Black cluster touching both components `a` and `b` (breadth-first).
    pub fn connects(&self, coloring: &Coloring, black: bool, a: usize, b: usize) -> bool {
        let color = |u: usize| coloring.is_black(self.cells[u]) == black;
        let mut seen = vec![false; self.len()];
        let mut queue: Vec<usize> = (0..self.len()).filter(|&u| color(u) && self.touches(u, a)).collect();
        for &u in &queue {
            seen[u] = true;
        }
        while let Some(u) = queue.pop() {
            if self.touches(u, b) {
                return true;
            }
            for &v in &self.adj[u] {
                if !seen[v] && color(v) {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        false
    }

    /// Black left-right crossing of a rectangle.
    pub fn cross(&self, coloring: &Coloring) -> bool {
        self.connects(coloring, true, RegionSpec::LEFT, RegionSpec::RIGHT)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingPath {
    pub mask: u64,
    pub black: bool,
    pub start: f64,
}

fn search(
    paths: &[CrossingPath],
    need: usize,
    cyclic: bool,
    extra_black: bool,
    from: usize,
    used: u64,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == need {
        if cyclic && need >= 2 && paths[chosen[0]].black == paths[chosen[need - 1]].black {
            return false;
        }
        if extra_black {
            return paths.iter().any(|p| p.black && p.mask & used == 0);
        }
        return true;
    }
    for k in from..paths.len() {
        let p = paths[k];
        if p.mask & used != 0 {
            continue;
        }
        if let Some(&last) = chosen.last() {
            if paths[last].black == p.black {
                continue;
            }
        }
        chosen.push(k);
        if search(paths, need, cyclic, extra_black, k + 1, used | p.mask, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Exact probability of an event over i.i.d. colorings of `n` cells,
/// by enumerating all `2^n` of them.
pub fn exact_probability(n: usize, p: f64, mut event: impl FnMut(&Coloring) -> bool) -> f64 {
    assert!(n <= 24, "exhaustive enumeration is limited to 24 cells");
    let mut total = 0.0;
    let mut signs = vec![-1i8; n];
    for mask in 0u64..1 << n {
        let mut weight = 1.0;
        for (c, s) in signs.iter_mut().enumerate() {
            let b = mask >> c & 1 == 1;
            *s = if b { 1 } else { -1 };
            weight *= if b { p } else { 1.0 - p };
        }
        let col = Coloring::from_signs(signs.clone(), p).expect("valid signs");
        if event(&col) {
            total += weight;
        }
    }
    total
}

/// Pivotality by scanning every coloring of all `n` cells and keeping those
/// that agree with `coloring` off `d`.
pub fn brute_pivotal(coloring: &Coloring, d: &[usize], mut event: impl FnMut(&Coloring) -> bool) -> bool {
    let n = coloring.len();
    assert!(n <= 20, "full enumeration is limited to 20 cells");
    let base = event(coloring);
    let mut signs = vec![0i8; n];
    for mask in 0u64..1 << n {
        for (c, s) in signs.iter_mut().enumerate() {
            *s = if mask >> c & 1 == 1 { 1 } else { -1 };
        }
        let agrees = (0..n).all(|c| d.contains(&c) || signs[c] == coloring.sign(c));
        if agrees && event(&Coloring::from_signs(signs.clone(), coloring.p()).expect("valid signs")) != base {
            return true;
        }
    }
    false
}

/// Interfaces from the inner to the outer boundary of a full annulus, found
/// by tracing the Voronoi edges that separate black from white cells.
pub fn traced_interfaces(points: &[Point], window: &Rect, coloring: &Coloring, region: &RegionSpec) -> u32 {
    let pieces = region.pieces();
    let boundaries = region.boundaries();
    let br = BruteRegion::new(points, window, region);
    // Sub-edges of interface edges lying in the region.
    let mut segs: Vec<(Point, Point)> = Vec::new();
    for u in 0..br.len() {
        for &v in &br.adj[u] {
            if v < u || coloring.is_black(br.cells[u]) == coloring.is_black(br.cells[v]) {
                continue;
            }
            let Some((a, b)) = brute_edge(points, window, br.cells[u], br.cells[v]) else { continue };
            let mut iv: Vec<(f64, f64)> = pieces.iter().filter_map(|r| segment_rect_interval(a, b, r)).collect();
            iv.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (s, e) in iv {
                match merged.last_mut() {
                    Some(last) if s <= last.1 + EPS => last.1 = last.1.max(e),
                    _ => merged.push((s, e)),
                }
            }
            for (s, e) in merged {
                let p = Point::new(a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s);
                let q = Point::new(a.x + (b.x - a.x) * e, a.y + (b.y - a.y) * e);
                if p.dist(q) > EPS {
                    segs.push((p, q));
                }
            }
        }
    }
    // Join sub-edges sharing an endpoint.
    let m = segs.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let ends = |k: usize| [segs[k].0, segs[k].1];
    for a in 0..m {
        for b in a + 1..m {
            if ends(a).iter().any(|x| ends(b).iter().any(|y| x.dist(*y) < 1e-7)) {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let on = |x: Point, k: usize| {
        boundaries[k]
            .segments()
            .any(|(s, t)| segment_point_distance(s, t, x) < 1e-7)
    };
    let mut inner_hit = vec![false; m];
    let mut outer_hit = vec![false; m];
    for k in 0..m {
        let r = root(&mut parent, k);
        for x in ends(k) {
            inner_hit[r] |= on(x, RegionSpec::INNER);
            outer_hit[r] |= on(x, RegionSpec::OUTER);
        }
    }
    (0..m).filter(|&k| parent[k] == k && inner_hit[k] && outer_hit[k]).count() as u32
}

fn segment_point_distance(a: Point, b: Point, x: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((x.x - a.x) * dx + (x.y - a.y) * dy) / l2).clamp(0.0, 1.0)
    };
    x.dist(Point::new(a.x + dx * t, a.y + dy * t))
}

/// A random small arm instance: environment, region and coloring.
#[derive(Clone, Debug)]
pub struct ArmInstance {
    pub points: PointSet,
    pub region: RegionSpec,
    pub coloring: Coloring,
}

/// Draw a random arm instance with at most `max_cells` cells meeting the
/// region. Cycles through the four annulus kinds with `index`.
pub fn random_arm_instance(stream: &SeedPath, index: u64, max_cells: usize) -> Result<ArmInstance> {
    let window = Window::new(-8.0, -8.0, 8.0, 8.0)?;
    for attempt in 0u64.. {
        let s = stream.child(index).child(attempt);
        let mut rng = s.child(0).rng();
        let r = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.6..1.4) };
        let center = Point::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let orientation = rng.random_range(0..4u8);
        let (region, intensity) = match index % 4 {
            0 => (RegionSpec::annulus(center, r, 3.0), 0.6),
            1 => (
                RegionSpec::HalfPlaneAnnulus { center, r, big_r: 3.5, orientation },
                0.8,
            ),
            2 => (
                RegionSpec::QuarterPlaneAnnulus { center, r, big_r: 4.5, orientation },
                0.9,
            ),
            _ => (
                RegionSpec::ComplementOfQuarterPlaneAnnulus { center, r, big_r: 3.0, orientation },
                0.75,
            ),
        };
        let points = sample_poisson(window, intensity, &s.child(1))?;
        if points.len() < 3 {
            continue;
        }
        let cells = BruteRegion::new(&points.points, window.rect(), &region).len();
        if cells == 0 || cells > max_cells {
            continue;
        }
        let coloring = Coloring::sample(points.len(), 0.5, &s.child(2))?;
        return Ok(ArmInstance {
            points,
            region,
            coloring,
        });
    }
    unreachable!()
}

/// Sum of cell areas of a brute-force tessellation; equals the window area.
pub fn brute_total_area(points: &[Point], window: &Rect) -> f64 {
    (0..points.len()).map(|i| polygon_area(&brute_cell(points, window, i))).sum()
}
