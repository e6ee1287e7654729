use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use super::{clip_halfplane, clip_to_rect, orient2d, segment_rect_interval, Point, PointSet, Rect, Window, GEOM_EPS};
use crate::error::{Error, Result};

pub(crate) const NO_FACE: u32 = u32::MAX;

struct Site {
    pos: Point2<f64>,
    id: u32,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Delaunay triangulation of an environment together with its dual Voronoi
/// cells clipped to the sampling window. Immutable once built.
///
/// Neighbor lists are stored in CSR form and ordered counter-clockwise around
/// each nucleus. For the directed Delaunay edge `e = (i -> j)` stored at
/// position `e`, `left_face[e]` is the triangle on its left (or `NO_FACE` on
/// the hull) and `twin[e]` is the position of `(j -> i)`.
#[derive(Clone, Debug)]
pub struct VoronoiComplex {
    window: Window,
    nuclei: Vec<Point>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    left_face: Vec<u32>,
    twin: Vec<u32>,
    triangles: Vec<[u32; 3]>,
    circumcenters: Vec<Point>,
    poly_offsets: Vec<u32>,
    poly_vertices: Vec<Point>,
    bboxes: Vec<Rect>,
    boundary: Vec<bool>,
}

pub fn build_complex(points: &PointSet) -> Result<VoronoiComplex> {
    let n = points.points.len();
    if n < 3 {
        return Err(Error::DegenerateGeometry(format!("{n} points, at least 3 required")));
    }
    let sites: Vec<Site> = points
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| Site {
            pos: Point2::new(p.x, p.y),
            id: i as u32,
        })
        .collect();
    let tri: DelaunayTriangulation<Site> =
        DelaunayTriangulation::bulk_load(sites).map_err(|e| Error::DegenerateGeometry(format!("{e:?}")))?;
    if tri.num_vertices() != n {
        return Err(Error::DegenerateGeometry("coincident points".into()));
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::DegenerateGeometry("all points are collinear".into()));
    }

    let nuclei = points.points.clone();
    let mut triangles = Vec::with_capacity(tri.num_inner_faces());
    let mut circumcenters = Vec::with_capacity(tri.num_inner_faces());
    // Spade face indices start at 1; index 0 is the outer face.
    let mut face_slot = vec![NO_FACE; tri.num_all_faces()];
    for f in tri.inner_faces() {
        let [a, b, c] = f.vertices().map(|v| v.data().id);
        face_slot[f.fix().index()] = triangles.len() as u32;
        circumcenters.push(circumcenter(nuclei[a as usize], nuclei[b as usize], nuclei[c as usize]));
        triangles.push([a, b, c]);
    }

    let mut handles = vec![None; n];
    for v in tri.vertices() {
        handles[v.data().id as usize] = Some(v.fix());
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbors = Vec::with_capacity(6 * n);
    let mut left_face = Vec::with_capacity(6 * n);
    offsets.push(0u32);
    for h in &handles {
        let v = tri.vertex(h.expect("every site is a vertex"));
        for e in v.out_edges() {
            neighbors.push(e.to().data().id);
            let f = e.face();
            left_face.push(if f.is_outer() { NO_FACE } else { face_slot[f.fix().index()] });
        }
        offsets.push(neighbors.len() as u32);
    }
    let mut twin = vec![0u32; neighbors.len()];
    for i in 0..n {
        for e in offsets[i] as usize..offsets[i + 1] as usize {
            let j = neighbors[e] as usize;
            let back = (offsets[j] as usize..offsets[j + 1] as usize)
                .find(|&k| neighbors[k] as usize == i)
                .expect("adjacency is symmetric");
            twin[e] = back as u32;
        }
    }

    let mut c = VoronoiComplex {
        window: points.window,
        nuclei,
        offsets,
        neighbors,
        left_face,
        twin,
        triangles,
        circumcenters,
        poly_offsets: Vec::with_capacity(n + 1),
        poly_vertices: Vec::with_capacity(7 * n),
        bboxes: Vec::with_capacity(n),
        boundary: Vec::with_capacity(n),
    };
    c.build_cells();
    Ok(c)
}

fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

impl VoronoiComplex {
    fn build_cells(&mut self) {
        let w = *self.window.rect();
        let mut buf = Vec::new();
        let mut tmp = Vec::new();
        self.poly_offsets.push(0);
        for i in 0..self.nuclei.len() {
            let range = self.offsets[i] as usize..self.offsets[i + 1] as usize;
            let on_hull = self.left_face[range.clone()].contains(&NO_FACE);
            let poly = if on_hull {
                let p = self.nuclei[i];
                buf.clear();
                buf.extend_from_slice(&w.corners());
                for &j in &self.neighbors[range] {
                    let q = self.nuclei[j as usize];
                    let (dx, dy) = (q.x - p.x, q.y - p.y);
                    let m = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
                    clip_halfplane(&buf, dx, dy, dx * m.x + dy * m.y, &mut tmp);
                    std::mem::swap(&mut buf, &mut tmp);
                }
                buf.clone()
            } else {
                let ring: Vec<Point> = self.left_face[range]
                    .iter()
                    .map(|&f| self.circumcenters[f as usize])
                    .collect();
                if w.contains_rect(&Rect::bounding(ring.iter().copied())) {
                    ring
                } else {
                    clip_to_rect(&ring, &w)
                }
            };
            let bbox = Rect::bounding(poly.iter().copied());
            self.boundary.push(on_hull || !w.strictly_contains_rect(&bbox));
            self.bboxes.push(bbox);
            self.poly_vertices.extend_from_slice(&poly);
            self.poly_offsets.push(self.poly_vertices.len() as u32);
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn nuclei(&self) -> &[Point] {
        &self.nuclei
    }

    pub fn nucleus(&self, i: usize) -> Point {
        self.nuclei[i]
    }

    /// Delaunay neighbors of cell `i`, counter-clockwise.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub(crate) fn edge_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i] as usize..self.offsets[i + 1] as usize
    }

    pub(crate) fn edge_target(&self, e: usize) -> usize {
        self.neighbors[e] as usize
    }

    /// Cell polygon clipped to the window, counter-clockwise.
    pub fn polygon(&self, i: usize) -> &[Point] {
        &self.poly_vertices[self.poly_offsets[i] as usize..self.poly_offsets[i + 1] as usize]
    }

    pub fn bbox(&self, i: usize) -> &Rect {
        &self.bboxes[i]
    }

    /// Whether the cell polygon reaches the window boundary (so its true,
    /// unclipped shape is not known from the sample).
    pub fn boundary_flag(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    /// Undirected Delaunay edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Index { index: i, len: self.len() })
        }
    }

    /// Voronoi edge dual to the directed Delaunay edge stored at position `e`,
    /// clipped to the window. `None` when nothing of positive length remains.
    pub(crate) fn voronoi_edge(&self, i: usize, e: usize) -> Option<(Point, Point)> {
        let j = self.neighbors[e] as usize;
        let left = self.left_face[e];
        let right = self.left_face[self.twin[e] as usize];
        let (p, q) = (self.nuclei[i], self.nuclei[j]);
        let (dx, dy) = (q.x - p.x, q.y - p.y);
        let w = self.window.rect();
        let (a, b) = match (left, right) {
            (NO_FACE, NO_FACE) => return None,
            (NO_FACE, r) => ray(self.circumcenters[r as usize], -dy, dx, w),
            (l, NO_FACE) => ray(self.circumcenters[l as usize], dy, -dx, w),
            (l, r) => (self.circumcenters[r as usize], self.circumcenters[l as usize]),
        };
        let (t0, t1) = segment_rect_interval(a, b, w)?;
        let s = Point::new(a.x + (b.x - a.x) * t0, a.y + (b.y - a.y) * t0);
        let t = Point::new(a.x + (b.x - a.x) * t1, a.y + (b.y - a.y) * t1);
        (s.dist(t) > GEOM_EPS).then_some((s, t))
    }

    /// Index of the nucleus nearest to `x` among `candidates` (ties to the
    /// lower index).
    pub(crate) fn nearest_among(&self, x: Point, candidates: impl Iterator<Item = usize>) -> Option<usize> {
        candidates.min_by(|&a, &b| {
            self.nuclei[a]
                .dist2(x)
                .total_cmp(&self.nuclei[b].dist2(x))
                .then(a.cmp(&b))
        })
    }

    /// Orientation of triangle `t` as stored (positive: counter-clockwise).
    pub fn triangle_orientation(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|k| self.nuclei[k as usize]);
        orient2d(a, b, c)
    }
}

fn ray(origin: Point, dx: f64, dy: f64, w: &Rect) -> (Point, Point) {
    let len = dx.hypot(dy);
    let centre = Point::new(0.5 * (w.xmin + w.xmax), 0.5 * (w.ymin + w.ymax));
    let reach = 2.0 * (w.diameter() + origin.dist(centre)) / len;
    (origin, Point::new(origin.x + dx * reach, origin.y + dy * reach))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{convex_contains, incircle, polygon_area, sample_poisson};
    use crate::stream::SeedPath;

    fn pts(v: &[(f64, f64)], w: Window) -> PointSet {
        PointSet::from_points(v.iter().map(|&(x, y)| Point::new(x, y)).collect(), w).unwrap()
    }

    #[test]
    fn triangle_complex() {
        let w = Window::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let c = build_complex(&pts(&[(2.0, 2.0), (8.0, 3.0), (5.0, 8.0)], w)).unwrap();
        for i in 0..3 {
            assert_eq!(c.neighbors(i).len(), 2);
            assert!(c.boundary_flag(i));
        }
        let total: f64 = (0..3).map(|i| polygon_area(c.polygon(i))).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_or_collinear() {
        let w = Window::new(0.0, 0.0, 10.0, 10.0).unwrap();
        assert!(matches!(build_complex(&pts(&[(1.0, 1.0), (2.0, 2.0)], w)), Err(Error::DegenerateGeometry(_))));
        assert!(matches!(
            build_complex(&pts(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)], w)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn cocircular_square_has_one_diagonal() {
        let w = Window::new(-5.0, -5.0, 5.0, 5.0).unwrap();
        let c = build_complex(&pts(&[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)], w)).unwrap();
        let edges: Vec<_> = c.edges().collect();
        for e in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert!(edges.contains(&e));
        }
        let diagonals = edges.iter().filter(|e| **e == (0, 2) || **e == (1, 3)).count();
        assert_eq!(diagonals, 1);
        assert_eq!(edges.len(), 5);
        for t in 0..c.triangles().len() {
            let [a, b, cc] = c.triangles()[t].map(|k| c.nucleus(k as usize));
            for d in c.nuclei() {
                assert!(incircle(a, b, cc, *d) <= 0.0);
            }
        }
    }

    #[test]
    fn cells_tile_window_and_contain_nuclei() {
        let w = Window::new(0.0, 0.0, 30.0, 20.0).unwrap();
        let ps = sample_poisson(w, 1.0, &SeedPath::root(5)).unwrap();
        let c = build_complex(&ps).unwrap();
        let total: f64 = (0..c.len()).map(|i| polygon_area(c.polygon(i))).sum();
        assert!((total - 600.0).abs() < 1e-6, "{total}");
        for i in 0..c.len() {
            assert!(polygon_area(c.polygon(i)) > 0.0);
            assert!(convex_contains(c.polygon(i), c.nucleus(i)));
        }
    }

    #[test]
    fn voronoi_edges_are_equidistant() {
        let w = Window::new(0.0, 0.0, 20.0, 20.0).unwrap();
        let ps = sample_poisson(w, 1.0, &SeedPath::root(9)).unwrap();
        let c = build_complex(&ps).unwrap();
        for i in 0..c.len() {
            for e in c.edge_range(i) {
                let j = c.edge_target(e);
                if let Some((a, b)) = c.voronoi_edge(i, e) {
                    for x in [a, b] {
                        let (di, dj) = (x.dist(c.nucleus(i)), x.dist(c.nucleus(j)));
                        assert!((di - dj).abs() < 1e-7 * (1.0 + di));
                    }
                }
            }
        }
    }
}
