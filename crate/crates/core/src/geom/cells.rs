use std::ops::Range;

use super::{
    clip_to_rect, convex_contains, polygon_area, segment_convex_interval, segment_rect_interval, window_margin,
    Point, Rect, RegionSpec, VoronoiComplex, GEOM_EPS,
};
use crate::error::{Error, Result};

/// Cells whose polygon meets a region in positive area, in increasing id
/// order, with a bitmask per cell of the boundary components it touches (bit
/// `k` refers to `region.boundaries()[k]`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellsMeeting {
    pub cells: Vec<u32>,
    pub touches: Vec<u8>,
}

pub fn cells_meeting(complex: &VoronoiComplex, region: &RegionSpec) -> Result<CellsMeeting> {
    check_safe_zone(complex, region)?;
    Ok(Layout::new(complex, region).meeting)
}

pub(crate) fn check_safe_zone(complex: &VoronoiComplex, region: &RegionSpec) -> Result<()> {
    region.validate()?;
    let bbox = region.bbox();
    let safe = complex.window().rect().shrink(window_margin(region.diameter()));
    if safe.contains_rect(&bbox) {
        Ok(())
    } else {
        Err(Error::SafeZone {
            region: bbox.as_array(),
            safe_zone: safe.as_array(),
        })
    }
}

/// A segment shared by the closures of two region pieces.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Seam {
    pub a: usize,
    pub b: usize,
    pub from: Point,
    pub to: Point,
}

/// Segments along which adjacent pieces of a region meet.
pub(crate) fn seams(pieces: &[Rect]) -> Vec<Seam> {
    let tol = 1e-12 * pieces.iter().map(|p| p.diameter()).fold(1.0, f64::max);
    let mut out = Vec::new();
    for a in 0..pieces.len() {
        for b in a + 1..pieces.len() {
            let (p, q) = (&pieces[a], &pieces[b]);
            for (x, other) in [(p.xmax, q.xmin), (p.xmin, q.xmax)] {
                let (lo, hi) = (p.ymin.max(q.ymin), p.ymax.min(q.ymax));
                if (x - other).abs() <= tol && hi - lo > tol {
                    out.push(Seam { a, b, from: Point::new(x, lo), to: Point::new(x, hi) });
                }
            }
            for (y, other) in [(p.ymax, q.ymin), (p.ymin, q.ymax)] {
                let (lo, hi) = (p.xmin.max(q.xmin), p.xmax.min(q.xmax));
                if (y - other).abs() <= tol && hi - lo > tol {
                    out.push(Seam { a, b, from: Point::new(lo, y), to: Point::new(hi, y) });
                }
            }
        }
    }
    out
}

/// Per-piece parts of the cells meeting a region and the sites they form.
struct Layout {
    meeting: CellsMeeting,
    /// Sites of `meeting.cells[k]` are `site_offsets[k]..site_offsets[k + 1]`.
    site_offsets: Vec<u32>,
    site_touch: Vec<u8>,
    /// Per meeting cell, per piece: local site index, or `u32::MAX`.
    part_site: Vec<u32>,
    /// Whether the cell lies strictly inside a single piece.
    interior: Vec<bool>,
    pieces: Vec<Rect>,
}

impl Layout {
    fn new(complex: &VoronoiComplex, region: &RegionSpec) -> Self {
        let pieces = if region.is_degenerate() { Vec::new() } else { region.pieces() };
        let np = pieces.len();
        let mut out = Layout {
            meeting: CellsMeeting {
                cells: Vec::new(),
                touches: Vec::new(),
            },
            site_offsets: vec![0],
            site_touch: Vec::new(),
            part_site: Vec::new(),
            interior: Vec::new(),
            pieces,
        };
        if np == 0 {
            return out;
        }
        let pieces = out.pieces.clone();
        let seams = seams(&pieces);
        let bbox = region.bbox();
        let boundaries = region.boundaries();
        let area_eps = GEOM_EPS * bbox.area().max(1.0);
        let grown: Vec<Rect> = pieces.iter().map(|p| p.grow(1e-9 * bbox.diameter().max(1.0))).collect();
        let mut parts: Vec<Vec<Point>> = vec![Vec::new(); np];
        for i in 0..complex.len() {
            let cb = complex.bbox(i);
            if !cb.intersects(&bbox) {
                continue;
            }
            if let Some(k) = pieces.iter().position(|p| p.strictly_contains_rect(cb)) {
                let base = out.site_touch.len() as u32;
                out.meeting.cells.push(i as u32);
                out.meeting.touches.push(0);
                out.site_touch.push(0);
                out.part_site.extend((0..np).map(|m| if m == k { base } else { u32::MAX }));
                out.interior.push(true);
                out.site_offsets.push(out.site_touch.len() as u32);
                continue;
            }
            let poly = complex.polygon(i);
            let mut any = false;
            for (k, p) in pieces.iter().enumerate() {
                parts[k] = clip_to_rect(poly, p);
                if polygon_area(&parts[k]) <= area_eps {
                    parts[k].clear();
                } else {
                    any = true;
                }
            }
            if !any {
                continue;
            }
            // Components of the parts, joined across seams the cell covers.
            let mut comp: Vec<usize> = (0..np).collect();
            fn root(c: &mut [usize], mut x: usize) -> usize {
                while c[x] != x {
                    c[x] = c[c[x]];
                    x = c[x];
                }
                x
            }
            for s in &seams {
                if parts[s.a].is_empty() || parts[s.b].is_empty() {
                    continue;
                }
                let covered = segment_convex_interval(s.from, s.to, poly)
                    .is_some_and(|(t0, t1)| (t1 - t0) * s.from.dist(s.to) > GEOM_EPS);
                if covered {
                    let (x, y) = (root(&mut comp, s.a), root(&mut comp, s.b));
                    comp[x.max(y)] = x.min(y);
                }
            }
            let base = out.site_touch.len() as u32;
            let mut label = vec![u32::MAX; np];
            let mut site_of_piece = vec![u32::MAX; np];
            for k in 0..np {
                if parts[k].is_empty() {
                    continue;
                }
                let r = root(&mut comp, k);
                if label[r] == u32::MAX {
                    label[r] = out.site_touch.len() as u32;
                    out.site_touch.push(0);
                }
                site_of_piece[k] = label[r];
            }
            let mut mask = 0u8;
            for (b, boundary) in boundaries.iter().enumerate() {
                for (s, t) in boundary.segments() {
                    for_each_piece_stretch(s, t, poly, &grown, &site_of_piece, |site, _| {
                        out.site_touch[site as usize] |= 1 << b;
                        mask |= 1 << b;
                    });
                }
            }
            debug_assert!(out.site_touch.len() as u32 > base);
            out.meeting.cells.push(i as u32);
            out.meeting.touches.push(mask);
            out.part_site.extend_from_slice(&site_of_piece);
            out.interior.push(false);
            out.site_offsets.push(out.site_touch.len() as u32);
        }
        if region.is_annulus_kind() && region.radii().is_some_and(|(r, _)| r == 0.0) {
            let centre = region.center();
            let holder = complex.nearest_among(
                centre,
                out.meeting
                    .cells
                    .iter()
                    .map(|&c| c as usize)
                    .filter(|&c| complex.bbox(c).contains(centre) && convex_contains(complex.polygon(c), centre)),
            );
            if let Some(c) = holder {
                let k = out.meeting.cells.binary_search(&(c as u32)).expect("holder meets the region");
                out.meeting.touches[k] |= 1 << RegionSpec::INNER;
                // A convex region near its centre: the holder has one site there.
                let site = (0..np)
                    .map(|m| out.part_site[k * np + m])
                    .find(|&s| s != u32::MAX)
                    .expect("holder has a part");
                out.site_touch[site as usize] |= 1 << RegionSpec::INNER;
            }
        }
        out
    }

    fn site(&self, k: usize, piece: usize) -> Option<u32> {
        let s = self.part_site[k * self.pieces.len() + piece];
        (s != u32::MAX).then_some(s)
    }
}

/// Call `f(site, t0)` for every stretch of the segment `s -> t` of positive
/// length that lies inside `poly` and along a piece where the cell has a
/// part. `t0` is the stretch's start parameter.
fn for_each_piece_stretch(
    s: Point,
    t: Point,
    poly: &[Point],
    grown: &[Rect],
    site_of_piece: &[u32],
    mut f: impl FnMut(u32, f64),
) {
    let Some((a0, a1)) = segment_convex_interval(s, t, poly) else { return };
    let len = s.dist(t);
    if (a1 - a0) * len <= GEOM_EPS {
        return;
    }
    for (k, r) in grown.iter().enumerate() {
        if site_of_piece[k] == u32::MAX {
            continue;
        }
        if let Some((b0, b1)) = segment_rect_interval(s, t, r) {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if (hi - lo) * len > GEOM_EPS {
                f(site_of_piece[k], lo);
            }
        }
    }
}

/// The site graph of a region. A site is a connected component of a cell's
/// polygon intersected with the region; a cell that the region cuts in two
/// (around a corner of the inner square, say) gives two sites. Sites are
/// joined when their cells share a Voronoi edge meeting both in positive
/// length.
///
/// For annulus kinds the graph also records the order in which sites touch
/// the inner boundary (inner loop counter-clockwise, or the inner arc from
/// one side to the other), with consecutive repeats collapsed.
#[derive(Clone, Debug)]
pub struct RegionGraph {
    region: RegionSpec,
    meeting: CellsMeeting,
    site_offsets: Vec<u32>,
    site_cell: Vec<u32>,
    site_touch: Vec<u8>,
    boundary_cells: bool,
    split_cells: bool,
    adj_offsets: Vec<u32>,
    adj: Vec<u32>,
    inner_order: Vec<u32>,
}

impl RegionGraph {
    pub fn new(complex: &VoronoiComplex, region: &RegionSpec) -> Result<Self> {
        check_safe_zone(complex, region)?;
        Ok(Self::build(complex, region))
    }

    /// Like [`RegionGraph::new`] but without the safe-zone check. For
    /// hand-built or deliberately tiny environments where cells are expected
    /// to reach the window.
    pub fn new_unchecked(complex: &VoronoiComplex, region: &RegionSpec) -> Result<Self> {
        region.validate()?;
        Ok(Self::build(complex, region))
    }

    fn build(complex: &VoronoiComplex, region: &RegionSpec) -> Self {
        let layout = Layout::new(complex, region);
        let n = layout.site_touch.len();
        let np = layout.pieces.len();
        let cells = &layout.meeting.cells;
        let local_of = |c: usize| cells.binary_search(&(c as u32)).ok();

        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (k, &ci) in cells.iter().enumerate() {
            let i = ci as usize;
            for e in complex.edge_range(i) {
                let j = complex.edge_target(e);
                if j <= i {
                    continue;
                }
                let Some(l) = local_of(j) else { continue };
                let Some((a, b)) = complex.voronoi_edge(i, e) else { continue };
                let len = a.dist(b);
                for m in 0..np {
                    let (Some(u), Some(v)) = (layout.site(k, m), layout.site(l, m)) else { continue };
                    let inside = if layout.interior[k] || layout.interior[l] {
                        true
                    } else {
                        segment_rect_interval(a, b, &layout.pieces[m]).is_some_and(|(t0, t1)| (t1 - t0) * len > GEOM_EPS)
                    };
                    if inside && !lists[u as usize].contains(&v) {
                        lists[u as usize].push(v);
                        lists[v as usize].push(u);
                    }
                }
            }
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        adj_offsets.push(0);
        for l in lists {
            adj.extend(l);
            adj_offsets.push(adj.len() as u32);
        }

        let mut site_cell = Vec::with_capacity(n);
        for (k, &c) in cells.iter().enumerate() {
            let count = layout.site_offsets[k + 1] - layout.site_offsets[k];
            site_cell.extend(std::iter::repeat_n(c, count as usize));
        }
        let boundary_cells = cells.iter().any(|&c| complex.boundary_flag(c as usize));
        let inner_order = if region.is_annulus_kind() {
            inner_walk(complex, region, &layout)
        } else {
            Vec::new()
        };
        Self {
            region: region.clone(),
            split_cells: n > cells.len(),
            meeting: layout.meeting,
            site_offsets: layout.site_offsets,
            site_cell,
            site_touch: layout.site_touch,
            boundary_cells,
            adj_offsets,
            adj,
            inner_order,
        }
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.site_cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_cell.is_empty()
    }

    /// Complex cell id of site `u`.
    pub fn cell(&self, u: usize) -> usize {
        self.site_cell[u] as usize
    }

    /// Distinct cells meeting the region, increasing.
    pub fn cells(&self) -> &[u32] {
        &self.meeting.cells
    }

    /// Sites of a cell; empty when the cell does not meet the region.
    pub fn sites_of(&self, cell: usize) -> Range<usize> {
        match self.meeting.cells.binary_search(&(cell as u32)) {
            Ok(k) => self.site_offsets[k] as usize..self.site_offsets[k + 1] as usize,
            Err(_) => 0..0,
        }
    }

    /// Whether some cell meets the region in more than one site.
    pub fn has_split_cells(&self) -> bool {
        self.split_cells
    }

    pub fn touch(&self, u: usize) -> u8 {
        self.site_touch[u]
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[self.adj_offsets[u] as usize..self.adj_offsets[u + 1] as usize]
    }

    /// Undirected edges `(u, v)`, `u < v`, between sites.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Sites along the inner boundary, consecutive repeats collapsed
    /// (cyclically for full annuli).
    pub fn inner_order(&self) -> &[u32] {
        &self.inner_order
    }

    /// Whether some cell of the region reaches the sampling window, so the
    /// environment does not determine the region's cells.
    pub fn has_boundary_cells(&self) -> bool {
        self.boundary_cells
    }

    pub fn meeting(&self) -> &CellsMeeting {
        &self.meeting
    }
}

fn inner_walk(complex: &VoronoiComplex, region: &RegionSpec, layout: &Layout) -> Vec<u32> {
    let inner = &region.boundaries()[RegionSpec::INNER];
    let bit = 1u8 << RegionSpec::INNER;
    if inner.polyline.len() == 1 {
        return (0..layout.site_touch.len() as u32)
            .filter(|&u| layout.site_touch[u as usize] & bit != 0)
            .collect();
    }
    let np = layout.pieces.len();
    let scale = region.diameter().max(1.0);
    let grown: Vec<Rect> = layout.pieces.iter().map(|p| p.grow(1e-9 * scale)).collect();
    let mut stops: Vec<(f64, u32)> = Vec::new();
    for (k, &c) in layout.meeting.cells.iter().enumerate() {
        if layout.meeting.touches[k] & bit == 0 {
            continue;
        }
        let poly = complex.polygon(c as usize);
        let site_of_piece = &layout.part_site[k * np..(k + 1) * np];
        for (m, (s, t)) in inner.segments().enumerate() {
            for_each_piece_stretch(s, t, poly, &grown, site_of_piece, |site, t0| {
                stops.push((m as f64 + t0, site));
            });
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut order: Vec<u32> = Vec::with_capacity(stops.len());
    for (_, u) in stops {
        if order.last() != Some(&u) {
            order.push(u);
        }
    }
    if inner.closed {
        while order.len() > 1 && order.first() == order.last() {
            order.pop();
        }
    }
    order
}
