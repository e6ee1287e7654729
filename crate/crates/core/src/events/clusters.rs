use std::collections::VecDeque;

use crate::coloring::Coloring;
use crate::geom::{RegionGraph, RegionSpec};

const INNER_BIT: u8 = 1 << RegionSpec::INNER;
const OUTER_BIT: u8 = 1 << RegionSpec::OUTER;

pub(crate) struct DisjointSets {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b as u32,
            std::cmp::Ordering::Greater => self.parent[b] = a as u32,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a as u32;
                self.rank[a] += 1;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub black: bool,
    pub size: u32,
    /// Boundary components touched, as in [`RegionGraph::touch`].
    pub touch: u8,
}

impl Cluster {
    /// Touches both the inner and the outer boundary of an annulus kind.
    pub fn is_crossing(&self) -> bool {
        self.touch & (INNER_BIT | OUTER_BIT) == INNER_BIT | OUTER_BIT
    }

    pub fn touches(&self, component: usize) -> bool {
        self.touch & (1 << component) != 0
    }
}

/// One entry of the inner-boundary attachment sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attachment {
    pub cluster: u32,
    pub black: bool,
}

/// Monochromatic clusters of the cells of a region, for one coloring.
#[derive(Clone, Debug)]
pub struct ClusterDecomposition {
    node_cluster: Vec<u32>,
    clusters: Vec<Cluster>,
    attachments: Vec<Attachment>,
    cyclic: bool,
}

impl ClusterDecomposition {
    pub fn new(graph: &RegionGraph, coloring: &Coloring) -> Self {
        let n = graph.len();
        let mut ds = DisjointSets::new(n);
        let black = |u: usize| coloring.is_black(graph.cell(u));
        for (u, v) in graph.edges() {
            if black(u) == black(v) {
                ds.union(u, v);
            }
        }
        let mut label = vec![u32::MAX; n];
        let mut node_cluster = vec![0u32; n];
        let mut clusters: Vec<Cluster> = Vec::new();
        for u in 0..n {
            let root = ds.find(u);
            if label[root] == u32::MAX {
                label[root] = clusters.len() as u32;
                clusters.push(Cluster {
                    black: black(u),
                    size: 0,
                    touch: 0,
                });
            }
            let c = label[root];
            node_cluster[u] = c;
            let cl = &mut clusters[c as usize];
            cl.size += 1;
            cl.touch |= graph.touch(u);
        }

        let cyclic = graph.region().is_cyclic();
        let mut attachments: Vec<Attachment> = Vec::new();
        for &u in graph.inner_order() {
            let c = node_cluster[u as usize];
            let cl = clusters[c as usize];
            if cl.is_crossing() && attachments.last().map(|a| a.cluster) != Some(c) {
                attachments.push(Attachment { cluster: c, black: cl.black });
            }
        }
        if cyclic {
            while attachments.len() > 1 && attachments.first() == attachments.last() {
                attachments.pop();
            }
        }
        Self {
            node_cluster,
            clusters,
            attachments,
            cyclic,
        }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_of(&self, u: usize) -> u32 {
        self.node_cluster[u]
    }

    /// Local node ids of cluster `c`.
    pub fn members(&self, c: u32) -> Vec<usize> {
        (0..self.node_cluster.len()).filter(|&u| self.node_cluster[u] == c).collect()
    }

    pub fn attachments(&self) -> &[Attachment] {
        &self.attachments
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    /// Color blocks of the crossing word: maximal runs of equal color, with
    /// the wrap-around merged for cyclic words. Each block lists its entries.
    pub fn blocks(&self) -> Vec<Vec<Attachment>> {
        let mut blocks: Vec<Vec<Attachment>> = Vec::new();
        for &a in &self.attachments {
            match blocks.last_mut() {
                Some(b) if b[0].black == a.black => b.push(a),
                _ => blocks.push(vec![a]),
            }
        }
        if self.cyclic && blocks.len() > 1 && blocks[0][0].black == blocks[blocks.len() - 1][0].black {
            let last = blocks.pop().expect("nonempty");
            let mut merged = last;
            merged.append(&mut blocks[0]);
            blocks[0] = merged;
        }
        blocks
    }

    /// Color changes of the crossing word (cyclic changes for full annuli).
    pub fn sign_changes(&self) -> usize {
        let n = self.blocks().len();
        if self.cyclic {
            if n >= 2 {
                n
            } else {
                0
            }
        } else {
            n.saturating_sub(1)
        }
    }
}

/// Whether cluster `c` contains two vertex-disjoint paths from the inner to
/// the outer boundary (unit vertex capacities, two augmentations).
pub(crate) fn has_two_disjoint_crossings(graph: &RegionGraph, dec: &ClusterDecomposition, c: u32) -> bool {
    let members = dec.members(c);
    let m = members.len();
    if m < 2 {
        return false;
    }
    let mut index = std::collections::HashMap::with_capacity(m);
    for (k, &u) in members.iter().enumerate() {
        index.insert(u, k);
    }
    // Node 2k is k_in, 2k+1 is k_out; source 2m, sink 2m+1.
    let (s, t) = (2 * m, 2 * m + 1);
    let mut head: Vec<usize> = vec![usize::MAX; 2 * m + 2];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<i32> = Vec::new();
    let mut next: Vec<usize> = Vec::new();
    let mut add = |a: usize, b: usize, c: i32, head: &mut Vec<usize>| {
        for (x, y, cc) in [(a, b, c), (b, a, 0)] {
            to.push(y);
            cap.push(cc);
            next.push(head[x]);
            head[x] = to.len() - 1;
        }
    };
    for (k, &u) in members.iter().enumerate() {
        add(2 * k, 2 * k + 1, 1, &mut head);
        let touch = graph.touch(u);
        if touch & INNER_BIT != 0 {
            add(s, 2 * k, 1, &mut head);
        }
        if touch & OUTER_BIT != 0 {
            add(2 * k + 1, t, 1, &mut head);
        }
        for &v in graph.neighbors(u) {
            if let Some(&l) = index.get(&(v as usize)) {
                add(2 * k + 1, 2 * l, 1, &mut head);
            }
        }
    }
    let mut flow = 0;
    let mut prev_edge = vec![usize::MAX; 2 * m + 2];
    while flow < 2 {
        prev_edge.iter_mut().for_each(|p| *p = usize::MAX);
        let mut seen = vec![false; 2 * m + 2];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            if x == t {
                break;
            }
            let mut e = head[x];
            while e != usize::MAX {
                let y = to[e];
                if cap[e] > 0 && !seen[y] {
                    seen[y] = true;
                    prev_edge[y] = e;
                    queue.push_back(y);
                }
                e = next[e];
            }
        }
        if !seen[t] {
            break;
        }
        let mut y = t;
        while y != s {
            let e = prev_edge[y];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            y = to[e ^ 1];
        }
        flow += 1;
    }
    flow >= 2
}

/// Arm rule on a decomposition. `j_shift` perturbs the block threshold and
/// exists only to let tests confirm the oracle comparison notices a broken
/// rule; production callers pass 0.
pub(crate) fn arms_rule(graph: &RegionGraph, dec: &ClusterDecomposition, j: u32, j_shift: i64) -> bool {
    if graph.region().is_degenerate() {
        return true;
    }
    let blocks = dec.blocks();
    let n = blocks.len() as i64;
    let need = |x: i64| x + j_shift;
    if j == 1 {
        return blocks.iter().any(|b| b[0].black);
    }
    let j = j as i64;
    let cyclic = dec.is_cyclic();
    if j % 2 == 0 {
        return if cyclic { n >= 2 && n >= need(j) } else { n >= need(j) };
    }
    let k = (j - 1) / 2;
    if n >= need(2 * k + 2) {
        return true;
    }
    if !cyclic && n == need(2 * k + 1) && blocks[0][0].black {
        return true;
    }
    if n < need(2 * k) || (cyclic && n < 2) {
        return false;
    }
    blocks.iter().filter(|b| b[0].black).any(|b| {
        let mut ids: Vec<u32> = b.iter().map(|a| a.cluster).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len() >= 2 || has_two_disjoint_crossings(graph, dec, ids[0])
    })
}
