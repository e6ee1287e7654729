//! Event detection on a fixed environment and coloring.
//!
//! Every detector works on the [`RegionGraph`] of its region: cells meeting
//! the region, joined when their shared Voronoi edge meets the region. Arm
//! events are read off the inner-boundary word of crossing clusters.

mod clusters;
mod dense;

pub use clusters::{Attachment, Cluster, ClusterDecomposition};
pub use dense::{detect_dense, largest_empty_radius};

use serde::{Deserialize, Serialize};

use crate::coloring::{enumerate_recolorings, Coloring, K_MAX};
use crate::error::{Error, Result};
use crate::geom::{PointSet, Rect, RegionGraph, RegionSpec, VoronoiComplex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EventSpec {
    /// Black left-right crossing of a rectangle.
    Cross { region: RegionSpec },
    /// `j` arms of alternating colors across an annulus kind.
    Arms { region: RegionSpec, j: u32 },
    /// Black circuit in `(1 - delta) Q \ (1 - 2 delta) Q` for the square `Q`.
    Circuit { region: RegionSpec, delta: f64 },
    /// Every point of the region lies within `delta * diam` of a nucleus in it.
    Dense { region: RegionSpec, delta: f64 },
    /// Some recoloring of the cells with nuclei in `square` changes `inner`.
    PivotalOf { inner: Box<EventSpec>, square: RegionSpec },
}

impl EventSpec {
    pub fn cross(region: RegionSpec) -> Self {
        EventSpec::Cross { region }
    }

    pub fn arms(region: RegionSpec, j: u32) -> Self {
        EventSpec::Arms { region, j }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EventSpec::Cross { region } => {
                region.validate()?;
                if region.is_annulus_kind() {
                    return Err(Error::param("region", "crossing events need a rectangle"));
                }
            }
            EventSpec::Arms { region, j } => {
                region.validate()?;
                if !region.is_annulus_kind() {
                    return Err(Error::param("region", "arm events need an annulus kind"));
                }
                if *j < 1 {
                    return Err(Error::param("j", "arm count must be at least 1"));
                }
            }
            EventSpec::Circuit { region, delta } => {
                circuit_annulus(region, *delta)?;
            }
            EventSpec::Dense { region, delta } => {
                region.validate()?;
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(Error::param("delta", "must lie in (0, 1)"));
                }
            }
            EventSpec::PivotalOf { inner, square } => {
                if matches!(**inner, EventSpec::PivotalOf { .. }) {
                    return Err(Error::param("inner", "pivotal-of nests one level only"));
                }
                inner.validate()?;
                square.validate()?;
                if square.is_annulus_kind() {
                    return Err(Error::param("square", "must be a rectangle"));
                }
            }
        }
        Ok(())
    }

    /// Bounding box of everything the event depends on.
    pub fn dependency_bbox(&self) -> Rect {
        match self {
            EventSpec::Cross { region } | EventSpec::Arms { region, .. } | EventSpec::Dense { region, .. } => {
                region.bbox()
            }
            EventSpec::Circuit { region, delta } => match circuit_annulus(region, *delta) {
                Ok(a) => a.bbox(),
                Err(_) => region.bbox(),
            },
            EventSpec::PivotalOf { inner, square } => inner.dependency_bbox().union(&square.bbox()),
        }
    }

    /// Nondecreasing in the coloring (black above white).
    pub fn is_increasing(&self) -> bool {
        match self {
            EventSpec::Cross { .. } | EventSpec::Circuit { .. } | EventSpec::Dense { .. } => true,
            EventSpec::Arms { j, .. } => *j == 1,
            EventSpec::PivotalOf { .. } => false,
        }
    }
}

/// The annulus `(1 - delta) Q \ (1 - 2 delta) Q` of a square `Q`.
pub fn circuit_annulus(q: &RegionSpec, delta: f64) -> Result<RegionSpec> {
    q.validate()?;
    let RegionSpec::Rectangle { center, lambda1, lambda2 } = *q else {
        return Err(Error::param("region", "circuits need a square"));
    };
    if lambda1 != lambda2 {
        return Err(Error::param("region", "circuits need a square (lambda1 == lambda2)"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::param("delta", "must lie in (0, 1/2)"));
    }
    Ok(RegionSpec::annulus(center, (1.0 - 2.0 * delta) * lambda1, (1.0 - delta) * lambda1))
}

pub fn decompose(complex: &VoronoiComplex, coloring: &Coloring, region: &RegionSpec) -> Result<ClusterDecomposition> {
    let g = RegionGraph::new(complex, region)?;
    Ok(ClusterDecomposition::new(&g, coloring))
}

pub fn detect_cross(complex: &VoronoiComplex, coloring: &Coloring, rect: &RegionSpec) -> Result<bool> {
    EventSpec::cross(rect.clone()).validate()?;
    Ok(cross_on(&RegionGraph::new(complex, rect)?, coloring, true))
}

/// Black left-right crossing (`black = true`) or white bottom-top crossing.
pub(crate) fn cross_on(g: &RegionGraph, coloring: &Coloring, black: bool) -> bool {
    let (a, b) = if black {
        (RegionSpec::LEFT, RegionSpec::RIGHT)
    } else {
        (RegionSpec::BOTTOM, RegionSpec::TOP)
    };
    let dec = ClusterDecomposition::new(g, coloring);
    dec.clusters().iter().any(|c| c.black == black && c.touches(a) && c.touches(b))
}

/// White top-bottom crossing of a rectangle; the dual of [`detect_cross`].
pub fn detect_white_vertical_cross(complex: &VoronoiComplex, coloring: &Coloring, rect: &RegionSpec) -> Result<bool> {
    EventSpec::cross(rect.clone()).validate()?;
    Ok(cross_on(&RegionGraph::new(complex, rect)?, coloring, false))
}

pub fn detect_arms(complex: &VoronoiComplex, coloring: &Coloring, region: &RegionSpec, j: u32) -> Result<bool> {
    EventSpec::arms(region.clone(), j).validate()?;
    let g = RegionGraph::new(complex, region)?;
    Ok(arms_on(&g, coloring, j))
}

/// Arm detection on a prepared region graph (no safe-zone check).
pub fn arms_on(g: &RegionGraph, coloring: &Coloring, j: u32) -> bool {
    arms_on_shifted(g, coloring, j, 0)
}

/// Arm detection with the block threshold shifted by `shift`. Only useful to
/// check that comparisons against the brute-force oracle catch a wrong rule.
#[doc(hidden)]
pub fn arms_on_shifted(g: &RegionGraph, coloring: &Coloring, j: u32, shift: i64) -> bool {
    let dec = ClusterDecomposition::new(g, coloring);
    clusters::arms_rule(g, &dec, j, shift)
}

/// Three-valued circuit sign: `+1` black circuit and no white circuit, `-1`
/// the reverse, `0` otherwise.
pub fn detect_circuit(complex: &VoronoiComplex, coloring: &Coloring, q: &RegionSpec, delta: f64) -> Result<i8> {
    let a = circuit_annulus(q, delta)?;
    Ok(circuit_on(&RegionGraph::new(complex, &a)?, coloring))
}

pub(crate) fn circuit_on(g: &RegionGraph, coloring: &Coloring) -> i8 {
    let dec = ClusterDecomposition::new(g, coloring);
    // A black circuit exists iff no white cluster crosses radially.
    let black_circuit = !dec.clusters().iter().any(|c| !c.black && c.is_crossing());
    let white_circuit = !dec.clusters().iter().any(|c| c.black && c.is_crossing());
    match (black_circuit, white_circuit) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}

/// Number of interfaces between the inner and outer boundary of a full
/// annulus; always even.
pub fn count_interfaces(complex: &VoronoiComplex, coloring: &Coloring, region: &RegionSpec) -> Result<u32> {
    if !matches!(region, RegionSpec::Annulus { .. }) {
        return Err(Error::param("region", "interfaces are counted on full annuli"));
    }
    let g = RegionGraph::new(complex, region)?;
    Ok(interfaces_on(&g, coloring))
}

pub fn interfaces_on(g: &RegionGraph, coloring: &Coloring) -> u32 {
    ClusterDecomposition::new(g, coloring).sign_changes() as u32
}

/// Cells whose nuclei lie in the half-open square `[xmin, xmax) x [ymin, ymax)`.
pub fn cells_with_nucleus_in(complex: &VoronoiComplex, square: &Rect) -> Vec<usize> {
    (0..complex.len())
        .filter(|&i| {
            let p = complex.nucleus(i);
            p.x >= square.xmin && p.x < square.xmax && p.y >= square.ymin && p.y < square.ymax
        })
        .collect()
}

pub fn is_quenched_pivotal(
    complex: &VoronoiComplex,
    points: &PointSet,
    coloring: &Coloring,
    d: &[usize],
    inner: &EventSpec,
) -> Result<bool> {
    let ev = PreparedEvent::new(complex, points, inner, SafeZone::Check)?;
    ev.pivotal_under(coloring, d, K_MAX)
}

/// Whether [`PreparedEvent`] construction enforces the safe zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SafeZone {
    Check,
    /// Hand-built or deliberately small environments.
    Skip,
}

/// An event bound to one environment, ready to be evaluated on many
/// colorings. Owns all derived geometry.
#[derive(Clone, Debug)]
pub enum PreparedEvent {
    Cross(RegionGraph),
    Arms(RegionGraph, u32),
    Circuit(RegionGraph),
    /// Environment-measurable; fixed at preparation.
    Dense(bool),
    PivotalOf {
        inner: Box<PreparedEvent>,
        cells: Vec<usize>,
        increasing: bool,
    },
}

impl PreparedEvent {
    pub fn new(complex: &VoronoiComplex, points: &PointSet, spec: &EventSpec, zone: SafeZone) -> Result<Self> {
        spec.validate()?;
        let graph = |region: &RegionSpec| match zone {
            SafeZone::Check => RegionGraph::new(complex, region),
            SafeZone::Skip => RegionGraph::new_unchecked(complex, region),
        };
        Ok(match spec {
            EventSpec::Cross { region } => PreparedEvent::Cross(graph(region)?),
            EventSpec::Arms { region, j } => PreparedEvent::Arms(graph(region)?, *j),
            EventSpec::Circuit { region, delta } => PreparedEvent::Circuit(graph(&circuit_annulus(region, *delta)?)?),
            EventSpec::Dense { region, delta } => PreparedEvent::Dense(detect_dense(points, region, *delta)?),
            EventSpec::PivotalOf { inner, square } => PreparedEvent::PivotalOf {
                inner: Box::new(PreparedEvent::new(complex, points, inner, zone)?),
                cells: cells_with_nucleus_in(complex, &square.bbox()),
                increasing: inner.is_increasing(),
            },
        })
    }

    /// Cells whose color can matter, in increasing id order. `None` when
    /// the event does not depend on the coloring.
    pub fn relevant_cells(&self) -> Option<&[u32]> {
        match self {
            PreparedEvent::Cross(g) | PreparedEvent::Arms(g, _) | PreparedEvent::Circuit(g) => Some(g.cells()),
            PreparedEvent::Dense(_) => None,
            PreparedEvent::PivotalOf { inner, .. } => inner.relevant_cells(),
        }
    }

    /// Whether some region cell reaches the sampling window.
    pub fn has_boundary_cells(&self) -> bool {
        match self {
            PreparedEvent::Cross(g) | PreparedEvent::Arms(g, _) | PreparedEvent::Circuit(g) => g.has_boundary_cells(),
            PreparedEvent::Dense(_) => false,
            PreparedEvent::PivotalOf { inner, .. } => inner.has_boundary_cells(),
        }
    }

    pub fn holds(&self, coloring: &Coloring) -> Result<bool> {
        Ok(match self {
            PreparedEvent::Cross(g) => cross_on(g, coloring, true),
            PreparedEvent::Arms(g, j) => arms_on(g, coloring, *j),
            PreparedEvent::Circuit(g) => {
                let dec = ClusterDecomposition::new(g, coloring);
                !dec.clusters().iter().any(|c| !c.black && c.is_crossing())
            }
            PreparedEvent::Dense(v) => *v,
            PreparedEvent::PivotalOf { inner, cells, .. } => inner.pivotal_under(coloring, cells, K_MAX)?,
        })
    }

    pub fn is_increasing(&self) -> bool {
        match self {
            PreparedEvent::Cross(_) | PreparedEvent::Circuit(_) | PreparedEvent::Dense(_) => true,
            PreparedEvent::Arms(_, j) => *j == 1,
            PreparedEvent::PivotalOf { .. } => false,
        }
    }

    /// Whether this event's indicator is non-constant over recolorings of `d`.
    pub fn pivotal_under(&self, coloring: &Coloring, d: &[usize], k_max: usize) -> Result<bool> {
        let en = enumerate_recolorings(coloring, d, k_max)?;
        if en.free_cells().is_empty() {
            return Ok(false);
        }
        if let PreparedEvent::Dense(_) = self {
            return Ok(false);
        }
        let mut scratch = coloring.clone();
        if self.is_increasing() {
            let now = self.holds(coloring)?;
            let extreme = if now { 0 } else { en.size() - 1 };
            en.assign(extreme, &mut scratch);
            return Ok(self.holds(&scratch)? != now);
        }
        let mut first = None;
        for mask in 0..en.size() {
            en.assign(mask, &mut scratch);
            let v = self.holds(&scratch)?;
            match first {
                None => first = Some(v),
                Some(f) if f != v => return Ok(true),
                _ => {}
            }
        }
        Ok(false)
    }

    /// Pivotality of `d` with `d` recolored and every square's cell list
    /// supplied by the caller. Same as [`Self::pivotal_under`] with the
    /// default capacity.
    pub fn pivotal(&self, coloring: &Coloring, d: &[usize]) -> Result<bool> {
        self.pivotal_under(coloring, d, K_MAX)
    }
}

/// Evaluate a spec once on an environment and coloring.
pub fn evaluate(complex: &VoronoiComplex, points: &PointSet, coloring: &Coloring, spec: &EventSpec) -> Result<bool> {
    PreparedEvent::new(complex, points, spec, SafeZone::Check)?.holds(coloring)
}
