//! JSON debug dump of a complex, used for golden files and inspection.

use serde::{Deserialize, Serialize};

use super::{Rect, VoronoiComplex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDump {
    pub window: Rect,
    pub nuclei: Vec<[f64; 2]>,
    pub adjacency: Vec<Vec<u32>>,
    pub polygons: Vec<Vec<[f64; 2]>>,
    pub boundary_flags: Vec<bool>,
}

impl ComplexDump {
    pub fn new(c: &VoronoiComplex) -> Self {
        Self {
            window: *c.window().rect(),
            nuclei: c.nuclei().iter().map(|p| [p.x, p.y]).collect(),
            adjacency: (0..c.len())
                .map(|i| {
                    let mut n = c.neighbors(i).to_vec();
                    n.sort_unstable();
                    n
                })
                .collect(),
            polygons: (0..c.len()).map(|i| c.polygon(i).iter().map(|p| [p.x, p.y]).collect()).collect(),
            boundary_flags: (0..c.len()).map(|i| c.boundary_flag(i)).collect(),
        }
    }
}
