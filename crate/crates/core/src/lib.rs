//! Critical planar Voronoi percolation: Poisson environments, exact Voronoi
//! complexes, event detection on region-clipped cell graphs, and nested
//! quenched/annealed Monte Carlo estimators.

pub mod coloring;
pub mod error;
pub mod estimate;
pub mod events;
pub mod experiment;
pub mod geom;
pub mod oracle;
pub mod stream;

pub use error::{Error, Result};
pub use stream::SeedPath;
