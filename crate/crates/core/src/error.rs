use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric or structural parameter is outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    /// Too few points, or all points collinear.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A region reaches into the padding band of the sampling window.
    #[error("region {region:?} leaves the safe zone {safe_zone:?}")]
    SafeZone { region: [f64; 4], safe_zone: [f64; 4] },

    #[error("cell index {index} out of range (complex has {len} cells)")]
    Index { index: usize, len: usize },

    /// Exhaustive recoloring was requested over more cells than allowed.
    #[error("recoloring set of {size} cells exceeds the limit of {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("no successes at scale {scale}; raise the replicate budget")]
    InsufficientSamples { scale: f64 },

    #[error("crossing threshold never reached on the grid; last scale {last_scale} gave {last_value}")]
    NotFound { last_scale: f64, last_value: f64 },

    /// Every environment of a run was discarded.
    #[error("all {discarded} environments were discarded (cells leaked to the window boundary)")]
    AllDiscarded { discarded: u64 },
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
