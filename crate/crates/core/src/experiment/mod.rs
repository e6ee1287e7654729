//! Config-driven experiments, result records and the acceptance suites.

mod config;
mod run;
mod verify;

pub use config::{
    AnnulusKind, ArmGeometry, Budget, ConfigError, CorrelationGeometry, CrossGeometry, DenseGeometry,
    EfronSteinGeometry, ExperimentConfig, ExponentGeometry, Geometry, QuenchedGeometry, ThetaGeometry, REGISTRY,
};
pub use run::{first_environment, nondecreasing_within, run, Param, ResultRecord, ResultRow, CODE_VERSION};
pub use verify::{verify, Criterion, Gate, Report, Suite, Verdict};

use serde::Serialize;

use crate::error::Error;

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit status: 2 for config problems, 3 for capacity, geometry
    /// and sampling failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Runtime(Error::Parameter { .. }) => 2,
            RunError::Runtime(_) | RunError::Io(_) => 3,
        }
    }

    /// Machine-readable form printed by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Out<'a> {
            kind: &'a str,
            exit_code: i32,
            #[serde(skip_serializing_if = "Option::is_none")]
            path: Option<String>,
            message: String,
        }
        let (kind, path, message) = match self {
            RunError::Config(c) => ("config", Some(c.path.clone()), c.message.clone()),
            RunError::Runtime(Error::Parameter { name, reason }) => ("config", Some(name.clone()), reason.clone()),
            RunError::Runtime(e) => (runtime_kind(e), None, e.to_string()),
            RunError::Io(m) => ("io", None, m.clone()),
        };
        serde_json::to_value(Out {
            kind,
            exit_code: self.exit_code(),
            path,
            message,
        })
        .expect("error serializes")
    }
}

fn runtime_kind(e: &Error) -> &'static str {
    match e {
        Error::Capacity { .. } => "capacity",
        Error::SafeZone { .. } => "safe-zone",
        Error::DegenerateGeometry(_) => "degenerate-geometry",
        Error::AllDiscarded { .. } => "all-discarded",
        Error::InsufficientSamples { .. } => "insufficient-samples",
        Error::NotFound { .. } => "not-found",
        Error::Index { .. } => "index",
        Error::Parameter { .. } => "config",
    }
}
