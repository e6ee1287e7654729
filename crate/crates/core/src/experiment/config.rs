use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::events::EventSpec;
use crate::geom::{Point, RegionSpec};

/// Experiment names accepted in configs.
pub const REGISTRY: [&str; 8] = [
    "cross-prob",
    "arm-prob",
    "quenched-moments",
    "efron-stein",
    "exponent-fit",
    "theta-scan",
    "correlation-length",
    "dense-check",
];

/// A config field that failed to parse or validate, with its dotted path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusKind {
    Annulus,
    HalfPlaneAnnulus,
    QuarterPlaneAnnulus,
    ComplementOfQuarterPlaneAnnulus,
}

impl AnnulusKind {
    pub fn region(self, r: f64, big_r: f64, orientation: u8) -> RegionSpec {
        let center = Point::default();
        match self {
            AnnulusKind::Annulus => RegionSpec::Annulus { center, r, big_r },
            AnnulusKind::HalfPlaneAnnulus => RegionSpec::HalfPlaneAnnulus { center, r, big_r, orientation },
            AnnulusKind::QuarterPlaneAnnulus => RegionSpec::QuarterPlaneAnnulus { center, r, big_r, orientation },
            AnnulusKind::ComplementOfQuarterPlaneAnnulus => {
                RegionSpec::ComplementOfQuarterPlaneAnnulus { center, r, big_r, orientation }
            }
        }
    }
}

fn unit_aspect() -> Vec<f64> {
    vec![1.0]
}

fn default_eps0() -> f64 {
    0.02
}

fn default_dense_constant() -> f64 {
    10.0
}

/// Black crossings of `[-aR, aR] x [-R, R]` for every scale `R` and aspect `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossGeometry {
    pub scales: Vec<f64>,
    #[serde(default = "unit_aspect")]
    pub aspects: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmGeometry {
    pub region: AnnulusKind,
    pub r: f64,
    pub scales: Vec<f64>,
    pub j: Vec<u32>,
    #[serde(default)]
    pub orientation: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchedGeometry {
    pub events: Vec<EventSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfronSteinGeometry {
    pub inner: EventSpec,
    pub mesh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentGeometry {
    pub region: AnnulusKind,
    pub r: f64,
    pub scales: Vec<f64>,
    pub j: u32,
    #[serde(default)]
    pub orientation: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGeometry {
    #[serde(rename = "R")]
    pub big_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationGeometry {
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(rename = "R_grid")]
    pub grid: Vec<f64>,
}

/// `Dense_delta(B_R)` over environments sampled in `B_R`, compared with
/// `constant * delta^-2 * exp(-(delta R)^2 / 2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseGeometry {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub delta: f64,
    #[serde(default = "default_dense_constant")]
    pub constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Geometry {
    Cross(CrossGeometry),
    Arms(ArmGeometry),
    Quenched(QuenchedGeometry),
    EfronStein(EfronSteinGeometry),
    Exponent(ExponentGeometry),
    Theta(ThetaGeometry),
    Correlation(CorrelationGeometry),
    Dense(DenseGeometry),
}

/// A parsed and validated experiment config.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub master_seed: u64,
    pub intensity: f64,
    /// One entry, or several for `theta-scan` and `correlation-length`.
    pub p: Vec<f64>,
    pub geometry: Geometry,
    pub budget: Budget,
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PField {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    master_seed: u64,
    #[serde(default = "one")]
    intensity: f64,
    #[serde(default)]
    p: Option<PField>,
    geometry: serde_json::Value,
    #[serde(default)]
    budget: Budget,
    #[serde(default = "one_worker")]
    workers: usize,
}

fn one() -> f64 {
    1.0
}

fn one_worker() -> usize {
    1
}

fn from_value<T: DeserializeOwned>(prefix: &str, v: serde_json::Value) -> ConfigResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let root = inner == "." || inner.is_empty();
        let path = match (prefix.is_empty(), root) {
            (true, true) => "config".to_string(),
            (true, false) => inner,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{inner}"),
        };
        ConfigError::new(path, e.into_inner().to_string())
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> ConfigResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "config".into() } else { path }, e.into_inner().to_string())
        })?;
        Self::from_raw(raw)
    }

    pub fn from_value(v: serde_json::Value) -> ConfigResult<Self> {
        Self::from_raw(from_value("", v)?)
    }

    fn from_raw(raw: RawConfig) -> ConfigResult<Self> {
        let name = raw.experiment.as_str();
        if !REGISTRY.contains(&name) {
            return Err(ConfigError::new(
                "experiment",
                format!("unknown experiment `{name}`; expected one of: {}", REGISTRY.join(", ")),
            ));
        }
        let g = raw.geometry;
        let geometry = match name {
            "cross-prob" => Geometry::Cross(from_value("geometry", g)?),
            "arm-prob" => Geometry::Arms(from_value("geometry", g)?),
            "quenched-moments" => Geometry::Quenched(from_value("geometry", g)?),
            "efron-stein" => Geometry::EfronStein(from_value("geometry", g)?),
            "exponent-fit" => Geometry::Exponent(from_value("geometry", g)?),
            "theta-scan" => Geometry::Theta(from_value("geometry", g)?),
            "correlation-length" => Geometry::Correlation(from_value("geometry", g)?),
            _ => Geometry::Dense(from_value("geometry", g)?),
        };
        let p = match raw.p {
            None => vec![0.5],
            Some(PField::One(p)) => vec![p],
            Some(PField::Many(ps)) => ps,
        };
        let cfg = Self {
            experiment: raw.experiment,
            master_seed: raw.master_seed,
            intensity: raw.intensity,
            p,
            geometry,
            budget: raw.budget,
            workers: raw.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> ConfigResult<()> {
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(ConfigError::new("intensity", "must be finite and positive"));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if self.p.is_empty() {
            return Err(ConfigError::new("p", "must not be empty"));
        }
        for (i, &p) in self.p.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new(format!("p[{i}]"), format!("must lie in [0, 1], got {p}")));
            }
        }
        let multi_p = matches!(self.geometry, Geometry::Theta(_) | Geometry::Correlation(_));
        if !multi_p && self.p.len() != 1 {
            return Err(ConfigError::new("p", format!("`{}` takes a single p", self.experiment)));
        }
        let uses_km = matches!(self.geometry, Geometry::Quenched(_) | Geometry::EfronStein(_));
        if uses_km {
            for (field, v) in [("K", self.budget.k), ("M", self.budget.m)] {
                match v {
                    None => return Err(ConfigError::new(format!("budget.{field}"), "required")),
                    Some(v) if v < 2 => return Err(ConfigError::new(format!("budget.{field}"), "must be at least 2")),
                    _ => {}
                }
            }
            if self.budget.replicates.is_some() {
                return Err(ConfigError::new("budget.replicates", "not used by this experiment; give K and M"));
            }
        } else {
            match self.budget.replicates {
                None => return Err(ConfigError::new("budget.replicates", "required")),
                Some(0) => return Err(ConfigError::new("budget.replicates", "must be at least 1")),
                _ => {}
            }
            if self.budget.k.is_some() || self.budget.m.is_some() {
                return Err(ConfigError::new("budget", "K and M are only used by quenched experiments"));
            }
        }
        self.validate_geometry()
    }

    fn validate_geometry(&self) -> ConfigResult<()> {
        let positive = |path: &str, xs: &[f64]| -> ConfigResult<()> {
            if xs.is_empty() {
                return Err(ConfigError::new(path, "must not be empty"));
            }
            if let Some((i, x)) = xs.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                return Err(ConfigError::new(format!("{path}[{i}]"), format!("must be finite and positive, got {x}")));
            }
            Ok(())
        };
        let spec = |path: &str, s: &EventSpec| s.validate().map_err(|e| ConfigError::new(path, e.to_string()));
        match &self.geometry {
            Geometry::Cross(g) => {
                positive("geometry.scales", &g.scales)?;
                positive("geometry.aspects", &g.aspects)?;
            }
            Geometry::Arms(g) => {
                positive("geometry.scales", &g.scales)?;
                if g.j.is_empty() || g.j.contains(&0) {
                    return Err(ConfigError::new("geometry.j", "arm counts must be at least 1"));
                }
                annulus_radii(g.r, &g.scales, g.orientation)?;
            }
            Geometry::Quenched(g) => {
                if g.events.is_empty() {
                    return Err(ConfigError::new("geometry.events", "must not be empty"));
                }
                for (i, e) in g.events.iter().enumerate() {
                    spec(&format!("geometry.events[{i}]"), e)?;
                }
            }
            Geometry::EfronStein(g) => {
                spec("geometry.inner", &g.inner)?;
                if matches!(g.inner, EventSpec::PivotalOf { .. }) {
                    return Err(ConfigError::new("geometry.inner", "must not be a pivotal event"));
                }
                positive("geometry.mesh", &[g.mesh])?;
            }
            Geometry::Exponent(g) => {
                positive("geometry.scales", &g.scales)?;
                if g.scales.len() < 3 {
                    return Err(ConfigError::new("geometry.scales", "at least three scales are required"));
                }
                if g.j == 0 {
                    return Err(ConfigError::new("geometry.j", "must be at least 1"));
                }
                annulus_radii(g.r, &g.scales, g.orientation)?;
            }
            Geometry::Theta(g) => {
                if !(g.big_r.is_finite() && g.big_r >= 1.0) {
                    return Err(ConfigError::new("geometry.R", "must be at least 1"));
                }
            }
            Geometry::Correlation(g) => {
                if !(g.eps0 > 0.0 && g.eps0 < 0.5) {
                    return Err(ConfigError::new("geometry.eps0", "must lie in (0, 1/2)"));
                }
                positive("geometry.R_grid", &g.grid)?;
                if g.grid[0] < 1.0 || g.grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::new("geometry.R_grid", "must be increasing and start at 1 or above"));
                }
                if let Some((i, p)) = self.p.iter().enumerate().find(|(_, p)| **p <= 0.5) {
                    return Err(ConfigError::new(format!("p[{i}]"), format!("correlation length needs p > 1/2, got {p}")));
                }
            }
            Geometry::Dense(g) => {
                positive("geometry.R", &[g.big_r])?;
                positive("geometry.constant", &[g.constant])?;
                if !(g.delta > 0.0 && g.delta < 1.0) {
                    return Err(ConfigError::new("geometry.delta", "must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of the config, `workers`
    /// excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn annulus_radii(r: f64, scales: &[f64], orientation: u8) -> ConfigResult<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(ConfigError::new("geometry.r", "must be finite and nonnegative"));
    }
    if let Some((i, s)) = scales.iter().enumerate().find(|(_, s)| **s < r) {
        return Err(ConfigError::new(format!("geometry.scales[{i}]"), format!("R={s} is below r={r}")));
    }
    if orientation > 3 {
        return Err(ConfigError::new("geometry.orientation", "quarter turns must be in 0..=3"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "experiment": "cross-prob",
            "master_seed": 3,
            "geometry": {"scales": [8]},
            "budget": {"replicates": 10}
        })
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_value(base()).unwrap();
        assert_eq!((c.intensity, c.p.clone(), c.workers), (1.0, vec![0.5], 1));
        assert_eq!(
            c.geometry,
            Geometry::Cross(CrossGeometry {
                scales: vec![8.0],
                aspects: vec![1.0]
            })
        );
    }

    #[test]
    fn zero_replicates_names_the_field() {
        let mut v = base();
        v["budget"]["replicates"] = 0.into();
        assert_eq!(ExperimentConfig::from_value(v).unwrap_err().path, "budget.replicates");
    }

    #[test]
    fn unknown_experiment_lists_registry() {
        let mut v = base();
        v["experiment"] = "cross-probability".into();
        let e = ExperimentConfig::from_value(v).unwrap_err();
        assert_eq!(e.path, "experiment");
        assert!(REGISTRY.iter().all(|n| e.message.contains(n)));
    }

    #[test]
    fn unknown_and_mistyped_fields_carry_paths() {
        let mut v = base();
        v["geometry"]["scale"] = 3.into();
        assert_eq!(ExperimentConfig::from_value(v).unwrap_err().path, "geometry.scale");
        let mut v = base();
        v["budget"]["replicates"] = "many".into();
        assert_eq!(ExperimentConfig::from_value(v).unwrap_err().path, "budget.replicates");
        let mut v = base();
        v["geometry"]["scales"] = serde_json::json!([8, "x"]);
        assert_eq!(ExperimentConfig::from_value(v).unwrap_err().path, "geometry.scales[1]");
        let text = r#"{"experiment": "cross-prob", "master_seed": -1, "geometry": {}, "budget": {}}"#;
        assert_eq!(ExperimentConfig::from_json(text).unwrap_err().path, "master_seed");
    }

    #[test]
    fn hash_ignores_workers() {
        let a = ExperimentConfig::from_value(base()).unwrap();
        let mut v = base();
        v["workers"] = 8.into();
        let b = ExperimentConfig::from_value(v).unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut v = base();
        v["master_seed"] = 4.into();
        assert_ne!(a.hash(), ExperimentConfig::from_value(v).unwrap().hash());
    }

    #[test]
    fn quenched_budget_needs_k_and_m() {
        let v = serde_json::json!({
            "experiment": "quenched-moments",
            "master_seed": 1,
            "geometry": {"events": [{"kind": "cross", "region": {"kind": "rectangle", "lambda1": 4, "lambda2": 4}}]},
            "budget": {"K": 10}
        });
        assert_eq!(ExperimentConfig::from_value(v).unwrap_err().path, "budget.M");
    }
}
