use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{ExperimentConfig, Geometry};
use super::RunError;
use crate::error::Error;
use crate::estimate::{
    dense_failure_bound, estimate_correlation_length, estimate_not_dense, estimate_theta_scan, fit_exponent_from, long_crossing_spec,
    run_annealed, run_efron_stein, run_quenched, Estimate, McParams, SpecModel, SpecPivotalModel, theta_spec,
};
use crate::events::EventSpec;
use crate::geom::{Point, RegionSpec, VoronoiComplex};
use crate::stream::SeedPath;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

/// One estimated quantity at one parameter point; one CSV line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub params: Vec<Param>,
    pub quantity: String,
    pub estimate: Estimate,
}

impl ResultRow {
    fn new(params: &[(&str, f64)], quantity: &str, estimate: Estimate) -> Self {
        Self {
            params: params.iter().map(|&(n, v)| Param { name: n.to_string(), value: v }).collect(),
            quantity: quantity.to_string(),
            estimate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    pub master_seed: u64,
    pub rows: Vec<ResultRow>,
    /// Experiment-specific derived values (fits, bounds, verdict inputs).
    pub summary: serde_json::Value,
    pub discarded: u64,
    pub wall_time_s: f64,
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

impl ResultRecord {
    /// Rows as CSV: parameter columns, `quantity`, then the estimate fields.
    /// Column order is fixed by the experiment; the wall time is left out so
    /// identical configs give identical files.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let names: Vec<&str> = self
            .rows
            .first()
            .map(|r| r.params.iter().map(|p| p.name.as_str()).collect())
            .unwrap_or_default();
        for n in &names {
            s.push_str(n);
            s.push(',');
        }
        s.push_str("quantity,value,n,std_error,ci_half_width,ci_low,ci_high\n");
        for r in &self.rows {
            for p in &r.params {
                let _ = write!(s, "{},", p.value);
            }
            let e = &r.estimate;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.quantity, e.value, e.n, e.std_error, e.ci_half_width, e.ci_low, e.ci_high
            );
        }
        s
    }

    /// Estimate of `quantity` at the row whose parameters match `params`.
    pub fn find(&self, quantity: &str, params: &[(&str, f64)]) -> Option<&Estimate> {
        self.rows
            .iter()
            .find(|r| {
                r.quantity == quantity
                    && params
                        .iter()
                        .all(|&(n, v)| r.params.iter().any(|p| p.name == n && p.value == v))
            })
            .map(|r| &r.estimate)
    }

    /// Write `<experiment>-<hash prefix>.json` and `.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let stem = format!("{}-{}", self.experiment, &self.config_hash[..12]);
        let json_path = dir.join(format!("{stem}.json"));
        let csv_path = dir.join(format!("{stem}.csv"));
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(&json_path, text + "\n")?;
        std::fs::write(&csv_path, self.to_csv())?;
        Ok((json_path, csv_path))
    }
}

/// Run an experiment. Sub-run `k` (a scale, an aspect family, ...) of a
/// config draws replicate `i` from
/// `root(master_seed).child_named(experiment).child(k).child(i)`.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord, RunError> {
    let start = Instant::now();
    let stream = SeedPath::root(config.master_seed).child_named(&config.experiment);
    let workers = config.workers;
    let p = config.p[0];
    let mc = |k: u64| McParams::new(config.intensity, p, stream.child(k)).with_workers(workers);
    let replicates = config.budget.replicates.unwrap_or(0);
    let (k_env, m_col) = (config.budget.k.unwrap_or(0), config.budget.m.unwrap_or(0));
    let mut rows = Vec::new();
    let mut discarded = 0u64;
    let summary;
    match &config.geometry {
        Geometry::Cross(g) => {
            for (k, &r) in g.scales.iter().enumerate() {
                let specs = g
                    .aspects
                    .iter()
                    .map(|&a| EventSpec::cross(RegionSpec::rectangle(Point::default(), a * r, r)))
                    .collect();
                let model = SpecModel::new(specs, config.intensity, p)?;
                let run = run_annealed(&model, replicates, &stream.child(k as u64), workers)?;
                discarded += run.discarded;
                for (a, e) in g.aspects.iter().zip(run.estimates) {
                    rows.push(ResultRow::new(&[("R", r), ("aspect", *a)], "cross", e));
                }
            }
            summary = json!({});
        }
        Geometry::Arms(g) => {
            for (k, &big_r) in g.scales.iter().enumerate() {
                let region = g.region.region(g.r, big_r, g.orientation);
                let specs = g.j.iter().map(|&j| EventSpec::arms(region.clone(), j)).collect();
                let model = SpecModel::new(specs, config.intensity, p)?;
                let run = run_annealed(&model, replicates, &stream.child(k as u64), workers)?;
                discarded += run.discarded;
                for (&j, e) in g.j.iter().zip(run.estimates) {
                    rows.push(ResultRow::new(&[("r", g.r), ("R", big_r), ("j", j as f64)], "alpha", e));
                }
            }
            summary = json!({ "region": g.region });
        }
        Geometry::Quenched(g) => {
            let model = SpecModel::new(g.events.clone(), config.intensity, p)?;
            let run = run_quenched(&model, k_env, m_col, &stream.child(0), workers)?;
            discarded += run.discarded;
            let mut per_event = Vec::new();
            for (i, q) in run.moments.iter().enumerate() {
                let at = [("event", i as f64)];
                rows.push(ResultRow::new(&at, "mean_q", q.mean_q));
                rows.push(ResultRow::new(&at, "second_moment", q.second_moment));
                rows.push(ResultRow::new(&at, "annealed_square", q.annealed_square));
                rows.push(ResultRow::new(&at, "variance", q.variance));
                per_event.push(json!({
                    "event": g.events[i],
                    "moment_ratio": finite_or_null(q.moment_ratio()),
                    "negative_variance": q.negative_variance,
                }));
            }
            summary = json!({ "K": k_env, "M": m_col, "events": per_event });
        }
        Geometry::EfronStein(g) => {
            let model = SpecPivotalModel::new(&g.inner, g.mesh, config.intensity, p)?;
            let es = run_efron_stein(&model, k_env, m_col, &stream.child(0), workers)?;
            discarded += es.discarded;
            rows.push(ResultRow::new(&[("mesh", g.mesh)], "lhs", es.lhs));
            rows.push(ResultRow::new(&[("mesh", g.mesh)], "rhs", es.rhs));
            rows.push(ResultRow::new(&[("mesh", g.mesh)], "mean_q", es.moments.mean_q));
            summary = json!({
                "excess_sigmas": finite_or_null(es.excess_sigmas()),
                "mean_squares": es.mean_squares,
                "inner": g.inner,
            });
        }
        Geometry::Exponent(g) => {
            let mut ests = Vec::new();
            for (k, &big_r) in g.scales.iter().enumerate() {
                let spec = EventSpec::arms(g.region.region(g.r, big_r, g.orientation), g.j);
                let model = SpecModel::new(vec![spec], config.intensity, p)?;
                let run = run_annealed(&model, replicates, &stream.child(k as u64), workers)?;
                discarded += run.discarded;
                rows.push(ResultRow::new(&[("r", g.r), ("R", big_r)], "alpha", run.estimates[0]));
                ests.push(run.estimates[0]);
            }
            let fit = fit_exponent_from(g.r, &g.scales, &ests)?;
            summary = json!({
                "region": g.region,
                "j": g.j,
                "slope": fit.slope,
                "slope_std_error": finite_or_null(fit.slope_std_error),
                "slope_sampling_error": finite_or_null(fit.slope_sampling_error),
                "intercept": fit.intercept,
            });
        }
        Geometry::Theta(g) => {
            let (ests, d) = estimate_theta_scan(&config.p, g.big_r, &mc(0), replicates)?;
            discarded += d;
            for (&p, e) in config.p.iter().zip(&ests) {
                rows.push(ResultRow::new(&[("p", p), ("R", g.big_r)], "theta", *e));
            }
            summary = json!({
                "truncation_radius": g.big_r,
                "nondecreasing_within_3sigma": nondecreasing_within(&ests, 3.0),
            });
        }
        Geometry::Correlation(g) => {
            let mut per_p = Vec::new();
            for (k, &pp) in config.p.iter().enumerate() {
                let params = McParams::new(config.intensity, pp, stream.child(k as u64)).with_workers(workers);
                match estimate_correlation_length(pp, g.eps0, &g.grid, &params, replicates) {
                    Ok(l) => {
                        for s in &l.scan {
                            rows.push(ResultRow::new(&[("p", pp), ("R", s.scale)], "cross_2R_R", s.estimate));
                        }
                        per_p.push(json!({ "p": pp, "L": l.value }));
                    }
                    Err(Error::NotFound { last_scale, last_value }) => {
                        per_p.push(json!({
                            "p": pp,
                            "L": null,
                            "error": format!("grid exhausted; last scale {last_scale} gave {last_value}"),
                        }));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            summary = json!({ "eps0": g.eps0, "R_grid": g.grid, "correlation_length": per_p });
        }
        Geometry::Dense(g) => {
            let e = estimate_not_dense(g.big_r, g.delta, &mc(0), replicates)?;
            rows.push(ResultRow::new(&[("R", g.big_r), ("delta", g.delta)], "not_dense", e));
            let bound = dense_failure_bound(g.big_r, g.delta, g.constant);
            summary = json!({ "bound": bound, "constant": g.constant, "within_bound": e.value <= bound });
        }
    }
    Ok(ResultRecord {
        experiment: config.experiment.clone(),
        config_hash: config.hash(),
        code_version: CODE_VERSION.to_string(),
        master_seed: config.master_seed,
        rows,
        summary,
        discarded,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Events of sub-run 0 of a config.
fn first_specs(config: &ExperimentConfig) -> Vec<EventSpec> {
    let c = Point::default();
    match &config.geometry {
        Geometry::Cross(g) => g
            .aspects
            .iter()
            .map(|&a| EventSpec::cross(RegionSpec::rectangle(c, a * g.scales[0], g.scales[0])))
            .collect(),
        Geometry::Arms(g) => g
            .j
            .iter()
            .map(|&j| EventSpec::arms(g.region.region(g.r, g.scales[0], g.orientation), j))
            .collect(),
        Geometry::Quenched(g) => g.events.clone(),
        Geometry::EfronStein(g) => vec![g.inner.clone()],
        Geometry::Exponent(g) => vec![EventSpec::arms(g.region.region(g.r, g.scales[0], g.orientation), g.j)],
        Geometry::Theta(g) => vec![theta_spec(g.big_r)],
        Geometry::Correlation(g) => vec![long_crossing_spec(g.grid[0])],
        Geometry::Dense(g) => vec![EventSpec::cross(RegionSpec::square(c, g.big_r))],
    }
}

/// Voronoi complex of replicate 0 of sub-run 0, in the window its events
/// need. Dense configs use the window of the square `B_R`.
pub fn first_environment(config: &ExperimentConfig) -> Result<VoronoiComplex, RunError> {
    let model = SpecModel::new(first_specs(config), config.intensity, config.p[0])?;
    let stream = SeedPath::root(config.master_seed)
        .child_named(&config.experiment)
        .child(0)
        .child(0)
        .child(0);
    Ok(model.prepare(&stream)?.complex)
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// No later estimate falls below an earlier one by more than `z` combined
/// standard errors.
pub fn nondecreasing_within(ests: &[Estimate], z: f64) -> bool {
    ests.iter().enumerate().all(|(i, a)| {
        ests[i + 1..]
            .iter()
            .all(|b| b.value >= a.value - z * a.std_error.hypot(b.std_error))
    })
}
