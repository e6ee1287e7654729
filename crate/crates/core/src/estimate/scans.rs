use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_annealed, run_annealed, Estimate, EventModel, McParams, SpecEnv, SpecModel};
use crate::coloring::Coloring;
use crate::error::{Error, Result};
use crate::events::{detect_dense, EventSpec};
use crate::geom::{sample_poisson, Point, PointSet, RegionSpec, Window};
use crate::stream::SeedPath;

/// The origin's cell lies in a black cluster reaching `boundary B_R`.
pub fn theta_spec(big_r: f64) -> EventSpec {
    EventSpec::arms(RegionSpec::annulus(Point::default(), 0.0, big_r), 1)
}

/// Annealed one-arm probability from the origin to distance `big_r`; the
/// truncated stand-in for the percolation function.
pub fn estimate_theta(p: f64, big_r: f64, params: &McParams, replicates: u64) -> Result<Estimate> {
    if !(big_r.is_finite() && big_r >= 1.0) {
        return Err(Error::param("R", "truncation radius must be at least 1"));
    }
    let mut params = *params;
    params.p = p;
    estimate_annealed(&theta_spec(big_r), &params, replicates)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLength {
    /// Smallest grid scale whose crossing interval lies above `1 - eps0`.
    pub value: f64,
    pub crossing: Estimate,
    pub eps0: f64,
    pub scan: Vec<ScalePoint>,
}

/// Black crossing of `[-2R, 2R] x [-R, R]` in the long direction.
pub fn long_crossing_spec(big_r: f64) -> EventSpec {
    EventSpec::cross(RegionSpec::rectangle(Point::default(), 2.0 * big_r, big_r))
}

/// Scan `grid` upward for the first scale whose estimated long-crossing
/// probability has its lower 95% bound at or above `1 - eps0`.
pub fn estimate_correlation_length(
    p: f64,
    eps0: f64,
    grid: &[f64],
    params: &McParams,
    replicates: u64,
) -> Result<CorrelationLength> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::param("p", "correlation length needs 1/2 < p <= 1"));
    }
    if !(eps0 > 0.0 && eps0 < 0.5) {
        return Err(Error::param("eps0", "must lie in (0, 1/2)"));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 1.0 {
        return Err(Error::param("R_grid", "must be nonempty, increasing and start at 1 or above"));
    }
    let base = params.stream;
    let mut params = *params;
    params.p = p;
    let mut scan = Vec::new();
    for (i, &r) in grid.iter().enumerate() {
        params.stream = base.child(i as u64);
        let e = estimate_annealed(&long_crossing_spec(r), &params, replicates)?;
        scan.push(ScalePoint { scale: r, estimate: e });
        if e.ci_low >= 1.0 - eps0 {
            return Ok(CorrelationLength {
                value: r,
                crossing: e,
                eps0,
                scan,
            });
        }
    }
    let last = scan.last().expect("nonempty grid");
    Err(Error::NotFound {
        last_scale: last.scale,
        last_value: last.estimate.value,
    })
}

/// One environment per replicate, colored at every `p` of a list from a
/// single set of uniforms (cell black iff `u < p`), so the colorings are
/// increasing in `p` replicate by replicate.
#[derive(Clone, Debug)]
pub struct CoupledScanModel {
    model: SpecModel,
    ps: Vec<f64>,
}

impl CoupledScanModel {
    pub fn new(spec: EventSpec, intensity: f64, ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() || ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::param("p", "need a nonempty list of values in [0, 1]"));
        }
        Ok(Self {
            model: SpecModel::new(vec![spec], intensity, 0.5)?,
            ps,
        })
    }
}

impl EventModel for CoupledScanModel {
    type Env = SpecEnv;

    fn arity(&self) -> usize {
        self.ps.len()
    }

    fn environment(&self, stream: &SeedPath) -> Result<Option<SpecEnv>> {
        self.model.environment(stream)
    }

    fn outcomes(&self, env: &SpecEnv, stream: &SeedPath, out: &mut Vec<bool>) -> Result<()> {
        let mut rng = stream.rng();
        let u: Vec<f64> = (0..env.complex.len()).map(|_| rng.random::<f64>()).collect();
        out.clear();
        for &p in &self.ps {
            let signs = u.iter().map(|&x| if x < p { 1 } else { -1 }).collect();
            out.push(env.events[0].holds(&Coloring::from_signs(signs, p)?)?);
        }
        Ok(())
    }
}

/// `theta(p, R)` for every `p` of a list on shared, coupled replicates.
pub fn estimate_theta_scan(ps: &[f64], big_r: f64, params: &McParams, replicates: u64) -> Result<(Vec<Estimate>, u64)> {
    if !(big_r.is_finite() && big_r >= 1.0) {
        return Err(Error::param("R", "truncation radius must be at least 1"));
    }
    params.validate()?;
    let model = CoupledScanModel::new(theta_spec(big_r), params.intensity, ps.to_vec())?;
    let run = run_annealed(&model, replicates, &params.stream, params.workers)?;
    Ok((run.estimates, run.discarded))
}

/// Environments sampled directly in `B_R`; the outcome is the failure of
/// `Dense_delta(B_R)`. The event only looks at nuclei inside the square, so
/// no padding is needed.
#[derive(Clone, Debug)]
pub struct DenseModel {
    big_r: f64,
    delta: f64,
    intensity: f64,
}

impl DenseModel {
    pub fn new(big_r: f64, delta: f64, intensity: f64) -> Result<Self> {
        EventSpec::Dense {
            region: RegionSpec::square(Point::default(), big_r),
            delta,
        }
        .validate()?;
        Ok(Self { big_r, delta, intensity })
    }
}

impl EventModel for DenseModel {
    type Env = PointSet;

    fn arity(&self) -> usize {
        1
    }

    fn environment(&self, stream: &SeedPath) -> Result<Option<PointSet>> {
        let r = self.big_r;
        Ok(Some(sample_poisson(Window::new(-r, -r, r, r)?, self.intensity, stream)?))
    }

    fn outcomes(&self, env: &PointSet, _stream: &SeedPath, out: &mut Vec<bool>) -> Result<()> {
        out.clear();
        out.push(!detect_dense(env, &RegionSpec::square(Point::default(), self.big_r), self.delta)?);
        Ok(())
    }
}

/// Frequency of `not Dense_delta(B_R)`.
pub fn estimate_not_dense(big_r: f64, delta: f64, params: &McParams, replicates: u64) -> Result<Estimate> {
    params.validate()?;
    let model = DenseModel::new(big_r, delta, params.intensity)?;
    Ok(run_annealed(&model, replicates, &params.stream, params.workers)?.estimates[0])
}

/// `constant * delta^-2 * exp(-(delta R)^2 / 2)`.
pub fn dense_failure_bound(big_r: f64, delta: f64, constant: f64) -> f64 {
    constant * delta.powi(-2) * (-(delta * big_r).powi(2) / 2.0).exp()
}
