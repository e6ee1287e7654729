use serde::{Deserialize, Serialize};

use super::{mean, mean_std_error, par_map, Estimate, EventModel, McParams, QuenchedMoments, SpecEnv, SpecModel};
use crate::coloring::{color, K_MAX};
use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::stream::SeedPath;

/// An event on random environments together with a partition of the plane
/// into squares whose pivotality is probed on every coloring.
pub trait PivotalModel: Sync {
    type Env: Send;

    fn environment(&self, stream: &SeedPath) -> Result<Option<Self::Env>>;

    fn num_squares(&self, env: &Self::Env) -> usize;

    /// Draw a coloring; return the event indicator and write, per square,
    /// whether recoloring that square's cells can change the event.
    fn evaluate(&self, env: &Self::Env, stream: &SeedPath, pivotal: &mut [bool]) -> Result<bool>;
}

/// The squares `[a rho, (a+1) rho) x [b rho, (b+1) rho)` covering an event's
/// region padded by one mesh.
#[derive(Clone, Debug)]
pub struct SpecPivotalModel {
    model: SpecModel,
    mesh: f64,
    k_max: usize,
}

pub struct SquaresEnv {
    env: SpecEnv,
    /// Relevant cells of each probed square; squares without any are dropped
    /// because they can never be pivotal.
    squares: Vec<Vec<usize>>,
}

impl SpecPivotalModel {
    pub fn new(inner: &EventSpec, mesh: f64, intensity: f64, p: f64) -> Result<Self> {
        if matches!(inner, EventSpec::PivotalOf { .. }) {
            return Err(Error::param("inner", "must not itself be a pivotal event"));
        }
        if !(mesh.is_finite() && mesh > 0.0) {
            return Err(Error::param("mesh", "must be finite and positive"));
        }
        Ok(Self {
            model: SpecModel::new(vec![inner.clone()], intensity, p)?,
            mesh,
            k_max: K_MAX,
        })
    }
}

impl PivotalModel for SpecPivotalModel {
    type Env = SquaresEnv;

    fn environment(&self, stream: &SeedPath) -> Result<Option<SquaresEnv>> {
        let Some(env) = self.model.environment(stream)? else {
            return Ok(None);
        };
        let ev = &env.events[0];
        let Some(relevant) = ev.relevant_cells() else {
            return Ok(Some(SquaresEnv { env, squares: Vec::new() }));
        };
        let rho = self.mesh;
        let bb = self.model.specs()[0].dependency_bbox().grow(rho);
        let (a0, a1) = ((bb.xmin / rho).floor() as i64, (bb.xmax / rho).ceil() as i64);
        let (b0, b1) = ((bb.ymin / rho).floor() as i64, (bb.ymax / rho).ceil() as i64);
        let cols = (a1 - a0) as usize;
        let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cols * (b1 - b0) as usize];
        for &c in relevant {
            let p = env.complex.nucleus(c as usize);
            let (a, b) = ((p.x / rho).floor() as i64, (p.y / rho).floor() as i64);
            if (a0..a1).contains(&a) && (b0..b1).contains(&b) {
                grid[(b - b0) as usize * cols + (a - a0) as usize].push(c as usize);
            }
        }
        let squares: Vec<Vec<usize>> = grid.into_iter().filter(|s| !s.is_empty()).collect();
        if let Some(big) = squares.iter().find(|s| s.len() > self.k_max) {
            return Err(Error::Capacity {
                size: big.len(),
                limit: self.k_max,
            });
        }
        Ok(Some(SquaresEnv { env, squares }))
    }

    fn num_squares(&self, env: &SquaresEnv) -> usize {
        env.squares.len()
    }

    fn evaluate(&self, env: &SquaresEnv, stream: &SeedPath, pivotal: &mut [bool]) -> Result<bool> {
        let ev = &env.env.events[0];
        let coloring = color(&env.env.complex, self.model.p(), stream)?;
        let now = ev.holds(&coloring)?;
        let mut scratch = coloring.clone();
        for (slot, cells) in pivotal.iter_mut().zip(&env.squares) {
            *slot = if ev.is_increasing() {
                for &c in cells {
                    scratch.set(c, !now);
                }
                let flipped = ev.holds(&scratch)? != now;
                for &c in cells {
                    scratch.set(c, coloring.is_black(c));
                }
                flipped
            } else {
                ev.pivotal_under(&coloring, cells, self.k_max)?
            };
        }
        Ok(now)
    }
}

/// Both sides of `Var(P^eta[E]) <= sum_S E[P^eta[Piv_S(E)]^2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfronStein {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub moments: QuenchedMoments,
    /// Mean number of probed squares per environment.
    pub mean_squares: f64,
    pub discarded: u64,
}

impl EfronStein {
    /// `lhs - rhs` in units of the combined standard error.
    pub fn excess_sigmas(&self) -> f64 {
        let se = self.lhs.std_error.hypot(self.rhs.std_error);
        (self.lhs.value - self.rhs.value) / se
    }
}

pub fn run_efron_stein<P: PivotalModel>(model: &P, k: u64, m: u64, stream: &SeedPath, workers: usize) -> Result<EfronStein> {
    if k < 2 || m < 2 {
        return Err(Error::param("K", "K >= 2 and M >= 2 are required"));
    }
    let mf = m as f64;
    let per: Vec<Option<(u64, f64, usize)>> = par_map(workers, k, |i| {
        let s = stream.child(i);
        let Some(env) = model.environment(&s.child(0))? else {
            return Ok(None);
        };
        let n_sq = model.num_squares(&env);
        let mut piv = vec![false; n_sq];
        let mut t = vec![0u64; n_sq];
        let mut hits = 0u64;
        let cs = s.child(1);
        for c in 0..m {
            hits += u64::from(model.evaluate(&env, &cs.child(c), &mut piv)?);
            for (n, &b) in t.iter_mut().zip(&piv) {
                *n += u64::from(b);
            }
        }
        let terms: Vec<f64> = t.iter().map(|&x| x as f64 * (x as f64 - 1.0) / (mf * (mf - 1.0))).collect();
        Ok(Some((hits, super::pairwise_sum(&terms), n_sq)))
    })?;
    let kept: Vec<(u64, f64, usize)> = per.into_iter().flatten().collect();
    let discarded = k - kept.len() as u64;
    if kept.len() < 2 {
        return Err(Error::AllDiscarded { discarded });
    }
    let counts: Vec<u64> = kept.iter().map(|x| x.0).collect();
    let rhs_terms: Vec<f64> = kept.iter().map(|x| x.1).collect();
    let squares: Vec<f64> = kept.iter().map(|x| x.2 as f64).collect();
    let moments = QuenchedMoments::from_counts(&counts, m)?;
    Ok(EfronStein {
        lhs: moments.variance,
        rhs: Estimate::normal(mean(&rhs_terms), kept.len() as u64, mean_std_error(&rhs_terms)),
        moments,
        mean_squares: mean(&squares),
        discarded,
    })
}

/// Efron-Stein sides for a spec event on a grid of mesh `mesh`.
pub fn efron_stein_sides(inner: &EventSpec, mesh: f64, params: &McParams, k: u64, m: u64) -> Result<EfronStein> {
    params.validate()?;
    let model = SpecPivotalModel::new(inner, mesh, params.intensity, params.p)?;
    run_efron_stein(&model, k, m, &params.stream, params.workers)
}
