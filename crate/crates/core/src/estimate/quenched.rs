use serde::{Deserialize, Serialize};

use super::{jackknife_std_error, mean, mean_std_error, pairwise_sum, par_map, Estimate, EventModel, McParams, SpecModel};
use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::stream::SeedPath;

/// Moments of the quenched probability `P^eta[A]` over environments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedMoments {
    /// `E[P^eta[A]]`, the annealed probability.
    pub mean_q: Estimate,
    /// `E[P^eta[A]^2]`.
    pub second_moment: Estimate,
    /// Unbiased estimate of `E[P^eta[A]]^2` from distinct environment pairs.
    pub annealed_square: Estimate,
    /// `second_moment - annealed_square`; may be slightly negative.
    pub variance: Estimate,
    /// Set when the variance lies more than three standard errors below 0.
    pub negative_variance: bool,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "M")]
    pub m: u64,
}

impl QuenchedMoments {
    /// Moments from per-environment success counts out of `m` colorings.
    pub fn from_counts(counts: &[u64], m: u64) -> Result<Self> {
        let k = counts.len();
        if k < 2 {
            return Err(Error::param("K", "at least two environments are required"));
        }
        if m < 2 {
            return Err(Error::param("M", "at least two colorings per environment are required"));
        }
        let mf = m as f64;
        let kf = k as f64;
        let x: Vec<f64> = counts.iter().map(|&s| s as f64 / mf).collect();
        let y: Vec<f64> = counts
            .iter()
            .map(|&s| (s as f64) * (s as f64 - 1.0) / (mf * (mf - 1.0)))
            .collect();
        let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (t, q, sy) = (pairwise_sum(&x), pairwise_sum(&x2), pairwise_sum(&y));
        let u = (t * t - q) / (kf * (kf - 1.0));
        let second = sy / kf;
        let (loo_u, loo_v): (Vec<f64>, Vec<f64>) = (0..k)
            .map(|i| {
                if k < 3 {
                    return (f64::INFINITY, f64::INFINITY);
                }
                let ti = t - x[i];
                let qi = q - x2[i];
                let ui = (ti * ti - qi) / ((kf - 1.0) * (kf - 2.0));
                (ui, (sy - y[i]) / (kf - 1.0) - ui)
            })
            .unzip();
        let n = k as u64;
        let variance = Estimate::normal(second - u, n, jackknife_std_error(&loo_v));
        Ok(Self {
            mean_q: Estimate::normal(mean(&x), n, mean_std_error(&x)),
            second_moment: Estimate::normal(second, n, mean_std_error(&y)),
            annealed_square: Estimate::normal(u, n, jackknife_std_error(&loo_u)),
            negative_variance: variance.value < -3.0 * variance.std_error,
            variance,
            k: n,
            m,
        })
    }

    /// `second_moment / annealed_square`, the squared ratio of the quenched
    /// and annealed arm probabilities.
    pub fn moment_ratio(&self) -> f64 {
        self.second_moment.value / self.annealed_square.value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedRun {
    pub moments: Vec<QuenchedMoments>,
    /// Success counts, one row per kept environment, one column per event.
    pub counts: Vec<Vec<u64>>,
    pub discarded: u64,
}

/// `k` environments, `m` colorings each. Environment `i` uses
/// `stream.child(i).child(0)`; its coloring `c` uses
/// `stream.child(i).child(1).child(c)`.
pub fn run_quenched<M: EventModel>(model: &M, k: u64, m: u64, stream: &SeedPath, workers: usize) -> Result<QuenchedRun> {
    if k < 2 {
        return Err(Error::param("K", "at least two environments are required"));
    }
    if m < 2 {
        return Err(Error::param("M", "at least two colorings per environment are required"));
    }
    let per: Vec<Option<Vec<u64>>> = par_map(workers, k, |i| {
        let s = stream.child(i);
        let Some(env) = model.environment(&s.child(0))? else {
            return Ok(None);
        };
        let cs = s.child(1);
        let mut counts = vec![0u64; model.arity()];
        let mut out = Vec::with_capacity(model.arity());
        for c in 0..m {
            out.clear();
            model.outcomes(&env, &cs.child(c), &mut out)?;
            for (n, &b) in counts.iter_mut().zip(&out) {
                *n += u64::from(b);
            }
        }
        Ok(Some(counts))
    })?;
    let counts: Vec<Vec<u64>> = per.into_iter().flatten().collect();
    let discarded = k - counts.len() as u64;
    if counts.len() < 2 {
        return Err(Error::AllDiscarded { discarded });
    }
    let moments = (0..model.arity())
        .map(|e| QuenchedMoments::from_counts(&counts.iter().map(|row| row[e]).collect::<Vec<_>>(), m))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuenchedRun {
        moments,
        counts,
        discarded,
    })
}

pub fn estimate_quenched_moments(spec: &EventSpec, params: &McParams, k: u64, m: u64) -> Result<QuenchedMoments> {
    params.validate()?;
    let model = SpecModel::new(vec![spec.clone()], params.intensity, params.p)?;
    Ok(run_quenched(&model, k, m, &params.stream, params.workers)?.moments.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_counts() {
        let q = QuenchedMoments::from_counts(&[10, 10, 10, 10], 10).unwrap();
        assert_eq!(q.mean_q.value, 1.0);
        assert_eq!(q.second_moment.value, 1.0);
        assert!(q.variance.value.abs() < 1e-15);
        assert!(!q.negative_variance);
    }

    #[test]
    fn two_environments_have_infinite_error() {
        let q = QuenchedMoments::from_counts(&[3, 5], 10).unwrap();
        assert!(q.variance.std_error.is_infinite());
        assert!(q.mean_q.std_error.is_finite());
    }

    #[test]
    fn rejects_small_budgets() {
        assert!(QuenchedMoments::from_counts(&[1], 4).is_err());
        assert!(QuenchedMoments::from_counts(&[1, 0], 1).is_err());
    }

    #[test]
    fn unbiased_pieces_by_hand() {
        // X = (0.5, 0.25, 1.0); pairs: 0.125 + 0.5 + 0.25 over 3 pairs.
        let q = QuenchedMoments::from_counts(&[2, 1, 4], 4).unwrap();
        assert!((q.annealed_square.value - 0.875 / 3.0).abs() < 1e-15);
        // S(S-1)/(M(M-1)): 2/12, 0, 12/12.
        assert!((q.second_moment.value - (2.0 / 12.0 + 1.0) / 3.0).abs() < 1e-15);
    }
}
