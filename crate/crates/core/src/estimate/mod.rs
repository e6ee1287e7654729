//! Monte Carlo estimators: annealed frequencies, quenched moments,
//! Efron-Stein sides, exponent fits, theta scans and correlation lengths.

mod annealed;
mod efron_stein;
mod exponent;
mod model;
mod quenched;
mod scans;

pub use annealed::{estimate_annealed, run_annealed, AnnealedRun};
pub use efron_stein::{efron_stein_sides, run_efron_stein, EfronStein, PivotalModel, SpecPivotalModel, SquaresEnv};
pub use exponent::{fit_exponent, fit_exponent_from, ExponentFit};
pub use model::{par_map, EventModel, McParams, SpecEnv, SpecModel};
pub use quenched::{estimate_quenched_moments, run_quenched, QuenchedMoments, QuenchedRun};
pub use scans::{
    dense_failure_bound, estimate_correlation_length, estimate_not_dense, estimate_theta, estimate_theta_scan,
    long_crossing_spec, theta_spec, CorrelationLength, CoupledScanModel, DenseModel, ScalePoint,
};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::distribution::{Beta, ContinuousCDF};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Below this many successes or failures, frequencies get exact binomial
/// intervals.
pub const EXACT_CI_BELOW: u64 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub n: u64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub std_error: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub ci_half_width: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub ci_low: f64,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub ci_high: f64,
}

impl Estimate {
    /// Normal-approximation interval `value +- 1.96 se`.
    pub fn normal(value: f64, n: u64, std_error: f64) -> Self {
        let hw = Z95 * std_error;
        Self {
            value,
            n,
            std_error,
            ci_half_width: hw,
            ci_low: value - hw,
            ci_high: value + hw,
        }
    }

    /// Frequency of `successes` among `n` trials. Clopper-Pearson interval
    /// when successes or failures are few, normal interval otherwise.
    pub fn proportion(successes: u64, n: u64) -> Self {
        assert!(n >= 1 && successes <= n);
        let v = successes as f64 / n as f64;
        let se = (v * (1.0 - v) / n as f64).sqrt();
        if successes.min(n - successes) >= EXACT_CI_BELOW {
            return Self::normal(v, n, se);
        }
        let (lo, hi) = clopper_pearson(successes, n, 0.05);
        Self {
            value: v,
            n,
            std_error: se,
            ci_half_width: (v - lo).max(hi - v),
            ci_low: lo,
            ci_high: hi,
        }
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Exact two-sided binomial interval at level `1 - alpha`.
pub fn clopper_pearson(x: u64, n: u64, alpha: f64) -> (f64, f64) {
    let lo = if x == 0 {
        0.0
    } else {
        Beta::new(x as f64, (n - x + 1) as f64)
            .expect("positive shape")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if x == n {
        1.0
    } else {
        Beta::new((x + 1) as f64, (n - x) as f64)
            .expect("positive shape")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Sum by recursive halving; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Standard error of a sample mean (equal to its jackknife standard error).
pub fn mean_std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&dev) / ((n - 1) as f64 * n as f64)).sqrt()
}

/// Jackknife standard error from leave-one-out replicates.
pub fn jackknife_std_error(loo: &[f64]) -> f64 {
    let n = loo.len();
    if n < 2 || loo.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    let m = mean(loo);
    let dev: Vec<f64> = loo.iter().map(|x| (x - m) * (x - m)).collect();
    ((n - 1) as f64 / n as f64 * pairwise_sum(&dev)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_regimes() {
        let e = Estimate::proportion(50, 100);
        assert_eq!(e.value, 0.5);
        assert!((e.ci_half_width - 1.96 * 0.05).abs() < 1e-12);
        let e = Estimate::proportion(100, 100);
        assert_eq!((e.value, e.std_error, e.ci_high), (1.0, 0.0, 1.0));
        assert!((e.ci_low - 0.9638).abs() < 1e-3);
        let e = Estimate::proportion(0, 100);
        assert_eq!(e.ci_low, 0.0);
        // Rule of three: upper bound close to 3/n for zero successes.
        assert!((e.ci_high - 0.0362).abs() < 1e-3);
    }

    #[test]
    fn clopper_pearson_reference_values() {
        // Reference values from the Beta quantile definition, cross-checked
        // against tabulated exact intervals.
        let (lo, hi) = clopper_pearson(5, 20, 0.05);
        assert!((lo - 0.0866).abs() < 1e-3, "{lo}");
        assert!((hi - 0.4910).abs() < 1e-3, "{hi}");
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let n = xs.len() as f64;
        let total: f64 = xs.iter().sum();
        let loo: Vec<f64> = xs.iter().map(|x| (total - x) / (n - 1.0)).collect();
        assert!((jackknife_std_error(&loo) - mean_std_error(&xs)).abs() < 1e-12);
    }

    #[test]
    fn infinite_errors_serialize_as_null() {
        let e = Estimate::normal(0.3, 2, f64::INFINITY);
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.contains("\"std_error\":null"));
        let back: Estimate = serde_json::from_str(&s).unwrap();
        assert!(back.std_error.is_infinite());
    }
}
