use serde::{Deserialize, Serialize};

use super::Estimate;
use crate::error::{Error, Result};

/// Least-squares fit of `ln alpha(r, R)` against `ln(r / R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub r: f64,
    pub scales: Vec<f64>,
    pub log_probs: Vec<Estimate>,
    pub slope: f64,
    /// From the regression residuals.
    pub slope_std_error: f64,
    /// From the per-scale sampling errors (delta method), for comparison.
    pub slope_sampling_error: f64,
    pub intercept: f64,
}

impl ExponentFit {
    /// `|slope - target| <= tol`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }
}

/// Fit from per-scale estimates of `alpha(r, R)`.
pub fn fit_exponent_from(r: f64, scales: &[f64], estimates: &[Estimate]) -> Result<ExponentFit> {
    if scales.len() < 3 || scales.len() != estimates.len() {
        return Err(Error::param("scales", "at least three scales with one estimate each"));
    }
    if let Some((&s, _)) = scales.iter().zip(estimates).find(|(_, e)| e.value <= 0.0) {
        return Err(Error::InsufficientSamples { scale: s });
    }
    let xs: Vec<f64> = scales.iter().map(|s| (r / s).ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.value.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_std_error = (rss / (n - 2.0) / sxx).sqrt();
    let slope_sampling_error = xs
        .iter()
        .zip(estimates)
        .map(|(x, e)| ((x - xbar) / sxx * e.std_error / e.value).powi(2))
        .sum::<f64>()
        .sqrt();
    let log_probs = estimates
        .iter()
        .map(|e| Estimate::normal(e.value.ln(), e.n, e.std_error / e.value))
        .collect();
    Ok(ExponentFit {
        r,
        scales: scales.to_vec(),
        log_probs,
        slope,
        slope_std_error,
        slope_sampling_error,
        intercept,
    })
}

/// Estimate `alpha(r, R)` at each scale with `estimate_at` and fit.
pub fn fit_exponent(r: f64, scales: &[f64], mut estimate_at: impl FnMut(f64) -> Result<Estimate>) -> Result<ExponentFit> {
    if scales.len() < 3 {
        return Err(Error::param("scales", "at least three scales are required"));
    }
    let estimates = scales.iter().map(|&s| estimate_at(s)).collect::<Result<Vec<_>>>()?;
    fit_exponent_from(r, scales, &estimates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let scales = [16.0, 32.0, 64.0, 128.0];
        let est: Vec<Estimate> = scales.iter().map(|&s: &f64| Estimate::normal(3.0 * (4.0 / s).powi(2), 1000, 1e-4)).collect();
        let f = fit_exponent_from(4.0, &scales, &est).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.slope_std_error < 1e-9);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_success_names_scale() {
        let scales = [16.0, 32.0, 64.0];
        let est = [
            Estimate::proportion(10, 100),
            Estimate::proportion(3, 100),
            Estimate::proportion(0, 100),
        ];
        assert_eq!(
            fit_exponent_from(4.0, &scales, &est).unwrap_err(),
            Error::InsufficientSamples { scale: 64.0 }
        );
    }

    #[test]
    fn needs_three_scales() {
        assert!(fit_exponent(1.0, &[2.0, 4.0], |_| Ok(Estimate::proportion(1, 2))).is_err());
    }
}
