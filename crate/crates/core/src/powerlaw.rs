//! Continuous power-law tail fitting: maximum-likelihood exponent for each
//! candidate lower cutoff, with the cutoff chosen by minimum
//! Kolmogorov-Smirnov distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MIN_TAIL: usize = 50;

/// A fitted tail `p(x) ∝ x^-alpha` for `x >= x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: f64,
    pub ks: f64,
    pub n_tail: usize,
}

impl PowerLawFit {
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.x_min {
            0.0
        } else {
            1.0 - (x / self.x_min).powf(1.0 - self.alpha)
        }
    }
}

/// Audit-log entry for one fitted feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub feature: String,
    pub alpha: f64,
    pub x_min: f64,
    pub ks: f64,
    pub n_tail: usize,
}

impl FitRecord {
    pub fn new(feature: impl Into<String>, fit: &PowerLawFit) -> Self {
        Self {
            feature: feature.into(),
            alpha: fit.alpha,
            x_min: fit.x_min,
            ks: fit.ks,
            n_tail: fit.n_tail,
        }
    }

    pub fn fit(&self) -> PowerLawFit {
        PowerLawFit {
            alpha: self.alpha,
            x_min: self.x_min,
            ks: self.ks,
            n_tail: self.n_tail,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fit record serializes")
    }
}

/// Maximum-likelihood exponent of the continuous power law above `x_min`,
/// or `None` when every tail value equals `x_min`.
pub fn mle_alpha(tail: &[f64], x_min: f64) -> Option<f64> {
    let log_sum: f64 = tail.iter().map(|&x| (x / x_min).ln()).sum();
    (log_sum > 0.0).then(|| 1.0 + tail.len() as f64 / log_sum)
}

/// KS distance between the empirical CDF of `tail` and the fitted CDF.
///
/// The empirical CDF is right-continuous and is compared on both sides of
/// each distinct sample value.
pub fn ks_distance(tail: &[f64], fit: &PowerLawFit) -> Result<f64> {
    if tail.is_empty() {
        return Err(Error::InvalidArgument("KS distance of an empty tail".into()));
    }
    if tail.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("tail must be sorted ascending".into()));
    }
    if tail[0] < fit.x_min {
        return Err(Error::InvalidArgument(format!(
            "tail value {} below x_min {}",
            tail[0], fit.x_min
        )));
    }
    Ok(ks_sorted(tail, fit))
}

fn ks_sorted(tail: &[f64], fit: &PowerLawFit) -> f64 {
    let n = tail.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < tail.len() {
        let x = tail[i];
        let mut j = i + 1;
        while j < tail.len() && tail[j] == x {
            j += 1;
        }
        let model = fit.cdf(x);
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((below - model).abs()).max((at - model).abs());
        i = j;
    }
    d
}

/// Fits a power-law tail to the positive entries of `values`.
///
/// Every distinct positive value is a candidate cutoff provided at least
/// `min_tail` samples lie at or above it. The candidate with the smallest KS
/// distance wins; ties go to the smaller cutoff. Zeros and negatives are
/// ignored.
pub fn fit_power_law(values: &[f64], min_tail: usize) -> Result<PowerLawFit> {
    let min_tail = min_tail.max(1);
    let mut xs: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    if xs.len() < min_tail {
        return Err(Error::Fit(format!(
            "{} positive values, need at least {min_tail}",
            xs.len()
        )));
    }
    xs.sort_by(f64::total_cmp);
    if xs[0] == xs[xs.len() - 1] {
        return Err(Error::DegenerateDistribution);
    }

    let starts: Vec<usize> = (0..xs.len())
        .filter(|&i| (i == 0 || xs[i] != xs[i - 1]) && xs.len() - i >= min_tail)
        .collect();

    let best = starts
        .par_iter()
        .filter_map(|&i| {
            let tail = &xs[i..];
            let x_min = xs[i];
            let alpha = mle_alpha(tail, x_min)?;
            let mut fit = PowerLawFit {
                alpha,
                x_min,
                ks: 0.0,
                n_tail: tail.len(),
            };
            fit.ks = ks_sorted(tail, &fit);
            Some(fit)
        })
        .reduce_with(|a, b| {
            if b.ks < a.ks || (b.ks == a.ks && b.x_min < a.x_min) {
                b
            } else {
                a
            }
        });

    // The smallest positive value always qualifies and is non-degenerate
    // here, so a fit exists; fall back to it defensively anyway.
    match best {
        Some(fit) => Ok(fit),
        None => {
            let alpha = mle_alpha(&xs, xs[0]).ok_or(Error::DegenerateDistribution)?;
            let mut fit = PowerLawFit {
                alpha,
                x_min: xs[0],
                ks: 0.0,
                n_tail: xs.len(),
            };
            fit.ks = ks_sorted(&xs, &fit);
            Ok(fit)
        }
    }
}
