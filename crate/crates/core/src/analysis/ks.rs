//! Kolmogorov–Smirnov statistics with the asymptotic Kolmogorov p-value.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::summarize;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted_finite(sample: &[f64], name: &str) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::fault(format!("KS test on empty sample `{name}`")));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::fault(format!("KS test on non-finite values in `{name}`")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup |F_x − F_y|` over all sample points, ties handled by stepping both
/// empirical CDFs past equal values together.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> Result<f64> {
    let x = sorted_finite(x, "x")?;
    let y = sorted_finite(y, "y")?;
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let z = x[i].min(y[j]);
        while i < x.len() && x[i] <= z {
            i += 1;
        }
        while j < y.len() && y[j] <= z {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        // Jacobi-theta form converges fast for small λ.
        let w = PI * PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=6)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * w).exp()
            })
            .sum();
        1.0 - (2.0 * PI).sqrt() / lambda * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let k = k as f64;
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// Two-sided two-sample test; p-value from the asymptotic distribution with
/// effective size `n·m / (n + m)`.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    let statistic = ks_statistic(x, y)?;
    let (n, m) = (x.len() as f64, y.len() as f64);
    let effective = n * m / (n + m);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(effective.sqrt() * statistic),
    })
}

/// One-sample test against a normal with the sample's own mean and sd.
///
/// No Lilliefors correction, so the p-value is optimistic. A constant sample
/// (sd = 0) yields statistic 0 and p = 1.
pub fn ks_normality(x: &[f64]) -> Result<KsResult> {
    let sorted = sorted_finite(x, "x")?;
    let s = summarize(&sorted)?;
    if s.sd == 0.0 {
        return Ok(KsResult {
            statistic: 0.0,
            p_value: 1.0,
        });
    }
    let normal = Normal::new(s.mean, s.sd).map_err(|e| Error::fault(e.to_string()))?;
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let z = sorted[i];
        let below = i as f64 / n;
        while i < sorted.len() && sorted[i] <= z {
            i += 1;
        }
        let f = normal.cdf(z);
        d = d.max((i as f64 / n - f).abs()).max((f - below).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}
