// SPDX-License-Identifier: MIT OR Apache-2.0

//! Windowed statistics for panels of independent realizations.
//!
//! Each pooled statistic is a window sum of a per-locus numerator divided by
//! the square root of a window sum of per-locus scales. Passing true or
//! estimated scales selects the oracle or the plug-in version through the
//! same code path.

use serde::{Deserialize, Serialize};

use crate::calibration::DENOMINATOR_FLOOR;
use crate::error::{Error, Result};
use crate::model::Panel;
use crate::variance::{column_means, omega_hat, per_locus_variance, u_stat_w};
use crate::window::{check_window, PrefixSums, StatKind, StatSeries};

/// Per-locus summaries of a panel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelStats {
    pub n: usize,
    pub mu_hat: Vec<f64>,
    pub sigma2_hat: Vec<f64>,
    pub w: Vec<f64>,
    /// Present when `n ≥ 4`.
    pub omega_hat: Option<Vec<f64>>,
}

impl PanelStats {
    pub fn compute(panel: &Panel) -> Result<Self> {
        Ok(PanelStats {
            n: panel.n(),
            mu_hat: column_means(panel),
            sigma2_hat: per_locus_variance(panel)?,
            w: u_stat_w(panel)?,
            omega_hat: if panel.n() >= 4 { Some(omega_hat(panel)?) } else { None },
        })
    }

    pub fn p(&self) -> usize {
        self.mu_hat.len()
    }

    pub fn omega(&self) -> Result<&[f64]> {
        self.omega_hat.as_deref().ok_or(Error::TooFewRealizations {
            need: 4,
            got: self.n,
        })
    }
}

fn normalized_windows(
    numerators: &[f64],
    scales: &[f64],
    factor: f64,
    k: usize,
    kind: StatKind,
) -> Result<StatSeries> {
    let p = numerators.len();
    check_window(k, p)?;
    if scales.len() != p {
        return Err(Error::Misaligned(format!(
            "{} scales for {} loci",
            scales.len(),
            p
        )));
    }
    let num = PrefixSums::new(numerators.iter().copied()).window_sums(k);
    let den = PrefixSums::new(scales.iter().copied()).window_sums(k);
    let mut values = Vec::with_capacity(num.len());
    for (j, (a, d)) in num.iter().zip(&den).enumerate() {
        if d.is_nan() || *d < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateWindow { index: j, value: *d });
        }
        values.push(factor * a / d.sqrt());
    }
    Ok(StatSeries::right(kind, k, values))
}

/// `Σ_{l=j+1}^{j+k} √n μ̂_l / (Σ_{l=j+1}^{j+k} σ_l²)^{1/2}`.
///
/// With true variances this is `R★`, with per-locus estimates `R̂`; `kind`
/// labels which one.
pub fn pooled_mean(mu_hat: &[f64], variances: &[f64], n: usize, k: usize, kind: StatKind) -> Result<StatSeries> {
    normalized_windows(mu_hat, variances, (n as f64).sqrt(), k, kind)
}

pub fn r_star(mu_hat: &[f64], sigma2: &[f64], n: usize, k: usize) -> Result<StatSeries> {
    pooled_mean(mu_hat, sigma2, n, k, StatKind::PooledMean)
}

pub fn r_hat(stats: &PanelStats, k: usize) -> Result<StatSeries> {
    pooled_mean(&stats.mu_hat, &stats.sigma2_hat, stats.n, k, StatKind::PooledMeanPlugin)
}

/// `R♭_j = Σ √n μ̂_l / √k`.
pub fn r_flat(mu_hat: &[f64], n: usize, k: usize) -> Result<StatSeries> {
    let sums = crate::window::window_sums(mu_hat, k)?;
    let c = (n as f64).sqrt() / (k as f64).sqrt();
    Ok(StatSeries::right(
        StatKind::PooledMeanUnscaled,
        k,
        sums.into_iter().map(|s| c * s).collect(),
    ))
}

/// `√(n(n−1)/2)·Σ W_l / (Σ σ_l⁴)^{1/2}`; `fourth` holds `σ_l⁴` or `ω̂_l`.
pub fn r4(w: &[f64], fourth: &[f64], n: usize, k: usize, kind: StatKind) -> Result<StatSeries> {
    let factor = (n as f64 * (n as f64 - 1.0) / 2.0).sqrt();
    normalized_windows(w, fourth, factor, k, kind)
}

/// `R‡_j = √(n(n−1)/2)·Σ W_l / √k`.
pub fn r_ddagger(w: &[f64], n: usize, k: usize) -> Result<StatSeries> {
    let sums = crate::window::window_sums(w, k)?;
    let c = (n as f64 * (n as f64 - 1.0) / 2.0).sqrt() / (k as f64).sqrt();
    Ok(StatSeries::right(
        StatKind::UStatUnscaled,
        k,
        sums.into_iter().map(|s| c * s).collect(),
    ))
}
