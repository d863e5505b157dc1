// SPDX-License-Identifier: MIT OR Apache-2.0

//! Comparison methods: the epidemic-alternative likelihood scan and the
//! Benjamini–Hochberg step-up procedure on per-index p-values.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::Cluster;
use crate::window::PrefixSums;

/// Maximizer of the epidemic statistic; the elevated region is `(i_hat, j_hat]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpidemicFit {
    pub l1: f64,
    pub i_hat: usize,
    pub j_hat: usize,
}

impl EpidemicFit {
    /// Indices `i_hat + 1..=j_hat` as a half-open cluster.
    pub fn cluster(&self) -> Cluster {
        Cluster {
            start: self.i_hat + 1,
            end: self.j_hat + 1,
        }
    }

    /// Break-points in first-index-of-new-regime form.
    pub fn breakpoints(&self) -> [usize; 2] {
        [self.i_hat + 1, self.j_hat + 1]
    }
}

pub const DEFAULT_DELTA0: f64 = 1.0;

/// `max_{1≤i<j≤p} { Σ_{l=i+1}^{j} X_l − ((j−i)/p)·ΣX − ½δ₀(j−i) }`, by exact
/// enumeration of all pairs. Ties go to the lexicographically smallest `(i, j)`.
pub fn yao_l1(x: &[f64], delta0: f64) -> Result<EpidemicFit> {
    let p = x.len();
    if p < 2 {
        return Err(Error::TooShort { p, min: 2 });
    }
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::invalid("delta0", format!("{delta0} must be > 0")));
    }
    let prefix = PrefixSums::new(x.iter().copied());
    let total = prefix.range(0, p);
    let pf = p as f64;
    let mut best = EpidemicFit {
        l1: f64::NEG_INFINITY,
        i_hat: 1,
        j_hat: 2,
    };
    for i in 1..p {
        for j in i + 1..=p {
            let w = (j - i) as f64;
            let v = prefix.range(i, j) - (w / pf) * total - 0.5 * delta0 * w;
            if v > best.l1 {
                best = EpidemicFit {
                    l1: v,
                    i_hat: i,
                    j_hat: j,
                };
            }
        }
    }
    Ok(best)
}

/// Benjamini–Hochberg step-up at level `alpha`. Returns rejected 1-based
/// indices in increasing order.
pub fn bh_procedure(p_values: &[f64], alpha: f64) -> Result<Vec<usize>> {
    if let Some(i) = p_values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("p_values", format!("entry {} is {}", i + 1, p_values[i])));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0,1)")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let cut = (1..=m)
        .rev()
        .find(|&i| p_values[order[i - 1]] <= i as f64 * alpha / m as f64);
    let mut rejected: Vec<usize> = match cut {
        Some(c) => order[..c].iter().map(|&i| i + 1).collect(),
        None => Vec::new(),
    };
    rejected.sort_unstable();
    Ok(rejected)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal")
}

fn check_sigma(sigma_hat: f64) -> Result<()> {
    if sigma_hat > 0.0 && sigma_hat.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("sigma_hat", format!("{sigma_hat} must be > 0")))
    }
}

/// `p_j = 1 − Φ(X_j/σ̂)`.
pub fn one_sided_pvalues(x: &[f64], sigma_hat: f64) -> Result<Vec<f64>> {
    check_sigma(sigma_hat)?;
    let n = std_normal();
    Ok(x.iter().map(|v| n.sf(v / sigma_hat)).collect())
}

/// `p_j = 2(1 − Φ(|X_j|/σ̂))`.
pub fn two_sided_pvalues(x: &[f64], sigma_hat: f64) -> Result<Vec<f64>> {
    check_sigma(sigma_hat)?;
    let n = std_normal();
    Ok(x.iter().map(|v| (2.0 * n.sf(v.abs() / sigma_hat)).min(1.0)).collect())
}
