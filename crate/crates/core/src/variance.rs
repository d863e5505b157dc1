// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nuisance-parameter estimators that stay consistent when an unknown
//! minority of the sequence carries signal.
//!
//! Single realization: order statistics of moving-window mean squares give
//! `σ̂²`, and order statistics of windowed fourth powers of first differences
//! give `ν̂ = 2κ² + 8σ⁴`, from which `κ̂²` follows. Multiple realizations:
//! per-locus unbiased variances, their block sums, and U-statistic estimates
//! of `μ_j²` and `σ_j⁴` computed from power sums in O(n) per locus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Panel;
use crate::window::{check_window, PrefixSums};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub sigma2_hat: f64,
    pub kappa2_hat: Option<f64>,
    pub nu_hat: Option<f64>,
    /// `κ̂²` hit the floor.
    pub kappa_clamped: bool,
    pub m: usize,
    pub order_index: usize,
}

impl VarianceEstimate {
    /// `σ̂²_(r)` only.
    pub fn sigma_only(x: &[f64], m: usize, order_index: Option<usize>) -> Result<Self> {
        let (sigma2_hat, order_index) = order_stat_of_windows(x.iter().map(|v| v * v), m, order_index)?;
        Ok(VarianceEstimate {
            sigma2_hat,
            kappa2_hat: None,
            nu_hat: None,
            kappa_clamped: false,
            m,
            order_index,
        })
    }

    /// `σ̂²_(r)`, `ν̂_(r)` and `κ̂² = ν̂/2 − 4σ̂⁴` (clamped).
    pub fn with_kappa(x: &[f64], m: usize, order_index: Option<usize>) -> Result<Self> {
        let mut est = Self::sigma_only(x, m, order_index)?;
        let nu = nu_order_stat(x, m, order_index)?;
        let kappa = kappa2_hat(nu, est.sigma2_hat, None);
        est.nu_hat = Some(nu);
        est.kappa2_hat = Some(kappa.value);
        est.kappa_clamped = kappa.clamped;
        Ok(est)
    }

    pub fn sigma_hat(&self) -> f64 {
        self.sigma2_hat.sqrt()
    }
}

/// Default order index: the lower median `⌊count/2⌋`, but at least 1.
pub fn default_order_index(count: usize) -> usize {
    (count / 2).max(1)
}

/// `order_index`-th smallest (1-based) of the `m`-window means of `values`.
fn order_stat_of_windows<I>(values: I, m: usize, order_index: Option<usize>) -> Result<(f64, usize)>
where
    I: IntoIterator<Item = f64>,
{
    let prefix = PrefixSums::new(values);
    check_window(m, prefix.len())?;
    let count = prefix.len() - m + 1;
    let max = default_order_index(count);
    let r = order_index.unwrap_or(max);
    if r == 0 || r > max {
        return Err(Error::OrderIndexOutOfRange { index: r, max });
    }
    let mf = m as f64;
    let mut means: Vec<f64> = (0..count).map(|i| prefix.range(i, i + m) / mf).collect();
    let (_, nth, _) = means.select_nth_unstable_by(r - 1, f64::total_cmp);
    // Window means of nonnegative terms can round a hair below zero.
    Ok((nth.max(0.0), r))
}

/// `σ̂²_(r)`: the `r`-th smallest of `σ̂²_i = m⁻¹ Σ_{j=i}^{i+m−1} X_j²`,
/// `i = 1..p′`, `p′ = p − m + 1`. `r` defaults to `⌊p′/2⌋` and may not
/// exceed it (at least 1).
pub fn sigma2_order_stat(x: &[f64], m: usize, order_index: Option<usize>) -> Result<f64> {
    Ok(order_stat_of_windows(x.iter().map(|v| v * v), m, order_index)?.0)
}

/// `ν̂_(r)`: the `r`-th smallest of `ν̂_i = m⁻¹ Σ_{j=i}^{i+m−1} (X_j − X_{j−1})⁴`,
/// `i = 2..p − m + 1`.
pub fn nu_order_stat(x: &[f64], m: usize, order_index: Option<usize>) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort { p: x.len(), min: 2 });
    }
    let diffs = x.windows(2).map(|w| (w[1] - w[0]).powi(4));
    Ok(order_stat_of_windows(diffs, m, order_index)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa2 {
    pub value: f64,
    pub clamped: bool,
}

/// `κ̂² = ν̂/2 − 4σ̂⁴`, clamped below at `floor` (default `10⁻⁶·σ̂⁴`).
pub fn kappa2_hat(nu_hat: f64, sigma2_hat: f64, floor: Option<f64>) -> Kappa2 {
    let s4 = sigma2_hat * sigma2_hat;
    let floor = floor.unwrap_or(1e-6 * s4);
    let raw = nu_hat / 2.0 - 4.0 * s4;
    if raw > floor {
        Kappa2 {
            value: raw,
            clamped: false,
        }
    } else {
        Kappa2 {
            value: floor,
            clamped: true,
        }
    }
}

fn require_rows(panel: &Panel, need: usize) -> Result<()> {
    if panel.n() < need {
        Err(Error::TooFewRealizations {
            need,
            got: panel.n(),
        })
    } else {
        Ok(())
    }
}

/// Column means `μ̂_j`.
pub fn column_means(panel: &Panel) -> Vec<f64> {
    let n = panel.n() as f64;
    panel.columns().map(|c| c.iter().sum::<f64>() / n).collect()
}

/// Unbiased per-locus variances `σ̂²_j = (n−1)⁻¹ Σ_i (Y_ij − μ̂_j)²`.
pub fn per_locus_variance(panel: &Panel) -> Result<Vec<f64>> {
    require_rows(panel, 2)?;
    let n = panel.n() as f64;
    Ok(panel
        .columns()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            c.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .collect())
}

/// Block sums `v̂_j = Σ_{l=j+1}^{j+k} σ̂²_l`, `j = 0..=p − k`.
pub fn block_variance_sums(sigma2: &[f64], k: usize) -> Result<Vec<f64>> {
    crate::window::window_sums(sigma2, k)
}

/// `W_j = (S₁² − S₂) / (n(n−1))`, the unbiased U-statistic for `μ_j²`.
pub fn u_stat_w(panel: &Panel) -> Result<Vec<f64>> {
    require_rows(panel, 2)?;
    let n = panel.n() as f64;
    Ok(panel
        .columns()
        .map(|c| {
            let (s1, s2) = c.iter().fold((0.0, 0.0), |(a, b), y| (a + y, b + y * y));
            (s1 * s1 - s2) / (n * (n - 1.0))
        })
        .collect())
}

/// `ω̂_j`, the unbiased U-statistic for `σ_j⁴`, via power sums
/// `S_l = Σ_i Y_ij^l`:
///
/// `ω̂ = [(n−1)(4S₃S₁ − nS₄ − 3S₂²) + (nS₂ − S₁²)²] / [n(n−1)(n−2)(n−3)]`.
///
/// The estimator depends on pairwise differences only, so columns are
/// centered first to limit cancellation. Values can be negative for small `n`.
pub fn omega_hat(panel: &Panel) -> Result<Vec<f64>> {
    require_rows(panel, 4)?;
    Ok(panel.columns().map(omega_hat_column).collect())
}

pub(crate) fn omega_hat_column(c: &[f64]) -> f64 {
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for y in c {
        let d = y - mean;
        let d2 = d * d;
        s1 += d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let num = (n - 1.0) * (4.0 * s3 * s1 - n * s4 - 3.0 * s2 * s2) + (n * s2 - s1 * s1).powi(2);
    num / (n * (n - 1.0) * (n - 2.0) * (n - 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Definition of `ω̂` as a sum over ordered tuples of distinct indices.
    fn omega_brute(c: &[f64]) -> f64 {
        let n = c.len();
        let mut total = 0.0;
        for i in 0..n {
            for i2 in 0..n {
                for h in 0..n {
                    for h2 in 0..n {
                        let idx = [i, i2, h, h2];
                        let distinct = (0..4).all(|a| (a + 1..4).all(|b| idx[a] != idx[b]));
                        if distinct {
                            total += (c[i] - c[i2]).powi(2) * (c[h] - c[h2]).powi(2);
                        }
                    }
                }
            }
        }
        let nf = n as f64;
        0.25 * total / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
    }

    fn w_pairwise(c: &[f64]) -> f64 {
        let n = c.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += c[i] * c[j];
            }
        }
        2.0 * s / (n as f64 * (n as f64 - 1.0))
    }

    fn one_column(c: &[f64]) -> Panel {
        Panel::from_columns(c.len(), 1, c.to_vec()).unwrap_or_else(|_| {
            // Single-locus panels fail the p ≥ 2 invariant; duplicate the column.
            let mut d = c.to_vec();
            d.extend_from_slice(c);
            Panel::from_columns(c.len(), 2, d).unwrap()
        })
    }

    #[test]
    fn sigma_order_stat_examples() {
        // Window means of squares: {2.5, 4.0}.
        assert_eq!(sigma2_order_stat(&[1.0, 2.0, 2.0], 2, Some(1)).unwrap(), 2.5);
        let x = [0.5, -1.5, 2.0, 0.25];
        let ms = x.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert_eq!(sigma2_order_stat(&x, 4, None).unwrap(), ms);
        assert!(matches!(
            sigma2_order_stat(&[1.0, 2.0, 2.0, 1.0], 2, Some(2)),
            Err(Error::OrderIndexOutOfRange { index: 2, max: 1 })
        ));
    }

    #[test]
    fn nu_order_stat_examples() {
        assert_eq!(nu_order_stat(&[0.0, 1.0, 3.0], 2, None).unwrap(), 8.5);
        assert_eq!(nu_order_stat(&[4.2; 50], 5, None).unwrap(), 0.0);
    }

    #[test]
    fn kappa_examples() {
        let k = kappa2_hat(12.0, 1.0, None);
        assert_eq!(k, Kappa2 { value: 2.0, clamped: false });
        let k = kappa2_hat(8.0, 1.0, None);
        assert!(k.clamped);
        assert_eq!(k.value, 1e-6);
        // Exact inverse of ν = 2κ² + 8σ⁴ for dyadic inputs.
        let (kappa2, s2) = (0.75, 0.5);
        let nu = 2.0 * kappa2 + 8.0 * s2 * s2;
        assert_eq!(kappa2_hat(nu, s2, None).value, kappa2);
    }

    #[test]
    fn per_locus_examples() {
        let panel = Panel::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        assert_eq!(per_locus_variance(&panel).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn per_locus_unbiased() {
        let sigma = 1.7;
        let z = gaussian(3 * 100_000, 11);
        let panel = Panel::from_columns(3, 100_000, z.iter().map(|v| v * sigma).collect()).unwrap();
        let v = per_locus_variance(&panel).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean / (sigma * sigma) - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn block_sum_examples() {
        assert_eq!(block_variance_sums(&[1.0, 2.0, 3.0], 2).unwrap(), vec![3.0, 5.0]);
        assert_eq!(block_variance_sums(&[1.0; 7], 3).unwrap(), vec![3.0; 5]);
        let s = gaussian(300, 3);
        let fast = block_variance_sums(&s, 17).unwrap();
        for (j, f) in fast.iter().enumerate() {
            let naive: f64 = s[j..j + 17].iter().sum();
            assert!((f - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_examples() {
        let w = omega_hat(&one_column(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((w[0] - 13.0 / 6.0).abs() < 1e-12);
        assert!((omega_brute(&[1.0, 2.0, 3.0, 4.0]) - 52.0 / 24.0).abs() < 1e-12);
        assert_eq!(omega_hat(&one_column(&[3.5; 6])).unwrap()[0], 0.0);
        assert!(matches!(
            omega_hat(&one_column(&[1.0, 2.0, 3.0])),
            Err(Error::TooFewRealizations { need: 4, got: 3 })
        ));
    }

    #[test]
    fn w_examples() {
        let w = u_stat_w(&one_column(&[1.0, 2.0, 3.0])).unwrap();
        assert!((w[0] - 11.0 / 3.0).abs() < 1e-12);
        assert!((w_pairwise(&[1.0, 2.0, 3.0]) - 11.0 / 3.0).abs() < 1e-12);
        assert_eq!(u_stat_w(&one_column(&[1.5; 5])).unwrap()[0], 2.25);
    }

    #[test]
    fn w_unbiased_for_zero_mean() {
        let n = 3;
        let cols = 100_000;
        let panel = Panel::from_columns(n, cols, gaussian(n * cols, 5)).unwrap();
        let w = u_stat_w(&panel).unwrap();
        let mean = w.iter().sum::<f64>() / cols as f64;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (cols as f64 - 1.0);
        let se = (var / cols as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn omega_unbiased_for_sigma4() {
        let (n, cols, sigma) = (6, 100_000, 1.3f64);
        let z: Vec<f64> = gaussian(n * cols, 9).into_iter().map(|v| v * sigma).collect();
        let panel = Panel::from_columns(n, cols, z).unwrap();
        let w = omega_hat(&panel).unwrap();
        let mean = w.iter().sum::<f64>() / cols as f64;
        assert!((mean / sigma.powi(4) - 1.0).abs() < 0.02, "{mean}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn omega_closed_form_matches_definition(
            n in 4usize..=8,
            col in prop::collection::vec(-3.0f64..3.0, 8),
        ) {
            let c = &col[..n];
            let fast = omega_hat_column(c);
            let slow = omega_brute(c);
            prop_assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1e-12), "{} vs {}", fast, slow);
        }

        #[test]
        fn w_moment_formula_matches_pairs(
            n in 2usize..=8,
            col in prop::collection::vec(-3.0f64..3.0, 8),
        ) {
            let c = &col[..n];
            let fast = u_stat_w(&one_column(c)).unwrap()[0];
            prop_assert!((fast - w_pairwise(c)).abs() < 1e-12);
        }

        #[test]
        fn sigma_scale_equivariant(
            x in prop::collection::vec(-4.0f64..4.0, 10..120),
            e in -3i32..4,
        ) {
            // Powers of two scale without rounding.
            let c = 2f64.powi(e);
            let y: Vec<f64> = x.iter().map(|v| v * c).collect();
            let m = 5.min(x.len());
            let a = sigma2_order_stat(&x, m, None).unwrap();
            let b = sigma2_order_stat(&y, m, None).unwrap();
            prop_assert_eq!(b, c * c * a);
        }
    }
}
