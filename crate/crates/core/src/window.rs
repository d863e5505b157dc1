// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sliding-window statistics in O(p) via compensated prefix sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which windowed statistic a [`StatSeries`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatKind {
    /// `R°_j = k⁻¹ Σ X`, the one-sided window mean.
    WindowMean,
    /// `R†_j = k⁻¹ Σ (X² − σ²)`, the two-sided centered square.
    CenteredSquare,
    /// `R★_j`, pooled mean normalized by the true block variance.
    PooledMean,
    /// `R̂_j`, pooled mean normalized by the estimated block variance.
    PooledMeanPlugin,
    /// `R♭_j = Σ √n μ̂ / √k`, used only for locating break-points.
    PooledMeanUnscaled,
    /// `R_{j,4}`, U-statistic sum normalized by the true `Σ σ⁴`.
    UStat,
    /// `R*_{j,4}`, U-statistic sum normalized by `Σ ω̂`.
    UStatPlugin,
    /// `R‡_j`, U-statistic sum over `√k`, used only for locating.
    UStatUnscaled,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::WindowMean => "window_mean",
            StatKind::CenteredSquare => "centered_square",
            StatKind::PooledMean => "pooled_mean",
            StatKind::PooledMeanPlugin => "pooled_mean_plugin",
            StatKind::PooledMeanUnscaled => "pooled_mean_unscaled",
            StatKind::UStat => "ustat",
            StatKind::UStatPlugin => "ustat_plugin",
            StatKind::UStatUnscaled => "ustat_unscaled",
        }
    }
}

/// A windowed statistic over the index range `offset..offset + len`.
///
/// Right statistics start at `j = 0` and end at `j = p − k`; their left
/// counterparts `L_j = R_{j−k}` live on `j = k..=p − k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSeries {
    pub kind: StatKind,
    pub left: bool,
    pub k: usize,
    pub offset: usize,
    pub values: Vec<f64>,
}

impl StatSeries {
    pub fn right(kind: StatKind, k: usize, values: Vec<f64>) -> Self {
        StatSeries {
            kind,
            left: false,
            k,
            offset: 0,
            values,
        }
    }

    /// Value at statistic index `j`, if defined.
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(self.offset)
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn at(&self, j: usize) -> f64 {
        self.values[j - self.offset]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last defined index, inclusive.
    pub fn last_index(&self) -> usize {
        self.offset + self.values.len() - 1
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn name(&self) -> String {
        if self.left {
            format!("left_{}", self.kind.name())
        } else {
            self.kind.name().to_string()
        }
    }
}

/// Prefix sums kept as a (sum, compensation) pair so differences recover
/// the low-order bits lost over very long sequences.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSums {
    pub fn new<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let iter = values.into_iter();
        let (lower, _) = iter.size_hint();
        let mut hi = Vec::with_capacity(lower + 1);
        let mut lo = Vec::with_capacity(lower + 1);
        hi.push(0.0);
        lo.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for x in iter {
            // Neumaier's variant: also correct when |x| > |sum|.
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            hi.push(sum);
            lo.push(comp);
        }
        PrefixSums { hi, lo }
    }

    /// Number of summed values.
    pub fn len(&self) -> usize {
        self.hi.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of values `a..b` (0-based, half-open).
    #[inline]
    pub fn range(&self, a: usize, b: usize) -> f64 {
        (self.hi[b] - self.hi[a]) + (self.lo[b] - self.lo[a])
    }

    /// All `len − k + 1` sums of `k` consecutive values.
    pub fn window_sums(&self, k: usize) -> Vec<f64> {
        (0..=self.len() - k).map(|j| self.range(j, j + k)).collect()
    }
}

pub(crate) fn check_window(k: usize, p: usize) -> Result<()> {
    if k == 0 || k > p {
        Err(Error::WindowOutOfRange { k, max: p })
    } else {
        Ok(())
    }
}

/// Sums of `k` consecutive values: `out[j] = Σ_{l=j+1}^{j+k} x_l`.
pub fn window_sums(x: &[f64], k: usize) -> Result<Vec<f64>> {
    check_window(k, x.len())?;
    Ok(PrefixSums::new(x.iter().copied()).window_sums(k))
}

/// `R°_j = k⁻¹ Σ_{l=j+1}^{j+k} X_l` for `j = 0..=p − k`.
pub fn sliding_mean(x: &[f64], k: usize) -> Result<StatSeries> {
    let kf = k as f64;
    let sums = window_sums(x, k)?;
    Ok(StatSeries::right(
        StatKind::WindowMean,
        k,
        sums.into_iter().map(|s| s / kf).collect(),
    ))
}

/// `R†_j = k⁻¹ Σ_{l=j+1}^{j+k} (X_l² − σ²)`.
pub fn sliding_centered_square(x: &[f64], k: usize, sigma2: f64) -> Result<StatSeries> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid("sigma2", format!("{sigma2} must be > 0")));
    }
    check_window(k, x.len())?;
    let kf = k as f64;
    let sums = PrefixSums::new(x.iter().map(|v| v * v - sigma2)).window_sums(k);
    Ok(StatSeries::right(
        StatKind::CenteredSquare,
        k,
        sums.into_iter().map(|s| s / kf).collect(),
    ))
}

/// `L_j = R_{j−k}` on the common domain `j = k..=p − k`.
pub fn left_series(r: &StatSeries) -> StatSeries {
    debug_assert!(!r.left && r.offset == 0);
    let k = r.k;
    // R has p − k + 1 entries; L keeps R[0..=p − 2k].
    let keep = r.values.len().saturating_sub(k);
    StatSeries {
        kind: r.kind,
        left: true,
        k,
        offset: k,
        values: r.values[..keep].to_vec(),
    }
}

/// Right statistic restricted to the common domain `j = k..=p − k`.
pub fn right_on_common(r: &StatSeries) -> StatSeries {
    let k = r.k;
    let end = r.values.len().saturating_sub(k);
    StatSeries {
        kind: r.kind,
        left: false,
        k,
        offset: k,
        values: r.values[k..k + end].to_vec(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformScan {
    /// Maximizing window length `m̂`.
    pub m_hat: usize,
    /// `max_m √m · max_j R°_j / σ` over the scanned lengths.
    pub value: f64,
    /// `⌊m̂/2⌋`, clamped to `1..=p/2`.
    pub recommended_k: usize,
}

/// Scans every window length `m ∈ [k_min, p]` for the one with the largest
/// normalized maximum `√m · max_j R°_j / σ`. Ties go to the smallest `m`.
/// `k_min` defaults to `⌈√p⌉`. Cost is O(p²).
pub fn uniform_max_stat(x: &[f64], sigma: f64, k_min: Option<usize>) -> Result<UniformScan> {
    let p = x.len();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", format!("{sigma} must be > 0")));
    }
    let k_min = k_min.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize).max(1);
    check_window(k_min, p)?;
    let prefix = PrefixSums::new(x.iter().copied());
    let mut best = (k_min, f64::NEG_INFINITY);
    for m in k_min..=p {
        let top = (0..=p - m)
            .map(|j| prefix.range(j, j + m))
            .fold(f64::NEG_INFINITY, f64::max);
        let value = top / ((m as f64).sqrt() * sigma);
        if value > best.1 {
            best = (m, value);
        }
    }
    Ok(UniformScan {
        m_hat: best.0,
        value: best.1,
        recommended_k: (best.0 / 2).clamp(1, (p / 2).max(1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_mean(x: &[f64], k: usize) -> Vec<f64> {
        (0..=x.len() - k)
            .map(|j| x[j..j + k].iter().sum::<f64>() / k as f64)
            .collect()
    }

    #[test]
    fn sliding_mean_small() {
        let r = sliding_mean(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert_eq!(r.values, vec![1.5, 2.5, 3.5, 4.5]);
        assert_eq!(r.values, naive_mean(&[1.0, 2.0, 3.0, 4.0, 5.0], 2));
    }

    #[test]
    fn zero_and_constant_inputs() {
        for k in 1..=6 {
            assert!(sliding_mean(&[0.0; 6], k).unwrap().values.iter().all(|&v| v == 0.0));
            assert!(sliding_mean(&[2.5; 6], k).unwrap().values.iter().all(|&v| v == 2.5));
        }
    }

    #[test]
    fn window_out_of_range() {
        assert!(matches!(
            sliding_mean(&[1.0, 2.0], 3),
            Err(Error::WindowOutOfRange { k: 3, max: 2 })
        ));
        assert!(sliding_mean(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn centered_square_examples() {
        let r = sliding_centered_square(&[1.0, -1.0, 2.0], 2, 1.0).unwrap();
        assert_eq!(r.values, vec![0.0, 1.5]);
        let s = 1.7;
        let alt: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { s } else { -s }).collect();
        let r = sliding_centered_square(&alt, 3, s * s).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        let r = sliding_centered_square(&[0.0; 4], 2, 1.0).unwrap();
        assert_eq!(r.values, vec![-1.0; 3]);
        assert!(sliding_centered_square(&[0.0; 4], 2, 0.0).is_err());
    }

    #[test]
    fn left_series_shifts() {
        let r = StatSeries::right(StatKind::WindowMean, 1, vec![7.0, 8.0, 9.0]);
        let l = left_series(&r);
        assert_eq!(l.offset, 1);
        assert_eq!(l.values, vec![7.0, 8.0]);
        assert_eq!(l.get(1), Some(7.0));
        assert_eq!(l.get(2), Some(8.0));
        assert_eq!(l.get(0), None);
        let x = [1.0, 2.0, 3.0, 4.0];
        let l = left_series(&sliding_mean(&x, 1).unwrap());
        // L_j covers X_j alone when k = 1.
        for j in l.offset..=l.last_index() {
            assert_eq!(l.at(j), x[j - 1]);
        }
        let c = left_series(&StatSeries::right(StatKind::WindowMean, 2, vec![3.0; 5]));
        assert!(c.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn right_on_common_matches_left_domain() {
        let r = sliding_mean(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 2).unwrap();
        let l = left_series(&r);
        let rc = right_on_common(&r);
        assert_eq!((rc.offset, rc.len()), (l.offset, l.len()));
        assert_eq!(rc.at(2), r.at(2));
    }

    #[test]
    fn compensation_survives_large_offsets() {
        let mut x = vec![1e16, 1.0, -1e16];
        x.extend(std::iter::repeat_n(1.0, 5));
        let sums = window_sums(&x, 3).unwrap();
        assert_eq!(sums[0], 1.0);
        assert_eq!(sums[3], 3.0);
    }

    fn brute_uniform(x: &[f64], sigma: f64, k_min: usize) -> (usize, f64) {
        let p = x.len();
        let mut best = (k_min, f64::NEG_INFINITY);
        for m in k_min..=p {
            for j in 0..=p - m {
                let v = (m as f64).sqrt() * (x[j..j + m].iter().sum::<f64>() / m as f64) / sigma;
                if v > best.1 + 1e-12 {
                    best = (m, v);
                }
            }
        }
        best
    }

    #[test]
    fn uniform_scan_zero_input() {
        let s = uniform_max_stat(&[0.0; 100], 1.0, None).unwrap();
        assert_eq!(s.m_hat, 10);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn uniform_scan_block() {
        let mut x = vec![0.0; 200];
        for v in &mut x[60..110] {
            *v = 0.8;
        }
        let s = uniform_max_stat(&x, 1.0, None).unwrap();
        let (m, v) = brute_uniform(&x, 1.0, 15);
        assert_eq!(s.m_hat, m);
        assert_eq!(s.m_hat, 50);
        assert!((s.value - v).abs() < 1e-12);
        assert_eq!(s.recommended_k, 25);
    }

    #[test]
    fn uniform_scan_spike() {
        let mut x = vec![0.0; 100];
        x[40] = 1.0;
        let s = uniform_max_stat(&x, 1.0, None).unwrap();
        let (m, _) = brute_uniform(&x, 1.0, 10);
        assert_eq!(s.m_hat, m);
        assert_eq!(s.m_hat, 10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn prefix_matches_naive(
            x in prop::collection::vec(-50.0f64..50.0, 2..200),
            kf in 0.0f64..1.0,
        ) {
            let k = 1 + ((x.len() - 1) as f64 * kf) as usize;
            let fast = sliding_mean(&x, k).unwrap();
            let slow = naive_mean(&x, k);
            for (a, b) in fast.values.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
            let s2 = 1.3;
            let fast = sliding_centered_square(&x, k, s2).unwrap();
            for (j, a) in fast.values.iter().enumerate() {
                let b = x[j..j + k].iter().map(|v| v * v - s2).sum::<f64>() / k as f64;
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }

        #[test]
        fn linearity_with_dyadic_coefficients(
            x in prop::collection::vec(-64i32..64, 4..60),
            c in -3i32..4,
            b in -8i32..8,
            k in prop::sample::select(vec![1usize, 2, 4]),
        ) {
            // Dyadic data keeps every operation exact.
            let x: Vec<f64> = x.into_iter().map(|v| v as f64 / 4.0).collect();
            let (c, b) = (c as f64 * 0.5, b as f64 * 0.25);
            let y: Vec<f64> = x.iter().map(|v| c * v + b).collect();
            let rx = sliding_mean(&x, k).unwrap();
            let ry = sliding_mean(&y, k).unwrap();
            for (u, v) in rx.values.iter().zip(&ry.values) {
                prop_assert_eq!(c * u + b, *v);
            }
        }

        #[test]
        fn left_shift_identity(x in prop::collection::vec(-5.0f64..5.0, 4..80), kf in 0.0f64..1.0) {
            let k = 1 + (((x.len() / 2) - 1) as f64 * kf) as usize;
            let r = sliding_mean(&x, k).unwrap();
            let l = left_series(&r);
            for j in l.offset..=l.last_index() {
                prop_assert_eq!(l.at(j), r.at(j - k));
            }
            prop_assert_eq!(l.last_index(), x.len() - k);
        }
    }
}
