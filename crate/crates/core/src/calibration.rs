// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo cutoffs for maxima of windowed Gaussian (and χ²-based)
//! processes.
//!
//! Every process here has the form
//! `G_j = Σ_{l=j+1}^{j+k} s_l ξ_l / D_j`, `0 ≤ j ≤ p − k`,
//! with innovations `ξ` drawn from a [`NoiseField`], optional per-locus
//! scales `s_l` and per-window denominators `D_j`. Window sums are formed from
//! sums inside `k`-aligned blocks, so `G_j` comes out bit-identical whichever
//! subset of windows is evaluated. That makes restricted maxima monotone in
//! the index set and equal to the full maximum when the set is everything.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::NoiseField;
use crate::window::{check_window, PrefixSums};

/// Smallest admissible window denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProcessKind {
    /// `G°_j = k⁻¹ Σ η`.
    GCirc,
    /// `G★_j = Σ σ_l η_l / v_j^{1/2}` with true scales.
    GStar,
    /// `G*_j`, the same with plug-in `σ̂_l`.
    GStarBoot,
    /// `G*_{j,4} = Σ ω̂_l^{1/2} η_l / (Σ ω̂_l)^{1/2}`.
    GStar4Boot,
    /// `G◇_{j,4}`: as above with standardized `(n−1)χ²₁ − χ²_{n−1}` innovations.
    GDiamond,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Innovation {
    Gaussian,
    /// `((n−1)χ²₁ − χ²_{n−1}) / √(2n(n−1))`, the law of a standardized
    /// pairwise-product U-statistic of `n` Gaussians.
    Chi2 { n: usize },
}

/// Variant of the U-statistic bootstrap process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum G4Variant {
    Gaussian,
    Chi2 { n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub g_quantile: f64,
    pub process_kind: ProcessKind,
    pub alpha: f64,
    pub mc_reps: usize,
    pub seed: u64,
    pub p: usize,
    pub k: usize,
}

impl CutoffSpec {
    /// Calibrates `g_{1−α}` for the unit-variance window-mean process.
    pub fn window_mean(p: usize, k: usize, alpha: f64, reps: usize, seed: u64) -> Result<Self> {
        Ok(CutoffSpec {
            g_quantile: quantile_max_gcirc(p, k, alpha, reps, seed)?,
            process_kind: ProcessKind::GCirc,
            alpha,
            mc_reps: reps,
            seed,
            p,
            k,
        })
    }
}

/// A windowed process whose maximum is simulated.
#[derive(Clone, Debug)]
pub struct MaxProcess {
    p: usize,
    k: usize,
    scales: Option<Vec<f64>>,
    /// `None` divides every window by `k`.
    denominators: Option<Vec<f64>>,
    innovation: Innovation,
}

impl MaxProcess {
    /// `G°`: unit scales, window mean.
    pub fn window_mean(p: usize, k: usize) -> Result<Self> {
        check_window(k, p)?;
        Ok(MaxProcess {
            p,
            k,
            scales: None,
            denominators: None,
            innovation: Innovation::Gaussian,
        })
    }

    /// `Σ s_l ξ_l / (Σ s_l²)^{1/2}`, marginally unit-variance.
    pub fn normalized(scales: Vec<f64>, k: usize, innovation: Innovation) -> Result<Self> {
        let p = scales.len();
        check_window(k, p)?;
        if let Some(i) = scales.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("scales", format!("entry {} is {}", i + 1, scales[i])));
        }
        if let Innovation::Chi2 { n } = innovation {
            if n < 2 {
                return Err(Error::TooFewRealizations { need: 2, got: n });
            }
        }
        let sq = PrefixSums::new(scales.iter().map(|s| s * s));
        let mut denominators = Vec::with_capacity(p - k + 1);
        for j in 0..=p - k {
            let v = sq.range(j, j + k);
            if v.is_nan() || v <= DENOMINATOR_FLOOR {
                return Err(Error::DegenerateWindow { index: j, value: v });
            }
            denominators.push(v.sqrt());
        }
        Ok(MaxProcess {
            p,
            k,
            scales: Some(scales),
            denominators: Some(denominators),
            innovation,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Last window index `p − k`.
    pub fn last_index(&self) -> usize {
        self.p - self.k
    }

    fn innovations(&self, field: &NoiseField, path: u64, l_lo: usize, out: &mut [f64], scratch: &mut Vec<f64>) {
        match self.innovation {
            Innovation::Gaussian => field.fill_normals(path, (l_lo - 1) as u64, out),
            Innovation::Chi2 { n } => {
                scratch.resize(out.len() * n, 0.0);
                field.fill_normals(path, ((l_lo - 1) * n) as u64, scratch);
                let norm = (2.0 * n as f64 * (n as f64 - 1.0)).sqrt();
                for (o, z) in out.iter_mut().zip(scratch.chunks_exact(n)) {
                    let rest: f64 = z[1..].iter().map(|v| v * v).sum();
                    *o = ((n as f64 - 1.0) * z[0] * z[0] - rest) / norm;
                }
            }
        }
    }

    /// Maximum of `G_j` over the union of inclusive runs `[a, b]` of window
    /// indices on path `path`.
    pub fn path_max(&self, field: &NoiseField, path: u64, runs: &[(usize, usize)], scratch: &mut Scratch) -> f64 {
        let k = self.k;
        let mut best = f64::NEG_INFINITY;
        for &(a, b) in runs {
            // 1-based loci a+1..=b+k, widened to whole k-blocks.
            let l_lo = (a / k) * k + 1;
            let l_hi = (b.div_ceil(k) + 1) * k;
            let l_hi = l_hi.min(self.p);
            let len = l_hi - l_lo + 1;
            let Scratch { values, prefix, suffix, chi } = scratch;
            values.resize(len, 0.0);
            self.innovations(field, path, l_lo, values, chi);
            if let Some(s) = &self.scales {
                for (v, s) in values.iter_mut().zip(&s[l_lo - 1..l_hi]) {
                    *v *= s;
                }
            }
            prefix.resize(len, 0.0);
            suffix.resize(len, 0.0);
            for start in (0..len).step_by(k) {
                let end = (start + k).min(len);
                let mut acc = 0.0;
                for i in start..end {
                    acc += values[i];
                    prefix[i] = acc;
                }
                let mut acc = 0.0;
                for i in (start..end).rev() {
                    acc += values[i];
                    suffix[i] = acc;
                }
            }
            for j in a..=b {
                let first = j + 1 - l_lo;
                let mut num = suffix[first];
                if j % k != 0 {
                    num += prefix[first + k - 1];
                }
                let g = match &self.denominators {
                    Some(d) => num / d[j],
                    None => num / k as f64,
                };
                if g > best {
                    best = g;
                }
            }
        }
        best
    }

    /// Sorted maxima over `runs` for paths `0..reps`.
    pub fn sorted_maxima(&self, runs: &[(usize, usize)], reps: usize, seed: u64) -> Result<Vec<f64>> {
        if let Some(&(_, b)) = runs.iter().find(|&&(a, b)| a > b || b > self.last_index()) {
            return Err(Error::invalid("index set", format!("{b} outside 0..={}", self.last_index())));
        }
        let field = NoiseField::new(seed);
        let mut maxima = collect_paths(reps, |path, scratch| self.path_max(&field, path, runs, scratch));
        maxima.sort_unstable_by(f64::total_cmp);
        Ok(maxima)
    }

    pub fn full_runs(&self) -> Vec<(usize, usize)> {
        vec![(0, self.last_index())]
    }
}

#[derive(Default, Debug)]
pub struct Scratch {
    values: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
    chi: Vec<f64>,
}

#[cfg(feature = "parallel")]
fn collect_paths<F>(reps: usize, f: F) -> Vec<f64>
where
    F: Fn(u64, &mut Scratch) -> f64 + Sync,
{
    use rayon::prelude::*;
    (0..reps)
        .into_par_iter()
        .map_init(Scratch::default, |s, b| f(b as u64, s))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_paths<F>(reps: usize, f: F) -> Vec<f64>
where
    F: Fn(u64, &mut Scratch) -> f64,
{
    let mut s = Scratch::default();
    (0..reps).map(|b| f(b as u64, &mut s)).collect()
}

/// Order statistic at 1-based index `⌈(1−α)B⌉` of sorted maxima.
pub fn quantile_of_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let b = sorted.len();
    let idx = ((1.0 - alpha) * b as f64 - 1e-9).ceil() as usize;
    sorted[idx.clamp(1, b) - 1]
}

pub(crate) fn check_level(alpha: f64, reps: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0,1)")));
    }
    if reps < 100 {
        return Err(Error::invalid("mc_reps", format!("{reps} < 100")));
    }
    Ok(())
}

/// `g_{1−α}`: the `(1−α)` quantile of `max_{0≤j≤p−k} G°_j`.
pub fn quantile_max_gcirc(p: usize, k: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    check_level(alpha, reps)?;
    let process = MaxProcess::window_mean(p, k)?;
    let sorted = process.sorted_maxima(&process.full_runs(), reps, seed)?;
    Ok(quantile_of_sorted(&sorted, alpha))
}

/// Quantile of `max_j Σ σ_l η_l / v_j^{1/2}` with `v_j = Σ σ_l²`.
pub fn quantile_max_gstar(sigma: &[f64], k: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    check_level(alpha, reps)?;
    if let Some(i) = sigma.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("sigma", format!("entry {} is {}", i + 1, sigma[i])));
    }
    let process = MaxProcess::normalized(sigma.to_vec(), k, Innovation::Gaussian)?;
    let sorted = process.sorted_maxima(&process.full_runs(), reps, seed)?;
    Ok(quantile_of_sorted(&sorted, alpha))
}

impl From<G4Variant> for Innovation {
    fn from(v: G4Variant) -> Self {
        match v {
            G4Variant::Gaussian => Innovation::Gaussian,
            G4Variant::Chi2 { n } => Innovation::Chi2 { n },
        }
    }
}

/// Quantile of `max_j Σ ω_l^{1/2} ξ_l / (Σ ω_l)^{1/2}`.
pub fn quantile_max_g4(omega: &[f64], k: usize, alpha: f64, reps: usize, seed: u64, variant: G4Variant) -> Result<f64> {
    check_level(alpha, reps)?;
    if let Some(i) = omega.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("omega", format!("entry {} is {}", i + 1, omega[i])));
    }
    let scales = omega.iter().map(|w| w.sqrt()).collect();
    let process = MaxProcess::normalized(scales, k, variant.into())?;
    let sorted = process.sorted_maxima(&process.full_runs(), reps, seed)?;
    Ok(quantile_of_sorted(&sorted, alpha))
}

/// Collapses sorted window indices into inclusive runs.
pub fn index_runs(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &j in indices {
        match runs.last_mut() {
            Some((_, b)) if *b + 1 == j => *b = j,
            _ => runs.push((j, j)),
        }
    }
    runs
}

/// Quantile of the maximum restricted to window indices `w1` (sorted,
/// 0-based window positions). `None` when `w1` is empty.
pub fn transition_quantile(process: &MaxProcess, w1: &[usize], alpha: f64, reps: usize, seed: u64) -> Result<Option<f64>> {
    check_level(alpha, reps)?;
    if w1.is_empty() {
        return Ok(None);
    }
    if w1.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("index set", "must be strictly increasing"));
    }
    let sorted = process.sorted_maxima(&index_runs(w1), reps, seed)?;
    Ok(Some(quantile_of_sorted(&sorted, alpha)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GumbelReference {
    /// Literal evaluation on the `√k·G°` scale.
    pub value: f64,
    /// `v = −log log(1/(1−α))`.
    pub v: f64,
    /// `T = p/k`.
    pub t: f64,
    /// Always true: never use as a cutoff.
    pub reference_only: bool,
}

/// Closed-form extreme-value approximation
/// `√(2 log T)·(1 + (log log T − ½ log 4π)/(4 log T) + v)`, `T = p/k`.
/// It converges slowly and sits well above simulated quantiles at practical
/// sizes, so it is only reported next to them.
pub fn gumbel_reference_quantile(p: usize, k: usize, alpha: f64) -> Result<GumbelReference> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} not in (0,1)")));
    }
    if k == 0 {
        return Err(Error::WindowOutOfRange { k, max: p });
    }
    let t = p as f64 / k as f64;
    if t <= 1.0 {
        return Err(Error::invalid("p/k", format!("{t} must exceed 1")));
    }
    let v = -(1.0 / (1.0 - alpha)).ln().ln();
    let lt = t.ln();
    let value = (2.0 * lt).sqrt()
        * (1.0 + (lt.ln() - 0.5 * (4.0 * std::f64::consts::PI).ln()) / (4.0 * lt) + v);
    Ok(GumbelReference {
        value,
        v,
        t,
        reference_only: true,
    })
}

type CacheKey = (usize, usize, usize, u64);

/// Memoizes sorted `G°` maxima, which depend only on `(p, k, B, seed)`.
#[derive(Debug, Default)]
pub struct CutoffCache {
    inner: Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl CutoffCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn window_mean_maxima(&self, p: usize, k: usize, reps: usize, seed: u64) -> Result<Arc<Vec<f64>>> {
        let key = (p, k, reps, seed);
        if let Some(hit) = self.inner.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let process = MaxProcess::window_mean(p, k)?;
        let sorted = Arc::new(process.sorted_maxima(&process.full_runs(), reps, seed)?);
        self.inner
            .lock()
            .expect("cache poisoned")
            .insert(key, Arc::clone(&sorted));
        Ok(sorted)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
