// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation harness: signal configurations, noise families, per-replication
//! metrics and aggregated reports.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::baselines::{bh_procedure, one_sided_pvalues, two_sided_pvalues, yao_l1};
use crate::detect::{Detector, NoiseModel};
use crate::error::{Error, Result};
use crate::model::{clusters_to_mask, DetectionResult, GroundTruth, Panel, Series, WindowConfig};
use crate::rng::replication_rng;
use crate::variance::sigma2_order_stat;

/// Mean configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignalKind {
    /// Zero, rising ramp, falling ramp, zero: 40/10/10/40 percent.
    RampPair,
    /// Zero, ±1 alternating, zero, rising ramp, falling ramp, zero:
    /// 30/10/20/5/5/30 percent.
    MixedClusters,
    GlobalNull,
    Custom(GroundTruth),
}

/// `seq(from, to)` over `len` points, both endpoints included.
fn linear_seq(from: f64, to: f64, len: usize) -> impl Iterator<Item = f64> {
    let step = if len > 1 { (to - from) / (len - 1) as f64 } else { 0.0 };
    (0..len).map(move |t| from + step * t as f64)
}

/// Cumulative segment ends `⌊pct·p/100⌋` for integer percentages.
fn boundaries(p: usize, pcts: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    pcts.iter()
        .map(|pct| {
            acc += pct;
            acc * p / 100
        })
        .collect()
}

pub fn make_signal(kind: &SignalKind, p: usize) -> Result<GroundTruth> {
    if !matches!(kind, SignalKind::Custom(_)) && p < 100 {
        return Err(Error::TooShort { p, min: 100 });
    }
    match kind {
        SignalKind::GlobalNull => Ok(GroundTruth::null(p)),
        SignalKind::Custom(truth) => {
            if truth.p() != p {
                return Err(Error::invalid("p", format!("custom truth has length {}", truth.p())));
            }
            Ok(truth.clone())
        }
        SignalKind::RampPair => {
            let b = boundaries(p, &[40, 10, 10]);
            let mut means = vec![0.0; p];
            for (m, v) in means[b[0]..b[1]].iter_mut().zip(linear_seq(0.4, 1.6, b[1] - b[0])) {
                *m = v;
            }
            for (m, v) in means[b[1]..b[2]].iter_mut().zip(linear_seq(1.6, 0.4, b[2] - b[1])) {
                *m = v;
            }
            GroundTruth::new(vec![b[0] + 1, b[2] + 1], means)
        }
        SignalKind::MixedClusters => {
            let b = boundaries(p, &[30, 10, 20, 5, 5]);
            let mut means = vec![0.0; p];
            for idx in b[0] + 1..=b[1] {
                means[idx - 1] = if idx % 2 == 1 { -1.0 } else { 1.0 };
            }
            for (m, v) in means[b[2]..b[3]].iter_mut().zip(linear_seq(0.5, 1.5, b[3] - b[2])) {
                *m = v;
            }
            for (m, v) in means[b[3]..b[4]].iter_mut().zip(linear_seq(1.5, 0.5, b[4] - b[3])) {
                *m = v;
            }
            GroundTruth::new(vec![b[0] + 1, b[1] + 1, b[2] + 1, b[4] + 1], means)
        }
    }
}

/// Noise families, each normalized as named.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NoiseFamily {
    /// `N(0,1)`.
    Gauss,
    /// `t(6)/√1.5`, unit variance.
    T6Rescaled,
    /// `Laplace(0,1)/√2`, unit variance.
    LaplaceRescaled,
    /// `N(0,1)/2^{1/4}`, `κ = 1`.
    GaussKappa1,
    /// `t(10)/(75/16)^{1/4}`, `κ = 1`.
    T10Kappa1,
    /// `Laplace(0,1)/20^{1/4}`, `κ = 1`.
    LaplaceKappa1,
    /// Gaussian (or `t(df)` when given) scaled by `sigma[j]` at locus `j`;
    /// a single entry applies everywhere.
    Custom { sigma: Vec<f64>, df: Option<f64> },
}

#[derive(Clone, Copy)]
enum Base {
    Normal,
    T(f64),
    Laplace,
}

impl NoiseFamily {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "gauss" => NoiseFamily::Gauss,
            "t6" | "t6_rescaled" => NoiseFamily::T6Rescaled,
            "laplace" | "laplace_rescaled" => NoiseFamily::LaplaceRescaled,
            "gauss_kappa1" => NoiseFamily::GaussKappa1,
            "t10_kappa1" => NoiseFamily::T10Kappa1,
            "laplace_kappa1" => NoiseFamily::LaplaceKappa1,
            other => return Err(Error::invalid("noise", format!("unknown family {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Gauss => "gauss",
            NoiseFamily::T6Rescaled => "t6_rescaled",
            NoiseFamily::LaplaceRescaled => "laplace_rescaled",
            NoiseFamily::GaussKappa1 => "gauss_kappa1",
            NoiseFamily::T10Kappa1 => "t10_kappa1",
            NoiseFamily::LaplaceKappa1 => "laplace_kappa1",
            NoiseFamily::Custom { .. } => "custom",
        }
    }

    fn base_and_scale(&self) -> (Base, f64) {
        match self {
            NoiseFamily::Gauss => (Base::Normal, 1.0),
            NoiseFamily::T6Rescaled => (Base::T(6.0), 1.5f64.sqrt()),
            NoiseFamily::LaplaceRescaled => (Base::Laplace, 2f64.sqrt()),
            NoiseFamily::GaussKappa1 => (Base::Normal, 2f64.powf(0.25)),
            NoiseFamily::T10Kappa1 => (Base::T(10.0), (75.0f64 / 16.0).powf(0.25)),
            NoiseFamily::LaplaceKappa1 => (Base::Laplace, 20f64.powf(0.25)),
            NoiseFamily::Custom { df, .. } => (df.map_or(Base::Normal, Base::T), 1.0),
        }
    }

    /// `(σ², κ²)` of the homoscedastic families.
    pub fn moments(&self) -> Option<(f64, f64)> {
        // Fourth moments: N(0,1) 3, t(ν) 3ν²/((ν−2)(ν−4)), Laplace(0,1) 24.
        let (var, m4, c) = match self {
            NoiseFamily::Gauss => (1.0, 3.0, 1.0),
            NoiseFamily::T6Rescaled => (1.5, 13.5, 1.5f64.sqrt()),
            NoiseFamily::LaplaceRescaled => (2.0, 24.0, 2f64.sqrt()),
            NoiseFamily::GaussKappa1 => (1.0, 3.0, 2f64.powf(0.25)),
            NoiseFamily::T10Kappa1 => (1.25, 6.25, (75.0f64 / 16.0).powf(0.25)),
            NoiseFamily::LaplaceKappa1 => (2.0, 24.0, 20f64.powf(0.25)),
            NoiseFamily::Custom { .. } => return None,
        };
        let c2 = c * c;
        Some((var / c2, (m4 - var * var) / (c2 * c2)))
    }
}

/// `size` draws of `family`.
pub fn sample_noise<R: Rng + ?Sized>(family: &NoiseFamily, size: usize, rng: &mut R) -> Result<Vec<f64>> {
    let (base, scale) = family.base_and_scale();
    let t = match base {
        Base::T(df) => Some(StudentT::new(df).map_err(|e| Error::invalid("df", e.to_string()))?),
        _ => None,
    };
    let sigma: Option<&[f64]> = match family {
        NoiseFamily::Custom { sigma, .. } => {
            if sigma.len() != 1 && sigma.len() != size {
                return Err(Error::invalid("sigma", format!("{} entries for {size} draws", sigma.len())));
            }
            Some(sigma)
        }
        _ => None,
    };
    Ok((0..size)
        .map(|j| {
            let z: f64 = match base {
                Base::Normal => StandardNormal.sample(rng),
                Base::T(_) => t.as_ref().expect("t distribution").sample(rng),
                Base::Laplace => {
                    let e: f64 = Exp1.sample(rng);
                    if rng.random::<bool>() {
                        e
                    } else {
                        -e
                    }
                }
            };
            let s = sigma.map_or(1.0, |s| if s.len() == 1 { s[0] } else { s[j] });
            s * z / scale
        })
        .collect())
}

/// Per-replication performance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub cer: f64,
    pub fdr: f64,
    pub power: f64,
    pub l_hat: usize,
    /// Mean `|τ̂_j − τ_j|`; absent unless `l̂ = l > 0`.
    pub diff: Option<f64>,
    pub sigma2_hat: Option<f64>,
    /// Omnibus decision (for baselines: any rejection).
    pub rejected: bool,
    pub any_cluster: bool,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Compares a detected signal mask and break-point list with the truth.
pub fn evaluate_mask(mask: &[bool], breakpoints: &[usize], truth: &GroundTruth) -> Metrics {
    let signal = truth.signal_mask();
    let p = signal.len();
    let (mut fp, mut fneg, mut tp) = (0, 0, 0);
    for (&d, &s) in mask.iter().zip(&signal) {
        match (d, s) {
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (true, true) => tp += 1,
            _ => {}
        }
    }
    let detected = tp + fp;
    let nonnull = tp + fneg;
    let l = truth.breakpoints.len();
    let diff = (breakpoints.len() == l && l > 0).then(|| {
        breakpoints
            .iter()
            .zip(&truth.breakpoints)
            .map(|(a, b)| (*a as f64 - *b as f64).abs())
            .sum::<f64>()
            / l as f64
    });
    Metrics {
        cer: (fp + fneg) as f64 / p as f64,
        fdr: ratio(fp, detected),
        power: ratio(tp, nonnull),
        l_hat: breakpoints.len(),
        diff,
        sigma2_hat: None,
        rejected: detected > 0,
        any_cluster: detected > 0,
    }
}

pub fn evaluate(result: &DetectionResult, truth: &GroundTruth) -> Metrics {
    let mut m = evaluate_mask(&result.signal_mask(), &result.breakpoint_indices(), truth);
    m.sigma2_hat = result.noise.sigma2_hat;
    m.rejected = result.rejected_null;
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Method {
    OneSided,
    TwoSided,
    /// Two-sided with the family's true `σ²` and `κ²`.
    TwoSidedKnown,
    MultiOneSided { n: usize },
    MultiTwoSided { n: usize },
    Yao { delta0: f64 },
    Bh { two_sided: bool },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::OneSided => "one_sided",
            Method::TwoSided => "two_sided",
            Method::TwoSidedKnown => "two_sided_known",
            Method::MultiOneSided { .. } => "multi_one_sided",
            Method::MultiTwoSided { .. } => "multi_two_sided",
            Method::Yao { .. } => "yao",
            Method::Bh { .. } => "bh",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p: usize,
    pub signal: SignalKind,
    pub noise: NoiseFamily,
    pub reps: usize,
    pub window: WindowConfig,
    pub method: Method,
    /// Data seed; calibration uses `window.seed`.
    pub seed: u64,
}

impl SimConfig {
    pub fn new(p: usize, signal: SignalKind, noise: NoiseFamily, method: Method, window: WindowConfig) -> Self {
        SimConfig {
            p,
            signal,
            noise,
            reps: 1000,
            window,
            method,
            seed: 0,
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub p: usize,
    pub k: usize,
    pub method: String,
    pub noise: String,
    pub reps: usize,
    pub cer: f64,
    pub fdr: f64,
    pub power: f64,
    /// Mean over replications that report it.
    pub sigma2_hat: Option<f64>,
    pub diff: Option<f64>,
    pub diff_count: usize,
    pub l_hat_mode: usize,
    /// Share of replications with `l̂` equal to the mode.
    pub l_hat_mode_share: f64,
    pub rejection_rate: f64,
    pub any_cluster_rate: f64,
    pub per_rep: Vec<Metrics>,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl SimReport {
    pub fn aggregate(config: &SimConfig, per_rep: Vec<Metrics>) -> Self {
        let reps = per_rep.len();
        let mean = |f: &dyn Fn(&Metrics) -> f64| mean_of(per_rep.iter().map(f)).unwrap_or(0.0);
        let mut counts = std::collections::BTreeMap::new();
        for m in &per_rep {
            *counts.entry(m.l_hat).or_insert(0usize) += 1;
        }
        // Largest count; ties go to the smaller l̂.
        let (l_hat_mode, top) = counts
            .iter()
            .fold((0, 0), |(bl, bc), (&l, &c)| if c > bc { (l, c) } else { (bl, bc) });
        let diffs: Vec<f64> = per_rep.iter().filter_map(|m| m.diff).collect();
        SimReport {
            p: config.p,
            k: config.window.k,
            method: config.method.name().to_string(),
            noise: config.noise.name().to_string(),
            reps,
            cer: mean(&|m| m.cer),
            fdr: mean(&|m| m.fdr),
            power: mean(&|m| m.power),
            sigma2_hat: mean_of(per_rep.iter().filter_map(|m| m.sigma2_hat)),
            diff: mean_of(diffs.iter().copied()),
            diff_count: diffs.len(),
            l_hat_mode,
            l_hat_mode_share: ratio(top, reps),
            rejection_rate: mean(&|m| f64::from(u8::from(m.rejected))),
            any_cluster_rate: mean(&|m| f64::from(u8::from(m.any_cluster))),
            per_rep,
        }
    }
}

fn replicate(config: &SimConfig, truth: &GroundTruth, detector: &Detector, rep: usize) -> Result<Metrics> {
    let mut rng = replication_rng(config.seed, rep as u64);
    let p = config.p;
    let with_noise = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Vec<f64>> {
        let z = sample_noise(&config.noise, p, rng)?;
        Ok(truth.means.iter().zip(z).map(|(m, z)| m + z).collect())
    };
    match &config.method {
        Method::OneSided | Method::TwoSided | Method::TwoSidedKnown => {
            let series = Series::new(with_noise(&mut rng)?)?;
            let result = match config.method {
                Method::OneSided => detector.one_sided(&series)?,
                _ => detector.two_sided(&series)?,
            };
            Ok(evaluate(&result, truth))
        }
        Method::MultiOneSided { n } | Method::MultiTwoSided { n } => {
            let rows = (0..*n).map(|_| with_noise(&mut rng)).collect::<Result<Vec<_>>>()?;
            let panel = Panel::from_rows(&rows)?;
            let result = match config.method {
                Method::MultiOneSided { .. } => detector.multi_one_sided(&panel)?,
                _ => detector.multi_two_sided(&panel)?,
            };
            Ok(evaluate(&result, truth))
        }
        Method::Yao { delta0 } => {
            let x = with_noise(&mut rng)?;
            let fit = yao_l1(&x, *delta0)?;
            let mask = clusters_to_mask(&[fit.cluster()], p);
            let mut m = evaluate_mask(&mask, &fit.breakpoints(), truth);
            m.rejected = true;
            Ok(m)
        }
        Method::Bh { two_sided } => {
            let x = with_noise(&mut rng)?;
            let sigma2 = sigma2_order_stat(&x, config.window.estimator_window(), config.window.order_index)?;
            let sigma = sigma2.sqrt();
            let pv = if *two_sided {
                two_sided_pvalues(&x, sigma)?
            } else {
                one_sided_pvalues(&x, sigma)?
            };
            let mut mask = vec![false; p];
            for i in bh_procedure(&pv, config.window.alpha)? {
                mask[i - 1] = true;
            }
            let mut m = evaluate_mask(&mask, &[], truth);
            m.l_hat = mask_breakpoints(&mask).len();
            m.sigma2_hat = Some(sigma2);
            Ok(m)
        }
    }
}

/// Run starts and ends (first index after each run) of a mask, 1-based.
pub fn mask_breakpoints(mask: &[bool]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = false;
    for (i, &m) in mask.iter().enumerate() {
        if m != prev {
            out.push(i + 1);
            prev = m;
        }
    }
    if prev {
        out.push(mask.len() + 1);
    }
    out
}

#[cfg(feature = "parallel")]
fn collect_reps(reps: usize, f: impl Fn(usize) -> Result<Metrics> + Sync + Send) -> Result<Vec<Metrics>> {
    use rayon::prelude::*;
    (0..reps).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_reps(reps: usize, f: impl Fn(usize) -> Result<Metrics>) -> Result<Vec<Metrics>> {
    (0..reps).map(f).collect()
}

pub fn run(config: &SimConfig) -> Result<SimReport> {
    run_with(config, &Detector::new(config.window.clone()))
}

/// As [`run`], reusing `detector`'s calibration cache.
pub fn run_with(config: &SimConfig, detector: &Detector) -> Result<SimReport> {
    if config.reps == 0 {
        return Err(Error::invalid("reps", "must be ≥ 1"));
    }
    let truth = make_signal(&config.signal, config.p)?;
    let detector = match config.method {
        Method::TwoSidedKnown => {
            let (sigma2, kappa2) = config
                .noise
                .moments()
                .ok_or_else(|| Error::invalid("noise", "known parameters need a named family"))?;
            detector.clone().with_noise(NoiseModel::Known { sigma2, kappa2 })
        }
        _ => detector.clone(),
    };
    let per_rep = collect_reps(config.reps, |rep| replicate(config, &truth, &detector, rep))?;
    Ok(SimReport::aggregate(config, per_rep))
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"))
}

pub const TABLE_COLUMNS: [&str; 10] = ["k", "sigma2", "CER", "CER_Y", "l_hat", "l_hat_Y", "Diff", "Diff_Y", "FDR", "Power"];

/// One row per `(proposed, baseline)` pair.
pub fn table_rows(rows: &[(SimReport, Option<SimReport>)]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|(r, y)| {
            vec![
                r.k.to_string(),
                fmt_opt(r.sigma2_hat, 4),
                format!("{:.4}", r.cer),
                fmt_opt(y.as_ref().map(|y| y.cer), 4),
                r.l_hat_mode.to_string(),
                y.as_ref().map_or("-".into(), |y| y.l_hat_mode.to_string()),
                fmt_opt(r.diff, 2),
                fmt_opt(y.as_ref().and_then(|y| y.diff), 2),
                format!("{:.4}", r.fdr),
                format!("{:.4}", r.power),
            ]
        })
        .collect()
}

/// Aligned plain-text table.
pub fn format_table(rows: &[(SimReport, Option<SimReport>)]) -> String {
    let body = table_rows(rows);
    let widths: Vec<usize> = (0..TABLE_COLUMNS.len())
        .map(|c| body.iter().map(|r| r[c].len()).chain([TABLE_COLUMNS[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  "));
    };
    line(TABLE_COLUMNS.to_vec(), &mut out);
    for r in &body {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// Tab-separated table with a header row.
pub fn format_table_tsv(rows: &[(SimReport, Option<SimReport>)]) -> String {
    let mut out = TABLE_COLUMNS.join("\t");
    out.push('\n');
    for r in table_rows(rows) {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Cluster;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ramp_pair_signal_at_600() {
        let t = make_signal(&SignalKind::RampPair, 600).unwrap();
        assert_eq!(t.breakpoints, vec![241, 361]);
        assert_eq!(t.clusters(), vec![Cluster { start: 241, end: 361 }]);
        assert_eq!(t.means[239], 0.0);
        assert!((t.means[240] - 0.4).abs() < 1e-15);
        assert!((t.means[299] - 1.6).abs() < 1e-12);
        assert!((t.means[300] - 1.6).abs() < 1e-15);
        assert!((t.means[359] - 0.4).abs() < 1e-12);
        assert_eq!(t.means[360], 0.0);
        assert!(t.means[240..300].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn mixed_clusters_signal_at_600() {
        let t = make_signal(&SignalKind::MixedClusters, 600).unwrap();
        assert_eq!(t.breakpoints, vec![181, 241, 361, 421]);
        assert_eq!(t.means[180], -1.0);
        assert_eq!(t.means[181], 1.0);
        assert_eq!(t.means[239], 1.0);
        assert!(t.means[180..240].iter().sum::<f64>().abs() < 1e-12);
        assert!((t.means[360] - 0.5).abs() < 1e-15);
        assert!((t.means[389] - 1.5).abs() < 1e-12);
        assert!((t.means[419] - 0.5).abs() < 1e-12);
        assert_eq!(t.signal_mask().iter().filter(|&&m| m).count(), 120);
    }

    #[test]
    fn null_signal() {
        let t = make_signal(&SignalKind::GlobalNull, 200).unwrap();
        assert!(t.breakpoints.is_empty() && t.means.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn noise_normalizations() {
        let n = 1_000_000;
        for fam in [NoiseFamily::Gauss, NoiseFamily::T6Rescaled, NoiseFamily::LaplaceRescaled] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let z = sample_noise(&fam, n, &mut rng).unwrap();
            let var = z.iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!((var - 1.0).abs() < 0.01, "{} {var}", fam.name());
        }
        for fam in [NoiseFamily::GaussKappa1, NoiseFamily::T10Kappa1, NoiseFamily::LaplaceKappa1] {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let z = sample_noise(&fam, n, &mut rng).unwrap();
            let (s2, k2) = fam.moments().unwrap();
            let var = z.iter().map(|v| v * v).sum::<f64>() / n as f64;
            let kappa2 = z.iter().map(|v| (v * v - s2).powi(2)).sum::<f64>() / n as f64;
            assert!((var / s2 - 1.0).abs() < 0.01, "{} {var}", fam.name());
            assert!((k2 - 1.0).abs() < 1e-12);
            // Heavy tails make the t(10) fourth moment noisy; 10% is ~4 SE.
            let tol = if fam == NoiseFamily::T10Kappa1 { 0.1 } else { 0.03 };
            assert!((kappa2 - 1.0).abs() < tol, "{} {kappa2}", fam.name());
        }
    }

    #[test]
    fn metric_examples() {
        let means = vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let truth = GroundTruth::new(vec![3, 5], means).unwrap();
        let mask = [false, false, false, true, true, false];
        let m = evaluate_mask(&mask, &[4, 6], &truth);
        assert!((m.cer - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!((m.fdr, m.power), (0.5, 0.5));
        assert_eq!(m.diff, Some(1.0));
        let m = evaluate_mask(&truth.signal_mask(), &[3, 5], &truth);
        assert_eq!((m.cer, m.fdr, m.power, m.diff), (0.0, 0.0, 1.0, Some(0.0)));
        let null = GroundTruth::null(6);
        let m = evaluate_mask(&[false; 6], &[], &null);
        assert_eq!((m.cer, m.fdr, m.power, m.diff), (0.0, 0.0, 0.0, None));
    }

    #[test]
    fn cer_matches_confusion_matrix() {
        let truth = make_signal(&SignalKind::RampPair, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mask: Vec<bool> = (0..200).map(|_| rng.random::<f64>() < 0.3).collect();
            let m = evaluate_mask(&mask, &[], &truth);
            let sig = truth.signal_mask();
            let correct = mask.iter().zip(&sig).filter(|(a, b)| a == b).count();
            assert!((m.cer - (1.0 - correct as f64 / 200.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_runs() {
        assert_eq!(mask_breakpoints(&[false, true, true, false, true]), vec![2, 4, 5, 6]);
        assert!(mask_breakpoints(&[false; 3]).is_empty());
    }

    #[test]
    fn run_is_deterministic() {
        let cfg = SimConfig::new(
            200,
            SignalKind::RampPair,
            NoiseFamily::Gauss,
            Method::OneSided,
            WindowConfig::new(14).with_mc_reps(300),
        )
        .with_reps(8)
        .with_seed(5);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_rep.len(), 8);
        let text = format_table(&[(a.clone(), None)]);
        assert!(text.lines().next().unwrap().contains("CER_Y"));
        assert_eq!(format_table_tsv(&[(a, None)]).lines().count(), 2);
    }
}
