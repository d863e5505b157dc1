// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold classification, majority-vote smoothing, segmentation into
//! transition regions, and constrained-argmax break-point location.
//!
//! All four detectors share one pipeline. They differ only in the
//! classification statistic `R` (with `L_j = R_{j−k}`), the statistic used
//! inside the argmax, and the process that calibrates `γ` and `δ`.
//!
//! Labels live on the common domain `j = k..=p − k` where both `R_j` and
//! `L_j` exist. A located index `j*` is reported as break-point `j* + 1`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calibration::{quantile_of_sorted, transition_quantile, CutoffCache, G4Variant, Innovation, MaxProcess};
use crate::error::{Error, Result};
use crate::model::{
    clusters_from_breakpoints, Breakpoint, DetectionResult, Direction, NoiseSummary, Panel, Series, Thresholds,
    WindowConfig,
};
use crate::multi::{pooled_mean, r4, r_ddagger, r_flat, PanelStats};
use crate::variance::VarianceEstimate;
use crate::window::{left_series, right_on_common, sliding_centered_square, sliding_mean, StatKind, StatSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// `0 → 2`.
    Up,
    /// `2 → 0`.
    Down,
    /// Any other flank pair, including runs touching either end.
    Spurious,
}

/// Maximal run of label 1, as inclusive statistic indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub first: usize,
    pub last: usize,
    pub transition: Transition,
}

impl Component {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.first..=self.last).contains(&j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub offset: usize,
    pub w0: Vec<usize>,
    pub w1: Vec<usize>,
    pub w2: Vec<usize>,
    pub components: Vec<Component>,
}

/// `Q_j = 1(R_j > γ) + 1(L_j > γ)` on the range shared by `right` and `left`.
pub fn classify_q(right: &StatSeries, left: &StatSeries, gamma: f64) -> Result<Vec<u8>> {
    if right.offset != left.offset || right.len() != left.len() {
        return Err(Error::Misaligned(format!(
            "right covers {}+{}, left covers {}+{}",
            right.offset,
            right.len(),
            left.offset,
            left.len()
        )));
    }
    Ok(right
        .values
        .iter()
        .zip(&left.values)
        .map(|(r, l)| u8::from(*r > gamma) + u8::from(*l > gamma))
        .collect())
}

/// Replaces each label by the most frequent label among its neighbours
/// within `half_width` on either side (truncated at the ends). Ties go to
/// the smaller label.
pub fn majority_smooth(q: &[u8], half_width: usize) -> Vec<u8> {
    let n = q.len();
    let mut counts = vec![[0u32; 3]; n + 1];
    for (i, &label) in q.iter().enumerate() {
        counts[i + 1] = counts[i];
        counts[i + 1][usize::from(label.min(2))] += 1;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            let c: [u32; 3] = std::array::from_fn(|l| counts[hi][l] - counts[lo][l]);
            let mut best = 0u8;
            for l in 1..3u8 {
                if c[usize::from(l)] > c[usize::from(best)] {
                    best = l;
                }
            }
            best
        })
        .collect()
}

/// Splits smoothed labels (first entry at statistic index `offset`) into
/// `W₀`, `W₁`, `W₂` and tags each run of `W₁` by its flanking labels.
pub fn segment(smoothed: &[u8], offset: usize) -> Segmentation {
    let mut seg = Segmentation {
        offset,
        w0: Vec::new(),
        w1: Vec::new(),
        w2: Vec::new(),
        components: Vec::new(),
    };
    for (i, &label) in smoothed.iter().enumerate() {
        match label {
            0 => seg.w0.push(offset + i),
            1 => seg.w1.push(offset + i),
            _ => seg.w2.push(offset + i),
        }
    }
    let mut i = 0;
    while i < smoothed.len() {
        if smoothed[i] != 1 {
            i += 1;
            continue;
        }
        let start = i;
        while i < smoothed.len() && smoothed[i] == 1 {
            i += 1;
        }
        let before = start.checked_sub(1).map(|b| smoothed[b]);
        let after = smoothed.get(i).copied();
        let transition = match (before, after) {
            (Some(0), Some(2)) => Transition::Up,
            (Some(2), Some(0)) => Transition::Down,
            _ => Transition::Spurious,
        };
        seg.components.push(Component {
            first: offset + start,
            last: offset + i - 1,
            transition,
        });
    }
    seg
}

/// Statistics consulted when locating break-points.
#[derive(Clone, Copy, Debug)]
pub struct Locator<'a> {
    /// Classification statistic `R` and `L`, used in the `≤ δ` constraints.
    pub right: &'a StatSeries,
    pub left: &'a StatSeries,
    /// Statistics maximized; the classification pair for single realizations.
    pub right_arg: &'a StatSeries,
    pub left_arg: &'a StatSeries,
}

fn argmax_in(component: &Component, value: &StatSeries, admissible: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in component.first..=component.last {
        if !admissible(j) {
            continue;
        }
        let v = value.at(j);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

/// `argmax_{j ∈ M} {R_j : L_j ≤ δ} + 1` for up transitions and
/// `argmax_{j ∈ M} {L_j : R_j ≤ δ} + 1` for down transitions; ties go to
/// the smallest `j`. With no admissible index the unconstrained argmax is
/// used and flagged. Spurious components yield nothing.
pub fn locate_breakpoint(component: &Component, stats: Locator<'_>, delta: f64) -> Option<Breakpoint> {
    let (direction, value, constraint) = match component.transition {
        Transition::Up => (Direction::Up, stats.right_arg, stats.left),
        Transition::Down => (Direction::Down, stats.left_arg, stats.right),
        Transition::Spurious => return None,
    };
    let constrained = argmax_in(component, value, |j| constraint.at(j) <= delta);
    let (j, fallback) = match constrained {
        Some(j) => (j, false),
        None => (argmax_in(component, value, |_| true)?, true),
    };
    Some(Breakpoint {
        index: j + 1,
        direction,
        fallback,
    })
}

/// Nuisance parameters for single-realization detectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Order-statistic estimates from the data.
    #[default]
    Estimated,
    /// Known `σ²` and `κ²` (`κ²` is ignored by the one-sided detector).
    Known { sigma2: f64, kappa2: f64 },
}

enum Calibration {
    /// `G°` scaled by a constant; the maxima are cached.
    WindowMean { scale: f64 },
    Process(MaxProcess),
}

struct Plan {
    p: usize,
    right: StatSeries,
    right_arg: Option<StatSeries>,
    calibration: Calibration,
    noise: NoiseSummary,
}

/// Runs the detectors with one configuration and shares calibrated `G°`
/// maxima between calls.
#[derive(Clone, Debug)]
pub struct Detector {
    config: WindowConfig,
    noise: NoiseModel,
    g4_variant: Option<G4Variant>,
    cache: Arc<CutoffCache>,
}

impl Detector {
    pub fn new(config: WindowConfig) -> Self {
        Detector {
            config,
            noise: NoiseModel::Estimated,
            g4_variant: None,
            cache: Arc::new(CutoffCache::new()),
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    /// Bootstrap process for the panel two-sided detector. Defaults to the
    /// χ² variant with the panel's `n`.
    pub fn with_g4_variant(mut self, variant: G4Variant) -> Self {
        self.g4_variant = Some(variant);
        self
    }

    pub fn with_cache(mut self, cache: Arc<CutoffCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn config(&self) -> &WindowConfig {
        &self.config
    }

    pub fn cache(&self) -> &Arc<CutoffCache> {
        &self.cache
    }

    fn estimate(&self, x: &[f64], with_kappa: bool) -> Result<VarianceEstimate> {
        let m = self.config.estimator_window();
        if with_kappa {
            VarianceEstimate::with_kappa(x, m, self.config.order_index)
        } else {
            VarianceEstimate::sigma_only(x, m, self.config.order_index)
        }
    }

    /// Single realization, positive means: window mean `R°`, cutoffs `σ̂·g`.
    pub fn one_sided(&self, series: &Series) -> Result<DetectionResult> {
        let x = series.values();
        self.config.validate(x.len())?;
        let sigma2 = match self.noise {
            NoiseModel::Estimated => self.estimate(x, false)?.sigma2_hat,
            NoiseModel::Known { sigma2, .. } => check_positive("sigma2", sigma2)?,
        };
        self.run(Plan {
            p: x.len(),
            right: sliding_mean(x, self.config.k)?,
            right_arg: None,
            calibration: Calibration::WindowMean { scale: sigma2.sqrt() },
            noise: NoiseSummary {
                sigma2_hat: Some(sigma2),
                kappa2_hat: None,
                kappa_clamped: false,
            },
        })
    }

    /// Single realization, arbitrary signs: centered square `R†`, cutoffs `κ̂·g`.
    pub fn two_sided(&self, series: &Series) -> Result<DetectionResult> {
        let x = series.values();
        self.config.validate(x.len())?;
        let (sigma2, kappa2, clamped) = match self.noise {
            NoiseModel::Estimated => {
                let est = self.estimate(x, true)?;
                (est.sigma2_hat, est.kappa2_hat.unwrap_or(0.0), est.kappa_clamped)
            }
            NoiseModel::Known { sigma2, kappa2 } => {
                (check_positive("sigma2", sigma2)?, check_positive("kappa2", kappa2)?, false)
            }
        };
        self.run(Plan {
            p: x.len(),
            right: sliding_centered_square(x, self.config.k, sigma2)?,
            right_arg: None,
            calibration: Calibration::WindowMean { scale: kappa2.sqrt() },
            noise: NoiseSummary {
                sigma2_hat: Some(sigma2),
                kappa2_hat: Some(kappa2),
                kappa_clamped: clamped,
            },
        })
    }

    /// Panel, positive means: `R̂` classifies, `R♭` locates, `G*` calibrates.
    pub fn multi_one_sided(&self, panel: &Panel) -> Result<DetectionResult> {
        self.multi_one(panel, None)
    }

    /// As [`Self::multi_one_sided`] with known per-locus variances (`R★`, `G★`).
    pub fn multi_one_sided_known(&self, panel: &Panel, sigma2: &[f64]) -> Result<DetectionResult> {
        self.multi_one(panel, Some(sigma2))
    }

    fn multi_one(&self, panel: &Panel, known: Option<&[f64]>) -> Result<DetectionResult> {
        let p = panel.p();
        self.config.validate(p)?;
        let k = self.config.k;
        let stats = PanelStats::compute(panel)?;
        let (variances, kind) = match known {
            Some(v) => (v, StatKind::PooledMean),
            None => (stats.sigma2_hat.as_slice(), StatKind::PooledMeanPlugin),
        };
        let right = pooled_mean(&stats.mu_hat, variances, stats.n, k, kind)?;
        let scales = variances.iter().map(|v| v.max(0.0).sqrt()).collect();
        let process = MaxProcess::normalized(scales, k, Innovation::Gaussian)?;
        self.run(Plan {
            p,
            right,
            right_arg: Some(r_flat(&stats.mu_hat, stats.n, k)?),
            calibration: Calibration::Process(process),
            noise: NoiseSummary {
                sigma2_hat: Some(variances.iter().sum::<f64>() / p as f64),
                kappa2_hat: None,
                kappa_clamped: false,
            },
        })
    }

    /// Panel, arbitrary signs: `R*_{j,4}` classifies, `R‡` locates, the
    /// `G◇` (or Gaussian `G*_{j,4}`) process calibrates. Needs `n ≥ 4`.
    pub fn multi_two_sided(&self, panel: &Panel) -> Result<DetectionResult> {
        self.multi_two(panel, None)
    }

    /// As [`Self::multi_two_sided`] with known `σ_l⁴`; calibrates with the
    /// Gaussian process unless a variant was set.
    pub fn multi_two_sided_known(&self, panel: &Panel, sigma4: &[f64]) -> Result<DetectionResult> {
        self.multi_two(panel, Some(sigma4))
    }

    fn multi_two(&self, panel: &Panel, known: Option<&[f64]>) -> Result<DetectionResult> {
        let p = panel.p();
        let n = panel.n();
        if n < 4 {
            return Err(Error::TooFewRealizations { need: 4, got: n });
        }
        self.config.validate(p)?;
        let k = self.config.k;
        let stats = PanelStats::compute(panel)?;
        let (fourth, kind, default_variant) = match known {
            Some(s4) => (s4, StatKind::UStat, G4Variant::Gaussian),
            None => (stats.omega()?, StatKind::UStatPlugin, G4Variant::Chi2 { n }),
        };
        let right = r4(&stats.w, fourth, n, k, kind)?;
        // Negative ω̂ (possible for small n) contributes no bootstrap noise.
        let scales = fourth.iter().map(|w| w.max(0.0).sqrt()).collect();
        let variant = self.g4_variant.unwrap_or(default_variant);
        let process = MaxProcess::normalized(scales, k, variant.into())?;
        self.run(Plan {
            p,
            right,
            right_arg: Some(r_ddagger(&stats.w, n, k)?),
            calibration: Calibration::Process(process),
            noise: NoiseSummary {
                sigma2_hat: Some(stats.sigma2_hat.iter().sum::<f64>() / p as f64),
                kappa2_hat: None,
                kappa_clamped: false,
            },
        })
    }

    fn run(&self, plan: Plan) -> Result<DetectionResult> {
        let cfg = &self.config;
        let (p, k) = (plan.p, cfg.k);
        let reps = cfg.mc_reps;
        let gamma = match cfg.gamma {
            Some(g) => g,
            None => match &plan.calibration {
                Calibration::WindowMean { scale } => {
                    let maxima = self.cache.window_mean_maxima(p, k, reps, cfg.seed)?;
                    scale * quantile_of_sorted(&maxima, cfg.alpha)
                }
                Calibration::Process(process) => {
                    let maxima = process.sorted_maxima(&process.full_runs(), reps, cfg.seed)?;
                    quantile_of_sorted(&maxima, cfg.alpha)
                }
            },
        };

        let max_statistic = plan.right.max();
        let rejected_null = max_statistic > gamma;
        let left = left_series(&plan.right);
        let right_common = right_on_common(&plan.right);
        let raw_labels = classify_q(&right_common, &left, gamma)?;
        let labels = majority_smooth(&raw_labels, cfg.vote_width());
        let seg = segment(&labels, k);
        let localize = rejected_null || cfg.always_localize;

        let delta_raw = match cfg.delta {
            Some(d) => Some(d),
            None if localize && !seg.w1.is_empty() => match &plan.calibration {
                Calibration::WindowMean { scale } => {
                    let process = MaxProcess::window_mean(p, k)?;
                    transition_quantile(&process, &seg.w1, cfg.alpha, reps, cfg.seed)?.map(|q| scale * q)
                }
                Calibration::Process(process) => transition_quantile(process, &seg.w1, cfg.alpha, reps, cfg.seed)?,
            },
            None => None,
        };
        let (delta, delta_fallback) = match delta_raw {
            Some(d) if d < gamma => (d, false),
            _ => (gamma / 4.0, true),
        };

        let left_arg = plan.right_arg.as_ref().map(left_series);
        let mut breakpoints = Vec::new();
        if localize {
            let stats = Locator {
                right: &plan.right,
                left: &left,
                right_arg: plan.right_arg.as_ref().unwrap_or(&plan.right),
                left_arg: left_arg.as_ref().unwrap_or(&left),
            };
            breakpoints.extend(seg.components.iter().filter_map(|c| locate_breakpoint(c, stats, delta)));
        }
        let clusters = clusters_from_breakpoints(&breakpoints, p);
        let spurious = seg
            .components
            .iter()
            .filter(|c| c.transition == Transition::Spurious)
            .copied()
            .collect();
        let mut statistics = vec![plan.right, left];
        if let (Some(r), Some(l)) = (plan.right_arg, left_arg) {
            statistics.push(r);
            statistics.push(l);
        }
        Ok(DetectionResult {
            p,
            k,
            rejected_null,
            max_statistic,
            breakpoints,
            clusters,
            labels,
            raw_labels,
            label_offset: k,
            thresholds: Thresholds {
                gamma,
                delta,
                delta_fallback,
            },
            noise: plan.noise,
            spurious,
            statistics,
        })
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, format!("{v} must be > 0")))
    }
}

pub fn detect_one_sided(series: &Series, config: &WindowConfig) -> Result<DetectionResult> {
    Detector::new(config.clone()).one_sided(series)
}

pub fn detect_two_sided(series: &Series, config: &WindowConfig) -> Result<DetectionResult> {
    Detector::new(config.clone()).two_sided(series)
}

pub fn detect_multi_one_sided(panel: &Panel, config: &WindowConfig) -> Result<DetectionResult> {
    Detector::new(config.clone()).multi_one_sided(panel)
}

pub fn detect_multi_two_sided(panel: &Panel, config: &WindowConfig) -> Result<DetectionResult> {
    Detector::new(config.clone()).multi_two_sided(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Cluster;

    fn series(offset: usize, values: &[f64]) -> StatSeries {
        StatSeries {
            kind: StatKind::WindowMean,
            left: false,
            k: 1,
            offset,
            values: values.to_vec(),
        }
    }

    #[test]
    fn classify_examples() {
        let q = classify_q(&series(0, &[0.5, 2.0]), &series(0, &[2.0, 2.0]), 1.0).unwrap();
        assert_eq!(q, vec![1, 2]);
        let q = classify_q(&series(0, &[0.1; 4]), &series(0, &[0.2; 4]), 1.0).unwrap();
        assert_eq!(q, vec![0; 4]);
        let q = classify_q(&series(0, &[3.0; 4]), &series(0, &[5.0; 4]), 1.0).unwrap();
        assert_eq!(q, vec![2; 4]);
        assert!(matches!(
            classify_q(&series(0, &[1.0; 3]), &series(1, &[1.0; 3]), 0.0),
            Err(Error::Misaligned(_))
        ));
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_smooth(&[0, 1, 0], 1), vec![0, 0, 0]);
        assert_eq!(majority_smooth(&[1, 1, 1, 1], 2), vec![1; 4]);
        assert_eq!(majority_smooth(&[2, 2, 2, 0, 2, 2, 2], 3), vec![2; 7]);
        // Tie between 1 and 2 at the left edge resolves to 1.
        assert_eq!(majority_smooth(&[1, 2], 1), vec![1, 1]);
    }

    /// Direct count per index, no prefix sums.
    fn majority_naive(q: &[u8], h: usize) -> Vec<u8> {
        (0..q.len())
            .map(|i| {
                let lo = i.saturating_sub(h);
                let hi = (i + h).min(q.len() - 1);
                let mut c = [0; 3];
                for &v in &q[lo..=hi] {
                    c[v as usize] += 1;
                }
                let top = *c.iter().max().unwrap();
                c.iter().position(|&x| x == top).unwrap() as u8
            })
            .collect()
    }

    proptest::proptest! {
        #[test]
        fn majority_matches_naive(q in proptest::collection::vec(0u8..3, 1..80), h in 1usize..10) {
            proptest::prop_assert_eq!(majority_smooth(&q, h), majority_naive(&q, h));
        }
    }

    #[test]
    fn segment_examples() {
        let seg = segment(&[0, 0, 1, 1, 2, 2, 1, 0], 1);
        assert_eq!(
            seg.components,
            vec![
                Component {
                    first: 3,
                    last: 4,
                    transition: Transition::Up
                },
                Component {
                    first: 7,
                    last: 7,
                    transition: Transition::Down
                },
            ]
        );
        assert_eq!(seg.w1, vec![3, 4, 7]);
        assert_eq!(seg.w0.len() + seg.w1.len() + seg.w2.len(), 8);
        assert!(segment(&[0; 5], 0).components.is_empty());
        let seg = segment(&[0, 1, 0], 1);
        assert_eq!(seg.components.len(), 1);
        assert_eq!(seg.components[0].transition, Transition::Spurious);
        assert_eq!(segment(&[1, 1, 2], 0).components[0].transition, Transition::Spurious);
    }

    #[test]
    fn locate_examples() {
        let r = series(0, &[0.0, 1.0, 3.0, 2.0, 0.5]);
        let l = series(0, &[0.0, 0.0, 0.0, 1.0, 3.0]);
        let up = Component {
            first: 0,
            last: 4,
            transition: Transition::Up,
        };
        let stats = Locator {
            right: &r,
            left: &l,
            right_arg: &r,
            left_arg: &l,
        };
        let b = locate_breakpoint(&up, stats, 0.5).unwrap();
        assert_eq!((b.index, b.direction, b.fallback), (3, Direction::Up, false));
        // No admissible index: unconstrained argmax, flagged.
        let b = locate_breakpoint(
            &Component {
                first: 3,
                last: 4,
                transition: Transition::Up,
            },
            stats,
            0.5,
        )
        .unwrap();
        assert_eq!((b.index, b.fallback), (4, true));
        let single = Component {
            first: 2,
            last: 2,
            transition: Transition::Down,
        };
        assert_eq!(locate_breakpoint(&single, stats, 10.0).unwrap().index, 3);
        let spur = Component {
            first: 0,
            last: 1,
            transition: Transition::Spurious,
        };
        assert!(locate_breakpoint(&spur, stats, 0.5).is_none());
    }

    fn step(p: usize, tau: (usize, usize), d: f64) -> Vec<f64> {
        (1..=p)
            .map(|j| if (tau.0..tau.1).contains(&j) { d } else { 0.0 })
            .collect()
    }

    #[test]
    fn noiseless_step_exact() {
        let x = step(400, (121, 201), 2.0);
        let cfg = WindowConfig::new(20).with_mc_reps(200);
        let res = detect_one_sided(&Series::new(x.clone()).unwrap(), &cfg).unwrap();
        assert_eq!(res.noise.sigma2_hat, Some(0.0));
        assert!(res.rejected_null);
        assert_eq!(res.breakpoint_indices(), vec![121, 201]);
        assert_eq!(res.clusters, vec![Cluster { start: 121, end: 201 }]);
        let cfg = WindowConfig::new(20).with_mc_reps(200).with_thresholds(0.2, 0.0);
        let res = detect_one_sided(&Series::new(x).unwrap(), &cfg).unwrap();
        assert_eq!(res.breakpoint_indices(), vec![121, 201]);
        assert!(res.breakpoints.iter().all(|b| !b.fallback));
    }

    #[test]
    fn breakpoints_lie_next_to_their_component() {
        let mut x = step(300, (101, 181), 1.5);
        for (i, v) in x.iter_mut().enumerate() {
            *v += 0.3 * ((i * 7919 % 13) as f64 / 6.0 - 1.0);
        }
        let res = detect_one_sided(&Series::new(x).unwrap(), &WindowConfig::new(15).with_mc_reps(500)).unwrap();
        let seg = segment(&res.labels, res.label_offset);
        for b in &res.breakpoints {
            assert!(seg.components.iter().any(|c| c.contains(b.index - 1)));
        }
    }

    #[test]
    fn two_sided_finds_alternating_block() {
        let p = 400;
        let x: Vec<f64> = (1..=p)
            .map(|j| {
                if (151..211).contains(&j) {
                    if j % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                } else {
                    0.0
                }
            })
            .collect();
        let s = Series::new(x).unwrap();
        let cfg = WindowConfig::new(20).with_mc_reps(300);
        // Window means over the block never exceed 1/k.
        let one = detect_one_sided(&s, &cfg.clone().with_thresholds(0.2, 0.0)).unwrap();
        assert!(!one.rejected_null && one.breakpoints.is_empty());
        let det = Detector::new(cfg).with_noise(NoiseModel::Known {
            sigma2: 1e-9,
            kappa2: 1e-9,
        });
        let two = det.two_sided(&s).unwrap();
        assert_eq!(two.breakpoint_indices(), vec![151, 211]);
    }

    #[test]
    fn cache_is_shared() {
        let det = Detector::new(WindowConfig::new(10).with_mc_reps(200));
        let s = Series::new(step(200, (50, 90), 1.0)).unwrap();
        det.one_sided(&s).unwrap();
        det.one_sided(&s.scaled(2.0).unwrap()).unwrap();
        assert_eq!(det.cache().len(), 1);
    }

    #[test]
    fn multi_two_sided_needs_four_rows() {
        let panel = Panel::from_rows(&[vec![0.0; 20], vec![1.0; 20], vec![2.0; 20]]).unwrap();
        let err = detect_multi_two_sided(&panel, &WindowConfig::new(3).with_mc_reps(100)).unwrap_err();
        assert!(matches!(err, Error::TooFewRealizations { need: 4, got: 3 }));
    }
}
