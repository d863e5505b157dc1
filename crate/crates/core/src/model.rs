// SPDX-License-Identifier: MIT OR Apache-2.0

//! Domain types shared by every stage of the pipeline.
//!
//! Public indices are 1-based: a break-point `τ` is the first index of the
//! new regime, so a signal cluster occupies `τ_up..τ_down` (half-open).
//! Internal storage is 0-based and the conversion happens at the API edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::StatSeries;

/// One realization `X_1..X_p`, optionally with genomic coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    positions: Option<Vec<i64>>,
    label: String,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None, String::new())
    }

    pub fn with_positions(values: Vec<f64>, positions: Vec<i64>) -> Result<Self> {
        Self::build(values, Some(positions), String::new())
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn build(values: Vec<f64>, positions: Option<Vec<i64>>, label: String) -> Result<Self> {
        let s = Series {
            values,
            positions,
            label,
        };
        s.validate()?;
        Ok(s)
    }

    /// Re-checks every invariant. Construction already does this, so calling
    /// it again on a constructed value always succeeds.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::TooShort {
                p: self.values.len(),
                min: 2,
            });
        }
        check_finite(&self.values)?;
        if let Some(pos) = &self.positions {
            if pos.len() != self.values.len() {
                return Err(Error::PositionsLength {
                    values: self.values.len(),
                    positions: pos.len(),
                });
            }
            if let Some(i) = pos.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::NonIncreasingPositions { index: i + 2 });
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn positions(&self) -> Option<&[i64]> {
        self.positions.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c·X`, keeping positions and label.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::build(
            self.values.iter().map(|v| v * c).collect(),
            self.positions.clone(),
            self.label.clone(),
        )
    }

    /// `−X`, used to run the amplification detector on deletions.
    pub fn negated(&self) -> Self {
        Series {
            values: self.values.iter().map(|v| -v).collect(),
            positions: self.positions.clone(),
            label: self.label.clone(),
        }
    }
}

/// `n` realizations of length `p`, stored column-major so per-locus
/// reductions read contiguous memory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    n: usize,
    p: usize,
    data: Vec<f64>,
    labels: Vec<String>,
}

impl Panel {
    /// Builds a panel from its rows (one row per realization).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewRealizations { need: 2, got: n });
        }
        let p = rows[0].len();
        let mut data = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::PanelShape {
                    len: row.len(),
                    n,
                    p,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Self::from_columns(n, p, data)
    }

    /// Builds a panel from column-major data: entry `(i, j)` at `j * n + i`.
    pub fn from_columns(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::PanelShape {
                len: data.len(),
                n,
                p,
            });
        }
        let panel = Panel {
            n,
            p,
            data,
            labels: (1..=n).map(|i| format!("r{i}")).collect(),
        };
        panel.validate()?;
        Ok(panel)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid(
                "labels",
                format!("expected {} labels, got {}", self.n, labels.len()),
            ));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewRealizations {
                need: 2,
                got: self.n,
            });
        }
        if self.p < 2 {
            return Err(Error::TooShort { p: self.p, min: 2 });
        }
        // Report the first offending locus, in sequence order.
        for j in 0..self.p {
            if self.column(j).iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: j + 1 });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// All `n` observations at locus `j` (0-based).
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.data[j * self.n + i]).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Panel::from_columns(self.n, self.p, self.data.iter().map(|v| v * c).collect())
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite { index: i + 1 }),
        None => Ok(()),
    }
}

/// Known break-points and mean sequence of a simulated configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// `τ_1 < τ_2 < …`, 1-based, alternating up/down starting with up.
    pub breakpoints: Vec<usize>,
    pub means: Vec<f64>,
}

impl GroundTruth {
    pub fn new(breakpoints: Vec<usize>, means: Vec<f64>) -> Result<Self> {
        let p = means.len();
        check_finite(&means)?;
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("breakpoints", "must be strictly increasing"));
        }
        if breakpoints.iter().any(|&t| t == 0 || t > p + 1) {
            return Err(Error::invalid("breakpoints", format!("must lie in 1..={}", p + 1)));
        }
        let truth = GroundTruth { breakpoints, means };
        let mask = truth.signal_mask();
        if let Some(j) = (0..p).find(|&j| !mask[j] && truth.means[j] != 0.0) {
            return Err(Error::invalid(
                "means",
                format!("nonzero mean at non-signal index {}", j + 1),
            ));
        }
        Ok(truth)
    }

    /// A configuration with no signal anywhere.
    pub fn null(p: usize) -> Self {
        GroundTruth {
            breakpoints: Vec::new(),
            means: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.means.len()
    }

    /// Signal clusters as half-open 1-based intervals.
    pub fn clusters(&self) -> Vec<Cluster> {
        self.breakpoints
            .chunks(2)
            .map(|c| Cluster {
                start: c[0],
                end: c.get(1).copied().unwrap_or(self.p() + 1),
            })
            .collect()
    }

    /// `mask[j]` is true when 0-based index `j` lies in the signal set.
    pub fn signal_mask(&self) -> Vec<bool> {
        clusters_to_mask(&self.clusters(), self.p())
    }
}

/// Half-open interval `start..end` of 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub start: usize,
    pub end: usize,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..self.end).contains(&index)
    }
}

pub fn clusters_to_mask(clusters: &[Cluster], p: usize) -> Vec<bool> {
    let mut mask = vec![false; p];
    for c in clusters {
        let lo = c.start.max(1) - 1;
        let hi = (c.end - 1).min(p);
        for m in &mut mask[lo..hi] {
            *m = true;
        }
    }
    mask
}

/// Window size, estimator window, level and Monte Carlo settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub k: usize,
    /// Variance-estimation window; `None` means `m = k`.
    pub m: Option<usize>,
    pub alpha: f64,
    /// User-fixed classification threshold; calibrated when `None`.
    pub gamma: Option<f64>,
    /// User-fixed localization threshold; calibrated when `None`.
    pub delta: Option<f64>,
    pub mc_reps: usize,
    pub seed: u64,
    /// Order statistic used by the variance estimators; `None` is the median.
    pub order_index: Option<usize>,
    /// Half-width of the majority vote; `None` couples it to `k`.
    pub vote_half_width: Option<usize>,
    /// Localize even when the omnibus test does not reject.
    pub always_localize: bool,
}

pub const DEFAULT_MC_REPS: usize = 10_000;

impl WindowConfig {
    pub fn new(k: usize) -> Self {
        WindowConfig {
            k,
            m: None,
            alpha: 0.05,
            gamma: None,
            delta: None,
            mc_reps: DEFAULT_MC_REPS,
            seed: 0,
            order_index: None,
            vote_half_width: None,
            always_localize: false,
        }
    }

    /// `k = ⌊√p⌋`, the window used throughout the simulation studies.
    pub fn sqrt_rule(p: usize) -> Self {
        Self::new(((p as f64).sqrt().floor() as usize).max(1))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mc_reps(mut self, reps: usize) -> Self {
        self.mc_reps = reps;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_thresholds(mut self, gamma: f64, delta: f64) -> Self {
        self.gamma = Some(gamma);
        self.delta = Some(delta);
        self
    }

    pub fn estimator_window(&self) -> usize {
        self.m.unwrap_or(self.k)
    }

    pub fn vote_width(&self) -> usize {
        self.vote_half_width.unwrap_or(self.k)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.k == 0 || self.k > p / 2 {
            return Err(Error::WindowOutOfRange { k: self.k, max: p / 2 });
        }
        let m = self.estimator_window();
        if m == 0 || m > p {
            return Err(Error::invalid("m", format!("{m} outside 1..={p}")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} not in (0,1)", self.alpha)));
        }
        for (name, v) in [("gamma", self.gamma), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(name, format!("{v} must be finite and ≥ 0")));
                }
            }
        }
        if let (Some(g), Some(d)) = (self.gamma, self.delta) {
            if d >= g {
                return Err(Error::invalid("delta", format!("{d} must be < gamma {g}")));
            }
        }
        if self.mc_reps < 100 {
            return Err(Error::invalid("mc_reps", format!("{} < 100", self.mc_reps)));
        }
        if self.vote_width() == 0 {
            return Err(Error::invalid("vote_half_width", "must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Non-signal to signal (`0 → 2`).
    Up,
    /// Signal to non-signal (`2 → 0`).
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoint {
    /// First index of the new regime, 1-based.
    pub index: usize,
    pub direction: Direction,
    /// The constrained argmax had no admissible index and fell back to the
    /// unconstrained maximum over the component.
    pub fallback: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub gamma: f64,
    pub delta: f64,
    /// `δ` could not be calibrated (or was not below `γ`) and fell back to `γ/4`.
    pub delta_fallback: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub sigma2_hat: Option<f64>,
    pub kappa2_hat: Option<f64>,
    pub kappa_clamped: bool,
}

/// Output of any detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub p: usize,
    pub k: usize,
    /// Omnibus decision: `max R > γ`.
    pub rejected_null: bool,
    pub max_statistic: f64,
    pub breakpoints: Vec<Breakpoint>,
    pub clusters: Vec<Cluster>,
    /// Smoothed labels `Q̃_j ∈ {0,1,2}` for `j = label_offset..`.
    pub labels: Vec<u8>,
    pub raw_labels: Vec<u8>,
    pub label_offset: usize,
    pub thresholds: Thresholds,
    pub noise: NoiseSummary,
    /// Transition regions with no `0 → 2` or `2 → 0` flank.
    pub spurious: Vec<crate::detect::Component>,
    /// Classification statistic first, then its left counterpart, then any
    /// argmax statistics that differ from them.
    pub statistics: Vec<StatSeries>,
}

impl DetectionResult {
    pub fn breakpoint_indices(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|b| b.index).collect()
    }

    /// `l̂`, the number of located break-points.
    pub fn l_hat(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn signal_mask(&self) -> Vec<bool> {
        clusters_to_mask(&self.clusters, self.p)
    }
}

/// Pairs an up break-point with the next down break-point. A leading down
/// closes a cluster opened at index 1, a trailing up runs to `p + 1`, and a
/// repeated up keeps the first one.
pub fn clusters_from_breakpoints(breakpoints: &[Breakpoint], p: usize) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, b) in breakpoints.iter().enumerate() {
        match b.direction {
            Direction::Up => {
                if open.is_none() {
                    open = Some(b.index);
                }
            }
            Direction::Down => match open.take() {
                Some(start) if start < b.index => out.push(Cluster {
                    start,
                    end: b.index,
                }),
                Some(_) => {}
                None if i == 0 && b.index > 1 => out.push(Cluster {
                    start: 1,
                    end: b.index,
                }),
                None => {}
            },
        }
    }
    if let Some(start) = open {
        out.push(Cluster { start, end: p + 1 });
    }
    out
}
