// SPDX-License-Identifier: MIT OR Apache-2.0

//! Detection and localization of clustered signals in long noisy sequences.
//!
//! A sliding window of size `k` turns the sequence into right- and
//! left-looking statistics. Comparing them with a Monte Carlo calibrated
//! cutoff `γ` labels every index as noise, transition or signal; transition
//! runs are then narrowed to single break-points with a second cutoff `δ`.
//!
//! ```
//! use clusterscan::{detect_one_sided, Series, WindowConfig};
//!
//! let mut x = vec![0.0; 400];
//! for v in &mut x[120..200] {
//!     *v = 1.0;
//! }
//! let series = Series::new(x).unwrap();
//! let config = WindowConfig::new(20).with_mc_reps(200).with_thresholds(0.2, 0.0);
//! let result = detect_one_sided(&series, &config).unwrap();
//! assert_eq!(result.breakpoint_indices(), vec![121, 201]);
//! ```

pub mod baselines;
pub mod calibration;
pub mod detect;
pub mod error;
pub mod io;
pub mod model;
pub mod multi;
pub mod rng;
pub mod sim;
pub mod variance;
pub mod window;

pub use calibration::{CutoffCache, CutoffSpec, G4Variant, Innovation, MaxProcess, ProcessKind};
pub use detect::{
    detect_multi_one_sided, detect_multi_two_sided, detect_one_sided, detect_two_sided, Component, Detector,
    NoiseModel, Transition,
};
pub use error::{Error, Result};
pub use model::{
    clusters_from_breakpoints, clusters_to_mask, Breakpoint, Cluster, DetectionResult, Direction, GroundTruth,
    NoiseSummary, Panel, Series, Thresholds, WindowConfig,
};
pub use window::{StatKind, StatSeries};
