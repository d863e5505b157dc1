// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproducible random streams.
//!
//! [`NoiseField`] is a counter-based Gaussian field: normal number `i` of
//! path `b` is a pure function of `(seed, b, i)`. Any sub-range can be
//! generated without touching the rest, so a maximum restricted to a subset
//! of window positions sees exactly the values the full-path maximum saw.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed domains keep calibration noise and simulated data independent even
/// when both are driven by the same user seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Calibration = 0x6361_6c69,
    Data = 0x6461_7461,
}

pub(crate) fn domain_rng(seed: u64, domain: Domain) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Generator for replication `rep` of a simulation seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = domain_rng(seed, Domain::Data);
    rng.set_stream(rep);
    rng
}

#[derive(Clone, Debug)]
pub struct NoiseField {
    base: ChaCha8Rng,
}

impl NoiseField {
    pub fn new(seed: u64) -> Self {
        NoiseField {
            base: domain_rng(seed, Domain::Calibration),
        }
    }

    /// Writes normals `start..start + out.len()` of path `path` into `out`.
    pub fn fill_normals(&self, path: u64, start: u64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        let mut rng = self.base.clone();
        rng.set_stream(path);
        // Each Box–Muller pair consumes four 32-bit words.
        rng.set_word_pos(4 * u128::from(start / 2));
        let mut i = 0;
        if start % 2 == 1 {
            out[0] = box_muller(&mut rng).1;
            i = 1;
        }
        while i + 1 < out.len() {
            let (a, b) = box_muller(&mut rng);
            out[i] = a;
            out[i + 1] = b;
            i += 2;
        }
        if i < out.len() {
            out[i] = box_muller(&mut rng).0;
        }
    }

    pub fn normal(&self, path: u64, index: u64) -> f64 {
        let mut v = [0.0];
        self.fill_normals(path, index, &mut v);
        v[0]
    }
}

#[inline]
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: never zero, so the logarithm stays finite.
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = unit_open(rng);
    let u2 = unit_open(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_ranges_match_full_path() {
        let field = NoiseField::new(42);
        let mut full = vec![0.0; 101];
        field.fill_normals(3, 0, &mut full);
        for start in [0usize, 1, 2, 7, 50, 99] {
            for len in [1usize, 2, 3, 10] {
                if start + len > full.len() {
                    continue;
                }
                let mut part = vec![0.0; len];
                field.fill_normals(3, start as u64, &mut part);
                assert_eq!(part, full[start..start + len]);
            }
        }
        assert_eq!(field.normal(3, 17), full[17]);
    }

    #[test]
    fn paths_and_seeds_differ() {
        let a = NoiseField::new(1).normal(0, 0);
        assert_ne!(a, NoiseField::new(1).normal(1, 0));
        assert_ne!(a, NoiseField::new(2).normal(0, 0));
    }

    #[test]
    fn standard_normal_moments() {
        let field = NoiseField::new(9);
        let mut v = vec![0.0; 200_000];
        field.fill_normals(0, 0, &mut v);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let kurt = v.iter().map(|x| x.powi(4)).sum::<f64>() / n;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
        assert!((kurt - 3.0).abs() < 0.06, "{kurt}");
    }

    #[test]
    fn data_streams_are_independent_of_calibration() {
        let mut data = replication_rng(5, 0);
        let mut calib = domain_rng(5, Domain::Calibration);
        assert_ne!(data.next_u64(), calib.next_u64());
    }
}
