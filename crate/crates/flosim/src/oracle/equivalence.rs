//! Randomized equivalence testing between the covariance-matrix engine and
//! the dense Majorana oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{GaussianState, ModePair};
use crate::oracle::majorana::DenseMajorana;

/// Worst deviations observed over a batch of random FLO sequences.
#[derive(Debug, Clone, Copy, Default)]
pub struct EquivalenceReport {
    pub sequences: usize,
    pub max_cov_dev: f64,
    pub max_prob_dev: f64,
}

impl EquivalenceReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_cov_dev <= tol && self.max_prob_dev <= tol
    }
}

/// Run `sequences` random FLO sequences (random pairing init, then up to
/// `max_ops` rotations and measurements on up to 8 modes) through both the
/// engine and the dense oracle, tracking the worst covariance-entry and
/// outcome-probability deviations.
pub fn random_sequences(sequences: usize, max_ops: usize, seed: u64) -> EquivalenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivalenceReport {
        sequences,
        ..Default::default()
    };
    for _ in 0..sequences {
        let num_modes = 2 * rng.random_range(2..=4usize);
        let mut order: Vec<usize> = (0..num_modes).collect();
        order.shuffle(&mut rng);
        let pairs: Vec<(usize, usize, i8)> = order
            .chunks(2)
            .map(|c| (c[0], c[1], if rng.random_bool(0.5) { 1 } else { -1 }))
            .collect();
        let engine_pairs: Vec<ModePair> = pairs
            .iter()
            .map(|&(p, q, s)| ModePair::with_sign(p as u32, q as u32, s))
            .collect();
        let mut state = GaussianState::from_pairing(&engine_pairs).unwrap();
        let mut dense = DenseMajorana::from_pairing(num_modes, &pairs);
        track_cov(&state, &dense, num_modes, &mut report);
        let ops = rng.random_range(1..=max_ops);
        for _ in 0..ops {
            let p = rng.random_range(0..num_modes);
            let mut q = rng.random_range(0..num_modes);
            while q == p {
                q = rng.random_range(0..num_modes);
            }
            if rng.random_bool(0.5) {
                let gamma = rng.random_range(0.0..std::f64::consts::PI);
                state.rotate(p as u32, q as u32, gamma).unwrap();
                dense.rotate(p, q, gamma);
            } else {
                let prob_plus = dense.clone().measure(p, q, 1).unwrap_or(0.0);
                let outcome = if rng.random_bool(prob_plus.clamp(0.0, 1.0)) {
                    1
                } else {
                    -1
                };
                let dense_lambda = dense.measure(p, q, outcome).unwrap();
                let engine_lambda = state.measure_pair(p as u32, q as u32, outcome).unwrap();
                report.max_prob_dev = report.max_prob_dev.max((dense_lambda - engine_lambda).abs());
            }
            track_cov(&state, &dense, num_modes, &mut report);
        }
    }
    report
}

fn track_cov(
    state: &GaussianState,
    dense: &DenseMajorana,
    num_modes: usize,
    report: &mut EquivalenceReport,
) {
    let m = dense.covariance();
    for p in 0..num_modes {
        for q in 0..num_modes {
            if p == q {
                continue;
            }
            let e = state.expectation_pair(p as u32, q as u32).unwrap();
            report.max_cov_dev = report.max_cov_dev.max((e - m[p][q]).abs());
        }
    }
}
