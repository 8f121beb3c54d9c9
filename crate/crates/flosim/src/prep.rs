//! Preparation simulation: a logical plus state is prepared by measuring all
//! link operators on a noisy product state, decoding the face syndrome, and
//! reading the final logical Bloch vector off the four corner modes.
//!
//! Each qubit starts as a four-mode encoding of its noisy single-qubit state.
//! Links are measured in a column sweep with lazy cluster attachment, so the
//! active window stays O(d). After all links are measured the only coupled
//! modes left are the four corners; the logical Bloch components are direct
//! covariance reads there, weighted by the measured link outcomes along the
//! two logical boundary paths and the decoder's commutation signs.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::decoder::{self, Correction, FaceGraph};
use crate::engine::{EngineError, GaussianState, IMPOSSIBLE_EPS};
use crate::layout::{CodeLayout, LayoutError};

#[derive(Debug, Error)]
pub enum PrepError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("expected {expected} per-qubit states, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("no trials to aggregate")]
    EmptySample,
}

/// Per-qubit pure input states as Bloch vectors.
#[derive(Debug, Clone)]
pub struct PrepNoise {
    pub bloch: Vec<[f64; 3]>,
}

impl PrepNoise {
    /// Every qubit in the state `exp(i phi X) exp(i theta Z) |+>`.
    pub fn from_angles(num_qubits: usize, theta: f64, phi: f64) -> Self {
        Self {
            bloch: vec![bloch_of_angles(theta, phi); num_qubits],
        }
    }

    pub fn per_qubit(bloch: Vec<[f64; 3]>) -> Self {
        Self { bloch }
    }

    fn check(&self, layout: &CodeLayout) -> Result<(), PrepError> {
        if self.bloch.len() != layout.num_qubits() {
            return Err(PrepError::WrongLength {
                expected: layout.num_qubits(),
                got: self.bloch.len(),
            });
        }
        Ok(())
    }
}

/// Bloch vector of `exp(i phi X) exp(i theta Z) |+>`, computed from the
/// two-dimensional state vector.
pub fn bloch_of_angles(theta: f64, phi: f64) -> [f64; 3] {
    let a = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
    let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -theta);
    let i = Complex64::new(0.0, 1.0);
    let psi0 = phi.cos() * a + i * phi.sin() * b;
    let psi1 = phi.cos() * b + i * phi.sin() * a;
    let z = psi0.conj() * psi1;
    [2.0 * z.re, 2.0 * z.im, psi0.norm_sqr() - psi1.norm_sqr()]
}

/// One full preparation trial.
#[derive(Debug, Clone)]
pub struct PrepTrial {
    /// Link outcomes per edge.
    pub m: Vec<i8>,
    /// Face syndromes `s_f = prod m_e`.
    pub s: Vec<i8>,
    /// Final logical Bloch vector after the correction and sign fix.
    pub bloch: [f64; 3],
    /// Bloch vector before the sign fix (what the shared decoder produced).
    pub raw_bloch: [f64; 3],
    /// Whether a logical Z was absorbed to make `b^x` nonnegative.
    pub sign_fixed: bool,
    pub correction: Correction,
    /// Log probability of the sampled link outcome vector.
    pub log_prob: f64,
    pub peak_modes: usize,
}

/// Measure all link operators on the noisy product state, decode, and read
/// the logical Bloch vector.
pub fn run_prep_trial(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    z_graph: &FaceGraph,
    noise: &PrepNoise,
    rng: &mut impl Rng,
) -> Result<PrepTrial, PrepError> {
    noise.check(layout)?;
    let mut state = GaussianState::empty();
    let mut attached = vec![false; layout.num_qubits()];
    let mut m = vec![0i8; layout.edges.len()];
    let mut log_prob = 0.0;
    for e in layout.link_sweep_order() {
        let edge = &layout.edges[e];
        for v in [edge.a, edge.b] {
            if !attached[v] {
                attached[v] = true;
                let block = GaussianState::from_bloch_c4(layout.clusters[v], noise.bloch[v])?;
                state.attach_block(&block)?;
            }
        }
        let (p, q) = (edge.tail_mode(), edge.head_mode());
        let p_plus = state.outcome_probability(p, q, 1)?.clamp(0.0, 1.0);
        let outcome: i8 = if p_plus <= IMPOSSIBLE_EPS {
            -1
        } else if 1.0 - p_plus <= IMPOSSIBLE_EPS {
            1
        } else if rng.random::<f64>() < p_plus {
            1
        } else {
            -1
        };
        let lambda = state.measure_pair(p, q, outcome)?;
        log_prob += lambda.ln();
        state.detach_pair(p, q)?;
        m[e] = outcome;
    }

    let s = layout.face_syndromes(&m);
    let mut correction = decoder::prep_correction(layout, x_graph, z_graph, &s);

    let c = layout.corners;
    let left_prod: f64 = layout
        .left_face
        .path_edges
        .iter()
        .map(|&e| f64::from(m[e]))
        .product();
    let top_prod: f64 = layout
        .top_face
        .path_edges
        .iter()
        .map(|&e| f64::from(m[e]))
        .product();
    let bx = f64::from(correction.lambda_x) * left_prod * state.expectation_pair(c[0], c[1])?;
    let bz = f64::from(correction.lambda_z) * top_prod * state.expectation_pair(c[1], c[2])?;
    let by = f64::from(correction.lambda_y)
        * left_prod
        * top_prod
        * (-state.expectation_pair(c[0], c[2])?);
    let raw_bloch = [bx, by, bz];
    let sign_fixed = decoder::fix_sign(layout, &mut correction, bx);
    let bloch = if sign_fixed { [-bx, -by, bz] } else { raw_bloch };

    Ok(PrepTrial {
        m,
        s,
        bloch,
        raw_bloch,
        sign_fixed,
        correction,
        log_prob,
        peak_modes: state.peak_modes(),
    })
}

/// Preparation error metric with standard error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PrepMetrics {
    pub trials: usize,
    /// Mean trace distance `sqrt(2) * sqrt(1 - b^x)`; lies in `[0, sqrt 2]`.
    pub pl: f64,
    pub pl_se: f64,
}

pub fn estimate_prep_pl(trials: &[PrepTrial]) -> Result<PrepMetrics, PrepError> {
    if trials.is_empty() {
        return Err(PrepError::EmptySample);
    }
    let n = trials.len();
    let values: Vec<f64> = trials
        .iter()
        .map(|t| std::f64::consts::SQRT_2 * (1.0 - t.bloch[0].clamp(-1.0, 1.0)).sqrt())
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Ok(PrepMetrics {
        trials: n,
        pl: mean,
        pl_se: se,
    })
}

/// Canonicalize a noise angle pair into `[0, pi/4]^2` using the symmetry
/// group generated by quarter-period shifts and negations of each angle.
pub fn prep_symmetry_check(theta: f64, phi: f64) -> (f64, f64) {
    (canonical_angle(theta), canonical_angle(phi))
}

fn canonical_angle(x: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let mut t = x.rem_euclid(half);
    if t > half / 2.0 {
        t = half - t;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::PauliKind;
    use crate::oracle::qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn graphs(layout: &CodeLayout) -> (FaceGraph, FaceGraph) {
        (
            FaceGraph::build(layout, PauliKind::X),
            FaceGraph::build(layout, PauliKind::Z),
        )
    }

    fn qubit_state(theta: f64, phi: f64) -> [Complex64; 2] {
        let a = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
        let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -theta);
        let i = Complex64::new(0.0, 1.0);
        [
            phi.cos() * a + i * phi.sin() * b,
            phi.cos() * b + i * phi.sin() * a,
        ]
    }

    #[test]
    fn bloch_of_angles_is_unit_and_matches_axes() {
        let b = bloch_of_angles(0.0, 0.0);
        assert!((b[0] - 1.0).abs() < 1e-12 && b[1].abs() < 1e-12 && b[2].abs() < 1e-12);
        let b = bloch_of_angles(FRAC_PI_2, 0.0);
        assert!((b[0] + 1.0).abs() < 1e-12);
        for (t, p) in [(0.3, 0.2), (-1.1, 0.7), (2.0, -0.4)] {
            let b = bloch_of_angles(t, p);
            let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_input_gives_plus_logical() {
        let layout = CodeLayout::build(3).unwrap();
        let (xg, zg) = graphs(&layout);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for phi in [0.0, 0.4, 1.2] {
            let noise = PrepNoise::from_angles(9, 0.0, phi);
            for _ in 0..5 {
                let t = run_prep_trial(&layout, &xg, &zg, &noise, &mut rng).unwrap();
                assert!((t.bloch[0] - 1.0).abs() < 1e-9, "bloch {:?}", t.bloch);
                assert!(t.bloch[1].abs() < 1e-9 && t.bloch[2].abs() < 1e-9);
                assert!(!t.sign_fixed);
            }
        }
    }

    #[test]
    fn minus_input_is_flipped_by_sign_fix() {
        let layout = CodeLayout::build(3).unwrap();
        let (xg, zg) = graphs(&layout);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noise = PrepNoise::from_angles(9, FRAC_PI_2, 0.0);
        for _ in 0..5 {
            let t = run_prep_trial(&layout, &xg, &zg, &noise, &mut rng).unwrap();
            assert!((t.raw_bloch[0] + 1.0).abs() < 1e-9, "raw {:?}", t.raw_bloch);
            assert!(t.sign_fixed);
            assert!((t.bloch[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn per_syndrome_bloch_matches_dense_oracle() {
        let layout = CodeLayout::build(3).unwrap();
        let (xg, zg) = graphs(&layout);
        let (theta, phi) = (0.35, 0.15);
        let noise = PrepNoise::from_angles(9, theta, phi);
        let dense = qubit::dense_prep_reference(&layout, &[qubit_state(theta, phi); 9]);
        let by_syndrome: HashMap<Vec<i8>, [f64; 3]> = dense
            .iter()
            .map(|r| (r.signs.clone(), r.bloch))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = 0usize;
        for _ in 0..200 {
            let t = run_prep_trial(&layout, &xg, &zg, &noise, &mut rng).unwrap();
            let want = by_syndrome.get(&t.s).expect("sampled syndrome missing from oracle");
            for k in 0..3 {
                assert!(
                    (t.raw_bloch[k] - want[k]).abs() < 1e-7,
                    "syndrome {:?}: {:?} vs {:?}",
                    t.s,
                    t.raw_bloch,
                    want
                );
            }
            let norm = t
                .bloch
                .iter()
                .map(|b| b * b)
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "bloch norm {norm}");
            seen += 1;
        }
        assert_eq!(seen, 200);
    }

    #[test]
    fn syndrome_distribution_close_to_dense_oracle() {
        let layout = CodeLayout::build(3).unwrap();
        let (xg, zg) = graphs(&layout);
        let (theta, phi) = (0.25, 0.0);
        let noise = PrepNoise::from_angles(9, theta, phi);
        let dense = qubit::dense_prep_reference(&layout, &[qubit_state(theta, phi); 9]);
        let exact: HashMap<Vec<i8>, f64> =
            dense.iter().map(|r| (r.signs.clone(), r.p)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 20_000usize;
        let mut counts: HashMap<Vec<i8>, usize> = HashMap::new();
        for _ in 0..trials {
            let t = run_prep_trial(&layout, &xg, &zg, &noise, &mut rng).unwrap();
            *counts.entry(t.s).or_insert(0) += 1;
        }
        let mut keys: Vec<Vec<i8>> = exact.keys().cloned().collect();
        for k in counts.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
        let mut tv = 0.0;
        for k in keys {
            let p = exact.get(&k).copied().unwrap_or(0.0);
            let q = counts.get(&k).copied().unwrap_or(0) as f64 / trials as f64;
            tv += (p - q).abs();
        }
        tv /= 2.0;
        assert!(tv < 0.05, "total variation {tv}");
    }

    #[test]
    fn bloch_norm_and_window_at_larger_distance() {
        let layout = CodeLayout::build(9).unwrap();
        let (xg, zg) = graphs(&layout);
        let noise = PrepNoise::from_angles(81, 0.25, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let t = run_prep_trial(&layout, &xg, &zg, &noise, &mut rng).unwrap();
            let norm = t.bloch.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-6, "bloch norm {norm}");
            assert!(t.bloch[0] >= 0.0);
            assert!(t.peak_modes <= 8 * 9, "peak modes {}", t.peak_modes);
        }
    }

    #[test]
    fn prep_metric_endpoints() {
        let make = |bx: f64| PrepTrial {
            m: Vec::new(),
            s: Vec::new(),
            bloch: [bx, 0.0, 0.0],
            raw_bloch: [bx, 0.0, 0.0],
            sign_fixed: false,
            correction: Correction::identity(9),
            log_prob: 0.0,
            peak_modes: 0,
        };
        let ones = vec![make(1.0); 4];
        assert_eq!(estimate_prep_pl(&ones).unwrap().pl, 0.0);
        let zeros = vec![make(0.0); 4];
        assert!((estimate_prep_pl(&zeros).unwrap().pl - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(matches!(
            estimate_prep_pl(&[]),
            Err(PrepError::EmptySample)
        ));
    }

    #[test]
    fn symmetry_canonicalization_examples() {
        let close = |(a, b): (f64, f64), (c, d): (f64, f64)| {
            assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12, "({a},{b}) vs ({c},{d})");
        };
        close(prep_symmetry_check(0.3 * PI, 0.0), (0.2 * PI, 0.0));
        close(prep_symmetry_check(-0.1 * PI, 0.6 * PI), (0.1 * PI, 0.1 * PI));
        close(
            prep_symmetry_check(0.1 * PI, 0.2 * PI),
            (0.1 * PI, 0.2 * PI),
        );
    }
}
