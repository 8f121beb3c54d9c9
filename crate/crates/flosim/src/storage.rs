//! Storage simulation: a logical state is stored while every qubit suffers a
//! coherent Z rotation; the X syndrome is then measured, decoded, and the
//! residual logical rotation angle extracted.
//!
//! The whole pipeline runs on the Gaussian-state engine. Each qubit's
//! transversal X measurement becomes two pair-parity measurements on its
//! four-mode cluster (the encoded X and X-times-stabilizer pairs), preceded
//! by a two-mode rotation realizing the coherent error. Qubits are processed
//! column by column so that only an O(d) window of modes is active at once.
//!
//! Probabilities are tracked in the log domain throughout: the residual
//! angle of a syndrome comes from ratios of four all-plus-outcome circuit
//! weights (two rotation offsets, two corner bases), which stay well-defined
//! long after the raw weights underflow.

use rand::Rng;
use thiserror::Error;

use crate::decoder::{self, FaceGraph};
use crate::engine::{EngineError, GaussianState, ModePair};
use crate::layout::{ClusterOp, CodeLayout, LayoutError, PauliKind};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("expected {expected} per-qubit angles, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("both circuit weights vanished; logical angle is undefined")]
    DegenerateWeights,
    #[error("no trials to aggregate")]
    EmptySample,
}

/// Basis in which the four unpaired corner modes are initialized: the `X`
/// pairing encodes the logical X eigenstate, the `Y` pairing the logical Y
/// eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerBasis {
    X,
    Y,
}

/// Per-qubit coherent Z-rotation angles.
#[derive(Debug, Clone)]
pub struct StorageNoise {
    pub eta: Vec<f64>,
}

impl StorageNoise {
    pub fn uniform(num_qubits: usize, theta: f64) -> Self {
        Self {
            eta: vec![theta; num_qubits],
        }
    }

    pub fn per_qubit(eta: Vec<f64>) -> Self {
        Self { eta }
    }

    fn check(&self, layout: &CodeLayout) -> Result<(), StorageError> {
        if self.eta.len() != layout.num_qubits() {
            return Err(StorageError::WrongLength {
                expected: layout.num_qubits(),
                got: self.eta.len(),
            });
        }
        Ok(())
    }
}

/// One sampled transversal-X measurement record.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    /// Outcome per qubit, column-major order.
    pub m: Vec<i8>,
    /// Natural log of the probability of this outcome vector.
    pub log_prob: f64,
    /// High-water mark of simultaneously active modes during the sweep.
    pub peak_modes: usize,
}

/// Logical-angle extraction record for one syndrome.
#[derive(Debug, Clone)]
pub struct AngleInfo {
    /// Residual logical rotation angle in `[0, pi)`.
    pub theta: f64,
    /// Log weights of the four all-plus circuits (`None` = weight zero):
    /// plain/offset rotation angles in the X and Y corner bases.
    pub log_p_plus: Option<f64>,
    pub log_p_minus: Option<f64>,
    pub log_q_plus: Option<f64>,
    pub log_q_minus: Option<f64>,
    /// `|cos^2 + sin^2 - 1|` of the two independently computed double-angle
    /// functions; should be below 1e-6.
    pub trig_defect: f64,
}

/// One full storage trial.
#[derive(Debug, Clone)]
pub struct StorageTrial {
    /// Transversal X outcomes, column-major.
    pub m: Vec<i8>,
    /// Fired X faces (indices into `layout.faces`), ascending.
    pub defects: Vec<usize>,
    /// Residual logical rotation angle in `[0, pi)`.
    pub theta_s: f64,
    /// Log probability of the sampled outcome vector.
    pub log_prob: f64,
    /// Log weights of the four angle-extraction circuits, in the order
    /// (X-basis plain, X-basis offset, Y-basis plain, Y-basis offset).
    pub weight_logs: [Option<f64>; 4],
    pub trig_defect: f64,
    pub peak_modes: usize,
}

/// The four circuit weights are formed per qubit as `kappa * lambda1 *
/// lambda2`; `kappa = 2` for every qubit except the last.
fn log_kappa(u: usize, n: usize) -> f64 {
    if u + 1 < n {
        std::f64::consts::LN_2
    } else {
        0.0
    }
}

fn corner_pairs(layout: &CodeLayout, basis: CornerBasis) -> [ModePair; 2] {
    let c = layout.corners;
    match basis {
        CornerBasis::X => [ModePair::new(c[0], c[1]), ModePair::new(c[2], c[3])],
        CornerBasis::Y => [
            ModePair::with_sign(c[0], c[2], -1),
            ModePair::with_sign(c[1], c[3], 1),
        ],
    }
}

/// Column-major sweep over vertex clusters with lazy pair attachment.
struct Sweep<'a> {
    layout: &'a CodeLayout,
    state: GaussianState,
    /// Pairs to attach right before processing each vertex.
    attach: Vec<Vec<ModePair>>,
}

impl<'a> Sweep<'a> {
    fn new(layout: &'a CodeLayout, basis: CornerBasis) -> Self {
        let n = layout.num_qubits();
        let mut attach: Vec<Vec<ModePair>> = vec![Vec::new(); n];
        let mut edge_attached = vec![false; layout.edges.len()];
        let corners = corner_pairs(layout, basis);
        let mut corner_attached = [false; 2];
        for u in 0..n {
            for &e in &layout.incident_edges[u] {
                if !edge_attached[e] {
                    edge_attached[e] = true;
                    attach[u].push(ModePair::new(
                        layout.edges[e].tail_mode(),
                        layout.edges[e].head_mode(),
                    ));
                }
            }
            if let Some(ci) = layout.corner_vertices.iter().position(|&cv| cv == u) {
                let mode = layout.corners[ci];
                for (pi, pair) in corners.iter().enumerate() {
                    if !corner_attached[pi] && (pair.p == mode || pair.q == mode) {
                        corner_attached[pi] = true;
                        attach[u].push(*pair);
                    }
                }
            }
        }
        Self {
            layout,
            state: GaussianState::empty(),
            attach,
        }
    }

    /// Attach this vertex's fresh pairs and apply its coherent rotation
    /// `exp(i eta Z-bar) = exp(-eta c2 c3)`.
    fn begin_vertex(&mut self, u: usize, eta: f64) -> Result<(), StorageError> {
        self.state.attach_pairs(&self.attach[u])?;
        let (p, q) = self.layout.encoding_pairs(u, ClusterOp::Z)?;
        self.state.rotate(p, q, -eta)?;
        Ok(())
    }

    /// Project both encoded pairs of the cluster onto outcome `m`. Returns
    /// the two branch probabilities, or `None` if the branch is impossible.
    fn measure_vertex(
        state: &mut GaussianState,
        layout: &CodeLayout,
        u: usize,
        m: i8,
    ) -> Result<Option<(f64, f64)>, StorageError> {
        let (x1, x2) = layout.encoding_pairs(u, ClusterOp::X)?;
        let l1 = match state.measure_pair(x1, x2, m) {
            Ok(l) => l,
            Err(EngineError::ImpossibleOutcome { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (s1, s2) = layout.encoding_pairs(u, ClusterOp::XS)?;
        let l2 = match state.measure_pair(s1, s2, m) {
            Ok(l) => l,
            Err(EngineError::ImpossibleOutcome { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(Some((l1, l2)))
    }

    /// Drop the cluster's (now decoupled) measured pairs from the window.
    fn end_vertex(&mut self, u: usize) -> Result<(), StorageError> {
        let (x1, x2) = self.layout.encoding_pairs(u, ClusterOp::X)?;
        self.state.detach_pair(x1, x2)?;
        let (s1, s2) = self.layout.encoding_pairs(u, ClusterOp::XS)?;
        self.state.detach_pair(s1, s2)?;
        Ok(())
    }
}

/// Sample a transversal-X outcome vector, qubit by qubit, each outcome drawn
/// from its exact conditional distribution given the earlier outcomes.
pub fn sample_outcomes(
    layout: &CodeLayout,
    noise: &StorageNoise,
    rng: &mut impl Rng,
    basis: CornerBasis,
) -> Result<SampleRecord, StorageError> {
    noise.check(layout)?;
    let n = layout.num_qubits();
    let mut sweep = Sweep::new(layout, basis);
    let mut m = Vec::with_capacity(n);
    let mut log_prob = 0.0;
    for u in 0..n {
        sweep.begin_vertex(u, noise.eta[u])?;
        let mut plus = sweep.state.clone();
        let p_plus = match Sweep::measure_vertex(&mut plus, layout, u, 1)? {
            Some((l1, l2)) => ((log_kappa(u, n).exp()) * l1 * l2).clamp(0.0, 1.0),
            None => 0.0,
        };
        let mut outcome: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        if outcome == 1 {
            sweep.state = plus;
            log_prob += p_plus.ln();
        } else {
            match Sweep::measure_vertex(&mut sweep.state, layout, u, -1)? {
                Some(_) => log_prob += (1.0 - p_plus).ln(),
                None => {
                    // The minus branch is impossible; force plus.
                    outcome = 1;
                    sweep.state = plus;
                    log_prob += p_plus.ln();
                }
            }
        }
        m.push(outcome);
        sweep.end_vertex(u)?;
    }
    Ok(SampleRecord {
        m,
        log_prob,
        peak_modes: sweep.state.peak_modes(),
    })
}

/// Log probability of one specific outcome vector (`None` = probability 0).
pub fn log_outcome_weight(
    layout: &CodeLayout,
    eta: &[f64],
    basis: CornerBasis,
    m: &[i8],
) -> Result<Option<f64>, StorageError> {
    let n = layout.num_qubits();
    if eta.len() != n || m.len() != n {
        return Err(StorageError::WrongLength {
            expected: n,
            got: eta.len().min(m.len()),
        });
    }
    let mut sweep = Sweep::new(layout, basis);
    let mut logw = 0.0;
    for u in 0..n {
        sweep.begin_vertex(u, eta[u])?;
        match Sweep::measure_vertex(&mut sweep.state, layout, u, m[u])? {
            Some((l1, l2)) => logw += log_kappa(u, n) + l1.ln() + l2.ln(),
            None => return Ok(None),
        }
        sweep.end_vertex(u)?;
    }
    Ok(Some(logw))
}

/// Log probability of the all-plus outcome for the given rotation angles.
pub fn log_weight_of_all_plus(
    layout: &CodeLayout,
    eta: &[f64],
    basis: CornerBasis,
) -> Result<Option<f64>, StorageError> {
    let m = vec![1i8; layout.num_qubits()];
    log_outcome_weight(layout, eta, basis, &m)
}

/// `(a - b) / (a + b)` for two log-domain magnitudes.
fn log_balance(la: Option<f64>, lb: Option<f64>) -> Option<f64> {
    match (la, lb) {
        (None, None) => None,
        (Some(_), None) => Some(1.0),
        (None, Some(_)) => Some(-1.0),
        (Some(a), Some(b)) => {
            if a >= b {
                let r = (b - a).exp();
                Some((1.0 - r) / (1.0 + r))
            } else {
                let r = (a - b).exp();
                Some(-(1.0 - r) / (1.0 + r))
            }
        }
    }
}

/// Residual logical rotation angle after applying the Z correction
/// `correction_z` to a state whose syndrome that correction fixes.
///
/// Four all-plus circuit weights determine the double angle: the correction
/// alone vs the correction composed with a logical Z give `cos(2 theta)` in
/// the X corner basis and `sin(2 theta)` in the Y corner basis.
pub fn logical_angle(
    layout: &CodeLayout,
    noise: &StorageNoise,
    correction_z: &[bool],
) -> Result<AngleInfo, StorageError> {
    noise.check(layout)?;
    let n = layout.num_qubits();
    if correction_z.len() != n {
        return Err(StorageError::WrongLength {
            expected: n,
            got: correction_z.len(),
        });
    }
    let mut on_top = vec![false; n];
    for &u in &layout.logical_z_support {
        on_top[u] = true;
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let eta_plus: Vec<f64> = (0..n)
        .map(|u| noise.eta[u] + if correction_z[u] { half_pi } else { 0.0 })
        .collect();
    let eta_minus: Vec<f64> = (0..n)
        .map(|u| {
            noise.eta[u]
                + if correction_z[u] ^ on_top[u] {
                    half_pi
                } else {
                    0.0
                }
        })
        .collect();

    let log_p_plus = log_weight_of_all_plus(layout, &eta_plus, CornerBasis::X)?;
    let log_p_minus = log_weight_of_all_plus(layout, &eta_minus, CornerBasis::X)?;
    let log_q_plus = log_weight_of_all_plus(layout, &eta_plus, CornerBasis::Y)?;
    let log_q_minus = log_weight_of_all_plus(layout, &eta_minus, CornerBasis::Y)?;

    let cos2 = log_balance(log_p_plus, log_p_minus).ok_or(StorageError::DegenerateWeights)?;
    let sin2 = log_balance(log_q_plus, log_q_minus).ok_or(StorageError::DegenerateWeights)?;
    let theta = (0.5 * sin2.atan2(cos2)).rem_euclid(std::f64::consts::PI);
    Ok(AngleInfo {
        theta,
        log_p_plus,
        log_p_minus,
        log_q_plus,
        log_q_minus,
        trig_defect: (cos2 * cos2 + sin2 * sin2 - 1.0).abs(),
    })
}

/// One storage trial: sample the X syndrome, decode it with minimum-weight
/// matching on the X face graph, and extract the residual logical angle.
pub fn run_storage_trial(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    noise: &StorageNoise,
    rng: &mut impl Rng,
) -> Result<StorageTrial, StorageError> {
    let sample = sample_outcomes(layout, noise, rng, CornerBasis::X)?;
    let defects: Vec<usize> = layout
        .x_face_syndromes_from_vertex_outcomes(&sample.m)
        .into_iter()
        .filter(|&(_, s)| s == -1)
        .map(|(f, _)| f)
        .collect();
    let corr = decoder::mwpm_decode(layout, x_graph, &defects);
    let angle = logical_angle(layout, noise, &corr.z_support)?;
    Ok(StorageTrial {
        m: sample.m,
        defects,
        theta_s: angle.theta,
        log_prob: sample.log_prob,
        weight_logs: [
            angle.log_p_plus,
            angle.log_p_minus,
            angle.log_q_plus,
            angle.log_q_minus,
        ],
        trig_defect: angle.trig_defect,
        peak_modes: sample.peak_modes,
    })
}

pub const HISTOGRAM_BINS: usize = 64;

/// Aggregated storage metrics over a set of residual angles.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StorageMetrics {
    pub trials: usize,
    /// Mean diamond-distance contribution `2 |sin theta_s|`.
    pub pl: f64,
    pub pl_se: f64,
    /// Same metric for the Pauli-twirled channel: mean `2 sin^2 theta_s`.
    pub pl_twirl: f64,
    pub pl_twirl_se: f64,
    /// `pl / pl_twirl`; 1 by convention when both vanish.
    pub conditional_ratio: f64,
    /// Mean `sin^2 theta_s` (incoherent part of the averaged channel).
    pub epsilon: f64,
    /// Mean `sin(2 theta_s) / 2` (coherent part of the averaged channel).
    pub delta: f64,
    /// `sqrt(epsilon^2 + delta^2) / epsilon`; 1 by convention at 0/0.
    pub average_ratio: f64,
    /// Set when either ratio hit the 0/0 convention.
    pub ratio_convention_applied: bool,
    /// Counts of theta_s over equal bins spanning `[0, pi)`.
    pub histogram: Vec<usize>,
}

fn mean_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn estimate_storage_metrics(trials: &[StorageTrial]) -> Result<StorageMetrics, StorageError> {
    if trials.is_empty() {
        return Err(StorageError::EmptySample);
    }
    let n = trials.len();
    let thetas: Vec<f64> = trials.iter().map(|t| t.theta_s).collect();
    let (pl, pl_se) = mean_se(thetas.iter().map(|t| 2.0 * t.sin().abs()), n);
    let (pl_twirl, pl_twirl_se) = mean_se(thetas.iter().map(|t| 2.0 * t.sin().powi(2)), n);
    let epsilon = pl_twirl / 2.0;
    let delta = thetas.iter().map(|t| (2.0 * t).sin()).sum::<f64>() / n as f64 / 2.0;
    let mut convention = false;
    let conditional_ratio = if pl_twirl > 0.0 {
        pl / pl_twirl
    } else {
        convention = true;
        1.0
    };
    let average_ratio = if epsilon > 0.0 {
        (epsilon * epsilon + delta * delta).sqrt() / epsilon
    } else {
        convention = true;
        1.0
    };
    let mut histogram = vec![0usize; HISTOGRAM_BINS];
    for &t in &thetas {
        let bin = ((t / std::f64::consts::PI) * HISTOGRAM_BINS as f64) as usize;
        histogram[bin.min(HISTOGRAM_BINS - 1)] += 1;
    }
    Ok(StorageMetrics {
        trials: n,
        pl,
        pl_se,
        pl_twirl,
        pl_twirl_se,
        conditional_ratio,
        epsilon,
        delta,
        average_ratio,
        ratio_convention_applied: convention,
        histogram,
    })
}

/// Result of the Pauli-twirled baseline Monte Carlo.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwirlEstimate {
    pub trials: usize,
    pub failure_rate: f64,
    /// Logical error metric `2 * failure_rate` (a failure is a full logical
    /// Z, contributing diamond distance 2).
    pub pl: f64,
    pub pl_se: f64,
}

/// One trial of the Pauli-twirled baseline: each qubit suffers a Z error
/// independently with probability `epsilon`; returns whether the residual
/// (error times correction) anticommutes with the logical X.
pub fn twirl_trial(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    epsilon: f64,
    rng: &mut impl Rng,
) -> bool {
    let n = layout.num_qubits();
    let error: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < epsilon).collect();
    let defects: Vec<usize> = layout
        .faces
        .iter()
        .enumerate()
        .filter(|(_, f)| f.kind == PauliKind::X)
        .filter(|(_, f)| f.vertices.iter().filter(|&&u| error[u]).count() % 2 == 1)
        .map(|(fi, _)| fi)
        .collect();
    let corr = decoder::mwpm_decode(layout, x_graph, &defects);
    let residual_overlap = layout
        .logical_x_support
        .iter()
        .filter(|&&u| error[u] ^ corr.z_support[u])
        .count();
    residual_overlap % 2 == 1
}

/// Aggregate a failure count into the twirl metric.
pub fn twirl_estimate(failures: usize, trials: usize) -> Result<TwirlEstimate, StorageError> {
    if trials == 0 {
        return Err(StorageError::EmptySample);
    }
    let rate = failures as f64 / trials as f64;
    Ok(TwirlEstimate {
        trials,
        failure_rate: rate,
        pl: 2.0 * rate,
        pl_se: 2.0 * (rate * (1.0 - rate) / trials as f64).sqrt(),
    })
}

/// Baseline where the coherent rotation is replaced by its Pauli twirl,
/// run sequentially on one RNG.
pub fn twirl_baseline(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    epsilon: f64,
    rng: &mut impl Rng,
    trials: usize,
) -> Result<TwirlEstimate, StorageError> {
    let failures = (0..trials)
        .filter(|_| twirl_trial(layout, x_graph, epsilon, rng))
        .count();
    twirl_estimate(failures, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn angle_distance_mod_pi(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(PI);
        d.min(PI - d)
    }

    /// Exact syndrome distribution from the circuit weights, by enumerating
    /// all 2^9 outcome vectors at distance 3.
    fn exact_syndrome_distribution(
        layout: &CodeLayout,
        eta: &[f64],
    ) -> HashMap<Vec<usize>, f64> {
        let n = layout.num_qubits();
        let mut by_defects: HashMap<Vec<usize>, f64> = HashMap::new();
        for mask in 0..(1u32 << n) {
            let m: Vec<i8> = (0..n)
                .map(|u| if mask >> u & 1 == 1 { -1 } else { 1 })
                .collect();
            let Some(logw) = log_outcome_weight(layout, eta, CornerBasis::X, &m).unwrap() else {
                continue;
            };
            let defects: Vec<usize> = layout
                .x_face_syndromes_from_vertex_outcomes(&m)
                .into_iter()
                .filter(|&(_, s)| s == -1)
                .map(|(f, _)| f)
                .collect();
            *by_defects.entry(defects).or_insert(0.0) += logw.exp();
        }
        by_defects
    }

    fn random_eta(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()
    }

    #[test]
    fn syndrome_distribution_matches_dense_oracle_exactly() {
        let layout = CodeLayout::build(3).unwrap();
        for seed in [1u64, 2] {
            let eta = random_eta(9, seed);
            let ours = exact_syndrome_distribution(&layout, &eta);
            let total: f64 = ours.values().sum();
            assert!((total - 1.0).abs() < 1e-9, "total {total}");
            let dense = qubit::dense_storage_reference(&layout, &eta, false);
            assert_eq!(ours.len(), dense.len());
            for row in &dense {
                let p = ours.get(&row.defects).copied().unwrap_or(0.0);
                assert!(
                    (p - row.p).abs() < 1e-9,
                    "seed {seed} defects {:?}: {p} vs {}",
                    row.defects,
                    row.p
                );
            }
        }
    }

    #[test]
    fn logical_angle_matches_dense_oracle_per_syndrome() {
        let layout = CodeLayout::build(3).unwrap();
        let x_graph = FaceGraph::build(&layout, PauliKind::X);
        for seed in [3u64, 4] {
            let eta = random_eta(9, seed);
            let noise = StorageNoise::per_qubit(eta.clone());
            let dense = qubit::dense_storage_reference(&layout, &eta, false);
            for row in &dense {
                let corr = decoder::mwpm_decode(&layout, &x_graph, &row.defects);
                let angle = logical_angle(&layout, &noise, &corr.z_support).unwrap();
                assert!(
                    angle_distance_mod_pi(angle.theta, row.theta) < 1e-7,
                    "seed {seed} defects {:?}: {} vs {}",
                    row.defects,
                    angle.theta,
                    row.theta
                );
                assert!(angle.trig_defect < 1e-6, "trig defect {}", angle.trig_defect);
            }
        }
    }

    #[test]
    fn sampling_agrees_with_exact_distribution() {
        let layout = CodeLayout::build(3).unwrap();
        let eta = random_eta(9, 5);
        let noise = StorageNoise::per_qubit(eta.clone());
        let exact = exact_syndrome_distribution(&layout, &eta);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let trials = 4000usize;
        for i in 0..trials {
            let sample = sample_outcomes(&layout, &noise, &mut rng, CornerBasis::X).unwrap();
            // The sampled trajectory's probability must match the replayed
            // circuit weight.
            if i < 10 {
                let logw =
                    log_outcome_weight(&layout, &eta, CornerBasis::X, &sample.m).unwrap().unwrap();
                assert!((logw - sample.log_prob).abs() < 1e-9);
            }
            let defects: Vec<usize> = layout
                .x_face_syndromes_from_vertex_outcomes(&sample.m)
                .into_iter()
                .filter(|&(_, s)| s == -1)
                .map(|(f, _)| f)
                .collect();
            *counts.entry(defects).or_insert(0) += 1;
        }
        let mut tv = 0.0;
        let mut keys: Vec<Vec<usize>> = exact.keys().cloned().collect();
        for k in counts.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
        for k in keys {
            let p = exact.get(&k).copied().unwrap_or(0.0);
            let q = counts.get(&k).copied().unwrap_or(0) as f64 / trials as f64;
            tv += (p - q).abs();
        }
        tv /= 2.0;
        assert!(tv < 0.05, "total variation {tv}");
    }

    #[test]
    fn trivial_angle_zero() {
        let layout = CodeLayout::build(3).unwrap();
        let x_graph = FaceGraph::build(&layout, PauliKind::X);
        let noise = StorageNoise::uniform(9, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let trial = run_storage_trial(&layout, &x_graph, &noise, &mut rng).unwrap();
            assert!(trial.defects.is_empty());
            assert!(trial.theta_s.abs() < 1e-9 || (PI - trial.theta_s) < 1e-9);
        }
    }

    #[test]
    fn trivial_angle_half_pi_is_logical_z() {
        let layout = CodeLayout::build(3).unwrap();
        let x_graph = FaceGraph::build(&layout, PauliKind::X);
        let noise = StorageNoise::uniform(9, FRAC_PI_2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let trial = run_storage_trial(&layout, &x_graph, &noise, &mut rng).unwrap();
            assert!(trial.defects.is_empty());
            assert!((trial.theta_s - FRAC_PI_2).abs() < 1e-9);
        }
    }

    /// At zero noise the all-plus outcome has probability `2^-(n-1)/2` (one
    /// representative of the trivial class, all classes except the trivial
    /// one being impossible), and full trials succeed, at every distance
    /// residue mod 4. Guards the orientation gauge: an assignment that only
    /// satisfies two of the four virtual boundary faces breaks d = 1 mod 4.
    #[test]
    fn all_plus_weight_exact_at_every_distance_residue() {
        for d in [3usize, 5, 7, 9] {
            let layout = CodeLayout::build(d).unwrap();
            let n = layout.num_qubits();
            let eta = vec![0.0; n];
            let w = log_weight_of_all_plus(&layout, &eta, CornerBasis::X)
                .unwrap()
                .unwrap_or(f64::NEG_INFINITY);
            let expected = -((n - 1) as f64) / 2.0 * std::f64::consts::LN_2;
            assert!(
                (w - expected).abs() < 1e-9,
                "d={d}: log weight {w} != {expected}"
            );
            let x_graph = FaceGraph::build(&layout, PauliKind::X);
            let noise = StorageNoise::uniform(n, 0.07);
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let trial = run_storage_trial(&layout, &x_graph, &noise, &mut rng).unwrap();
            assert!(trial.theta_s.is_finite());
        }
    }

    #[test]
    fn window_stays_small() {
        let layout = CodeLayout::build(7).unwrap();
        let noise = StorageNoise::uniform(49, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sample = sample_outcomes(&layout, &noise, &mut rng, CornerBasis::X).unwrap();
        assert!(
            sample.peak_modes <= 8 * 7,
            "peak modes {} exceeds 8d",
            sample.peak_modes
        );
    }

    #[test]
    fn metrics_trivial_cases() {
        let trial = |theta_s: f64| StorageTrial {
            m: Vec::new(),
            defects: Vec::new(),
            theta_s,
            log_prob: 0.0,
            weight_logs: [None; 4],
            trig_defect: 0.0,
            peak_modes: 0,
        };
        let zeros = vec![trial(0.0); 10];
        let m = estimate_storage_metrics(&zeros).unwrap();
        assert_eq!(m.pl, 0.0);
        assert_eq!(m.conditional_ratio, 1.0);
        assert_eq!(m.average_ratio, 1.0);
        assert!(m.ratio_convention_applied);

        let halves = vec![trial(FRAC_PI_2); 10];
        let m = estimate_storage_metrics(&halves).unwrap();
        assert!((m.pl - 2.0).abs() < 1e-12);
        assert!((m.pl_twirl - 2.0).abs() < 1e-12);
        assert!((m.conditional_ratio - 1.0).abs() < 1e-12);
        assert!((m.average_ratio - 1.0).abs() < 1e-12);
        assert!(!m.ratio_convention_applied);

        let quarters = vec![trial(std::f64::consts::FRAC_PI_4); 10];
        let m = estimate_storage_metrics(&quarters).unwrap();
        assert!((m.pl - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((m.pl_twirl - 1.0).abs() < 1e-12);
        assert!((m.conditional_ratio - std::f64::consts::SQRT_2).abs() < 1e-12);

        assert!(matches!(
            estimate_storage_metrics(&[]),
            Err(StorageError::EmptySample)
        ));
    }

    #[test]
    fn twirl_baseline_endpoints() {
        let layout = CodeLayout::build(3).unwrap();
        let x_graph = FaceGraph::build(&layout, PauliKind::X);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zero = twirl_baseline(&layout, &x_graph, 0.0, &mut rng, 50).unwrap();
        assert_eq!(zero.pl, 0.0);
        let one = twirl_baseline(&layout, &x_graph, 1.0, &mut rng, 50).unwrap();
        assert_eq!(one.pl, 2.0);
    }
}
