//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use flosim::decoder::{self, FaceGraph};
use flosim::layout::{CodeLayout, PauliKind};
use flosim::oracle::{equivalence, qubit};
use flosim::prep::{self, PrepNoise, PrepTrial};
use flosim::runner;
use flosim::storage::{self, CornerBasis, StorageNoise, StorageTrial};

use crate::report::{defect_hash, fmt_f64, fmt_opt_log, sign_hash, write_file};

/// Exit code 2 (`Config`) or 1 (`Failure`).
#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Failure(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Failure(m) => m,
        }
    }
}

type CmdResult = Result<(), CmdError>;

fn build_layout(d: usize) -> Result<CodeLayout, CmdError> {
    CodeLayout::build(d).map_err(|e| CmdError::Config(e.to_string()))
}

fn emit_summary(summary: &serde_json::Value, path: Option<&Path>) -> CmdResult {
    let text = format!("{}\n", serde_json::to_string_pretty(summary).unwrap());
    print!("{text}");
    if let Some(p) = path {
        write_file(p, &text).map_err(CmdError::Config)?;
    }
    Ok(())
}

/// Decorrelate the RNG seed across sweep points.
fn point_seed(seed: u64, point: u64) -> u64 {
    seed.wrapping_add(point.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DecoderKind {
    Mwpm,
    Peel,
}

pub struct StorageOpts {
    pub distance: usize,
    pub theta: Option<f64>,
    pub angles_file: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub summary: Option<PathBuf>,
}

fn storage_noise(layout: &CodeLayout, theta: Option<f64>, file: Option<&Path>) -> Result<StorageNoise, CmdError> {
    match (file, theta) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::Config(format!("cannot read {}: {e}", path.display())))?;
            let eta: Vec<f64> = text
                .split_whitespace()
                .map(|t| {
                    crate::angles::parse_angle(t).map_err(CmdError::Config)
                })
                .collect::<Result<_, _>>()?;
            if eta.len() != layout.num_qubits() {
                return Err(CmdError::Config(format!(
                    "angle file has {} entries, expected {}",
                    eta.len(),
                    layout.num_qubits()
                )));
            }
            Ok(StorageNoise::per_qubit(eta))
        }
        (None, Some(t)) => Ok(StorageNoise::uniform(layout.num_qubits(), t)),
        (None, None) => Err(CmdError::Config(
            "either --theta or --angles-file is required".into(),
        )),
    }
}

/// One storage trial with the chosen decoder.
fn storage_trial(
    layout: &CodeLayout,
    x_graph: &FaceGraph,
    z_graph: &FaceGraph,
    noise: &StorageNoise,
    decoder_kind: DecoderKind,
    rng: &mut impl Rng,
) -> Result<StorageTrial, storage::StorageError> {
    match decoder_kind {
        DecoderKind::Mwpm => storage::run_storage_trial(layout, x_graph, noise, rng),
        DecoderKind::Peel => {
            let sample = storage::sample_outcomes(layout, noise, rng, CornerBasis::X)?;
            let defects: Vec<usize> = layout
                .x_face_syndromes_from_vertex_outcomes(&sample.m)
                .into_iter()
                .filter(|&(_, s)| s == -1)
                .map(|(f, _)| f)
                .collect();
            let mut s = vec![1i8; layout.faces.len()];
            for &f in &defects {
                s[f] = -1;
            }
            let corr = decoder::prep_correction(layout, x_graph, z_graph, &s);
            let angle = storage::logical_angle(layout, noise, &corr.z_support)?;
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
    }
}

fn collect_trials<T: Send>(
    results: Vec<Result<T, storage::StorageError>>,
) -> Result<Vec<T>, CmdError> {
    results
        .into_iter()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))
}

fn storage_csv(trials: &[StorageTrial]) -> String {
    let mut csv = String::from("trial,syndrome_hash,theta_s,sin_theta_s,weight_logs\n");
    for (i, t) in trials.iter().enumerate() {
        let logs = [
            fmt_f64(t.log_prob),
            fmt_opt_log(t.weight_logs[0]),
            fmt_opt_log(t.weight_logs[1]),
            fmt_opt_log(t.weight_logs[2]),
            fmt_opt_log(t.weight_logs[3]),
        ]
        .join(";");
        csv.push_str(&format!(
            "{i},{:016x},{},{},{logs}\n",
            defect_hash(&t.defects),
            fmt_f64(t.theta_s),
            fmt_f64(t.theta_s.sin()),
        ));
    }
    csv
}

pub fn run_storage(opts: &StorageOpts) -> CmdResult {
    let layout = build_layout(opts.distance)?;
    let noise = storage_noise(&layout, opts.theta, opts.angles_file.as_deref())?;
    let x_graph = FaceGraph::build(&layout, PauliKind::X);
    let z_graph = FaceGraph::build(&layout, PauliKind::Z);
    let results = runner::run_trials_with_threads(opts.trials, opts.seed, opts.threads, |_, rng| {
        storage_trial(&layout, &x_graph, &z_graph, &noise, opts.decoder, rng)
    });
    let trials = collect_trials(results)?;
    write_file(&opts.out, &storage_csv(&trials)).map_err(CmdError::Config)?;
    let metrics = storage::estimate_storage_metrics(&trials)
        .map_err(|e| CmdError::Failure(e.to_string()))?;
    let peak = trials.iter().map(|t| t.peak_modes).max().unwrap_or(0);
    let summary = json!({
        "mode": "storage",
        "distance": opts.distance,
        "theta": opts.theta,
        "trials": opts.trials,
        "seed": opts.seed,
        "decoder": format!("{:?}", opts.decoder).to_lowercase(),
        "peak_modes": peak,
        "metrics": metrics,
    });
    emit_summary(&summary, opts.summary.as_deref())
}

pub struct PrepOpts {
    pub distance: usize,
    pub theta: f64,
    pub phi: f64,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub summary: Option<PathBuf>,
}

fn prep_csv(trials: &[PrepTrial]) -> String {
    let mut csv = String::from("trial,syndrome_hash,bx,by,bz\n");
    for (i, t) in trials.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{:016x},{},{},{}\n",
            sign_hash(&t.s),
            fmt_f64(t.bloch[0]),
            fmt_f64(t.bloch[1]),
            fmt_f64(t.bloch[2]),
        ));
    }
    csv
}

pub fn run_prep(opts: &PrepOpts) -> CmdResult {
    let layout = build_layout(opts.distance)?;
    let noise = PrepNoise::from_angles(layout.num_qubits(), opts.theta, opts.phi);
    let x_graph = FaceGraph::build(&layout, PauliKind::X);
    let z_graph = FaceGraph::build(&layout, PauliKind::Z);
    let results = runner::run_trials_with_threads(opts.trials, opts.seed, opts.threads, |_, rng| {
        prep::run_prep_trial(&layout, &x_graph, &z_graph, &noise, rng)
    });
    let trials: Vec<PrepTrial> = results
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))?;
    write_file(&opts.out, &prep_csv(&trials)).map_err(CmdError::Config)?;
    let metrics =
        prep::estimate_prep_pl(&trials).map_err(|e| CmdError::Failure(e.to_string()))?;
    let fixed = trials.iter().filter(|t| t.sign_fixed).count();
    let peak = trials.iter().map(|t| t.peak_modes).max().unwrap_or(0);
    let summary = json!({
        "mode": "prep",
        "distance": opts.distance,
        "theta": opts.theta,
        "phi": opts.phi,
        "trials": opts.trials,
        "seed": opts.seed,
        "peak_modes": peak,
        "sign_fixed_fraction": fixed as f64 / trials.len() as f64,
        "metrics": metrics,
    });
    emit_summary(&summary, opts.summary.as_deref())
}

pub struct PrepSweepOpts {
    pub distance: usize,
    pub theta_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

pub fn run_prep_sweep(opts: &PrepSweepOpts) -> CmdResult {
    let layout = build_layout(opts.distance)?;
    let x_graph = FaceGraph::build(&layout, PauliKind::X);
    let z_graph = FaceGraph::build(&layout, PauliKind::Z);
    let mut csv = String::from("theta,phi,pl,pl_se,trials\n");
    let mut point = 0u64;
    for &theta in &opts.theta_grid {
        for &phi in &opts.phi_grid {
            let noise = PrepNoise::from_angles(layout.num_qubits(), theta, phi);
            let results = runner::run_trials_with_threads(
                opts.trials,
                point_seed(opts.seed, point),
                opts.threads,
                |_, rng| prep::run_prep_trial(&layout, &x_graph, &z_graph, &noise, rng),
            );
            let trials: Vec<PrepTrial> = results
                .into_iter()
                .collect::<Result<_, _>>()
                .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))?;
            let metrics =
                prep::estimate_prep_pl(&trials).map_err(|e| CmdError::Failure(e.to_string()))?;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(theta),
                fmt_f64(phi),
                fmt_f64(metrics.pl),
                fmt_f64(metrics.pl_se),
                opts.trials
            ));
            point += 1;
        }
    }
    write_file(&opts.out, &csv).map_err(CmdError::Config)?;
    let summary = json!({
        "mode": "prep-sweep",
        "distance": opts.distance,
        "points": opts.theta_grid.len() * opts.phi_grid.len(),
        "trials_per_point": opts.trials,
        "out": opts.out.display().to_string(),
    });
    emit_summary(&summary, None)
}

pub struct TwirlOpts {
    pub distance: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub summary: Option<PathBuf>,
}

pub fn run_twirl(opts: &TwirlOpts) -> CmdResult {
    if !(0.0..=1.0).contains(&opts.epsilon) {
        return Err(CmdError::Config(format!(
            "epsilon {} must lie in [0, 1]",
            opts.epsilon
        )));
    }
    let layout = build_layout(opts.distance)?;
    let x_graph = FaceGraph::build(&layout, PauliKind::X);
    let failures = runner::run_trials_with_threads(opts.trials, opts.seed, opts.threads, |_, rng| {
        storage::twirl_trial(&layout, &x_graph, opts.epsilon, rng)
    })
    .into_iter()
    .filter(|&f| f)
    .count();
    let estimate = storage::twirl_estimate(failures, opts.trials)
        .map_err(|e| CmdError::Failure(e.to_string()))?;
    let summary = json!({
        "mode": "twirl",
        "distance": opts.distance,
        "epsilon": opts.epsilon,
        "seed": opts.seed,
        "metrics": estimate,
    });
    emit_summary(&summary, opts.summary.as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchMode {
    Storage,
    Prep,
}

pub struct BenchOpts {
    pub distance: usize,
    pub mode: BenchMode,
    pub theta: f64,
    pub phi: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn run_bench(opts: &BenchOpts) -> CmdResult {
    let layout = build_layout(opts.distance)?;
    let x_graph = FaceGraph::build(&layout, PauliKind::X);
    let z_graph = FaceGraph::build(&layout, PauliKind::Z);
    let mut times = Vec::with_capacity(opts.trials);
    let mut peak = 0usize;
    for i in 0..opts.trials {
        let mut rng = runner::trial_rng(opts.seed, i as u64);
        let start = std::time::Instant::now();
        match opts.mode {
            BenchMode::Storage => {
                let noise = StorageNoise::uniform(layout.num_qubits(), opts.theta);
                let t = storage::run_storage_trial(&layout, &x_graph, &noise, &mut rng)
                    .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))?;
                peak = peak.max(t.peak_modes);
            }
            BenchMode::Prep => {
                let noise = PrepNoise::from_angles(layout.num_qubits(), opts.theta, opts.phi);
                let t = prep::run_prep_trial(&layout, &x_graph, &z_graph, &noise, &mut rng)
                    .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))?;
                peak = peak.max(t.peak_modes);
            }
        }
        times.push(start.elapsed().as_secs_f64());
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = times.iter().cloned().fold(0.0f64, f64::max);
    let summary = json!({
        "mode": "bench",
        "bench_mode": format!("{:?}", opts.mode).to_lowercase(),
        "distance": opts.distance,
        "num_qubits": layout.num_qubits(),
        "trials": opts.trials,
        "seconds_per_trial_mean": mean,
        "seconds_per_trial_min": min,
        "seconds_per_trial_max": max,
        "peak_modes": peak,
    });
    emit_summary(&summary, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleSuite {
    Engine,
    Storage,
    Prep,
    All,
}

pub struct OracleOpts {
    pub distance: usize,
    pub suite: OracleSuite,
    pub seed: u64,
}

fn oracle_engine(seed: u64) -> serde_json::Value {
    let report = equivalence::random_sequences(300, 40, seed);
    json!({
        "suite": "engine",
        "sequences": report.sequences,
        "max_covariance_deviation": report.max_cov_dev,
        "max_probability_deviation": report.max_prob_dev,
        "passed": report.passes(1e-9),
    })
}

fn oracle_storage(layout: &CodeLayout, seed: u64) -> serde_json::Value {
    let mut rng = runner::trial_rng(seed, 0);
    let eta: Vec<f64> = (0..layout.num_qubits())
        .map(|_| rng.random_range(-0.5..0.5))
        .collect();
    let dense = qubit::dense_storage_reference(layout, &eta, false);
    let x_graph = FaceGraph::build(layout, PauliKind::X);
    let noise = StorageNoise::per_qubit(eta.clone());
    // Exact per-syndrome probabilities via full outcome enumeration.
    let n = layout.num_qubits();
    let mut by_defects: std::collections::HashMap<Vec<usize>, f64> = Default::default();
    for mask in 0..(1u32 << n) {
        let m: Vec<i8> = (0..n)
            .map(|u| if mask >> u & 1 == 1 { -1 } else { 1 })
            .collect();
        if let Some(logw) =
            storage::log_outcome_weight(layout, &eta, CornerBasis::X, &m).unwrap()
        {
            let defects: Vec<usize> = layout
                .x_face_syndromes_from_vertex_outcomes(&m)
                .into_iter()
                .filter(|&(_, s)| s == -1)
                .map(|(f, _)| f)
                .collect();
            *by_defects.entry(defects).or_insert(0.0) += logw.exp();
        }
    }
    let mut max_p_dev = 0.0f64;
    let mut max_theta_dev = 0.0f64;
    for row in &dense {
        let p = by_defects.get(&row.defects).copied().unwrap_or(0.0);
        max_p_dev = max_p_dev.max((p - row.p).abs());
        let corr = decoder::mwpm_decode(layout, &x_graph, &row.defects);
        let angle = storage::logical_angle(layout, &noise, &corr.z_support).unwrap();
        let d = (angle.theta - row.theta).rem_euclid(std::f64::consts::PI);
        max_theta_dev = max_theta_dev.max(d.min(std::f64::consts::PI - d));
    }
    json!({
        "suite": "storage",
        "syndromes": dense.len(),
        "max_probability_deviation": max_p_dev,
        "max_theta_deviation": max_theta_dev,
        "passed": max_p_dev < 1e-9 && max_theta_dev < 1e-7,
    })
}

fn oracle_prep(layout: &CodeLayout, seed: u64) -> serde_json::Value {
    let mut rng = runner::trial_rng(seed, 0);
    let (theta, phi): (f64, f64) = (rng.random_range(0.1..0.5), rng.random_range(0.0..0.4));
    let a = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
    let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -theta);
    let i = Complex64::new(0.0, 1.0);
    let qstate = [
        phi.cos() * a + i * phi.sin() * b,
        phi.cos() * b + i * phi.sin() * a,
    ];
    let dense = qubit::dense_prep_reference(layout, &vec![qstate; layout.num_qubits()]);
    let by_syndrome: std::collections::HashMap<Vec<i8>, [f64; 3]> = dense
        .iter()
        .map(|r| (r.signs.clone(), r.bloch))
        .collect();
    let x_graph = FaceGraph::build(layout, PauliKind::X);
    let z_graph = FaceGraph::build(layout, PauliKind::Z);
    let noise = PrepNoise::from_angles(layout.num_qubits(), theta, phi);
    let mut max_bloch_dev = 0.0f64;
    let mut max_norm_defect = 0.0f64;
    for t in 0..200 {
        let mut trng = runner::trial_rng(seed, t + 1);
        let trial = prep::run_prep_trial(layout, &x_graph, &z_graph, &noise, &mut trng).unwrap();
        if let Some(want) = by_syndrome.get(&trial.s) {
            for k in 0..3 {
                max_bloch_dev = max_bloch_dev.max((trial.raw_bloch[k] - want[k]).abs());
            }
        } else {
            max_bloch_dev = f64::INFINITY;
        }
        let norm = trial.bloch.iter().map(|v| v * v).sum::<f64>().sqrt();
        max_norm_defect = max_norm_defect.max((norm - 1.0).abs());
    }
    json!({
        "suite": "prep",
        "trials": 200,
        "max_bloch_deviation": max_bloch_dev,
        "max_norm_defect": max_norm_defect,
        "passed": max_bloch_dev < 1e-7 && max_norm_defect < 1e-6,
    })
}

pub fn run_oracle_check(opts: &OracleOpts) -> CmdResult {
    if opts.distance != 3 && opts.suite != OracleSuite::Engine {
        return Err(CmdError::Config(
            "oracle-check requires --distance 3 (the dense reference is exponential)".into(),
        ));
    }
    let mut results = Vec::new();
    if matches!(opts.suite, OracleSuite::Engine | OracleSuite::All) {
        results.push(oracle_engine(opts.seed));
    }
    if matches!(opts.suite, OracleSuite::Storage | OracleSuite::All) {
        let layout = build_layout(3)?;
        results.push(oracle_storage(&layout, opts.seed));
    }
    if matches!(opts.suite, OracleSuite::Prep | OracleSuite::All) {
        let layout = build_layout(3)?;
        results.push(oracle_prep(&layout, opts.seed));
    }
    let passed = results
        .iter()
        .all(|r| r["passed"].as_bool().unwrap_or(false));
    let summary = json!({ "mode": "oracle-check", "seed": opts.seed, "results": results, "passed": passed });
    emit_summary(&summary, None)?;
    if passed {
        Ok(())
    } else {
        Err(CmdError::Failure("oracle check failed".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanMode {
    Storage,
    Prep,
    Twirl,
}

pub struct ScanOpts {
    pub mode: ScanMode,
    pub distances: Vec<usize>,
    pub grid: Vec<f64>,
    pub phi: f64,
    pub trials: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub bootstrap: usize,
    pub out: Option<PathBuf>,
}

/// First sign change of `a - b` along the grid, linearly interpolated.
pub fn crossing_point(grid: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    for i in 0..grid.len() - 1 {
        let d0 = a[i] - b[i];
        let d1 = a[i + 1] - b[i + 1];
        if d0 == 0.0 {
            return Some(grid[i]);
        }
        if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            return Some(grid[i] + t * (grid[i + 1] - grid[i]));
        }
    }
    None
}

pub fn run_threshold_scan(opts: &ScanOpts) -> CmdResult {
    if opts.distances.len() < 2 {
        return Err(CmdError::Config(
            "threshold scan needs at least two distances".into(),
        ));
    }
    if opts.grid.len() < 2 {
        return Err(CmdError::Config("threshold scan needs a grid of at least two points".into()));
    }
    let mut curves: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for (di, &d) in opts.distances.iter().enumerate() {
        let layout = build_layout(d)?;
        let x_graph = FaceGraph::build(&layout, PauliKind::X);
        let z_graph = FaceGraph::build(&layout, PauliKind::Z);
        let mut pls = Vec::new();
        let mut ses = Vec::new();
        for (gi, &value) in opts.grid.iter().enumerate() {
            let seed = point_seed(opts.seed, (di * opts.grid.len() + gi) as u64);
            let (pl, se) = match opts.mode {
                ScanMode::Storage => {
                    let noise = StorageNoise::uniform(layout.num_qubits(), value);
                    let trials = collect_trials(runner::run_trials_with_threads(
                        opts.trials,
                        seed,
                        opts.threads,
                        |_, rng| storage::run_storage_trial(&layout, &x_graph, &noise, rng),
                    ))?;
                    let m = storage::estimate_storage_metrics(&trials)
                        .map_err(|e| CmdError::Failure(e.to_string()))?;
                    (m.pl, m.pl_se)
                }
                ScanMode::Prep => {
                    let noise = PrepNoise::from_angles(layout.num_qubits(), value, opts.phi);
                    let trials: Vec<PrepTrial> = runner::run_trials_with_threads(
                        opts.trials,
                        seed,
                        opts.threads,
                        |_, rng| prep::run_prep_trial(&layout, &x_graph, &z_graph, &noise, rng),
                    )
                    .into_iter()
                    .collect::<Result<_, _>>()
                    .map_err(|e| CmdError::Failure(format!("trial failed: {e}")))?;
                    let m = prep::estimate_prep_pl(&trials)
                        .map_err(|e| CmdError::Failure(e.to_string()))?;
                    (m.pl, m.pl_se)
                }
                ScanMode::Twirl => {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(CmdError::Config(format!(
                            "twirl grid value {value} must lie in [0, 1]"
                        )));
                    }
                    let failures = runner::run_trials_with_threads(
                        opts.trials,
                        seed,
                        opts.threads,
                        |_, rng| storage::twirl_trial(&layout, &x_graph, value, rng),
                    )
                    .into_iter()
                    .filter(|&f| f)
                    .count();
                    let m = storage::twirl_estimate(failures, opts.trials)
                        .map_err(|e| CmdError::Failure(e.to_string()))?;
                    (m.pl, m.pl_se)
                }
            };
            pls.push(pl);
            ses.push(se);
        }
        curves.push((d, pls, ses));
    }

    // Crossings per adjacent distance pair, with a parametric bootstrap CI.
    let mut crossings = Vec::new();
    let mut brng = runner::trial_rng(opts.seed ^ 0xB007_5EED, 0);
    for w in curves.windows(2) {
        let (d_low, ref pl_low, ref se_low) = w[0];
        let (d_high, ref pl_high, ref se_high) = w[1];
        let point = crossing_point(&opts.grid, pl_low, pl_high);
        let mut samples = Vec::new();
        for _ in 0..opts.bootstrap {
            let ja: Vec<f64> = pl_low
                .iter()
                .zip(se_low.iter())
                .map(|(&p, &s)| p + perturb(&mut brng, s))
                .collect();
            let jb: Vec<f64> = pl_high
                .iter()
                .zip(se_high.iter())
                .map(|(&p, &s)| p + perturb(&mut brng, s))
                .collect();
            if let Some(x) = crossing_point(&opts.grid, &ja, &jb) {
                samples.push(x);
            }
        }
        samples.sort_by(f64::total_cmp);
        let ci = if samples.len() >= 20 {
            let lo = samples[(samples.len() as f64 * 0.025) as usize];
            let hi = samples[((samples.len() as f64 * 0.975) as usize).min(samples.len() - 1)];
            Some((lo, hi))
        } else {
            None
        };
        crossings.push(json!({
            "d_low": d_low,
            "d_high": d_high,
            "crossing": point,
            "ci_low": ci.map(|c| c.0),
            "ci_high": ci.map(|c| c.1),
            "bootstrap_resamples_with_crossing": samples.len(),
        }));
    }

    let summary = json!({
        "mode": "threshold-scan",
        "scan_mode": format!("{:?}", opts.mode).to_lowercase(),
        "grid": opts.grid,
        "trials_per_point": opts.trials,
        "seed": opts.seed,
        "curves": curves.iter().map(|(d, pl, se)| json!({
            "distance": d, "pl": pl, "pl_se": se,
        })).collect::<Vec<_>>(),
        "crossings": crossings,
    });
    emit_summary(&summary, opts.out.as_deref())
}

fn perturb(rng: &mut impl Rng, se: f64) -> f64 {
    if se <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, se).unwrap().sample(rng)
}
