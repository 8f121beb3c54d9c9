//! `flosim` — experiment driver for the fermionic-linear-optics
//! surface-code simulator.
//!
//! Exit codes: 0 success, 1 check/run failure, 2 configuration or I/O error.

mod angles;
mod cmds;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmds::{BenchMode, CmdError, DecoderKind, OracleSuite, ScanMode};
use flosim::layout::CodeLayout;

#[derive(Parser)]
#[command(
    name = "flosim",
    about = "Surface-code simulation under coherent rotation noise via fermionic linear optics",
    version
)]
struct Cli {
    /// Print the code layout at the given distance as JSON and exit.
    #[arg(long, value_name = "DISTANCE", global = false)]
    dump_layout: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample storage trials and estimate logical error metrics.
    Storage {
        /// Code distance (odd, >= 3).
        #[arg(short, long)]
        distance: usize,
        /// Uniform rotation angle (radians, or e.g. "0.08pi").
        #[arg(long, value_parser = angles::parse_angle)]
        theta: Option<f64>,
        /// File with one rotation angle per qubit (whitespace separated).
        #[arg(long, conflicts_with = "theta")]
        angles_file: Option<PathBuf>,
        #[arg(long, default_value_t = 50_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decoder for the X-face syndrome.
        #[arg(long, value_enum, default_value_t = DecoderKind::Mwpm)]
        decoder: DecoderKind,
        /// Worker threads (default: all cores when built with `parallel`).
        #[arg(long)]
        threads: Option<usize>,
        /// Per-trial CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the summary JSON here (always printed to stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sample logical-state preparation trials.
    Prep {
        #[arg(short, long)]
        distance: usize,
        /// Z-rotation angle of the per-qubit input state.
        #[arg(long, value_parser = angles::parse_angle)]
        theta: f64,
        /// X-rotation angle of the per-qubit input state.
        #[arg(long, value_parser = angles::parse_angle, default_value = "0")]
        phi: f64,
        #[arg(long, default_value_t = 50_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sweep preparation over a (theta, phi) grid; emits a heat-map CSV.
    PrepSweep {
        #[arg(short, long)]
        distance: usize,
        /// Theta grid: comma list or "start:stop:count".
        #[arg(long, value_parser = angles::parse_grid)]
        theta_grid: std::vec::Vec<f64>,
        /// Phi grid: comma list or "start:stop:count".
        #[arg(long, value_parser = angles::parse_grid, default_value = "0")]
        phi_grid: std::vec::Vec<f64>,
        #[arg(long, default_value_t = 5_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo baseline: stochastic Z errors at rate epsilon.
    Twirl {
        #[arg(short, long)]
        distance: usize,
        /// Per-qubit Z error probability in [0, 1].
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 50_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Cross-check the simulator against dense reference implementations.
    OracleCheck {
        /// Distance for the dense checks (must be 3).
        #[arg(short, long, default_value_t = 3)]
        distance: usize,
        #[arg(long, value_enum, default_value_t = OracleSuite::All)]
        suite: OracleSuite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time single trials at a given distance.
    Bench {
        #[arg(short, long)]
        distance: usize,
        #[arg(long, value_enum, default_value_t = BenchMode::Storage)]
        mode: BenchMode,
        #[arg(long, value_parser = angles::parse_angle, default_value = "0.08pi")]
        theta: f64,
        #[arg(long, value_parser = angles::parse_angle, default_value = "0")]
        phi: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Locate the threshold crossing between logical-error curves.
    ThresholdScan {
        #[arg(long, value_enum, default_value_t = ScanMode::Storage)]
        mode: ScanMode,
        /// At least two odd distances, comma separated.
        #[arg(long, value_parser = angles::parse_distances)]
        distances: std::vec::Vec<usize>,
        /// Noise grid: angles for storage/prep, probabilities for twirl.
        #[arg(long, value_parser = angles::parse_grid)]
        grid: std::vec::Vec<f64>,
        /// X-rotation angle (prep mode only).
        #[arg(long, value_parser = angles::parse_angle, default_value = "0")]
        phi: f64,
        #[arg(long, default_value_t = 50_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        /// Bootstrap resamples for the crossing confidence interval.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    if let Some(d) = cli.dump_layout {
        let layout = CodeLayout::build(d).map_err(|e| CmdError::Config(e.to_string()))?;
        println!("{}", layout.to_json());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CmdError::Config(
            "no subcommand given (try --help)".into(),
        ));
    };
    match command {
        Command::Storage {
            distance,
            theta,
            angles_file,
            trials,
            seed,
            decoder,
            threads,
            out,
            summary,
        } => cmds::run_storage(&cmds::StorageOpts {
            distance,
            theta,
            angles_file,
            trials,
            seed,
            decoder,
            threads,
            out,
            summary,
        }),
        Command::Prep {
            distance,
            theta,
            phi,
            trials,
            seed,
            threads,
            out,
            summary,
        } => cmds::run_prep(&cmds::PrepOpts {
            distance,
            theta,
            phi,
            trials,
            seed,
            threads,
            out,
            summary,
        }),
        Command::PrepSweep {
            distance,
            theta_grid,
            phi_grid,
            trials,
            seed,
            threads,
            out,
        } => cmds::run_prep_sweep(&cmds::PrepSweepOpts {
            distance,
            theta_grid,
            phi_grid,
            trials,
            seed,
            threads,
            out,
        }),
        Command::Twirl {
            distance,
            epsilon,
            trials,
            seed,
            threads,
            summary,
        } => cmds::run_twirl(&cmds::TwirlOpts {
            distance,
            epsilon,
            trials,
            seed,
            threads,
            summary,
        }),
        Command::OracleCheck {
            distance,
            suite,
            seed,
        } => cmds::run_oracle_check(&cmds::OracleOpts {
            distance,
            suite,
            seed,
        }),
        Command::Bench {
            distance,
            mode,
            theta,
            phi,
            trials,
            seed,
        } => cmds::run_bench(&cmds::BenchOpts {
            distance,
            mode,
            theta,
            phi,
            trials,
            seed,
        }),
        Command::ThresholdScan {
            mode,
            distances,
            grid,
            phi,
            trials,
            seed,
            threads,
            bootstrap,
            out,
        } => cmds::run_threshold_scan(&cmds::ScanOpts {
            mode,
            distances,
            grid,
            phi,
            trials,
            seed,
            threads,
            bootstrap,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
