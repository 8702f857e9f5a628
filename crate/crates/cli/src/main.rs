//! `langcontact`: long-format tables for learning panels, cohort runs,
//! orbit diagrams, passage times, phase reports and sigma calibration.

mod grid;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use langcontact::abm::{
    simulate_cohorts, simulate_panel, CohortConfig, LearnerKind, PanelConfig, SAMPLE_EVERY,
};
use langcontact::calibration::{self, PoolSpec};
use langcontact::dynamics::{
    self, classify_phase, find_equilibrium, jacobian_and_eigenvalues, orbit_diagram, passage_time,
    sigma_crit, CellStatus, Regime, ORBIT_START,
};
use langcontact::environment::{reduce_params, GrammarAdvantages, ModelParams, PopulationState};
use langcontact::ModelError;
use serde::Serialize;

use crate::grid::parse_grid;
use crate::output::{sink, write_rows, Format};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(
    name = "langcontact",
    version,
    about = "Grammar competition under L2 learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectories of independent learners in one fixed environment.
    Learn {
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        /// L2 difficulty, delta = d * gamma for L2 learners.
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        #[arg(long, default_value_t = 0.5)]
        freq_g1: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.2)]
        alpha2: f64,
        #[arg(long, default_value_t = 10)]
        n_learners: usize,
        #[arg(long, default_value_t = 0.5)]
        l2_fraction: f64,
        #[arg(long, default_value_t = 100_000)]
        tokens: u64,
        #[arg(long, default_value_t = SAMPLE_EVERY)]
        sample_every: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Generations of two-parent learners, with the deterministic map alongside.
    Cohort {
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.2)]
        alpha2: f64,
        #[arg(long, default_value_t = 100)]
        n_learners: usize,
        #[arg(long, default_value_t = 0.5)]
        l2_fraction: f64,
        #[arg(long, default_value_t = 100_000)]
        tokens: u64,
        #[arg(long, default_value_t = 15)]
        generations: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Deterministic trajectory table. Defaults to `<output stem>_det.<ext>`
        /// when `--output` is given; omitted otherwise.
        #[arg(long)]
        det_output: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Stable equilibrium for every (alpha, D, sigma) cell.
    Orbit {
        #[arg(long, default_value = "0.5:3:26")]
        alpha: String,
        /// Reduced difficulty D = d / alpha2.
        #[arg(long, default_value = "1")]
        d_grid: String,
        #[arg(long, default_value = "0:1:101")]
        sigma_grid: String,
        #[arg(long, default_value_t = dynamics::EQUILIBRIUM_TOL)]
        tol: f64,
        #[arg(long, default_value_t = dynamics::EQUILIBRIUM_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Generations from (1, q0) until both p and q fall below the threshold.
    Passage {
        #[arg(long, default_value_t = 1.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha2: f64,
        #[arg(long, default_value = "0.2,0.6")]
        sigma_grid: String,
        /// Raw L2 difficulty d; the table also reports D = d / alpha2.
        #[arg(long, default_value = "0.25:20:80")]
        d_grid: String,
        #[arg(long, default_value = "0.1,0.5,0.9")]
        q0_grid: String,
        #[arg(long, default_value_t = dynamics::PASSAGE_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 100_000)]
        max_gen: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Stability report for one parameter point, printed as JSON.
    Phase {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "D")]
        difficulty: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = dynamics::EQUILIBRIUM_TOL)]
        tol: f64,
        #[arg(long, default_value_t = dynamics::EQUILIBRIUM_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Interval estimates of the L2 fraction from demographic counts.
    Calibrate {
        /// Bundled case study: `afrikaans` or `afro_peruvian`.
        #[arg(long, conflicts_with_all = ["demographics", "pool"])]
        preset: Option<String>,
        /// CSV with header `year,group,count`.
        #[arg(long, requires = "pool")]
        demographics: Option<PathBuf>,
        /// Pool file with `[l2_pool]` and optional `[pooled]` sections.
        #[arg(long, requires = "demographics")]
        pool: Option<PathBuf>,
        #[arg(long, default_value_t = calibration::DEFAULT_LOW_FRACTION)]
        low_fraction: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    NonConvergence(String),
    Io(std::io::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn grid(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(text).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn emit<T: Serialize>(rows: &[T], out: &OutputArgs) -> Result<(), CliError> {
    let mut w = sink(out.output.as_deref())?;
    write_rows(rows, out.format, &mut *w)?;
    Ok(())
}

#[derive(Serialize)]
struct LearnRow {
    learner_id: usize,
    kind: LearnerKind,
    iteration: u64,
    prob: f64,
}

#[derive(Serialize)]
struct CohortRow {
    generation: usize,
    kind: LearnerKind,
    learner_id: usize,
    terminal_prob: f64,
}

#[derive(Serialize)]
struct DetRow {
    generation: usize,
    p_det: f64,
    q_det: f64,
}

#[derive(Serialize)]
struct OrbitRow {
    alpha: f64,
    #[serde(rename = "D")]
    difficulty: f64,
    sigma: f64,
    p_star: f64,
    q_star: f64,
    phase: String,
    status: CellStatus,
}

#[derive(Serialize)]
struct PassageRow {
    sigma: f64,
    d: f64,
    #[serde(rename = "D")]
    difficulty: f64,
    q0: f64,
    generations: Option<usize>,
    status: CellStatus,
}

#[derive(Serialize)]
struct CalibrateRow {
    year: i32,
    sigma_low: f64,
    sigma_high: f64,
    sigma_low_raw: f64,
    sigma_high_raw: f64,
}

#[derive(Serialize)]
struct PhaseReport {
    alpha: f64,
    #[serde(rename = "D")]
    difficulty: f64,
    sigma: f64,
    /// `null` when the threshold is undefined (D = 0).
    sigma_crit: Option<f64>,
    regime: Regime,
    lambda_plus: f64,
    lambda_minus: f64,
    phase: String,
    equilibrium: PopulationState,
}

fn companion_path(output: &Path, format: Format) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("cohort");
    let ext = output
        .extension()
        .and_then(|s| s.to_str())
        .unwrap_or(match format {
            Format::Csv => "csv",
            Format::Json => "json",
        });
    output.with_file_name(format!("{stem}_det.{ext}"))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Learn {
            gamma,
            d,
            freq_g1,
            alpha1,
            alpha2,
            n_learners,
            l2_fraction,
            tokens,
            sample_every,
            seed,
            out,
        } => {
            let adv = GrammarAdvantages::new(alpha1, alpha2)?;
            let config = PanelConfig {
                n_learners,
                l2_fraction,
                tokens_per_learner: tokens,
                g1_frequency: freq_g1,
                gamma,
                d,
                sample_every,
                seed,
            };
            let rows: Vec<LearnRow> = simulate_panel(&config, &adv)?
                .into_iter()
                .flat_map(|l| {
                    l.trajectory
                        .samples
                        .into_iter()
                        .map(move |(iteration, prob)| LearnRow {
                            learner_id: l.id,
                            kind: l.kind,
                            iteration,
                            prob,
                        })
                })
                .collect();
            emit(&rows, &out)
        }
        Command::Cohort {
            gamma,
            d,
            alpha1,
            alpha2,
            n_learners,
            l2_fraction,
            tokens,
            generations,
            seed,
            det_output,
            out,
        } => {
            let adv = GrammarAdvantages::new(alpha1, alpha2)?;
            let config = CohortConfig::new(n_learners, l2_fraction, tokens, generations, seed)?;
            let run = simulate_cohorts(&config, &adv, d, gamma)?;
            let rows: Vec<CohortRow> = run
                .generations
                .iter()
                .flat_map(|g| {
                    g.learners.iter().enumerate().map(|(id, l)| CohortRow {
                        generation: g.generation,
                        kind: l.kind,
                        learner_id: id,
                        terminal_prob: l.prob,
                    })
                })
                .collect();
            emit(&rows, &out)?;
            let det_path =
                det_output.or_else(|| out.output.as_deref().map(|p| companion_path(p, out.format)));
            if let Some(path) = det_path {
                let det: Vec<DetRow> = run
                    .deterministic
                    .iter()
                    .enumerate()
                    .map(|(generation, x)| DetRow {
                        generation,
                        p_det: x.p,
                        q_det: x.q,
                    })
                    .collect();
                emit(
                    &det,
                    &OutputArgs {
                        format: out.format,
                        output: Some(path),
                    },
                )?;
            }
            Ok(())
        }
        Command::Orbit {
            alpha,
            d_grid,
            sigma_grid,
            tol,
            max_iter,
            out,
        } => {
            let cells = orbit_diagram(
                &grid("alpha", &alpha)?,
                &grid("d-grid", &d_grid)?,
                &grid("sigma-grid", &sigma_grid)?,
                tol,
                max_iter,
            )?;
            let rows: Vec<OrbitRow> = cells
                .into_iter()
                .map(|c| OrbitRow {
                    alpha: c.params.alpha,
                    difficulty: c.params.difficulty,
                    sigma: c.params.sigma,
                    p_star: c.state.p,
                    q_star: c.state.q,
                    phase: c.phase.to_string(),
                    status: c.status,
                })
                .collect();
            emit(&rows, &out)
        }
        Command::Passage {
            alpha1,
            alpha2,
            sigma_grid,
            d_grid,
            q0_grid,
            threshold,
            max_gen,
            out,
        } => {
            let adv = GrammarAdvantages::new(alpha1, alpha2)?;
            let sigmas = grid("sigma-grid", &sigma_grid)?;
            let ds = grid("d-grid", &d_grid)?;
            let q0s = grid("q0-grid", &q0_grid)?;
            let mut rows = Vec::with_capacity(sigmas.len() * ds.len() * q0s.len());
            for &sigma in &sigmas {
                for &d in &ds {
                    let params = reduce_params(&adv, d, sigma)?;
                    for &q0 in &q0s {
                        let (generations, status) =
                            match passage_time(&params, q0, threshold, max_gen) {
                                Ok(n) => (Some(n), CellStatus::Converged),
                                Err(ModelError::NonConvergence { .. }) => {
                                    (None, CellStatus::NonConverged)
                                }
                                Err(e) => return Err(e.into()),
                            };
                        rows.push(PassageRow {
                            sigma,
                            d,
                            difficulty: params.difficulty,
                            q0,
                            generations,
                            status,
                        });
                    }
                }
            }
            emit(&rows, &out)
        }
        Command::Phase {
            alpha,
            difficulty,
            sigma,
            tol,
            max_iter,
            output,
        } => {
            let params = ModelParams::new(alpha, difficulty, sigma)?;
            let crit = sigma_crit(alpha, difficulty)?;
            let stability = jacobian_and_eigenvalues(&params);
            let equilibrium = find_equilibrium(&params, ORBIT_START, tol, max_iter)?;
            let report = PhaseReport {
                alpha,
                difficulty,
                sigma,
                sigma_crit: crit.value.is_finite().then_some(crit.value),
                regime: crit.regime,
                lambda_plus: stability.lambda_plus,
                lambda_minus: stability.lambda_minus,
                phase: classify_phase(&params).to_string(),
                equilibrium,
            };
            let mut w = sink(output.as_deref())?;
            serde_json::to_writer_pretty(&mut *w, &report).map_err(std::io::Error::from)?;
            writeln!(w)?;
            w.flush()?;
            Ok(())
        }
        Command::Calibrate {
            preset,
            demographics,
            pool,
            low_fraction,
            out,
        } => {
            let (csv_text, pool_text) = match (preset.as_deref(), demographics, pool) {
                (Some("afrikaans"), _, _) => (
                    calibration::CAPE_CSV.to_string(),
                    calibration::CAPE_POOL.to_string(),
                ),
                (Some("afro_peruvian"), _, _) => (
                    calibration::LIMA_CSV.to_string(),
                    calibration::LIMA_POOL.to_string(),
                ),
                (Some(other), _, _) => {
                    return Err(CliError::Usage(format!(
                        "unknown preset {other:?}; expected afrikaans or afro_peruvian"
                    )))
                }
                (None, Some(csv), Some(pool)) => {
                    (fs::read_to_string(csv)?, fs::read_to_string(pool)?)
                }
                _ => {
                    return Err(CliError::Usage(
                        "give --preset or both --demographics and --pool".into(),
                    ))
                }
            };
            let records = calibration::read_demographics(csv_text.as_bytes())?;
            let spec = PoolSpec::parse(&pool_text)?;
            let rows: Vec<CalibrateRow> =
                calibration::estimate_intervals(&records, &spec, low_fraction)?
                    .into_iter()
                    .map(|y| {
                        let (lo, hi) = y.interval.rounded();
                        CalibrateRow {
                            year: y.year,
                            sigma_low: lo,
                            sigma_high: hi,
                            sigma_low_raw: y.interval.low,
                            sigma_high_raw: y.interval.high,
                        }
                    })
                    .collect();
            emit(&rows, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, msg) = match e {
                CliError::Usage(m) => (2, m),
                CliError::NonConvergence(m) => (3, m),
                CliError::Io(e) => (1, e.to_string()),
            };
            eprintln!("langcontact: {msg}");
            ExitCode::from(code)
        }
    }
}
