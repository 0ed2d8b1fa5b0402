//! Command-line surface: bounds, exact-uniform matching sampling, permanent
//! estimation, exact counting, and instance generation.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable or malformed input,
//! 3 structurally infeasible (a zero row or column forces permanent 0),
//! 4 trial budget exhausted.

mod report;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use permatch::bounds::{
    bregman_bound, huber_bound, predict_runtime, vdw_lower_bound_nearly_regular, GFactorTable,
};
use permatch::estimator::{
    chernoff_target_accepts, estimate_permanent_with_workers, AccuracyParams, StoppingMode,
};
use permatch::gen::{generate, GenModel, GenSpec};
use permatch::io::{parse_matrix, write_matrix};
use permatch::oracle::exact_permanent;
use permatch::sampler::sample_many;
use permatch::Instance;
use report::{decimal_from_ln, json_log, Report, SCHEMA_VERSION};
use serde_json::{json, Value};
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "permatch",
    version,
    about = "Exactly uniform perfect-matching sampling and permanent estimation for dense nearly regular bipartite graphs"
)]
struct Cli {
    /// Report wall_time_ms as 0, making output byte-stable across runs.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permanent bounds and acceptance-rate prediction for a matrix file.
    Bounds { path: PathBuf },

    /// Draw exactly uniform random perfect matchings.
    Sample {
        path: PathBuf,
        /// Number of matchings to draw.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Base RNG seed; drawn from entropy when omitted.
        #[arg(long)]
        seed: Option<u64>,
        /// Per-sample cap on rejection passes.
        #[arg(long)]
        max_trials: Option<u64>,
        /// Parallel trial workers; results are reproducible per (seed, workers).
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// lines: one matching per line; json: single report object.
        #[arg(long, value_enum, default_value_t = FormatArg::Lines)]
        format: FormatArg,
    },

    /// Estimate the permanent from the sampler's acceptance rate.
    Estimate {
        path: PathBuf,
        /// Relative error target, strictly inside (0, 1).
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Failure probability, strictly inside (0, 1).
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Base RNG seed; drawn from entropy when omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::TargetAccepts)]
        mode: ModeArg,
        /// Pass count for fixed-trials mode.
        #[arg(long)]
        trials: Option<u64>,
        /// Parallel trial workers; results are reproducible per (seed, workers).
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },

    /// Exact permanent by inclusion-exclusion (n <= 30).
    Exact { path: PathBuf },

    /// Generate a regular or nearly regular instance and report its bounds.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: usize,
        /// Maximum degree deviation for the nearly-regular model.
        #[arg(long, default_value_t = 0)]
        jitter: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::RegularUnion)]
        model: ModelArg,
        /// Generation seed; drawn from entropy when omitted.
        #[arg(long)]
        seed: Option<u64>,
        /// Output matrix file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Lines,
    Json,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    TargetAccepts,
    FixedTrials,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum ModelArg {
    RegularUnion,
    NearlyRegular,
}

enum AppError {
    Usage(String),
    Parse(String),
    Infeasible(String),
    Budget(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Parse(_) => 2,
            AppError::Infeasible(_) => 3,
            AppError::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m)
            | AppError::Parse(m)
            | AppError::Infeasible(m)
            | AppError::Budget(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("permatch: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let started = Instant::now();
    let no_timing = cli.no_timing;
    let elapsed_ms = move || {
        if no_timing {
            0
        } else {
            started.elapsed().as_millis() as u64
        }
    };

    match cli.command {
        Command::Bounds { path } => {
            let inst = load_instance(&path)?;
            let results = bounds_results(&inst);
            Report {
                schema_version: SCHEMA_VERSION,
                command: "bounds",
                inputs: json!({ "path": path, "n": inst.n() }),
                results,
                seed: None,
                wall_time_ms: elapsed_ms(),
            }
            .print();
            Ok(())
        }

        Command::Sample {
            path,
            count,
            seed,
            max_trials,
            workers,
            format,
        } => {
            let inst = load_instance(&path)?;
            let workers = parse_workers(workers)?;
            let seed = seed.unwrap_or_else(rand::random);
            if inst.has_zero_line() {
                return Err(AppError::Infeasible(
                    "permanent is zero: the instance has a zero row or column".to_string(),
                ));
            }
            let table = build_table(&inst);
            let run = sample_many(&inst, &table, seed, count, workers, max_trials)
                .expect("degenerate instances were refused above");

            match format {
                FormatArg::Lines => {
                    for s in &run.samples {
                        println!("{}", s.matching);
                    }
                }
                FormatArg::Json => {
                    let trials_total: u64 = run.samples.iter().map(|s| s.trials).sum::<u64>()
                        + run.exhausted_trials.unwrap_or(0);
                    let results = json!({
                        "n": inst.n(),
                        "count_requested": count,
                        "count_returned": run.samples.len(),
                        "matchings": run.samples.iter().map(|s| s.matching.one_based()).collect::<Vec<_>>(),
                        "per_sample_trials": run.samples.iter().map(|s| s.trials).collect::<Vec<_>>(),
                        "per_sample_columns_advanced": run.samples.iter().map(|s| s.columns_advanced_total).collect::<Vec<_>>(),
                        "trials_total": trials_total,
                        "acceptance_rate": run.samples.len() as f64 / trials_total.max(1) as f64,
                        "budget_exhausted": run.exhausted_trials.is_some(),
                    });
                    Report {
                        schema_version: SCHEMA_VERSION,
                        command: "sample",
                        inputs: json!({
                            "path": path,
                            "count": count,
                            "max_trials": max_trials,
                            "workers": workers.get(),
                            "format": "json",
                        }),
                        results,
                        seed: Some(seed),
                        wall_time_ms: elapsed_ms(),
                    }
                    .print();
                }
            }
            if let Some(trials) = run.exhausted_trials {
                return Err(AppError::Budget(format!(
                    "trial budget of {} exhausted after {trials} passes; completed {} of {count} samples",
                    max_trials.unwrap_or(0),
                    run.samples.len()
                )));
            }
            Ok(())
        }

        Command::Estimate {
            path,
            sigma,
            delta,
            seed,
            mode,
            trials,
            workers,
        } => {
            let params =
                AccuracyParams::new(sigma, delta).map_err(|e| AppError::Usage(e.to_string()))?;
            let workers = parse_workers(workers)?;
            let stopping = match (mode, trials) {
                (ModeArg::TargetAccepts, None) => StoppingMode::TargetAccepts,
                (ModeArg::TargetAccepts, Some(_)) => {
                    return Err(AppError::Usage(
                        "--trials only applies to --mode fixed-trials".to_string(),
                    ))
                }
                (ModeArg::FixedTrials, Some(t)) if t > 0 => StoppingMode::FixedTrials(t),
                (ModeArg::FixedTrials, _) => {
                    return Err(AppError::Usage(
                        "--mode fixed-trials requires --trials N with N >= 1".to_string(),
                    ))
                }
            };
            let inst = load_instance(&path)?;
            if inst.has_zero_line() {
                return Err(AppError::Infeasible(
                    "permanent is zero: the instance has a zero row or column".to_string(),
                ));
            }
            let seed = seed.unwrap_or_else(rand::random);
            let table = build_table(&inst);
            let ledger =
                estimate_permanent_with_workers(&inst, params, &table, seed, stopping, workers)
                    .expect("inputs validated above");
            if ledger.zero_accepts() {
                eprintln!(
                    "permatch: warning: no acceptances in {} trials; the estimate is 0",
                    ledger.trials
                );
            }
            let mode_name = match stopping {
                StoppingMode::TargetAccepts => "target-accepts",
                StoppingMode::FixedTrials(_) => "fixed-trials",
            };
            let results = json!({
                "n": inst.n(),
                "mode": mode_name,
                "target_accepts": match stopping {
                    StoppingMode::TargetAccepts => Some(chernoff_target_accepts(params)),
                    StoppingMode::FixedTrials(_) => None,
                },
                "trials": ledger.trials,
                "accepts": ledger.accepts,
                "log_m_tilde": json_log(ledger.log_m_tilde),
                "m_tilde": decimal_from_ln(ledger.log_m_tilde),
                "log_estimate": json_log(ledger.log_estimate),
                "estimate": decimal_from_ln(ledger.log_estimate),
                "zero_accepts": ledger.zero_accepts(),
                "sigma": sigma,
                "delta": delta,
            });
            Report {
                schema_version: SCHEMA_VERSION,
                command: "estimate",
                inputs: json!({
                    "path": path,
                    "sigma": sigma,
                    "delta": delta,
                    "mode": mode_name,
                    "trials": trials,
                    "workers": workers.get(),
                }),
                results,
                seed: Some(seed),
                wall_time_ms: elapsed_ms(),
            }
            .print();
            Ok(())
        }

        Command::Exact { path } => {
            let inst = load_instance(&path)?;
            let count = exact_permanent(&inst)
                .map_err(|e| AppError::Usage(format!("{e}; try `permatch estimate`")))?;
            Report {
                schema_version: SCHEMA_VERSION,
                command: "exact",
                inputs: json!({ "path": path, "n": inst.n() }),
                results: json!({
                    "n": inst.n(),
                    "permanent": count.value.to_string(),
                }),
                seed: None,
                wall_time_ms: elapsed_ms(),
            }
            .print();
            Ok(())
        }

        Command::Gen {
            n,
            degree,
            jitter,
            model,
            seed,
            out,
        } => {
            let seed = seed.unwrap_or_else(rand::random);
            let spec = GenSpec {
                n,
                degree,
                jitter,
                model: match model {
                    ModelArg::RegularUnion => GenModel::RegularUnion,
                    ModelArg::NearlyRegular => GenModel::NearlyRegular,
                },
                seed,
            };
            let inst = generate(&spec).map_err(|e| AppError::Usage(e.to_string()))?;
            std::fs::write(&out, write_matrix(&inst))
                .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", out.display())))?;
            Report {
                schema_version: SCHEMA_VERSION,
                command: "gen",
                inputs: json!({
                    "n": n,
                    "degree": degree,
                    "jitter": jitter,
                    "model": match model {
                        ModelArg::RegularUnion => "regular-union",
                        ModelArg::NearlyRegular => "nearly-regular",
                    },
                    "out": out,
                }),
                results: bounds_results(&inst),
                seed: Some(seed),
                wall_time_ms: elapsed_ms(),
            }
            .print();
            Ok(())
        }
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| AppError::Parse(format!("{}: {e}", path.display())))
}

fn parse_workers(workers: usize) -> Result<NonZeroUsize, AppError> {
    NonZeroUsize::new(workers)
        .ok_or_else(|| AppError::Usage("--workers must be at least 1".to_string()))
}

/// One table per invocation, sized to the largest possible row sum.
fn build_table(inst: &Instance) -> GFactorTable {
    GFactorTable::build(inst.n()).expect("n >= 1")
}

/// Shared results block for `bounds` and `gen`.
fn bounds_results(inst: &Instance) -> Value {
    let table = build_table(inst);
    let bregman = bregman_bound(inst).log_value;
    let huber = huber_bound(inst, &table)
        .expect("table sized to n")
        .log_value;
    let vdw = vdw_lower_bound_nearly_regular(inst).log_value;
    let prediction = predict_runtime(inst, &table).ok();
    json!({
        "n": inst.n(),
        "bregman_log": json_log(bregman),
        "bregman": decimal_from_ln(bregman),
        "huber_log": json_log(huber),
        "huber": decimal_from_ln(huber),
        "vdw_nearly_regular_log": json_log(vdw),
        "vdw_nearly_regular": decimal_from_ln(vdw),
        "prediction": prediction.map(|p| json!({
            "log_acceptance_lower": json_log(p.log_acceptance_lower),
            "acceptance_lower": decimal_from_ln(p.log_acceptance_lower),
            "expected_trials_upper": decimal_from_ln(-p.log_acceptance_lower),
            "delta_min": p.delta_min,
            "gamma": p.gamma,
        })),
    })
}
