//! `vqr`: prepare data, train one model, run a sweep, render reports.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.
//! Standard output is line-oriented; lines of the form `key: value` are
//! stable across releases.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use vqr_core::circuits::{AnsatzKind, AnsatzSpec, EntanglementStrategy, FeatureMapKind, FeatureMapSpec};
use vqr_core::data::{load_csv, prepare, read_prepared, write_prepared, DataError};
use vqr_core::engine::{train, EngineError, TrialConfig};
use vqr_core::optim::{OptimizerKind, OptimizerSpec};
use vqr_core::sweep::{
    enumerate_grid, export, import_csv, load_results, render_table, run_trials, top_k, GridSpec, Metric,
    ResultRow, SweepError, TrialStatus,
};

#[derive(Parser)]
#[command(name = "vqr", version, about = "Variational quantum regression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode, normalize and PCA-reduce a CSV file.
    Prepare(PrepareArgs),
    /// Train and evaluate one configuration.
    Train(TrainArgs),
    /// Run every configuration of a grid.
    Sweep(SweepArgs),
    /// Rank stored results and export CSV / SVG summaries.
    Report(ReportArgs),
}

#[derive(Args)]
struct PrepareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 7, value_parser = at_least_one)]
    pca: usize,
    #[arg(long)]
    out: PathBuf,
    /// Recorded for reproducibility; preparation itself draws no randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "ZFeatureMap")]
    feature_map: FeatureMapKind,
    /// ZZFeatureMap only; defaults to full.
    #[arg(long)]
    fm_entanglement: Option<EntanglementStrategy>,
    #[arg(long, default_value_t = 2)]
    fm_reps: usize,
    #[arg(long, default_value = "RealAmplitudes")]
    ansatz: AnsatzKind,
    /// Ansatz entanglement; not accepted by PauliTwoDesign, defaults to full otherwise.
    #[arg(long)]
    entanglement: Option<EntanglementStrategy>,
    #[arg(long, default_value_t = 3)]
    ansatz_reps: usize,
    #[arg(long, default_value = "SPSA")]
    optimizer: OptimizerKind,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    #[arg(long, default_value_t = 7)]
    qubits: usize,
    #[arg(long = "train", default_value_t = 400)]
    n_train: usize,
    #[arg(long = "test", default_value_t = 250)]
    n_test: usize,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Seeds the initial parameters and the optimizer; drawn from the clock when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// Grid JSON file, or `paper-grid` for the built-in preset.
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 1, value_parser = at_least_one)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep output directory, or a results CSV file.
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[arg(long, default_value = "mse")]
    metric: Metric,
    /// Also write one SVG box plot per grouping axis.
    #[arg(long)]
    plots: bool,
    /// Export directory; defaults to the results directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Prepare(a) => run_prepare(a),
        Command::Train(a) => run_train(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Report(a) => run_report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Runtime(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn run_prepare(a: PrepareArgs) -> Result<(), CliError> {
    println!("seed: {}", a.seed);
    let raw = load_csv(&a.input, &a.target).map_err(usage)?;
    let prepared = prepare(&raw, a.pca).map_err(|e| match e {
        DataError::Io { .. } => runtime(e),
        _ => usage(e),
    })?;
    write_prepared(&a.out, &prepared).map_err(runtime)?;
    let p = &prepared.provenance;
    let retained: f64 = p.pca.explained_variance_ratio().iter().sum();
    println!("rows: {}", prepared.data.len());
    println!("attributes: {} -> {}", prepared.num_attributes, prepared.num_components());
    println!("encoded features: {}", p.feature_columns.len());
    if !p.dropped_columns.is_empty() {
        println!("dropped: {}", p.dropped_columns.join(", "));
    }
    println!("target: {} min {} max {}", p.schema.target, p.target_scaling.min, p.target_scaling.max);
    println!("explained variance: {retained:.6}");
    println!("output: {}", a.out.display());
    Ok(())
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

fn run_train(a: TrainArgs) -> Result<(), CliError> {
    let seed = resolve_seed(a.seed);
    println!("seed: {seed}");
    let (data, _) = read_prepared(&a.data).map_err(usage)?;
    if data.num_features() != a.qubits {
        return Err(usage(format!(
            "--qubits {} does not match the {} features in {}",
            a.qubits,
            data.num_features(),
            a.data.display()
        )));
    }
    let feature_map = FeatureMapSpec {
        kind: a.feature_map,
        num_qubits: a.qubits,
        reps: a.fm_reps,
        entanglement: a.fm_entanglement,
    };
    let mut ansatz = AnsatzSpec::new(a.ansatz, a.qubits, a.entanglement).with_reps(a.ansatz_reps);
    if a.entanglement.is_none() && a.ansatz.takes_entanglement() {
        ansatz.entanglement = Some(EntanglementStrategy::Full);
    }
    let config = TrialConfig {
        feature_map,
        ansatz,
        optimizer: OptimizerSpec::new(a.optimizer).with_max_iterations(a.max_iterations).with_seed(seed),
        seed,
    };
    config.validate().map_err(usage)?;
    let (train_set, test_set) = data.split(a.n_train, a.n_test, a.split_seed).map_err(usage)?;

    let started = std::time::Instant::now();
    let (model, report) = train(&config, &train_set, seed).map_err(|e| match e {
        EngineError::FeatureDimension { .. } | EngineError::QubitMismatch { .. } => usage(e),
        _ => runtime(format!("training failed: {e}")),
    })?;
    let metrics = model.evaluate(&test_set).map_err(runtime)?;
    let wall = started.elapsed().as_secs_f64();
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(runtime)?;
    }
    model.save(&a.out).map_err(runtime)?;

    let row = ResultRow {
        trial_id: String::new(),
        ansatz: config.ansatz.kind.to_string(),
        ansatz_entanglement: config.ansatz.entanglement.map(|e| e.to_string()),
        feature_map: config.feature_map.kind.to_string(),
        fm_entanglement: config.feature_map.entanglement.map(|e| e.to_string()),
        optimizer: config.optimizer.kind.to_string(),
        qubits: a.qubits,
        fm_reps: a.fm_reps,
        ansatz_reps: a.ansatz_reps,
        seed,
        mse: Some(metrics.mse),
        mae: Some(metrics.mae),
        time_s: wall,
        status: "ok".into(),
    };
    print!("{}", render_table(std::slice::from_ref(&row)));
    println!(
        "cost: initial {:.6} final {:.6} evaluations {} iterations {}",
        report.initial_cost, report.final_cost, report.trace.evaluations, report.trace.iterations
    );
    println!("metrics: mse {} mae {} time_s {wall:.3}", metrics.mse, metrics.mae);
    println!("model: {}", a.out.display());
    Ok(())
}

fn load_grid(spec: &str) -> Result<GridSpec, CliError> {
    if spec == "paper-grid" {
        return Ok(GridSpec::paper_grid());
    }
    let text = fs::read_to_string(spec).map_err(|e| usage(format!("cannot read grid {spec}: {e}")))?;
    GridSpec::from_json(&text).map_err(|e| usage(format!("malformed grid {spec}: {e}")))
}

fn run_sweep(a: SweepArgs) -> Result<(), CliError> {
    let grid = load_grid(&a.grid)?;
    let trials = enumerate_grid(&grid).map_err(usage)?;
    println!("seed: {}", grid.base_seed);
    let (data, _) = read_prepared(&a.data).map_err(usage)?;
    if data.num_features() != grid.qubits {
        return Err(usage(format!(
            "grid uses {} qubits but {} has {} features",
            grid.qubits,
            a.data.display(),
            data.num_features()
        )));
    }
    if grid.n_train + grid.n_test > data.len() {
        return Err(usage(format!(
            "grid needs {} rows, {} has {}",
            grid.n_train + grid.n_test,
            a.data.display(),
            data.len()
        )));
    }
    println!("trials: {}", trials.len());
    let total = trials.len();
    let mut done = 0;
    let outcome = run_trials(&trials, &data, a.workers, &a.out, |r| {
        done += 1;
        match (&r.status, r.mse, r.mae) {
            (TrialStatus::Ok, Some(mse), Some(mae)) => println!(
                "trial {done}/{total} {} ok mse {mse} mae {mae} time_s {:.3}",
                r.trial_id, r.wall_time_s
            ),
            (TrialStatus::Failed { reason }, ..) => println!("trial {done}/{total} {} failed: {reason}", r.trial_id),
            _ => println!("trial {done}/{total} {} incomplete", r.trial_id),
        }
    })
    .map_err(runtime)?;
    let failed = outcome.results.iter().filter(|r| !r.is_ok()).count();
    println!(
        "summary: executed {} resumed {} failed {failed} output {}",
        outcome.executed,
        outcome.resumed,
        a.out.display()
    );
    if failed == outcome.results.len() {
        return Err(runtime("every trial failed"));
    }
    if failed > 0 {
        eprintln!("warning: {failed} trial(s) failed");
    }
    Ok(())
}

fn load_rows(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let rows = if path.is_file() {
        import_csv(path).map_err(usage)?
    } else if path.is_dir() {
        load_results(path).map_err(usage)?.iter().map(|r| r.row()).collect()
    } else {
        return Err(usage(format!("{} does not exist", path.display())));
    };
    if rows.is_empty() {
        return Err(usage(format!("no results in {}", path.display())));
    }
    Ok(rows)
}

fn run_report(a: ReportArgs) -> Result<(), CliError> {
    let rows = load_rows(&a.results)?;
    let top = top_k(&rows, a.metric, a.top).map_err(|e| match e {
        SweepError::NoOkResults => usage(e),
        _ => runtime(e),
    })?;
    print!("{}", render_table(&top));
    let out = match (&a.out, a.results.is_dir()) {
        (Some(dir), _) => Some(dir.clone()),
        (None, true) => Some(a.results.clone()),
        (None, false) => None,
    };
    if let Some(dir) = out {
        for path in export(&rows, &dir, a.plots).map_err(runtime)? {
            println!("wrote: {}", path.display());
        }
    }
    Ok(())
}
