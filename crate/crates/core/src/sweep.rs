//! Exhaustive grid search over circuit and optimizer settings.
//!
//! Trials run on a fixed worker pool; a single writer persists one JSON file
//! per trial under `trials/`, named by a hash of the trial's canonical
//! serialization, so an interrupted sweep resumes by skipping files that
//! already exist.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuits::{
    AnsatzKind, AnsatzSpec, EntanglementStrategy, FeatureMapKind, FeatureMapSpec, DEFAULT_ANSATZ_REPS,
    DEFAULT_FEATURE_MAP_REPS,
};
use crate::data::{DataError, Dataset};
use crate::engine::{train, TrialConfig};
use crate::optim::{OptimizerKind, OptimizerSpec, Termination};

pub const TRIALS_DIR: &str = "trials";
pub const RESULTS_CSV: &str = "results.csv";
pub const PLOT_LOG: &str = "plots.log";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("no successful trials")]
    NoOkResults,
    #[error("no results to export")]
    NoResults,
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Candidate values per axis plus the settings shared by every trial.
///
/// Entanglement axes apply only to kinds that take a strategy; ZFeatureMap
/// and PauliTwoDesign contribute one configuration each regardless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub feature_maps: Vec<FeatureMapKind>,
    #[serde(default)]
    pub feature_map_entanglements: Vec<EntanglementStrategy>,
    #[serde(default = "default_fm_reps")]
    pub feature_map_reps: Vec<usize>,
    pub ansatzes: Vec<AnsatzKind>,
    #[serde(default)]
    pub ansatz_entanglements: Vec<EntanglementStrategy>,
    #[serde(default = "default_ansatz_reps")]
    pub ansatz_reps: Vec<usize>,
    pub optimizers: Vec<OptimizerKind>,
    /// Independent seeds per configuration.
    #[serde(default = "one")]
    pub repeats: usize,
    pub qubits: usize,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_train")]
    pub n_train: usize,
    #[serde(default = "default_test")]
    pub n_test: usize,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_fm_reps() -> Vec<usize> {
    vec![DEFAULT_FEATURE_MAP_REPS]
}
fn default_ansatz_reps() -> Vec<usize> {
    vec![DEFAULT_ANSATZ_REPS]
}
fn one() -> usize {
    1
}
fn default_iterations() -> usize {
    100
}
fn default_train() -> usize {
    400
}
fn default_test() -> usize {
    250
}

impl GridSpec {
    /// Every kind and strategy the library offers, at default repetitions.
    ///
    /// Yields 6 feature-map × 16 ansatz × 3 optimizer = 288 configurations.
    pub fn paper_grid() -> Self {
        Self {
            feature_maps: vec![FeatureMapKind::ZFeatureMap, FeatureMapKind::ZZFeatureMap],
            feature_map_entanglements: EntanglementStrategy::ALL.to_vec(),
            feature_map_reps: default_fm_reps(),
            ansatzes: AnsatzKind::ALL.to_vec(),
            ansatz_entanglements: EntanglementStrategy::ALL.to_vec(),
            ansatz_reps: default_ansatz_reps(),
            optimizers: OptimizerKind::ALL.to_vec(),
            repeats: 1,
            qubits: 7,
            max_iterations: default_iterations(),
            n_train: default_train(),
            n_test: default_test(),
            split_seed: 0,
            base_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let axes: [(&'static str, bool); 6] = [
            ("feature_maps", self.feature_maps.is_empty()),
            ("feature_map_reps", self.feature_map_reps.is_empty()),
            ("ansatzes", self.ansatzes.is_empty()),
            ("ansatz_reps", self.ansatz_reps.is_empty()),
            ("optimizers", self.optimizers.is_empty()),
            ("repeats", self.repeats == 0),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, empty)| *empty) {
            return Err(SweepError::EmptyAxis(name));
        }
        if self.feature_maps.iter().any(|k| k.takes_entanglement()) && self.feature_map_entanglements.is_empty() {
            return Err(SweepError::EmptyAxis("feature_map_entanglements"));
        }
        if self.ansatzes.iter().any(|k| k.takes_entanglement()) && self.ansatz_entanglements.is_empty() {
            return Err(SweepError::EmptyAxis("ansatz_entanglements"));
        }
        if self.qubits == 0 {
            return Err(SweepError::InvalidGrid("qubits must be at least 1".into()));
        }
        if self.feature_map_reps.contains(&0) || self.ansatz_reps.contains(&0) {
            return Err(SweepError::InvalidGrid("repetitions must be at least 1".into()));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(SweepError::InvalidGrid("train and test sizes must be at least 1".into()));
        }
        Ok(())
    }

    fn feature_map_configs(&self) -> Vec<FeatureMapSpec> {
        let mut out = Vec::new();
        for &kind in &self.feature_maps {
            let strategies: Vec<Option<EntanglementStrategy>> = if kind.takes_entanglement() {
                self.feature_map_entanglements.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for entanglement in strategies {
                for &reps in &self.feature_map_reps {
                    out.push(FeatureMapSpec {
                        kind,
                        num_qubits: self.qubits,
                        reps,
                        entanglement,
                    });
                }
            }
        }
        out
    }

    fn ansatz_configs(&self) -> Vec<AnsatzSpec> {
        let mut out = Vec::new();
        for &kind in &self.ansatzes {
            let strategies: Vec<Option<EntanglementStrategy>> = if kind.takes_entanglement() {
                self.ansatz_entanglements.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for entanglement in strategies {
                for &reps in &self.ansatz_reps {
                    out.push(AnsatzSpec::new(kind, self.qubits, entanglement).with_reps(reps));
                }
            }
        }
        out
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec {
            n_train: self.n_train,
            n_test: self.n_test,
            seed: self.split_seed,
        }
    }
}

/// Train/test partition shared by every trial of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

/// A trial as scheduled: its position in the grid and what it trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrial {
    pub index: usize,
    pub config: TrialConfig,
    pub split: SplitSpec,
}

impl SweepTrial {
    /// Hex SHA-256 prefix of the canonical JSON of `(config, split)`.
    pub fn id(&self) -> String {
        #[derive(Serialize)]
        struct Identity<'a> {
            config: &'a TrialConfig,
            split: &'a SplitSpec,
        }
        let canonical = serde_json::to_string(&Identity {
            config: &self.config,
            split: &self.split,
        })
        .expect("trial identity serializes");
        Sha256::digest(canonical.as_bytes())[..8]
            .iter()
            .fold(String::with_capacity(16), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

/// Cartesian product in lexicographic axis order; trial `i` gets seed `base_seed + i`.
///
/// Axis nesting, outermost first: feature map (kind, entanglement, reps),
/// ansatz (kind, entanglement, reps), optimizer, repeat.
pub fn enumerate_grid(grid: &GridSpec) -> Result<Vec<SweepTrial>, SweepError> {
    grid.validate()?;
    let split = grid.split();
    let ansatzes = grid.ansatz_configs();
    let mut out = Vec::new();
    for fm in grid.feature_map_configs() {
        for ansatz in &ansatzes {
            for &kind in &grid.optimizers {
                for _ in 0..grid.repeats {
                    let index = out.len();
                    let seed = grid.base_seed.wrapping_add(index as u64);
                    out.push(SweepTrial {
                        index,
                        config: TrialConfig {
                            feature_map: fm.clone(),
                            ansatz: ansatz.clone(),
                            optimizer: OptimizerSpec::new(kind)
                                .with_max_iterations(grid.max_iterations)
                                .with_seed(seed),
                            seed,
                        },
                        split,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub initial_cost: f64,
    pub final_cost: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: String,
    pub trial: SweepTrial,
    pub status: TrialStatus,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    /// Monotonic span around train + evaluate.
    pub wall_time_s: f64,
    pub train: Option<TrainSummary>,
}

impl TrialResult {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }

    pub fn row(&self) -> ResultRow {
        let c = &self.trial.config;
        ResultRow {
            trial_id: self.trial_id.clone(),
            ansatz: c.ansatz.kind.to_string(),
            ansatz_entanglement: c.ansatz.entanglement.map(|e| e.to_string()),
            feature_map: c.feature_map.kind.to_string(),
            fm_entanglement: c.feature_map.entanglement.map(|e| e.to_string()),
            optimizer: c.optimizer.kind.to_string(),
            qubits: c.qubits(),
            fm_reps: c.feature_map.reps,
            ansatz_reps: c.ansatz.reps,
            seed: c.seed,
            mse: self.mse,
            mae: self.mae,
            time_s: self.wall_time_s,
            status: match &self.status {
                TrialStatus::Ok => "ok".into(),
                TrialStatus::Failed { reason } => format!("failed: {reason}"),
            },
        }
    }
}

/// Trains and evaluates one trial; never panics.
pub fn run_trial(trial: &SweepTrial, train_set: &Dataset, test_set: &Dataset) -> TrialResult {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let (model, report) = train(&trial.config, train_set, trial.config.seed)?;
        let metrics = model.evaluate(test_set)?;
        Ok::<_, crate::engine::EngineError>((report, metrics))
    }));
    let wall_time_s = started.elapsed().as_secs_f64();
    let failed = |reason: String| TrialResult {
        trial_id: trial.id(),
        trial: trial.clone(),
        status: TrialStatus::Failed { reason },
        mse: None,
        mae: None,
        wall_time_s,
        train: None,
    };
    match outcome {
        Ok(Ok((report, metrics))) if metrics.mse.is_finite() && metrics.mae.is_finite() => TrialResult {
            trial_id: trial.id(),
            trial: trial.clone(),
            status: TrialStatus::Ok,
            mse: Some(metrics.mse),
            mae: Some(metrics.mae),
            wall_time_s,
            train: Some(TrainSummary {
                initial_cost: report.initial_cost,
                final_cost: report.final_cost,
                evaluations: report.trace.evaluations,
                iterations: report.trace.iterations,
                termination: report.trace.termination,
            }),
        },
        Ok(Ok(_)) => failed("non-finite metrics".into()),
        Ok(Err(e)) => failed(e.to_string()),
        Err(panic) => failed(
            panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "trial panicked".into()),
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// One result per trial, in trial order.
    pub results: Vec<TrialResult>,
    pub executed: usize,
    pub resumed: usize,
}

fn result_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(TRIALS_DIR).join(format!("{id}.json"))
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), SweepError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_result(path: &Path) -> Result<TrialResult, SweepError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| SweepError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs `trials` on `workers` threads, skipping those with a stored result.
///
/// `on_result` sees each newly finished trial on the writer thread.
pub fn run_trials(
    trials: &[SweepTrial],
    data: &Dataset,
    workers: usize,
    out_dir: &Path,
    mut on_result: impl FnMut(&TrialResult),
) -> Result<SweepOutcome, SweepError> {
    if workers == 0 {
        return Err(SweepError::NoWorkers);
    }
    let trials_dir = out_dir.join(TRIALS_DIR);
    fs::create_dir_all(&trials_dir).map_err(io_err(&trials_dir))?;

    let mut slots: Vec<Option<TrialResult>> = vec![None; trials.len()];
    let mut pending = Vec::new();
    for (pos, trial) in trials.iter().enumerate() {
        let path = result_path(out_dir, &trial.id());
        match path.exists().then(|| read_result(&path)) {
            Some(Ok(stored)) if stored.trial == *trial => slots[pos] = Some(stored),
            _ => pending.push(pos),
        }
    }
    let resumed = trials.len() - pending.len();

    // splits are cached per distinct split spec
    let mut splits: BTreeMap<(usize, usize, u64), Result<(Dataset, Dataset), String>> = BTreeMap::new();
    for &pos in &pending {
        let s = trials[pos].split;
        splits
            .entry((s.n_train, s.n_test, s.seed))
            .or_insert_with(|| data.split(s.n_train, s.n_test, s.seed).map_err(|e| e.to_string()));
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, TrialResult)>();
    let mut write_error = None;
    std::thread::scope(|scope| {
        for _ in 0..workers.min(pending.len()) {
            let tx = tx.clone();
            let (next, pending, splits) = (&next, &pending, &splits);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&pos) = pending.get(i) else { break };
                let trial = &trials[pos];
                let s = trial.split;
                let result = match &splits[&(s.n_train, s.n_test, s.seed)] {
                    Ok((train_set, test_set)) => run_trial(trial, train_set, test_set),
                    Err(reason) => TrialResult {
                        trial_id: trial.id(),
                        trial: trial.clone(),
                        status: TrialStatus::Failed { reason: reason.clone() },
                        mse: None,
                        mae: None,
                        wall_time_s: 0.0,
                        train: None,
                    },
                };
                if tx.send((pos, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (pos, result) in rx {
            if write_error.is_none() {
                let json = serde_json::to_string_pretty(&result).expect("result serializes") + "\n";
                if let Err(e) = write_atomic(&result_path(out_dir, &result.trial_id), &json) {
                    write_error = Some(e);
                }
            }
            on_result(&result);
            slots[pos] = Some(result);
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    Ok(SweepOutcome {
        results: slots.into_iter().map(|r| r.expect("every trial has a result")).collect(),
        executed: pending.len(),
        resumed,
    })
}

pub fn run_sweep(
    grid: &GridSpec,
    data: &Dataset,
    workers: usize,
    out_dir: &Path,
    on_result: impl FnMut(&TrialResult),
) -> Result<SweepOutcome, SweepError> {
    run_trials(&enumerate_grid(grid)?, data, workers, out_dir, on_result)
}

/// Loads every stored trial under `dir/trials` (or `dir` itself), in trial order.
pub fn load_results(dir: &Path) -> Result<Vec<TrialResult>, SweepError> {
    let nested = dir.join(TRIALS_DIR);
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut results = Vec::new();
    for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let path = entry.map_err(io_err(&dir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            results.push(read_result(&path)?);
        }
    }
    results.sort_by(|a, b| a.trial.index.cmp(&b.trial.index).then_with(|| a.trial_id.cmp(&b.trial_id)));
    Ok(results)
}

/// Flat record of one trial, matching the results CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial_id: String,
    pub ansatz: String,
    pub ansatz_entanglement: Option<String>,
    pub feature_map: String,
    pub fm_entanglement: Option<String>,
    pub optimizer: String,
    pub qubits: usize,
    pub fm_reps: usize,
    pub ansatz_reps: usize,
    pub seed: u64,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub time_s: f64,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok" && self.mse.is_some() && self.mae.is_some()
    }

    fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Mse => self.mse.unwrap_or(f64::INFINITY),
            Metric::Mae => self.mae.unwrap_or(f64::INFINITY),
            Metric::Time => self.time_s,
        }
    }

    fn feature_map_label(&self) -> String {
        match &self.fm_entanglement {
            Some(e) => format!("{}({e})", self.feature_map),
            None => self.feature_map.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Mae,
    Time,
}

impl FromStr for Metric {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(Metric::Mse),
            "mae" => Ok(Metric::Mae),
            "time" => Ok(Metric::Time),
            _ => Err(SweepError::Unknown {
                what: "metric",
                name: s.into(),
            }),
        }
    }
}

/// The `k` best successful rows, ascending by `metric`.
///
/// Ties fall back to MAE, then time, then position in `rows`.
pub fn top_k(rows: &[ResultRow], metric: Metric, k: usize) -> Result<Vec<ResultRow>, SweepError> {
    let mut ok: Vec<(usize, &ResultRow)> = rows.iter().enumerate().filter(|(_, r)| r.is_ok()).collect();
    if ok.is_empty() {
        return Err(SweepError::NoOkResults);
    }
    ok.sort_by(|(i, a), (j, b)| {
        a.metric(metric)
            .total_cmp(&b.metric(metric))
            .then(a.metric(Metric::Mae).total_cmp(&b.metric(Metric::Mae)))
            .then(a.time_s.total_cmp(&b.time_s))
            .then(i.cmp(j))
    });
    Ok(ok.into_iter().take(k).map(|(_, r)| r.clone()).collect())
}

fn format_time(seconds: f64) -> String {
    if seconds >= 100.0 {
        format!("{seconds:.0}s")
    } else {
        format!("{seconds:.2}s")
    }
}

/// Plain-text table with columns Ansatz | Optimizer | Feature Map | Entanglement | MSE | MAE | Time.
///
/// The entanglement column shows the ansatz strategy, falling back to the
/// feature-map strategy when the ansatz takes none.
pub fn render_table(rows: &[ResultRow]) -> String {
    let header = ["Ansatz", "Optimizer", "Feature Map", "Entanglement", "MSE", "MAE", "Time"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.ansatz.clone(),
                r.optimizer.clone(),
                r.feature_map.clone(),
                r.ansatz_entanglement
                    .clone()
                    .or_else(|| r.fm_entanglement.clone())
                    .unwrap_or_else(|| "-".into()),
                r.mse.map_or("-".into(), |v| format!("{v:.4}")),
                r.mae.map_or("-".into(), |v| format!("{v:.4}")),
                format_time(r.time_s),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..7)
        .map(|c| cells.iter().map(|r| r[c].chars().count()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |fields: &[&str]| {
        fields
            .iter()
            .zip(&widths)
            .map(|(f, w)| format!("{f:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&header) + "\n";
    out += &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-");
    out.push('\n');
    for r in &cells {
        out += &line(&r.iter().map(String::as_str).collect::<Vec<_>>());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupAxis {
    FeatureMap,
    Ansatz,
    Optimizer,
}

impl GroupAxis {
    pub const ALL: [GroupAxis; 3] = [GroupAxis::FeatureMap, GroupAxis::Ansatz, GroupAxis::Optimizer];

    pub fn name(self) -> &'static str {
        match self {
            GroupAxis::FeatureMap => "feature_map",
            GroupAxis::Ansatz => "ansatz",
            GroupAxis::Optimizer => "optimizer",
        }
    }

    fn key(self, row: &ResultRow) -> String {
        match self {
            GroupAxis::FeatureMap => row.feature_map_label(),
            GroupAxis::Ansatz => row.ansatz.clone(),
            GroupAxis::Optimizer => row.optimizer.clone(),
        }
    }
}

impl fmt::Display for GroupAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupAxis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupAxis::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| SweepError::Unknown {
                what: "axis",
                name: s.into(),
            })
    }
}

/// Five-number summary plus mean; quartiles use linear interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            count: v.len(),
            min: v[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            q3: quantile(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub trials: usize,
    /// `None` when no trial in the group succeeded.
    pub mse: Option<BoxStats>,
}

/// MSE distribution per group along `axis`, groups sorted by name.
pub fn group_stats(rows: &[ResultRow], axis: GroupAxis) -> Result<Vec<GroupSummary>, SweepError> {
    if !rows.iter().any(ResultRow::is_ok) {
        return Err(SweepError::NoOkResults);
    }
    let mut groups: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let entry = groups.entry(axis.key(row)).or_default();
        entry.0 += 1;
        if row.is_ok() {
            entry.1.extend(row.mse);
        }
    }
    Ok(groups
        .into_iter()
        .map(|(group, (trials, values))| GroupSummary {
            group,
            trials,
            mse: BoxStats::from_values(&values),
        })
        .collect())
}

/// Writes one CSV row per result with the columns of [`ResultRow`].
pub fn export_csv(rows: &[ResultRow], path: &Path) -> Result<(), SweepError> {
    if rows.is_empty() {
        return Err(SweepError::NoResults);
    }
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(io_err(path))
}

pub fn import_csv(path: &Path) -> Result<Vec<ResultRow>, SweepError> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Box plot of MSE per group; groups without successful trials are skipped.
pub fn render_boxplot_svg(title: &str, groups: &[GroupSummary]) -> String {
    let shown: Vec<(&str, BoxStats)> = groups.iter().filter_map(|g| g.mse.map(|s| (g.group.as_str(), s))).collect();
    let (w_box, left, top, height) = (110.0, 70.0, 40.0, 300.0);
    let width = left + w_box * shown.len().max(1) as f64 + 20.0;
    let total_height = top + height + 80.0;
    let lo = shown.iter().map(|(_, s)| s.min).fold(f64::INFINITY, f64::min);
    let hi = shown.iter().map(|(_, s)| s.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if shown.is_empty() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5 * lo.abs().max(1e-3), hi + 0.5 * hi.abs().max(1e-3))
    };
    let y = |v: f64| top + height * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{total_height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, xml_escape(title));
    let _ = writeln!(svg, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.1}" stroke="black"/>"#, top + height);
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.4}</text>"#,
            left - 5.0,
            y(v) + 4.0
        );
    }
    for (i, (name, s)) in shown.iter().enumerate() {
        let cx = left + w_box * (i as f64 + 0.5);
        let half = w_box * 0.3;
        let _ = writeln!(
            svg,
            r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
            y(s.max),
            y(s.min)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            cx - half,
            y(s.q3),
            2.0 * half,
            (y(s.q1) - y(s.q3)).max(0.5)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(s.median),
            cx + half,
            y(s.median)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            top + height + 20.0,
            xml_escape(name)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" fill="gray">n={}</text>"#,
            top + height + 36.0,
            s.count
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `results.csv`, one `mse_by_<axis>.svg` per axis, and a sidecar
/// log naming groups left out of the plots. Returns the written paths.
pub fn export(rows: &[ResultRow], out_dir: &Path, plots: bool) -> Result<Vec<PathBuf>, SweepError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();
    let csv_path = out_dir.join(RESULTS_CSV);
    export_csv(rows, &csv_path)?;
    written.push(csv_path);
    if !plots {
        return Ok(written);
    }
    let mut log = String::new();
    for axis in GroupAxis::ALL {
        let groups = group_stats(rows, axis)?;
        for g in groups.iter().filter(|g| g.mse.is_none()) {
            let _ = writeln!(log, "{axis}: group `{}` has no successful trials ({} failed); omitted", g.group, g.trials);
        }
        let path = out_dir.join(format!("mse_by_{axis}.svg"));
        let title = format!("MSE by {}", axis.name().replace('_', " "));
        fs::write(&path, render_boxplot_svg(&title, &groups)).map_err(io_err(&path))?;
        written.push(path);
    }
    let log_path = out_dir.join(PLOT_LOG);
    fs::write(&log_path, log).map_err(io_err(&log_path))?;
    written.push(log_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec {
            feature_maps: vec![FeatureMapKind::ZFeatureMap],
            feature_map_entanglements: vec![],
            feature_map_reps: vec![1],
            ansatzes: vec![AnsatzKind::PauliTwoDesign],
            ansatz_entanglements: vec![],
            ansatz_reps: vec![1],
            optimizers: vec![OptimizerKind::Spsa],
            repeats: 1,
            qubits: 2,
            max_iterations: 5,
            n_train: 6,
            n_test: 4,
            split_seed: 0,
            base_seed: 10,
        }
    }

    pub(crate) fn row(ansatz: &str, opt: &str, fm: &str, ent: &str, mse: f64, mae: f64, time: f64) -> ResultRow {
        ResultRow {
            trial_id: format!("{ansatz}-{opt}-{ent}"),
            ansatz: ansatz.into(),
            ansatz_entanglement: Some(ent.into()),
            feature_map: fm.into(),
            fm_entanglement: None,
            optimizer: opt.into(),
            qubits: 7,
            fm_reps: 2,
            ansatz_reps: 3,
            seed: 0,
            mse: Some(mse),
            mae: Some(mae),
            time_s: time,
            status: "ok".into(),
        }
    }

    #[test]
    fn suppression_rule() {
        let trials = enumerate_grid(&grid()).unwrap();
        assert_eq!(trials.len(), 1);
        assert_eq!(trials[0].config.seed, 10);
        assert!(trials[0].config.feature_map.entanglement.is_none());
        assert!(trials[0].config.ansatz.entanglement.is_none());
    }

    #[test]
    fn product_count_and_seeds() {
        let mut g = grid();
        g.feature_maps = vec![FeatureMapKind::ZFeatureMap, FeatureMapKind::ZZFeatureMap];
        g.feature_map_entanglements = vec![EntanglementStrategy::Linear];
        g.ansatzes = vec![AnsatzKind::RealAmplitudes, AnsatzKind::EfficientSU2];
        g.ansatz_entanglements = vec![EntanglementStrategy::Full];
        g.optimizers = OptimizerKind::ALL.to_vec();
        let trials = enumerate_grid(&g).unwrap();
        assert_eq!(trials.len(), 12);
        for (i, t) in trials.iter().enumerate() {
            assert_eq!(t.index, i);
            assert_eq!(t.config.seed, 10 + i as u64);
            assert_eq!(t.config.optimizer.seed, t.config.seed);
        }
        let ids: std::collections::BTreeSet<String> = trials.iter().map(SweepTrial::id).collect();
        assert_eq!(ids.len(), 12);
    }

    #[test]
    fn paper_grid_count() {
        assert_eq!(enumerate_grid(&GridSpec::paper_grid()).unwrap().len(), 288);
    }

    #[test]
    fn empty_axes_rejected() {
        let mut g = grid();
        g.optimizers.clear();
        assert!(matches!(enumerate_grid(&g), Err(SweepError::EmptyAxis("optimizers"))));
        let mut g = grid();
        g.ansatzes = vec![AnsatzKind::TwoLocal];
        assert!(matches!(enumerate_grid(&g), Err(SweepError::EmptyAxis("ansatz_entanglements"))));
    }

    #[test]
    fn grid_json_schema() {
        let text = r#"{"feature_maps": ["ZFeatureMap"], "ansatzes": ["PauliTwoDesign"], "optimizers": ["SPSA"], "qubits": 3}"#;
        let g = GridSpec::from_json(text).unwrap();
        assert_eq!((g.n_train, g.n_test, g.max_iterations, g.repeats), (400, 250, 100, 1));
        assert!(GridSpec::from_json(r#"{"feature_maps": [], "bogus": 1}"#).is_err());
    }

    #[test]
    fn top_k_ties_and_clamp() {
        let rows = vec![
            row("A", "SPSA", "ZFeatureMap", "full", 0.1, 0.3, 1.0),
            row("B", "SPSA", "ZFeatureMap", "full", 0.1, 0.2, 5.0),
            row("C", "SPSA", "ZFeatureMap", "full", 0.05, 0.4, 2.0),
        ];
        let top = top_k(&rows, Metric::Mse, 10).unwrap();
        assert_eq!(top.iter().map(|r| r.ansatz.as_str()).collect::<Vec<_>>(), ["C", "B", "A"]);
        let top = top_k(&rows, Metric::Time, 1).unwrap();
        assert_eq!(top[0].ansatz, "A");
        let mut failed = rows[0].clone();
        failed.status = "failed: x".into();
        failed.mse = None;
        assert!(matches!(top_k(&[failed], Metric::Mse, 1), Err(SweepError::NoOkResults)));
    }

    #[test]
    fn box_stats_arithmetic() {
        let s = BoxStats::from_values(&[0.3, 0.1, 0.2]).unwrap();
        assert_eq!((s.min, s.median, s.max), (0.1, 0.2, 0.3));
        assert!((s.mean - 0.2).abs() < 1e-15);
        let s = BoxStats::from_values(&[0.7]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.mean, s.q3, s.max), (0.7, 0.7, 0.7, 0.7, 0.7, 0.7));
        assert!(BoxStats::from_values(&[]).is_none());
    }

    #[test]
    fn group_axis_parsing() {
        assert_eq!("feature-map".parse::<GroupAxis>().unwrap(), GroupAxis::FeatureMap);
        assert!("qubits".parse::<GroupAxis>().is_err());
    }

    #[test]
    fn svg_omits_empty_groups() {
        let groups = vec![
            GroupSummary {
                group: "SPSA".into(),
                trials: 2,
                mse: BoxStats::from_values(&[0.1, 0.2]),
            },
            GroupSummary {
                group: "COBYLA".into(),
                trials: 1,
                mse: None,
            },
        ];
        let svg = render_boxplot_svg("t", &groups);
        assert!(svg.contains(">SPSA<") && !svg.contains("COBYLA"));
        assert_eq!(svg.matches("<rect").count(), 1);
    }
}
