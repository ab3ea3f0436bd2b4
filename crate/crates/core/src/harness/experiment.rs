use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, FitnessKind, OptimizerKind};
use super::HarnessError;
use crate::dataset::{load_split, DatasetManifest, PreparedSplit};
use crate::fitness::{evaluate_model, format_percent, DiagnosisCounts, SvmObjective};
use crate::optimizer::run_stream;
use crate::svm::{KernelFamily, KernelSpec, MulticlassSvm, TrainParams};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
    /// Not started before the time budget ran out.
    Incomplete,
}

/// Outcome of one run. Wall time is kept out of the record so that
/// records reproduce byte for byte; see [`ExperimentOutcome::wall_seconds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// RNG stream of the optimizer, equal to `run`.
    pub stream: u64,
    pub split_seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub best_sigma: Option<f64>,
    /// Best fitness found during the search.
    pub train_fitness: Option<f64>,
    pub true_diagnosis: Option<u64>,
    pub false_diagnosis: Option<u64>,
    /// Test-split accuracy in percent.
    pub accuracy: Option<f64>,
    pub evaluations: usize,
    pub fitness_warnings: usize,
    pub model_converged: Option<bool>,
    /// Best-so-far fitness after each iteration.
    pub history: Vec<f64>,
}

impl RunRecord {
    fn blank(run: usize, seed: u64, split_seed: u64, status: RunStatus) -> Self {
        Self {
            run,
            seed,
            stream: run as u64,
            split_seed,
            status,
            error: None,
            best_sigma: None,
            train_fitness: None,
            true_diagnosis: None,
            false_diagnosis: None,
            accuracy: None,
            evaluations: 0,
            fitness_warnings: 0,
            model_converged: None,
            history: Vec::new(),
        }
    }

    pub fn counts(&self) -> Option<DiagnosisCounts> {
        Some(DiagnosisCounts::new(
            self.true_diagnosis?,
            self.false_diagnosis?,
        ))
    }
}

/// Per-run records with their means over completed runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub artifact_version: String,
    pub dataset: String,
    pub optimizer: OptimizerKind,
    pub config: ExperimentConfig,
    pub train_size: usize,
    pub test_size: usize,
    pub n_features: usize,
    pub class_names: Vec<String>,
    pub completed_runs: usize,
    /// False when the time budget left runs unstarted.
    pub complete: bool,
    pub mean_true_diagnosis: f64,
    pub mean_false_diagnosis: f64,
    pub mean_accuracy: f64,
    pub records: Vec<RunRecord>,
}

pub struct ExperimentOutcome {
    pub report: AggregateReport,
    /// Wall time per run, `None` for runs that never started.
    pub wall_seconds: Vec<Option<f64>>,
    /// Final model of the completed run with the highest search fitness.
    pub best_model: Option<MulticlassSvm>,
}

struct RunOutput {
    record: RunRecord,
    seconds: Option<f64>,
    model: Option<MulticlassSvm>,
}

fn train_params(config: &ExperimentConfig) -> TrainParams {
    TrainParams::with_c(config.c)
}

fn run_one(
    config: &ExperimentConfig,
    manifest: &DatasetManifest,
    shared: Option<&PreparedSplit>,
    base_split_seed: u64,
    run: usize,
) -> Result<(RunRecord, MulticlassSvm), String> {
    let split_seed = if config.reshuffle_per_run {
        base_split_seed.wrapping_add(run as u64)
    } else {
        base_split_seed
    };
    let owned;
    let data = match shared {
        Some(d) => d,
        None => {
            owned = load_split(manifest, Some(split_seed)).map_err(|e| e.to_string())?;
            &owned
        }
    };
    let params = train_params(config);
    let objective = match config.fitness {
        FitnessKind::Cv => SvmObjective::cross_validated(
            &data.train,
            KernelFamily::Rbf,
            params,
            config.folds,
            config.seed,
        ),
        FitnessKind::Train => {
            SvmObjective::holdout(&data.train, &data.train, KernelFamily::Rbf, params)
        }
    }
    .map_err(|e| e.to_string())?;
    let optimizer = config.params.build(config.optimizer);
    let space = config.space().map_err(|e| e.to_string())?;
    let result = run_stream(
        optimizer.as_ref(),
        &space,
        &config.run_config(),
        &objective,
        run as u64,
    )
    .map_err(|e| e.to_string())?;
    let sigma = result.best_position[0];
    let kernel = KernelSpec::rbf(sigma).map_err(|e| e.to_string())?;
    let model = MulticlassSvm::train(
        &data.train.features,
        &data.train.labels,
        &data.train.class_names,
        kernel,
        &params,
    )
    .map_err(|e| e.to_string())?;
    let counts = evaluate_model(&model, &data.test.features, &data.test.labels)
        .map_err(|e| e.to_string())?;
    let mut record = RunRecord::blank(run, config.seed, split_seed, RunStatus::Ok);
    record.best_sigma = Some(sigma);
    record.train_fitness = Some(result.best_fitness);
    record.true_diagnosis = Some(counts.true_diagnosis);
    record.false_diagnosis = Some(counts.false_diagnosis);
    record.accuracy = Some(counts.accuracy().map_err(|e| e.to_string())?);
    record.evaluations = result.evaluations;
    record.fitness_warnings = objective.warnings();
    record.model_converged = Some(model.converged());
    record.history = result.history.iter().map(|h| h.best_fitness).collect();
    log::info!(
        "{} run {run}: sigma {sigma:.4}, fitness {:.2}, test {}/{}",
        config.optimizer.name(),
        result.best_fitness,
        counts.true_diagnosis,
        counts.total()
    );
    Ok((record, model))
}

/// Runs `config.runs` independent repetitions and aggregates them in
/// run-index order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    let manifest = DatasetManifest::from_file(&config.dataset)?;
    let base_split_seed = config.split_seed.unwrap_or(manifest.split_seed);
    // load once up front: data errors surface before any run starts
    let first = load_split(&manifest, Some(base_split_seed))?;
    let shared = (!config.reshuffle_per_run).then_some(&first);

    let start = Instant::now();
    let deadline = config.max_seconds;
    let one = |run: usize| -> RunOutput {
        if let Some(limit) = deadline {
            if start.elapsed().as_secs_f64() >= limit {
                let split = if config.reshuffle_per_run {
                    base_split_seed.wrapping_add(run as u64)
                } else {
                    base_split_seed
                };
                return RunOutput {
                    record: RunRecord::blank(run, config.seed, split, RunStatus::Incomplete),
                    seconds: None,
                    model: None,
                };
            }
        }
        let t = Instant::now();
        match run_one(config, &manifest, shared, base_split_seed, run) {
            Ok((record, model)) => RunOutput {
                record,
                seconds: Some(t.elapsed().as_secs_f64()),
                model: Some(model),
            },
            Err(message) => {
                let mut record =
                    RunRecord::blank(run, config.seed, base_split_seed, RunStatus::Failed);
                record.error = Some(message);
                RunOutput {
                    record,
                    seconds: Some(t.elapsed().as_secs_f64()),
                    model: None,
                }
            }
        }
    };
    let outputs: Vec<RunOutput> = if config.serial {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..config.runs).map(one).collect())
    } else {
        (0..config.runs).into_par_iter().map(one).collect()
    };

    if !config.skip_failed {
        if let Some(bad) = outputs
            .iter()
            .find(|o| o.record.status == RunStatus::Failed)
        {
            return Err(HarnessError::Run {
                run: bad.record.run,
                message: bad.record.error.clone().unwrap_or_default(),
            });
        }
    }
    for o in &outputs {
        if let Some(e) = &o.record.error {
            log::warn!("run {} failed and is excluded: {e}", o.record.run);
        }
    }
    let ok: Vec<&RunRecord> = outputs
        .iter()
        .map(|o| &o.record)
        .filter(|r| r.status == RunStatus::Ok)
        .collect();
    if ok.is_empty() {
        return Err(HarnessError::NoCompletedRuns);
    }
    let n = ok.len() as f64;
    let mean = |f: &dyn Fn(&RunRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / n;
    let report = AggregateReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        dataset: manifest.name.clone(),
        optimizer: config.optimizer,
        config: config.clone(),
        train_size: first.train.len(),
        test_size: first.test.len(),
        n_features: first.train.n_features(),
        class_names: first.train.class_names.clone(),
        completed_runs: ok.len(),
        complete: outputs
            .iter()
            .all(|o| o.record.status != RunStatus::Incomplete),
        mean_true_diagnosis: mean(&|r| r.true_diagnosis.unwrap_or(0) as f64),
        mean_false_diagnosis: mean(&|r| r.false_diagnosis.unwrap_or(0) as f64),
        mean_accuracy: mean(&|r| r.accuracy.unwrap_or(0.0)),
        records: outputs.iter().map(|o| o.record.clone()).collect(),
    };
    let wall_seconds = outputs.iter().map(|o| o.seconds).collect();
    // highest search fitness, lowest run index on ties
    let mut best: Option<(f64, usize)> = None;
    for (i, o) in outputs.iter().enumerate() {
        if let (Some(f), Some(_)) = (o.record.train_fitness, &o.model) {
            if best.is_none_or(|(b, _)| f > b) {
                best = Some((f, i));
            }
        }
    }
    let best_model = best.and_then(|(_, i)| outputs.into_iter().nth(i)?.model);
    Ok(ExperimentOutcome {
        report,
        wall_seconds,
        best_model,
    })
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    run: usize,
    seed: u64,
    stream: u64,
    split_seed: u64,
    status: RunStatus,
    best_sigma: Option<f64>,
    train_fitness: Option<f64>,
    true_diagnosis: Option<u64>,
    false_diagnosis: Option<u64>,
    accuracy: Option<f64>,
    evaluations: usize,
    fitness_warnings: usize,
    model_converged: Option<bool>,
    error: Option<&'a str>,
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Per-run records as CSV, without the history.
pub fn records_csv(report: &AggregateReport) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.records {
        w.serialize(CsvRecord {
            run: r.run,
            seed: r.seed,
            stream: r.stream,
            split_seed: r.split_seed,
            status: r.status,
            best_sigma: r.best_sigma,
            train_fitness: r.train_fitness,
            true_diagnosis: r.true_diagnosis,
            false_diagnosis: r.false_diagnosis,
            accuracy: r.accuracy,
            evaluations: r.evaluations,
            fitness_warnings: r.fitness_warnings,
            model_converged: r.model_converged,
            error: r.error.as_deref(),
        })
        .map_err(|e| output_err(Path::new("records.csv"), e))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| output_err(Path::new("records.csv"), e))?;
    String::from_utf8(bytes).map_err(|e| output_err(Path::new("records.csv"), e))
}

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| "-".to_string(), f)
}

/// Human-readable run table with two-decimal accuracies.
pub fn summary_text(report: &AggregateReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "dataset {}  optimizer {}  runs {} ({} completed{})",
        report.dataset,
        report.optimizer.name(),
        report.records.len(),
        report.completed_runs,
        if report.complete { "" } else { ", incomplete" }
    );
    let _ = writeln!(
        s,
        "train/test rows {}/{}  features {}  classes {}",
        report.train_size,
        report.test_size,
        report.n_features,
        report.class_names.join(" ")
    );
    let _ = writeln!(
        s,
        "{:>4} {:>10} {:>10} {:>6} {:>6} {:>9}  status",
        "run", "sigma", "fitness", "TD", "FD", "accuracy"
    );
    for r in &report.records {
        let status = match r.status {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
            RunStatus::Incomplete => "incomplete",
        };
        let _ = writeln!(
            s,
            "{:>4} {:>10} {:>10} {:>6} {:>6} {:>9}  {status}",
            r.run,
            opt(r.best_sigma, |v| format!("{v:.4}")),
            opt(r.train_fitness, format_percent),
            r.true_diagnosis.map_or("-".into(), |v| v.to_string()),
            r.false_diagnosis.map_or("-".into(), |v| v.to_string()),
            opt(r.accuracy, format_percent),
        );
    }
    let _ = writeln!(
        s,
        "mean TD {:.2}  mean FD {:.2}  mean accuracy {}",
        report.mean_true_diagnosis,
        report.mean_false_diagnosis,
        format_percent(report.mean_accuracy)
    );
    s
}

/// Writes `report.json`, `records.csv`, `summary.txt` and `timings.csv`.
pub fn write_outputs(dir: &Path, outcome: &ExperimentOutcome) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))?;
    let write = |name: &str, text: String| -> Result<(), HarnessError> {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| output_err(&p, e))
    };
    let json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| output_err(&dir.join("report.json"), e))?;
    write("report.json", json + "\n")?;
    write("records.csv", records_csv(&outcome.report)?)?;
    write("summary.txt", summary_text(&outcome.report))?;
    let mut t = String::from("run,wall_seconds\n");
    for (i, s) in outcome.wall_seconds.iter().enumerate() {
        let _ = writeln!(t, "{i},{}", s.map_or(String::new(), |v| format!("{v:.3}")));
    }
    write("timings.csv", t)
}

pub fn read_report(path: &Path) -> Result<AggregateReport, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| output_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| output_err(path, e))
}
