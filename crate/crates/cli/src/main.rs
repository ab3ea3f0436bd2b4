//! `codoa-bench`: tune the RBF width of an SVM with CoDOA or a baseline
//! optimizer, compare optimizers, and export plot data.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 run failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use codoa_svm::dataset::load_manifest_split;
use codoa_svm::fitness::evaluate_model;
use codoa_svm::harness::{
    compare, read_report, run_experiment, summary_text, write_outputs, write_plot_data,
    AggregateReport, ExperimentConfig, FitnessKind, HarnessError, OptimizerKind,
};
use codoa_svm::svm::MulticlassSvm;

#[derive(Parser)]
#[command(name = "codoa-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer on one dataset for several independent runs.
    Run {
        #[command(flatten)]
        flags: RunFlags,
        /// Optimizer to run.
        #[arg(long, value_enum)]
        optimizer: Option<OptimizerArg>,
        /// Save the final model of the best run as JSON.
        #[arg(long)]
        save_model: Option<PathBuf>,
        /// Skip the search: evaluate a saved model on the dataset's test split.
        #[arg(long)]
        load_model: Option<PathBuf>,
    },
    /// Run several optimizers on one dataset, or tabulate saved reports.
    Compare {
        #[command(flatten)]
        flags: RunFlags,
        /// Optimizers to compare.
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "codoa,ga,de,csa,pso"
        )]
        optimizers: Vec<OptimizerArg>,
        /// Compare existing report.json files instead of running.
        #[arg(long, num_args = 1..)]
        reports: Vec<PathBuf>,
    },
    /// Write `dataset,optimizer,mean_accuracy` rows from report.json files.
    PlotData {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Codoa,
    Ga,
    De,
    Csa,
    Pso,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(a: OptimizerArg) -> Self {
        match a {
            OptimizerArg::Codoa => OptimizerKind::Codoa,
            OptimizerArg::Ga => OptimizerKind::Ga,
            OptimizerArg::De => OptimizerKind::De,
            OptimizerArg::Csa => OptimizerKind::Csa,
            OptimizerArg::Pso => OptimizerKind::Pso,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitnessArg {
    Cv,
    Train,
}

/// Experiment settings; each overrides the same key of `--config`.
#[derive(Args)]
struct RunFlags {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset manifest (TOML).
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma_min: Option<f64>,
    #[arg(long)]
    sigma_max: Option<f64>,
    /// SVM box constraint.
    #[arg(long)]
    c: Option<f64>,
    /// Search fitness: cross-validated or resubstitution training accuracy.
    #[arg(long, value_enum)]
    fitness: Option<FitnessArg>,
    /// Cross-validation folds.
    #[arg(long)]
    folds: Option<usize>,
    /// Overrides the manifest's split seed.
    #[arg(long)]
    split_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// 90 particles, 5000 iterations, 50 runs.
    #[arg(long)]
    paper_scale: bool,
    /// Exclude failed runs from the means instead of aborting.
    #[arg(long)]
    skip_failed: bool,
    /// Record runs not started within this budget as incomplete.
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Resplit the data for every run.
    #[arg(long)]
    reshuffle_per_run: bool,
    /// Execute on a single thread.
    #[arg(long)]
    serial: bool,
}

impl RunFlags {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if self.paper_scale {
            c.full_scale();
        }
        if let Some(v) = &self.dataset {
            c.dataset = v.clone();
        }
        if let Some(v) = self.particles {
            c.particles = v;
        }
        if let Some(v) = self.iterations {
            c.iterations = v;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.sigma_min {
            c.sigma_min = v;
        }
        if let Some(v) = self.sigma_max {
            c.sigma_max = v;
        }
        if let Some(v) = self.c {
            c.c = v;
        }
        if let Some(v) = self.fitness {
            c.fitness = match v {
                FitnessArg::Cv => FitnessKind::Cv,
                FitnessArg::Train => FitnessKind::Train,
            };
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.split_seed {
            c.split_seed = Some(v);
        }
        if let Some(v) = &self.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = self.max_seconds {
            c.max_seconds = Some(v);
        }
        c.skip_failed |= self.skip_failed;
        c.reshuffle_per_run |= self.reshuffle_per_run;
        c.serial |= self.serial;
        Ok(c)
    }
}

/// Error carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn output_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| output_failure(dir, e))?;
    }
    fs::write(path, text).map_err(|e| output_failure(path, e))
}

fn evaluate_saved(config: &ExperimentConfig, model_path: &Path) -> Result<(), Failure> {
    let model = MulticlassSvm::load(model_path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", model_path.display()),
    })?;
    let split = load_manifest_split(&config.dataset, config.split_seed)
        .map_err(|e| Failure::from(HarnessError::from(e)))?;
    if model.class_names != split.test.class_names {
        return Err(Failure {
            code: 2,
            message: "model classes differ from the dataset's".into(),
        });
    }
    let counts =
        evaluate_model(&model, &split.test.features, &split.test.labels).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })?;
    let accuracy = counts.display().map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    println!(
        "dataset {}  TD {}  FD {}  accuracy {accuracy}",
        split.test.name, counts.true_diagnosis, counts.false_diagnosis
    );
    if let Some(dir) = &config.out {
        let json = serde_json::json!({
            "dataset": split.test.name,
            "true_diagnosis": counts.true_diagnosis,
            "false_diagnosis": counts.false_diagnosis,
            "accuracy": accuracy,
        });
        write_file(&dir.join("evaluation.json"), &format!("{json:#}\n"))?;
    }
    Ok(())
}

fn run(
    flags: RunFlags,
    optimizer: Option<OptimizerArg>,
    save_model: Option<PathBuf>,
    load_model: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut config = flags.config()?;
    if let Some(o) = optimizer {
        config.optimizer = o.into();
    }
    if let Some(path) = load_model {
        if config.dataset.as_os_str().is_empty() {
            return Err(HarnessError::Config("--load-model needs --dataset".into()).into());
        }
        return evaluate_saved(&config, &path);
    }
    let outcome = run_experiment(&config)?;
    print!("{}", summary_text(&outcome.report));
    if let Some(dir) = &config.out {
        write_outputs(dir, &outcome)?;
    }
    if let Some(path) = save_model {
        if let Some(model) = &outcome.best_model {
            let json = model.to_json().map_err(|e| output_failure(&path, e))?;
            write_file(&path, &json)?;
        }
    }
    Ok(())
}

fn run_compare(
    flags: RunFlags,
    optimizers: Vec<OptimizerArg>,
    reports: Vec<PathBuf>,
) -> Result<(), Failure> {
    let config = flags.config()?;
    let collected: Vec<AggregateReport> = if reports.is_empty() {
        let mut out = Vec::new();
        for o in optimizers {
            let mut c = config.clone();
            c.optimizer = o.into();
            let outcome = run_experiment(&c)?;
            if let Some(dir) = &config.out {
                write_outputs(&dir.join(c.optimizer.name()), &outcome)?;
            }
            out.push(outcome.report);
        }
        out
    } else {
        reports
            .iter()
            .map(|p| read_report(p))
            .collect::<Result<_, _>>()?
    };
    let table = compare(&collected)?;
    print!("{}", table.to_table());
    if let Some(dir) = &config.out {
        write_file(&dir.join("comparison.csv"), &table.to_csv()?)?;
        let json = serde_json::to_string_pretty(&table)
            .map_err(|e| output_failure(&dir.join("comparison.json"), e))?;
        write_file(&dir.join("comparison.json"), &(json + "\n"))?;
        write_file(&dir.join("plot_data.csv"), &write_plot_data(&collected)?)?;
    }
    Ok(())
}

fn plot_data(reports: Vec<PathBuf>, output: Option<PathBuf>) -> Result<(), Failure> {
    let collected: Vec<AggregateReport> = reports
        .iter()
        .map(|p| read_report(p))
        .collect::<Result<_, _>>()?;
    let text = write_plot_data(&collected)?;
    match output {
        Some(p) => write_file(&p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            flags,
            optimizer,
            save_model,
            load_model,
        } => run(flags, optimizer, save_model, load_model),
        Command::Compare {
            flags,
            optimizers,
            reports,
        } => run_compare(flags, optimizers, reports),
        Command::PlotData { reports, output } => plot_data(reports, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
