use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baselines::{Csa, CsaParams, De, DeParams, Ga, GaParams, Pso, PsoParams};
use crate::codoa::{CoDoa, CoDoaParams};
use crate::optimizer::{Optimizer, RunConfig, SearchSpace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Codoa,
    Ga,
    De,
    Csa,
    Pso,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Codoa,
        OptimizerKind::Ga,
        OptimizerKind::De,
        OptimizerKind::Csa,
        OptimizerKind::Pso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Codoa => "codoa",
            OptimizerKind::Ga => "ga",
            OptimizerKind::De => "de",
            OptimizerKind::Csa => "csa",
            OptimizerKind::Pso => "pso",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

/// How candidate σ values are scored during the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessKind {
    /// Stratified k-fold cross-validation accuracy on the training split.
    #[default]
    Cv,
    /// Resubstitution accuracy on the training split.
    Train,
}

/// Parameter tables of every optimizer; only the selected one is used.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerParams {
    pub codoa: CoDoaParams,
    pub ga: GaParams,
    pub de: DeParams,
    pub csa: CsaParams,
    pub pso: PsoParams,
}

impl OptimizerParams {
    pub fn build(&self, kind: OptimizerKind) -> Box<dyn Optimizer> {
        match kind {
            OptimizerKind::Codoa => Box::new(CoDoa::new(self.codoa)),
            OptimizerKind::Ga => Box::new(Ga::new(self.ga)),
            OptimizerKind::De => Box::new(De::new(self.de)),
            OptimizerKind::Csa => Box::new(Csa::new(self.csa)),
            OptimizerKind::Pso => Box::new(Pso::new(self.pso)),
        }
    }
}

pub const FULL_SCALE_PARTICLES: usize = 90;
pub const FULL_SCALE_ITERATIONS: usize = 5000;
pub const FULL_SCALE_RUNS: usize = 50;

/// One optimizer × dataset experiment. In TOML the keys match the CLI
/// flags (`sigma-min`, `max-seconds`, …); optimizer parameters live in
/// `[params.codoa]`, `[params.ga]` and so on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    /// Dataset manifest path.
    pub dataset: PathBuf,
    pub optimizer: OptimizerKind,
    pub particles: usize,
    pub iterations: usize,
    pub runs: usize,
    /// Master seed; run `r` draws from stream `r` of this seed.
    pub seed: u64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub c: f64,
    pub fitness: FitnessKind,
    pub folds: usize,
    /// Replaces the manifest's split seed.
    pub split_seed: Option<u64>,
    /// Split run `r` with split seed `split_seed + r`.
    pub reshuffle_per_run: bool,
    pub skip_failed: bool,
    /// Runs not started within this many seconds are recorded incomplete.
    pub max_seconds: Option<f64>,
    /// Execute on one thread.
    pub serial: bool,
    pub out: Option<PathBuf>,
    pub params: OptimizerParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            optimizer: OptimizerKind::Codoa,
            particles: 20,
            iterations: 200,
            runs: 5,
            seed: 0,
            sigma_min: 0.01,
            sigma_max: 50.0,
            c: 1.0,
            fitness: FitnessKind::Cv,
            folds: 5,
            split_seed: None,
            reshuffle_per_run: false,
            skip_failed: false,
            max_seconds: None,
            serial: false,
            out: None,
            params: OptimizerParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))
    }

    /// Reads a config file; a relative `dataset` resolves against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut c = Self::from_toml_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if c.dataset.is_relative() && !c.dataset.as_os_str().is_empty() {
            if let Some(dir) = path.parent() {
                c.dataset = dir.join(&c.dataset);
            }
        }
        Ok(c)
    }

    pub fn full_scale(&mut self) {
        self.particles = FULL_SCALE_PARTICLES;
        self.iterations = FULL_SCALE_ITERATIONS;
        self.runs = FULL_SCALE_RUNS;
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig::new(self.particles, self.iterations, self.seed)
    }

    pub fn space(&self) -> Result<SearchSpace, HarnessError> {
        SearchSpace::interval(self.sigma_min, self.sigma_max)
            .map_err(|e| HarnessError::Config(format!("sigma bounds: {e}")))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.dataset.as_os_str().is_empty() {
            return Err(HarnessError::Config("no dataset manifest given".into()));
        }
        if self.runs < 1 {
            return Err(HarnessError::Config("runs must be >= 1".into()));
        }
        if self.sigma_min.is_nan() || self.sigma_min <= 0.0 {
            return Err(HarnessError::Config("sigma-min must be positive".into()));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(HarnessError::Config("c must be positive".into()));
        }
        if self.fitness == FitnessKind::Cv && self.folds < 2 {
            return Err(HarnessError::Config("folds must be >= 2".into()));
        }
        if let Some(s) = self.max_seconds {
            if s.is_nan() || s <= 0.0 {
                return Err(HarnessError::Config("max-seconds must be positive".into()));
            }
        }
        self.space()?;
        let rc = self.run_config();
        rc.validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.params
            .build(self.optimizer)
            .validate(&rc)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }
}
