//! Optimizer abstraction shared by CoDOA and the baseline metaheuristics.
//!
//! Every optimizer maximizes an [`Objective`] over a box-bounded
//! [`SearchSpace`], runs for exactly [`RunConfig::max_iterations`]
//! iterations and reports a best-so-far history with one entry per
//! iteration. Randomness comes from a ChaCha8 stream keyed by
//! `(seed, run_index)`, so a run is reproducible on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Random number generator owned by a single optimizer run.
pub type RunRng = ChaCha8Rng;

/// Creates the generator for run `run_index` under the master `seed`.
///
/// The seed is expanded with `ChaCha8Rng::seed_from_u64` (PCG32 based, fixed
/// across platforms) and `run_index` selects the ChaCha stream, so two runs
/// under one seed never share draws.
pub fn seeded_rng(seed: u64, run_index: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// One uniform draw in `[0, 1)`; this is every `rand.` of the update rules.
#[inline]
pub fn seeded_uniform(rng: &mut RunRng) -> f64 {
    rng.random::<f64>()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid {optimizer} parameters: {reason}")]
    InvalidParams {
        optimizer: &'static str,
        reason: String,
    },
}

/// Box-bounded continuous search space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OptimizerError> {
        if lower.is_empty() {
            return Err(OptimizerError::InvalidSpace(
                "dimension must be positive".into(),
            ));
        }
        if lower.len() != upper.len() {
            return Err(OptimizerError::InvalidSpace(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(OptimizerError::InvalidSpace(format!(
                    "bound {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// One-dimensional space `[lower, upper]`, the σ-only case.
    pub fn interval(lower: f64, upper: f64) -> Result<Self, OptimizerError> {
        Self::new(vec![lower], vec![upper])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Clamps every coordinate onto its bounds.
    pub fn clamp(&self, position: &mut [f64]) {
        for ((x, lo), hi) in position.iter_mut().zip(&self.lower).zip(&self.upper) {
            // NaN maps to the lower bound so it can never enter a swarm.
            *x = if x.is_nan() { *lo } else { x.clamp(*lo, *hi) };
        }
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dim()
            && position
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Uniform sample over the box.
    pub fn sample(&self, rng: &mut RunRng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                let x = lo + seeded_uniform(rng) * (hi - lo);
                x.min(*hi)
            })
            .collect()
    }
}

/// Population size, iteration budget and master seed of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(population_size: usize, max_iterations: usize, seed: u64) -> Self {
        Self {
            population_size,
            max_iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.population_size < 2 {
            return Err(OptimizerError::InvalidConfig(format!(
                "population_size must be >= 2, got {}",
                self.population_size
            )));
        }
        if self.max_iterations < 1 {
            return Err(OptimizerError::InvalidConfig(
                "max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A position together with its fitness, `None` until evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub position: Vec<f64>,
    pub fitness: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub best_fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after each iteration, starting at iteration 1.
    pub history: Vec<HistoryEntry>,
    /// Number of objective evaluations performed.
    pub evaluations: usize,
}

impl OptimizerResult {
    /// True when the recorded best-so-far never decreases.
    pub fn history_is_monotone(&self) -> bool {
        self.history
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness)
    }
}

/// A function to maximize. Must be deterministic in its input.
pub trait Objective: Sync {
    fn evaluate(&self, position: &[f64]) -> f64;

    /// Hint that evaluations are expensive enough to fan out over threads.
    fn is_costly(&self) -> bool {
        false
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, position: &[f64]) -> f64 {
        self(position)
    }
}

fn guarded(value: f64) -> f64 {
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}

/// Evaluates one position; NaN becomes `-inf` so it never wins a comparison.
pub fn evaluate_one(objective: &dyn Objective, position: &[f64]) -> f64 {
    guarded(objective.evaluate(position))
}

/// Evaluates a batch of positions, in parallel for costly objectives.
/// Results are always returned in input order.
pub fn evaluate_batch<P>(objective: &dyn Objective, positions: &[P]) -> Vec<f64>
where
    P: AsRef<[f64]> + Sync,
{
    if objective.is_costly() && positions.len() > 1 {
        positions
            .par_iter()
            .map(|p| evaluate_one(objective, p.as_ref()))
            .collect()
    } else {
        positions
            .iter()
            .map(|p| evaluate_one(objective, p.as_ref()))
            .collect()
    }
}

/// Index of the maximum value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Best-so-far bookkeeping used by every optimizer.
#[derive(Clone, Debug)]
pub struct BestTracker {
    position: Vec<f64>,
    fitness: f64,
    history: Vec<HistoryEntry>,
    evaluations: usize,
}

impl BestTracker {
    pub fn new(dim: usize) -> Self {
        Self {
            position: vec![f64::NAN; dim],
            fitness: f64::NEG_INFINITY,
            history: Vec::new(),
            evaluations: 0,
        }
    }

    /// Offers a candidate; returns true if it strictly improved the best.
    pub fn offer(&mut self, position: &[f64], fitness: f64) -> bool {
        if fitness > self.fitness || self.position.iter().any(|x| x.is_nan()) {
            self.fitness = fitness;
            self.position.clear();
            self.position.extend_from_slice(position);
            true
        } else {
            false
        }
    }

    pub fn count_evaluations(&mut self, n: usize) {
        self.evaluations += n;
    }

    pub fn record(&mut self, iteration: usize) {
        self.history.push(HistoryEntry {
            iteration,
            best_fitness: self.fitness,
        });
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn into_result(self) -> OptimizerResult {
        OptimizerResult {
            best_position: self.position,
            best_fitness: self.fitness,
            history: self.history,
            evaluations: self.evaluations,
        }
    }
}

/// A population-based maximizer.
pub trait Optimizer: Sync {
    fn name(&self) -> &'static str;

    /// Checks the optimizer's own parameters against the run configuration.
    fn validate(&self, _config: &RunConfig) -> Result<(), OptimizerError> {
        Ok(())
    }

    /// Runs exactly `config.max_iterations` iterations. Implementations
    /// draw all randomness from `rng` and clamp every position update.
    fn optimize(
        &self,
        space: &SearchSpace,
        config: &RunConfig,
        objective: &dyn Objective,
        rng: &mut RunRng,
    ) -> OptimizerResult;
}

/// Runs `optimizer` on stream 0 of `config.seed`.
pub fn run(
    optimizer: &dyn Optimizer,
    space: &SearchSpace,
    config: &RunConfig,
    objective: &dyn Objective,
) -> Result<OptimizerResult, OptimizerError> {
    run_stream(optimizer, space, config, objective, 0)
}

/// Runs `optimizer` on stream `run_index` of `config.seed`.
pub fn run_stream(
    optimizer: &dyn Optimizer,
    space: &SearchSpace,
    config: &RunConfig,
    objective: &dyn Objective,
    run_index: u64,
) -> Result<OptimizerResult, OptimizerError> {
    config.validate()?;
    optimizer.validate(config)?;
    let mut rng = seeded_rng(config.seed, run_index);
    let result = optimizer.optimize(space, config, objective, &mut rng);
    debug_assert_eq!(result.history.len(), config.max_iterations);
    debug_assert!(result.history_is_monotone());
    debug_assert!(space.contains(&result.best_position));
    Ok(result)
}
