use serde::{Deserialize, Serialize};

use super::{initial_population, offer_all, uniform_index};
use crate::optimizer::{
    evaluate_batch, seeded_uniform, BestTracker, Objective, Optimizer, OptimizerError,
    OptimizerResult, RunConfig, RunRng, SearchSpace,
};

/// DE/rand/1/bin parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeParams {
    /// Differential weight `F`.
    pub differential_weight: f64,
    /// Binomial crossover probability `CR`.
    pub crossover_prob: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            differential_weight: 0.5,
            crossover_prob: 0.9,
        }
    }
}

/// Donor vector `x_r1 + F·(x_r2 − x_r3)`.
pub fn donor(x1: &[f64], x2: &[f64], x3: &[f64], weight: f64) -> Vec<f64> {
    x1.iter()
        .zip(x2.iter().zip(x3))
        .map(|(a, (b, c))| a + weight * (b - c))
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct De {
    pub params: DeParams,
}

impl De {
    pub fn new(params: DeParams) -> Self {
        Self { params }
    }

    /// Three mutually distinct indices, all different from `target`.
    fn pick_three(n: usize, target: usize, rng: &mut RunRng) -> [usize; 3] {
        let mut picked = [usize::MAX; 3];
        let mut k = 0;
        while k < 3 {
            let c = uniform_index(rng, n);
            if c != target && !picked[..k].contains(&c) {
                picked[k] = c;
                k += 1;
            }
        }
        picked
    }

    fn trial(
        &self,
        space: &SearchSpace,
        population: &[Vec<f64>],
        target: usize,
        rng: &mut RunRng,
    ) -> Vec<f64> {
        let [r1, r2, r3] = Self::pick_three(population.len(), target, rng);
        let v = donor(
            &population[r1],
            &population[r2],
            &population[r3],
            self.params.differential_weight,
        );
        let x = &population[target];
        let forced = uniform_index(rng, x.len());
        let mut trial: Vec<f64> = (0..x.len())
            .map(|k| {
                if k == forced || seeded_uniform(rng) < self.params.crossover_prob {
                    v[k]
                } else {
                    x[k]
                }
            })
            .collect();
        space.clamp(&mut trial);
        trial
    }
}

impl Optimizer for De {
    fn name(&self) -> &'static str {
        "de"
    }

    fn validate(&self, config: &RunConfig) -> Result<(), OptimizerError> {
        let bad = |reason: String| OptimizerError::InvalidParams {
            optimizer: "de",
            reason,
        };
        let f = self.params.differential_weight;
        if !(f > 0.0 && f <= 2.0) {
            return Err(bad(format!(
                "differential weight must lie in (0, 2], got {f}"
            )));
        }
        if !(0.0..=1.0).contains(&self.params.crossover_prob) {
            return Err(bad("crossover probability must lie in [0, 1]".into()));
        }
        if config.population_size < 4 {
            return Err(bad(format!(
                "population must be >= 4, got {}",
                config.population_size
            )));
        }
        Ok(())
    }

    fn optimize(
        &self,
        space: &SearchSpace,
        config: &RunConfig,
        objective: &dyn Objective,
        rng: &mut RunRng,
    ) -> OptimizerResult {
        let mut best = BestTracker::new(space.dim());
        let (mut population, mut fitness) =
            initial_population(space, config.population_size, objective, &mut best, rng);
        for iteration in 1..=config.max_iterations {
            let trials: Vec<Vec<f64>> = (0..population.len())
                .map(|i| self.trial(space, &population, i, rng))
                .collect();
            let trial_fitness = evaluate_batch(objective, &trials);
            best.count_evaluations(trials.len());
            offer_all(&mut best, &trials, &trial_fitness);
            for (i, (t, f)) in trials.into_iter().zip(trial_fitness).enumerate() {
                if f >= fitness[i] {
                    population[i] = t;
                    fitness[i] = f;
                }
            }
            best.record(iteration);
        }
        best.into_result()
    }
}
