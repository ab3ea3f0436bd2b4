use serde::{Deserialize, Serialize};

use super::{initial_population, offer_all, standard_normal};
use crate::optimizer::{
    evaluate_batch, BestTracker, Objective, Optimizer, OptimizerError, OptimizerResult, RunConfig,
    RunRng, SearchSpace,
};

/// Clonal selection parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsaParams {
    /// Antibodies selected for cloning; `None` means a fifth of the population.
    pub select_n: Option<usize>,
    /// Clones of the rank-`r` antibody: `round(clone_factor · N / (r + 1))`, at least one.
    pub clone_factor: f64,
    /// Base hypermutation standard deviation as a fraction of the width.
    pub mutation_scale: f64,
}

impl Default for CsaParams {
    fn default() -> Self {
        Self {
            select_n: None,
            clone_factor: 0.1,
            mutation_scale: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Csa {
    pub params: CsaParams,
}

impl Csa {
    pub fn new(params: CsaParams) -> Self {
        Self { params }
    }

    pub fn selected(&self, population: usize) -> usize {
        self.params
            .select_n
            .unwrap_or_else(|| (population as f64 / 5.0).round() as usize)
            .clamp(1, population)
    }

    pub fn clones_for_rank(&self, rank: usize, population: usize) -> usize {
        let c = (self.params.clone_factor * population as f64 / (rank + 1) as f64).round();
        (c as usize).max(1)
    }

    /// Mutation standard deviation for the antibody at `rank` among `selected`.
    ///
    /// Affinity is rank-normalized to `[0, 1]` (best = 1) and the scale is
    /// `mutation_scale · width · exp(−affinity)`, so better antibodies mutate less.
    pub fn mutation_sd(&self, rank: usize, selected: usize, width: f64) -> f64 {
        let affinity = if selected <= 1 {
            1.0
        } else {
            1.0 - rank as f64 / (selected - 1) as f64
        };
        self.params.mutation_scale * width * (-affinity).exp()
    }

    /// One generation. Each selected antibody is replaced by its best clone
    /// only when that clone is strictly better.
    pub fn next_generation(
        &self,
        space: &SearchSpace,
        population: &mut [Vec<f64>],
        fitness: &mut [f64],
        objective: &dyn Objective,
        rng: &mut RunRng,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = population.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let selected = self.selected(n);

        let mut clones = Vec::new();
        let mut family = Vec::new();
        for (rank, &parent) in order.iter().take(selected).enumerate() {
            for _ in 0..self.clones_for_rank(rank, n) {
                let mut c = population[parent].clone();
                for (k, x) in c.iter_mut().enumerate() {
                    *x += standard_normal(rng) * self.mutation_sd(rank, selected, space.width(k));
                }
                space.clamp(&mut c);
                clones.push(c);
                family.push(parent);
            }
        }
        let clone_fitness = evaluate_batch(objective, &clones);

        let mut family_best: Vec<Option<usize>> = vec![None; n];
        for (ci, &parent) in family.iter().enumerate() {
            let current = family_best[parent].map_or(fitness[parent], |b| clone_fitness[b]);
            if clone_fitness[ci] > current {
                family_best[parent] = Some(ci);
            }
        }
        for (parent, winner) in family_best.into_iter().enumerate() {
            if let Some(ci) = winner {
                population[parent] = clones[ci].clone();
                fitness[parent] = clone_fitness[ci];
            }
        }
        (clones, clone_fitness)
    }
}

impl Optimizer for Csa {
    fn name(&self) -> &'static str {
        "csa"
    }

    fn validate(&self, config: &RunConfig) -> Result<(), OptimizerError> {
        let bad = |reason: String| OptimizerError::InvalidParams {
            optimizer: "csa",
            reason,
        };
        if let Some(s) = self.params.select_n {
            if s == 0 || s > config.population_size {
                return Err(bad(format!(
                    "select_n must lie in 1..={}, got {s}",
                    config.population_size
                )));
            }
        }
        if self.params.clone_factor.is_nan() || self.params.clone_factor <= 0.0 {
            return Err(bad("clone_factor must be positive".into()));
        }
        if self.params.mutation_scale.is_nan() || self.params.mutation_scale <= 0.0 {
            return Err(bad("mutation_scale must be positive".into()));
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
            let (clones, clone_fitness) =
                self.next_generation(space, &mut population, &mut fitness, objective, rng);
            best.count_evaluations(clones.len());
            offer_all(&mut best, &clones, &clone_fitness);
            best.record(iteration);
        }
        best.into_result()
    }
}
