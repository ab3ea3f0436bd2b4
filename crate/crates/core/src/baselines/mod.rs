//! Comparison metaheuristics sharing the [`Optimizer`](crate::optimizer::Optimizer)
//! contract: genetic algorithm, differential evolution, clonal selection
//! and particle swarm optimization.
//!
//! All four take their population size from
//! [`RunConfig::population_size`](crate::optimizer::RunConfig) and clamp every
//! new position onto the search space.

mod csa;
mod de;
mod ga;
mod pso;

pub use csa::{Csa, CsaParams};
pub use de::{donor, De, DeParams};
pub use ga::{two_point_crossover, Ga, GaParams};
pub use pso::{velocity_update, Pso, PsoParams};

use rand_distr::{Distribution, StandardNormal};

use crate::optimizer::{evaluate_batch, BestTracker, Objective, RunRng, SearchSpace};

/// Uniform initial population, evaluated and offered to `best`.
pub(crate) fn initial_population(
    space: &SearchSpace,
    n: usize,
    objective: &dyn Objective,
    best: &mut BestTracker,
    rng: &mut RunRng,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let positions: Vec<Vec<f64>> = (0..n).map(|_| space.sample(rng)).collect();
    let fitness = evaluate_batch(objective, &positions);
    best.count_evaluations(n);
    offer_all(best, &positions, &fitness);
    (positions, fitness)
}

pub(crate) fn offer_all(best: &mut BestTracker, positions: &[Vec<f64>], fitness: &[f64]) {
    for (p, f) in positions.iter().zip(fitness) {
        best.offer(p, *f);
    }
}

pub(crate) fn standard_normal(rng: &mut RunRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform index in `0..n`.
pub(crate) fn uniform_index(rng: &mut RunRng, n: usize) -> usize {
    let i = (crate::optimizer::seeded_uniform(rng) * n as f64) as usize;
    i.min(n - 1)
}
