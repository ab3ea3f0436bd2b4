use serde::{Deserialize, Serialize};

use super::{initial_population, offer_all, standard_normal, uniform_index};
use crate::optimizer::{
    argmax, evaluate_batch, seeded_uniform, BestTracker, Objective, Optimizer, OptimizerError,
    OptimizerResult, RunConfig, RunRng, SearchSpace,
};

/// Real-coded genetic algorithm with tournament selection, two-point
/// crossover, Gaussian mutation and an elite of one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub tournament_size: usize,
    /// Mutation standard deviation as a fraction of each dimension's width.
    pub mutation_scale: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            tournament_size: 3,
            mutation_scale: 0.1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: &str| OptimizerError::InvalidParams {
            optimizer: "ga",
            reason: reason.to_string(),
        };
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return Err(bad("crossover_rate and mutation_rate must lie in [0, 1]"));
        }
        if self.tournament_size < 2 {
            return Err(bad("tournament_size must be >= 2"));
        }
        if !(self.mutation_scale.is_finite() && self.mutation_scale > 0.0) {
            return Err(bad("mutation_scale must be positive"));
        }
        Ok(())
    }
}

/// Swaps the genes in a random segment `[lo, hi)` between two parents.
///
/// At dimension 1 the only segment is the whole genome, so the children are
/// the parents exchanged.
pub fn two_point_crossover(a: &[f64], b: &[f64], rng: &mut RunRng) -> (Vec<f64>, Vec<f64>) {
    let d = a.len();
    let (i, j) = (uniform_index(rng, d), uniform_index(rng, d));
    let (lo, hi) = (i.min(j), i.max(j) + 1);
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    c1[lo..hi].copy_from_slice(&b[lo..hi]);
    c2[lo..hi].copy_from_slice(&a[lo..hi]);
    (c1, c2)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Ga {
    pub params: GaParams,
}

impl Ga {
    pub fn new(params: GaParams) -> Self {
        Self { params }
    }

    fn tournament(&self, fitness: &[f64], rng: &mut RunRng) -> usize {
        let mut winner = uniform_index(rng, fitness.len());
        for _ in 1..self.params.tournament_size {
            let c = uniform_index(rng, fitness.len());
            if fitness[c] > fitness[winner] {
                winner = c;
            }
        }
        winner
    }

    fn mutate(&self, genome: &mut [f64], space: &SearchSpace, rng: &mut RunRng) {
        for (k, g) in genome.iter_mut().enumerate() {
            if seeded_uniform(rng) < self.params.mutation_rate {
                *g += standard_normal(rng) * self.params.mutation_scale * space.width(k);
            }
        }
        space.clamp(genome);
    }

    /// Breeds and evaluates one generation. Slot 0 holds the elite.
    pub fn next_generation(
        &self,
        space: &SearchSpace,
        population: &[Vec<f64>],
        fitness: &[f64],
        objective: &dyn Objective,
        rng: &mut RunRng,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = population.len();
        let elite = argmax(fitness);
        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
        while offspring.len() < n - 1 {
            let a = &population[self.tournament(fitness, rng)];
            let b = &population[self.tournament(fitness, rng)];
            let (mut c1, mut c2) = if seeded_uniform(rng) < self.params.crossover_rate {
                two_point_crossover(a, b, rng)
            } else {
                (a.clone(), b.clone())
            };
            self.mutate(&mut c1, space, rng);
            self.mutate(&mut c2, space, rng);
            offspring.push(c1);
            if offspring.len() < n - 1 {
                offspring.push(c2);
            }
        }
        let offspring_fitness = evaluate_batch(objective, &offspring);
        let mut next = Vec::with_capacity(n);
        next.push(population[elite].clone());
        next.extend(offspring);
        let mut next_fitness = Vec::with_capacity(n);
        next_fitness.push(fitness[elite]);
        next_fitness.extend(offspring_fitness);
        (next, next_fitness)
    }
}

impl Optimizer for Ga {
    fn name(&self) -> &'static str {
        "ga"
    }

    fn validate(&self, _config: &RunConfig) -> Result<(), OptimizerError> {
        self.params.validate()
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
            let (p, f) = self.next_generation(space, &population, &fitness, objective, rng);
            best.count_evaluations(p.len() - 1);
            offer_all(&mut best, &p, &f);
            population = p;
            fitness = f;
            best.record(iteration);
        }
        best.into_result()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::seeded_rng;

    #[test]
    fn crossover_at_dim_one_exchanges_parents() {
        let mut rng = seeded_rng(1, 0);
        for _ in 0..20 {
            let (c1, c2) = two_point_crossover(&[1.0], &[2.0], &mut rng);
            assert!(c1 == vec![1.0] || c1 == vec![2.0]);
            assert!(c2 == vec![1.0] || c2 == vec![2.0]);
        }
    }

    #[test]
    fn crossover_conserves_genes_per_locus() {
        let mut rng = seeded_rng(2, 0);
        let a = [0.0, 1.0, 2.0, 3.0, 4.0];
        let b = [10.0, 11.0, 12.0, 13.0, 14.0];
        for _ in 0..50 {
            let (c1, c2) = two_point_crossover(&a, &b, &mut rng);
            for k in 0..5 {
                let mut got = [c1[k], c2[k]];
                got.sort_by(f64::total_cmp);
                assert_eq!(got, [a[k], b[k]]);
            }
        }
    }

    #[test]
    fn selection_only_never_creates_new_fitness_values() {
        let ga = Ga::new(GaParams {
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            ..GaParams::default()
        });
        let space = SearchSpace::interval(0.0, 10.0).unwrap();
        let f = |x: &[f64]| -(x[0] - 3.0).powi(2);
        let mut rng = seeded_rng(4, 0);
        let mut pop: Vec<Vec<f64>> = (0..12).map(|_| space.sample(&mut rng)).collect();
        let mut fit: Vec<f64> = pop.iter().map(|p| f(p)).collect();
        for _ in 0..30 {
            let max_before = fit.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (p, nf) = ga.next_generation(&space, &pop, &fit, &f, &mut rng);
            for v in &nf {
                assert!(fit.contains(v));
            }
            let max_after = nf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(max_after >= max_before);
            pop = p;
            fit = nf;
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let p = GaParams {
            tournament_size: 1,
            ..GaParams::default()
        };
        assert!(p.validate().is_err());
        let p = GaParams {
            crossover_rate: 1.5,
            ..GaParams::default()
        };
        assert!(p.validate().is_err());
    }
}
