use serde::{Deserialize, Serialize};

use super::{initial_population, offer_all};
use crate::optimizer::{
    evaluate_batch, seeded_uniform, BestTracker, Objective, Optimizer, OptimizerError,
    OptimizerResult, RunConfig, RunRng, SearchSpace,
};

/// Inertia-weight PSO parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of each dimension's width.
    pub v_max: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            v_max: 0.5,
        }
    }
}

/// `w·v + c1·r1·(pbest − x) + c2·r2·(gbest − x)`, clamped to `±v_max`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    v: f64,
    x: f64,
    pbest: f64,
    gbest: f64,
    params: &PsoParams,
    r1: f64,
    r2: f64,
    v_max: f64,
) -> f64 {
    let next =
        params.inertia * v + params.cognitive * r1 * (pbest - x) + params.social * r2 * (gbest - x);
    next.clamp(-v_max, v_max)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Pso {
    pub params: PsoParams,
}

impl Pso {
    pub fn new(params: PsoParams) -> Self {
        Self { params }
    }
}

impl Optimizer for Pso {
    fn name(&self) -> &'static str {
        "pso"
    }

    fn validate(&self, _config: &RunConfig) -> Result<(), OptimizerError> {
        let p = &self.params;
        if [p.inertia, p.cognitive, p.social, p.v_max]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(OptimizerError::InvalidParams {
                optimizer: "pso",
                reason: "inertia, cognitive, social and v_max must be positive".into(),
            });
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
        let (mut positions, fitness) =
            initial_population(space, config.population_size, objective, &mut best, rng);
        let v_max: Vec<f64> = (0..space.dim())
            .map(|k| self.params.v_max * space.width(k))
            .collect();
        let mut velocities = vec![vec![0.0; space.dim()]; positions.len()];
        let mut pbest = positions.clone();
        let mut pbest_fitness = fitness;

        for iteration in 1..=config.max_iterations {
            let gbest = best.position().to_vec();
            for ((x, v), pb) in positions.iter_mut().zip(&mut velocities).zip(&pbest) {
                for k in 0..x.len() {
                    let (r1, r2) = (seeded_uniform(rng), seeded_uniform(rng));
                    v[k] = velocity_update(
                        v[k],
                        x[k],
                        pb[k],
                        gbest[k],
                        &self.params,
                        r1,
                        r2,
                        v_max[k],
                    );
                    x[k] += v[k];
                }
                space.clamp(x);
            }
            let fitness = evaluate_batch(objective, &positions);
            best.count_evaluations(positions.len());
            for i in 0..positions.len() {
                if fitness[i] > pbest_fitness[i] {
                    pbest[i].clone_from(&positions[i]);
                    pbest_fitness[i] = fitness[i];
                }
            }
            offer_all(&mut best, &pbest, &pbest_fitness);
            best.record(iteration);
        }
        best.into_result()
    }
}
