//! Cognitive Development Optimization Algorithm.
//!
//! Each particle carries a position, an interactivity rate `ir` (the step
//! scale of its pull toward the global best) and a signed experience counter
//! `ex`. One iteration runs the phases in this order:
//!
//! 1. socialization: at-or-below-average particles lose experience and grow
//!    their `ir`; the rest gain experience,
//! 2. `ir` decay of every particle,
//! 3. every particle except the current best moves toward the global best,
//! 4. fitness refresh, then the best particle's `ir` grows and its `ex` rises,
//! 5. maturation: particles with `ex <= ml` grow their `ir`; best renewed again,
//! 6. rationalizing: inexperienced particles (`ex < 0`) rescale `ir` against
//!    the best's `ir` and move; the others rescale `ir` `r` times,
//! 7. balancing: `ir` decay of every particle, fitness refresh, best renewed.
//!
//! The objective is maximized. The published rules are phrased for
//! minimization, so "bad" particles in socialization are those whose fitness
//! is at or below the population average.
//!
//! The update rules reduce to four formulas, implemented
//! once each: [`grow_ir`], [`decay_ir`], [`rescale_ir`] and [`pull_toward`].
//! After every update `ir` is clamped to `[ir_min, ir_max]`.

use serde::{Deserialize, Serialize};

use crate::optimizer::{
    argmax, evaluate_batch, seeded_uniform, BestTracker, Objective, Optimizer, OptimizerError,
    OptimizerResult, RunConfig, RunRng, SearchSpace,
};

/// Divisor floor for the `best_ir / ir` ratio.
pub const RATIO_DIVISOR_FLOOR: f64 = 1e-6;

/// `ir + u·ir`: the renewal used for the best particle and by socialization
/// and maturation.
#[inline]
pub fn grow_ir(ir: f64, u: f64) -> f64 {
    ir + u * ir
}

/// `u·ir`: the decay applied to every particle in steps 2 and 7.
#[inline]
pub fn decay_ir(ir: f64, u: f64) -> f64 {
    u * ir
}

/// `ir + u·(best_ir / ir)`: the rationalizing renewal.
#[inline]
pub fn rescale_ir(ir: f64, best_ir: f64, u: f64) -> f64 {
    ir + u * (best_ir / ir.max(RATIO_DIVISOR_FLOOR))
}

/// `pos + u·(ir·(gbest − pos))`: the move toward the global best.
#[inline]
pub fn pull_toward(position: f64, global_best: f64, ir: f64, u: f64) -> f64 {
    position + u * (ir * (global_best - position))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoDoaParams {
    /// Starting interactivity rate of every particle.
    pub initial_ir: f64,
    /// Number of consecutive `ir` rescalings for experienced particles.
    pub rationality_rate: usize,
    /// Experience at or below which maturation renews `ir`.
    pub maturity_limit: i64,
    pub ir_max: f64,
    pub ir_min: f64,
}

impl Default for CoDoaParams {
    fn default() -> Self {
        Self {
            initial_ir: 0.5,
            rationality_rate: 2,
            maturity_limit: 3,
            ir_max: 10.0,
            ir_min: 1e-6,
        }
    }
}

impl CoDoaParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |reason: String| OptimizerError::InvalidParams {
            optimizer: "codoa",
            reason,
        };
        if self.ir_min.is_nan()
            || self.ir_min < 0.0
            || !self.ir_max.is_finite()
            || self.ir_min > self.ir_max
        {
            return Err(bad(format!(
                "need 0 <= ir_min <= ir_max, got [{}, {}]",
                self.ir_min, self.ir_max
            )));
        }
        if !(self.initial_ir > 0.0 && self.initial_ir <= self.ir_max) {
            return Err(bad(format!(
                "need 0 < initial_ir <= ir_max, got {}",
                self.initial_ir
            )));
        }
        if self.rationality_rate < 1 {
            return Err(bad("rationality_rate must be >= 1".into()));
        }
        Ok(())
    }

    #[inline]
    fn clamp_ir(&self, ir: f64) -> f64 {
        ir.clamp(self.ir_min, self.ir_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoDoaParticle {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub ir: f64,
    pub ex: i64,
    /// Position changed since the last fitness evaluation.
    #[serde(skip)]
    pub stale: bool,
}

/// Everything a phase needs besides the swarm and the RNG.
#[derive(Clone, Copy)]
pub struct CoDoaContext<'a> {
    pub params: &'a CoDoaParams,
    pub space: &'a SearchSpace,
    pub objective: &'a dyn Objective,
}

/// Called at the end of balancing. The default does nothing.
pub type BalancingHook = fn(&mut CoDoaState);

fn no_hook(_: &mut CoDoaState) {}

#[derive(Clone, Debug)]
pub struct CoDoaState {
    pub particles: Vec<CoDoaParticle>,
    /// Completed iterations.
    pub iteration: usize,
    best: BestTracker,
}

impl CoDoaState {
    /// Spreads particles uniformly, evaluates them and renews the best.
    pub fn initialize(ctx: &CoDoaContext<'_>, n_particles: usize, rng: &mut RunRng) -> Self {
        let positions: Vec<Vec<f64>> = (0..n_particles).map(|_| ctx.space.sample(rng)).collect();
        let fitness = evaluate_batch(ctx.objective, &positions);
        let particles = positions
            .into_iter()
            .zip(fitness)
            .map(|(position, fitness)| CoDoaParticle {
                position,
                fitness,
                ir: ctx.params.initial_ir,
                ex: 0,
                stale: false,
            })
            .collect();
        let mut state = Self {
            particles,
            iteration: 0,
            best: BestTracker::new(ctx.space.dim()),
        };
        state.best.count_evaluations(n_particles);
        state.offer_all();
        state.renew_best(ctx.params, rng);
        state
    }

    /// Position and fitness of the best particle ever seen.
    pub fn global_best(&self) -> (&[f64], f64) {
        (self.best.position(), self.best.fitness())
    }

    /// Index of the current best particle (lowest index on ties).
    pub fn best_index(&self) -> usize {
        let fitness: Vec<f64> = self.particles.iter().map(|p| p.fitness).collect();
        argmax(&fitness)
    }

    pub fn average_fitness(&self) -> f64 {
        self.particles.iter().map(|p| p.fitness).sum::<f64>() / self.particles.len() as f64
    }

    pub fn evaluations(&self) -> usize {
        self.best.evaluations()
    }

    fn offer_all(&mut self) {
        for p in &self.particles {
            self.best.offer(&p.position, p.fitness);
        }
    }

    /// Re-evaluates particles whose position changed and updates the global best.
    fn calculate_fitness(&mut self, ctx: &CoDoaContext<'_>) {
        let stale: Vec<usize> = (0..self.particles.len())
            .filter(|&i| self.particles[i].stale)
            .collect();
        if stale.is_empty() {
            return;
        }
        let positions: Vec<&[f64]> = stale
            .iter()
            .map(|&i| self.particles[i].position.as_slice())
            .collect();
        let fitness = evaluate_batch(ctx.objective, &positions);
        for (&i, f) in stale.iter().zip(fitness) {
            let p = &mut self.particles[i];
            p.fitness = f;
            p.stale = false;
        }
        self.best.count_evaluations(stale.len());
        self.offer_all();
    }

    /// Grows the current best particle's `ir` and increments its `ex`.
    fn renew_best(&mut self, params: &CoDoaParams, rng: &mut RunRng) -> usize {
        let b = self.best_index();
        let u = seeded_uniform(rng);
        let p = &mut self.particles[b];
        p.ir = params.clamp_ir(grow_ir(p.ir, u));
        p.ex += 1;
        b
    }

    /// Moves particle `i` toward the global best and marks it stale if it moved.
    fn pull(&mut self, i: usize, space: &SearchSpace, rng: &mut RunRng) {
        let u = seeded_uniform(rng);
        let gbest = self.best.position().to_vec();
        let p = &mut self.particles[i];
        let old = p.position.clone();
        for (x, g) in p.position.iter_mut().zip(&gbest) {
            *x = pull_toward(*x, *g, p.ir, u);
        }
        space.clamp(&mut p.position);
        if p.position != old {
            p.stale = true;
        }
    }

    /// Step 1: experience and `ir` update relative to the average fitness.
    pub fn socialization(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) {
        let average = self.average_fitness();
        for p in &mut self.particles {
            if p.fitness <= average {
                p.ex -= 1;
                let u = seeded_uniform(rng);
                p.ir = ctx.params.clamp_ir(grow_ir(p.ir, u));
            } else {
                p.ex += 1;
            }
        }
        self.check(ctx.params);
    }

    /// Step 2: every `ir` multiplied by a fresh uniform draw.
    pub fn ir_decay_all(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) {
        for p in &mut self.particles {
            let u = seeded_uniform(rng);
            p.ir = ctx.params.clamp_ir(decay_ir(p.ir, u));
        }
        self.check(ctx.params);
    }

    /// Step 3: every particle but the current best moves toward the global best.
    pub fn move_particles(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) {
        let b = self.best_index();
        for i in 0..self.particles.len() {
            if i != b {
                self.pull(i, ctx.space, rng);
            }
        }
        self.check(ctx.params);
    }

    /// Step 4: fitness refresh and best renewal. Returns the renewed index.
    pub fn refresh_best(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) -> usize {
        self.calculate_fitness(ctx);
        let b = self.renew_best(ctx.params, rng);
        self.check(ctx.params);
        b
    }

    /// Step 5: particles with `ex <= maturity_limit` grow their `ir`, then
    /// the best is renewed. Returns the renewed index.
    pub fn maturation(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) -> usize {
        let ml = ctx.params.maturity_limit;
        for p in &mut self.particles {
            if p.ex <= ml {
                let u = seeded_uniform(rng);
                p.ir = ctx.params.clamp_ir(grow_ir(p.ir, u));
            }
        }
        self.calculate_fitness(ctx);
        let b = self.renew_best(ctx.params, rng);
        self.check(ctx.params);
        b
    }

    /// Step 6: particles with `ex < 0` rescale `ir` once and then move with
    /// the renewed rate; the rest rescale `ir` `rationality_rate` times.
    pub fn rationalizing(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng) {
        let best_ir = self.particles[self.best_index()].ir;
        for i in 0..self.particles.len() {
            if self.particles[i].ex < 0 {
                let u = seeded_uniform(rng);
                let p = &mut self.particles[i];
                p.ir = ctx.params.clamp_ir(rescale_ir(p.ir, best_ir, u));
                self.pull(i, ctx.space, rng);
            } else {
                for _ in 0..ctx.params.rationality_rate {
                    let u = seeded_uniform(rng);
                    let p = &mut self.particles[i];
                    p.ir = ctx.params.clamp_ir(rescale_ir(p.ir, best_ir, u));
                }
            }
        }
        self.check(ctx.params);
    }

    /// Step 7: `ir` decay, fitness refresh, best renewal, then `hook`.
    /// Closes the iteration. Returns the renewed index.
    pub fn balancing(
        &mut self,
        ctx: &CoDoaContext<'_>,
        rng: &mut RunRng,
        hook: BalancingHook,
    ) -> usize {
        self.ir_decay_all(ctx, rng);
        let b = self.refresh_best(ctx, rng);
        hook(self);
        self.iteration += 1;
        self.best.record(self.iteration);
        b
    }

    /// One full iteration of the seven phases.
    pub fn step(&mut self, ctx: &CoDoaContext<'_>, rng: &mut RunRng, hook: BalancingHook) {
        self.socialization(ctx, rng);
        self.ir_decay_all(ctx, rng);
        self.move_particles(ctx, rng);
        self.refresh_best(ctx, rng);
        self.maturation(ctx, rng);
        self.rationalizing(ctx, rng);
        self.balancing(ctx, rng, hook);
    }

    fn check(&self, params: &CoDoaParams) {
        debug_assert!(self.particles.iter().all(|p| {
            p.ir.is_finite()
                && p.ir >= params.ir_min
                && p.ir <= params.ir_max
                && p.position.iter().all(|x| x.is_finite())
                && !p.fitness.is_nan()
        }));
    }

    pub fn into_result(self) -> OptimizerResult {
        self.best.into_result()
    }
}

/// CoDOA as an [`Optimizer`].
#[derive(Clone, Copy, Debug)]
pub struct CoDoa {
    pub params: CoDoaParams,
    pub hook: BalancingHook,
}

impl CoDoa {
    pub fn new(params: CoDoaParams) -> Self {
        Self {
            params,
            hook: no_hook,
        }
    }
}

impl Default for CoDoa {
    fn default() -> Self {
        Self::new(CoDoaParams::default())
    }
}

impl Optimizer for CoDoa {
    fn name(&self) -> &'static str {
        "codoa"
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
        let ctx = CoDoaContext {
            params: &self.params,
            space,
            objective,
        };
        let mut state = CoDoaState::initialize(&ctx, config.population_size, rng);
        for _ in 0..config.max_iterations {
            state.step(&ctx, rng, self.hook);
        }
        state.into_result()
    }
}
