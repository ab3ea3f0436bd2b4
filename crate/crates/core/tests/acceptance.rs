//! Acceptance gate. Runs every criterion, prints one line per criterion and
//! exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use codoa_svm::baselines::{Csa, De, Ga, Pso};
use codoa_svm::codoa::{
    decay_ir, grow_ir, pull_toward, rescale_ir, CoDoaContext, CoDoaParams, CoDoaState,
};
use codoa_svm::dataset::{
    load_file, load_manifest_split, prepare, ColumnStats, DatasetManifest, RawTable,
};
use codoa_svm::fitness::{accuracy, format_percent, DiagnosisCounts, SvmObjective};
use codoa_svm::harness::{records_csv, run_experiment, ExperimentConfig, ExperimentOutcome};
use codoa_svm::optimizer::{run, seeded_rng, seeded_uniform, RunRng};
use codoa_svm::svm::{KernelFamily, KernelSpec, MulticlassSvm, TrainParams, TrainedSvm};
use codoa_svm::{CoDoa, Optimizer, RunConfig, SearchSpace};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

fn accuracy_display() -> Check {
    let shown = |td, fd| DiagnosisCounts::new(td, fd).display().unwrap();
    let cases = [
        ((939, 33), "96.60"),
        ((91, 14), "86.67"),
        ((49, 6), "89.09"),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for ((td, fd), want) in cases {
        let got = shown(td, fd);
        let via_float = format_percent(accuracy(DiagnosisCounts::new(td, fd)).unwrap());
        ok &= got == want && via_float == want;
        detail.push(format!("{td}/{fd}={got}"));
    }
    ensure(
        ok,
        format!(
            "{} (49/55 = 89.0909.. rounds half-up to 89.09)",
            detail.join(" ")
        ),
    )
}

// ---------------------------------------------------------------- 2

fn random_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
}

fn kernel_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let unit = KernelSpec::rbf(1.0).unwrap();
    let half = unit.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
    if (half - (-0.5f64).exp()).abs() > 1e-12 {
        return Err(format!("K((0,0),(1,0)) = {half}"));
    }
    for _ in 0..100 {
        let x = random_vec(&mut rng, 5, 10.0);
        let sigma = rng.random_range(0.01..50.0);
        let k = KernelSpec::rbf(sigma).unwrap().eval(&x, &x).unwrap();
        if k != 1.0 {
            return Err(format!("K(x,x) = {k} at sigma {sigma}"));
        }
    }

    let families = [
        KernelSpec::Linear,
        KernelSpec::polynomial(3).unwrap(),
        KernelSpec::rbf(0.7).unwrap(),
    ];
    for k in families {
        for _ in 0..1000 {
            let dim = rng.random_range(1..8);
            let x = random_vec(&mut rng, dim, 3.0);
            let y = random_vec(&mut rng, dim, 3.0);
            let (a, b) = (k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
            if a != b {
                return Err(format!("{k:?} asymmetric: {a} vs {b}"));
            }
        }
    }

    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let sigma = rng.random_range(0.05..5.0);
        let k = KernelSpec::rbf(sigma).unwrap();
        let pts: Vec<Vec<f64>> = (0..20).map(|_| random_vec(&mut rng, 3, 2.0)).collect();
        let gram = DMatrix::from_fn(20, 20, |i, j| k.eval(&pts[i], &pts[j]).unwrap());
        let min = SymmetricEigen::new(gram).eigenvalues.min();
        worst = worst.min(min);
    }
    ensure(
        worst >= -1e-8,
        format!("K(x,x)=1, e^-0.5 exact to 1e-12, 3000 symmetric pairs, min Gram eigenvalue {worst:.3e}"),
    )
}

// ---------------------------------------------------------------- 3

fn separable_problem(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<i8>, f64) {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let d = rng.random_range(2.5..5.0);
    let centre = [d * angle.cos(), d * angle.sin()];
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..8 {
        let r = rng.random_range(0.0..1.0f64).sqrt();
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let (cx, cy, label) = if i % 2 == 0 {
            (0.0, 0.0, -1)
        } else {
            (centre[0], centre[1], 1)
        };
        x.push(vec![cx + r * t.cos(), cy + r * t.sin()]);
        y.push(label);
    }
    let mut gap = f64::INFINITY;
    for i in 0..8 {
        for j in 0..8 {
            if y[i] != y[j] {
                let dx = x[i][0] - x[j][0];
                let dy = x[i][1] - x[j][1];
                gap = gap.min((dx * dx + dy * dy).sqrt());
            }
        }
    }
    (x, y, gap)
}

fn feasibility(m: &TrainedSvm, c: f64) -> Result<(), String> {
    let sum: f64 = m.dual_coefs.iter().sum();
    if sum.abs() >= 1e-6 {
        return Err(format!("sum alpha*y = {sum:e}"));
    }
    if let Some(a) = m.alphas().into_iter().find(|&a| !(0.0..=c).contains(&a)) {
        return Err(format!("alpha {a} outside [0, {c}]"));
    }
    Ok(())
}

fn dual_objective(alpha: &[f64], y: &[f64], gram: &[Vec<f64>]) -> f64 {
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn random_feasible(rng: &mut ChaCha8Rng, y: &[f64], c: f64) -> Vec<f64> {
    let mut a: Vec<f64> = y.iter().map(|_| rng.random_range(0.0..=c)).collect();
    let pos: f64 = a
        .iter()
        .zip(y)
        .filter(|(_, &l)| l > 0.0)
        .map(|(v, _)| v)
        .sum();
    let neg: f64 = a
        .iter()
        .zip(y)
        .filter(|(_, &l)| l < 0.0)
        .map(|(v, _)| v)
        .sum();
    let (shrink, ratio) = if pos > neg {
        (1.0, neg / pos)
    } else {
        (-1.0, pos / neg)
    };
    for (v, &l) in a.iter_mut().zip(y) {
        if l == shrink {
            *v *= ratio;
        }
    }
    a
}

fn svm_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = 1e3;
    let params = TrainParams::with_c(c);
    for p in 0..200 {
        let (x, y, gap) = separable_problem(&mut rng);
        let kernel = KernelSpec::rbf(gap / 2.0).unwrap();
        let m = TrainedSvm::train(&x, &y, kernel, &params).map_err(|e| e.to_string())?;
        feasibility(&m, c).map_err(|e| format!("problem {p}: {e}"))?;
        for (xi, &yi) in x.iter().zip(&y) {
            if m.predict(xi).unwrap().label != yi {
                return Err(format!("problem {p}: training point misclassified"));
            }
        }
    }

    let c = 1.0;
    let params = TrainParams::with_c(c);
    let kernel = KernelSpec::rbf(0.5).unwrap();
    let mut margin = f64::INFINITY;
    for p in 0..20 {
        let x: Vec<Vec<f64>> = (0..6).map(|_| random_vec(&mut rng, 2, 1.0)).collect();
        let mut y: Vec<i8> = vec![1, 1, 1, -1, -1, -1];
        for i in (1..6).rev() {
            y.swap(i, rng.random_range(0..=i));
        }
        let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let m = TrainedSvm::train(&x, &y, kernel, &params).map_err(|e| e.to_string())?;
        feasibility(&m, c).map_err(|e| format!("dual problem {p}: {e}"))?;
        let gram: Vec<Vec<f64>> = x
            .iter()
            .map(|a| x.iter().map(|b| kernel.eval(a, b).unwrap()).collect())
            .collect();
        let mut alpha = vec![0.0; 6];
        for (sv, coef) in m.support_vectors.iter().zip(&m.dual_coefs) {
            let i = x.iter().position(|r| r == sv).unwrap();
            alpha[i] = coef.abs();
        }
        let trained = dual_objective(&alpha, &yf, &gram);
        for _ in 0..1000 {
            let r = random_feasible(&mut rng, &yf, c);
            let w = dual_objective(&r, &yf, &gram);
            if w > trained {
                return Err(format!(
                    "dual problem {p}: random point {w} beats trained {trained}"
                ));
            }
            margin = margin.min(trained - w);
        }
    }
    Ok(format!(
        "200/200 separable problems fit, all duals feasible, 20x1000 random duals beaten (min margin {margin:.3e})"
    ))
}

// ---------------------------------------------------------------- 4

fn optimizer_oracle() -> Check {
    let space = SearchSpace::interval(0.0, 10.0).unwrap();
    let f = |x: &[f64]| -(x[0] - 3.0).powi(2);
    let optimizers: Vec<(&str, Box<dyn Optimizer>, usize)> = vec![
        ("codoa", Box::new(CoDoa::default()), 45),
        ("ga", Box::new(Ga::default()), 40),
        ("de", Box::new(De::default()), 40),
        ("csa", Box::new(Csa::default()), 40),
        ("pso", Box::new(Pso::default()), 40),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, opt, need) in &optimizers {
        let mut hits = 0;
        let mut monotone = 0;
        for seed in 0..50 {
            let r = run(opt.as_ref(), &space, &RunConfig::new(30, 1000, seed), &f).unwrap();
            hits += usize::from((r.best_position[0] - 3.0).abs() < 1e-2);
            monotone += usize::from(r.history_is_monotone());
        }
        ok &= hits >= *need && monotone == 50;
        detail.push(format!(
            "{name} {hits}/50 (need {need}) monotone {monotone}/50"
        ));
    }
    ensure(ok, detail.join(", "))
}

// ---------------------------------------------------------------- 5, 6

fn desk_config(manifest: &Path) -> ExperimentConfig {
    ExperimentConfig {
        dataset: manifest.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn hepatitis_desk() -> &'static Result<ExperimentOutcome, String> {
    static OUTCOME: OnceLock<Result<ExperimentOutcome, String>> = OnceLock::new();
    OUTCOME.get_or_init(|| {
        run_experiment(&desk_config(&data_dir().join("hepatitis/hepatitis.toml")))
            .map_err(|e| e.to_string())
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn grid_equivalence() -> Check {
    let outcome = hepatitis_desk().as_ref().map_err(Clone::clone)?;
    let config = &outcome.report.config;
    let best = outcome
        .report
        .records
        .iter()
        .filter(|r| r.train_fitness.is_some())
        .fold(
            None,
            |acc: Option<&codoa_svm::harness::RunRecord>, r| match acc {
                Some(a) if a.train_fitness >= r.train_fitness => Some(a),
                _ => Some(r),
            },
        )
        .ok_or("no completed run")?;
    let codoa_acc = best.accuracy.ok_or("best run has no accuracy")?;

    let split =
        load_manifest_split(&config.dataset, config.split_seed).map_err(|e| e.to_string())?;
    let params = TrainParams::with_c(config.c);
    let objective = SvmObjective::cross_validated(
        &split.train,
        KernelFamily::Rbf,
        params,
        config.folds,
        config.seed,
    )
    .map_err(|e| e.to_string())?;
    let mut grid_sigma = 0.0;
    let mut grid_fitness = f64::NEG_INFINITY;
    for sigma in log_grid(config.sigma_min, config.sigma_max, 200) {
        let f = objective.evaluate_sigma(sigma).map_err(|e| e.to_string())?;
        if f > grid_fitness {
            grid_fitness = f;
            grid_sigma = sigma;
        }
    }
    let model = MulticlassSvm::train(
        &split.train.features,
        &split.train.labels,
        &split.train.class_names,
        KernelSpec::rbf(grid_sigma).unwrap(),
        &params,
    )
    .map_err(|e| e.to_string())?;
    let grid_acc =
        codoa_svm::fitness::evaluate_model(&model, &split.test.features, &split.test.labels)
            .map_err(|e| e.to_string())?
            .accuracy()
            .map_err(|e| e.to_string())?;
    let diff = (codoa_acc - grid_acc).abs();
    ensure(
        diff <= 1.0,
        format!(
            "codoa best run: sigma {:.4} fitness {:.2} test {:.2}; grid: sigma {grid_sigma:.4} fitness {grid_fitness:.2} test {grid_acc:.2}; |diff| {diff:.2} (limit 1.00)",
            best.best_sigma.unwrap_or(f64::NAN),
            best.train_fitness.unwrap_or(f64::NAN),
            codoa_acc,
        ),
    )
}

fn band(name: &str, manifest: &str, floor: f64) -> Result<String, String> {
    let mean = if name == "hepatitis" {
        hepatitis_desk()
            .as_ref()
            .map(|o| o.report.mean_accuracy)
            .map_err(Clone::clone)
    } else {
        run_experiment(&desk_config(&data_dir().join(manifest)))
            .map(|o| o.report.mean_accuracy)
            .map_err(|e| e.to_string())
    };
    match mean {
        Ok(acc) => {
            let line = format!("{name} {} (need >= {floor:.0})", format_percent(acc));
            if acc >= floor {
                Ok(line)
            } else {
                Err(line)
            }
        }
        Err(e) => Err(format!("{name} unavailable: {e}")),
    }
}

fn reproduction_bands() -> Check {
    let results = [
        band("thyroid", "thyroid/thyroid.toml", 92.0),
        band("hepatitis", "hepatitis/hepatitis.toml", 80.0),
        band("ckd", "ckd/ckd.toml", 80.0),
    ];
    let ok = results.iter().all(Result::is_ok);
    let text: Vec<String> = results
        .into_iter()
        .map(|r| r.unwrap_or_else(|e| e))
        .collect();
    ensure(ok, text.join("; "))
}

// ---------------------------------------------------------------- 7

fn multimodal(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| -(v * v) + 10.0 * (2.0 * std::f64::consts::PI * v).cos())
        .sum()
}

fn no_hook(_: &mut CoDoaState) {}

fn replay_socialization(s: &CoDoaState, p: &CoDoaParams, rng: &mut RunRng) -> CoDoaState {
    let mut e = s.clone();
    let avg = s.average_fitness();
    for q in &mut e.particles {
        if q.fitness <= avg {
            q.ex -= 1;
            q.ir = grow_ir(q.ir, seeded_uniform(rng)).clamp(p.ir_min, p.ir_max);
        } else {
            q.ex += 1;
        }
    }
    e
}

fn replay_decay(s: &CoDoaState, p: &CoDoaParams, rng: &mut RunRng) -> Vec<f64> {
    s.particles
        .iter()
        .map(|q| decay_ir(q.ir, seeded_uniform(rng)).clamp(p.ir_min, p.ir_max))
        .collect()
}

fn replay_pull(pos: &[f64], g: &[f64], ir: f64, space: &SearchSpace, rng: &mut RunRng) -> Vec<f64> {
    let u = seeded_uniform(rng);
    let mut out: Vec<f64> = pos
        .iter()
        .zip(g)
        .map(|(&x, &b)| pull_toward(x, b, ir, u))
        .collect();
    space.clamp(&mut out);
    out
}

fn replay_rationalizing(
    s: &CoDoaState,
    p: &CoDoaParams,
    space: &SearchSpace,
    rng: &mut RunRng,
) -> Vec<(f64, Vec<f64>)> {
    let best_ir = s.particles[s.best_index()].ir;
    let g = s.global_best().0.to_vec();
    s.particles
        .iter()
        .map(|q| {
            if q.ex < 0 {
                let ir = rescale_ir(q.ir, best_ir, seeded_uniform(rng)).clamp(p.ir_min, p.ir_max);
                (ir, replay_pull(&q.position, &g, ir, space, rng))
            } else {
                let mut ir = q.ir;
                for _ in 0..p.rationality_rate {
                    ir = rescale_ir(ir, best_ir, seeded_uniform(rng)).clamp(p.ir_min, p.ir_max);
                }
                (ir, q.position.clone())
            }
        })
        .collect()
}

fn formula_values() -> Result<(), String> {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let cases = [
        ("grow 0.5,0.4", grow_ir(0.5, 0.4), 0.7),
        ("grow 0.5,0.2", grow_ir(0.5, 0.2), 0.6),
        ("grow 0.7,0.1", grow_ir(0.7, 0.1), 0.77),
        ("grow 0.5,0.6", grow_ir(0.5, 0.6), 0.8),
        ("decay 0.8,0.5", decay_ir(0.8, 0.5), 0.4),
        ("decay 1,0.25", decay_ir(1.0, 0.25), 0.25),
        ("rescale 0.5,1,0.5", rescale_ir(0.5, 1.0, 0.5), 1.5),
        ("pull 0,10,1,1", pull_toward(0.0, 10.0, 1.0, 1.0), 10.0),
        ("pull 0,10,.5,.5", pull_toward(0.0, 10.0, 0.5, 0.5), 2.5),
        ("pull at gbest", pull_toward(4.0, 4.0, 3.0, 0.9), 4.0),
    ];
    for (name, got, want) in cases {
        if !close(got, want) {
            return Err(format!("{name}: {got} != {want}"));
        }
    }
    Ok(())
}

fn check_ir(s: &CoDoaState, phase: &str) -> Result<(), String> {
    match s.particles.iter().find(|q| !(1e-6..=10.0).contains(&q.ir)) {
        Some(q) => Err(format!("ir {} out of range after {phase}", q.ir)),
        None => Ok(()),
    }
}

fn renewal(before: &CoDoaState, after: &CoDoaState, b: usize, phase: &str) -> Result<(), String> {
    for (i, (x, y)) in before.particles.iter().zip(&after.particles).enumerate() {
        let want = x.ex + i64::from(i == b);
        if y.ex != want {
            return Err(format!("{phase}: particle {i} ex {} -> {}", x.ex, y.ex));
        }
    }
    Ok(())
}

fn codoa_structure() -> Check {
    formula_values()?;
    let params = CoDoaParams::default();
    let mut renewals = 0usize;
    let mut iterations = 0usize;
    for (dim, seed) in [(1usize, 0u64), (1, 1), (2, 2), (3, 3), (2, 4)] {
        let space = SearchSpace::new(vec![-5.0; dim], vec![5.0; dim]).unwrap();
        let ctx = CoDoaContext {
            params: &params,
            space: &space,
            objective: &multimodal,
        };
        let mut rng = seeded_rng(seed, 0);
        let mut s = CoDoaState::initialize(&ctx, 15, &mut rng);
        let ones = s.particles.iter().filter(|q| q.ex == 1).count();
        let zeros = s.particles.iter().filter(|q| q.ex == 0).count();
        if ones != 1 || zeros != 14 {
            return Err(format!("after initialization {ones} particles have ex 1"));
        }
        check_ir(&s, "initialize")?;
        for _ in 0..200 {
            let mut r = rng.clone();
            let want = replay_socialization(&s, &params, &mut r);
            s.socialization(&ctx, &mut rng);
            if s.particles != want.particles || r != rng {
                return Err("socialization differs from the shared grow formula".into());
            }
            check_ir(&s, "socialization")?;

            let mut r = rng.clone();
            let want = replay_decay(&s, &params, &mut r);
            let before = s.clone();
            s.ir_decay_all(&ctx, &mut rng);
            let irs: Vec<f64> = s.particles.iter().map(|q| q.ir).collect();
            if irs != want || r != rng {
                return Err("ir decay differs from the shared decay formula".into());
            }
            renewal(&before, &s, usize::MAX, "ir decay")?;
            check_ir(&s, "ir decay")?;

            let b = s.best_index();
            let g = s.global_best().0.to_vec();
            let mut r = rng.clone();
            let before = s.clone();
            s.move_particles(&ctx, &mut rng);
            for (i, (x, y)) in before.particles.iter().zip(&s.particles).enumerate() {
                if i == b {
                    if x.position != y.position {
                        return Err("move_particles moved the best particle".into());
                    }
                } else if y.position != replay_pull(&x.position, &g, x.ir, &space, &mut r) {
                    return Err("move differs from the shared pull formula".into());
                }
            }
            renewal(&before, &s, usize::MAX, "move")?;

            let before = s.clone();
            let b = s.refresh_best(&ctx, &mut rng);
            renewal(&before, &s, b, "refresh_best")?;
            check_ir(&s, "refresh_best")?;

            let before = s.clone();
            let b = s.maturation(&ctx, &mut rng);
            renewal(&before, &s, b, "maturation")?;
            check_ir(&s, "maturation")?;

            let mut r = rng.clone();
            let want = replay_rationalizing(&s, &params, &space, &mut r);
            let before = s.clone();
            s.rationalizing(&ctx, &mut rng);
            let got: Vec<(f64, Vec<f64>)> = s
                .particles
                .iter()
                .map(|q| (q.ir, q.position.clone()))
                .collect();
            if got != want || r != rng {
                return Err("rationalizing differs from the shared rescale/pull formulas".into());
            }
            renewal(&before, &s, usize::MAX, "rationalizing")?;
            check_ir(&s, "rationalizing")?;

            let mut composed = s.clone();
            let mut r = rng.clone();
            composed.ir_decay_all(&ctx, &mut r);
            let cb = composed.refresh_best(&ctx, &mut r);
            let before = s.clone();
            let b = s.balancing(&ctx, &mut rng, no_hook);
            if cb != b || composed.particles != s.particles || r != rng {
                return Err("balancing differs from ir decay + refresh".into());
            }
            renewal(&before, &s, b, "balancing")?;
            check_ir(&s, "balancing")?;
            renewals += 3;
            iterations += 1;
        }
    }
    Ok(format!(
        "{iterations} iterations: {renewals} best renewals (3 each, +1 ex each), ir in [1e-6, 10] after every phase, best never moved, 4 shared formulas replayed"
    ))
}

// ---------------------------------------------------------------- 8

fn determinism() -> Check {
    let toy = data_dir().join("fixtures/toy.toml");
    let once = |serial: bool| -> Result<String, String> {
        let mut c = desk_config(&toy);
        c.serial = serial;
        let o = run_experiment(&c).map_err(|e| e.to_string())?;
        records_csv(&o.report).map_err(|e| e.to_string())
    };
    let a = once(false)?;
    let b = once(false)?;
    let s = once(true)?;
    ensure(
        a == b && a == s,
        format!(
            "records.csv {} bytes; repeat identical: {}; serial identical: {}",
            a.len(),
            a == b,
            a == s
        ),
    )
}

// ---------------------------------------------------------------- 9

fn five_rows() -> Result<(), String> {
    let path = data_dir().join("fixtures/five_rows.toml");
    let split = load_manifest_split(&path, None).map_err(|e| e.to_string())?;
    let p = &split.preprocessor;
    match &p.columns[..] {
        [ColumnStats::Numeric { mean, min, max, .. }, ColumnStats::Categorical { mode, levels, .. }] =>
        {
            if (*mean, *min, *max) != (2.0, 1.0, 3.0) {
                return Err(format!("numeric stats {mean} {min} {max}"));
            }
            if mode != "red" || levels != &["blue", "red"] {
                return Err(format!("categorical mode {mode} levels {levels:?}"));
            }
        }
        other => return Err(format!("unexpected column stats {other:?}")),
    }
    let train = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 1.0]];
    let test = vec![vec![1.0, 1.0], vec![0.0, 0.0]];
    if split.train.features != train || split.test.features != test {
        return Err(format!(
            "features {:?} / {:?}",
            split.train.features, split.test.features
        ));
    }
    if split.train.labels != [0, 1, 0] || split.test.labels != [1, 0] {
        return Err("labels differ from hand encoding".into());
    }
    Ok(())
}

fn no_leakage() -> Result<(), String> {
    let path = data_dir().join("fixtures/five_rows.toml");
    let m = DatasetManifest::from_file(&path).map_err(|e| e.to_string())?;
    let train =
        load_file(&m.resolve(Path::new("five_train.data")), &m).map_err(|e| e.to_string())?;
    let test = load_file(&m.resolve(Path::new("five_test.data")), &m).map_err(|e| e.to_string())?;
    let mut skewed: RawTable = test.clone();
    for row in &mut skewed.rows {
        row.cells[0] = Some("1000".into());
        row.cells[1] = Some("blue".into());
    }
    let (_, _, a) = prepare(&train, &test, &m).map_err(|e| e.to_string())?;
    let (_, _, b) = prepare(&train, &skewed, &m).map_err(|e| e.to_string())?;
    if a != b {
        return Err("preprocessing statistics depend on the test rows".into());
    }
    Ok(())
}

fn split_sizes(name: &str, manifest: &str, want: (usize, usize)) -> Result<String, String> {
    let s = load_manifest_split(&data_dir().join(manifest), None)
        .map_err(|e| format!("{name} unavailable: {e}"))?;
    let got = (s.train.len(), s.test.len());
    let line = format!("{name} {}/{}", got.0, got.1);
    if got == want {
        Ok(line)
    } else {
        Err(format!("{line} (want {}/{})", want.0, want.1))
    }
}

fn data_pipeline() -> Check {
    five_rows()?;
    no_leakage()?;
    let results = [
        split_sizes("thyroid", "thyroid/thyroid.toml", (2800, 972)),
        split_sizes("hepatitis", "hepatitis/hepatitis.toml", (100, 55)),
        split_sizes("ckd", "ckd/ckd.toml", (295, 105)),
    ];
    let ok = results.iter().all(Result::is_ok);
    let text: Vec<String> = results
        .into_iter()
        .map(|r| r.unwrap_or_else(|e| e))
        .collect();
    ensure(
        ok,
        format!(
            "5-row fixture exact, test rows unused by fit; splits: {}",
            text.join("; ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("accuracy formula and display", accuracy_display),
        ("kernel suite", kernel_suite),
        ("SVM trainer oracle", svm_oracle),
        ("optimizer quadratic oracle", optimizer_oracle),
        ("grid-search equivalence (hepatitis)", grid_equivalence),
        ("reproduction bands", reproduction_bands),
        ("CoDOA structural invariants", codoa_structure),
        ("end-to-end determinism", determinism),
        ("data pipeline oracle", data_pipeline),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
