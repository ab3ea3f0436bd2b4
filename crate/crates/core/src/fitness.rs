//! Diagnosis counts, accuracy and the σ → accuracy objective.
//!
//! Accuracy is `100 · TD / (TD + FD)`. Displayed values are rounded half-up
//! to two decimals from the integer counts, so no binary rounding leaks into
//! reports.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::optimizer::{argmax, seeded_rng, Objective};
use crate::svm::smo::{self, BaseRows, KernelRows};
use crate::svm::{KernelFamily, MulticlassSvm, SvmError, TrainParams};

#[derive(Debug, Error)]
pub enum FitnessError {
    #[error("empty evaluation: no samples were classified")]
    EmptyEvaluation,
    #[error("training and evaluation data disagree: {0}")]
    Mismatch(String),
    #[error("cannot build folds: {0}")]
    Folds(String),
    #[error("SVM training did not converge")]
    NotConverged,
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// True and false diagnosis counts over an evaluated set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisCounts {
    pub true_diagnosis: u64,
    pub false_diagnosis: u64,
}

impl DiagnosisCounts {
    pub fn new(true_diagnosis: u64, false_diagnosis: u64) -> Self {
        Self {
            true_diagnosis,
            false_diagnosis,
        }
    }

    pub fn from_predictions(predicted: &[usize], actual: &[usize]) -> Self {
        let mut c = Self::default();
        for (p, a) in predicted.iter().zip(actual) {
            c.record(p == a);
        }
        c
    }

    pub fn record(&mut self, correct: bool) {
        if correct {
            self.true_diagnosis += 1;
        } else {
            self.false_diagnosis += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.true_diagnosis + self.false_diagnosis
    }

    pub fn accuracy(&self) -> Result<f64, FitnessError> {
        accuracy(*self)
    }

    /// Accuracy in hundredths of a percent, rounded half-up exactly.
    pub fn accuracy_hundredths(&self) -> Result<u64, FitnessError> {
        let total = self.total() as u128;
        if total == 0 {
            return Err(FitnessError::EmptyEvaluation);
        }
        let td = self.true_diagnosis as u128;
        Ok(((20_000 * td + total) / (2 * total)) as u64)
    }

    /// Accuracy as a two-decimal string, e.g. `"96.60"`.
    pub fn display(&self) -> Result<String, FitnessError> {
        let h = self.accuracy_hundredths()?;
        Ok(format!("{}.{:02}", h / 100, h % 100))
    }
}

impl std::ops::AddAssign for DiagnosisCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.true_diagnosis += rhs.true_diagnosis;
        self.false_diagnosis += rhs.false_diagnosis;
    }
}

/// `100 · TD / (TD + FD)`.
pub fn accuracy(counts: DiagnosisCounts) -> Result<f64, FitnessError> {
    let total = counts.total();
    if total == 0 {
        return Err(FitnessError::EmptyEvaluation);
    }
    Ok(100.0 * counts.true_diagnosis as f64 / total as f64)
}

/// Rounds half-up at `decimals` places. Values within 1e-9 (relative) below
/// a half are treated as the half, absorbing binary representation error.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value * scale;
    let nudge = 1e-9 * scaled.abs().max(1.0);
    (scaled + 0.5 + nudge).floor() / scale
}

/// Two-decimal display of a percentage, rounded half-up.
pub fn format_percent(value: f64) -> String {
    format!("{:.2}", round_half_up(value, 2))
}

/// Counts correct one-vs-rest predictions of `model` on a dataset.
pub fn evaluate_model(
    model: &MulticlassSvm,
    features: &[Vec<f64>],
    labels: &[usize],
) -> Result<DiagnosisCounts, SvmError> {
    let mut counts = DiagnosisCounts::default();
    for (x, &y) in features.iter().zip(labels) {
        counts.record(model.predict(x)? == y);
    }
    Ok(counts)
}

/// How the σ objective scores a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FitnessMode {
    /// Train on the training split, score on a separate evaluation set.
    Holdout,
    /// Stratified k-fold cross-validation inside the training split.
    CrossValidation { folds: usize, seed: u64 },
}

struct Fold {
    train: Vec<usize>,
    eval: Vec<usize>,
}

/// Maps a σ position to one-vs-rest SVM accuracy.
///
/// All rows involved are pooled once and their squared distances (or dot
/// products) precomputed, so each evaluation only finishes kernel values for
/// the requested σ. Results are bit-identical to training a
/// [`MulticlassSvm`] on the same rows. Failed or non-converged trainings
/// score 0.0 and are counted in [`SvmObjective::warnings`].
pub struct SvmObjective {
    family: KernelFamily,
    params: TrainParams,
    n_classes: usize,
    labels: Vec<usize>,
    base: Vec<f64>,
    stride: usize,
    folds: Vec<Fold>,
    memo: Mutex<HashMap<u64, f64>>,
    warnings: AtomicUsize,
}

/// Objective scoring σ by training on `train` and predicting `eval`.
pub fn make_objective(
    train: &Dataset,
    eval: &Dataset,
    family: KernelFamily,
) -> Result<SvmObjective, FitnessError> {
    SvmObjective::holdout(train, eval, family, TrainParams::default())
}

impl SvmObjective {
    pub fn holdout(
        train: &Dataset,
        eval: &Dataset,
        family: KernelFamily,
        params: TrainParams,
    ) -> Result<Self, FitnessError> {
        if train.class_names != eval.class_names {
            return Err(FitnessError::Mismatch("class names differ".into()));
        }
        if train.n_features() != eval.n_features() {
            return Err(FitnessError::Mismatch(format!(
                "{} vs {} features",
                train.n_features(),
                eval.n_features()
            )));
        }
        if eval.is_empty() {
            return Err(FitnessError::EmptyEvaluation);
        }
        let n_train = train.len();
        let mut pool = train.features.clone();
        pool.extend(eval.features.iter().cloned());
        let mut labels = train.labels.clone();
        labels.extend(&eval.labels);
        let fold = Fold {
            train: (0..n_train).collect(),
            eval: (n_train..pool.len()).collect(),
        };
        Self::build(&pool, labels, train.n_classes(), family, params, vec![fold])
    }

    /// Stratified `k`-fold cross-validation on `train` alone. Folds are dealt
    /// per class from a shuffle seeded by `seed`.
    pub fn cross_validated(
        train: &Dataset,
        family: KernelFamily,
        params: TrainParams,
        k: usize,
        seed: u64,
    ) -> Result<Self, FitnessError> {
        let folds = stratified_folds(&train.labels, train.n_classes(), k, seed)?;
        Self::build(
            &train.features,
            train.labels.clone(),
            train.n_classes(),
            family,
            params,
            folds,
        )
    }

    pub fn new(
        train: &Dataset,
        eval: &Dataset,
        family: KernelFamily,
        params: TrainParams,
        mode: FitnessMode,
    ) -> Result<Self, FitnessError> {
        match mode {
            FitnessMode::Holdout => Self::holdout(train, eval, family, params),
            FitnessMode::CrossValidation { folds, seed } => {
                Self::cross_validated(train, family, params, folds, seed)
            }
        }
    }

    fn build(
        pool: &[Vec<f64>],
        labels: Vec<usize>,
        n_classes: usize,
        family: KernelFamily,
        params: TrainParams,
        folds: Vec<Fold>,
    ) -> Result<Self, FitnessError> {
        params.validate()?;
        crate::svm::validate_features(pool)?;
        if n_classes < 2 {
            return Err(SvmError::TooFewClasses(n_classes).into());
        }
        for fold in &folds {
            for class in 0..n_classes {
                if !fold.train.iter().any(|&i| labels[i] == class) {
                    return Err(SvmError::AbsentClass(class).into());
                }
            }
        }
        // any σ works here: only the σ-free part is stored
        let probe = family.with_sigma(1.0)?;
        let n = pool.len();
        let mut base = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = probe.base(&pool[i], &pool[j]);
                base[i * n + j] = v;
                base[j * n + i] = v;
            }
        }
        Ok(Self {
            family,
            params,
            n_classes,
            labels,
            base,
            stride: n,
            folds,
            memo: Mutex::new(HashMap::new()),
            warnings: AtomicUsize::new(0),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Number of evaluations that scored 0.0 because training failed.
    pub fn warnings(&self) -> usize {
        self.warnings.load(Ordering::Relaxed)
    }

    /// Pooled diagnosis counts over every evaluation fold.
    pub fn counts_for_sigma(&self, sigma: f64) -> Result<DiagnosisCounts, FitnessError> {
        let kernel = self.family.with_sigma(sigma)?;
        let mut counts = DiagnosisCounts::default();
        for fold in &self.folds {
            let mut rows = BaseRows::new(
                &self.base,
                self.stride,
                &fold.train,
                kernel,
                self.params.cache_bytes,
            );
            let mut machines = Vec::with_capacity(self.n_classes);
            for class in 0..self.n_classes {
                let y: Vec<f64> = fold
                    .train
                    .iter()
                    .map(|&i| if self.labels[i] == class { 1.0 } else { -1.0 })
                    .collect();
                let sol = smo::solve(
                    &mut rows as &mut dyn KernelRows,
                    &y,
                    self.params.c,
                    self.params.tol,
                    self.params.max_passes,
                );
                if !sol.converged {
                    return Err(FitnessError::NotConverged);
                }
                let sv: Vec<(usize, f64)> = sol
                    .alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0.0)
                    .map(|(t, &a)| (fold.train[t], a * y[t]))
                    .collect();
                machines.push((sv, sol.bias));
            }
            let mut values = vec![0.0; self.n_classes];
            for &e in &fold.eval {
                for (v, (sv, bias)) in values.iter_mut().zip(&machines) {
                    let mut s = 0.0;
                    for &(p, coef) in sv {
                        s += coef * kernel.finish_base(self.base[p * self.stride + e]);
                    }
                    *v = s + bias;
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(SvmError::NonFiniteDecision.into());
                }
                counts.record(argmax(&values) == self.labels[e]);
            }
        }
        Ok(counts)
    }

    pub fn evaluate_sigma(&self, sigma: f64) -> Result<f64, FitnessError> {
        accuracy(self.counts_for_sigma(sigma)?)
    }
}

impl Objective for SvmObjective {
    fn evaluate(&self, position: &[f64]) -> f64 {
        let sigma = position[0];
        let key = sigma.to_bits();
        if let Some(&v) = self.memo.lock().expect("memo poisoned").get(&key) {
            return v;
        }
        let v = match self.evaluate_sigma(sigma) {
            Ok(v) => v,
            Err(e) => {
                self.warnings.fetch_add(1, Ordering::Relaxed);
                log::warn!("fitness at sigma={sigma}: {e}; scoring 0");
                0.0
            }
        };
        self.memo.lock().expect("memo poisoned").insert(key, v);
        v
    }

    fn is_costly(&self) -> bool {
        true
    }
}

fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Fold>, FitnessError> {
    if k < 2 {
        return Err(FitnessError::Folds(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if labels.len() < k {
        return Err(FitnessError::Folds(format!(
            "{} rows cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut rng = seeded_rng(seed, 0);
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0usize;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(FitnessError::Folds(format!(
                "class {class} has {} rows; cross-validation needs 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        // continue dealing where the previous class stopped to balance fold sizes
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| Fold {
            train: (0..labels.len()).filter(|&i| assignment[i] != f).collect(),
            eval: (0..labels.len()).filter(|&i| assignment[i] == f).collect(),
        })
        .collect())
}
