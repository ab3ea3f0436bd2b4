use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::smo::{self, DirectRows, DualSolution};
use super::{validate_features, SvmError};

/// Soft-margin trainer settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    /// Box constraint `C`.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Pair-update budget in sweeps; see [`TrainedSvm::train`].
    pub max_passes: usize,
    /// Kernel row cache size in bytes; 0 disables the cache.
    pub cache_bytes: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            cache_bytes: 64 << 20,
        }
    }
}

impl TrainParams {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(SvmError::InvalidParams(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(SvmError::InvalidParams(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    /// −1 or +1; a zero decision value maps to +1.
    pub label: i8,
    pub value: f64,
}

/// A trained binary machine, `f(x) = Σ dual_coefs_i · K(sv_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedSvm {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    /// False when the pair-update budget ran out before the KKT gap met `tol`.
    #[serde(default = "yes")]
    pub converged: bool,
}

fn yes() -> bool {
    true
}

pub(crate) fn signed_labels(y: &[i8]) -> Result<Vec<f64>, SvmError> {
    let mut pos = false;
    let mut neg = false;
    let mut out = Vec::with_capacity(y.len());
    for &l in y {
        match l {
            1 => pos = true,
            -1 => neg = true,
            other => return Err(SvmError::InvalidLabel(other as i64)),
        }
        out.push(l as f64);
    }
    if !(pos && neg) {
        return Err(SvmError::SingleClass);
    }
    Ok(out)
}

impl TrainedSvm {
    /// Trains on rows `x` with labels in `{−1, +1}`.
    ///
    /// The solver stops when the maximal KKT violation is below `params.tol`
    /// or after `max_passes · 100 · max(n, 1000)` pair updates, in which case
    /// the model is returned with `converged == false`.
    pub fn train(
        x: &[Vec<f64>],
        y: &[i8],
        kernel: KernelSpec,
        params: &TrainParams,
    ) -> Result<Self, SvmError> {
        kernel.validate()?;
        params.validate()?;
        validate_features(x)?;
        if x.len() != y.len() {
            return Err(SvmError::LengthMismatch {
                features: x.len(),
                labels: y.len(),
            });
        }
        let ys = signed_labels(y)?;
        let mut rows = DirectRows::new(x, kernel, params.cache_bytes);
        let solution = smo::solve(&mut rows, &ys, params.c, params.tol, params.max_passes);
        Ok(Self::from_solution(
            &solution,
            &ys,
            |i| &x[i],
            kernel,
            params.c,
        ))
    }

    pub(crate) fn from_solution<'a>(
        solution: &DualSolution,
        y: &[f64],
        row: impl Fn(usize) -> &'a [f64],
        kernel: KernelSpec,
        c: f64,
    ) -> Self {
        let mut support_vectors = Vec::new();
        let mut dual_coefs = Vec::new();
        for (i, &a) in solution.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(row(i).to_vec());
                dual_coefs.push(a * y[i]);
            }
        }
        Self {
            support_vectors,
            dual_coefs,
            bias: solution.bias,
            kernel,
            c,
            converged: solution.converged,
        }
    }

    pub fn n_features(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    /// The dual variables `α_i` of the support vectors.
    pub fn alphas(&self) -> Vec<f64> {
        self.dual_coefs.iter().map(|c| c.abs()).collect()
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            s += coef * self.kernel.eval_unchecked(sv, x);
        }
        s + self.bias
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        let dim = self.n_features();
        if !self.support_vectors.is_empty() && x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if let Some(column) = x.iter().position(|v| !v.is_finite()) {
            return Err(SvmError::NonFinite { row: 0, column });
        }
        let v = self.decision_unchecked(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SvmError::NonFiniteDecision)
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, SvmError> {
        let value = self.decision_value(x)?;
        Ok(Prediction {
            label: if value >= 0.0 { 1 } else { -1 },
            value,
        })
    }
}
