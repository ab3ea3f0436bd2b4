use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binary::{TrainParams, TrainedSvm};
use super::kernel::KernelSpec;
use super::{validate_features, SvmError};

/// One-vs-rest ensemble: machine `k` separates class `k` (+1) from the rest (−1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvm {
    pub machines: Vec<TrainedSvm>,
    pub class_names: Vec<String>,
}

/// The ±1 target vector of the machine for `class`.
pub(crate) fn one_vs_rest(labels: &[usize], class: usize) -> Vec<i8> {
    labels
        .iter()
        .map(|&l| if l == class { 1 } else { -1 })
        .collect()
}

/// Largest value; the lowest index wins ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    crate::optimizer::argmax(values)
}

impl MulticlassSvm {
    /// Trains one machine per class id in `0..class_names.len()`.
    /// The per-class machines train in parallel.
    pub fn train(
        x: &[Vec<f64>],
        labels: &[usize],
        class_names: &[String],
        kernel: KernelSpec,
        params: &TrainParams,
    ) -> Result<Self, SvmError> {
        let k = class_names.len();
        if k < 2 {
            return Err(SvmError::TooFewClasses(k));
        }
        validate_features(x)?;
        if x.len() != labels.len() {
            return Err(SvmError::LengthMismatch {
                features: x.len(),
                labels: labels.len(),
            });
        }
        for class in 0..k {
            if !labels.contains(&class) {
                return Err(SvmError::AbsentClass(class));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(SvmError::InvalidLabel(bad as i64));
        }
        let machines = (0..k)
            .into_par_iter()
            .map(|class| TrainedSvm::train(x, &one_vs_rest(labels, class), kernel, params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            machines,
            class_names: class_names.to_vec(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.machines.len()
    }

    pub fn converged(&self) -> bool {
        self.machines.iter().all(|m| m.converged)
    }

    pub fn kernel(&self) -> KernelSpec {
        self.machines[0].kernel
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        self.machines.iter().map(|m| m.decision_value(x)).collect()
    }

    /// Class id with the largest decision value, lowest id on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize, SvmError> {
        Ok(argmax_lowest(&self.decision_values(x)?))
    }
}
