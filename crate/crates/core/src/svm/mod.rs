//! Kernel soft-margin SVM: kernels, the SMO trainer, one-vs-rest multiclass
//! and a JSON model file.

mod binary;
mod io;
mod kernel;
mod multiclass;
pub(crate) mod smo;

pub use binary::{Prediction, TrainParams, TrainedSvm};
pub use io::{ModelFile, MODEL_FORMAT, MODEL_VERSION};
pub use kernel::{dot, kernel_eval, squared_distance, KernelFamily, KernelSpec};
pub use multiclass::MulticlassSvm;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training labels contain a single class; need both -1 and +1")]
    SingleClass,
    #[error("label {0} is not -1 or +1")]
    InvalidLabel(i64),
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("class {0} has no training examples")]
    AbsentClass(usize),
    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("decision value is not finite")]
    NonFiniteDecision,
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Checks a feature matrix for consistent width and finite values.
pub(crate) fn validate_features(x: &[Vec<f64>]) -> Result<usize, SvmError> {
    let Some(first) = x.first() else {
        return Err(SvmError::EmptyTrainingSet);
    };
    let dim = first.len();
    for (row, v) in x.iter().enumerate() {
        if v.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        if let Some(column) = v.iter().position(|f| !f.is_finite()) {
            return Err(SvmError::NonFinite { row, column });
        }
    }
    Ok(dim)
}
