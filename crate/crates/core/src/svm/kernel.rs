use serde::{Deserialize, Serialize};

use super::SvmError;

/// Kernel function with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `xᵀy`
    Linear,
    /// `(1 + xᵀy)^degree`
    Polynomial { degree: u32 },
    /// `exp(−‖x − y‖² / (2σ²))`
    Rbf { sigma: f64 },
}

/// Kernel family without the σ, used when σ is the decision variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Polynomial { degree: u32 },
    Rbf,
}

impl KernelFamily {
    /// Concrete kernel for a σ; σ is ignored by the linear and polynomial families.
    pub fn with_sigma(self, sigma: f64) -> Result<KernelSpec, SvmError> {
        let spec = match self {
            KernelFamily::Linear => KernelSpec::Linear,
            KernelFamily::Polynomial { degree } => KernelSpec::Polynomial { degree },
            KernelFamily::Rbf => KernelSpec::Rbf { sigma },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self, SvmError> {
        let k = KernelSpec::Rbf { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn polynomial(degree: u32) -> Result<Self, SvmError> {
        let k = KernelSpec::Polynomial { degree };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree } if degree >= 1 => Ok(()),
            KernelSpec::Polynomial { degree } => Err(SvmError::InvalidKernel(format!(
                "polynomial degree must be >= 1, got {degree}"
            ))),
            KernelSpec::Rbf { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            KernelSpec::Rbf { sigma } => Err(SvmError::InvalidKernel(format!(
                "rbf sigma must be positive and finite, got {sigma}"
            ))),
        }
    }

    pub fn family(&self) -> KernelFamily {
        match *self {
            KernelSpec::Linear => KernelFamily::Linear,
            KernelSpec::Polynomial { degree } => KernelFamily::Polynomial { degree },
            KernelSpec::Rbf { .. } => KernelFamily::Rbf,
        }
    }

    /// The σ-independent part: squared distance for RBF, dot product otherwise.
    #[inline]
    pub(crate) fn base(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Rbf { .. } => squared_distance(x, y),
            _ => dot(x, y),
        }
    }

    /// Finishes a kernel value from [`KernelSpec::base`].
    #[inline]
    pub(crate) fn finish_base(&self, base: f64) -> f64 {
        match *self {
            KernelSpec::Linear => base,
            KernelSpec::Polynomial { degree } => (1.0 + base).powi(degree as i32),
            KernelSpec::Rbf { sigma } => (-base / (2.0 * sigma * sigma)).exp(),
        }
    }

    /// Kernel value without dimension checks.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.finish_base(self.base(x, y))
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
        if x.len() != y.len() {
            return Err(SvmError::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }
}

/// Evaluates `spec` on a pair of feature vectors.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
    spec.eval(x, y)
}

/// `xᵀy`, summed in feature order.
#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

/// `‖x − y‖²`, summed in feature order.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        s += d * d;
    }
    s
}
