use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::binary::TrainedSvm;
use super::kernel::KernelSpec;
use super::multiclass::MulticlassSvm;
use super::SvmError;

pub const MODEL_FORMAT: &str = "codoa-svm-model";
pub const MODEL_VERSION: u32 = 1;

/// On-disk JSON form of a trained one-vs-rest model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kernel: KernelSpec,
    pub c: f64,
    pub class_names: Vec<String>,
    pub machines: Vec<MachineRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineRecord {
    pub bias: f64,
    pub converged: bool,
    pub dual_coefs: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn from_model(model: &MulticlassSvm) -> Self {
        let first = &model.machines[0];
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            kernel: first.kernel,
            c: first.c,
            class_names: model.class_names.clone(),
            machines: model
                .machines
                .iter()
                .map(|m| MachineRecord {
                    bias: m.bias,
                    converged: m.converged,
                    dual_coefs: m.dual_coefs.clone(),
                    support_vectors: m.support_vectors.clone(),
                })
                .collect(),
        }
    }

    pub fn into_model(self) -> Result<MulticlassSvm, SvmError> {
        if self.format != MODEL_FORMAT {
            return Err(SvmError::ModelFormat(format!(
                "unexpected format tag {:?}",
                self.format
            )));
        }
        if self.version != MODEL_VERSION {
            return Err(SvmError::ModelFormat(format!(
                "unsupported version {}",
                self.version
            )));
        }
        self.kernel.validate()?;
        if self.machines.len() != self.class_names.len() || self.machines.len() < 2 {
            return Err(SvmError::ModelFormat(format!(
                "{} machines for {} classes",
                self.machines.len(),
                self.class_names.len()
            )));
        }
        let mut dim = None;
        let mut machines = Vec::with_capacity(self.machines.len());
        for (k, m) in self.machines.into_iter().enumerate() {
            if m.dual_coefs.len() != m.support_vectors.len() {
                return Err(SvmError::ModelFormat(format!(
                    "machine {k}: {} coefficients for {} support vectors",
                    m.dual_coefs.len(),
                    m.support_vectors.len()
                )));
            }
            for sv in &m.support_vectors {
                match dim {
                    None => dim = Some(sv.len()),
                    Some(d) if d != sv.len() => {
                        return Err(SvmError::ModelFormat(format!(
                            "machine {k}: support vector width {} differs from {d}",
                            sv.len()
                        )))
                    }
                    _ => {}
                }
            }
            machines.push(TrainedSvm {
                support_vectors: m.support_vectors,
                dual_coefs: m.dual_coefs,
                bias: m.bias,
                kernel: self.kernel,
                c: self.c,
                converged: m.converged,
            });
        }
        Ok(MulticlassSvm {
            machines,
            class_names: self.class_names,
        })
    }
}

impl MulticlassSvm {
    pub fn to_json(&self) -> Result<String, SvmError> {
        serde_json::to_string_pretty(&ModelFile::from_model(self))
            .map_err(|e| SvmError::ModelFormat(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, SvmError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| SvmError::ModelFormat(e.to_string()))?;
        file.into_model()
    }

    pub fn save(&self, path: &Path) -> Result<(), SvmError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SvmError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::TrainParams;
    use proptest::prelude::*;

    fn model(sigma: f64) -> MulticlassSvm {
        let x = vec![
            vec![0.0, 0.1],
            vec![0.2, 0.0],
            vec![1.0, 1.0],
            vec![0.9, 1.1],
            vec![0.0, 1.0],
            vec![0.1, 0.9],
        ];
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        MulticlassSvm::train(
            &x,
            &[0, 0, 1, 1, 2, 2],
            &names,
            KernelSpec::rbf(sigma).unwrap(),
            &TrainParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn save_and_load_round_trip() {
        let m = model(0.7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        m.save(&path).unwrap();
        let back = MulticlassSvm::load(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrong_tag_or_version_rejected() {
        let mut file = ModelFile::from_model(&model(1.0));
        file.version = 2;
        assert!(matches!(
            file.clone().into_model(),
            Err(SvmError::ModelFormat(_))
        ));
        file.version = MODEL_VERSION;
        file.format = "other".into();
        assert!(matches!(file.into_model(), Err(SvmError::ModelFormat(_))));
        assert!(MulticlassSvm::from_json("{}").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn json_round_trip_preserves_predictions(sigma in 0.05f64..10.0,
                                                 q in prop::collection::vec(-1.0f64..2.0, 2)) {
            let m = model(sigma);
            let back = MulticlassSvm::from_json(&m.to_json().unwrap()).unwrap();
            prop_assert_eq!(m.decision_values(&q).unwrap(), back.decision_values(&q).unwrap());
        }
    }
}
