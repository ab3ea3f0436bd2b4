//! # codoa-svm
//!
//! Tunes the Gaussian (RBF) kernel width σ of a soft-margin support vector
//! machine with the Cognitive Development Optimization Algorithm (CoDOA),
//! and with four baseline metaheuristics (GA, DE, CSA, PSO) for comparison.
//!
//! The crate is organized bottom-up:
//!
//! - [`optimizer`]: the search-space / run-loop contract shared by every
//!   optimizer, including the seeded RNG streams and best-so-far history.
//! - [`codoa`]: the seven-phase CoDOA procedure.
//! - [`baselines`]: GA, DE/rand/1/bin, clonal selection and PSO.
//! - [`svm`]: kernels, the SMO dual solver, one-vs-rest multiclass and the
//!   model file format.
//! - [`fitness`]: diagnosis counts, accuracy, and the σ → accuracy objective.
//! - [`dataset`]: manifests, UCI-format loaders, preprocessing and splits.
//! - [`harness`]: multi-run experiments, comparison tables and plot data.

pub mod baselines;
pub mod codoa;
pub mod dataset;
pub mod fitness;
pub mod harness;
pub mod optimizer;
pub mod svm;

pub use codoa::{CoDoa, CoDoaParams};
pub use fitness::{accuracy, DiagnosisCounts, SvmObjective};
pub use optimizer::{run, Objective, Optimizer, OptimizerResult, RunConfig, SearchSpace};
