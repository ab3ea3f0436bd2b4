use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::optimizer::seeded_rng;

pub const MAX_SPLIT_ATTEMPTS: u64 = 100;

/// Row indices of a split, each list ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    /// Sub-seed (stream) of the accepted shuffle.
    pub attempt: u64,
}

/// Shuffles `0..labels.len()` with stream `attempt` of `seed` and takes the
/// first `train_count` rows for training and the next `test_count` for
/// testing. A shuffle whose training part misses a class is rejected and
/// the next stream tried.
pub fn split_counts(
    labels: &[&str],
    train_count: usize,
    test_count: usize,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    let n = labels.len();
    if train_count + test_count > n {
        return Err(DataError::Split(format!(
            "{train_count} + {test_count} rows requested from {n}"
        )));
    }
    let classes: BTreeSet<&str> = labels.iter().copied().collect();
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seeded_rng(seed, attempt));
        let mut train = order[..train_count].to_vec();
        let present: BTreeSet<&str> = train.iter().map(|&i| labels[i]).collect();
        if present.len() != classes.len() {
            continue;
        }
        let mut test = order[train_count..train_count + test_count].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        return Ok(SplitIndices {
            train,
            test,
            seed,
            attempt,
        });
    }
    Err(DataError::Split(format!(
        "a class is absent from the training split after {MAX_SPLIT_ATTEMPTS} shuffles"
    )))
}
