use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Repeated random partitions of cover/stego pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPlan {
    pub trials: usize,
    pub train: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            trials: 30,
            train: 260,
            test: 94,
            seed: 0,
        }
    }
}

/// Pair indices of one trial, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master ^ trial as u64
}

/// One uniformly random partition per trial, seeded by `seed ^ trial`.
pub fn make_splits(pairs: usize, plan: &SplitPlan) -> Result<Vec<Split>, EvalError> {
    if plan.trials == 0 {
        return Err(EvalError::EmptyPlan);
    }
    if plan.train + plan.test != pairs || plan.train == 0 || plan.test == 0 {
        return Err(EvalError::SizeMismatch {
            pairs,
            train: plan.train,
            test: plan.test,
        });
    }
    Ok((0..plan.trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(plan.seed, t));
            let mut ids: Vec<usize> = (0..pairs).collect();
            ids.shuffle(&mut rng);
            let mut test = ids.split_off(plan.train);
            ids.sort_unstable();
            test.sort_unstable();
            Split { train: ids, test }
        })
        .collect())
}
