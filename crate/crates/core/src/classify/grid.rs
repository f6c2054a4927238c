//! Cross-validated `(C, gamma)` search on the grid `C = 10^i`, `gamma = 2^j`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::svm::{distance_matrix, SvmModel};
use super::{class_split, ClassifyError};

pub const FOLDS: usize = 5;
pub const C_EXPONENTS: RangeInclusive<i32> = 1..=7;
pub const GAMMA_EXPONENTS: RangeInclusive<i32> = -12..=-1;
pub const MAX_EXPANSIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c_exp: i32,
    pub gamma_exp: i32,
    pub cv_error: f64,
}

impl GridPoint {
    pub fn c(&self) -> f64 {
        10f64.powi(self.c_exp)
    }

    pub fn gamma(&self) -> f64 {
        2f64.powi(self.gamma_exp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: GridPoint,
    /// Every evaluated point, ordered by `(c_exp, gamma_exp)`.
    pub evaluated: Vec<GridPoint>,
    pub expansions: usize,
}

/// Fold id per sample; each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for (r, i) in idx.into_iter().enumerate() {
            fold[i] = r % k;
        }
    }
    fold
}

struct FoldData {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<bool>,
    train_dist: Vec<f64>,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<bool>,
}

fn fold_data(x: &[Vec<f64>], y: &[bool], folds: &[usize], k: usize) -> Vec<FoldData> {
    (0..k)
        .map(|f| {
            let (tr, te): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| folds[i] != f);
            let train_x: Vec<Vec<f64>> = tr.iter().map(|&i| x[i].clone()).collect();
            FoldData {
                train_dist: distance_matrix(&train_x),
                train_y: tr.iter().map(|&i| y[i]).collect(),
                train_x,
                test_x: te.iter().map(|&i| x[i].clone()).collect(),
                test_y: te.iter().map(|&i| y[i]).collect(),
            }
        })
        .collect()
}

fn cv_error(folds: &[FoldData], c: f64, gamma: f64) -> f64 {
    let (mut wrong, mut total) = (0usize, 0usize);
    for f in folds {
        if f.test_x.is_empty() || !f.train_y.contains(&true) || !f.train_y.contains(&false) {
            continue;
        }
        let m = SvmModel::train_on_distances(&f.train_x, &f.train_y, &f.train_dist, c, gamma);
        for (x, &label) in f.test_x.iter().zip(&f.test_y) {
            total += 1;
            if (m.decision(x) > 0.0) != label {
                wrong += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        wrong as f64 / total as f64
    }
}

/// Grid search over the default ranges with boundary expansion.
pub fn grid_search(x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<GridResult, ClassifyError> {
    grid_search_with(x, y, seed, C_EXPONENTS, GAMMA_EXPONENTS, MAX_EXPANSIONS)
}

/// Lowest CV error wins; ties go to the smaller `C`, then the smaller `gamma`.
/// A winner on the edge of the grid extends that edge by one step.
pub fn grid_search_with(
    x: &[Vec<f64>],
    y: &[bool],
    seed: u64,
    c_range: RangeInclusive<i32>,
    gamma_range: RangeInclusive<i32>,
    max_expansions: usize,
) -> Result<GridResult, ClassifyError> {
    class_split(x, y, FOLDS)?;
    let folds = fold_data(x, y, &stratified_folds(y, FOLDS, seed), FOLDS);
    let (mut c_lo, mut c_hi) = (*c_range.start(), *c_range.end());
    let (mut g_lo, mut g_hi) = (*gamma_range.start(), *gamma_range.end());
    let mut table: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    let mut expansions = 0;
    loop {
        let todo: Vec<(i32, i32)> = (c_lo..=c_hi)
            .flat_map(|i| (g_lo..=g_hi).map(move |j| (i, j)))
            .filter(|key| !table.contains_key(key))
            .collect();
        let results: Vec<((i32, i32), f64)> = todo
            .par_iter()
            .map(|&(i, j)| ((i, j), cv_error(&folds, 10f64.powi(i), 2f64.powi(j))))
            .collect();
        table.extend(results);
        let (&(bi, bj), &err) = table
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)))
            .expect("grid is never empty");
        log::debug!(
            "grid: best C=10^{bi} gamma=2^{bj} cv={err:.4} over {} points",
            table.len()
        );
        let mut grew = false;
        if expansions < max_expansions {
            if bi == c_lo {
                c_lo -= 1;
                grew = true;
            } else if bi == c_hi {
                c_hi += 1;
                grew = true;
            }
            if bj == g_lo {
                g_lo -= 1;
                grew = true;
            } else if bj == g_hi {
                g_hi += 1;
                grew = true;
            }
        }
        if !grew {
            return Ok(GridResult {
                best: GridPoint {
                    c_exp: bi,
                    gamma_exp: bj,
                    cv_error: err,
                },
                evaluated: table
                    .into_iter()
                    .map(|((c_exp, gamma_exp), cv_error)| GridPoint {
                        c_exp,
                        gamma_exp,
                        cv_error,
                    })
                    .collect(),
                expansions,
            });
        }
        expansions += 1;
    }
}
