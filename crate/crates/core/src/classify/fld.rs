//! Random-subspace ensemble of Fisher linear discriminants.
//!
//! Each member sees a bootstrap sample (drawn per class) and a random
//! feature subset. The subset size is picked from a small ladder by
//! out-of-bag error, and members are added in batches until that error
//! settles.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{class_split, ClassifyError};

const SCATTER_RIDGE: f64 = 1e-6;
const BATCH: usize = 10;
const MIN_LEARNERS: usize = 20;
const MAX_LEARNERS: usize = 500;
const OOB_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FldLearner {
    pub subset: Vec<usize>,
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl FldLearner {
    /// `w . x[subset] - threshold`; positive votes stego.
    pub fn project(&self, x: &[f64]) -> f64 {
        self.subset
            .iter()
            .zip(&self.weights)
            .map(|(&i, w)| w * x[i])
            .sum::<f64>()
            - self.threshold
    }

    pub fn votes_stego(&self, x: &[f64]) -> bool {
        self.project(x) > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FldEnsemble {
    pub dim: usize,
    pub learners: Vec<FldLearner>,
    pub d_sub: usize,
    /// OOB error after each batch, for the chosen subset size.
    pub oob_trace: Vec<f64>,
}

/// Fisher discriminant restricted to the columns in `subset`.
fn fit_learner(
    x: &[Vec<f64>],
    cover: &[usize],
    stego: &[usize],
    subset: Vec<usize>,
) -> Result<FldLearner, ClassifyError> {
    let d = subset.len();
    let gather = |i: usize| DVector::from_iterator(d, subset.iter().map(|&j| x[i][j]));
    let mean = |rows: &[usize]| {
        rows.iter().fold(DVector::zeros(d), |a, &i| a + gather(i)) / rows.len() as f64
    };
    let (m0, m1) = (mean(cover), mean(stego));
    let mut sw = DMatrix::from_diagonal_element(d, d, SCATTER_RIDGE);
    for (rows, m) in [(cover, &m0), (stego, &m1)] {
        for &i in rows {
            let r = gather(i) - m;
            sw.ger(1.0, &r, &r, 1.0);
        }
    }
    let chol = sw.cholesky().ok_or(ClassifyError::DegenerateScatter)?;
    let w = chol.solve(&(&m1 - &m0));
    if !w.iter().all(|v| v.is_finite()) {
        return Err(ClassifyError::DegenerateScatter);
    }
    let threshold = w.dot(&((&m0 + &m1) * 0.5));
    Ok(FldLearner {
        subset,
        weights: w.iter().copied().collect(),
        threshold,
    })
}

/// Deterministic per-learner seed.
fn learner_seed(seed: u64, d_sub: usize, index: usize) -> u64 {
    let mut s = seed ^ 0x9E37_79B9_7F4A_7C15;
    s = s.wrapping_mul(0xBF58_476D_1CE4_E5B9) ^ d_sub as u64;
    s = s.wrapping_mul(0x94D0_49BB_1331_11EB) ^ index as u64;
    s
}

struct Trained {
    learner: FldLearner,
    in_bag: Vec<bool>,
}

fn train_member(
    x: &[Vec<f64>],
    cover: &[usize],
    stego: &[usize],
    d_sub: usize,
    seed: u64,
) -> Result<Trained, ClassifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = x[0].len();
    let mut subset = sample(&mut rng, p, d_sub).into_vec();
    subset.sort_unstable();
    let mut in_bag = vec![false; x.len()];
    let mut draw = |pool: &[usize], rng: &mut ChaCha8Rng| -> Vec<usize> {
        (0..pool.len())
            .map(|_| {
                let i = pool[rng.random_range(0..pool.len())];
                in_bag[i] = true;
                i
            })
            .collect()
    };
    let bc = draw(cover, &mut rng);
    let bs = draw(stego, &mut rng);
    let learner = fit_learner(x, &bc, &bs, subset)?;
    Ok(Trained { learner, in_bag })
}

struct Candidate {
    d_sub: usize,
    members: Vec<Trained>,
    trace: Vec<f64>,
}

impl Candidate {
    fn oob_error(&self, x: &[Vec<f64>], y: &[bool]) -> f64 {
        let (mut wrong, mut counted) = (0usize, 0usize);
        for (i, (row, &label)) in x.iter().zip(y).enumerate() {
            let (mut stego, mut total) = (0usize, 0usize);
            for m in self.members.iter().filter(|m| !m.in_bag[i]) {
                total += 1;
                stego += usize::from(m.learner.votes_stego(row));
            }
            if total == 0 {
                continue;
            }
            counted += 1;
            if (2 * stego > total) != label {
                wrong += 1;
            }
        }
        if counted == 0 {
            0.5
        } else {
            wrong as f64 / counted as f64
        }
    }
}

fn grow(
    x: &[Vec<f64>],
    y: &[bool],
    cover: &[usize],
    stego: &[usize],
    d_sub: usize,
    seed: u64,
) -> Result<Candidate, ClassifyError> {
    let mut c = Candidate {
        d_sub,
        members: Vec::new(),
        trace: Vec::new(),
    };
    while c.members.len() < MAX_LEARNERS {
        let start = c.members.len();
        let batch: Vec<Trained> = (start..start + BATCH)
            .into_par_iter()
            .map(|k| train_member(x, cover, stego, d_sub, learner_seed(seed, d_sub, k)))
            .collect::<Result<_, _>>()?;
        c.members.extend(batch);
        let err = c.oob_error(x, y);
        let settled = c.trace.last().is_some_and(|&prev: &f64| {
            let change = (err - prev).abs();
            change == 0.0 || (prev > 0.0 && change / prev < OOB_TOLERANCE)
        });
        c.trace.push(err);
        if settled && c.members.len() >= MIN_LEARNERS {
            break;
        }
    }
    Ok(c)
}

/// Candidate subset sizes `ceil(p/8), ceil(p/4), ceil(p/2)` and the largest
/// size the smaller class can support, deduplicated and ascending.
pub fn subspace_ladder(p: usize, n_min: usize) -> Vec<usize> {
    let cap = p.min(n_min.saturating_sub(1)).max(1);
    let mut ladder: Vec<usize> = [p.div_ceil(8), p.div_ceil(4), p.div_ceil(2), cap]
        .into_iter()
        .map(|d| d.clamp(1, cap))
        .collect();
    ladder.sort_unstable();
    ladder.dedup();
    ladder
}

impl FldEnsemble {
    pub fn train(x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<Self, ClassifyError> {
        let (cover, stego) = class_split(x, y, 10)?;
        let p = x[0].len();
        let ladder = subspace_ladder(p, cover.len().min(stego.len()));
        let candidates: Vec<Candidate> = ladder
            .par_iter()
            .map(|&d| grow(x, y, &cover, &stego, d, seed))
            .collect::<Result<_, _>>()?;
        let best = candidates
            .into_iter()
            .min_by(|a, b| {
                let ea = *a.trace.last().unwrap_or(&1.0);
                let eb = *b.trace.last().unwrap_or(&1.0);
                ea.total_cmp(&eb).then(a.d_sub.cmp(&b.d_sub))
            })
            .expect("ladder is never empty");
        log::debug!(
            "fld ensemble: d_sub={} L={} oob={:?}",
            best.d_sub,
            best.members.len(),
            best.trace.last()
        );
        Ok(Self {
            dim: p,
            d_sub: best.d_sub,
            oob_trace: best.trace,
            learners: best.members.into_iter().map(|m| m.learner).collect(),
        })
    }

    pub fn oob_error(&self) -> f64 {
        self.oob_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn stego_votes(&self, x: &[f64]) -> usize {
        self.learners.iter().filter(|l| l.votes_stego(x)).count()
    }

    /// Fraction of stego votes minus one half; a tie scores 0 and reads as cover.
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if x.len() != self.dim {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.stego_votes(x) as f64 / self.learners.len() as f64 - 0.5)
    }
}
