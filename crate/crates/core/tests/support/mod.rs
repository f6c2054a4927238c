//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use meshsteg_core::classify::svm::{dual_objective, rbf};
use meshsteg_core::stats::DEFAULT_EPSILON;
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut ChaCha8Rng, mean: &[f64], sd: &[f64]) -> Vec<f64> {
    mean.iter()
        .zip(sd)
        .map(|(m, s)| {
            let z: f64 = StandardNormal.sample(rng);
            m + s * z
        })
        .collect()
}

pub fn kernel(x: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = rbf(&x[i], &x[j], gamma);
        }
    }
    k
}

/// Global minimum of the box-constrained dual by enumerating which
/// variables sit at 0, at C, or strictly inside, and solving the
/// equality-constrained stationarity system of each face.
pub fn exact_dual_minimum(k: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        let fixed_sum: f64 = (0..n).map(|i| alpha[i] * y[i]).sum();
        if free.is_empty() {
            if fixed_sum.abs() > 1e-9 {
                continue;
            }
        } else {
            let m = free.len();
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut b = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                b[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] == 1)
                        .map(|j| q(i, j) * c)
                        .sum::<f64>();
            }
            b[m] = -fixed_sum;
            let Some(sol) = a.lu().solve(&b) else {
                continue;
            };
            if free
                .iter()
                .enumerate()
                .any(|(r, _)| sol[r] < -1e-12 || sol[r] > c + 1e-12)
            {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        best = best.min(dual_objective(&alpha, k, y));
    }
    best
}

/// AUC as the fraction of (stego, cover) pairs ranked correctly, ties 0.5.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut hits = 0.0;
    let mut pairs = 0.0;
    for (s, _) in scores.iter().zip(labels).filter(|p| *p.1) {
        for (c, _) in scores.iter().zip(labels).filter(|p| !*p.1) {
            pairs += 1.0;
            hits += if s > c {
                1.0
            } else if s == c {
                0.5
            } else {
                0.0
            };
        }
    }
    hits / pairs
}

/// Log-moments straight from their definitions.
pub fn brute_moments(raw: &[f64]) -> [f64; 4] {
    let logs: Vec<f64> = raw.iter().map(|x| (x + DEFAULT_EPSILON).ln()).collect();
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let central = |k: i32| logs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
    let var = central(2);
    if var < 1e-24 {
        return [mean, var, 0.0, 0.0];
    }
    [
        mean,
        var,
        central(3) / var.powf(1.5),
        central(4) / (var * var),
    ]
}
