//! Soft-margin SVM with a Gaussian RBF kernel, trained by SMO with
//! second-order working-set selection.

use super::{class_split, ClassifyError};

pub const KKT_TOLERANCE: f64 = 1e-3;
pub const MAX_ITERATIONS: usize = 100_000;
const TAU: f64 = 1e-12;

/// `exp(-gamma * |a - b|^2)`
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * sq_dist(a, b)).exp()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pairwise squared distances, row-major `n x n`.
pub fn distance_matrix(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(&x[i], &x[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Solution of the dual problem on a precomputed kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DualSolution {
    /// `1/2 a'Qa - sum(a)` with `Q_ij = y_i y_j K_ij`.
    pub fn objective(&self, kernel: &[f64], y: &[f64]) -> f64 {
        dual_objective(&self.alpha, kernel, y)
    }
}

pub fn dual_objective(alpha: &[f64], kernel: &[f64], y: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i * n + j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// SMO on `min 1/2 a'Qa - e'a, 0 <= a <= c, y'a = 0` for a full kernel matrix.
pub fn solve_dual(kernel: &[f64], y: &[f64], c: f64, eps: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let is_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let is_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i maximises -y G over the "up" set.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                if b > 0.0 {
                    let mut a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best {
                        best = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if g_max - g_min < eps {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }
    let rho = offset(&alpha, &grad, y, c);
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

/// Mean of `y G` over free variables, or the midpoint of the feasible range.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// `alpha_i * y_i` for each support vector.
    pub coef: Vec<f64>,
    pub support: Vec<Vec<f64>>,
    pub offset: f64,
    pub gamma: f64,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SvmModel {
    pub fn train(x: &[Vec<f64>], y: &[bool], c: f64, gamma: f64) -> Result<Self, ClassifyError> {
        class_split(x, y, 1)?;
        let d = distance_matrix(x);
        Ok(Self::train_on_distances(x, y, &d, c, gamma))
    }

    /// Training with squared distances already computed (reused across a grid).
    pub fn train_on_distances(
        x: &[Vec<f64>],
        y: &[bool],
        dist: &[f64],
        c: f64,
        gamma: f64,
    ) -> Self {
        let kernel: Vec<f64> = dist.iter().map(|d| (-gamma * d).exp()).collect();
        let ys: Vec<f64> = y.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
        let sol = solve_dual(&kernel, &ys, c, KKT_TOLERANCE, MAX_ITERATIONS);
        if !sol.converged {
            log::warn!(
                "svm: no convergence after {} iterations (C={c}, gamma={gamma})",
                sol.iterations
            );
        }
        let (coef, support) = sol
            .alpha
            .iter()
            .zip(&ys)
            .zip(x)
            .filter(|((a, _), _)| **a > 0.0)
            .map(|((a, s), row)| (a * s, row.clone()))
            .unzip();
        Self {
            coef,
            support,
            offset: sol.rho,
            gamma,
            c,
            converged: sol.converged,
            iterations: sol.iterations,
        }
    }

    pub fn dim(&self) -> usize {
        self.support.first().map_or(0, Vec::len)
    }

    /// `sum_i alpha_i y_i G(x_i, x) - b`
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.coef
            .iter()
            .zip(&self.support)
            .map(|(a, s)| a * rbf(s, x, self.gamma))
            .sum::<f64>()
            - self.offset
    }

    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if !self.support.is_empty() && x.len() != self.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.decision(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_split_evenly() {
        let x = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let m = SvmModel::train(&x, &[false, true], 10.0, 0.5).unwrap();
        assert_eq!(m.coef.len(), 2);
        assert!((m.coef[0] + m.coef[1]).abs() < 1e-12);
        assert!(m.decision(&[1.0, 0.0]).abs() < 1e-12);
        assert!(m.decision(&[1.0, 3.0]).abs() < 1e-12);
        assert!(m.decision(&[2.0, 0.0]) > 0.0);
    }

    #[test]
    fn handcrafted_model_matches_kernel_sum() {
        let m = SvmModel {
            coef: vec![0.7, -0.4],
            support: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
            offset: 0.1,
            gamma: 0.25,
            c: 1.0,
            converged: true,
            iterations: 0,
        };
        let x = [0.5, 0.5];
        let expected = 0.7 * (-0.25f64 * 0.5).exp() - 0.4 * (-0.25f64 * 2.5).exp() - 0.1;
        assert!((m.decision(&x) - expected).abs() < 1e-12);
    }
}
