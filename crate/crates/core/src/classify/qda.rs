//! Quadratic discriminant analysis with one Gaussian per class.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{class_split, ClassifyError};

/// Smallest accepted ratio of extreme covariance eigenvalues.
const MIN_RCOND: f64 = 1e-4;
const RIDGE_START: f64 = 1e-6;
const RIDGE_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct GaussianClass {
    pub mean: DVector<f64>,
    /// Regularised covariance.
    pub cov: DMatrix<f64>,
    pub prior: f64,
    /// Ridge factor actually applied (0 if none was needed).
    pub ridge: f64,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl GaussianClass {
    fn new(
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        prior: f64,
        ridge: f64,
    ) -> Result<Self, ClassifyError> {
        let chol = Cholesky::new(cov.clone()).ok_or(ClassifyError::SingularCovariance)?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(Self {
            mean,
            cov,
            prior,
            ridge,
            chol,
            log_det,
        })
    }

    /// `-1/2 log|S| - 1/2 (x - m)' S^-1 (x - m) + log prior`
    pub fn discriminant(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.mean;
        let maha = d.dot(&self.chol.solve(&d));
        -0.5 * self.log_det - 0.5 * maha + self.prior.ln()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

#[derive(Debug, Clone)]
pub struct QdaModel {
    pub cover: GaussianClass,
    pub stego: GaussianClass,
}

fn well_conditioned(cov: &DMatrix<f64>) -> bool {
    let ev = SymmetricEigen::new(cov.clone()).eigenvalues;
    let hi = ev.max();
    hi > 0.0 && ev.min() > MIN_RCOND * hi
}

/// Adds `tau * trace/p * I`, escalating `tau` by decades until the matrix is
/// comfortably positive definite. Returns the ridge used.
pub fn regularize(cov: &mut DMatrix<f64>) -> Result<f64, ClassifyError> {
    if well_conditioned(cov) {
        return Ok(0.0);
    }
    let p = cov.nrows() as f64;
    let scale = {
        let s = cov.trace() / p;
        if s > 1e-12 {
            s
        } else {
            1.0
        }
    };
    let mut tau = RIDGE_START;
    while tau <= RIDGE_LIMIT * (1.0 + 1e-9) {
        let mut c = cov.clone();
        for i in 0..c.nrows() {
            c[(i, i)] += tau * scale;
        }
        if well_conditioned(&c) {
            *cov = c;
            return Ok(tau);
        }
        tau *= 10.0;
    }
    Err(ClassifyError::SingularCovariance)
}

fn fit_class(x: &[Vec<f64>], idx: &[usize], prior: f64) -> Result<GaussianClass, ClassifyError> {
    let rows: Vec<&Vec<f64>> = idx.iter().map(|&i| &x[i]).collect();
    let p = rows[0].len();
    let n = rows.len() as f64;
    let mut mean = DVector::zeros(p);
    for r in &rows {
        mean += DVector::from_column_slice(r);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(p, p);
    for r in &rows {
        let d = DVector::from_column_slice(r) - &mean;
        cov.ger(1.0, &d, &d, 1.0);
    }
    cov /= n - 1.0;
    let ridge = regularize(&mut cov)?;
    GaussianClass::new(mean, cov, prior, ridge)
}

impl QdaModel {
    /// Fits class means, sample covariances and class-fraction priors.
    pub fn train(x: &[Vec<f64>], y: &[bool]) -> Result<Self, ClassifyError> {
        let (cover, stego) = class_split(x, y, 2)?;
        let n = x.len() as f64;
        Ok(Self {
            cover: fit_class(x, &cover, cover.len() as f64 / n)?,
            stego: fit_class(x, &stego, stego.len() as f64 / n)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.cover.mean.len()
    }

    /// `delta_stego(x) - delta_cover(x)`; positive means stego.
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if x.len() != self.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let v = DVector::from_column_slice(x);
        Ok(self.stego.discriminant(&v) - self.cover.discriminant(&v))
    }

    pub(crate) fn from_parts(
        cover: (DVector<f64>, DMatrix<f64>, f64, f64),
        stego: (DVector<f64>, DMatrix<f64>, f64, f64),
    ) -> Result<Self, ClassifyError> {
        Ok(Self {
            cover: GaussianClass::new(cover.0, cover.1, cover.2, cover.3)?,
            stego: GaussianClass::new(stego.0, stego.1, stego.2, stego.3)?,
        })
    }
}
