//! Cover/stego classifiers over standardized feature vectors.

pub mod fld;
pub mod grid;
pub mod model_io;
pub mod presets;
pub mod qda;
pub mod standardize;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::FeatureSet;

pub use fld::FldEnsemble;
pub use grid::{grid_search, GridResult};
pub use qda::QdaModel;
pub use standardize::Standardizer;
pub use svm::SvmModel;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least {need} {class} samples, found {found}")]
    TooFewSamples {
        class: &'static str,
        need: usize,
        found: usize,
    },
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} labels for {1} samples")]
    LabelCount(usize, usize),
    #[error("covariance stays singular after regularization")]
    SingularCovariance,
    #[error("within-class scatter is not positive definite")]
    DegenerateScatter,
    #[error("unknown classifier {0:?} (expected qda, fld or svm)")]
    UnknownKind(String),
    #[error("model file line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
}

/// Cover and stego row indices, after checking shapes and class sizes.
pub(crate) fn class_split(
    x: &[Vec<f64>],
    y: &[bool],
    min_per_class: usize,
) -> Result<(Vec<usize>, Vec<usize>), ClassifyError> {
    if x.len() != y.len() {
        return Err(ClassifyError::LabelCount(y.len(), x.len()));
    }
    let p = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != p) {
        return Err(ClassifyError::DimensionMismatch {
            expected: p,
            got: bad.len(),
        });
    }
    let (stego, cover): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| y[i]);
    for (class, idx) in [("cover", &cover), ("stego", &stego)] {
        if idx.len() < min_per_class.max(1) {
            return Err(ClassifyError::TooFewSamples {
                class,
                need: min_per_class.max(1),
                found: idx.len(),
            });
        }
    }
    Ok((cover, stego))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Qda,
    Svm,
    Fld,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [Self::Qda, Self::Svm, Self::Fld];

    pub fn name(self) -> &'static str {
        match self {
            Self::Qda => "qda",
            Self::Svm => "svm",
            Self::Fld => "fld",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qda" => Ok(Self::Qda),
            "svm" => Ok(Self::Svm),
            "fld" | "ensemble" => Ok(Self::Fld),
            _ => Err(ClassifyError::UnknownKind(s.to_string())),
        }
    }
}

/// How the SVM hyperparameters are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmParams {
    Fixed { c: f64, gamma: f64 },
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub kind: ClassifierKind,
    pub seed: u64,
    pub svm: SvmParams,
}

#[derive(Debug, Clone)]
pub enum Model {
    Qda(QdaModel),
    Fld(FldEnsemble),
    Svm(SvmModel),
}

/// A trained classifier together with the standardizer fitted on its training set.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub set: FeatureSet,
    pub seed: u64,
    pub standardizer: Standardizer,
    pub model: Model,
    /// Chosen point when the SVM was trained with a grid search.
    pub grid: Option<grid::GridPoint>,
}

impl Classifier {
    /// Standardizes `x` on itself and trains the selected model. Labels are
    /// `true` for stego.
    pub fn train(
        x: &[Vec<f64>],
        y: &[bool],
        set: FeatureSet,
        opts: &TrainOptions,
    ) -> Result<Self, ClassifyError> {
        class_split(x, y, 1)?;
        if x[0].len() != set.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: set.dim(),
                got: x[0].len(),
            });
        }
        let standardizer = Standardizer::fit(x);
        let z = standardizer.transform_all(x);
        let mut grid = None;
        let model = match opts.kind {
            ClassifierKind::Qda => Model::Qda(QdaModel::train(&z, y)?),
            ClassifierKind::Fld => Model::Fld(FldEnsemble::train(&z, y, opts.seed)?),
            ClassifierKind::Svm => {
                let (c, gamma) = match opts.svm {
                    SvmParams::Fixed { c, gamma } => (c, gamma),
                    SvmParams::Grid => {
                        let g = grid_search(&z, y, opts.seed)?;
                        log::info!(
                            "grid search chose C=10^{} gamma=2^{} (cv error {:.4})",
                            g.best.c_exp,
                            g.best.gamma_exp,
                            g.best.cv_error
                        );
                        grid = Some(g.best);
                        (g.best.c(), g.best.gamma())
                    }
                };
                Model::Svm(SvmModel::train(&z, y, c, gamma)?)
            }
        };
        Ok(Self {
            set,
            seed: opts.seed,
            standardizer,
            model,
            grid,
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            Model::Qda(_) => ClassifierKind::Qda,
            Model::Fld(_) => ClassifierKind::Fld,
            Model::Svm(_) => ClassifierKind::Svm,
        }
    }

    /// Real-valued score; positive means stego.
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if x.len() != self.standardizer.dim() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.standardizer.dim(),
                got: x.len(),
            });
        }
        let z = self.standardizer.transform(x);
        match &self.model {
            Model::Qda(m) => m.score(&z),
            Model::Fld(m) => m.score(&z),
            Model::Svm(m) => m.score(&z),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool, ClassifyError> {
        Ok(self.score(x)? > 0.0)
    }
}
