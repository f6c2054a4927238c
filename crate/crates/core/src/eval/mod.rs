//! Splits, metrics, relevance analysis and the experiment driver.

pub mod corpus;
pub mod experiment;
pub mod metrics;
pub mod relevance;
pub mod split;

use thiserror::Error;

use crate::classify::ClassifyError;
use crate::stats::StatsError;

pub use corpus::{synthetic_corpus, CorpusStats};
pub use experiment::{
    run_experiment, write_relevance, write_report, CellSummary, ExperimentConfig, ExperimentReport,
    PairedCorpus, SvmSelection, TrialRecord,
};
pub use metrics::{detection_error, roc_auc, Confusion};
pub use relevance::{pearson_relevance, Relevance};
pub use split::{make_splits, Split, SplitPlan};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("plan has no trials")]
    EmptyPlan,
    #[error("{train} + {test} pairs requested but the corpus has {pairs}")]
    SizeMismatch {
        pairs: usize,
        train: usize,
        test: usize,
    },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("both classes are required")]
    SingleClass,
    #[error("invalid corpus: {0}")]
    BadCorpus(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
