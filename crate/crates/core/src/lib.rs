//! Feature-based steganalysis of triangle meshes.
//!
//! The pipeline is: load or synthesize a cover mesh, embed a payload with
//! one of the watermarking embedders, smooth both meshes for calibration,
//! extract per-element features, reduce them to log-moment vectors and
//! train cover/stego classifiers on them.

pub mod calibration;
pub mod classify;
pub mod embed;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod mesh;
pub mod stats;
pub mod synth;

pub use calibration::{laplacian_smooth, SmoothingParams};
pub use classify::{Classifier, ClassifierKind, ClassifyError, SvmParams, TrainOptions};
pub use embed::{EmbedError, EmbedOutcome, EmbedParams, Payload, Variant};
pub use eval::{run_experiment, EvalError, ExperimentConfig, PairedCorpus, SplitPlan};
pub use features::{calibrated_features, ExtractionMeta, PerElementFeatures, PHI_COUNT};
pub use mesh::{load_mesh, normalize, MeshError, MeshFormat, MeshPair, TriMesh, Vec3};
pub use stats::{assemble, FeatureSet, FeatureVector, Label, StatsError};
