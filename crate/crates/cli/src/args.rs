use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use meshsteg_core::classify::presets::Scenario;
use meshsteg_core::stats::DEFAULT_EPSILON;
use meshsteg_core::{ClassifierKind, FeatureSet, SmoothingParams, SplitPlan, Variant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "meshsteg", version, about = "Steganalysis of triangle meshes")]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Write seeded synthetic cover meshes as OFF files.
    Synth(SynthArgs),
    /// Embed a payload in every mesh of a directory.
    Embed(EmbedArgs),
    /// Laplacian-smooth a mesh file or a directory of meshes.
    Smooth(SmoothArgs),
    /// Extract log-moment feature vectors for every manifest pair.
    Extract(ExtractArgs),
    /// Train one classifier on a feature CSV.
    Train(TrainArgs),
    /// Score feature rows with a trained model.
    Score(ScoreArgs),
    /// Repeated random-split evaluation over sets and classifiers.
    Evaluate(EvaluateArgs),
    /// Per-feature and per-category Pearson relevance.
    Relevance(RelevanceArgs),
    /// Re-run a command from its config echo.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// cho, yang or chao.
    #[arg(long, default_value = "cho")]
    pub variant: Variant,
    /// Payload bits per mesh (default: 64 for cho, full capacity otherwise).
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long, default_value_t = 0.04)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.001)]
    pub delta_k: f64,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    #[arg(long, default_value_t = 20)]
    pub n_thr: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 10_000)]
    pub intervals: usize,
    /// Master seed for the per-mesh payloads.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory of .off / .obj cover meshes.
    pub covers: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize)]
pub struct SmoothingArgs {
    #[arg(long, default_value_t = 3)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.3)]
    pub weight: f64,
}

impl From<SmoothingArgs> for SmoothingParams {
    fn from(a: SmoothingArgs) -> Self {
        Self {
            iterations: a.iterations,
            weight: a.weight,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    /// A mesh file or a directory of meshes.
    pub input: PathBuf,
    /// Output OFF file, or directory when the input is one.
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExtractArgs {
    #[arg(long, default_value = "lfs76")]
    pub set: FeatureSet,
    #[command(flatten)]
    pub smoothing: SmoothingArgs,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Also write per-element feature values, one CSV per mesh.
    #[arg(long)]
    pub dump_elements: Option<PathBuf>,
    pub manifest: PathBuf,
    pub out: PathBuf,
}

/// SVM `(C, gamma)` selection shared by `train` and `evaluate`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SvmArgs {
    /// Cross-validated grid search over C and gamma.
    #[arg(long, conflicts_with_all = ["c", "preset"])]
    pub grid: bool,
    #[arg(long, requires = "gamma", conflicts_with = "preset")]
    pub c: Option<f64>,
    #[arg(long, requires = "c")]
    pub gamma: Option<f64>,
    /// Tabulated setting: cho:ALPHA:BITS, yang:BINS or chao:LAYERS.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<String>,
}

pub fn parse_preset(s: &str) -> Result<String, String> {
    scenario(s).map(|_| s.to_string())
}

pub fn scenario(s: &str) -> Result<Scenario, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        ["cho", a, b] => Ok(Scenario::Cho {
            alpha: a.parse().map_err(|e| format!("{a:?}: {e}"))?,
            bits: num(b)?,
        }),
        ["yang", k] => Ok(Scenario::Yang { bins: num(k)? }),
        ["chao", l] => Ok(Scenario::Chao { layers: num(l)? }),
        _ => Err(format!(
            "preset {s:?} is not cho:ALPHA:BITS, yang:BINS or chao:LAYERS"
        )),
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, default_value = "fld")]
    pub clf: ClassifierKind,
    /// Train on this subset of the CSV's feature set.
    #[arg(long)]
    pub set: Option<FeatureSet>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub svm: SvmArgs,
    pub features: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScoreArgs {
    pub model: PathBuf,
    pub features: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long, value_delimiter = ',', default_value = "yang40,lfs52,lfs76")]
    pub sets: Vec<FeatureSet>,
    #[arg(long, value_delimiter = ',', default_value = "qda,svm,fld")]
    pub clf: Vec<ClassifierKind>,
    #[arg(long, default_value_t = SplitPlan::default().trials)]
    pub trials: usize,
    #[arg(long, default_value_t = SplitPlan::default().train)]
    pub train: usize,
    #[arg(long, default_value_t = SplitPlan::default().test)]
    pub test: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub svm: SvmArgs,
    pub features: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RelevanceArgs {
    /// Restrict to this subset of the CSV's feature set.
    #[arg(long)]
    pub set: Option<FeatureSet>,
    pub features: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub config: PathBuf,
    /// Write to this output path instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
