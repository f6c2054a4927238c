use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::classify::presets::{self, Scenario};
use crate::classify::{Classifier, ClassifierKind, SvmParams, TrainOptions};
use crate::stats::{FeatureSet, FeatureVector, Label};

use super::metrics::{detection_error, median, roc_auc, sample_std, Confusion};
use super::relevance::{pearson_relevance, Relevance, CATEGORIES};
use super::split::{make_splits, trial_seed, SplitPlan};
use super::EvalError;

/// Feature vectors of matched cover/stego pairs; pair `i` is `covers[i]`, `stegos[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCorpus {
    pub set: FeatureSet,
    pub covers: Vec<Vec<f64>>,
    pub stegos: Vec<Vec<f64>>,
}

impl PairedCorpus {
    pub fn new(
        set: FeatureSet,
        covers: Vec<Vec<f64>>,
        stegos: Vec<Vec<f64>>,
    ) -> Result<Self, EvalError> {
        if covers.len() != stegos.len() {
            return Err(EvalError::BadCorpus(format!(
                "{} covers but {} stegos",
                covers.len(),
                stegos.len()
            )));
        }
        if let Some(r) = covers.iter().chain(&stegos).find(|r| r.len() != set.dim()) {
            return Err(EvalError::BadCorpus(format!(
                "row of length {} in a {} corpus",
                r.len(),
                set
            )));
        }
        Ok(Self {
            set,
            covers,
            stegos,
        })
    }

    /// Rows alternate cover, stego, cover, stego, ...
    pub fn from_rows(rows: &[FeatureVector]) -> Result<Self, EvalError> {
        let set = rows
            .first()
            .map(|r| r.set)
            .ok_or_else(|| EvalError::BadCorpus("no feature rows".into()))?;
        if !rows.len().is_multiple_of(2) {
            return Err(EvalError::BadCorpus("odd number of rows".into()));
        }
        let mut covers = Vec::new();
        let mut stegos = Vec::new();
        for (k, pair) in rows.chunks(2).enumerate() {
            if pair[0].label != Some(Label::Cover) || pair[1].label != Some(Label::Stego) {
                return Err(EvalError::BadCorpus(format!(
                    "rows {} and {} are not a cover/stego pair",
                    2 * k,
                    2 * k + 1
                )));
            }
            covers.push(pair[0].values.clone());
            stegos.push(pair[1].values.clone());
        }
        Self::new(set, covers, stegos)
    }

    pub fn len(&self) -> usize {
        self.covers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covers.is_empty()
    }

    pub fn project(&self, target: FeatureSet) -> Result<Self, EvalError> {
        let idx = self.set.projection(target)?;
        let pick = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect()
        };
        Ok(Self {
            set: target,
            covers: pick(&self.covers),
            stegos: pick(&self.stegos),
        })
    }

    /// Rows and stego flags for the given pairs, cover before stego.
    pub fn gather(&self, pairs: &[usize]) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut x = Vec::with_capacity(2 * pairs.len());
        let mut y = Vec::with_capacity(2 * pairs.len());
        for &p in pairs {
            x.push(self.covers[p].clone());
            y.push(false);
            x.push(self.stegos[p].clone());
            y.push(true);
        }
        (x, y)
    }

    pub fn labelled(&self) -> (Vec<Vec<f64>>, Vec<bool>) {
        self.gather(&(0..self.len()).collect::<Vec<_>>())
    }
}

/// How SVM cells pick `(C, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SvmSelection {
    /// Tabulated values for the scenario, falling back to the default.
    Preset(Option<Scenario>),
    Grid,
    Fixed {
        c: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sets: Vec<FeatureSet>,
    pub classifiers: Vec<ClassifierKind>,
    pub plan: SplitPlan,
    pub svm: SvmSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub set: FeatureSet,
    pub classifier: ClassifierKind,
    pub trial: usize,
    pub confusion: Confusion,
    pub detection_error: f64,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
    /// `(C, gamma)` used by SVM cells.
    pub svm: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub set: FeatureSet,
    pub classifier: ClassifierKind,
    pub trials: usize,
    pub median_error: f64,
    pub median_error_count: f64,
    pub median_auc: f64,
    pub auc_std: f64,
    /// Trial whose AUC is nearest the median (lowest index on ties).
    pub median_trial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
    pub relevance: Option<Relevance>,
}

impl ExperimentReport {
    pub fn cell(&self, set: FeatureSet, classifier: ClassifierKind) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|c| c.set == set && c.classifier == classifier)
    }

    fn records(&self, set: FeatureSet, classifier: ClassifierKind) -> Vec<&TrialRecord> {
        self.trials
            .iter()
            .filter(|t| t.set == set && t.classifier == classifier)
            .collect()
    }
}

fn run_trial(
    corpus: &PairedCorpus,
    classifier: ClassifierKind,
    train: &[usize],
    test: &[usize],
    trial: usize,
    config: &ExperimentConfig,
) -> Result<TrialRecord, EvalError> {
    let (x, y) = corpus.gather(train);
    let svm = match config.svm {
        SvmSelection::Grid => SvmParams::Grid,
        SvmSelection::Fixed { c, gamma } => SvmParams::Fixed { c, gamma },
        SvmSelection::Preset(s) => {
            let (c, gamma) = presets::svm_params(corpus.set, s);
            SvmParams::Fixed { c, gamma }
        }
    };
    let opts = TrainOptions {
        kind: classifier,
        seed: trial_seed(config.plan.seed, trial),
        svm,
    };
    let model = Classifier::train(&x, &y, corpus.set, &opts)?;
    let (tx, ty) = corpus.gather(test);
    let scores = tx
        .iter()
        .map(|r| model.score(r))
        .collect::<Result<Vec<_>, _>>()?;
    let predicted: Vec<bool> = scores.iter().map(|&s| s > 0.0).collect();
    let confusion = Confusion::from_predictions(&predicted, &ty);
    let (roc, auc) = roc_auc(&scores, &ty)?;
    let svm = match &model.model {
        crate::classify::Model::Svm(m) => Some((m.c, m.gamma)),
        _ => None,
    };
    if let Some(g) = &model.grid {
        log::info!(
            "{} trial {trial}: grid chose C=10^{} gamma=2^{}",
            corpus.set,
            g.c_exp,
            g.gamma_exp
        );
    }
    Ok(TrialRecord {
        set: corpus.set,
        classifier,
        trial,
        confusion,
        detection_error: detection_error(&confusion)?,
        auc,
        roc,
        svm,
    })
}

fn summarize(records: &[&TrialRecord]) -> CellSummary {
    let errors: Vec<f64> = records.iter().map(|r| r.detection_error).collect();
    let counts: Vec<f64> = records
        .iter()
        .map(|r| r.confusion.errors() as f64)
        .collect();
    let aucs: Vec<f64> = records.iter().map(|r| r.auc).collect();
    let median_auc = median(&aucs);
    let median_trial = records
        .iter()
        .min_by(|a, b| {
            (a.auc - median_auc)
                .abs()
                .total_cmp(&(b.auc - median_auc).abs())
                .then(a.trial.cmp(&b.trial))
        })
        .map_or(0, |r| r.trial);
    CellSummary {
        set: records[0].set,
        classifier: records[0].classifier,
        trials: records.len(),
        median_error: median(&errors),
        median_error_count: median(&counts),
        median_auc,
        auc_std: sample_std(&aucs),
        median_trial,
    }
}

/// Trains and scores every (set, classifier, trial) cell. Results depend
/// only on the corpus and the configuration, not on thread scheduling.
pub fn run_experiment(
    corpus: &PairedCorpus,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, EvalError> {
    let splits = make_splits(corpus.len(), &config.plan)?;
    let projected = config
        .sets
        .iter()
        .map(|&s| corpus.project(s))
        .collect::<Result<Vec<_>, _>>()?;
    let n_trials = splits.len();
    let jobs: Vec<(usize, ClassifierKind, usize)> = (0..projected.len())
        .flat_map(|s| {
            config
                .classifiers
                .iter()
                .flat_map(move |&c| (0..n_trials).map(move |t| (s, c, t)))
        })
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(s, c, t)| {
            log::debug!("{} {} trial {t}", projected[s].set, c);
            run_trial(
                &projected[s],
                c,
                &splits[t].train,
                &splits[t].test,
                t,
                config,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = ExperimentReport {
        trials,
        summary: Vec::new(),
        relevance: None,
    };
    for &set in &config.sets {
        for &clf in &config.classifiers {
            let recs = report.records(set, clf);
            if !recs.is_empty() {
                let s = summarize(&recs);
                report.summary.push(s);
            }
        }
    }
    let (x, y) = corpus.labelled();
    report.relevance = pearson_relevance(&x, &y, corpus.set).ok();
    Ok(report)
}

fn csv_err(e: csv::Error) -> EvalError {
    EvalError::Io(std::io::Error::other(e))
}

/// Writes `report.csv`, `summary.csv`, one `roc_<set>_<clf>.csv` per cell
/// and, when available, `relevance.csv` and `relevance_features.csv`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("report.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record([
        "set",
        "classifier",
        "trial",
        "tp",
        "fp",
        "tn",
        "fn",
        "errors",
        "detection_error",
        "auc",
        "svm_c",
        "svm_gamma",
    ])
    .map_err(csv_err)?;
    for t in &report.trials {
        let (c, g) = t.svm.map_or((String::new(), String::new()), |(c, g)| {
            (c.to_string(), g.to_string())
        });
        w.write_record([
            t.set.to_string(),
            t.classifier.to_string(),
            t.trial.to_string(),
            t.confusion.tp.to_string(),
            t.confusion.fp.to_string(),
            t.confusion.tn.to_string(),
            t.confusion.fn_.to_string(),
            t.confusion.errors().to_string(),
            t.detection_error.to_string(),
            t.auc.to_string(),
            c,
            g,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record([
        "set",
        "classifier",
        "trials",
        "median_error",
        "median_error_count",
        "median_auc",
        "auc_std",
    ])
    .map_err(csv_err)?;
    for s in &report.summary {
        w.write_record([
            s.set.to_string(),
            s.classifier.to_string(),
            s.trials.to_string(),
            s.median_error.to_string(),
            s.median_error_count.to_string(),
            s.median_auc.to_string(),
            s.auc_std.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(path);

    for s in &report.summary {
        let rec = report
            .trials
            .iter()
            .find(|t| t.set == s.set && t.classifier == s.classifier && t.trial == s.median_trial)
            .expect("summary trial exists");
        let path = dir.join(format!("roc_{}_{}.csv", s.set.slug(), s.classifier));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(["fpr", "tpr"]).map_err(csv_err)?;
        for (x, y) in &rec.roc {
            w.write_record([x.to_string(), y.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        written.push(path);
    }

    if let Some(r) = &report.relevance {
        written.extend(write_relevance(r, dir)?);
    }
    Ok(written)
}

/// Writes `relevance.csv` (category means) and `relevance_features.csv`.
pub fn write_relevance(r: &Relevance, dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("relevance.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["category", "phis", "mean_relevance"])
        .map_err(csv_err)?;
    for &(c, v) in &r.categories {
        let phis = CATEGORIES[c - 1]
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([c.to_string(), phis, v.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("relevance_features.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["feature", "phi", "moment", "relevance"])
        .map_err(csv_err)?;
    let phis = r.set.phis();
    for (j, v) in r.per_feature.iter().enumerate() {
        w.write_record([
            j.to_string(),
            phis[j / 4].to_string(),
            ["mean", "variance", "skewness", "kurtosis"][j % 4].to_string(),
            v.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}
