//! Log-moment statistics and the named feature sets.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{PerElementFeatures, PHI_COUNT};

/// Default floor added inside the logarithm.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Below this second central moment, skewness and kurtosis are reported as 0.
const FLAT_M2: f64 = 1e-24;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot take moments of an empty array (phi{0})")]
    EmptyArray(usize),
    #[error("feature phi{0} is missing")]
    MissingFeature(usize),
    #[error("unknown feature set {0:?}")]
    UnknownSet(String),
    #[error("no feature set has {0} dimensions")]
    UnknownDimension(usize),
    #[error("feature set {from} does not contain {to}")]
    NotASubset { from: FeatureSet, to: FeatureSet },
    #[error("row {row}: {msg}")]
    BadRow { row: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Population mean, variance, skewness and (non-excess) kurtosis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentQuad {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl MomentQuad {
    pub fn to_array(self) -> [f64; 4] {
        [self.mean, self.variance, self.skewness, self.kurtosis]
    }
}

/// Moments of `ln(raw + epsilon)`. Returns `None` for an empty array.
pub fn log_moments(raw: &[f64], epsilon: f64) -> Option<MomentQuad> {
    if raw.is_empty() {
        return None;
    }
    let n = raw.len() as f64;
    let logs: Vec<f64> = raw.iter().map(|&x| (x + epsilon).ln()).collect();
    // Shifted sum: a constant array gets its mean and zero spread exactly.
    let pivot = logs[0];
    let mean = pivot + logs.iter().map(|x| x - pivot).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in &logs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 < FLAT_M2 {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    };
    Some(MomentQuad {
        mean,
        variance: m2,
        skewness,
        kurtosis,
    })
}

/// Named feature sets. Each is four moments per phi, phi ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    /// phi1..phi10
    Yang40,
    /// phi1..phi11
    Yang40Vnf4,
    /// phi1..phi10, phi12, phi13
    Yang40Cf8,
    /// phi1..phi13
    Lfs52,
    /// phi14..phi19
    Scf24,
    /// phi1..phi19
    Lfs76,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 6] = [
        Self::Yang40,
        Self::Yang40Vnf4,
        Self::Yang40Cf8,
        Self::Lfs52,
        Self::Scf24,
        Self::Lfs76,
    ];

    /// 1-based phi indices, ascending.
    pub fn phis(self) -> Vec<usize> {
        match self {
            Self::Yang40 => (1..=10).collect(),
            Self::Yang40Vnf4 => (1..=11).collect(),
            Self::Yang40Cf8 => (1..=10).chain(12..=13).collect(),
            Self::Lfs52 => (1..=13).collect(),
            Self::Scf24 => (14..=19).collect(),
            Self::Lfs76 => (1..=PHI_COUNT).collect(),
        }
    }

    pub fn dim(self) -> usize {
        4 * self.phis().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Yang40 => "yang40",
            Self::Yang40Vnf4 => "yang40+vnf4",
            Self::Yang40Cf8 => "yang40+cf8",
            Self::Lfs52 => "lfs52",
            Self::Scf24 => "scf24",
            Self::Lfs76 => "lfs76",
        }
    }

    /// File-name-safe identifier.
    pub fn slug(self) -> String {
        self.name().replace('+', "_")
    }

    pub fn from_dim(dim: usize) -> Result<Self, StatsError> {
        match dim {
            40 => Ok(Self::Yang40),
            44 => Ok(Self::Yang40Vnf4),
            48 => Ok(Self::Yang40Cf8),
            52 => Ok(Self::Lfs52),
            24 => Ok(Self::Scf24),
            76 => Ok(Self::Lfs76),
            d => Err(StatsError::UnknownDimension(d)),
        }
    }

    /// Positions of `target`'s entries within a vector of this set.
    pub fn projection(self, target: FeatureSet) -> Result<Vec<usize>, StatsError> {
        let mine = self.phis();
        let mut idx = Vec::with_capacity(target.dim());
        for phi in target.phis() {
            let pos = mine
                .iter()
                .position(|&p| p == phi)
                .ok_or(StatsError::NotASubset {
                    from: self,
                    to: target,
                })?;
            idx.extend((0..4).map(|m| 4 * pos + m));
        }
        Ok(idx)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "+");
        Self::ALL
            .into_iter()
            .find(|set| set.name() == norm)
            .ok_or_else(|| StatsError::UnknownSet(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Cover,
    Stego,
}

impl Label {
    pub fn is_stego(self) -> bool {
        self == Self::Stego
    }

    pub fn as_digit(self) -> u8 {
        match self {
            Self::Cover => 0,
            Self::Stego => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub set: FeatureSet,
    pub label: Option<Label>,
}

/// Four log-moments of each phi in `set`, phi ascending.
pub fn assemble(
    features: &PerElementFeatures,
    set: FeatureSet,
    epsilon: f64,
) -> Result<FeatureVector, StatsError> {
    let mut values = Vec::with_capacity(set.dim());
    for phi in set.phis() {
        let arr = features
            .arrays()
            .get(phi - 1)
            .ok_or(StatsError::MissingFeature(phi))?;
        let q = log_moments(arr, epsilon).ok_or(StatsError::EmptyArray(phi))?;
        values.extend(q.to_array());
    }
    Ok(FeatureVector {
        values,
        set,
        label: None,
    })
}

/// Column names `f000`, `f001`, ...
pub fn column_names(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("f{i:03}")).collect()
}

/// Writes `label,f000..` rows; an unlabeled row has an empty label cell.
pub fn write_feature_csv(out: impl Write, rows: &[FeatureVector]) -> Result<(), StatsError> {
    let dim = rows.first().map_or(0, |r| r.values.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend(column_names(dim));
    w.write_record(&header)?;
    for (i, r) in rows.iter().enumerate() {
        if r.values.len() != dim {
            return Err(StatsError::BadRow {
                row: i,
                msg: format!("expected {dim} values, got {}", r.values.len()),
            });
        }
        let mut rec = vec![r.label.map_or(String::new(), |l| l.as_digit().to_string())];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a feature CSV; the set is inferred from the column count.
pub fn read_feature_csv(input: impl Read) -> Result<Vec<FeatureVector>, StatsError> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len().saturating_sub(1);
    let set = FeatureSet::from_dim(dim)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |msg: String| StatsError::BadRow { row: i, msg };
        let label = match rec.get(0).map(str::trim) {
            Some("0") => Some(Label::Cover),
            Some("1") => Some(Label::Stego),
            Some("") | None => None,
            Some(other) => return Err(bad(format!("label {other:?} is not 0 or 1"))),
        };
        let values = rec
            .iter()
            .skip(1)
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("invalid value {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(bad(format!("expected {dim} values, got {}", values.len())));
        }
        rows.push(FeatureVector { values, set, label });
    }
    Ok(rows)
}
