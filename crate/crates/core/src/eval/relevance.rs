use crate::stats::FeatureSet;

use super::EvalError;

/// The ten feature categories as 1-based phi groups.
pub const CATEGORIES: [&[usize]; 10] = [
    &[1, 2, 3],
    &[7],
    &[4, 5, 6],
    &[8],
    &[10],
    &[9],
    &[11],
    &[12, 13],
    &[14, 15, 16],
    &[17, 18, 19],
];

/// `|corr(x, y)|`, or 0 when either side has zero variance.
pub fn abs_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).abs().min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relevance {
    pub set: FeatureSet,
    /// One value per feature dimension.
    pub per_feature: Vec<f64>,
    /// Mean relevance per category (1-based id), over all moments of the
    /// category's phis that the set contains.
    pub categories: Vec<(usize, f64)>,
}

impl Relevance {
    /// Category ids ordered by decreasing relevance (stable on ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut c = self.categories.clone();
        c.sort_by(|a, b| b.1.total_cmp(&a.1));
        c.into_iter().map(|(id, _)| id).collect()
    }
}

/// Per-feature `|rho|` against the 0/1 label, and category means.
pub fn pearson_relevance(
    x: &[Vec<f64>],
    labels: &[bool],
    set: FeatureSet,
) -> Result<Relevance, EvalError> {
    let pos = labels.iter().filter(|&&l| l).count();
    if pos < 2 || labels.len() - pos < 2 {
        return Err(EvalError::SingleClass);
    }
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let per_feature: Vec<f64> = (0..set.dim())
        .map(|j| {
            let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
            abs_pearson(&col, &y)
        })
        .collect();
    let phis = set.phis();
    let categories = CATEGORIES
        .iter()
        .enumerate()
        .filter_map(|(c, members)| {
            let vals: Vec<f64> = members
                .iter()
                .filter_map(|phi| phis.iter().position(|p| p == phi))
                .flat_map(|pos| (0..4).map(move |m| 4 * pos + m))
                .map(|j| per_feature[j])
                .collect();
            (!vals.is_empty()).then(|| (c + 1, vals.iter().sum::<f64>() / vals.len() as f64))
        })
        .collect();
    Ok(Relevance {
        set,
        per_feature,
        categories,
    })
}
