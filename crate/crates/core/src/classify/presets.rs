//! Published `(C, gamma)` choices per feature set and embedding setting,
//! stored as exponents `(i, j)` for `C = 10^i`, `gamma = 2^j`.

use crate::embed::{EmbedParams, Variant};
use crate::stats::FeatureSet;

/// Fallback when no table entry applies.
pub const DEFAULT_EXPONENTS: (i32, i32) = (5, -10);

/// Embedding settings for which a preset is tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Yang { bins: usize },
    Cho { alpha: f64, bits: usize },
    Chao { layers: usize },
}

impl Scenario {
    pub fn from_params(p: &EmbedParams) -> Self {
        match p.variant {
            Variant::YangHist => Self::Yang { bins: p.bins },
            Variant::ChoMean => Self::Cho {
                alpha: p.alpha,
                bits: p.bits,
            },
            Variant::ChaoLayers => Self::Chao { layers: p.layers },
        }
    }
}

type Row<const N: usize> = [(i32, i32); N];

// Row order: YANG40, YANG40+VNF4, YANG40+CF8, LFS52, LFS76.
const YANG_BINS: [usize; 4] = [32, 64, 96, 128];
const YANG: [Row<4>; 5] = [
    [(4, -8), (2, -4), (6, -11), (4, -9)],
    [(7, -9), (4, -9), (5, -10), (5, -8)],
    [(5, -9), (5, -10), (3, -6), (5, -11)],
    [(5, -12), (6, -9), (7, -12), (7, -12)],
    [(5, -9), (5, -10), (3, -8), (4, -11)],
];

const CHO_ALPHAS: [f64; 5] = [0.02, 0.04, 0.06, 0.08, 0.10];
const CHO_STRENGTH: [Row<5>; 5] = [
    [(5, -11), (6, -9), (2, -2), (2, -6), (3, -1)],
    [(7, -10), (2, -3), (5, -10), (7, -11), (5, -8)],
    [(7, -11), (4, -7), (3, -5), (3, -6), (6, -11)],
    [(4, -7), (6, -10), (6, -13), (5, -10), (4, -8)],
    [(3, -8), (3, -9), (5, -10), (5, -11), (4, -10)],
];

const CHO_BITS: [usize; 4] = [16, 32, 48, 64];
const CHO_PAYLOAD: [Row<4>; 5] = [
    [(4, -7), (3, -2), (3, -4), (6, -9)],
    [(3, -6), (5, -10), (4, -8), (2, -3)],
    [(5, -11), (5, -9), (6, -12), (4, -7)],
    [(5, -10), (3, -5), (5, -11), (6, -10)],
    [(5, -12), (7, -10), (4, -5), (3, -9)],
];

const CHAO: [Row<10>; 5] = [
    [
        (5, -10),
        (3, -9),
        (5, -10),
        (6, -10),
        (7, -11),
        (10, -11),
        (6, -11),
        (6, -10),
        (7, -13),
        (7, -10),
    ],
    [
        (6, -11),
        (6, -11),
        (3, -10),
        (6, -11),
        (4, -12),
        (5, -9),
        (7, -12),
        (6, -11),
        (5, -10),
        (5, -10),
    ],
    [
        (4, -12),
        (4, -12),
        (5, -10),
        (4, -8),
        (5, -9),
        (7, -12),
        (3, -6),
        (7, -11),
        (5, -7),
        (7, -9),
    ],
    [
        (6, -11),
        (5, -10),
        (7, -12),
        (7, -12),
        (7, -9),
        (5, -7),
        (8, -8),
        (6, -11),
        (7, -11),
        (6, -7),
    ],
    [
        (6, -12),
        (6, -11),
        (6, -11),
        (7, -12),
        (6, -10),
        (6, -11),
        (5, -10),
        (6, -10),
        (7, -12),
        (7, -12),
    ],
];

fn row(set: FeatureSet) -> Option<usize> {
    match set {
        FeatureSet::Yang40 => Some(0),
        FeatureSet::Yang40Vnf4 => Some(1),
        FeatureSet::Yang40Cf8 => Some(2),
        FeatureSet::Lfs52 => Some(3),
        FeatureSet::Lfs76 => Some(4),
        FeatureSet::Scf24 => None,
    }
}

/// Tabulated `(i, j)` exponents, if any.
///
/// Cho settings are looked up by strength at 64 bits and by payload
/// length at strength 0.04; the two tables agree where they overlap.
pub fn lookup(set: FeatureSet, scenario: Scenario) -> Option<(i32, i32)> {
    let r = row(set)?;
    match scenario {
        Scenario::Yang { bins } => YANG_BINS
            .iter()
            .position(|&b| b == bins)
            .map(|k| YANG[r][k]),
        Scenario::Cho { alpha, bits } => {
            let by_alpha = CHO_ALPHAS.iter().position(|&a| (a - alpha).abs() < 1e-9);
            let by_bits = CHO_BITS.iter().position(|&b| b == bits);
            match (by_alpha, by_bits) {
                (Some(k), _) if bits == 64 => Some(CHO_STRENGTH[r][k]),
                (_, Some(k)) if (alpha - 0.04).abs() < 1e-9 => Some(CHO_PAYLOAD[r][k]),
                _ => None,
            }
        }
        Scenario::Chao { layers } => (1..=10).contains(&layers).then(|| CHAO[r][layers - 1]),
    }
}

/// `(C, gamma)` from the table, or the default.
pub fn svm_params(set: FeatureSet, scenario: Option<Scenario>) -> (f64, f64) {
    let (i, j) = scenario
        .and_then(|s| lookup(set, s))
        .unwrap_or(DEFAULT_EXPONENTS);
    (10f64.powi(i), 2f64.powi(j))
}
