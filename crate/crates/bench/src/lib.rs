//! Fixtures shared by the benchmarks.

use meshsteg_core::eval::synthetic_corpus;
use meshsteg_core::synth::random_shape;
use meshsteg_core::{normalize, EmbedParams, PairedCorpus, SmoothingParams, TriMesh};

/// A normalized synthetic cover.
pub fn cover(seed: u64) -> TriMesh {
    normalize(&random_shape(seed)).expect("non-degenerate shape")
}

/// LFS76 features of `n` cho covers and stegos at the default strength.
pub fn corpus(n: usize) -> PairedCorpus {
    synthetic_corpus(n, 1, &EmbedParams::default(), &SmoothingParams::default())
        .expect("synthetic corpus builds")
        .0
}

/// Covers then stegos as one labelled sample, stego labelled `true`.
pub fn labelled(c: &PairedCorpus) -> (Vec<Vec<f64>>, Vec<bool>) {
    let x: Vec<Vec<f64>> = c.covers.iter().chain(&c.stegos).cloned().collect();
    let y = (0..x.len()).map(|i| i >= c.covers.len()).collect();
    (x, y)
}
