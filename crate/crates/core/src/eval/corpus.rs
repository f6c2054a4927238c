use rayon::prelude::*;

use crate::calibration::SmoothingParams;
use crate::embed::{self, EmbedError, EmbedParams, Payload};
use crate::features::calibrated_features;
use crate::stats::{assemble, FeatureSet, DEFAULT_EPSILON};
use crate::synth::random_shape;

use super::{EvalError, PairedCorpus};

/// Per-pair seed shared by the cover shape and its payload.
pub fn pair_seed(master: u64, index: usize) -> u64 {
    master ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub pairs: usize,
    /// Pairs whose stego does not decode to the full payload.
    pub imperfect: usize,
    pub failed_bits: usize,
}

/// Builds `n` synthetic covers, embeds a random payload in each and returns
/// their LFS76 vectors. The corpus depends only on the arguments.
pub fn synthetic_corpus(
    n: usize,
    seed: u64,
    params: &EmbedParams,
    smoothing: &SmoothingParams,
) -> Result<(PairedCorpus, CorpusStats), EvalError> {
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = pair_seed(seed, i);
            let cover = random_shape(s);
            let payload = Payload::random(params.bits, params.seed ^ s);
            let out = embed::embed(&cover, params, &payload).map_err(embed_err)?;
            let fc = assemble(
                &calibrated_features(&cover, smoothing),
                FeatureSet::Lfs76,
                DEFAULT_EPSILON,
            )?;
            let fs = assemble(
                &calibrated_features(&out.stego, smoothing),
                FeatureSet::Lfs76,
                DEFAULT_EPSILON,
            )?;
            Ok((fc.values, fs.values, out.failed_bits.len()))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let mut stats = CorpusStats {
        pairs: n,
        ..Default::default()
    };
    let mut covers = Vec::with_capacity(n);
    let mut stegos = Vec::with_capacity(n);
    for (c, s, failed) in rows {
        covers.push(c);
        stegos.push(s);
        stats.failed_bits += failed;
        stats.imperfect += usize::from(failed > 0);
    }
    Ok((PairedCorpus::new(FeatureSet::Lfs76, covers, stegos)?, stats))
}

fn embed_err(e: EmbedError) -> EvalError {
    EvalError::BadCorpus(e.to_string())
}
