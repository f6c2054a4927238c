//! Stego embedders: radial mean shifting, radial histogram pairing and
//! layered principal-axis quantisation.
//!
//! Each embedder has a matching decoder used to check that the payload
//! really is in the stego mesh.

pub mod chao;
pub mod cho;
pub mod manifest;
pub mod yang;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::mesh::{TriMesh, Vec3};

pub use manifest::{Manifest, ManifestEntry};

/// Number of embed-then-decode passes before remaining mismatches are reported.
pub(crate) const MAX_PASSES: usize = 6;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("payload of {requested} bits exceeds capacity {capacity}")]
    CapacityExceeded { requested: usize, capacity: usize },
    #[error("principal axis is not well defined")]
    DegenerateAxis,
    #[error("invalid embedding parameters: {0}")]
    InvalidParams(String),
    #[error("unknown variant {0:?} (expected cho, yang or chao)")]
    UnknownVariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    ChoMean,
    YangHist,
    ChaoLayers,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::ChoMean => "cho_mean",
            Self::YangHist => "yang_hist",
            Self::ChaoLayers => "chao_layers",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = EmbedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cho" | "cho_mean" => Ok(Self::ChoMean),
            "yang" | "yang_hist" => Ok(Self::YangHist),
            "chao" | "chao_layers" => Ok(Self::ChaoLayers),
            _ => Err(EmbedError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedParams {
    pub variant: Variant,
    /// Payload length; bits are drawn from `seed`.
    pub bits: usize,
    /// Cho: required distance of a bin mean from 0.5.
    pub alpha: f64,
    /// Cho: step of the power-map exponent.
    pub delta_k: f64,
    /// Yang: histogram bin count.
    pub bins: usize,
    /// Yang: most vertices moved per bit.
    pub n_thr: usize,
    /// Chao: bits per carrier vertex.
    pub layers: usize,
    /// Chao: slots along the reference axis.
    pub intervals: usize,
    pub seed: u64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            variant: Variant::ChoMean,
            bits: 64,
            alpha: 0.04,
            delta_k: 0.001,
            bins: 64,
            n_thr: 20,
            layers: 1,
            intervals: 10_000,
            seed: 0,
        }
    }
}

impl EmbedParams {
    pub fn capacity(&self, mesh: &TriMesh) -> usize {
        match self.variant {
            Variant::ChoMean => mesh.vertex_count(),
            Variant::YangHist => yang::capacity(self.bins),
            Variant::ChaoLayers => mesh.vertex_count().saturating_sub(3) * self.layers,
        }
    }

    /// The parameters relevant to the variant, as `key=value` pairs.
    pub fn param_string(&self) -> String {
        match self.variant {
            Variant::ChoMean => format!(
                "bits={},alpha={},delta_k={}",
                self.bits, self.alpha, self.delta_k
            ),
            Variant::YangHist => {
                format!("bits={},bins={},n_thr={}", self.bits, self.bins, self.n_thr)
            }
            Variant::ChaoLayers => format!(
                "bits={},layers={},intervals={}",
                self.bits, self.layers, self.intervals
            ),
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::InvalidParams(m.to_string()));
        match self.variant {
            Variant::ChoMean => {
                if !(self.alpha > 0.0 && self.alpha < 0.5) {
                    return bad("alpha must lie in (0, 0.5)");
                }
                if !(self.delta_k > 0.0 && self.delta_k < 1.0) {
                    return bad("delta_k must lie in (0, 1)");
                }
            }
            Variant::YangHist => {
                if self.bins < 4 {
                    return bad("bins must be at least 4");
                }
                if self.n_thr == 0 {
                    return bad("n_thr must be positive");
                }
            }
            Variant::ChaoLayers => {
                if !(1..=20).contains(&self.layers) {
                    return bad("layers must lie in 1..=20");
                }
                if self.intervals == 0 {
                    return bad("intervals must be positive");
                }
            }
        }
        Ok(())
    }
}

/// A bit string to hide.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Payload(pub Vec<bool>);

impl Payload {
    pub fn random(bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self((0..bits).map(|_| rng.random::<bool>()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hex SHA-256 of the payload written as ASCII `0`/`1`.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub stego: TriMesh,
    /// Payload positions the decoder does not recover from `stego`.
    pub failed_bits: Vec<usize>,
    pub passes: usize,
    /// Largest vertex displacement from the cover.
    pub max_displacement: f64,
    /// Chao reference vertices (min, max, next-to-max projection).
    pub references: Option<[usize; 3]>,
}

/// Embeds `payload` with the variant selected in `params`.
pub fn embed(
    mesh: &TriMesh,
    params: &EmbedParams,
    payload: &Payload,
) -> Result<EmbedOutcome, EmbedError> {
    params.validate()?;
    let capacity = params.capacity(mesh);
    if payload.len() > capacity {
        return Err(EmbedError::CapacityExceeded {
            requested: payload.len(),
            capacity,
        });
    }
    match params.variant {
        Variant::ChoMean => Ok(cho::embed(
            mesh,
            payload.bits(),
            params.alpha,
            params.delta_k,
        )),
        Variant::YangHist => Ok(yang::embed(mesh, payload.bits(), params.bins, params.n_thr)),
        Variant::ChaoLayers => chao::embed(mesh, payload.bits(), params.layers, params.intervals),
    }
}

/// Recovers `bits` payload bits. Chao decoding uses the recorded
/// references when given, otherwise it re-derives them from `stego`.
pub fn decode(
    stego: &TriMesh,
    params: &EmbedParams,
    bits: usize,
    references: Option<[usize; 3]>,
) -> Result<Vec<bool>, EmbedError> {
    match params.variant {
        Variant::ChoMean => Ok(cho::decode(stego, bits)),
        Variant::YangHist => Ok(yang::decode(stego, params.bins, bits)),
        Variant::ChaoLayers => {
            let refs = match references {
                Some(r) => r,
                None => chao::references(stego)?,
            };
            Ok(chao::decode(
                stego,
                refs,
                params.layers,
                params.intervals,
                bits,
            ))
        }
    }
}

pub(crate) fn max_displacement(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn mismatches(decoded: &[bool], payload: &[bool]) -> Vec<usize> {
    decoded
        .iter()
        .zip(payload)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect()
}

/// Radii about `center`.
pub(crate) fn radii(vertices: &[Vec3], center: &Vec3) -> Vec<f64> {
    vertices.iter().map(|v| (v - center).norm()).collect()
}

/// Moves `v` along the ray from `center` so its radius becomes `r_new`.
pub(crate) fn set_radius(v: &Vec3, center: &Vec3, r_old: f64, r_new: f64) -> Vec3 {
    if r_old == 0.0 {
        return *v;
    }
    center + (v - center) * (r_new / r_old)
}
