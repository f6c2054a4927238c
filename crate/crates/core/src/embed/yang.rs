//! Radial histogram pairing.
//!
//! The radii about the centroid are binned into `K` equal-width bins over
//! `[R_min, R_max]`. Interior bins are paired as `(1, 2), (3, 4), ...`
//! (0-based), leaving the outermost bins alone so the range stays put.
//! A pair stores 1 when its lower bin holds more vertices than its upper
//! bin and 0 when it holds fewer. Vertices nearest the shared boundary are
//! reflected across it until the count difference reaches the robustness
//! margin `n_eff = min(n_thr, smallest nonzero bin)`. The margin never
//! exceeds what one pair can reach, so only a pair of empty bins fails.

use super::{max_displacement, mismatches, radii, set_radius, EmbedOutcome, MAX_PASSES};
use crate::mesh::{TriMesh, Vec3};

/// Minimum clearance past the boundary, as a fraction of the bin width.
const MARGIN: f64 = 0.02;

/// Number of bits a `bins`-bin histogram can carry.
pub fn capacity(bins: usize) -> usize {
    bins.saturating_sub(2) / 2
}

struct Histogram {
    r_min: f64,
    width: f64,
    bins: Vec<Vec<usize>>,
}

impl Histogram {
    fn new(r: &[f64], k: usize) -> Option<Self> {
        let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
        let r_max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (r_max - r_min) / k as f64;
        if width.is_nan() || width <= 0.0 {
            return None;
        }
        let mut bins = vec![Vec::new(); k];
        for (i, &x) in r.iter().enumerate() {
            let b = (((x - r_min) / width).floor() as usize).min(k - 1);
            bins[b].push(i);
        }
        Some(Self { r_min, width, bins })
    }

    fn pair(&self, bit_index: usize) -> (usize, usize) {
        (2 * bit_index + 1, 2 * bit_index + 2)
    }

    /// Radius of the boundary between the two bins of a pair.
    fn boundary(&self, bit_index: usize) -> f64 {
        self.r_min + (2 * bit_index + 2) as f64 * self.width
    }

    fn smallest_nonzero(&self) -> usize {
        self.bins
            .iter()
            .map(Vec::len)
            .filter(|&n| n > 0)
            .min()
            .unwrap_or(0)
    }
}

/// Required count margin: `n_thr`, or the smallest nonzero bin count if lower.
fn budget(hist: &Histogram, n_thr: usize) -> usize {
    n_thr.min(hist.smallest_nonzero())
}

pub fn decode(mesh: &TriMesh, bins: usize, bits: usize) -> Vec<bool> {
    let r = radii(mesh.vertices(), &mesh.centroid());
    let Some(h) = Histogram::new(&r, bins) else {
        return vec![false; bits];
    };
    (0..bits.min(capacity(bins)))
        .map(|b| {
            let (lo, hi) = h.pair(b);
            h.bins[lo].len() > h.bins[hi].len()
        })
        .chain(std::iter::repeat(false))
        .take(bits)
        .collect()
}

fn embed_pass(mesh: &TriMesh, payload: &[bool], bins: usize, n_thr: usize) -> Vec<Vec3> {
    let c = mesh.centroid();
    let r = radii(mesh.vertices(), &c);
    let mut out = mesh.vertices().to_vec();
    let Some(h) = Histogram::new(&r, bins) else {
        return out;
    };
    let m = budget(&h, n_thr) as i64;
    let margin = MARGIN * h.width;
    for (b, &bit) in payload.iter().enumerate() {
        let (lo, hi) = h.pair(b);
        let (n_lo, n_hi) = (h.bins[lo].len() as i64, h.bins[hi].len() as i64);
        if n_lo + n_hi == 0 {
            continue;
        }
        // Each moved vertex changes n_lo - n_hi by 2.
        let d = n_lo - n_hi;
        let need = if bit {
            (m - d + 1).div_euclid(2)
        } else {
            (d + m + 1).div_euclid(2)
        };
        if need <= 0 {
            continue;
        }
        let source = if bit { &h.bins[hi] } else { &h.bins[lo] };
        let need = (need as usize).min(source.len());
        let boundary = h.boundary(b);
        let mut movers = source.clone();
        movers.sort_by(|&x, &y| {
            (r[x] - boundary)
                .abs()
                .total_cmp(&(r[y] - boundary).abs())
                .then(x.cmp(&y))
        });
        for &i in &movers[..need] {
            let gap = (r[i] - boundary)
                .abs()
                .clamp(margin, (1.0 - MARGIN) * h.width);
            let target = if bit { boundary - gap } else { boundary + gap };
            out[i] = set_radius(&out[i], &c, r[i], target);
        }
    }
    out
}

/// Embeds `payload` into the count differences of interior bin pairs.
pub fn embed(mesh: &TriMesh, payload: &[bool], bins: usize, n_thr: usize) -> EmbedOutcome {
    let mut stego = mesh.clone();
    let mut passes = 0;
    let mut failed = mismatches(&decode(&stego, bins, payload.len()), payload);
    while !payload.is_empty()
        && passes < MAX_PASSES
        && !(failed.is_empty() && margins_met(&stego, payload, bins, n_thr))
    {
        stego = mesh.with_vertices(embed_pass(&stego, payload, bins, n_thr));
        passes += 1;
        failed = mismatches(&decode(&stego, bins, payload.len()), payload);
    }
    if !failed.is_empty() {
        log::debug!(
            "yang: {} of {} bits infeasible",
            failed.len(),
            payload.len()
        );
    }
    EmbedOutcome {
        max_displacement: max_displacement(mesh.vertices(), stego.vertices()),
        stego,
        failed_bits: failed,
        passes,
        references: None,
    }
}

fn margins_met(mesh: &TriMesh, payload: &[bool], bins: usize, n_thr: usize) -> bool {
    let r = radii(mesh.vertices(), &mesh.centroid());
    let Some(h) = Histogram::new(&r, bins) else {
        return false;
    };
    let m = budget(&h, n_thr) as i64;
    payload.iter().enumerate().all(|(b, &bit)| {
        let (lo, hi) = h.pair(b);
        let d = h.bins[lo].len() as i64 - h.bins[hi].len() as i64;
        if bit {
            d >= m
        } else {
            -d >= m
        }
    })
}

/// Width of one histogram bin on `mesh`.
pub fn bin_width(mesh: &TriMesh, bins: usize) -> f64 {
    let r = radii(mesh.vertices(), &mesh.centroid());
    Histogram::new(&r, bins).map_or(0.0, |h| h.width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Payload;
    use crate::synth::random_shape;

    #[test]
    fn capacities() {
        assert_eq!(capacity(32), 15);
        assert_eq!(capacity(64), 31);
        assert_eq!(capacity(96), 47);
        assert_eq!(capacity(128), 63);
        assert_eq!(capacity(2), 0);
    }

    #[test]
    fn histogram_places_extremes_in_end_bins() {
        let r = [0.0, 0.5, 1.0];
        let h = Histogram::new(&r, 4).unwrap();
        assert_eq!(h.bins, vec![vec![0], vec![], vec![1], vec![2]]);
        assert_eq!(h.boundary(0), 0.5);
    }

    #[test]
    fn round_trip_k32() {
        let m = random_shape(8);
        let p = Payload::random(15, 2);
        let out = embed(&m, p.bits(), 32, 20);
        assert!(out.failed_bits.is_empty(), "{:?}", out.failed_bits);
        assert_eq!(decode(&out.stego, 32, 15), p.bits());
        assert!(out.max_displacement <= 2.0 * bin_width(&m, 32));
    }
}
