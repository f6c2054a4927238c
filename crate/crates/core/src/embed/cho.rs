//! Mean-shift embedding in the radial distribution.
//!
//! Radii about the centroid are split by rank into one equal-count bin per
//! bit. Within a bin, radii are mapped onto `[0, 1]` and raised to a power
//! `k` until the bin mean clears `0.5 + alpha` (bit 1) or `0.5 - alpha`
//! (bit 0). The power map fixes both ends of the bin and preserves rank
//! order, so the bins are recovered blindly from the stego.

use super::{max_displacement, mismatches, radii, set_radius, EmbedOutcome, MAX_PASSES};
use crate::mesh::{TriMesh, Vec3};

/// Largest exponent tried when pushing a bin mean down.
const K_MAX: f64 = 1000.0;

/// Vertex indices of each of `n_bins` equal-count radial bins.
pub fn radial_bins(radii: &[f64], n_bins: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let n = order.len();
    (0..n_bins)
        .map(|b| order[b * n / n_bins..(b + 1) * n / n_bins].to_vec())
        .collect()
}

/// Normalised positions of a bin's radii, or `None` for an empty or flat bin.
fn normalized(members: &[usize], r: &[f64]) -> Option<(f64, f64, Vec<f64>)> {
    let lo = members.iter().map(|&i| r[i]).fold(f64::INFINITY, f64::min);
    let hi = members
        .iter()
        .map(|&i| r[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    if members.is_empty() || width.is_nan() || width <= 0.0 {
        return None;
    }
    Some((
        lo,
        width,
        members.iter().map(|&i| (r[i] - lo) / width).collect(),
    ))
}

fn power_mean(rho: &[f64], k: f64) -> f64 {
    rho.iter().map(|x| x.powf(k)).sum::<f64>() / rho.len() as f64
}

/// Normalised mean of each bin on `mesh`; `None` for empty or flat bins.
pub fn bin_means(mesh: &TriMesh, n_bins: usize) -> Vec<Option<f64>> {
    let r = radii(mesh.vertices(), &mesh.centroid());
    radial_bins(&r, n_bins)
        .iter()
        .map(|m| normalized(m, &r).map(|(_, _, rho)| power_mean(&rho, 1.0)))
        .collect()
}

/// Bit `i` is 1 iff the normalised mean of bin `i` exceeds 0.5.
pub fn decode(mesh: &TriMesh, bits: usize) -> Vec<bool> {
    if bits == 0 {
        return Vec::new();
    }
    bin_means(mesh, bits)
        .into_iter()
        .map(|m| m.is_some_and(|m| m > 0.5))
        .collect()
}

/// Smallest step count `m` for which `k = 1 -+ m * delta_k` meets the target.
fn find_exponent(rho: &[f64], bit: bool, alpha: f64, delta_k: f64) -> Option<f64> {
    let exponent = |m: u64| {
        if bit {
            1.0 - m as f64 * delta_k
        } else {
            1.0 + m as f64 * delta_k
        }
    };
    let ok = |m: u64| {
        let mean = power_mean(rho, exponent(m));
        if bit {
            mean > 0.5 + alpha
        } else {
            mean < 0.5 - alpha
        }
    };
    let last = if bit {
        ((1.0 / delta_k).ceil() as u64).saturating_sub(1)
    } else {
        ((K_MAX - 1.0) / delta_k).floor() as u64
    };
    if !ok(last) {
        return None;
    }
    // The bin mean is monotone in k, so the first passing step is found by bisection.
    let (mut lo, mut hi) = (0u64, last);
    if ok(0) {
        return Some(exponent(0));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(exponent(hi))
}

fn embed_pass(mesh: &TriMesh, payload: &[bool], alpha: f64, delta_k: f64) -> Vec<Vec3> {
    let c = mesh.centroid();
    let r = radii(mesh.vertices(), &c);
    let mut out = mesh.vertices().to_vec();
    for (members, &bit) in radial_bins(&r, payload.len()).iter().zip(payload) {
        let Some((lo, width, rho)) = normalized(members, &r) else {
            continue;
        };
        let Some(k) = find_exponent(&rho, bit, alpha, delta_k) else {
            continue;
        };
        if k == 1.0 {
            continue;
        }
        for (&i, x) in members.iter().zip(&rho) {
            out[i] = set_radius(&out[i], &c, r[i], lo + width * x.powf(k));
        }
    }
    out
}

/// Embeds `payload`, one bit per radial bin.
pub fn embed(mesh: &TriMesh, payload: &[bool], alpha: f64, delta_k: f64) -> EmbedOutcome {
    let mut stego = mesh.clone();
    let mut passes = 0;
    let mut failed = mismatches(&decode(&stego, payload.len()), payload);
    // Moving vertices shifts the centroid, so re-embed from the stego until it decodes.
    while !payload.is_empty() && passes < MAX_PASSES {
        stego = mesh.with_vertices(embed_pass(&stego, payload, alpha, delta_k));
        passes += 1;
        failed = mismatches(&decode(&stego, payload.len()), payload);
        let margins_met =
            bin_means(&stego, payload.len())
                .iter()
                .zip(payload)
                .all(|(m, &b)| match m {
                    Some(m) if b => *m > 0.5 + alpha,
                    Some(m) => *m < 0.5 - alpha,
                    None => false,
                });
        if failed.is_empty() && margins_met {
            break;
        }
    }
    if !failed.is_empty() {
        log::debug!(
            "cho: {} of {} bits not embedded",
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Payload;
    use crate::synth::random_shape;

    #[test]
    fn bins_partition_by_rank() {
        let r = [5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(radial_bins(&r, 2), vec![vec![1, 3], vec![4, 2, 0]]);
    }

    #[test]
    fn exponent_search_matches_stepwise_iteration() {
        let rho = [0.0, 0.1, 0.35, 0.5, 0.62, 0.9, 1.0];
        for bit in [true, false] {
            let mut k = 1.0f64;
            let mut steps = 0u64;
            loop {
                let m = power_mean(&rho, k);
                if (bit && m > 0.54) || (!bit && m < 0.46) {
                    break;
                }
                steps += 1;
                k = if bit {
                    1.0 - steps as f64 * 0.001
                } else {
                    1.0 + steps as f64 * 0.001
                };
            }
            assert_eq!(find_exponent(&rho, bit, 0.04, 0.001), Some(k));
        }
    }

    #[test]
    fn two_point_bin_cannot_move() {
        assert_eq!(find_exponent(&[0.0, 1.0], true, 0.04, 0.001), None);
    }

    #[test]
    fn margins_and_round_trip() {
        let m = random_shape(21);
        let p = Payload::random(64, 1);
        let out = embed(&m, p.bits(), 0.04, 0.001);
        assert!(out.failed_bits.is_empty());
        assert_eq!(decode(&out.stego, 64), p.bits());
        for (mean, &b) in bin_means(&out.stego, 64).iter().zip(p.bits()) {
            let mean = mean.unwrap();
            assert!(if b { mean > 0.54 } else { mean < 0.46 });
        }
    }
}
