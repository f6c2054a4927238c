//! Layered quantisation of projections onto the principal axis.
//!
//! Three reference vertices (smallest and largest projection, and the
//! runner-up to the largest) are left alone; the first two span the
//! measuring axis. Every other vertex has a normalised position `t` along
//! that axis, split into `intervals` slots. Layer `l` stores one bit in the
//! `l`-th binary digit of the position inside the slot.

use nalgebra::{Matrix3, SymmetricEigen};

use super::{max_displacement, mismatches, EmbedError, EmbedOutcome};
use crate::mesh::{TriMesh, Vec3};

/// In-slot remainders are kept inside this band so that digits survive rounding.
const SAFE_BAND: (f64, f64) = (0.05, 0.95);

/// Unit eigenvector of the largest covariance eigenvalue, with its first
/// non-negligible component made positive.
pub fn principal_axis(mesh: &TriMesh) -> Result<Vec3, EmbedError> {
    let v = mesh.vertices();
    if v.is_empty() {
        return Err(EmbedError::DegenerateAxis);
    }
    let c = mesh.centroid();
    let cov = v.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - c;
        acc + d * d.transpose()
    }) / v.len() as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l1.is_nan() || l1 <= 0.0 || l1 - l2 <= 1e-12 * l1 {
        return Err(EmbedError::DegenerateAxis);
    }
    let mut axis: Vec3 = eig.eigenvectors.column(order[0]).into_owned();
    if let Some(first) = axis.iter().find(|x| x.abs() > 1e-8) {
        if *first < 0.0 {
            axis = -axis;
        }
    }
    Ok(axis)
}

/// Reference vertices: minimum, maximum and second-largest projection.
pub fn references(mesh: &TriMesh) -> Result<[usize; 3], EmbedError> {
    if mesh.vertex_count() <= 3 {
        return Err(EmbedError::InvalidParams(
            "need more than 3 vertices".into(),
        ));
    }
    let axis = principal_axis(mesh)?;
    let v = mesh.vertices();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].dot(&axis).total_cmp(&v[b].dot(&axis)).then(a.cmp(&b)));
    let n = order.len();
    Ok([order[0], order[n - 1], order[n - 2]])
}

struct Frame {
    origin: Vec3,
    dir: Vec3,
    length: f64,
}

impl Frame {
    fn new(mesh: &TriMesh, refs: [usize; 3]) -> Result<Self, EmbedError> {
        let v = mesh.vertices();
        let span = v[refs[1]] - v[refs[0]];
        let length = span.norm();
        if length.is_nan() || length <= 0.0 {
            return Err(EmbedError::DegenerateAxis);
        }
        Ok(Self {
            origin: v[refs[0]],
            dir: span / length,
            length,
        })
    }

    fn position(&self, p: &Vec3) -> f64 {
        (p - self.origin).dot(&self.dir) / self.length
    }
}

fn carriers(n: usize, refs: [usize; 3]) -> Vec<usize> {
    (0..n).filter(|i| !refs.contains(i)).collect()
}

/// Layer count carried by carrier `c` when `bits` bits are spread layer by layer.
fn layers_of(c: usize, n_carriers: usize, bits: usize) -> usize {
    bits / n_carriers + usize::from(c < bits % n_carriers)
}

fn digit(frac: f64, layer: usize) -> bool {
    ((frac * (1u64 << layer) as f64).floor() as u64) & 1 == 1
}

/// Rewrites the first `bits.len()` binary digits of `frac`, keeping the rest
/// of the expansion but pulling it into the safe band.
fn rewrite(frac: f64, bits: &[bool]) -> f64 {
    let q = bits.len();
    let scale = (1u64 << q) as f64;
    let head: f64 = bits
        .iter()
        .enumerate()
        .map(|(l, &b)| if b { 0.5f64.powi(l as i32 + 1) } else { 0.0 })
        .sum();
    let tail = (frac * scale).fract();
    head + tail.clamp(SAFE_BAND.0, SAFE_BAND.1) / scale
}

pub fn decode(
    mesh: &TriMesh,
    refs: [usize; 3],
    layers: usize,
    intervals: usize,
    bits: usize,
) -> Vec<bool> {
    let Ok(frame) = Frame::new(mesh, refs) else {
        return vec![false; bits];
    };
    let cs = carriers(mesh.vertex_count(), refs);
    let n_c = cs.len();
    if n_c == 0 {
        return vec![false; bits];
    }
    (0..bits.min(n_c * layers))
        .map(|k| {
            let (layer, c) = (k / n_c + 1, k % n_c);
            let x = frame.position(&mesh.vertices()[cs[c]]) * intervals as f64;
            digit(x - x.floor(), layer)
        })
        .chain(std::iter::repeat(false))
        .take(bits)
        .collect()
}

/// Embeds `payload`; bit `k` goes to layer `k / n + 1` of carrier `k % n`,
/// where `n = |V| - 3` and carriers are taken in vertex-index order.
pub fn embed(
    mesh: &TriMesh,
    payload: &[bool],
    layers: usize,
    intervals: usize,
) -> Result<EmbedOutcome, EmbedError> {
    if payload.is_empty() {
        return Ok(EmbedOutcome {
            stego: mesh.clone(),
            failed_bits: Vec::new(),
            passes: 0,
            max_displacement: 0.0,
            references: None,
        });
    }
    let refs = references(mesh)?;
    let frame = Frame::new(mesh, refs)?;
    let cs = carriers(mesh.vertex_count(), refs);
    let n_c = cs.len();
    let capacity = n_c * layers;
    if payload.len() > capacity {
        return Err(EmbedError::CapacityExceeded {
            requested: payload.len(),
            capacity,
        });
    }
    let mut out = mesh.vertices().to_vec();
    for (c, &vi) in cs.iter().enumerate() {
        let q = layers_of(c, n_c, payload.len());
        if q == 0 {
            continue;
        }
        let bits: Vec<bool> = (0..q).map(|l| payload[l * n_c + c]).collect();
        let x = frame.position(&out[vi]) * intervals as f64;
        let slot = x.floor();
        let frac = x - slot;
        if (1..=q).all(|l| digit(frac, l) == bits[l - 1])
            && (frac * (1u64 << q) as f64).fract() >= SAFE_BAND.0
            && (frac * (1u64 << q) as f64).fract() <= SAFE_BAND.1
        {
            continue;
        }
        let target = (slot + rewrite(frac, &bits)) / intervals as f64;
        let shift = (target - frame.position(&out[vi])) * frame.length;
        out[vi] += frame.dir * shift;
    }
    let stego = mesh.with_vertices(out);
    let failed = mismatches(
        &decode(&stego, refs, layers, intervals, payload.len()),
        payload,
    );
    Ok(EmbedOutcome {
        max_displacement: max_displacement(mesh.vertices(), stego.vertices()),
        stego,
        failed_bits: failed,
        passes: 1,
        references: Some(refs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Payload;
    use crate::synth::random_shape;

    #[test]
    fn digits_and_rewrite() {
        // 0.625 = 0.101b
        assert!(digit(0.625, 1));
        assert!(!digit(0.625, 2));
        assert!(digit(0.625, 3));
        let f = rewrite(0.3, &[true, true]);
        assert!(digit(f, 1) && digit(f, 2));
        assert!((0.75..1.0).contains(&f));
    }

    #[test]
    fn layer_assignment_fills_layer_one_first() {
        assert_eq!(layers_of(0, 10, 15), 2);
        assert_eq!(layers_of(4, 10, 15), 2);
        assert_eq!(layers_of(5, 10, 15), 1);
        assert_eq!(layers_of(9, 10, 30), 3);
    }

    #[test]
    fn round_trip_three_layers() {
        let m = random_shape(12);
        let n = (m.vertex_count() - 3) * 3;
        let p = Payload::random(n, 4);
        let out = embed(&m, p.bits(), 3, 10_000).unwrap();
        assert!(out.failed_bits.is_empty());
        let refs = out.references.unwrap();
        assert_eq!(decode(&out.stego, refs, 3, 10_000, n), p.bits());
        for r in refs {
            assert_eq!(out.stego.vertices()[r], m.vertices()[r]);
        }
        let (lo, hi) = m.bounding_box().unwrap();
        let axis_len = (m.vertices()[refs[1]] - m.vertices()[refs[0]]).norm();
        assert!(out.max_displacement <= axis_len / 10_000.0 + 1e-15);
        assert!(out.max_displacement < (hi - lo).norm());
    }

    #[test]
    fn isotropic_cloud_has_no_axis() {
        let m = crate::mesh::tetrahedron();
        assert!(matches!(
            principal_axis(&m),
            Err(EmbedError::DegenerateAxis)
        ));
    }
}
