//! Umbrella-Laplacian smoothing used as the calibration reference.

use serde::{Deserialize, Serialize};

use crate::mesh::{TriMesh, Vec3};

/// Number of Jacobi iterations and the per-iteration update weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub iterations: usize,
    pub weight: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            iterations: 3,
            weight: 0.3,
        }
    }
}

/// Uniform Laplacian coordinates `v(i) - mean(ring(i))`; isolated vertices get zero.
pub fn laplacian_coords(mesh: &TriMesh) -> Vec<Vec3> {
    laplacian_of(mesh, mesh.vertices())
}

fn laplacian_of(mesh: &TriMesh, positions: &[Vec3]) -> Vec<Vec3> {
    let topo = mesh.topology();
    positions
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let ring = topo.neighbors(i);
            if ring.is_empty() {
                return Vec3::zeros();
            }
            let mean = ring
                .iter()
                .fold(Vec3::zeros(), |acc, &j| acc + positions[j])
                / ring.len() as f64;
            v - mean
        })
        .collect()
}

/// Laplacian smoothing with simultaneous (Jacobi) updates:
/// `v <- v + w * (mean(ring) - v)` for `params.iterations` rounds.
///
/// Isolated vertices stay in place; the count is logged.
pub fn laplacian_smooth(mesh: &TriMesh, params: &SmoothingParams) -> TriMesh {
    let isolated = mesh.topology().isolated_vertex_count();
    if isolated > 0 {
        log::warn!("{isolated} isolated vertices left in place during smoothing");
    }
    let mut positions = mesh.vertices().to_vec();
    for _ in 0..params.iterations {
        let delta = laplacian_of(mesh, &positions);
        for (p, d) in positions.iter_mut().zip(&delta) {
            *p -= params.weight * d;
        }
    }
    mesh.with_vertices(positions)
}
