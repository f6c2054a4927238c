//! The nineteen per-element calibration features.
//!
//! Every feature is an absolute difference between a descriptor of a mesh
//! and the same descriptor of its smoothed version:
//!
//! | phi     | element | descriptor |
//! |---------|---------|------------|
//! | 1-3     | vertex  | Cartesian x, y, z |
//! | 4-6     | vertex  | Laplacian-coordinate x, y, z |
//! | 7, 8    | vertex  | norm of position / Laplacian coordinate |
//! | 9       | interior edge | angle between incident face normals |
//! | 10      | face    | face normal direction (angle) |
//! | 11      | vertex  | weighted vertex normal direction (angle) |
//! | 12, 13  | vertex  | Gaussian curvature, curvature ratio |
//! | 14-16   | vertex  | azimuth, elevation, radius about the centroid |
//! | 17-19   | edge    | azimuth / elevation / radius spread along the edge |

use std::io::Write;

use crate::calibration::{laplacian_coords, laplacian_smooth, SmoothingParams};
use crate::geometry::{
    angle_between, dihedral_angles, face_crosses, fit_curvature, to_spherical, vertex_normals,
    wrapped_angle_diff, CurvatureEstimate, Spherical, DEGENERATE_CROSS,
};
use crate::mesh::{MeshError, TriMesh, Vec3};

/// Number of raw features.
pub const PHI_COUNT: usize = 19;

/// Counts of elements that were skipped or zeroed during extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractionMeta {
    pub degenerate_faces: usize,
    pub skipped_edges: usize,
    pub zero_vertex_normals: usize,
    pub curvature_failures: usize,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    pub isolated_vertices: usize,
}

/// The raw feature arrays `phi[0]..phi[18]` (phi1..phi19).
#[derive(Debug, Clone, PartialEq)]
pub struct PerElementFeatures {
    phi: Vec<Vec<f64>>,
    pub meta: ExtractionMeta,
}

impl PerElementFeatures {
    /// Feature array for a 1-based phi index.
    pub fn phi(&self, index: usize) -> &[f64] {
        assert!(
            (1..=PHI_COUNT).contains(&index),
            "phi index {index} out of range"
        );
        &self.phi[index - 1]
    }

    pub fn arrays(&self) -> &[Vec<f64>] {
        &self.phi
    }

    /// Writes `element,phi,value` rows.
    pub fn write_element_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["element", "phi", "value"])?;
        for (k, arr) in self.phi.iter().enumerate() {
            let phi = (k + 1).to_string();
            for (i, v) in arr.iter().enumerate() {
                w.write_record([i.to_string(), phi.clone(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Descriptors of a single mesh that the differences are taken over.
#[derive(Debug, Clone)]
pub struct MeshDescriptors {
    pub laplacian: Vec<Vec3>,
    pub face_crosses: Vec<Vec3>,
    pub dihedral: Vec<Option<f64>>,
    pub vertex_normals: Vec<Vec3>,
    pub curvature: Vec<CurvatureEstimate>,
    pub spherical: Vec<Spherical>,
}

impl MeshDescriptors {
    pub fn compute(mesh: &TriMesh) -> Self {
        let face_crosses = face_crosses(mesh);
        let vertex_normals = vertex_normals(mesh);
        let curvature = (0..mesh.vertex_count())
            .map(|i| fit_curvature(mesh, i, &vertex_normals[i]))
            .collect();
        Self {
            laplacian: laplacian_coords(mesh),
            dihedral: dihedral_angles(mesh, &face_crosses),
            face_crosses,
            vertex_normals,
            curvature,
            spherical: to_spherical(mesh),
        }
    }
}

/// phi1..phi8.
pub fn positional_features(mesh: &TriMesh, smoothed: &TriMesh) -> Result<[Vec<f64>; 8], MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    Ok(positional(
        mesh,
        smoothed,
        &laplacian_coords(mesh),
        &laplacian_coords(smoothed),
    ))
}

fn positional(a: &TriMesh, b: &TriMesh, la: &[Vec3], lb: &[Vec3]) -> [Vec<f64>; 8] {
    let mut out: [Vec<f64>; 8] = Default::default();
    for (i, (p, q)) in a.vertices().iter().zip(b.vertices()).enumerate() {
        let (lp, lq) = (&la[i], &lb[i]);
        for k in 0..3 {
            out[k].push((p[k] - q[k]).abs());
            out[3 + k].push((lp[k] - lq[k]).abs());
        }
        out[6].push((p.norm() - q.norm()).abs());
        out[7].push((lp.norm() - lq.norm()).abs());
    }
    out
}

/// phi9 over edges that are interior and non-degenerate in both meshes.
pub fn dihedral_features(mesh: &TriMesh, smoothed: &TriMesh) -> Result<Vec<f64>, MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    let da = dihedral_angles(mesh, &face_crosses(mesh));
    let db = dihedral_angles(smoothed, &face_crosses(smoothed));
    Ok(dihedral_diff(&da, &db).0)
}

fn dihedral_diff(a: &[Option<f64>], b: &[Option<f64>]) -> (Vec<f64>, usize) {
    let mut skipped = 0;
    let vals = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => {
                skipped += 1;
                None
            }
        })
        .collect();
    (vals, skipped)
}

/// phi10; degenerate faces yield 0.
pub fn face_normal_features(mesh: &TriMesh, smoothed: &TriMesh) -> Result<Vec<f64>, MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    Ok(face_normal_diff(&face_crosses(mesh), &face_crosses(smoothed)).0)
}

fn face_normal_diff(a: &[Vec3], b: &[Vec3]) -> (Vec<f64>, usize) {
    let mut degenerate = 0;
    let vals = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            if x.norm() < DEGENERATE_CROSS || y.norm() < DEGENERATE_CROSS {
                degenerate += 1;
                0.0
            } else {
                angle_between(x, y).unwrap_or(0.0)
            }
        })
        .collect();
    (vals, degenerate)
}

/// phi11; a vanishing vertex normal yields 0.
pub fn vertex_normal_features(mesh: &TriMesh, smoothed: &TriMesh) -> Result<Vec<f64>, MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    Ok(vertex_normal_diff(&vertex_normals(mesh), &vertex_normals(smoothed)).0)
}

fn vertex_normal_diff(a: &[Vec3], b: &[Vec3]) -> (Vec<f64>, usize) {
    let mut zero = 0;
    let vals = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            angle_between(x, y).unwrap_or_else(|| {
                zero += 1;
                0.0
            })
        })
        .collect();
    (vals, zero)
}

/// (phi12, phi13): Gaussian-curvature and curvature-ratio differences.
pub fn curvature_features(
    mesh: &TriMesh,
    smoothed: &TriMesh,
) -> Result<(Vec<f64>, Vec<f64>), MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    let ka = MeshDescriptors::compute(mesh).curvature;
    let kb = MeshDescriptors::compute(smoothed).curvature;
    let (g, r, _) = curvature_diff(&ka, &kb);
    Ok((g, r))
}

fn curvature_diff(a: &[CurvatureEstimate], b: &[CurvatureEstimate]) -> (Vec<f64>, Vec<f64>, usize) {
    let failures = a
        .iter()
        .chain(b)
        .filter(|k| !matches!(k, CurvatureEstimate::Fitted(_)))
        .count();
    let (g, r) = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let (x, y) = (x.curvatures(), y.curvatures());
            (
                (x.gaussian() - y.gaussian()).abs(),
                (x.ratio() - y.ratio()).abs(),
            )
        })
        .unzip();
    (g, r, failures)
}

/// phi14..phi16, each mesh about its own centroid.
pub fn spherical_vertex_features(
    mesh: &TriMesh,
    smoothed: &TriMesh,
) -> Result<[Vec<f64>; 3], MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    Ok(spherical_vertex_diff(
        &to_spherical(mesh),
        &to_spherical(smoothed),
    ))
}

fn spherical_vertex_diff(a: &[Spherical], b: &[Spherical]) -> [Vec<f64>; 3] {
    let mut out: [Vec<f64>; 3] = Default::default();
    for (p, q) in a.iter().zip(b) {
        out[0].push(wrapped_angle_diff(p.azimuth, q.azimuth));
        out[1].push((p.elevation - q.elevation).abs());
        out[2].push((p.radius - q.radius).abs());
    }
    out
}

/// phi17..phi19 over all edges in canonical order.
pub fn spherical_edge_features(
    mesh: &TriMesh,
    smoothed: &TriMesh,
) -> Result<[Vec<f64>; 3], MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    Ok(spherical_edge_diff(
        mesh.topology().edges(),
        &to_spherical(mesh),
        &to_spherical(smoothed),
    ))
}

/// Per-edge spread `(K_theta, K_phi, K_R)` of spherical coordinates.
pub fn edge_spread(s: &[Spherical], i: usize, j: usize) -> [f64; 3] {
    [
        wrapped_angle_diff(s[i].azimuth, s[j].azimuth),
        (s[i].elevation - s[j].elevation).abs(),
        (s[i].radius - s[j].radius).abs(),
    ]
}

fn spherical_edge_diff(edges: &[[usize; 2]], a: &[Spherical], b: &[Spherical]) -> [Vec<f64>; 3] {
    let mut out: [Vec<f64>; 3] = Default::default();
    for &[i, j] in edges {
        let (ka, kb) = (edge_spread(a, i, j), edge_spread(b, i, j));
        for k in 0..3 {
            out[k].push((ka[k] - kb[k]).abs());
        }
    }
    out
}

/// All nineteen features of `mesh` against `smoothed`.
pub fn extract(mesh: &TriMesh, smoothed: &TriMesh) -> Result<PerElementFeatures, MeshError> {
    mesh.check_same_connectivity(smoothed)?;
    let (da, db) = rayon::join(
        || MeshDescriptors::compute(mesh),
        || MeshDescriptors::compute(smoothed),
    );
    Ok(extract_from_descriptors(mesh, smoothed, &da, &db))
}

pub fn extract_from_descriptors(
    mesh: &TriMesh,
    smoothed: &TriMesh,
    da: &MeshDescriptors,
    db: &MeshDescriptors,
) -> PerElementFeatures {
    let topo = mesh.topology();
    let mut phi: Vec<Vec<f64>> = Vec::with_capacity(PHI_COUNT);
    phi.extend(positional(mesh, smoothed, &da.laplacian, &db.laplacian));
    let (phi9, skipped_edges) = dihedral_diff(&da.dihedral, &db.dihedral);
    phi.push(phi9);
    let (phi10, degenerate_faces) = face_normal_diff(&da.face_crosses, &db.face_crosses);
    phi.push(phi10);
    let (phi11, zero_vertex_normals) = vertex_normal_diff(&da.vertex_normals, &db.vertex_normals);
    phi.push(phi11);
    let (phi12, phi13, curvature_failures) = curvature_diff(&da.curvature, &db.curvature);
    phi.push(phi12);
    phi.push(phi13);
    phi.extend(spherical_vertex_diff(&da.spherical, &db.spherical));
    phi.extend(spherical_edge_diff(
        topo.edges(),
        &da.spherical,
        &db.spherical,
    ));
    debug_assert_eq!(phi.len(), PHI_COUNT);
    PerElementFeatures {
        phi,
        meta: ExtractionMeta {
            degenerate_faces,
            skipped_edges,
            zero_vertex_normals,
            curvature_failures,
            boundary_edges: topo.boundary_edge_count(),
            non_manifold_edges: topo.non_manifold_edge_count(),
            isolated_vertices: topo.isolated_vertex_count(),
        },
    }
}

/// Smooths `mesh` and extracts the features against the smoothed copy.
pub fn calibrated_features(mesh: &TriMesh, params: &SmoothingParams) -> PerElementFeatures {
    let smoothed = laplacian_smooth(mesh, params);
    extract(mesh, &smoothed).expect("smoothing preserves connectivity")
}
