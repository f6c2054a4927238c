//! Indexed triangle meshes.
//!
//! A [`TriMesh`] owns its vertex positions and shares an immutable
//! [`Topology`] (edges, one-rings, edge/face incidence) behind an `Arc`, so
//! smoothed copies and stego variants of a mesh reuse the same connectivity
//! and can be compared element by element.

mod io;
mod topology;

use std::sync::Arc;

use nalgebra::Vector3;
use thiserror::Error;

pub use io::{load_mesh, off_string, parse_obj, parse_off, write_off, MeshFormat};
pub use topology::{EdgeKind, Topology};

/// 3D point / vector type used throughout the crate.
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("face {face} references vertex {index} but mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {0} repeats a vertex index")]
    RepeatedFaceIndex(usize),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(&'static str),
    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),
}

/// Triangle mesh with eagerly derived connectivity.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    topology: Arc<Topology>,
}

impl TriMesh {
    /// Builds a mesh, validating face indices and deriving connectivity.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &index in f {
                if index >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index,
                        count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedFaceIndex(fi));
            }
        }
        let topology = Topology::derive(n, faces);
        Ok(Self {
            vertices,
            topology: Arc::new(topology),
        })
    }

    /// Same connectivity, new positions. Panics if the vertex count differs.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Self {
        assert_eq!(
            vertices.len(),
            self.vertices.len(),
            "with_vertices must preserve the vertex count"
        );
        Self {
            vertices,
            topology: Arc::clone(&self.topology),
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        self.topology.faces()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.topology.faces().len()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges().len()
    }

    pub fn centroid(&self) -> Vec3 {
        centroid(&self.vertices)
    }

    /// Axis-aligned bounding box `(min, max)`; `None` for an empty mesh.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))),
        )
    }

    /// True when both meshes have the same vertex count and face list.
    pub fn same_connectivity(&self, other: &TriMesh) -> bool {
        self.vertices.len() == other.vertices.len()
            && (Arc::ptr_eq(&self.topology, &other.topology)
                || self.topology.faces() == other.topology.faces())
    }

    /// Errors with `TopologyMismatch` unless [`same_connectivity`](Self::same_connectivity).
    pub fn check_same_connectivity(&self, other: &TriMesh) -> Result<(), MeshError> {
        if self.same_connectivity(other) {
            Ok(())
        } else {
            Err(MeshError::TopologyMismatch(format!(
                "{} vertices / {} faces vs {} vertices / {} faces",
                self.vertex_count(),
                self.face_count(),
                other.vertex_count(),
                other.face_count()
            )))
        }
    }
}

pub(crate) fn centroid(points: &[Vec3]) -> Vec3 {
    if points.is_empty() {
        return Vec3::zeros();
    }
    points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64
}

/// Translates the vertex centroid to the origin and scales uniformly so the
/// largest bounding-box side is 1.
pub fn normalize(mesh: &TriMesh) -> Result<TriMesh, MeshError> {
    let (lo, hi) = mesh
        .bounding_box()
        .ok_or(MeshError::DegenerateMesh("mesh has no vertices"))?;
    let extent = (hi - lo).max();
    if !extent.is_finite() || extent <= 0.0 {
        return Err(MeshError::DegenerateMesh("all vertices coincide"));
    }
    let c = mesh.centroid();
    let scale = 1.0 / extent;
    let vertices = mesh.vertices().iter().map(|v| (v - c) * scale).collect();
    Ok(mesh.with_vertices(vertices))
}

/// A cover mesh and its stego counterpart; connectivity must match.
#[derive(Debug, Clone)]
pub struct MeshPair {
    pub cover: TriMesh,
    pub stego: TriMesh,
}

impl MeshPair {
    pub fn new(cover: TriMesh, stego: TriMesh) -> Result<Self, MeshError> {
        cover.check_same_connectivity(&stego)?;
        Ok(Self { cover, stego })
    }
}

#[cfg(test)]
pub(crate) fn tetrahedron() -> TriMesh {
    // Regular tetrahedron, outward-facing winding.
    let v = vec![
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(-1.0, 1.0, -1.0),
        Vec3::new(-1.0, -1.0, 1.0),
    ];
    let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriMesh::new(v, f).unwrap()
}
