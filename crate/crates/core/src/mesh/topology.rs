use std::collections::BTreeMap;

/// Classification of an edge by the number of incident faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Boundary,
    Interior,
    NonManifold,
}

/// Connectivity derived from a face list.
///
/// Edges are stored as `(min, max)` index pairs in lexicographic order, so
/// every per-edge array in the crate has a reproducible layout.
#[derive(Debug, Clone)]
pub struct Topology {
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_faces: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
}

impl Topology {
    pub(crate) fn derive(vertex_count: usize, faces: Vec<[usize; 3]>) -> Self {
        let mut incidence: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        let mut vertex_faces = vec![Vec::new(); vertex_count];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                incidence.entry([a.min(b), a.max(b)]).or_default().push(fi);
                vertex_faces[f[k]].push(fi);
            }
        }
        let mut neighbors = vec![Vec::new(); vertex_count];
        let mut edges = Vec::with_capacity(incidence.len());
        let mut edge_faces = Vec::with_capacity(incidence.len());
        for (e, fs) in incidence {
            neighbors[e[0]].push(e[1]);
            neighbors[e[1]].push(e[0]);
            edges.push(e);
            edge_faces.push(fs);
        }
        for ring in &mut neighbors {
            ring.sort_unstable();
        }
        Self {
            faces,
            edges,
            edge_faces,
            neighbors,
            vertex_faces,
        }
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Faces incident to edge `e` (index into [`edges`](Self::edges)).
    pub fn edge_faces(&self, e: usize) -> &[usize] {
        &self.edge_faces[e]
    }

    pub fn edge_kind(&self, e: usize) -> EdgeKind {
        match self.edge_faces[e].len() {
            1 => EdgeKind::Boundary,
            2 => EdgeKind::Interior,
            _ => EdgeKind::NonManifold,
        }
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search(&key).ok()
    }

    /// Sorted one-ring neighbours of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn boundary_edge_count(&self) -> usize {
        (0..self.edges.len())
            .filter(|&e| self.edge_kind(e) == EdgeKind::Boundary)
            .count()
    }

    pub fn non_manifold_edge_count(&self) -> usize {
        (0..self.edges.len())
            .filter(|&e| self.edge_kind(e) == EdgeKind::NonManifold)
            .count()
    }

    pub fn isolated_vertex_count(&self) -> usize {
        self.neighbors.iter().filter(|r| r.is_empty()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tetrahedron;

    #[test]
    fn tetrahedron_connectivity() {
        let m = tetrahedron();
        let t = m.topology();
        assert_eq!(t.edges().len(), 6);
        for v in 0..4 {
            assert_eq!(t.valence(v), 3);
            assert_eq!(t.vertex_faces(v).len(), 3);
        }
        for e in 0..6 {
            assert_eq!(t.edge_kind(e), EdgeKind::Interior);
        }
        assert!(t.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_triangle_has_three_boundary_edges() {
        let t = Topology::derive(3, vec![[0, 1, 2]]);
        assert_eq!(t.boundary_edge_count(), 3);
    }

    #[test]
    fn two_triangles_share_one_interior_edge() {
        let t = Topology::derive(4, vec![[0, 1, 2], [2, 1, 3]]);
        assert_eq!(t.edges().len(), 5);
        assert_eq!(t.boundary_edge_count(), 4);
        let shared = t.edge_index(2, 1).unwrap();
        assert_eq!(t.edge_kind(shared), EdgeKind::Interior);
    }

    #[test]
    fn three_faces_on_an_edge_are_non_manifold() {
        let t = Topology::derive(5, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]);
        assert_eq!(t.non_manifold_edge_count(), 1);
    }

    #[test]
    fn isolated_vertices_are_counted() {
        let t = Topology::derive(4, vec![[0, 1, 2]]);
        assert_eq!(t.isolated_vertex_count(), 1);
    }
}
