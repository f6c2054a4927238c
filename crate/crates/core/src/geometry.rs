//! Per-mesh local geometry: face and vertex normals, dihedral angles,
//! principal curvatures from quadric fitting, and spherical coordinates.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};

use crate::mesh::{EdgeKind, TriMesh, Vec3};

/// Twice-area cross products below this norm mark a face as degenerate.
pub const DEGENERATE_CROSS: f64 = 1e-20;

/// Angle in `[0, pi]` between two vectors, or `None` if either is zero.
///
/// Uses `atan2(|a x b|, a . b)`, which equals `acos` of the normalised dot
/// product but stays accurate near 0 and pi and is exactly 0 for identical
/// inputs.
pub fn angle_between(a: &Vec3, b: &Vec3) -> Option<f64> {
    if a.norm_squared() == 0.0 || b.norm_squared() == 0.0 {
        return None;
    }
    Some(a.cross(b).norm().atan2(a.dot(b)))
}

/// Un-normalised face normal `(b - a) x (c - a)`; its norm is twice the area.
pub fn face_cross(mesh: &TriMesh, f: usize) -> Vec3 {
    let [a, b, c] = mesh.faces()[f];
    let v = mesh.vertices();
    (v[b] - v[a]).cross(&(v[c] - v[a]))
}

pub fn face_crosses(mesh: &TriMesh) -> Vec<Vec3> {
    (0..mesh.face_count())
        .map(|f| face_cross(mesh, f))
        .collect()
}

/// Vertex normals weighted by face area over the product of the squared
/// lengths of the two face edges meeting at the vertex.
///
/// Faces with a zero-length edge at the vertex are skipped.
pub fn vertex_normals(mesh: &TriMesh) -> Vec<Vec3> {
    let v = mesh.vertices();
    let topo = mesh.topology();
    (0..mesh.vertex_count())
        .map(|i| {
            topo.vertex_faces(i).iter().fold(Vec3::zeros(), |acc, &f| {
                let face = mesh.faces()[f];
                let k = face.iter().position(|&x| x == i).expect("incident face");
                let e1 = v[face[(k + 1) % 3]] - v[i];
                let e2 = v[face[(k + 2) % 3]] - v[i];
                let denom = e1.norm_squared() * e2.norm_squared();
                if denom == 0.0 {
                    return acc;
                }
                // A(F) * unit normal == cross / 2, oriented by the face winding.
                acc + e1.cross(&e2) * (0.5 / denom)
            })
        })
        .collect()
}

/// Angle between the normals of the two faces on each interior edge.
///
/// Returns one entry per edge; `None` for boundary / non-manifold edges and
/// for edges with a degenerate incident face.
pub fn dihedral_angles(mesh: &TriMesh, crosses: &[Vec3]) -> Vec<Option<f64>> {
    let topo = mesh.topology();
    (0..topo.edges().len())
        .map(|e| {
            if topo.edge_kind(e) != EdgeKind::Interior {
                return None;
            }
            let fs = topo.edge_faces(e);
            let (a, b) = (&crosses[fs[0]], &crosses[fs[1]]);
            if a.norm() < DEGENERATE_CROSS || b.norm() < DEGENERATE_CROSS {
                return None;
            }
            angle_between(a, b)
        })
        .collect()
}

/// Principal curvatures `(k_min, k_max)` at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrincipalCurvatures {
    pub k_min: f64,
    pub k_max: f64,
}

impl PrincipalCurvatures {
    pub fn gaussian(&self) -> f64 {
        self.k_min * self.k_max
    }

    /// `min(|k1|, |k2|) / max(|k1|, |k2|)`, defined as 0 on planar points.
    pub fn ratio(&self) -> f64 {
        let (a, b) = (self.k_min.abs(), self.k_max.abs());
        let hi = a.max(b);
        if hi == 0.0 {
            0.0
        } else {
            a.min(b) / hi
        }
    }
}

/// Outcome of curvature estimation at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureEstimate {
    Fitted(PrincipalCurvatures),
    /// Fewer than three neighbours.
    InsufficientRing,
    /// Zero vertex normal or a one-ring that does not determine a quadric.
    Degenerate,
}

impl CurvatureEstimate {
    pub fn curvatures(&self) -> PrincipalCurvatures {
        match self {
            Self::Fitted(k) => *k,
            _ => PrincipalCurvatures::default(),
        }
    }
}

fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Fits `h = a x^2 + b x y + c y^2` to the one-ring in the tangent frame of
/// `normal`, and returns the eigenvalues of the Hessian `[2a b; b 2c]`.
pub fn fit_curvature(mesh: &TriMesh, vertex: usize, normal: &Vec3) -> CurvatureEstimate {
    let ring = mesh.topology().neighbors(vertex);
    if ring.len() < 3 {
        return CurvatureEstimate::InsufficientRing;
    }
    let n_len = normal.norm();
    if n_len == 0.0 || !n_len.is_finite() {
        return CurvatureEstimate::Degenerate;
    }
    let n = normal / n_len;
    let (t1, t2) = tangent_frame(&n);
    let v = mesh.vertices();
    let origin = v[vertex];
    let scale = ring.iter().map(|&j| (v[j] - origin).norm()).sum::<f64>() / ring.len() as f64;
    if scale == 0.0 {
        return CurvatureEstimate::Degenerate;
    }

    // Least squares in coordinates scaled by the mean ring radius.
    let mut ata = Matrix3::zeros();
    let mut atz = Vector3::zeros();
    for &j in ring {
        let d = (v[j] - origin) / scale;
        let (x, y, h) = (d.dot(&t1), d.dot(&t2), d.dot(&n));
        let row = Vector3::new(x * x, x * y, y * y);
        ata += row * row.transpose();
        atz += row * h;
    }
    let eig = SymmetricEigen::new(ata);
    let max_ev = eig.eigenvalues.amax();
    if max_ev.is_nan() || max_ev <= 0.0 || eig.eigenvalues.min() <= 1e-10 * max_ev {
        return CurvatureEstimate::Degenerate;
    }
    let inv = eig.eigenvectors
        * Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l))
        * eig.eigenvectors.transpose();
    let coef = inv * atz / scale;
    let hess = Matrix2::new(2.0 * coef[0], coef[1], coef[1], 2.0 * coef[2]);
    let ev = SymmetricEigen::new(hess).eigenvalues;
    CurvatureEstimate::Fitted(PrincipalCurvatures {
        k_min: ev.min(),
        k_max: ev.max(),
    })
}

/// Spherical coordinates `(R, azimuth, elevation)` about a centre.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spherical {
    pub radius: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl Spherical {
    pub fn from_offset(d: &Vec3) -> Self {
        let radius = d.norm();
        if radius == 0.0 {
            return Self::default();
        }
        Self {
            radius,
            azimuth: d.y.atan2(d.x),
            elevation: (d.z / radius).clamp(-1.0, 1.0).asin(),
        }
    }

    /// Cartesian offset from the centre.
    pub fn to_offset(&self) -> Vec3 {
        let (sp, cp) = self.elevation.sin_cos();
        let (st, ct) = self.azimuth.sin_cos();
        Vec3::new(
            self.radius * cp * ct,
            self.radius * cp * st,
            self.radius * sp,
        )
    }
}

/// Spherical coordinates of every vertex about the mesh's own vertex centroid.
pub fn to_spherical(mesh: &TriMesh) -> Vec<Spherical> {
    let c = mesh.centroid();
    mesh.vertices()
        .iter()
        .map(|v| Spherical::from_offset(&(v - c)))
        .collect()
}

/// `|a - b|` for azimuths, folded onto `[0, pi]` across the +-pi seam.
pub fn wrapped_angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % std::f64::consts::TAU;
    if d > std::f64::consts::PI {
        std::f64::consts::TAU - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tetrahedron;
    use crate::synth::{grid, icosphere};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn tetrahedron_normal_angle_is_supplement_of_dihedral() {
        let m = tetrahedron();
        let d = dihedral_angles(&m, &face_crosses(&m));
        let expected = PI - (1.0f64 / 3.0).acos();
        for a in d {
            assert!((a.unwrap() - expected).abs() < 1e-12);
        }
        assert!((expected - 1.9106332362490186).abs() < 1e-12);
    }

    #[test]
    fn coplanar_faces_have_zero_dihedral() {
        let m = grid(3, 3, |_, _| 0.0);
        let d = dihedral_angles(&m, &face_crosses(&m));
        assert!(d.iter().flatten().all(|&a| a == 0.0));
        assert_eq!(d.iter().filter(|a| a.is_some()).count(), 8);
    }

    #[test]
    fn flat_grid_vertex_normal_is_vertical() {
        let m = grid(4, 4, |_, _| 0.0);
        let n = vertex_normals(&m);
        let c = n[5];
        assert!(c.x.abs() < 1e-15 && c.y.abs() < 1e-15 && c.z > 0.0);
    }

    #[test]
    fn planar_patch_has_zero_curvature() {
        let m = grid(5, 5, |x, y| 0.3 * x - 0.2 * y);
        let n = vertex_normals(&m);
        let k = fit_curvature(&m, 12, &n[12]).curvatures();
        assert!(k.gaussian().abs() < 1e-12);
        assert_eq!(PrincipalCurvatures::default().ratio(), 0.0);
    }

    #[test]
    fn sphere_curvature_near_inverse_radius_squared() {
        let r = 2.0;
        let m = icosphere(4, r);
        let n = vertex_normals(&m);
        for i in (0..m.vertex_count()).step_by(37) {
            let k = fit_curvature(&m, i, &n[i]).curvatures();
            assert!((k.gaussian() - 1.0 / (r * r)).abs() < 0.1 / (r * r));
            assert!(k.ratio() > 0.9);
        }
    }

    #[test]
    fn short_ring_is_insufficient() {
        let m = TriMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        assert_eq!(
            fit_curvature(&m, 0, &Vec3::z()),
            CurvatureEstimate::InsufficientRing
        );
    }

    #[test]
    fn spherical_axes() {
        let s = Spherical::from_offset(&Vec3::x());
        assert_eq!((s.radius, s.azimuth, s.elevation), (1.0, 0.0, 0.0));
        let s = Spherical::from_offset(&Vec3::z());
        assert_eq!((s.radius, s.azimuth), (1.0, 0.0));
        assert!((s.elevation - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(Spherical::from_offset(&Vec3::zeros()), Spherical::default());
    }

    #[test]
    fn azimuth_wrap() {
        assert!((wrapped_angle_diff(3.1, -3.1) - (2.0 * PI - 6.2)).abs() < 1e-12);
        assert!((wrapped_angle_diff(0.5, -0.5) - 1.0).abs() < 1e-15);
        assert!(wrapped_angle_diff(PI, -PI) < 1e-15);
    }
}
