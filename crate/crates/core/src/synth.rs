//! Procedural meshes: icospheres, tori, height-field grids and a seeded
//! generator of varied "cover-like" shapes for desk-scale corpora.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::mesh::{normalize, TriMesh, Vec3};

/// Icosphere of the given radius; `subdivisions` = 4 gives 2562 vertices.
pub fn icosphere(subdivisions: u32, radius: f64) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|v| v * radius).collect();
    TriMesh::new(verts, faces).expect("icosphere faces are valid")
}

/// Closed torus with `nu` segments around the main ring and `nv` around the tube.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            verts.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces).expect("torus faces are valid")
}

/// Open `nx` x `ny` vertex grid over the unit square with heights from `height`.
pub fn grid(nx: usize, ny: usize, height: impl Fn(f64, f64) -> f64) -> TriMesh {
    let mut verts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = i as f64 / (nx - 1) as f64;
            let y = j as f64 / (ny - 1) as f64;
            verts.push(Vec3::new(x, y, height(x, y)));
        }
    }
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            faces.push([a, a + 1, a + nx + 1]);
            faces.push([a, a + nx + 1, a + nx]);
        }
    }
    TriMesh::new(verts, faces).expect("grid faces are valid")
}

/// Adds isotropic Gaussian noise of standard deviation `sigma` to every vertex.
pub fn jitter(mesh: &TriMesh, sigma: f64, rng: &mut impl Rng) -> TriMesh {
    if sigma <= 0.0 {
        return mesh.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let verts = mesh
        .vertices()
        .iter()
        .map(|v| v + Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng)))
        .collect();
    mesh.with_vertices(verts)
}

/// Smooth random radial field: sum of a few sinusoids over random directions.
struct Bumps {
    terms: Vec<(Vec3, f64, f64, f64)>,
}

impl Bumps {
    fn random(rng: &mut impl Rng, count: usize, amplitude: f64) -> Self {
        let terms = (0..count)
            .map(|_| {
                let dir = random_unit(rng);
                let freq = rng.random_range(1.0..5.0);
                let phase = rng.random_range(0.0..TAU);
                let amp = amplitude * rng.random_range(0.3..1.0);
                (dir, freq, phase, amp)
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, p: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(d, f, ph, a)| a * (f * d.dot(p) + ph).sin())
            .sum()
    }
}

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Kind of base surface drawn by [`random_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Blob,
    Torus,
    Terrain,
}

/// A seeded, normalized cover-like mesh with 500-3000 vertices.
///
/// Shapes are bumpy ellipsoids, deformed tori or open height fields, with
/// a per-shape level of fine-scale vertex noise standing in for the
/// tessellation and scanning irregularities of real models.
pub fn random_shape(seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = match rng.random_range(0..10) {
        0..=4 => ShapeKind::Blob,
        5..=7 => ShapeKind::Torus,
        _ => ShapeKind::Terrain,
    };
    random_shape_of(kind, &mut rng)
}

pub fn random_shape_of(kind: ShapeKind, rng: &mut ChaCha8Rng) -> TriMesh {
    let count = rng.random_range(2..6);
    let amplitude = rng.random_range(0.03..0.15);
    let bumps = Bumps::random(rng, count, amplitude);
    let base = match kind {
        ShapeKind::Blob => {
            let level = if rng.random_bool(0.5) { 3 } else { 4 };
            let axes = Vec3::new(1.0, rng.random_range(0.5..0.95), rng.random_range(0.3..0.8));
            let s = icosphere(level, 1.0);
            let verts = s
                .vertices()
                .iter()
                .map(|v| v * (1.0 + bumps.eval(v)))
                .map(|v| v.component_mul(&axes))
                .collect();
            s.with_vertices(verts)
        }
        ShapeKind::Torus => {
            let nu = rng.random_range(36..64);
            let nv = rng.random_range(16..36);
            let minor = rng.random_range(0.2..0.45);
            let t = torus(1.0, minor, nu, nv);
            let verts = t
                .vertices()
                .iter()
                .map(|v| {
                    let ring = Vec3::new(v.x, v.y, 0.0).normalize();
                    let tube = v - ring;
                    ring + tube * (1.0 + bumps.eval(v) * 2.0)
                })
                .collect();
            t.with_vertices(verts)
        }
        ShapeKind::Terrain => {
            let n = rng.random_range(24..52);
            let m = rng.random_range(24..52);
            let relief = rng.random_range(0.1..0.35);
            grid(n, m, |x, y| {
                relief * bumps.eval(&Vec3::new(3.0 * x, 3.0 * y, 0.0)) / 0.15
                    + 0.05 * (PI * x).sin()
            })
        }
    };
    let base = normalize(&base).expect("generated shapes have positive extent");
    let spacing = mean_edge_length(&base);
    let sigma = spacing * rng.random_range(0.002..0.01);
    let noisy = jitter(&base, sigma, rng);
    normalize(&noisy).expect("generated shapes have positive extent")
}

pub fn mean_edge_length(mesh: &TriMesh) -> f64 {
    let v = mesh.vertices();
    let edges = mesh.topology().edges();
    if edges.is_empty() {
        return 0.0;
    }
    edges
        .iter()
        .map(|[a, b]| (v[*a] - v[*b]).norm())
        .sum::<f64>()
        / edges.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let s = icosphere(4, 1.0);
        assert_eq!(s.vertex_count(), 2562);
        assert_eq!(s.face_count(), 5120);
        assert_eq!(s.edge_count(), 7680);
        assert!(s.vertices().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn torus_is_closed() {
        let t = torus(1.0, 0.3, 20, 10);
        assert_eq!(t.topology().boundary_edge_count(), 0);
        assert_eq!(t.edge_count() * 2, t.face_count() * 3);
    }

    #[test]
    fn random_shapes_are_normalized_and_sized() {
        for seed in 0..12 {
            let m = random_shape(seed);
            let (lo, hi) = m.bounding_box().unwrap();
            assert!(((hi - lo).max() - 1.0).abs() < 1e-12);
            assert!(
                (500..=3000).contains(&m.vertex_count()),
                "{}",
                m.vertex_count()
            );
        }
    }

    #[test]
    fn valence_sum_is_twice_edge_count() {
        let m = random_shape(5);
        let total: usize = (0..m.vertex_count()).map(|v| m.topology().valence(v)).sum();
        assert_eq!(total, 2 * m.edge_count());
    }
}
