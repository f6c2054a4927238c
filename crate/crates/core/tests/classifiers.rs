use meshsteg_core::classify::fld::FldEnsemble;
use meshsteg_core::classify::grid::{grid_search, grid_search_with, C_EXPONENTS, GAMMA_EXPONENTS};
use meshsteg_core::classify::qda::QdaModel;
use meshsteg_core::classify::svm::{
    dual_objective, solve_dual, SvmModel, KKT_TOLERANCE, MAX_ITERATIONS,
};
use meshsteg_core::classify::Model;
use meshsteg_core::{Classifier, ClassifierKind, FeatureSet, SvmParams, TrainOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::{exact_dual_minimum, gaussian, kernel};

#[test]
fn smo_matches_exact_qp_on_small_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..40 {
        let n = 4 + case % 5;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| gaussian(&mut rng, &[0.0, 0.0], &[1.0, 1.0]))
            .collect();
        let mut y: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        if rng.random_bool(0.5) {
            y[0] = -y[0];
        }
        let c = [0.3, 2.0, 50.0, 1e3][case % 4];
        let gamma = [0.25, 1.0, 3.0][case % 3];
        let k = kernel(&x, gamma);
        let sol = solve_dual(&k, &y, c, KKT_TOLERANCE, MAX_ITERATIONS);
        assert!(sol.converged);
        for a in &sol.alpha {
            assert!((0.0..=c).contains(a), "alpha {a} outside [0, {c}]");
        }
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-6, "sum alpha y = {eq}");
        let exact = exact_dual_minimum(&k, &y, c);
        let got = sol.objective(&k, &y);
        assert!(
            (got - exact).abs() < 1e-4,
            "case {case}: smo {got} exact {exact}"
        );
    }
}

#[test]
fn xor_is_learned_exactly() {
    let x = vec![
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
    ];
    let y = [false, false, true, true];
    let m = SvmModel::train(&x, &y, 1e3, 1.0).unwrap();
    assert!(m.converged);
    for (xi, &yi) in x.iter().zip(&y) {
        assert_eq!(m.decision(xi) > 0.0, yi);
    }
    let k = kernel(&x, 1.0);
    let ys = [-1.0, -1.0, 1.0, 1.0];
    // All four points are support vectors, in input order.
    assert_eq!(m.coef.len(), 4);
    let alpha: Vec<f64> = m.coef.iter().zip(&ys).map(|(c, y)| c * y).collect();
    assert!((dual_objective(&alpha, &k, &ys) - exact_dual_minimum(&k, &ys, 1e3)).abs() < 1e-4);
}

#[test]
fn separable_blobs_train_without_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..60 {
        let stego = i % 2 == 1;
        let c = if stego { 3.0 } else { -3.0 };
        x.push(gaussian(&mut rng, &[c, c], &[0.5, 0.5]));
        y.push(stego);
    }
    let m = SvmModel::train(&x, &y, 10.0, 0.5).unwrap();
    let sum: f64 = m.coef.iter().sum();
    assert!(sum.abs() < 1e-6);
    for (xi, &yi) in x.iter().zip(&y) {
        assert_eq!(m.decision(xi) > 0.0, yi);
    }
}

#[test]
fn svm_score_is_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x: Vec<Vec<f64>> = (0..30)
        .map(|_| gaussian(&mut rng, &[0.0; 3], &[1.0; 3]))
        .collect();
    let y: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
    let m = SvmModel::train(&x, &y, 100.0, 0.7).unwrap();
    // |d/dx exp(-g|x-s|^2)| <= sqrt(2g/e)
    let lip =
        m.coef.iter().map(|c| c.abs()).sum::<f64>() * (2.0 * m.gamma / std::f64::consts::E).sqrt();
    for _ in 0..200 {
        let a = gaussian(&mut rng, &[0.0; 3], &[1.5; 3]);
        let step = gaussian(&mut rng, &[0.0; 3], &[1e-3; 3]);
        let b: Vec<f64> = a.iter().zip(&step).map(|(p, q)| p + q).collect();
        let dist = step.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((m.decision(&a) - m.decision(&b)).abs() <= lip * dist * (1.0 + 1e-9));
    }
}

fn log_density(x: &[f64], mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let p = x.len() as f64;
    let d = DVector::from_column_slice(x) - mean;
    let inv = cov.clone().try_inverse().unwrap();
    -0.5 * (p * (2.0 * std::f64::consts::PI).ln()
        + cov.determinant().ln()
        + (d.transpose() * inv * &d)[0])
}

fn sample_moments(rows: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.len() as f64;
    let p = rows[0].len();
    let mut mean = DVector::zeros(p);
    for r in rows {
        for j in 0..p {
            mean[j] += r[j] / n;
        }
    }
    let mut cov = DMatrix::zeros(p, p);
    for r in rows {
        for a in 0..p {
            for b in 0..p {
                cov[(a, b)] += (r[a] - mean[a]) * (r[b] - mean[b]) / (n - 1.0);
            }
        }
    }
    (mean, cov)
}

#[test]
fn qda_score_is_the_log_density_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..150 {
        let stego = i % 3 == 0;
        let (m, s) = if stego {
            ([1.0, -0.5, 0.2], [1.5, 0.7, 1.0])
        } else {
            ([0.0, 0.0, 0.0], [1.0, 1.0, 0.6])
        };
        x.push(gaussian(&mut rng, &m, &s));
        y.push(stego);
    }
    let model = QdaModel::train(&x, &y).unwrap();
    assert_eq!((model.cover.ridge, model.stego.ridge), (0.0, 0.0));
    let covers: Vec<Vec<f64>> = x
        .iter()
        .zip(&y)
        .filter(|p| !*p.1)
        .map(|p| p.0.clone())
        .collect();
    let stegos: Vec<Vec<f64>> = x
        .iter()
        .zip(&y)
        .filter(|p| *p.1)
        .map(|p| p.0.clone())
        .collect();
    let (m0, s0) = sample_moments(&covers);
    let (m1, s1) = sample_moments(&stegos);
    let (p0, p1) = (covers.len() as f64 / 150.0, stegos.len() as f64 / 150.0);
    for _ in 0..100 {
        let v = gaussian(&mut rng, &[0.5, 0.0, 0.0], &[2.0, 2.0, 2.0]);
        let oracle = (log_density(&v, &m1, &s1) + p1.ln()) - (log_density(&v, &m0, &s0) + p0.ln());
        let got = model.score(&v).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
            "{got} vs {oracle}"
        );
    }
}

#[test]
fn qda_agrees_with_the_bayes_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sd0 = [1.0, 1.0, 1.0, 1.0];
    let sd1 = [1.0, 1.6, 0.7, 1.2];
    let mu0 = [0.0; 4];
    let mu1 = [4.0, 0.0, 0.0, 0.0];
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..2000 {
        let stego = i % 2 == 1;
        x.push(if stego {
            gaussian(&mut rng, &mu1, &sd1)
        } else {
            gaussian(&mut rng, &mu0, &sd0)
        });
        y.push(stego);
    }
    let model = QdaModel::train(&x, &y).unwrap();
    let bayes = |v: &[f64]| {
        let ll = |mu: &[f64; 4], sd: &[f64; 4]| {
            v.iter()
                .zip(mu)
                .zip(sd)
                .map(|((x, m), s)| -((x - m) / s).powi(2) / 2.0 - s.ln())
                .sum::<f64>()
        };
        ll(&mu1, &sd1) > ll(&mu0, &sd0)
    };
    let mut agree = 0;
    let n_test = 4000;
    for i in 0..n_test {
        let v = if i % 2 == 0 {
            gaussian(&mut rng, &mu1, &sd1)
        } else {
            gaussian(&mut rng, &mu0, &sd0)
        };
        agree += usize::from((model.score(&v).unwrap() > 0.0) == bayes(&v));
    }
    assert!(
        agree as f64 / n_test as f64 >= 0.99,
        "agreement {agree}/{n_test}"
    );
    // Means within 3/sqrt(n) of the truth.
    let tol = 3.0 / (1000f64).sqrt();
    for j in 0..4 {
        assert!((model.cover.mean[j] - mu0[j]).abs() < tol * sd0[j]);
        assert!((model.stego.mean[j] - mu1[j]).abs() < tol * sd1[j]);
    }
}

fn labelled_blobs(seed: u64, n: usize, p: usize, shift: f64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..n {
        let stego = i % 2 == 1;
        let mean: Vec<f64> = (0..p)
            .map(|j| if stego && j < 3 { shift } else { 0.0 })
            .collect();
        x.push(gaussian(&mut rng, &mean, &vec![1.0; p]));
        y.push(stego);
    }
    (x, y)
}

#[test]
fn fld_votes_and_determinism() {
    let (x, y) = labelled_blobs(2, 120, 12, 1.2);
    let a = FldEnsemble::train(&x, &y, 77).unwrap();
    let b = FldEnsemble::train(&x, &y, 77).unwrap();
    assert_eq!(a, b);
    for row in &x {
        let tally = a.learners.iter().filter(|l| l.project(row) > 0.0).count();
        assert_eq!(a.stego_votes(row), tally);
        let score = a.score(row).unwrap();
        assert!((score - (tally as f64 / a.learners.len() as f64 - 0.5)).abs() < 1e-15);
    }
    for l in &a.learners {
        assert_eq!(l.subset.len(), a.d_sub);
        assert!(l.subset.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn fld_separating_feature_gives_zero_oob() {
    let (mut x, y) = labelled_blobs(4, 80, 6, 0.0);
    for (row, &s) in x.iter_mut().zip(&y) {
        row[2] = if s { 5.0 } else { -5.0 } + 0.1 * row[0];
    }
    let e = FldEnsemble::train(&x, &y, 1).unwrap();
    if e.d_sub == 6 {
        assert_eq!(e.oob_error(), 0.0);
    }
    assert!(e.oob_error() < 0.05);
}

#[test]
fn fld_oob_tracks_held_out_error() {
    let mut gaps = Vec::new();
    for seed in 0..20 {
        let (x, y) = labelled_blobs(100 + seed, 200, 10, 0.8);
        let (xt, yt) = labelled_blobs(900 + seed, 400, 10, 0.8);
        let e = FldEnsemble::train(&x, &y, seed).unwrap();
        let wrong = xt
            .iter()
            .zip(&yt)
            .filter(|(r, &s)| (e.score(r).unwrap() > 0.0) != s)
            .count();
        gaps.push((e.oob_error() - wrong as f64 / xt.len() as f64).abs());
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean < 0.1, "mean |oob - held-out| = {mean}");
    assert!(gaps.iter().filter(|&&g| g < 0.1).count() >= 18, "{gaps:?}");
}

#[test]
fn predictions_survive_a_constant_offset() {
    let (x, y) = labelled_blobs(8, 80, FeatureSet::Scf24.dim(), 1.0);
    let (xt, _) = labelled_blobs(18, 40, FeatureSet::Scf24.dim(), 1.0);
    let shift = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                r[5] += 1234.5;
                r
            })
            .collect()
    };
    for kind in ClassifierKind::ALL {
        let opts = TrainOptions {
            kind,
            seed: 3,
            svm: SvmParams::Fixed {
                c: 10.0,
                gamma: 0.02,
            },
        };
        let a = Classifier::train(&x, &y, FeatureSet::Scf24, &opts).unwrap();
        let b = Classifier::train(&shift(&x), &y, FeatureSet::Scf24, &opts).unwrap();
        for (r, s) in xt.iter().zip(shift(&xt)) {
            assert_eq!(a.predict(r).unwrap(), b.predict(&s).unwrap(), "{kind}");
        }
    }
}

#[test]
fn constant_features_do_not_break_training() {
    let (mut x, y) = labelled_blobs(12, 60, FeatureSet::Scf24.dim(), 1.5);
    for row in &mut x {
        row[0] = -27.631;
        row[7] = -27.631;
    }
    for kind in ClassifierKind::ALL {
        let opts = TrainOptions {
            kind,
            seed: 0,
            svm: SvmParams::Fixed {
                c: 10.0,
                gamma: 0.05,
            },
        };
        let m = Classifier::train(&x, &y, FeatureSet::Scf24, &opts).unwrap();
        assert!(m.score(&x[0]).unwrap().is_finite());
    }
}

#[test]
fn grid_search_spans_the_default_grid() {
    let (x, y) = labelled_blobs(21, 60, 4, 1.5);
    let r = grid_search(&x, &y, 5).unwrap();
    let base = C_EXPONENTS.count() * GAMMA_EXPONENTS.count();
    assert_eq!(base, 84);
    assert!(r.evaluated.len() >= base);
    for c in C_EXPONENTS {
        for g in GAMMA_EXPONENTS {
            assert!(r.evaluated.iter().any(|p| p.c_exp == c && p.gamma_exp == g));
        }
    }
    let min = r
        .evaluated
        .iter()
        .map(|p| p.cv_error)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(r.best.cv_error, min);
    let first = r.evaluated.iter().find(|p| p.cv_error == min).unwrap();
    assert_eq!(
        (first.c_exp, first.gamma_exp),
        (r.best.c_exp, r.best.gamma_exp)
    );
}

#[test]
fn boundary_winners_extend_the_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..80 {
        let stego = i % 2 == 1;
        let r = if stego { 2.0 } else { 1.0 } + 0.05 * rng.random::<f64>();
        let t = rng.random::<f64>() * std::f64::consts::TAU;
        x.push(vec![r * t.cos(), r * t.sin()]);
        y.push(stego);
    }
    for (c, g) in [(-3..=-2, 0..=0), (1..=2, -1..=0), (5..=6, -3..=-2)] {
        let r = grid_search_with(&x, &y, 1, c.clone(), g.clone(), 3).unwrap();
        let span = |f: fn(&meshsteg_core::classify::grid::GridPoint) -> i32| {
            let v: Vec<i32> = r.evaluated.iter().map(f).collect();
            (*v.iter().min().unwrap(), *v.iter().max().unwrap())
        };
        let (c_lo, c_hi) = span(|p| p.c_exp);
        let (g_lo, g_hi) = span(|p| p.gamma_exp);
        assert!(c_lo <= *c.start() && c_hi >= *c.end() && g_lo <= *g.start() && g_hi >= *g.end());
        let grown = (c.start() - c_lo) + (c_hi - c.end()) + (g.start() - g_lo) + (g_hi - g.end());
        assert_eq!(grown > 0, r.expansions > 0);
        if r.expansions < 3 {
            let b = r.best;
            assert!(b.c_exp != c_lo && b.c_exp != c_hi, "{:?} on a C edge", b);
            assert!(
                b.gamma_exp != g_lo && b.gamma_exp != g_hi,
                "{:?} on a gamma edge",
                b
            );
        }
        // Every point of the final rectangle was scored once.
        let area = ((c_hi - c_lo + 1) * (g_hi - g_lo + 1)) as usize;
        assert_eq!(r.evaluated.len(), area);
    }
}

#[test]
fn trained_svm_reports_its_parameters() {
    let (x, y) = labelled_blobs(30, 60, FeatureSet::Scf24.dim(), 1.0);
    let opts = TrainOptions {
        kind: ClassifierKind::Svm,
        seed: 0,
        svm: SvmParams::Fixed {
            c: 1e4,
            gamma: 2f64.powi(-11),
        },
    };
    let m = Classifier::train(&x, &y, FeatureSet::Scf24, &opts).unwrap();
    match &m.model {
        Model::Svm(s) => assert_eq!((s.c, s.gamma), (1e4, 2f64.powi(-11))),
        _ => panic!("expected an svm"),
    }
}
