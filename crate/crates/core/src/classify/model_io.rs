//! Plain-text model files.
//!
//! The first line is `meshsteg-model v1`; every other non-blank line is
//! `key = value`, where vectors are space-separated. Floats are written in
//! Rust's shortest round-trip form, so a saved model reloads bit-exactly.
//! Lines starting with `#` are comments.
//!
//! ```text
//! meshsteg-model v1
//! kind = svm
//! feature_set = lfs76
//! seed = 7
//! standardizer.mean = 0.12 -3.5 ...
//! standardizer.std = 1.1 0.4 ...
//! svm.c = 1000
//! svm.gamma = 0.001953125
//! svm.offset = -0.25
//! svm.support = 2
//! svm.sv.0.coef = 0.5
//! svm.sv.0.x = ...
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::fld::{FldEnsemble, FldLearner};
use super::grid::GridPoint;
use super::qda::{GaussianClass, QdaModel};
use super::{Classifier, ClassifierKind, ClassifyError, Model, Standardizer, SvmModel};
use crate::stats::FeatureSet;

pub const MAGIC: &str = "meshsteg-model v1";

fn join<T: ToString>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn put(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key} = {value}").expect("writing to a String");
}

fn put_class(out: &mut String, name: &str, g: &GaussianClass) {
    put(out, &format!("qda.{name}.prior"), g.prior);
    put(out, &format!("qda.{name}.ridge"), g.ridge);
    put(out, &format!("qda.{name}.mean"), join(g.mean.iter()));
    // Row-major; the matrix is symmetric so the order is a convention only.
    put(
        out,
        &format!("qda.{name}.cov"),
        join(g.cov.transpose().iter()),
    );
}

impl Classifier {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(MAGIC);
        s.push('\n');
        put(&mut s, "kind", self.kind());
        put(&mut s, "feature_set", self.set);
        put(&mut s, "seed", self.seed);
        put(&mut s, "standardizer.mean", join(&self.standardizer.mean));
        put(&mut s, "standardizer.std", join(&self.standardizer.std));
        match &self.model {
            Model::Qda(m) => {
                put_class(&mut s, "cover", &m.cover);
                put_class(&mut s, "stego", &m.stego);
            }
            Model::Fld(m) => {
                put(&mut s, "fld.d_sub", m.d_sub);
                put(&mut s, "fld.oob_trace", join(&m.oob_trace));
                put(&mut s, "fld.learners", m.learners.len());
                for (i, l) in m.learners.iter().enumerate() {
                    put(&mut s, &format!("fld.{i}.subset"), join(&l.subset));
                    put(&mut s, &format!("fld.{i}.weights"), join(&l.weights));
                    put(&mut s, &format!("fld.{i}.threshold"), l.threshold);
                }
            }
            Model::Svm(m) => {
                put(&mut s, "svm.c", m.c);
                put(&mut s, "svm.gamma", m.gamma);
                put(&mut s, "svm.offset", m.offset);
                put(&mut s, "svm.converged", m.converged);
                put(&mut s, "svm.iterations", m.iterations);
                if let Some(g) = &self.grid {
                    put(&mut s, "svm.grid.c_exp", g.c_exp);
                    put(&mut s, "svm.grid.gamma_exp", g.gamma_exp);
                    put(&mut s, "svm.grid.cv_error", g.cv_error);
                }
                put(&mut s, "svm.support", m.coef.len());
                for (i, (a, x)) in m.coef.iter().zip(&m.support).enumerate() {
                    put(&mut s, &format!("svm.sv.{i}.coef"), a);
                    put(&mut s, &format!("svm.sv.{i}.x"), join(x));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifyError> {
        let f = Fields::parse(text)?;
        let kind: ClassifierKind = f.get("kind")?;
        let set: FeatureSet = f
            .raw("feature_set")?
            .parse()
            .map_err(|e| f.error("feature_set", format!("{e}")))?;
        let standardizer = Standardizer {
            mean: f.vec("standardizer.mean")?,
            std: f.vec("standardizer.std")?,
        };
        let p = standardizer.mean.len();
        if standardizer.std.len() != p || p != set.dim() {
            return Err(f.error(
                "standardizer.std",
                "dimension does not match the feature set".into(),
            ));
        }
        let mut grid = None;
        let model = match kind {
            ClassifierKind::Qda => {
                let class = |name: &str| -> Result<_, ClassifyError> {
                    let mean = f.vec::<f64>(&format!("qda.{name}.mean"))?;
                    let cov = f.vec::<f64>(&format!("qda.{name}.cov"))?;
                    if mean.len() != p || cov.len() != p * p {
                        return Err(f.error(&format!("qda.{name}.cov"), "wrong size".into()));
                    }
                    Ok((
                        DVector::from_vec(mean),
                        DMatrix::from_row_slice(p, p, &cov),
                        f.get::<f64>(&format!("qda.{name}.prior"))?,
                        f.get::<f64>(&format!("qda.{name}.ridge"))?,
                    ))
                };
                Model::Qda(QdaModel::from_parts(class("cover")?, class("stego")?)?)
            }
            ClassifierKind::Fld => {
                let n: usize = f.get("fld.learners")?;
                let learners = (0..n)
                    .map(|i| {
                        let subset: Vec<usize> = f.vec(&format!("fld.{i}.subset"))?;
                        let weights: Vec<f64> = f.vec(&format!("fld.{i}.weights"))?;
                        if subset.len() != weights.len() || subset.iter().any(|&j| j >= p) {
                            return Err(f.error(&format!("fld.{i}.subset"), "bad subset".into()));
                        }
                        Ok(FldLearner {
                            subset,
                            weights,
                            threshold: f.get(&format!("fld.{i}.threshold"))?,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Model::Fld(FldEnsemble {
                    dim: p,
                    learners,
                    d_sub: f.get("fld.d_sub")?,
                    oob_trace: f.vec("fld.oob_trace")?,
                })
            }
            ClassifierKind::Svm => {
                if f.has("svm.grid.c_exp") {
                    grid = Some(GridPoint {
                        c_exp: f.get("svm.grid.c_exp")?,
                        gamma_exp: f.get("svm.grid.gamma_exp")?,
                        cv_error: f.get("svm.grid.cv_error")?,
                    });
                }
                let n: usize = f.get("svm.support")?;
                let mut coef = Vec::with_capacity(n);
                let mut support = Vec::with_capacity(n);
                for i in 0..n {
                    coef.push(f.get(&format!("svm.sv.{i}.coef"))?);
                    let x: Vec<f64> = f.vec(&format!("svm.sv.{i}.x"))?;
                    if x.len() != p {
                        return Err(f.error(&format!("svm.sv.{i}.x"), "wrong size".into()));
                    }
                    support.push(x);
                }
                Model::Svm(SvmModel {
                    coef,
                    support,
                    offset: f.get("svm.offset")?,
                    gamma: f.get("svm.gamma")?,
                    c: f.get("svm.c")?,
                    converged: f.get("svm.converged")?,
                    iterations: f.get("svm.iterations")?,
                })
            }
        };
        Ok(Self {
            set,
            seed: f.get("seed")?,
            standardizer,
            model,
            grid,
        })
    }
}

struct Fields<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(text: &'a str) -> Result<Self, ClassifyError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            Some((i, _)) => {
                return Err(ClassifyError::ModelFormat {
                    line: i + 1,
                    msg: format!("expected {MAGIC:?}"),
                })
            }
            None => {
                return Err(ClassifyError::ModelFormat {
                    line: 0,
                    msg: "empty model file".into(),
                })
            }
        }
        let mut map = HashMap::new();
        for (i, l) in lines {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| ClassifyError::ModelFormat {
                    line: i + 1,
                    msg: "expected key = value".into(),
                })?;
            if map.insert(k.trim(), (i + 1, v.trim())).is_some() {
                return Err(ClassifyError::ModelFormat {
                    line: i + 1,
                    msg: format!("duplicate key {:?}", k.trim()),
                });
            }
        }
        Ok(Self { map })
    }

    fn error(&self, key: &str, msg: String) -> ClassifyError {
        ClassifyError::ModelFormat {
            line: self.map.get(key).map_or(0, |e| e.0),
            msg: format!("{key}: {msg}"),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<&'a str, ClassifyError> {
        self.map
            .get(key)
            .map(|e| e.1)
            .ok_or_else(|| self.error(key, "missing".into()))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, ClassifyError> {
        let v = self.raw(key)?;
        v.parse()
            .map_err(|_| self.error(key, format!("cannot parse {v:?}")))
    }

    fn vec<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ClassifyError> {
        self.raw(key)?
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| self.error(key, format!("cannot parse {t:?}")))
            })
            .collect()
    }
}
