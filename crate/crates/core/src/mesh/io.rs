//! ASCII OFF / OBJ reading and OFF writing.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{MeshError, TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            other => Err(MeshError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Loads a mesh; `format` defaults to the one implied by the extension.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriMesh, MeshError> {
    let format = match format.or_else(|| MeshFormat::from_path(path)) {
        Some(f) => f,
        None => {
            return Err(MeshError::UnsupportedFormat(format!(
                "cannot infer mesh format of {}",
                path.display()
            )))
        }
    };
    let bytes = fs::read(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes)
        .map_err(|_| MeshError::UnsupportedFormat("binary or non-UTF-8 mesh file".into()))?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number {tok:?}")))
}

/// Parses ASCII OFF. Comments (`#`) and blank lines are skipped; the counts
/// may follow the `OFF` keyword on the same line.
pub fn parse_off(text: &str) -> Result<TriMesh, MeshError> {
    let mut tokens = text.lines().enumerate().flat_map(|(i, l)| {
        let content = l.split('#').next().unwrap_or("");
        content.split_whitespace().map(move |t| (i + 1, t))
    });

    let (line, head) = tokens.next().ok_or_else(|| parse_err(1, "empty file"))?;
    match head {
        "OFF" => {}
        h if h.ends_with("OFF") => {
            return Err(MeshError::UnsupportedFormat(format!("{h} variant")));
        }
        _ => return Err(parse_err(line, "missing OFF header")),
    }
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    };
    let (l, t) = next("vertex count")?;
    if t == "BINARY" {
        return Err(MeshError::UnsupportedFormat("binary OFF".into()));
    }
    let nv: usize = parse_num(t, l)?;
    let (l, t) = next("face count")?;
    let nf: usize = parse_num(t, l)?;
    let (l, t) = next("edge count")?;
    let _: usize = parse_num(t, l)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = [0.0; 3];
        for c in &mut p {
            let (l, t) = next("vertex coordinate")?;
            *c = parse_num(t, l)?;
        }
        vertices.push(Vec3::new(p[0], p[1], p[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for fi in 0..nf {
        let (l, t) = next("face size")?;
        let k: usize = parse_num(t, l)?;
        if k != 3 {
            return Err(MeshError::UnsupportedFormat(format!(
                "face {fi} has {k} vertices; only triangles are supported"
            )));
        }
        let mut f = [0usize; 3];
        for idx in &mut f {
            let (l, t) = next("face index")?;
            *idx = parse_num(t, l)?;
            if *idx >= nv {
                return Err(parse_err(
                    l,
                    format!("face index {idx} out of range for {nv} vertices"),
                ));
            }
        }
        faces.push(f);
    }
    TriMesh::new(vertices, faces)
}

/// Parses ASCII OBJ `v` and `f` records. Texture/normal suffixes on face
/// entries (`1/2/3`) are ignored; negative (relative) indices are accepted.
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut it = content.split_whitespace();
        match it.next() {
            Some("v") => {
                let coords: Vec<f64> = it
                    .take(3)
                    .map(|t| parse_num(t, line))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let entries: Vec<&str> = it.collect();
                if entries.len() != 3 {
                    return Err(MeshError::UnsupportedFormat(format!(
                        "face at line {line} has {} vertices; only triangles are supported",
                        entries.len()
                    )));
                }
                let mut f = [0usize; 3];
                for (slot, e) in f.iter_mut().zip(entries) {
                    let head = e.split('/').next().unwrap_or("");
                    let idx: i64 = parse_num(head, line)?;
                    let n = vertices.len() as i64;
                    let resolved = match idx {
                        0 => return Err(parse_err(line, "OBJ indices are 1-based")),
                        i if i > 0 => i - 1,
                        i => n + i,
                    };
                    if resolved < 0 || resolved >= n {
                        return Err(parse_err(line, format!("face index {idx} out of range")));
                    }
                    *slot = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

/// Serialises a mesh as ASCII OFF with 9 significant digits.
pub fn off_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(32 * (mesh.vertex_count() + mesh.face_count()) + 32);
    let _ = writeln!(s, "OFF");
    let _ = writeln!(
        s,
        "{} {} {}",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    );
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.8e} {:.8e} {:.8e}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    let io_err = |source| MeshError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(off_string(mesh).as_bytes()).map_err(io_err)
}
