//! Tab-separated corpus manifest: one cover/stego pair per line.
//!
//! Columns: `id`, `cover`, `stego`, `variant`, `params`, `payload_sha256`
//! and an optional `failed_bits`, after a `# ` header line. For example
//! `m000`, `covers/m000.off`, `stegos/m000.off`, `cho_mean`,
//! `bits=64,alpha=0.04,delta_k=0.001`, `3f...`, `0`.
//!
//! Relative paths are resolved against the manifest's directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::Variant;

pub const HEADER: &str = "# id\tcover\tstego\tvariant\tparams\tpayload_sha256\tfailed_bits";

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("manifest line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub cover: PathBuf,
    pub stego: PathBuf,
    pub variant: Variant,
    pub params: String,
    pub payload_sha256: String,
    pub failed_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self, ManifestError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| ManifestError::Parse { line: i + 1, msg };
            let cols: Vec<&str> = line.split('\t').collect();
            if !(6..=7).contains(&cols.len()) {
                return Err(err(format!("expected 6 or 7 fields, found {}", cols.len())));
            }
            let resolve = |p: &str| {
                let p = PathBuf::from(p);
                if p.is_relative() {
                    base.join(p)
                } else {
                    p
                }
            };
            let variant = cols[3].parse().map_err(|e| err(format!("{e}")))?;
            let failed_bits = match cols.get(6) {
                Some(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("invalid failed_bits {s:?}")))?,
                None => 0,
            };
            entries.push(ManifestEntry {
                id: cols[0].to_string(),
                cover: resolve(cols[1]),
                stego: resolve(cols[2]),
                variant,
                params: cols[4].to_string(),
                payload_sha256: cols[5].to_string(),
                failed_bits,
            });
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// Renders the manifest, writing paths relative to `base` where possible.
    pub fn render(&self, base: &Path) -> String {
        let rel = |p: &Path| {
            p.strip_prefix(base)
                .unwrap_or(p)
                .to_string_lossy()
                .into_owned()
        };
        let mut s = String::from(HEADER);
        s.push('\n');
        for e in &self.entries {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.id,
                rel(&e.cover),
                rel(&e.stego),
                e.variant,
                e.params,
                e.payload_sha256,
                e.failed_bits
            ));
        }
        s
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.render(path.parent().unwrap_or(Path::new(""))))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str) -> ManifestEntry {
        ManifestEntry {
            id: id.into(),
            cover: PathBuf::from(format!("/data/covers/{id}.off")),
            stego: PathBuf::from(format!("/data/stegos/{id}.off")),
            variant: Variant::ChoMean,
            params: "bits=64,alpha=0.04,delta_k=0.001".into(),
            payload_sha256: "ab".repeat(32),
            failed_bits: 1,
        }
    }

    #[test]
    fn round_trip_with_relative_paths() {
        let m = Manifest {
            entries: vec![entry("a"), entry("b")],
        };
        let text = m.render(Path::new("/data"));
        assert!(text.contains("\tcovers/a.off\t"));
        let back = Manifest::parse(&text, Path::new("/data")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn six_column_lines_default_failures() {
        let text = "x\tc.off\ts.off\tyang\tbins=32\tff\n";
        let m = Manifest::parse(text, Path::new("base")).unwrap();
        assert_eq!(m.entries[0].variant, Variant::YangHist);
        assert_eq!(m.entries[0].failed_bits, 0);
        assert_eq!(m.entries[0].cover, Path::new("base/c.off"));
    }

    #[test]
    fn bad_lines_report_line_number() {
        let err = Manifest::parse("# h\nonly\ttwo\n", Path::new("")).unwrap_err();
        assert!(matches!(err, ManifestError::Parse { line: 2, .. }));
    }
}
