//! In-memory artifact set, CSV and binary frame encoders, and the manifest.
//!
//! Experiments build every output in memory; nothing touches the output
//! directory until the run has succeeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FRAME_MAGIC: &[u8; 4] = b"MFLF";
pub const FRAME_VERSION: u16 = 1;
const FRAME_HEADER_LEN: usize = 4 + 2 + 4 + 8 + 4;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_string(), bytes);
    }

    pub fn add_csv(&mut self, name: &str, csv: Csv) {
        self.add(name, csv.into_bytes());
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn manifest(&self, experiment: &str, seed: u64) -> Manifest {
        Manifest {
            experiment: experiment.to_string(),
            seed,
            files: self
                .files
                .iter()
                .map(|(name, bytes)| ManifestEntry {
                    name: name.clone(),
                    bytes: bytes.len(),
                    sha256: hex::encode(Sha256::digest(bytes)),
                })
                .collect(),
        }
    }

    /// Writes every file plus `manifest.json` into `dir`.
    pub fn write_to(&self, dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(io(&p))?;
        }
        let p = dir.join("manifest.json");
        let mut m = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        m.push(b'\n');
        fs::write(&p, m).map_err(io(&p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

/// Comma-separated text with a header row. Floats use the shortest
/// round-trip representation.
#[derive(Debug, Clone)]
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            write!(self.buf, "{c}").expect("writing to a String");
        }
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Ensemble frames in the `MFLF` layout: magic, `u16` version, `u32` N,
/// `f64` dt, `u32` frame count, then per frame an `f64` time followed by
/// `N` `f64` positions. Little-endian throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFile {
    pub n: u32,
    pub dt: f64,
    pub frames: Vec<(f64, Vec<f64>)>,
}

impl FrameFile {
    pub fn encode(&self) -> Vec<u8> {
        let n = self.n as usize;
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + self.frames.len() * 8 * (n + 1));
        out.extend_from_slice(FRAME_MAGIC);
        out.extend_from_slice(&FRAME_VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
        out.extend_from_slice(&(self.frames.len() as u32).to_le_bytes());
        for (t, xs) in &self.frames {
            assert_eq!(xs.len(), n, "frame size differs from header");
            out.extend_from_slice(&t.to_le_bytes());
            for x in xs {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < FRAME_HEADER_LEN || &bytes[..4] != FRAME_MAGIC {
            return Err("not an MFLF frame file".into());
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != FRAME_VERSION {
            return Err(format!("unsupported frame version {version}"));
        }
        let n = u32_at(6);
        let dt = f64_at(10);
        let count = u32_at(18) as usize;
        let stride = 8 * (n as usize + 1);
        if bytes.len() != FRAME_HEADER_LEN + count * stride {
            return Err(format!(
                "expected {} bytes for {count} frames, found {}",
                FRAME_HEADER_LEN + count * stride,
                bytes.len()
            ));
        }
        let frames = (0..count)
            .map(|k| {
                let base = FRAME_HEADER_LEN + k * stride;
                let xs = (0..n as usize)
                    .map(|j| f64_at(base + 8 * (j + 1)))
                    .collect();
                (f64_at(base), xs)
            })
            .collect();
        Ok(FrameFile { n, dt, frames })
    }
}
