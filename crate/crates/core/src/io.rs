//! File emission: CSV tables, OBJ/PLY meshes, JSON sidecars and the run manifest.

use crate::ambient::{PointProd, ProductSpace};
use crate::error::{Error, Result};
use crate::plateau::SurfaceMesh;
use crate::sister::{ConjugateMesh, Extension};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Numbers in text outputs carry 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Triangle mesh in display coordinates with named per-vertex scalars.
#[derive(Clone, Debug, Default)]
pub struct MeshData {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub scalars: Vec<(String, Vec<f64>)>,
}

/// Display coordinates of a point of M²(κ)×ℝ: the base chart and the height.
pub fn product_display(space: &ProductSpace, p: &PointProd) -> [f64; 3] {
    let (x, y) = space.chart(&p.base);
    [x, y, p.height]
}

impl MeshData {
    pub fn from_surface(mesh: &SurfaceMesh) -> Self {
        Self {
            vertices: mesh.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            triangles: mesh.triangles.clone(),
            scalars: vec![("nu".into(), mesh.nu.clone()), ("u".into(), mesh.u.clone())],
        }
    }

    pub fn from_conjugate(conj: &ConjugateMesh) -> Self {
        let space = conj.params.target();
        Self {
            vertices: conj.vertices.iter().map(|p| product_display(&space, p)).collect(),
            triangles: conj.triangles.clone(),
            scalars: vec![("nu".into(), conj.nu.clone()), ("u".into(), conj.u.clone())],
        }
    }

    pub fn from_extension(ext: &Extension, kappa: f64) -> Self {
        let space = ProductSpace::new(kappa);
        Self {
            vertices: ext.vertices.iter().map(|p| product_display(&space, p)).collect(),
            triangles: ext.triangles.clone(),
            scalars: vec![("nu".into(), ext.nu.clone()), ("u".into(), ext.u.clone())],
        }
    }
}

/// Wavefront OBJ with 1-based face indices.
pub fn obj_string(mesh: &MeshData) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", num(v[0]), num(v[1]), num(v[2]));
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

/// ASCII PLY with the scalars as extra vertex properties.
pub fn ply_string(mesh: &MeshData) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", mesh.vertices.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    for (name, _) in &mesh.scalars {
        let _ = writeln!(s, "property double {name}");
    }
    let _ = writeln!(s, "element face {}", mesh.triangles.len());
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for (i, v) in mesh.vertices.iter().enumerate() {
        let mut line = format!("{} {} {}", num(v[0]), num(v[1]), num(v[2]));
        for (_, vals) in &mesh.scalars {
            line.push(' ');
            line.push_str(&num(vals[i]));
        }
        s.push_str(&line);
        s.push('\n');
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

/// Parse the vertex and face lists of an OBJ written by [`obj_string`].
pub fn parse_obj(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut v = Vec::new();
    let mut f = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let bad = || Error::Io(format!("malformed OBJ line {}: {line}", no + 1));
        match it.next() {
            Some("v") => {
                let xs: Vec<f64> = it.map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                if xs.len() != 3 {
                    return Err(bad());
                }
                v.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let ids: Vec<usize> = it.map(|t| t.parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                if ids.len() != 3 || ids.iter().any(|&i| i == 0 || i > v.len()) {
                    return Err(bad());
                }
                f.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
            }
            _ => {}
        }
    }
    Ok((v, f))
}

/// RFC-4180 CSV with a header row.
pub fn csv_string<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|c| c.as_ref()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Output directory that records every file it writes.
#[derive(Debug)]
pub struct OutputSet {
    root: PathBuf,
    files: Vec<OutputRecord>,
}

impl OutputSet {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(root.as_ref())?;
        Ok(Self { root: root.as_ref().to_path_buf(), files: vec![] })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> Result<PathBuf> {
        if name.contains("..") || Path::new(name).is_absolute() {
            return Err(Error::InvalidParameter(format!("output name must be relative: {name}")));
        }
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, content)?;
        self.files.retain(|f| f.path != name);
        self.files.push(OutputRecord { path: name.into(), bytes: content.len(), sha256: sha256_hex(content) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn files(&self) -> &[OutputRecord] {
        &self.files
    }
}

/// Record of one CLI invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub params: Value,
    pub config: Value,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
    pub summary: Value,
    pub outputs: Vec<OutputRecord>,
    /// SHA-256 of the canonical JSON of (command, params, config, seed).
    pub input_hash: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn input_hash(command: &str, params: &Value, config: &Value, seed: u64) -> Result<String> {
    let canonical = serde_json::to_string(&(command, params, config, seed))?;
    Ok(sha256_hex(canonical.as_bytes()))
}

impl RunManifest {
    pub fn new(command: &str, params: Value, config: Value, seed: u64) -> Result<Self> {
        let hash = input_hash(command, &params, &config, seed)?;
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params,
            config,
            seed,
            started_unix: unix_now(),
            finished_unix: 0.0,
            exit_code: 0,
            summary: Value::Null,
            outputs: vec![],
            input_hash: hash,
        })
    }

    /// Close the run and write the manifest next to the outputs.
    pub fn finish(mut self, out: &mut OutputSet, exit_code: i32, summary: Value) -> Result<PathBuf> {
        self.exit_code = exit_code;
        self.summary = summary;
        self.finished_unix = unix_now();
        self.outputs = out.files().to_vec();
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        let path = out.root().join(MANIFEST_NAME);
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Files listed in the manifest whose content no longer matches the recorded hash.
    pub fn verify_outputs(&self, root: impl AsRef<Path>) -> Result<Vec<String>> {
        let mut bad = vec![];
        for f in &self.outputs {
            let bytes = std::fs::read(root.as_ref().join(&f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                bad.push(f.path.clone());
            }
        }
        Ok(bad)
    }
}
