//! File formats: headerless numeric CSV, JSON, binary chains with a JSON
//! sidecar, draw export and run manifests.
//!
//! Reals are written with the shortest representation that parses back to
//! the same bits, so a write/read round trip is exact.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::select::{ChainKind, ChainRecord, Draw};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
const CHAIN_MAGIC: &[u8; 8] = b"DAGRCHN1";

pub fn format_real(v: f64) -> String {
    format!("{v:?}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = create(path)?;
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_real(m[(i, j)]));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Indicator matrix written as `0`/`1`.
pub fn write_indicator_csv(path: &Path, m: &nalgebra::DMatrix<bool>) -> Result<()> {
    write_matrix_csv(path, &m.map(|b| if b { 1.0 } else { 0.0 }))
}

pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    write_matrix_csv(path, &Matrix::from_column_slice(v.len(), 1, v))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut values = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e))?;
        match ncols {
            None => ncols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::parse(
                    path,
                    format!("row {} has {} fields, expected {c}", row + 1, record.len()),
                ))
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!("row {}, column {}: {field:?} is not a number", row + 1, col + 1),
                )
            })?;
            values.push(v);
        }
        nrows += 1;
    }
    Ok(Matrix::from_row_slice(nrows, ncols.unwrap_or(0), &values))
}

pub fn read_indicator_csv(path: &Path) -> Result<nalgebra::DMatrix<bool>> {
    let m = read_matrix_csv(path)?;
    if m.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::parse(path, "indicator entries must be 0 or 1"));
    }
    Ok(m.map(|v| v == 1.0))
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() > 1 && m.nrows() > 1 {
        return Err(Error::parse(path, "expected a single row or column"));
    }
    Ok(m.iter().copied().collect())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::parse(path, e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| Error::parse(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hash of the canonical (key-sorted, compact) JSON form of `config`.
pub fn config_hash(config: &serde_json::Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

/// JSON sidecar of a binary chain file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHeader {
    pub artifact_version: String,
    pub kind: ChainKind,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub draws: usize,
    pub config: serde_json::Value,
    pub payload_sha256: String,
}

pub fn sidecar_path(chain_path: &Path) -> PathBuf {
    chain_path.with_extension("json")
}

/// Writes `path` (magic + binary draws) and its JSON sidecar.
pub fn write_chain(path: &Path, chain: &ChainRecord) -> Result<()> {
    let payload = bincode::serialize(&chain.draws).map_err(|e| Error::parse(path, e))?;
    let mut w = create(path)?;
    w.write_all(CHAIN_MAGIC)
        .and_then(|_| w.write_all(&payload))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))?;
    let header = ChainHeader {
        artifact_version: ARTIFACT_VERSION.to_string(),
        kind: chain.kind,
        p: chain.p,
        q: chain.q,
        seed: chain.seed,
        draws: chain.draws.len(),
        config: chain.config.clone(),
        payload_sha256: sha256_hex(&payload),
    };
    write_json(&sidecar_path(path), &header)
}

pub fn read_chain(path: &Path) -> Result<ChainRecord> {
    let header: ChainHeader = read_json(&sidecar_path(path))?;
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let payload = bytes
        .strip_prefix(CHAIN_MAGIC.as_slice())
        .ok_or_else(|| Error::parse(path, "not a chain file"))?;
    if sha256_hex(payload) != header.payload_sha256 {
        return Err(Error::parse(path, "chain payload does not match its sidecar hash"));
    }
    let draws: Vec<Draw> = bincode::deserialize(payload).map_err(|e| Error::parse(path, e))?;
    if draws.len() != header.draws {
        return Err(Error::parse(path, "draw count does not match the sidecar"));
    }
    Ok(ChainRecord {
        kind: header.kind,
        p: header.p,
        q: header.q,
        seed: header.seed,
        config: header.config,
        draws,
    })
}

/// Long-format draws: `draw,param,row,col,value` with 1-based indices.
/// `param` is `gamma`/`b` for coefficients (row = predictor, col = response),
/// `edge`/`L` for DAG entries (row = parent, col = child), and `d`.
pub fn export_chain_csv(path: &Path, chain: &ChainRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io_err = |e: csv::Error| Error::parse(path, e);
    w.write_record(["draw", "param", "row", "col", "value"])
        .map_err(io_err)?;
    for (t, draw) in chain.draws.iter().enumerate() {
        let t = (t + 1).to_string();
        if let Some(coef) = &draw.coef {
            for (idx, &(k, j)) in coef.active.iter().enumerate() {
                let (row, col) = ((k + 1).to_string(), (j + 1).to_string());
                w.write_record([t.as_str(), "gamma", &row, &col, "1"]).map_err(io_err)?;
                if let Some(values) = &coef.values {
                    w.write_record([t.as_str(), "b", &row, &col, &format_real(values[idx])])
                        .map_err(io_err)?;
                }
            }
        }
        if let Some(dag) = &draw.dag {
            let mut pos = 0;
            for (j, pa) in dag.parents.iter().enumerate() {
                let col = (j + 1).to_string();
                for &i in pa {
                    let row = (i + 1).to_string();
                    w.write_record([t.as_str(), "edge", &row, &col, "1"]).map_err(io_err)?;
                    if let Some(l) = &dag.l_values {
                        w.write_record([t.as_str(), "L", &row, &col, &format_real(l[pos])])
                            .map_err(io_err)?;
                    }
                    pos += 1;
                }
            }
            if let Some(d) = &dag.d {
                for (j, v) in d.iter().enumerate() {
                    let idx = (j + 1).to_string();
                    w.write_record([t.as_str(), "d", &idx, &idx, &format_real(*v)])
                        .map_err(io_err)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Manifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: command.to_string(),
            seed,
            config_hash: config_hash(&config),
            config,
            files: BTreeMap::new(),
        }
    }

    /// Records the hashes of `names` inside `dir`.
    pub fn record_files(&mut self, dir: &Path, names: &[String]) -> Result<()> {
        for name in names {
            self.files.insert(name.clone(), file_sha256(&dir.join(name))?);
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), self)
    }
}
