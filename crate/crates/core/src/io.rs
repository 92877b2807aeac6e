//! On-disk formats.
//!
//! A network directory holds `edges.tsv` (header `i\tj\tweight`, one line per
//! nonzero pair with `i < j`, zero-based) and `meta.json`
//! (`{n, t_len, alpha_level, tickers}`). Planted instances add `truth.json`.
//! Every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::corrnet::ValidatedCorrMatrix;
use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::randgen::GroundTruth;
use crate::signed::{Module, ModuleReport, SignedGraph};

pub const EDGES_FILE: &str = "edges.tsv";
pub const META_FILE: &str = "meta.json";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub n: usize,
    pub t_len: Option<usize>,
    pub alpha_level: Option<f64>,
    pub tickers: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.flush().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Sparse edge list of the nonzero off-diagonal entries.
pub fn edge_list_tsv(values: &SymMatrix) -> String {
    let mut out = String::from("i\tj\tweight\n");
    for (i, j, w) in values.pairs() {
        if w != 0.0 {
            let _ = writeln!(out, "{i}\t{j}\t{w}");
        }
    }
    out
}

/// Parses an edge list produced by [`edge_list_tsv`] into an `n`-node matrix.
pub fn parse_edge_list(text: &str, n: usize) -> Result<SymMatrix> {
    let mut m = SymMatrix::identity(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
            continue;
        }
        let bad = |what: &str| Error::Malformed(format!("edge list line {}: {what}", lineno + 1));
        let mut fields = line.split('\t');
        let (Some(i), Some(j), Some(w), None) = (fields.next(), fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected 3 tab-separated fields"));
        };
        let i: usize = i.parse().map_err(|_| bad("bad row index"))?;
        let j: usize = j.parse().map_err(|_| bad("bad column index"))?;
        let w: f64 = w.parse().map_err(|_| bad("bad weight"))?;
        if !(i < j && j < n) {
            return Err(bad("indices must satisfy i < j < n"));
        }
        if !(-1.0..=1.0).contains(&w) {
            return Err(bad("weight outside [-1, 1]"));
        }
        m.set(i, j, w);
    }
    Ok(m)
}

pub fn write_network(dir: &Path, v: &ValidatedCorrMatrix) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_atomic(&dir.join(EDGES_FILE), edge_list_tsv(v.values()).as_bytes())?;
    let meta = NetworkMeta {
        n: v.n(),
        t_len: v.t_len(),
        alpha_level: v.alpha_level(),
        tickers: v.labels().to_vec(),
    };
    write_json(&dir.join(META_FILE), &meta)
}

pub fn read_network(dir: &Path) -> Result<ValidatedCorrMatrix> {
    let meta: NetworkMeta = read_json(&dir.join(META_FILE))?;
    if meta.tickers.len() != meta.n {
        return Err(Error::Malformed(format!(
            "{}: {} tickers for n = {}",
            dir.join(META_FILE).display(),
            meta.tickers.len(),
            meta.n
        )));
    }
    let edges_path = dir.join(EDGES_FILE);
    let text = std::fs::read_to_string(&edges_path).map_err(io_err(&edges_path))?;
    let values = parse_edge_list(&text, meta.n)?;
    ValidatedCorrMatrix::new(values, meta.tickers, meta.t_len, meta.alpha_level)
}

/// Validated matrix whose entries are the graph's signs, so that thresholding
/// it at any sigma in (0, 1] gives the graph back.
pub fn signed_as_matrix(g: &SignedGraph) -> Result<ValidatedCorrMatrix> {
    let values = SymMatrix::from_fn(g.n(), |i, j| f64::from(g.sign(i, j)));
    ValidatedCorrMatrix::synthetic(values)
}

pub fn write_truth(dir: &Path, truth: &GroundTruth) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join(TRUTH_FILE), truth)
}

pub fn write_module(path: &Path, m: &Module) -> Result<()> {
    write_json(path, &m.report())
}

pub fn read_module(path: &Path) -> Result<Module> {
    let r: ModuleReport = read_json(path)?;
    Ok(r.into())
}

/// Delimited table with a header row.
pub fn table<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>], delim: char) -> String {
    let mut out = header.join(&delim.to_string());
    out.push('\n');
    for row in rows {
        let cells: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
        out.push_str(&cells.join(&delim.to_string()));
        out.push('\n');
    }
    out
}
