//! Dataset readers and writer.
//!
//! Two input formats:
//!
//! * edge-lines: one hyperedge per line, whitespace-separated vertex ids,
//!   optional leading `t=<int>` token for a timestamp;
//! * simplicial-3file: a prefix naming `<prefix>-nverts.txt` (cardinality per
//!   simplex), `<prefix>-simplices.txt` (flattened vertex stream), and
//!   `<prefix>-times.txt` (one timestamp per simplex).
//!
//! External ids are assigned 1..n in file order; exact-duplicate hyperedges
//! are retained.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hyperdyn::hypergraph::{DynHypergraph, EdgeSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("parse error at {path}:{line}: {msg}")]
    ParseError {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cardinality mismatch in {path}: {msg}")]
    CardinalityMismatch { path: String, msg: String },
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::ParseError {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn parse_edge_lines(path: &Path) -> Result<Vec<EdgeSpec>, IngestError> {
    let text = read(path)?;
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut timestamp = None;
        let mut vertices = Vec::new();
        for tok in raw.split_whitespace() {
            if let Some(ts) = tok.strip_prefix("t=") {
                if timestamp.is_some() || !vertices.is_empty() {
                    return Err(parse_err(path, lineno, "t= must be the leading token"));
                }
                timestamp = Some(ts.parse::<i64>().map_err(|_| {
                    parse_err(path, lineno, format!("bad timestamp {tok:?}"))
                })?);
            } else {
                vertices.push(tok.parse::<u64>().map_err(|_| {
                    parse_err(path, lineno, format!("bad vertex id {tok:?}"))
                })?);
            }
        }
        if vertices.is_empty() {
            return Err(parse_err(path, lineno, "no vertex ids"));
        }
        specs.push(EdgeSpec {
            external_id: specs.len() as u64 + 1,
            vertices,
            timestamp,
        });
    }
    Ok(specs)
}

fn companion(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", prefix.display()))
}

fn parse_int_stream(path: &Path) -> Result<Vec<i64>, IngestError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        for tok in raw.split_whitespace() {
            out.push(tok.parse::<i64>().map_err(|_| {
                parse_err(path, idx + 1, format!("bad integer {tok:?}"))
            })?);
        }
    }
    Ok(out)
}

fn parse_u64_stream(path: &Path, what: &str) -> Result<Vec<u64>, IngestError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        for tok in raw.split_whitespace() {
            out.push(tok.parse::<u64>().map_err(|_| {
                parse_err(path, idx + 1, format!("bad {what} {tok:?}"))
            })?);
        }
    }
    Ok(out)
}

pub fn parse_simplicial(prefix: &Path) -> Result<Vec<EdgeSpec>, IngestError> {
    let nverts_path = companion(prefix, "-nverts.txt");
    let simplices_path = companion(prefix, "-simplices.txt");
    let times_path = companion(prefix, "-times.txt");

    let nverts = parse_u64_stream(&nverts_path, "cardinality")?;
    let simplices = parse_u64_stream(&simplices_path, "vertex id")?;
    let times = parse_int_stream(&times_path)?;

    let total: u64 = nverts.iter().sum();
    if total != simplices.len() as u64 {
        return Err(IngestError::CardinalityMismatch {
            path: simplices_path.display().to_string(),
            msg: format!(
                "nverts sums to {total} but the vertex stream has {} entries",
                simplices.len()
            ),
        });
    }
    if times.len() != nverts.len() {
        return Err(IngestError::CardinalityMismatch {
            path: times_path.display().to_string(),
            msg: format!(
                "{} timestamps for {} simplices",
                times.len(),
                nverts.len()
            ),
        });
    }

    let mut specs = Vec::with_capacity(nverts.len());
    let mut offset = 0usize;
    for (i, &card) in nverts.iter().enumerate() {
        let card = card as usize;
        specs.push(EdgeSpec {
            external_id: i as u64 + 1,
            vertices: simplices[offset..offset + card].to_vec(),
            timestamp: Some(times[i]),
        });
        offset += card;
    }
    Ok(specs)
}

/// Writes the live hyperedges as edge lines in external-id order, so
/// ingest -> export -> ingest reproduces the hypergraph. Edges emptied by
/// vertex deletions have no line representation and are skipped.
pub fn export_edge_lines(g: &DynHypergraph, path: &Path) -> anyhow::Result<(usize, usize)> {
    let mut ids = g.live_edges();
    ids.sort_unstable();
    let mut out = String::new();
    let mut skipped = 0usize;
    for id in ids {
        let vs = g.incident_vertices(id)?;
        if vs.is_empty() {
            skipped += 1;
            continue;
        }
        if let Some(t) = g.timestamp(id) {
            write!(out, "t={t}").unwrap();
            for v in &vs {
                write!(out, " {v}").unwrap();
            }
        } else {
            let mut first = true;
            for v in &vs {
                if !first {
                    out.push(' ');
                }
                write!(out, "{v}").unwrap();
                first = false;
            }
        }
        out.push('\n');
    }
    let written = g.live_edges().len() - skipped;
    fs::write(path, out)?;
    Ok((written, skipped))
}
