//! Embedding file formats.
//!
//! Text: a `num_nodes dim` header, then `name v1 .. vdim` per node.
//! Binary: raw little-endian f32, row-major, with a JSON sidecar holding the
//! shape and node names.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::Embeddings;
use crate::error::{Error, Result};
use crate::graph::NodeNames;
use crate::real::Real;

pub fn write_embeddings_text<T: Real>(path: &Path, emb: &Embeddings<T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{} {}", emb.len(), emb.dim).map_err(io)?;
    for i in 0..emb.len() {
        write!(out, "{}", emb.names.name(i)).map_err(io)?;
        for x in emb.row(i) {
            write!(out, " {x}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_embeddings_text(path: &Path) -> Result<Embeddings<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "empty embedding file")),
    };
    let mut it = header.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(n)), Some(Ok(dim)), None) = (it.next(), it.next(), it.next()) else {
        return Err(Error::parse(path, 1, "expected `num_nodes dim` header"));
    };
    let mut names = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let name = cols.next().expect("non-empty line");
        let before = values.len();
        for c in cols {
            let x = c
                .parse::<f64>()
                .map_err(|e| Error::parse(path, lineno, format!("`{c}`: {e}")))?;
            values.push(x);
        }
        if values.len() - before != dim {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dim} values, found {}", values.len() - before),
            ));
        }
        names.push(name.to_string());
    }
    if names.len() != n {
        return Err(Error::parse(
            path,
            1,
            format!("header says {n} nodes, found {}", names.len()),
        ));
    }
    Ok(Embeddings {
        names: NodeNames::new(names)?,
        dim,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryShape {
    pub num_nodes: usize,
    pub dim: usize,
    pub dtype: String,
    pub byte_order: String,
    pub names: Vec<String>,
}

/// Writes `path` (raw f32 LE) and `path.json` (shape sidecar).
pub fn write_embeddings_binary<T: Real>(path: &Path, emb: &Embeddings<T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for x in &emb.values {
        out.write_all(&(x.as_f64() as f32).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    let shape = BinaryShape {
        num_nodes: emb.len(),
        dim: emb.dim,
        dtype: "f32".into(),
        byte_order: "little".into(),
        names: emb.names.iter().map(String::from).collect(),
    };
    let side = sidecar(path);
    let json = serde_json::to_string_pretty(&shape).expect("serializable");
    std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

pub fn read_embeddings_binary(path: &Path) -> Result<Embeddings<f32>> {
    let side = sidecar(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let shape: BinaryShape =
        serde_json::from_str(&text).map_err(|e| Error::parse(&side, e.line(), e.to_string()))?;
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != 4 * shape.num_nodes * shape.dim || shape.names.len() != shape.num_nodes {
        return Err(Error::parse(
            path,
            0,
            "size does not match the shape sidecar",
        ));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Embeddings {
        names: NodeNames::new(shape.names)?,
        dim: shape.dim,
        values,
    })
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
