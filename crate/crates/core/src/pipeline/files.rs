//! Plain-text artifact formats shared by the stages.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::analysis::similarity::SimilarityMatrix;
use crate::community_vectors::CommunityVector;
use crate::error::{Error, Result};

/// Rounds to `digits` significant digits. Zero, negative zero and
/// non-finite values pass through (negative zero becomes zero).
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x + 0.0;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse::<f64>()
        .expect("formatted float parses")
        + 0.0
}

/// Six significant digits, the precision of every report value.
pub fn r6(x: f64) -> f64 {
    round_sig(x, 6)
}

pub fn fmt6(x: f64) -> String {
    format!("{}", r6(x))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Cache {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// One row per community: `community \t kind \t v1 \t ... \t vd`, full
/// precision so the file can be read back exactly.
pub fn write_vectors_tsv(path: &Path, vectors: &[CommunityVector]) -> Result<()> {
    let mut w = create(path)?;
    for v in vectors {
        write!(w, "{}\t{}", v.community, v.kind).map_err(|e| Error::io(path, e))?;
        for x in &v.values {
            write!(w, "\t{x}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_vectors_tsv(path: &Path) -> Result<Vec<CommunityVector>> {
    let bad = |reason: String| Error::Cache {
        path: path.to_path_buf(),
        reason,
    };
    let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split('\t');
        let community = parts.next().filter(|c| !c.is_empty()).ok_or_else(|| bad(format!("line {}: empty", n + 1)))?;
        let kind = parts
            .next()
            .ok_or_else(|| bad(format!("line {}: missing kind", n + 1)))?
            .parse()
            .map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        let values = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        out.push(CommunityVector {
            community: community.to_string(),
            kind,
            values,
        });
    }
    Ok(out)
}

/// Square matrix with a header row and a leading name column.
pub fn write_matrix_tsv(path: &Path, names: &[String], values: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(w, "community").map_err(io)?;
    for n in names {
        write!(w, "\t{n}").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for (name, row) in names.iter().zip(values) {
        write!(w, "{name}").map_err(io)?;
        for x in row {
            write!(w, "\t{}", fmt6(*x)).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_similarity_tsv(path: &Path, sim: &SimilarityMatrix) -> Result<()> {
    write_matrix_tsv(path, &sim.communities, &sim.values)
}

/// Rows of already-formatted cells joined by tabs.
pub fn write_table_tsv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join("\t")).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.join("\t")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// A file name derived from a community name: characters outside
/// `[A-Za-z0-9_.-]` become `_`.
pub fn safe_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
        .collect()
}

/// Every regular file under `dir`, as sorted paths relative to it.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                out.push(path.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

/// Renders rows as left-aligned columns separated by two spaces.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
