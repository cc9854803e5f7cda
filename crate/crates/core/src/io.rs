//! CSV and JSON files read and written by the command-line tool.
//!
//! Matrices are written with a `node_id` header row and one labelled row
//! per node. Floats use Rust's shortest round-trip formatting, so reruns
//! produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::Partition;

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

/// Square matrix with node ids on both axes.
pub fn write_matrix_csv(path: &Path, ids: &[String], m: &DMatrix<f64>) -> Result<()> {
    let cols: Vec<String> = ids.to_vec();
    write_labelled_csv(path, ids, &cols, m)
}

/// Rows labelled by node id, columns by `columns`.
pub fn write_labelled_csv(path: &Path, ids: &[String], columns: &[String], m: &DMatrix<f64>) -> Result<()> {
    if ids.len() != m.nrows() || columns.len() != m.ncols() {
        return Err(Error::dim("write_csv", format!("{}x{} matrix, {} ids, {} columns", m.nrows(), m.ncols(), ids.len(), columns.len())));
    }
    let mut s = String::from("node_id");
    for c in columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (i, id) in ids.iter().enumerate() {
        s.push_str(id);
        for j in 0..m.ncols() {
            write!(s, ",{}", m[(i, j)]).expect("writing to a String");
        }
        s.push('\n');
    }
    write_text(path, &s)
}

/// Read a matrix written by `write_matrix_csv`, or a bare numeric CSV.
/// Returns the row ids (generated as 0..n when absent) and the values.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')).peekable();
    let labelled = lines.peek().map_or(false, |(_, l)| l.starts_with("node_id"));
    if labelled {
        lines.next();
    }
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let mut fields = line.split(',');
        if labelled {
            ids.push(fields.next().unwrap_or_default().trim().to_string());
        }
        let row = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad number {f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if !labelled {
        ids = (0..n).map(|i| i.to_string()).collect();
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok((ids, DMatrix::from_row_slice(n, m, &flat)))
}

pub fn write_partition_csv(path: &Path, ids: &[String], p: &Partition) -> Result<()> {
    let mut s = String::from("node_id,community\n");
    for (id, l) in ids.iter().zip(p.labels()) {
        writeln!(s, "{id},{l}").expect("writing to a String");
    }
    write_text(path, &s)
}

/// Reads `node_id,community` rows. The community column may hold any labels.
pub fn read_partition_csv(path: &Path) -> Result<(Vec<String>, Partition)> {
    let rows = read_two_columns(path)?;
    let mut names = std::collections::HashMap::new();
    let labels: Vec<usize> = rows
        .iter()
        .map(|(_, c)| {
            let next = names.len();
            *names.entry(c.clone()).or_insert(next)
        })
        .collect();
    Ok((rows.into_iter().map(|r| r.0).collect(), Partition::from_labels(labels)))
}

/// Reads `node_id,value` rows, skipping a header whose second field is not numeric.
pub fn read_scores_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    read_two_columns(path)?
        .into_iter()
        .enumerate()
        .map(|(i, (id, v))| {
            v.parse::<f64>()
                .map(|x| (id, x))
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("bad value {v:?}: {e}") })
        })
        .collect()
}

fn read_two_columns(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (f.next(), f.next()) else {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: "expected two comma-separated fields".into(),
            });
        };
        if out.is_empty() && a == "node_id" {
            continue;
        }
        out.push((a.to_string(), b.to_string()));
    }
    Ok(out)
}

pub fn write_spikes_csv(path: &Path, events: &[(f64, usize)]) -> Result<()> {
    let mut s = String::from("time_ms,neuron_id\n");
    for (t, i) in events {
        writeln!(s, "{t},{i}").expect("writing to a String");
    }
    write_text(path, &s)
}

/// Plain numeric matrix with a header of column indices.
pub fn write_plain_csv(path: &Path, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    write_text(path, &s)
}
