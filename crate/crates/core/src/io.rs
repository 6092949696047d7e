//! Text formats for points and constraints.
//!
//! Points are CSV without a header, one row per point. Constraint files hold
//! one directive per line: `ML a b`, `CL a b` (0-based point indices) or
//! `CARD j u`. Label files hold one non-negative integer per line. Blank
//! lines and lines starting with `#` are ignored in all three.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use csv::{ReaderBuilder, Trim};

use crate::constraints::ConstraintSet;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::ops::Shape;

fn ingestion(line: usize, message: impl Into<String>) -> Error {
    Error::Ingestion {
        line,
        message: message.into(),
    }
}

pub fn parse_points(path: impl AsRef<Path>) -> Result<DataMatrix> {
    read_points(File::open(path)?)
}

/// Reads CSV points from any reader. Errors carry 1-based line numbers.
pub fn read_points<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut csv = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0;
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ingestion(line, e.to_string())
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rows.is_empty() {
            width = record.len();
        } else if record.len() != width {
            return Err(ingestion(
                line,
                format!("expected {width} columns, found {}", record.len()),
            ));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                let value: f64 = cell
                    .parse()
                    .map_err(|_| ingestion(line, format!("column {}: {cell:?} is not a number", col + 1)))?;
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(ingestion(line, format!("column {}: value is not finite", col + 1)))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ingestion(1, "no data rows"));
    }
    DataMatrix::from_points(&rows)
}

pub fn parse_constraints(path: impl AsRef<Path>, n: usize, k: usize) -> Result<ConstraintSet> {
    read_constraints(BufReader::new(File::open(path)?), n, k)
}

/// Reads a constraint file for `n` points and `k` clusters and validates the
/// result. Cardinality lines must cover every cluster exactly once or be
/// absent altogether.
pub fn read_constraints<R: BufRead>(reader: R, n: usize, k: usize) -> Result<ConstraintSet> {
    let mut must = Vec::new();
    let mut cannot = Vec::new();
    let mut sizes: Vec<Option<usize>> = vec![None; k];
    let mut last_card_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let int = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| ingestion(lineno, format!("{s:?} is not a non-negative integer")))
        };
        match fields.as_slice() {
            [kind @ ("ML" | "CL"), a, b] => {
                let (a, b) = (int(a)?, int(b)?);
                for p in [a, b] {
                    if p >= n {
                        return Err(ingestion(lineno, format!("point index {p} out of range (n={n})")));
                    }
                }
                if a == b {
                    return Err(ingestion(lineno, format!("pair ({a}, {b}) links a point to itself")));
                }
                if *kind == "ML" {
                    must.push((a, b));
                } else {
                    cannot.push((a, b));
                }
            }
            ["CARD", j, u] => {
                let (j, u) = (int(j)?, int(u)?);
                if j >= k {
                    return Err(ingestion(lineno, format!("cluster index {j} out of range (k={k})")));
                }
                if sizes[j].replace(u).is_some() {
                    return Err(ingestion(lineno, format!("cluster {j} has more than one CARD line")));
                }
                last_card_line = lineno;
            }
            [kind @ ("ML" | "CL" | "CARD"), ..] => {
                return Err(ingestion(lineno, format!("{kind} takes exactly two arguments")));
            }
            [other, ..] => {
                return Err(ingestion(lineno, format!("unknown directive {other:?}")));
            }
            [] => unreachable!(),
        }
    }

    let cardinalities = if sizes.iter().all(Option::is_none) {
        None
    } else if let Some(j) = sizes.iter().position(Option::is_none) {
        return Err(ingestion(
            last_card_line,
            format!("CARD lines must cover all {k} clusters or none; cluster {j} is missing"),
        ));
    } else {
        Some(sizes.into_iter().flatten().collect())
    };

    let set = ConstraintSet::new(cardinalities, &must, &cannot);
    set.validate(&Shape::new(n, k, 1)?)?;
    Ok(set)
}

pub fn parse_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_labels(BufReader::new(File::open(path)?))
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        labels.push(
            body.parse()
                .map_err(|_| ingestion(idx + 1, format!("{body:?} is not a label")))?,
        );
    }
    if labels.is_empty() {
        return Err(ingestion(1, "no labels"));
    }
    Ok(labels)
}
