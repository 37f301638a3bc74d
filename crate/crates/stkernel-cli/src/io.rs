//! CSV ingestion and export.

use std::fs::File;
use std::path::Path;

use stkernel::covmat::SpaceTimeDesign;

use crate::error::CliError;

const AXES: [&str; 3] = ["x", "y", "z"];

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Observations with the design they were recorded on.
pub struct Observations {
    pub design: SpaceTimeDesign,
    /// One vector per replicate, in design order.
    pub replicates: Vec<Vec<f64>>,
}

fn open(path: &Path, field: &str) -> Result<csv::Reader<File>, CliError> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(field, format!("{}: {e}", path.display())))
}

fn spatial_dim(names: &[&str], field: &str) -> Result<usize, CliError> {
    let d = names.len().saturating_sub(1);
    if !(1..=3).contains(&d) || names[..d] != AXES[..d] || names[d] != "t" {
        return Err(CliError::config(field, format!("expected header x[,y][,z],t, got {}", names.join(","))));
    }
    Ok(d)
}

fn parse_cell(s: &str, field: &str, line: u64) -> Result<f64, CliError> {
    s.parse::<f64>().map_err(|_| CliError::config(field, format!("line {line}: cannot parse {s:?} as a number")))
}

fn design_from(dim: usize, pts: Vec<(Vec<f64>, f64)>, field: &str) -> Result<SpaceTimeDesign, CliError> {
    SpaceTimeDesign::new(dim, pts).map_err(|e| CliError::config(field, e.to_string()))
}

/// Reads a design CSV with header `x[,y][,z],t`.
pub fn read_design(path: &Path, field: &str) -> Result<SpaceTimeDesign, CliError> {
    let mut rdr = open(path, field)?;
    let header = rdr.headers().map_err(|e| CliError::config(field, e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let d = spatial_dim(&names, field)?;
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::config(field, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: Vec<f64> = rec.iter().map(|s| parse_cell(s, field, line)).collect::<Result<_, _>>()?;
        pts.push((v[..d].to_vec(), v[d]));
    }
    design_from(d, pts, field)
}

/// Groups `(replicate, point, value)` rows into per-replicate vectors in design order.
fn group(dim: usize, rows: Vec<(i64, Vec<f64>, f64, f64)>, field: &str) -> Result<Observations, CliError> {
    let mut reps: Vec<i64> = rows.iter().map(|r| r.0).collect();
    reps.sort_unstable();
    reps.dedup();
    let first = reps[0];
    let pts: Vec<(Vec<f64>, f64)> = rows.iter().filter(|r| r.0 == first).map(|r| (r.1.clone(), r.2)).collect();
    let design = design_from(dim, pts.clone(), field)?;
    let mut replicates = Vec::with_capacity(reps.len());
    for rep in reps {
        let sel: Vec<&(i64, Vec<f64>, f64, f64)> = rows.iter().filter(|r| r.0 == rep).collect();
        if sel.len() != pts.len() || sel.iter().zip(&pts).any(|(a, b)| a.1 != b.0 || a.2 != b.1) {
            return Err(CliError::config(field, format!("replicate {rep} is not observed on the design of replicate {first}")));
        }
        replicates.push((0..design.len()).map(|i| sel[design.input_index(i)].3).collect());
    }
    Ok(Observations { design, replicates })
}

/// Reads observations with header `[replicate,]x[,y][,z],t,value`.
pub fn read_observations(path: &Path, field: &str) -> Result<Observations, CliError> {
    let mut rdr = open(path, field)?;
    let header = rdr.headers().map_err(|e| CliError::config(field, e.to_string()))?.clone();
    let mut names: Vec<&str> = header.iter().collect();
    let with_rep = names.first() == Some(&"replicate");
    if with_rep {
        names.remove(0);
    }
    if names.last() != Some(&"value") {
        return Err(CliError::config(field, "last column must be value"));
    }
    let d = spatial_dim(&names[..names.len() - 1], field)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::config(field, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut cells: Vec<&str> = rec.iter().collect();
        let rep = if with_rep {
            let s = cells.remove(0);
            s.parse::<i64>().map_err(|_| CliError::config(field, format!("line {line}: bad replicate {s:?}")))?
        } else {
            0
        };
        let v: Vec<f64> = cells.iter().map(|s| parse_cell(s, field, line)).collect::<Result<_, _>>()?;
        rows.push((rep, v[..d].to_vec(), v[d], v[d + 1]));
    }
    if rows.is_empty() {
        return Err(CliError::config(field, "no observations"));
    }
    group(d, rows, field)
}

/// Inline rows `[x.., t, value]`.
pub fn inline_observations(dim: usize, rows: &[Vec<f64>], field: &str) -> Result<Observations, CliError> {
    if rows.is_empty() {
        return Err(CliError::config(field, "no observations"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if r.len() != dim + 2 {
            return Err(CliError::config(format!("{field}.rows[{k}]"), format!("expected {} numbers", dim + 2)));
        }
        out.push((0, r[..dim].to_vec(), r[dim], r[dim + 1]));
    }
    group(dim, out, field)
}

/// Inline design rows `[x.., t]`.
pub fn inline_design(dim: usize, rows: &[Vec<f64>], field: &str) -> Result<SpaceTimeDesign, CliError> {
    let pts = split_points(dim, rows, field)?;
    design_from(dim, pts, field)
}

/// Splits `[x.., t]` rows into (coordinates, time).
pub fn split_points(dim: usize, rows: &[Vec<f64>], field: &str) -> Result<Vec<(Vec<f64>, f64)>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            if r.len() != dim + 1 {
                Err(CliError::config(format!("{field}[{k}]"), format!("expected {} numbers", dim + 1)))
            } else {
                Ok((r[..dim].to_vec(), r[dim]))
            }
        })
        .collect()
}

/// Column names `x[,y][,z],t` for a spatial dimension.
pub fn point_header(dim: usize) -> Vec<String> {
    AXES[..dim].iter().map(|s| s.to_string()).chain(std::iter::once("t".to_string())).collect()
}

/// Formatted `x.., t` cells.
pub fn point_cells(s: &[f64], t: f64) -> Vec<String> {
    s.iter().map(|&v| fmt_f64(v)).chain(std::iter::once(fmt_f64(t))).collect()
}

/// In-memory CSV table written in one piece.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let out = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(out)?;
        w.write_record(&self.header).map_err(out)?;
        for r in &self.rows {
            w.write_record(r).map_err(out)?;
        }
        w.flush().map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
    }
}
