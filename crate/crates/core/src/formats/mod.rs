//! Ensemble and result file formats.
//!
//! Ensemble JSON (canonical):
//!
//! ```text
//! {"num_objects":4,"num_clusters":2,"solutions":[{"worker_id":"a","labels":[1,1,2,2]}, ...]}
//! ```
//!
//! Ensemble CSV: a header row `worker_id,<object id>,...` followed by one row
//! per worker holding that worker's 1-based labels. The object ids in the
//! header are informational. CSV carries no cluster count, so it is given
//! alongside the format or inferred as the largest label present.

mod result;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{ClusteringSolution, Ensemble, Partition};

pub use result::{
    format_real, parse_result, serialize_json, serialize_result, BaselineBlock, ConfigBlock,
    ResultDocument, WeightBlock,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv { num_clusters: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    pub num_objects: usize,
    pub num_clusters: usize,
    pub solutions: Vec<SolutionDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub worker_id: String,
    pub labels: Vec<i64>,
}

impl From<&Ensemble> for EnsembleDocument {
    fn from(e: &Ensemble) -> Self {
        Self {
            num_objects: e.num_objects(),
            num_clusters: e.num_clusters(),
            solutions: e
                .solutions()
                .iter()
                .map(|s| SolutionDocument {
                    worker_id: s.worker_id.clone(),
                    labels: s.labels.labels().iter().map(|&l| l as i64).collect(),
                })
                .collect(),
        }
    }
}

impl EnsembleDocument {
    pub fn into_ensemble(self) -> Result<Ensemble> {
        let n = self.num_clusters;
        if n == 0 {
            return Err(Error::parse("num_clusters", "must be at least 1"));
        }
        if self.solutions.len() < 2 {
            return Err(Error::parse(
                "solutions",
                format!("at least 2 solutions are required, got {}", self.solutions.len()),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        let mut solutions = Vec::with_capacity(self.solutions.len());
        for (i, s) in self.solutions.into_iter().enumerate() {
            if !seen.insert(s.worker_id.clone()) {
                return Err(Error::parse(
                    format!("solutions[{i}].worker_id"),
                    format!("duplicate worker_id {:?}", s.worker_id),
                ));
            }
            if s.labels.len() != self.num_objects {
                return Err(Error::parse(
                    format!("solutions[{i}].labels"),
                    format!("has {} labels, expected num_objects = {}", s.labels.len(), self.num_objects),
                ));
            }
            let labels = checked_labels(&s.labels, n, |j| format!("solutions[{i}].labels[{j}]"))?;
            solutions.push(ClusteringSolution::new(s.worker_id, Partition::new(labels, n)?));
        }
        Ensemble::new(n, solutions)
    }
}

fn checked_labels(raw: &[i64], n: usize, location: impl Fn(usize) -> String) -> Result<Vec<u32>> {
    raw.iter()
        .enumerate()
        .map(|(j, &l)| {
            if l < 1 || l as u64 > n as u64 {
                Err(Error::parse(location(j), format!("label {l} outside 1..={n}")))
            } else {
                Ok(l as u32)
            }
        })
        .collect()
}

pub fn parse_ensemble(bytes: &[u8], format: Format) -> Result<Ensemble> {
    match format {
        Format::Json => parse_ensemble_json(bytes),
        Format::Csv { num_clusters } => parse_ensemble_csv(bytes, num_clusters),
    }
}

fn parse_ensemble_json(bytes: &[u8]) -> Result<Ensemble> {
    let doc: EnsembleDocument = serde_json::from_slice(bytes).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    doc.into_ensemble()
}

fn parse_ensemble_csv(bytes: &[u8], num_clusters: Option<usize>) -> Result<Ensemble> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::parse(format!("row {line}"), e.to_string())
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("worker_id") {
        return Err(Error::parse("row 1, column 1", "header must start with worker_id"));
    }
    let objects: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if objects.is_empty() {
        return Err(Error::parse("row 1", "header lists no objects"));
    }

    let mut rows: Vec<(u64, String, Vec<i64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let worker = record.get(0).unwrap_or_default().to_owned();
        if worker.is_empty() {
            return Err(Error::parse(format!("row {line}, column worker_id"), "empty worker_id"));
        }
        let labels = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, field)| {
                field.parse::<i64>().map_err(|_| {
                    Error::parse(
                        format!("row {line}, column {}", objects[j]),
                        format!("{field:?} is not an integer label"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, worker, labels));
    }

    let n = match num_clusters {
        Some(n) => n,
        None => rows
            .iter()
            .flat_map(|(_, _, l)| l.iter().copied())
            .max()
            .unwrap_or(0)
            .max(1) as usize,
    };
    if rows.len() < 2 {
        return Err(Error::parse("rows", format!("at least 2 workers are required, got {}", rows.len())));
    }
    let mut seen = std::collections::HashSet::new();
    let mut solutions = Vec::with_capacity(rows.len());
    for (line, worker, raw) in rows {
        if !seen.insert(worker.clone()) {
            return Err(Error::parse(
                format!("row {line}, column worker_id"),
                format!("duplicate worker_id {worker:?}"),
            ));
        }
        let labels = checked_labels(&raw, n, |j| format!("row {line}, column {}", objects[j]))?;
        solutions.push(ClusteringSolution::new(worker, Partition::new(labels, n)?));
    }
    Ensemble::new(n, solutions)
}

pub fn serialize_ensemble(e: &Ensemble, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec(&EnsembleDocument::from(e)).expect("ensemble serializes");
            out.push(b'\n');
            out
        }
        Format::Csv { .. } => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let header = std::iter::once("worker_id".to_owned())
                .chain((1..=e.num_objects()).map(|i| format!("o{i}")));
            writer.write_record(header).expect("write to memory");
            for s in e.solutions() {
                let row = std::iter::once(s.worker_id.clone())
                    .chain(s.labels.labels().iter().map(u32::to_string));
                writer.write_record(row).expect("write to memory");
            }
            writer.into_inner().expect("flush to memory")
        }
    }
}

/// Reads a bare label vector: either a JSON array of integers or
/// integers separated by whitespace and/or commas.
pub fn parse_labels(bytes: &[u8]) -> Result<Partition> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("input", e.to_string()))?;
    let trimmed = text.trim();
    let raw: Vec<i64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| {
            Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?
    } else {
        trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(i, t)| {
                t.parse::<i64>()
                    .map_err(|_| Error::parse(format!("label {}", i + 1), format!("{t:?} is not an integer")))
            })
            .collect::<Result<_>>()?
    };
    if raw.is_empty() {
        return Err(Error::parse("input", "no labels"));
    }
    let k = raw.iter().copied().max().unwrap_or(1).max(1) as usize;
    let labels = checked_labels(&raw, k, |j| format!("label {}", j + 1))?;
    Partition::new(labels, k)
}
