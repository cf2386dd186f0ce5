//! Consensus result documents.
//!
//! Keys are written in declaration order and every real number is printed
//! with 12 significant digits, so the same result always yields the same
//! bytes.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{ConsensusConfig, ConsensusResult};
use crate::metrics::MetricSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub num_objects: usize,
    pub num_clusters: usize,
    pub reference_worker: String,
    /// 1-based position of the reference solution.
    pub reference_index: usize,
    pub labels: Vec<u32>,
    pub iterations: Vec<usize>,
    pub distributions: Vec<Vec<f64>>,
    pub weights: WeightBlock,
    pub config: ConfigBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightBlock {
    pub workers: Vec<String>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigBlock {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub weight_floor: f64,
}

/// Weighted plurality labels and how both outputs agree with the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineBlock {
    pub labels: Vec<u32>,
    /// Mean ARI of the Markov consensus against every input solution.
    pub consensus_mean_ari: f64,
    /// Mean ARI of the plurality labels against every input solution.
    pub baseline_mean_ari: f64,
}

impl From<ConsensusConfig> for ConfigBlock {
    fn from(c: ConsensusConfig) -> Self {
        Self {
            tolerance: c.tolerance,
            max_iterations: c.max_iterations,
            damping: c.damping,
            weight_floor: c.weight_floor,
        }
    }
}

impl From<&ConsensusResult> for ResultDocument {
    fn from(r: &ConsensusResult) -> Self {
        Self {
            num_objects: r.labels.len(),
            num_clusters: r.labels.k(),
            reference_worker: r.reference_worker().to_owned(),
            reference_index: r.reference_index + 1,
            labels: r.labels.labels().to_vec(),
            iterations: r.iterations(),
            distributions: r.distributions.iter().map(|d| d.probs.clone()).collect(),
            weights: WeightBlock {
                workers: r.worker_ids.clone(),
                raw: r.weights.raw.clone(),
                normalized: r.weights.normalized.clone(),
            },
            config: r.config.into(),
            metrics: None,
            baseline: None,
        }
    }
}

/// Formats `x` with 12 significant digits, plain notation for moderate
/// magnitudes and exponent notation otherwise. Always a valid JSON number
/// for finite input.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return "null".into();
    }
    let sci = format!("{:.11e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };

    let (int_part, frac_part) = if (0..12).contains(&exp) {
        let split = exp as usize + 1;
        (digits[..split].to_owned(), digits[split..].to_owned())
    } else if (-6..0).contains(&exp) {
        ("0".to_owned(), "0".repeat((-exp - 1) as usize) + &digits)
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let frac = if frac.is_empty() { "0" } else { frac };
        return format!("{sign}{}.{frac}e{exp}", &digits[..1]);
    };
    let frac = frac_part.trim_end_matches('0');
    let frac = if frac.is_empty() { "0" } else { frac };
    format!("{sign}{int_part}.{frac}")
}

struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(format_real(value as f64).as_bytes())
    }
}

/// Compact JSON with 12-significant-digit reals and a trailing newline.
pub fn serialize_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    out
}

pub fn serialize_result(doc: &ResultDocument) -> Vec<u8> {
    serialize_json(doc)
}

pub fn parse_result(bytes: &[u8]) -> Result<ResultDocument> {
    let doc: ResultDocument = serde_json::from_slice(bytes).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let n = doc.num_clusters;
    let o = doc.num_objects;
    if doc.labels.len() != o || doc.distributions.len() != o || doc.iterations.len() != o {
        return Err(Error::parse("labels", format!("per-object arrays must have {o} entries")));
    }
    if let Some(i) = doc.labels.iter().position(|&l| l == 0 || l as usize > n) {
        return Err(Error::parse(format!("labels[{i}]"), format!("label outside 1..={n}")));
    }
    if let Some(i) = doc.distributions.iter().position(|d| d.len() != n) {
        return Err(Error::parse(format!("distributions[{i}]"), format!("expected {n} entries")));
    }
    let p = doc.weights.workers.len();
    if doc.weights.raw.len() != p || doc.weights.normalized.len() != p {
        return Err(Error::parse("weights", "weight arrays must match the worker list"));
    }
    if doc.reference_index == 0 || doc.reference_index > p {
        return Err(Error::parse("reference_index", format!("must lie in 1..={p}")));
    }
    if doc.weights.workers[doc.reference_index - 1] != doc.reference_worker {
        return Err(Error::parse("reference_worker", "does not match reference_index"));
    }
    Ok(doc)
}
