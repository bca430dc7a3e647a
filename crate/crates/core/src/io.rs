//! File formats and result serialization.
//!
//! The FAZ v1 text format holds one or more binary matrices per file:
//! comment lines start with `#`, each matrix begins with a header line
//! `n k` followed by `n` rows of `k` space-separated 0/1 tokens, and
//! matrices are separated by one or more blank lines. `k = 0` matrices are a
//! header with zero data lines. A one-matrix-per-file CSV shim is provided
//! for interoperability with statistics workflows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::fangs::TracePoint;
use crate::matrix::{FeatureAllocation, SampleSet};
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse FAZ v1 text into a sample set.
pub fn parse_samples_str(text: &str) -> Result<SampleSet> {
    let mut samples: Vec<FeatureAllocation> = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .peekable();

    while let Some(&(lineno, line)) = lines.peek() {
        if line.trim().is_empty() {
            lines.next();
            continue;
        }
        lines.next();
        let mut header = line.split_whitespace();
        let n: usize = header
            .next()
            .ok_or_else(|| parse_err(lineno, "expected header line 'n k'"))?
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid row count in header: {line:?}")))?;
        let k: usize = header
            .next()
            .ok_or_else(|| parse_err(lineno, format!("header needs two tokens 'n k', got {line:?}")))?
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid column count in header: {line:?}")))?;
        if header.next().is_some() {
            return Err(parse_err(lineno, format!("trailing tokens after header: {line:?}")));
        }
        if n == 0 {
            return Err(parse_err(lineno, "a matrix needs at least one row"));
        }

        let block_index = samples.len() + 1;
        let mut z = FeatureAllocation::zeros(n, k);
        // k = 0 matrices are a bare header with no data lines
        let data_rows = if k == 0 { 0 } else { n };
        for i in 0..data_rows {
            let Some((row_lineno, row_line)) = lines.next() else {
                return Err(parse_err(
                    lineno,
                    format!("matrix {block_index}: expected {n} data rows, file ended after {i}"),
                ));
            };
            if row_line.trim().is_empty() {
                return Err(parse_err(
                    row_lineno,
                    format!("matrix {block_index}: expected {n} data rows, found only {i}"),
                ));
            }
            let mut count = 0;
            for (j, tok) in row_line.split_whitespace().enumerate() {
                if j >= k {
                    return Err(parse_err(
                        row_lineno,
                        format!("matrix {block_index}: row has more than {k} entries"),
                    ));
                }
                match tok {
                    "0" => {}
                    "1" => z.set(i, j, true),
                    other => {
                        return Err(parse_err(
                            row_lineno,
                            format!("matrix {block_index}: entry {:?} at column {} is not 0 or 1", other, j + 1),
                        ))
                    }
                }
                count += 1;
            }
            if count != k {
                return Err(parse_err(
                    row_lineno,
                    format!("matrix {block_index}: row has {count} entries, expected {k}"),
                ));
            }
        }

        if let Some(first) = samples.first() {
            if first.n() != n {
                return Err(parse_err(
                    lineno,
                    format!(
                        "matrix {block_index} has {n} rows but matrix 1 has {}",
                        first.n()
                    ),
                ));
            }
        }
        samples.push(z);
    }

    if samples.is_empty() {
        return Err(parse_err(1, "no matrices found in file"));
    }
    SampleSet::new(samples)
}

/// Parse a FAZ v1 file from disk.
pub fn parse_samples(path: &Path) -> Result<SampleSet> {
    let text = fs::read_to_string(path)?;
    parse_samples_str(&text)
}

/// Render one matrix as a FAZ v1 block.
pub fn format_matrix(z: &FeatureAllocation) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", z.n(), z.k()).unwrap();
    if z.k() > 0 {
        for row in z.to_rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    }
    out
}

/// Render a whole sample set as FAZ v1 text.
pub fn format_samples(samples: &SampleSet) -> String {
    let blocks: Vec<String> = samples.samples().iter().map(format_matrix).collect();
    blocks.join("\n")
}

/// Parse a single comma-separated matrix (one matrix per file, no header).
pub fn parse_csv_matrix_str(text: &str) -> Result<FeatureAllocation> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row: Vec<u8> = trimmed
            .split(',')
            .map(|tok| match tok.trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(parse_err(lineno, format!("entry {other:?} is not 0 or 1"))),
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    lineno,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no rows found in CSV file"));
    }
    FeatureAllocation::from_rows(&rows)
}

pub fn parse_csv_matrix(path: &Path) -> Result<FeatureAllocation> {
    let text = fs::read_to_string(path)?;
    parse_csv_matrix_str(&text)
}

/// Configuration echo embedded in result documents.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub a: f64,
    pub n_init: Option<usize>,
    pub n_sweet: Option<usize>,
    pub n_iter: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// The JSON document emitted by the CLI.
///
/// All timing lives in the single `seconds` field so golden-file comparisons
/// can mask it.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub version: String,
    pub subcommand: String,
    pub config: ConfigEcho,
    /// Estimate as a JSON array of 0/1 rows.
    pub estimate: Vec<Vec<u8>>,
    /// The same estimate as a FAZ v1 text block, for round-tripping.
    pub estimate_faz: String,
    pub expected_loss: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<(usize, f64)>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_losses: Option<Vec<f64>>,
}

impl ResultDocument {
    pub fn new(
        subcommand: &str,
        config: ConfigEcho,
        estimate: &FeatureAllocation,
        expected_loss: f64,
        seconds: f64,
    ) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config,
            estimate: estimate.to_rows(),
            estimate_faz: format_matrix(estimate),
            expected_loss,
            seconds,
            trace: None,
            baseline_losses: None,
        }
    }

    pub fn with_diagnostics(
        mut self,
        trace: &[Vec<TracePoint>],
        baseline_losses: &[f64],
    ) -> Self {
        self.trace = Some(
            trace
                .iter()
                .map(|t| t.iter().map(|p| (p.iteration, p.expected_loss)).collect())
                .collect(),
        );
        self.baseline_losses = Some(baseline_losses.to_vec());
        self
    }

    /// Canonical JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("document is serializable");
        // round-trip through Value sorts object keys
        let sorted = sort_value(value);
        let mut s = serde_json::to_string_pretty(&sorted).expect("value is serializable");
        s.push('\n');
        s
    }
}

fn sort_value(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => {
            let sorted: BTreeMap<String, serde_json::Value> =
                map.into_iter().map(|(k, v)| (k, sort_value(v))).collect();
            serde_json::to_value(sorted).unwrap()
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.into_iter().map(sort_value).collect())
        }
        other => other,
    }
}
