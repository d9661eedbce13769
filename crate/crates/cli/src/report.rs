//! Machine-readable reports.
//!
//! Reports are pretty-printed JSON. Complex amplitudes are `[re, im]` pairs.
//! Trial records are always ordered by trial index, so a report depends only
//! on its configuration.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use qrep_core::{PureState, TransmissionHistory};
use serde::{Deserialize, Serialize};

use crate::config::ConfigDocument;
use crate::error::CliError;

pub type Amplitude = [f64; 2];

pub fn amplitudes(s: &PureState) -> Vec<Amplitude> {
    s.amplitudes()
        .iter()
        .map(|c: &Complex64| [c.re, c.im])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    /// First-qudit outcomes `R`.
    pub results: Vec<usize>,
    pub ancilla_results: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deferred_exponent: Option<usize>,
    /// Channel exponent applied after each hop.
    pub noise: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub trials: u64,
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub max_fidelity: f64,
    /// Count of each correction exponent `r` over all trials and hops.
    pub outcome_histogram: Vec<u64>,
    /// Always `trials × n`.
    pub histogram_total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ConfigDocument,
    pub initial_state: Vec<Amplitude>,
    pub aggregate: RunAggregate,
    pub trials: Vec<TrialRecord>,
    /// Where trial 0's transmission history was written, if requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub results: Vec<usize>,
    pub noise: Vec<usize>,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationAggregate {
    pub paths: u64,
    pub probability_sum: f64,
    pub min_fidelity: f64,
    /// Probability-weighted fidelity, the exact expectation.
    pub mean_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub command: String,
    pub config: ConfigDocument,
    pub initial_state: Vec<Amplitude>,
    pub aggregate: EnumerationAggregate,
    pub paths: Vec<PathRecord>,
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// CSV with one row per amplitude per history entry:
/// `hop,r,index,re,im`. Hop 0 is the initial state.
pub fn history_csv(history: &TransmissionHistory) -> String {
    let mut out = String::from("hop,r,index,re,im\n");
    for (hop, entry) in history.entries.iter().enumerate() {
        for (idx, a) in entry.snapshot.amplitudes().iter().enumerate() {
            writeln!(out, "{hop},{},{idx},{:?},{:?}", entry.r, a.re, a.im).unwrap();
        }
    }
    out
}
