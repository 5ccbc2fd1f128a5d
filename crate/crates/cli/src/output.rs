//! Deterministic file writers: CSV tables and the operator metadata sidecar.
//! Float values use the shortest round-trip decimal form, so identical
//! invocations produce byte-identical files.

use crate::CliError;
use pwhile_core::analysis::AnalysisResult;
use pwhile_core::interp::Estimate;
use pwhile_core::linalg::StateVector;
use pwhile_core::los::LosOperator;
use pwhile_core::synth::OptResult;
use pwhile_core::StateSpace;
use serde::Serialize;
use std::path::Path;

pub fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

const INDEX_CONVENTIONS: &str =
    "# indices 1-based; states enumerated lexicographically in declaration order; \
configurations are state-major with the label as the last factor";

#[derive(Serialize)]
struct Metadata {
    dim: usize,
    nnz: usize,
    state_count: usize,
    label_count: usize,
    vars: Vec<VarMeta>,
    labels: Vec<u32>,
    init_label: u32,
    stop_label: u32,
    state_enumeration: &'static str,
    layout: &'static str,
}

#[derive(Serialize)]
struct VarMeta {
    name: String,
    domain: Vec<i64>,
}

pub fn metadata_json(op: &LosOperator) -> String {
    let meta = Metadata {
        dim: op.dim(),
        nnz: op.matrix.nnz(),
        state_count: op.space.size(),
        label_count: op.labels.count(),
        vars: op
            .space
            .vars()
            .iter()
            .map(|d| VarMeta {
                name: d.name.clone(),
                domain: d.domain.clone(),
            })
            .collect(),
        labels: op.labels.labels().to_vec(),
        init_label: op.init_label,
        stop_label: op.stop_label,
        state_enumeration: "lexicographic in declaration order, first joint valuation is state 1",
        layout: "row(state, label) = (state_index - 1) * label_count + label_position, 1-based",
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    text.push('\n');
    text
}

pub fn terminal_csv(op: &LosOperator, result: &AnalysisResult) -> String {
    let mut out = String::new();
    out.push_str(INDEX_CONVENTIONS);
    out.push('\n');
    out.push_str("index,configuration,probability\n");
    for (i, v) in result.terminal.iter() {
        out.push_str(&format!("{},\"{}\",{}\n", i + 1, op.describe_config(i), v));
    }
    out
}

pub fn state_csv(space: &StateSpace, vector: &StateVector, value_name: &str) -> String {
    let mut out = String::new();
    out.push_str("# indices 1-based; states enumerated lexicographically in declaration order\n");
    out.push_str(&format!("index,valuation,{value_name}\n"));
    for (i, v) in vector.iter() {
        out.push_str(&format!("{},\"{}\",{}\n", i + 1, space.describe(i), v));
    }
    out
}

pub fn abstract_csv(vector: &StateVector, names: &[String]) -> String {
    let mut out = String::new();
    out.push_str("# abstract coordinates 1-based, factor descriptions joined by ';'\n");
    out.push_str("index,description,probability\n");
    for i in 0..vector.dim() {
        let name = names.get(i).cloned().unwrap_or_default();
        out.push_str(&format!("{},\"{}\",{}\n", i + 1, name, vector.get(i)));
    }
    out
}

pub fn simulation_csv(space: &StateSpace, est: &Estimate, seed: u64) -> String {
    let mut out = String::new();
    out.push_str("# indices 1-based; states enumerated lexicographically in declaration order\n");
    out.push_str(&format!(
        "# runs={} seed={} censored={}\n",
        est.runs, seed, est.censored
    ));
    out.push_str("index,valuation,frequency\n");
    for (i, v) in est.frequencies.iter() {
        out.push_str(&format!("{},\"{}\",{}\n", i + 1, space.describe(i), v));
    }
    out
}

pub fn sweep_csv(param: &str, coord: usize, points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# objective: coordinate {coord} (1-based) of the abstracted terminal distribution\n"
    ));
    out.push_str(&format!("{param},phi\n"));
    for (p, phi) in points {
        out.push_str(&format!("{p},{phi}\n"));
    }
    out
}

pub fn write_lambda_and_trace(dir: &Path, stem: &str, result: &OptResult) -> Result<(), CliError> {
    let mut lambda = String::new();
    lambda.push_str("# one row per choice step/site, one weight per block/branch\n");
    for row in &result.lambda {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        lambda.push_str(&cells.join(","));
        lambda.push('\n');
    }
    write(&dir.join(format!("{stem}.lambda.csv")), &lambda)?;

    let mut trace = String::new();
    trace.push_str("# accepted objective values; restart 0 starts from lambda0\n");
    trace.push_str("restart,iteration,phi\n");
    for point in &result.trace {
        trace.push_str(&format!(
            "{},{},{}\n",
            point.restart, point.iteration, point.value
        ));
    }
    write(&dir.join(format!("{stem}.trace.csv")), &trace)?;
    Ok(())
}
