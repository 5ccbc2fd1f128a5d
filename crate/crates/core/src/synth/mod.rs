//! Program synthesis over parametric sketches: choice probabilities are the
//! decision variables of a constrained minimization problem whose objective
//! is phrased on the abstracted operator (or terminal) semantics.

mod extract;
mod objective;
mod optimize;
mod sketch;

pub use extract::{extract_program, DEFAULT_EXTRACT_THRESHOLD};
pub use objective::{
    abstracted_terminal_coord, penalty, phi_distance, sweep, Objective, PipelineConfig,
};
pub use optimize::{optimize, project_simplex, OptConfig, OptResult, TracePoint};
pub use sketch::{
    load_flow_free_sketch, FlowFreeSketch, LibraryBlock, LoadedSketch, ProgramSketch,
};

use thiserror::Error;

/// Parameter matrix of a sketch: one row per choice step, one weight per
/// library block (or branch). Rows may differ in length for program sketches
/// whose sites have different branch counts.
pub type Lambda = Vec<Vec<f64>>;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("lambda shape mismatch: {0}")]
    Shape(String),
    #[error("parameter '#{name}' bound to both {a} and {b}")]
    ConflictingBinding { name: String, a: f64, b: f64 },
    #[error("sketch: {0}")]
    Sketch(String),
    #[error(transparent)]
    Bind(#[from] crate::lang::BindError),
    #[error(transparent)]
    Parse(#[from] crate::lang::ParseError),
    #[error(transparent)]
    Compile(#[from] crate::los::CompileError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}
