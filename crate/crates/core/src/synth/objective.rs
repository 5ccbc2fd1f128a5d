use super::{FlowFreeSketch, Lambda, SynthError};
use crate::analysis::{
    abstract_operator, abstract_state, initial_config, iterate, point_state, Abstraction,
};
use crate::lang::Program;
use crate::linalg::{SparseMatrix, StateVector};
use crate::los::{assemble_with, AssembleOptions};

/// Iteration parameters for objectives that run the full compile-iterate
/// pipeline.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub eps: f64,
    pub max_steps: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            eps: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// Operator distance ‖A†·T·A − S‖ in the Frobenius norm.
pub fn phi_distance(
    t_lambda: &SparseMatrix,
    target: &SparseMatrix,
    abstraction: &Abstraction,
) -> Result<f64, SynthError> {
    let abstracted = abstract_operator(t_lambda, abstraction)?;
    Ok(abstracted.sub(target)?.frobenius())
}

/// Weighted read/write penalty ρ·R(λ) + ω·W(λ), where R sums the λ weight
/// sitting on blocks flagged by the read diagonal (W analogously). With
/// non-negative weights this is the l1 norm of the projected weight vector.
pub fn penalty(
    lambda: &Lambda,
    read_diag: &[f64],
    write_diag: &[f64],
    rho: f64,
    omega: f64,
) -> f64 {
    let mut read = 0.0;
    let mut write = 0.0;
    for row in lambda {
        for (j, &w) in row.iter().enumerate() {
            read += w * read_diag[j];
            write += w * write_diag[j];
        }
    }
    rho * read + omega * write
}

/// A synthesis objective over a flow-free sketch:
/// Φ(λ) = ‖A†·T(λ)·A − S‖ + ρ·R(λ) + ω·W(λ).
#[derive(Debug, Clone)]
pub struct Objective {
    pub target: SparseMatrix,
    pub abstraction: Abstraction,
    pub rho: f64,
    pub omega: f64,
    pub read_penalty: Vec<f64>,
    pub write_penalty: Vec<f64>,
}

impl Objective {
    pub fn phi(&self, sketch: &FlowFreeSketch, lambda: &Lambda) -> Result<f64, SynthError> {
        let t = sketch.instantiate(lambda)?;
        let distance = phi_distance(&t, &self.target, &self.abstraction)?;
        Ok(distance
            + penalty(
                lambda,
                &self.read_penalty,
                &self.write_penalty,
                self.rho,
                self.omega,
            ))
    }
}

/// Runs the full pipeline on a literal program: compile, iterate to the
/// terminal distribution from `s0` (default: point mass on the first
/// valuation), abstract, and read off one coordinate (0-based).
pub fn abstracted_terminal_coord(
    program: &Program,
    abstraction: &Abstraction,
    coord: usize,
    s0: Option<&StateVector>,
    pipeline: &PipelineConfig,
) -> Result<f64, SynthError> {
    let options = AssembleOptions {
        check_choose_normalization: false,
        ..Default::default()
    };
    let op = assemble_with(program, options)?;
    let start = match s0 {
        Some(v) => v.clone(),
        None => {
            let first: Vec<i64> = op.space.vars().iter().map(|d| d.domain[0]).collect();
            point_state(&op.space, &first)?
        }
    };
    let x0 = initial_config(&op, &start)?;
    let result = iterate(&op.matrix, &x0, pipeline.eps, pipeline.max_steps)?;
    let abstracted = abstract_state(&result.terminal, abstraction)?;
    Ok(abstracted.get(coord))
}

/// Evaluates the pipeline objective for each grid value of one parameter.
/// All grid points must lie in the unit interval.
pub fn sweep(
    program: &Program,
    param: &str,
    grid: &[f64],
    abstraction: &Abstraction,
    coord: usize,
    s0: Option<&StateVector>,
    pipeline: &PipelineConfig,
) -> Result<Vec<(f64, f64)>, SynthError> {
    let mut out = Vec::with_capacity(grid.len());
    for &p in grid {
        if !(0.0..=1.0).contains(&p) {
            return Err(SynthError::Sketch(format!("grid value {p} outside [0,1]")));
        }
        let bound = program.bind_params(&[(param.to_string(), p)].into_iter().collect())?;
        let value = abstracted_terminal_coord(&bound, abstraction, coord, s0, pipeline)?;
        out.push((p, value));
    }
    Ok(out)
}
