//! Compilation of programs into their linear operator semantics: the sparse
//! row-stochastic matrix driving the underlying Markov chain on
//! (state, label) configurations.

mod assemble;
mod eval;
mod ops;
mod space;

pub use assemble::{
    assemble, assemble_with, AssembleOptions, BlockSemantics, LabelIndex, LosOperator,
};
pub use eval::{eval_bexpr, eval_expr, EvalError};
pub use ops::{block_semantics, test_op, update_const, update_expr};
pub use space::StateSpace;

use crate::lang::Label;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("program declares no variables")]
    NoVariables,
    #[error("variable '{0}' has an empty domain")]
    EmptyDomain(String),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("value {value} outside the domain of '{var}'")]
    ValueOutsideDomain { var: String, value: i64 },
    #[error("assignment to '{var}' evaluates to {value} outside its domain in state ({state})")]
    OutOfDomainEval {
        var: String,
        value: i64,
        state: String,
    },
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("unbound parameter '#{0}'; bind all parameters before compiling")]
    UnboundParameter(String),
    #[error("choice at label @{label} has probabilities summing to {sum}, expected 1")]
    UnnormalizedChoose { label: Label, sum: f64 },
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}
