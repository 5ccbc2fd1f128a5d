//! Compiler and analysis toolkit for a small probabilistic while-language.
//!
//! Programs are compiled into sparse stochastic matrices — the generators of
//! the Markov chains they denote — by tensoring per-variable transfer
//! operators with control-flow matrix units. On top of that representation
//! the crate provides:
//!
//! - fixed-point analysis of terminal distributions ([`analysis`]),
//! - least-squares state abstraction via Moore-Penrose pseudo-inverses
//!   ([`analysis::Abstraction`]),
//! - a seeded Monte Carlo interpreter used as an independent oracle
//!   ([`interp`]),
//! - synthesis of programs from parametric sketches by projected-gradient
//!   minimization over choice probabilities ([`synth`]).

pub mod analysis;
pub mod interp;
pub mod lang;
pub mod linalg;
pub mod los;
pub mod synth;

pub use analysis::{Abstraction, AnalysisResult};
pub use lang::{FlowEdge, Program, Stmt};
pub use linalg::{SparseMatrix, StateVector};
pub use los::{LosOperator, StateSpace};
