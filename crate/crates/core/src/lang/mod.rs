//! The probabilistic while-language: labelled syntax, recursive-descent
//! parser, and control-flow relation.
//!
//! Statements are `skip`, assignments `x := e`, random assignments
//! `x ?= {0,1}` / `x ?= {(0,0.25),(1,0.75)}`, sequencing, n-ary probabilistic
//! choice `choose p1: S1 or p2: S2 ro`, conditionals, and while loops.
//! Choice probabilities may be named parameters `#p` (or complements
//! `1 - #p`), turning the program into a sketch.

mod ast;
mod flow;
mod lexer;
mod parser;

pub use ast::{
    BExpr, BinOp, BindError, Block, CmpOp, Distribution, Expr, Label, ProbExpr, Program, Stmt,
    VarDecl,
};
pub use flow::{flow, FlowEdge, Polarity};
pub use parser::{parse, parse_bexpr};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("duplicate label @{0}")]
    DuplicateLabel(Label),
    #[error("labels start at 1")]
    ZeroLabel,
    #[error("variable '{0}' declared twice")]
    DuplicateVariable(String),
    #[error("variable '{0}' has an empty domain")]
    EmptyDomain(String),
    #[error("variable '{0}' lists domain value {1} twice")]
    DuplicateDomainValue(String, i64),
    #[error("undeclared variable '{0}'")]
    UndeclaredVariable(String),
    #[error("value {value} outside the domain of '{var}'")]
    ValueOutsideDomain { var: String, value: i64 },
    #[error("probability {0} outside [0,1]")]
    ProbabilityRange(f64),
    #[error("choose needs at least two branches")]
    TooFewBranches,
    #[error("choose probabilities sum to {0}, expected 1")]
    ChooseSum(f64),
    #[error("distribution probabilities sum to {0}, expected 1")]
    DistributionSum(f64),
    #[error("empty distribution support")]
    EmptyDistribution,
    #[error("distribution lists value {0} twice")]
    DuplicateSupportValue(i64),
}
