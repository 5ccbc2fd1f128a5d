pub use super::ops::BlockSemantics;
use super::{block_semantics, CompileError, StateSpace};
use crate::lang::{flow, Block, Label, Polarity, ProbExpr, Program};
use crate::linalg::{SparseMatrix, DEFAULT_SIZE_LIMIT};

/// Sorted set of the labels occurring in a program (stop label included),
/// mapping each to its position in the label tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelIndex {
    labels: Vec<Label>,
}

impl LabelIndex {
    pub fn new(mut labels: Vec<Label>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        LabelIndex { labels }
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }
}

/// The compiled operator of a program: a row-stochastic matrix on the
/// (state, label) configuration space, laid out state-major (the label is
/// the last tensor factor).
#[derive(Debug, Clone)]
pub struct LosOperator {
    pub matrix: SparseMatrix,
    pub space: StateSpace,
    pub labels: LabelIndex,
    pub init_label: Label,
    pub stop_label: Label,
}

impl LosOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Flat 0-based index of a (state offset, label position) pair.
    pub fn config_index(&self, state_offset: usize, label_pos: usize) -> usize {
        state_offset * self.labels.count() + label_pos
    }

    /// Describes a configuration index, e.g. `d=0,g=1,o=2 @6`.
    pub fn describe_config(&self, index: usize) -> String {
        let l = self.labels.count();
        format!(
            "{} @{}",
            self.space.describe(index / l),
            self.labels.labels()[index % l]
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    /// Upper bound on `dim * dim` of the assembled operator.
    pub size_limit: u128,
    /// Verify that every instantiated choice sums to 1 (within 1e-9).
    /// Objective evaluation during optimization turns this off to probe
    /// off-simplex parameter values.
    pub check_choose_normalization: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            size_limit: DEFAULT_SIZE_LIMIT,
            check_choose_normalization: true,
        }
    }
}

/// Compiles a fully instantiated program into its operator: the sum over all
/// flow edges of (block semantics) ⊗ (label matrix unit), the underlined
/// edges contributing the true-branch semantics, plus the stop self-loop.
pub fn assemble(program: &Program) -> Result<LosOperator, CompileError> {
    assemble_with(program, AssembleOptions::default())
}

pub fn assemble_with(
    program: &Program,
    options: AssembleOptions,
) -> Result<LosOperator, CompileError> {
    let space = StateSpace::new(&program.decls)?;
    let blocks = program.blocks();
    let labels = LabelIndex::new(blocks.keys().copied().collect());
    let n = space.size();
    let l = labels.count();
    let dim = n * l;
    if (dim as u128) * (dim as u128) > options.size_limit {
        return Err(CompileError::Linalg(
            crate::linalg::LinalgError::SizeLimit {
                rows: dim,
                cols: dim,
                limit: options.size_limit,
            },
        ));
    }

    if options.check_choose_normalization {
        for (&label, block) in &blocks {
            if let Block::Choose(branches) = block {
                let mut sum = 0.0;
                for (p, _) in branches.iter() {
                    match p {
                        ProbExpr::Lit(v) => sum += v,
                        ProbExpr::Param(name) | ProbExpr::Complement(name) => {
                            return Err(CompileError::UnboundParameter(name.clone()))
                        }
                    }
                }
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(CompileError::UnnormalizedChoose { label, sum });
                }
            }
        }
    }

    // Block semantics are shared between the (up to two) edges leaving a
    // label.
    let mut semantics = std::collections::BTreeMap::new();
    for (&label, block) in &blocks {
        semantics.insert(label, block_semantics(&space, block)?);
    }

    let mut terms = Vec::new();
    for edge in flow(program) {
        let sem = &semantics[&edge.from];
        let state_part = match (&edge.prob, edge.polarity) {
            (Some(p), _) => {
                let weight = match p {
                    ProbExpr::Lit(v) => *v,
                    ProbExpr::Param(name) | ProbExpr::Complement(name) => {
                        return Err(CompileError::UnboundParameter(name.clone()))
                    }
                };
                SparseMatrix::identity(n).scale(weight)
            }
            (None, Polarity::Plain) => sem.positive.clone(),
            (None, Polarity::Underlined) => sem.negative.clone(),
        };
        let from_pos = labels.position(edge.from).expect("edge from a known label");
        let to_pos = labels.position(edge.to).expect("edge to a known label");
        let unit = SparseMatrix::unit(from_pos + 1, to_pos + 1, l)?;
        terms.push(state_part.kron_with_limit(&unit, options.size_limit)?);
    }
    let matrix = SparseMatrix::sum(terms)?;

    Ok(LosOperator {
        matrix,
        space,
        labels,
        init_label: program.init_label(),
        stop_label: program.stop_label,
    })
}
