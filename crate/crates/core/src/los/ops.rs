use super::{eval_bexpr, eval_expr, CompileError, StateSpace};
use crate::lang::{BExpr, Block, Distribution, Expr};
use crate::linalg::SparseMatrix;

/// Single-variable update-to-constant: an n x n matrix whose column for the
/// target value is all ones.
fn update_single(domain_len: usize, value_pos: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        domain_len,
        domain_len,
        (0..domain_len).map(|i| (i, value_pos, 1.0)),
    )
    .expect("in-range by construction")
}

/// Update matrix U(x_k <- c) on the full state space, built as the Kronecker
/// product of identities with the single-variable update in slot k.
pub fn update_const(
    space: &StateSpace,
    var: usize,
    value: i64,
) -> Result<SparseMatrix, CompileError> {
    let pos = space
        .domain(var)
        .iter()
        .position(|&v| v == value)
        .ok_or_else(|| CompileError::ValueOutsideDomain {
            var: space.vars()[var].name.clone(),
            value,
        })?;
    let mut op: Option<SparseMatrix> = None;
    for (i, decl) in space.vars().iter().enumerate() {
        let factor = if i == var {
            update_single(decl.domain.len(), pos)
        } else {
            SparseMatrix::identity(decl.domain.len())
        };
        op = Some(match op {
            None => factor,
            Some(acc) => acc.kron(&factor)?,
        });
    }
    Ok(op.expect("state spaces have at least one variable"))
}

/// Test projection P(b): the diagonal 0/1 matrix filtering the states where
/// `b` holds.
pub fn test_op(space: &StateSpace, cond: &BExpr) -> Result<SparseMatrix, CompileError> {
    let mut diag = vec![0.0; space.size()];
    for (off, values) in space.valuations().enumerate() {
        if eval_bexpr(cond, space, &values)? {
            diag[off] = 1.0;
        }
    }
    Ok(SparseMatrix::diagonal(&diag))
}

/// Update matrix U(x_k <- e) = Σ_c P(e = c) · U(x_k <- c). The expression
/// must evaluate into the target domain on every state.
pub fn update_expr(
    space: &StateSpace,
    var: usize,
    expr: &Expr,
) -> Result<SparseMatrix, CompileError> {
    let domain = space.domain(var).to_vec();
    let mut values_at = Vec::with_capacity(space.size());
    for (off, values) in space.valuations().enumerate() {
        let v = eval_expr(expr, space, &values)?;
        if !domain.contains(&v) {
            return Err(CompileError::OutOfDomainEval {
                var: space.vars()[var].name.clone(),
                value: v,
                state: space.describe(off),
            });
        }
        values_at.push(v);
    }
    let mut terms = Vec::with_capacity(domain.len());
    for &c in &domain {
        let diag: Vec<f64> = values_at
            .iter()
            .map(|&v| if v == c { 1.0 } else { 0.0 })
            .collect();
        let projector = SparseMatrix::diagonal(&diag);
        terms.push(projector.matmul(&update_const(space, var, c)?)?);
    }
    Ok(SparseMatrix::sum(terms)?)
}

fn random_semantics(
    space: &StateSpace,
    var: usize,
    dist: &Distribution,
) -> Result<SparseMatrix, CompileError> {
    let terms = dist
        .support
        .iter()
        .map(|&(value, p)| Ok(update_const(space, var, value)?.scale(p)))
        .collect::<Result<Vec<_>, CompileError>>()?;
    Ok(SparseMatrix::sum(terms)?)
}

/// The positive and underlined transfer operators of one atomic block.
#[derive(Debug, Clone)]
pub struct BlockSemantics {
    /// Plain-edge semantics; for a test, the filter on the states where it
    /// fails.
    pub positive: SparseMatrix,
    /// Underlined-edge semantics; identity except for tests, where it keeps
    /// the states that pass.
    pub negative: SparseMatrix,
}

pub fn block_semantics(
    space: &StateSpace,
    block: &Block<'_>,
) -> Result<BlockSemantics, CompileError> {
    let identity = SparseMatrix::identity(space.size());
    let (positive, negative) = match block {
        Block::Skip | Block::Stop | Block::Choose(_) => (identity.clone(), identity),
        Block::Assign { var, expr } => {
            let k = space
                .var_index(var)
                .ok_or_else(|| CompileError::UnknownVariable(var.to_string()))?;
            (update_expr(space, k, expr)?, identity)
        }
        Block::Random { var, dist } => {
            let k = space
                .var_index(var)
                .ok_or_else(|| CompileError::UnknownVariable(var.to_string()))?;
            (random_semantics(space, k, dist)?, identity)
        }
        Block::Test(cond) => {
            let holds = test_op(space, cond)?;
            let fails = identity.sub(&holds)?;
            (fails, holds)
        }
    };
    Ok(BlockSemantics { positive, negative })
}
