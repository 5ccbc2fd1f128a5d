use super::StateSpace;
use crate::lang::{BExpr, BinOp, CmpOp, Expr};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("undeclared variable '{0}'")]
    UndeclaredVariable(String),
    #[error("modulus {0} is not positive")]
    NonPositiveModulus(i64),
    #[error("integer overflow while evaluating an expression")]
    Overflow,
}

/// Evaluates an arithmetic expression over exact integers. `%` is the
/// Euclidean remainder, so `(x + 1) % n` wraps into `0..n` for any sign of x.
pub fn eval_expr(expr: &Expr, space: &StateSpace, values: &[i64]) -> Result<i64, EvalError> {
    match expr {
        Expr::Int(v) => Ok(*v),
        Expr::Var(name) => {
            let idx = space
                .var_index(name)
                .ok_or_else(|| EvalError::UndeclaredVariable(name.clone()))?;
            Ok(values[idx])
        }
        Expr::Neg(e) => eval_expr(e, space, values)?
            .checked_neg()
            .ok_or(EvalError::Overflow),
        Expr::Bin(op, l, r) => {
            let a = eval_expr(l, space, values)?;
            let b = eval_expr(r, space, values)?;
            match op {
                BinOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
                BinOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow),
                BinOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
                BinOp::Mod => {
                    if b <= 0 {
                        Err(EvalError::NonPositiveModulus(b))
                    } else {
                        Ok(a.rem_euclid(b))
                    }
                }
            }
        }
    }
}

pub fn eval_bexpr(b: &BExpr, space: &StateSpace, values: &[i64]) -> Result<bool, EvalError> {
    match b {
        BExpr::Const(c) => Ok(*c),
        BExpr::Cmp(op, l, r) => {
            let a = eval_expr(l, space, values)?;
            let b = eval_expr(r, space, values)?;
            Ok(match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
            })
        }
        BExpr::Not(inner) => Ok(!eval_bexpr(inner, space, values)?),
        BExpr::And(l, r) => Ok(eval_bexpr(l, space, values)? && eval_bexpr(r, space, values)?),
        BExpr::Or(l, r) => Ok(eval_bexpr(l, space, values)? || eval_bexpr(r, space, values)?),
    }
}
