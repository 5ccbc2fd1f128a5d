use super::{FlowFreeSketch, Lambda, SynthError};
use crate::lang::{parse, ProbExpr, Program, Stmt};

/// Turns an optimized λ back into a program. A row whose largest weight
/// reaches `threshold` becomes that block outright; otherwise the row stays
/// a choice over the blocks with weight >= 0.01, renormalized.
pub fn extract_program(
    sketch: &FlowFreeSketch,
    lambda: &Lambda,
    threshold: f64,
) -> Result<Program, SynthError> {
    sketch.check_shape(lambda)?;
    let mut steps: Vec<Stmt> = Vec::with_capacity(lambda.len());
    for row in lambda {
        let (best, &best_w) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty row");
        let kept: Vec<(usize, f64)> = row
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, w)| w >= 0.01)
            .collect();
        if best_w >= threshold || kept.len() < 2 {
            steps.push(sketch.library[best].stmt.clone());
        } else {
            let total: f64 = kept.iter().map(|&(_, w)| w).sum();
            let branches = kept
                .into_iter()
                .map(|(j, w)| (ProbExpr::Lit(w / total), sketch.library[j].stmt.clone()))
                .collect();
            steps.push(Stmt::Choose { label: 0, branches });
        }
    }
    let mut it = steps.into_iter().rev();
    let last = it
        .next()
        .ok_or_else(|| SynthError::Shape("no steps".into()))?;
    let body = it.fold(last, |acc, s| Stmt::Seq(Box::new(s), Box::new(acc)));
    // Round-trip through the concrete syntax to relabel and validate.
    let draft = Program {
        decls: sketch.decls.clone(),
        body,
        stop_label: 0,
    };
    Ok(parse(&draft.to_source(false))?)
}

/// Default vertex-extraction threshold.
pub const DEFAULT_EXTRACT_THRESHOLD: f64 = 0.99;
