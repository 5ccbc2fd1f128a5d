use super::ast::{Label, ProbExpr, Program, Stmt};

/// Edge polarity: plain edges carry the ordinary block semantics, underlined
/// edges the true-branch semantics of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polarity {
    Plain,
    Underlined,
}

/// One control-flow step. Edges leaving a choice site carry their branch
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEdge {
    pub from: Label,
    pub to: Label,
    pub polarity: Polarity,
    pub prob: Option<ProbExpr>,
}

impl FlowEdge {
    fn plain(from: Label, to: Label) -> Self {
        FlowEdge {
            from,
            to,
            polarity: Polarity::Plain,
            prob: None,
        }
    }

    fn underlined(from: Label, to: Label) -> Self {
        FlowEdge {
            from,
            to,
            polarity: Polarity::Underlined,
            prob: None,
        }
    }
}

/// The flow relation of a program: all control edges of the body, the edges
/// from the body's exits to the stop label, and the stop label's self-loop.
/// Sorted by (from, to).
pub fn flow(program: &Program) -> Vec<FlowEdge> {
    let mut edges = Vec::new();
    stmt_edges(&program.body, &mut edges);
    for l in program.final_labels() {
        edges.push(FlowEdge::plain(l, program.stop_label));
    }
    edges.push(FlowEdge::plain(program.stop_label, program.stop_label));
    edges.sort_by_key(|e| (e.from, e.to));
    edges
}

fn stmt_edges(stmt: &Stmt, edges: &mut Vec<FlowEdge>) {
    match stmt {
        Stmt::Skip { .. } | Stmt::Assign { .. } | Stmt::Random { .. } => {}
        Stmt::Seq(first, second) => {
            stmt_edges(first, edges);
            stmt_edges(second, edges);
            for l in first.finals() {
                edges.push(FlowEdge::plain(l, second.init()));
            }
        }
        Stmt::If {
            label,
            then_branch,
            else_branch,
            ..
        } => {
            edges.push(FlowEdge::underlined(*label, then_branch.init()));
            edges.push(FlowEdge::plain(*label, else_branch.init()));
            stmt_edges(then_branch, edges);
            stmt_edges(else_branch, edges);
        }
        Stmt::While { label, body, .. } => {
            edges.push(FlowEdge::underlined(*label, body.init()));
            stmt_edges(body, edges);
            for l in body.finals() {
                edges.push(FlowEdge::plain(l, *label));
            }
        }
        Stmt::Choose { label, branches } => {
            for (prob, branch) in branches {
                edges.push(FlowEdge {
                    from: *label,
                    to: branch.init(),
                    polarity: Polarity::Plain,
                    prob: Some(prob.clone()),
                });
                stmt_edges(branch, edges);
            }
        }
    }
}
