use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Program-point label. Every atomic block, test, and choice site carries one;
/// labels are positive and unique within a program.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BExpr {
    Const(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Finite-support distribution for random assignments; probabilities are
/// literal, non-negative, and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub support: Vec<(i64, f64)>,
}

impl Distribution {
    pub fn uniform(values: &[i64]) -> Self {
        let p = 1.0 / values.len() as f64;
        Distribution {
            support: values.iter().map(|&v| (v, p)).collect(),
        }
    }
}

/// Branch weight of a choice site: a literal, a named parameter `#name`, or
/// the complement `1 - #name`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbExpr {
    Lit(f64),
    Param(String),
    Complement(String),
}

impl ProbExpr {
    pub fn literal(&self) -> Option<f64> {
        match self {
            ProbExpr::Lit(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Skip {
        label: Label,
    },
    Assign {
        label: Label,
        var: String,
        expr: Expr,
    },
    Random {
        label: Label,
        var: String,
        dist: Distribution,
    },
    Seq(Box<Stmt>, Box<Stmt>),
    Choose {
        label: Label,
        branches: Vec<(ProbExpr, Stmt)>,
    },
    If {
        label: Label,
        cond: BExpr,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
    },
    While {
        label: Label,
        cond: BExpr,
        body: Box<Stmt>,
    },
}

impl Stmt {
    /// Entry label of this statement.
    pub fn init(&self) -> Label {
        match self {
            Stmt::Skip { label }
            | Stmt::Assign { label, .. }
            | Stmt::Random { label, .. }
            | Stmt::Choose { label, .. }
            | Stmt::If { label, .. }
            | Stmt::While { label, .. } => *label,
            Stmt::Seq(first, _) => first.init(),
        }
    }

    /// Exit labels of this statement: control leaves from each of these.
    pub fn finals(&self) -> BTreeSet<Label> {
        match self {
            Stmt::Skip { label } | Stmt::Assign { label, .. } | Stmt::Random { label, .. } => {
                BTreeSet::from([*label])
            }
            Stmt::Seq(_, second) => second.finals(),
            Stmt::Choose { branches, .. } => branches
                .iter()
                .flat_map(|(_, branch)| branch.finals())
                .collect(),
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut out = then_branch.finals();
                out.extend(else_branch.finals());
                out
            }
            // The loop is exited through the test.
            Stmt::While { label, .. } => BTreeSet::from([*label]),
        }
    }

    pub(crate) fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match self {
            Stmt::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Stmt::Choose { branches, .. } => {
                for (_, branch) in branches {
                    branch.visit(f);
                }
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.visit(f);
                else_branch.visit(f);
            }
            Stmt::While { body, .. } => body.visit(f),
            _ => {}
        }
    }

    pub(crate) fn visit_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        match self {
            Stmt::Seq(a, b) => {
                a.visit_mut(f);
                b.visit_mut(f);
            }
            Stmt::Choose { branches, .. } => {
                for (_, branch) in branches {
                    branch.visit_mut(f);
                }
            }
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.visit_mut(f);
                else_branch.visit_mut(f);
            }
            Stmt::While { body, .. } => body.visit_mut(f),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Vec<i64>,
}

/// A labelled program: ordered variable declarations with finite domains and
/// a statement body. Programs are implicitly extended with a terminal block
/// at `stop_label` (one past the largest body label) that loops forever.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub decls: Vec<VarDecl>,
    pub body: Stmt,
    pub stop_label: Label,
}

/// View of the atomic block sitting at one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block<'a> {
    Skip,
    Assign {
        var: &'a str,
        expr: &'a Expr,
    },
    Random {
        var: &'a str,
        dist: &'a Distribution,
    },
    Test(&'a BExpr),
    Choose(&'a [(ProbExpr, Stmt)]),
    Stop,
}

impl Program {
    pub fn init_label(&self) -> Label {
        self.body.init()
    }

    /// Exit labels of the body; each of these flows into the stop label.
    pub fn final_labels(&self) -> BTreeSet<Label> {
        self.body.finals()
    }

    /// All block labels in ascending order, including the stop label.
    pub fn labels(&self) -> Vec<Label> {
        self.blocks().keys().copied().collect()
    }

    /// Maps every label (including the stop label) to its block.
    pub fn blocks(&self) -> BTreeMap<Label, Block<'_>> {
        let mut map = BTreeMap::new();
        self.body.visit(&mut |s| {
            match s {
                Stmt::Skip { label } => {
                    map.insert(*label, Block::Skip);
                }
                Stmt::Assign { label, var, expr } => {
                    map.insert(*label, Block::Assign { var, expr });
                }
                Stmt::Random { label, var, dist } => {
                    map.insert(*label, Block::Random { var, dist });
                }
                Stmt::Choose { label, branches } => {
                    map.insert(*label, Block::Choose(branches));
                }
                Stmt::If { label, cond, .. } | Stmt::While { label, cond, .. } => {
                    map.insert(*label, Block::Test(cond));
                }
                Stmt::Seq(..) => {}
            };
        });
        map.insert(self.stop_label, Block::Stop);
        map
    }

    /// Names of the free `#parameters` appearing in choice probabilities.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.body.visit(&mut |s| {
            if let Stmt::Choose { branches, .. } = s {
                for (p, _) in branches {
                    match p {
                        ProbExpr::Param(name) | ProbExpr::Complement(name) => {
                            out.insert(name.clone());
                        }
                        ProbExpr::Lit(_) => {}
                    }
                }
            }
        });
        out
    }

    pub fn domain_of(&self, var: &str) -> Option<&[i64]> {
        self.decls
            .iter()
            .find(|d| d.name == var)
            .map(|d| d.domain.as_slice())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BindError {
    #[error("unbound parameter '#{0}'")]
    UnboundParameter(String),
    #[error("choice at label @{label} has probabilities summing to {sum}, expected 1")]
    UnnormalizedChoose { label: Label, sum: f64 },
}

impl Program {
    /// Substitutes values for named parameters, producing a fully literal
    /// program. Checks that every parameter is bound and that each choice
    /// site's probabilities sum to 1 within 1e-9.
    pub fn bind_params(&self, values: &BTreeMap<String, f64>) -> Result<Program, BindError> {
        let bound = self.bind_params_unchecked(values)?;
        bound.body.check_choose_sums()?;
        Ok(bound)
    }

    /// Like [`Program::bind_params`] but without the normalization check.
    /// Objective evaluation during optimization probes off-simplex parameter
    /// values, which this entry point permits.
    pub fn bind_params_unchecked(
        &self,
        values: &BTreeMap<String, f64>,
    ) -> Result<Program, BindError> {
        let mut program = self.clone();
        let mut missing = None;
        program.body.visit_mut(&mut |s| {
            if let Stmt::Choose { branches, .. } = s {
                for (p, _) in branches.iter_mut() {
                    let resolved = match p {
                        ProbExpr::Lit(_) => continue,
                        ProbExpr::Param(name) => values.get(name).copied(),
                        ProbExpr::Complement(name) => values.get(name).map(|&v| 1.0 - v),
                    };
                    match resolved {
                        Some(v) => *p = ProbExpr::Lit(v),
                        None => {
                            let name = match p {
                                ProbExpr::Param(n) | ProbExpr::Complement(n) => n.clone(),
                                ProbExpr::Lit(_) => unreachable!(),
                            };
                            missing.get_or_insert(name);
                        }
                    }
                }
            }
        });
        match missing {
            Some(name) => Err(BindError::UnboundParameter(name)),
            None => Ok(program),
        }
    }
}

impl Stmt {
    fn check_choose_sums(&self) -> Result<(), BindError> {
        let mut bad = None;
        self.visit(&mut |s| {
            if let Stmt::Choose { label, branches } = s {
                let sum: f64 = branches.iter().filter_map(|(p, _)| p.literal()).sum();
                let all_literal = branches.iter().all(|(p, _)| p.literal().is_some());
                if all_literal && (sum - 1.0).abs() > 1e-9 && bad.is_none() {
                    bad = Some((*label, sum));
                }
            }
        });
        match bad {
            Some((label, sum)) => Err(BindError::UnnormalizedChoose { label, sum }),
            None => Ok(()),
        }
    }
}

// Pretty-printing. `to_source` emits the concrete syntax; with `labelled` set
// it carries explicit `@n` labels so a re-parse reproduces the exact AST.

impl Program {
    pub fn to_source(&self, labelled: bool) -> String {
        let mut out = String::new();
        for d in &self.decls {
            let vals: Vec<String> = d.domain.iter().map(i64::to_string).collect();
            out.push_str(&format!("var {}:{{{}}};\n", d.name, vals.join(",")));
        }
        write_stmt(&mut out, &self.body, 0, labelled);
        out.push('\n');
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source(false))
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn label_suffix(label: Label, labelled: bool) -> String {
    if labelled {
        format!(" @{label}")
    } else {
        String::new()
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, level: usize, labelled: bool) {
    match stmt {
        Stmt::Skip { label } => {
            indent(out, level);
            out.push_str(&format!("skip{}", label_suffix(*label, labelled)));
        }
        Stmt::Assign { label, var, expr } => {
            indent(out, level);
            out.push_str(&format!(
                "{} := {}{}",
                var,
                expr,
                label_suffix(*label, labelled)
            ));
        }
        Stmt::Random { label, var, dist } => {
            indent(out, level);
            let uniform = dist.support.len() > 1
                && dist
                    .support
                    .iter()
                    .all(|&(_, p)| (p - 1.0 / dist.support.len() as f64).abs() < 1e-12);
            let body = if uniform {
                dist.support
                    .iter()
                    .map(|(v, _)| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                dist.support
                    .iter()
                    .map(|(v, p)| format!("({v},{p})"))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            out.push_str(&format!(
                "{} ?= {{{}}}{}",
                var,
                body,
                label_suffix(*label, labelled)
            ));
        }
        Stmt::Seq(a, b) => {
            write_stmt(out, a, level, labelled);
            out.push_str(";\n");
            write_stmt(out, b, level, labelled);
        }
        Stmt::Choose { label, branches } => {
            indent(out, level);
            out.push_str(&format!("choose{}", label_suffix(*label, labelled)));
            for (i, (p, branch)) in branches.iter().enumerate() {
                if i > 0 {
                    indent(out, level);
                    out.push_str("or");
                }
                out.push_str(&format!(" {p}:\n"));
                write_stmt(out, branch, level + 1, labelled);
                out.push('\n');
            }
            indent(out, level);
            out.push_str("ro");
        }
        Stmt::If {
            label,
            cond,
            then_branch,
            else_branch,
        } => {
            indent(out, level);
            out.push_str(&format!(
                "if {}{} then\n",
                cond,
                label_suffix(*label, labelled)
            ));
            write_stmt(out, then_branch, level + 1, labelled);
            out.push('\n');
            indent(out, level);
            out.push_str("else\n");
            write_stmt(out, else_branch, level + 1, labelled);
            out.push('\n');
            indent(out, level);
            out.push_str("fi");
        }
        Stmt::While { label, cond, body } => {
            indent(out, level);
            out.push_str(&format!(
                "while {}{} do\n",
                cond,
                label_suffix(*label, labelled)
            ));
            write_stmt(out, body, level + 1, labelled);
            out.push('\n');
            indent(out, level);
            out.push_str("od");
        }
    }
}

impl fmt::Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbExpr::Lit(v) => write!(f, "{v}"),
            ProbExpr::Param(name) => write!(f, "#{name}"),
            ProbExpr::Complement(name) => write!(f, "1 - #{name}"),
        }
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Int(_) | Expr::Var(_) => 3,
            Expr::Neg(_) => 2,
            Expr::Bin(BinOp::Mul | BinOp::Mod, ..) => 2,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(e) => {
                if e.prec() < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Mod => "%",
                };
                let prec = self.prec();
                if l.prec() < prec {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {sym} ")?;
                // Right operands of the same precedence keep their parens:
                // -, % and mixed */% are not freely reassociable.
                if r.prec() <= prec {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

impl BExpr {
    fn prec(&self) -> u8 {
        match self {
            BExpr::Const(_) | BExpr::Cmp(..) => 4,
            BExpr::Not(_) => 3,
            BExpr::And(..) => 2,
            BExpr::Or(..) => 1,
        }
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BExpr::Const(b) => write!(f, "{b}"),
            BExpr::Cmp(op, l, r) => {
                let sym = match op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                write!(f, "{l} {sym} {r}")
            }
            BExpr::Not(inner) => {
                if inner.prec() < 3 {
                    write!(f, "!({inner})")
                } else {
                    write!(f, "!{inner}")
                }
            }
            BExpr::And(l, r) => {
                write_bexpr_child(f, l, 2)?;
                write!(f, " && ")?;
                write_bexpr_child(f, r, 2)
            }
            BExpr::Or(l, r) => {
                write_bexpr_child(f, l, 1)?;
                write!(f, " || ")?;
                write_bexpr_child(f, r, 1)
            }
        }
    }
}

fn write_bexpr_child(f: &mut fmt::Formatter<'_>, child: &BExpr, parent_prec: u8) -> fmt::Result {
    if child.prec() < parent_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}
