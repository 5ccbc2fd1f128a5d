use super::ast::*;
use super::lexer::{tokenize, TokKind, Token};
use super::ParseError;
use std::collections::BTreeSet;

/// Parses a program: declarations followed by a statement. Explicit `@n`
/// labels are honored; the remaining sites are labelled in textual order
/// with the smallest unused positive integers.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let decls = parser.parse_decls()?;
    let mut body = parser.parse_stmt_sequence()?;
    parser.expect(TokKind::Eof)?;
    let stop_label = assign_labels(&mut body)?;
    validate(&decls, &body)?;
    Ok(Program {
        decls,
        body,
        stop_label,
    })
}

/// Parses a boolean expression on its own (used for abstraction class
/// predicates).
pub fn parse_bexpr(source: &str) -> Result<BExpr, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let b = parser.parse_bexpr()?;
    parser.expect(TokKind::Eof)?;
    Ok(b)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &TokKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, ahead: usize) -> &TokKind {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn advance(&mut self) -> TokKind {
        let kind = self.tokens[self.pos].kind.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        kind
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let tok = &self.tokens[self.pos];
        ParseError::Syntax {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: TokKind) -> Result<(), ParseError> {
        if *self.peek() == kind {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                kind.describe(),
                self.peek().describe()
            )))
        }
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn parse_decls(&mut self) -> Result<Vec<VarDecl>, ParseError> {
        let mut decls = Vec::new();
        while self.eat(&TokKind::KwVar) {
            let name = self.parse_ident()?;
            self.expect(TokKind::Colon)?;
            self.expect(TokKind::LBrace)?;
            let mut domain = vec![self.parse_value()?];
            while self.eat(&TokKind::Comma) {
                domain.push(self.parse_value()?);
            }
            self.expect(TokKind::RBrace)?;
            self.expect(TokKind::Semi)?;
            decls.push(VarDecl { name, domain });
        }
        Ok(decls)
    }

    fn parse_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            TokKind::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(self.error(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn parse_value(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat(&TokKind::Minus);
        match self.peek().clone() {
            TokKind::Int(v) => {
                self.advance();
                Ok(if negative { -v } else { v })
            }
            other => Err(self.error(format!("expected integer, found {}", other.describe()))),
        }
    }

    /// A sequence terminator: anything that may legally follow a statement.
    fn at_terminator(&self) -> bool {
        matches!(
            self.peek(),
            TokKind::Eof
                | TokKind::KwOr
                | TokKind::KwRo
                | TokKind::KwElse
                | TokKind::KwFi
                | TokKind::KwOd
        )
    }

    fn parse_stmt_sequence(&mut self) -> Result<Stmt, ParseError> {
        let mut stmts = vec![self.parse_atom()?];
        while self.eat(&TokKind::Semi) {
            // Trailing semicolon before a closing keyword is tolerated.
            if self.at_terminator() {
                break;
            }
            stmts.push(self.parse_atom()?);
        }
        let mut it = stmts.into_iter().rev();
        let last = it.next().expect("at least one statement");
        Ok(it.fold(last, |acc, s| Stmt::Seq(Box::new(s), Box::new(acc))))
    }

    /// Optional `@n` label; 0 is reserved for "not yet labelled".
    fn parse_label(&mut self) -> Result<Label, ParseError> {
        if !self.eat(&TokKind::At) {
            return Ok(0);
        }
        match self.peek().clone() {
            TokKind::Int(v) if v >= 1 && v <= u32::MAX as i64 => {
                self.advance();
                Ok(v as Label)
            }
            TokKind::Int(_) => Err(ParseError::ZeroLabel),
            other => Err(self.error(format!("expected label number, found {}", other.describe()))),
        }
    }

    fn parse_atom(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            TokKind::KwSkip => {
                self.advance();
                let label = self.parse_label()?;
                Ok(Stmt::Skip { label })
            }
            TokKind::KwIf => {
                self.advance();
                let cond = self.parse_bexpr()?;
                let label = self.parse_label()?;
                self.expect(TokKind::KwThen)?;
                let then_branch = self.parse_stmt_sequence()?;
                self.expect(TokKind::KwElse)?;
                let else_branch = self.parse_stmt_sequence()?;
                self.expect(TokKind::KwFi)?;
                Ok(Stmt::If {
                    label,
                    cond,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            TokKind::KwWhile => {
                self.advance();
                let cond = self.parse_bexpr()?;
                let label = self.parse_label()?;
                self.expect(TokKind::KwDo)?;
                let body = self.parse_stmt_sequence()?;
                self.expect(TokKind::KwOd)?;
                Ok(Stmt::While {
                    label,
                    cond,
                    body: Box::new(body),
                })
            }
            TokKind::KwChoose => {
                self.advance();
                let label = self.parse_label()?;
                let mut branches = Vec::new();
                loop {
                    let prob = self.parse_prob_expr()?;
                    self.expect(TokKind::Colon)?;
                    let branch = self.parse_stmt_sequence()?;
                    branches.push((prob, branch));
                    if !self.eat(&TokKind::KwOr) {
                        break;
                    }
                }
                self.expect(TokKind::KwRo)?;
                if branches.len() < 2 {
                    return Err(ParseError::TooFewBranches);
                }
                Ok(Stmt::Choose { label, branches })
            }
            TokKind::Ident(var) => {
                self.advance();
                match self.peek().clone() {
                    TokKind::Assign => {
                        self.advance();
                        let expr = self.parse_expr()?;
                        let label = self.parse_label()?;
                        Ok(Stmt::Assign { label, var, expr })
                    }
                    TokKind::Random => {
                        self.advance();
                        let dist = self.parse_distribution()?;
                        let label = self.parse_label()?;
                        Ok(Stmt::Random { label, var, dist })
                    }
                    other => Err(self.error(format!(
                        "expected ':=' or '?=' after '{var}', found {}",
                        other.describe()
                    ))),
                }
            }
            other => Err(self.error(format!("expected statement, found {}", other.describe()))),
        }
    }

    /// A literal probability, a `#param`, or the complement `1 - #param`.
    fn parse_prob_expr(&mut self) -> Result<ProbExpr, ParseError> {
        match self.peek().clone() {
            TokKind::Param(name) => {
                self.advance();
                Ok(ProbExpr::Param(name))
            }
            TokKind::Float(v) => {
                self.advance();
                check_prob_range(v)?;
                Ok(ProbExpr::Lit(v))
            }
            TokKind::Int(v) => {
                if matches!(self.peek_at(1), TokKind::Minus)
                    && matches!(self.peek_at(2), TokKind::Param(_))
                {
                    if v != 1 {
                        return Err(self.error(
                            "only the complement form '1 - #name' is supported".to_string(),
                        ));
                    }
                    self.advance();
                    self.advance();
                    match self.advance() {
                        TokKind::Param(name) => Ok(ProbExpr::Complement(name)),
                        _ => unreachable!(),
                    }
                } else {
                    self.advance();
                    let v = v as f64;
                    check_prob_range(v)?;
                    Ok(ProbExpr::Lit(v))
                }
            }
            other => Err(self.error(format!("expected probability, found {}", other.describe()))),
        }
    }

    fn parse_probability(&mut self) -> Result<f64, ParseError> {
        let v = match self.peek().clone() {
            TokKind::Float(v) => v,
            TokKind::Int(v) => v as f64,
            other => {
                return Err(self.error(format!(
                    "expected probability literal, found {}",
                    other.describe()
                )))
            }
        };
        self.advance();
        check_prob_range(v)?;
        Ok(v)
    }

    /// `{v1,...,vk}` (uniform) or `{(v1,p1),...,(vk,pk)}`.
    fn parse_distribution(&mut self) -> Result<Distribution, ParseError> {
        self.expect(TokKind::LBrace)?;
        if self.eat(&TokKind::RBrace) {
            return Err(ParseError::EmptyDistribution);
        }
        let dist = if matches!(self.peek(), TokKind::LParen) {
            let mut support = Vec::new();
            loop {
                self.expect(TokKind::LParen)?;
                let value = self.parse_value()?;
                self.expect(TokKind::Comma)?;
                let prob = self.parse_probability()?;
                self.expect(TokKind::RParen)?;
                support.push((value, prob));
                if !self.eat(&TokKind::Comma) {
                    break;
                }
            }
            Distribution { support }
        } else {
            let mut values = vec![self.parse_value()?];
            while self.eat(&TokKind::Comma) {
                values.push(self.parse_value()?);
            }
            Distribution::uniform(&values)
        };
        self.expect(TokKind::RBrace)?;
        Ok(dist)
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                TokKind::Plus => BinOp::Add,
                TokKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            let op = match self.peek() {
                TokKind::Star => BinOp::Mul,
                TokKind::Percent => BinOp::Mod,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            TokKind::Int(v) => {
                self.advance();
                Ok(Expr::Int(v))
            }
            TokKind::Ident(name) => {
                self.advance();
                Ok(Expr::Var(name))
            }
            TokKind::Minus => {
                self.advance();
                Ok(Expr::Neg(Box::new(self.parse_factor()?)))
            }
            TokKind::LParen => {
                self.advance();
                let e = self.parse_expr()?;
                self.expect(TokKind::RParen)?;
                Ok(e)
            }
            other => Err(self.error(format!("expected expression, found {}", other.describe()))),
        }
    }

    fn parse_bexpr(&mut self) -> Result<BExpr, ParseError> {
        let mut lhs = self.parse_band()?;
        while self.eat(&TokKind::OrOr) {
            let rhs = self.parse_band()?;
            lhs = BExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_band(&mut self) -> Result<BExpr, ParseError> {
        let mut lhs = self.parse_bnot()?;
        while self.eat(&TokKind::AndAnd) {
            let rhs = self.parse_bnot()?;
            lhs = BExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_bnot(&mut self) -> Result<BExpr, ParseError> {
        if self.eat(&TokKind::Bang) {
            Ok(BExpr::Not(Box::new(self.parse_bnot()?)))
        } else {
            self.parse_batom()
        }
    }

    fn parse_batom(&mut self) -> Result<BExpr, ParseError> {
        match self.peek().clone() {
            TokKind::KwTrue => {
                self.advance();
                Ok(BExpr::Const(true))
            }
            TokKind::KwFalse => {
                self.advance();
                Ok(BExpr::Const(false))
            }
            TokKind::LParen => {
                // A parenthesis may open a boolean group or an arithmetic
                // operand; try the boolean reading first and fall back.
                let saved = self.pos;
                self.advance();
                if let Ok(inner) = self.parse_bexpr() {
                    if self.eat(&TokKind::RParen) && !self.at_cmp_op() {
                        return Ok(inner);
                    }
                }
                self.pos = saved;
                self.parse_comparison()
            }
            _ => self.parse_comparison(),
        }
    }

    fn at_cmp_op(&self) -> bool {
        matches!(
            self.peek(),
            TokKind::EqEq | TokKind::Ne | TokKind::Lt | TokKind::Le | TokKind::Gt | TokKind::Ge
        )
    }

    fn parse_comparison(&mut self) -> Result<BExpr, ParseError> {
        let lhs = self.parse_expr()?;
        let op = match self.peek() {
            TokKind::EqEq => CmpOp::Eq,
            TokKind::Ne => CmpOp::Ne,
            TokKind::Lt => CmpOp::Lt,
            TokKind::Le => CmpOp::Le,
            TokKind::Gt => CmpOp::Gt,
            TokKind::Ge => CmpOp::Ge,
            other => {
                return Err(self.error(format!(
                    "expected comparison operator, found {}",
                    other.describe()
                )))
            }
        };
        self.advance();
        let rhs = self.parse_expr()?;
        Ok(BExpr::Cmp(op, lhs, rhs))
    }
}

fn check_prob_range(v: f64) -> Result<(), ParseError> {
    if !(0.0..=1.0).contains(&v) {
        Err(ParseError::ProbabilityRange(v))
    } else {
        Ok(())
    }
}

/// Fills in missing labels. Explicit labels are kept (duplicates rejected);
/// unlabelled sites get the smallest unused positive integers in textual
/// order. Returns the stop label, one past the maximum.
fn assign_labels(body: &mut Stmt) -> Result<Label, ParseError> {
    let mut used = BTreeSet::new();
    let mut duplicate = None;
    body.visit(&mut |s| {
        if let Some(label) = site_label(s) {
            if label != 0 && !used.insert(label) && duplicate.is_none() {
                duplicate = Some(label);
            }
        }
    });
    if let Some(label) = duplicate {
        return Err(ParseError::DuplicateLabel(label));
    }
    let mut next: Label = 1;
    body.visit_mut(&mut |s| {
        if let Some(slot) = site_label_mut(s) {
            if *slot == 0 {
                while used.contains(&next) {
                    next += 1;
                }
                *slot = next;
                used.insert(next);
            }
        }
    });
    let max = used.iter().next_back().copied().unwrap_or(0);
    Ok(max + 1)
}

fn site_label(s: &Stmt) -> Option<Label> {
    match s {
        Stmt::Skip { label }
        | Stmt::Assign { label, .. }
        | Stmt::Random { label, .. }
        | Stmt::Choose { label, .. }
        | Stmt::If { label, .. }
        | Stmt::While { label, .. } => Some(*label),
        Stmt::Seq(..) => None,
    }
}

fn site_label_mut(s: &mut Stmt) -> Option<&mut Label> {
    match s {
        Stmt::Skip { label }
        | Stmt::Assign { label, .. }
        | Stmt::Random { label, .. }
        | Stmt::Choose { label, .. }
        | Stmt::If { label, .. }
        | Stmt::While { label, .. } => Some(label),
        Stmt::Seq(..) => None,
    }
}

fn validate(decls: &[VarDecl], body: &Stmt) -> Result<(), ParseError> {
    let mut names = BTreeSet::new();
    for d in decls {
        if !names.insert(d.name.as_str()) {
            return Err(ParseError::DuplicateVariable(d.name.clone()));
        }
        if d.domain.is_empty() {
            return Err(ParseError::EmptyDomain(d.name.clone()));
        }
        let mut values = BTreeSet::new();
        for &v in &d.domain {
            if !values.insert(v) {
                return Err(ParseError::DuplicateDomainValue(d.name.clone(), v));
            }
        }
    }

    let mut result = Ok(());
    let mut check = |r: Result<(), ParseError>| {
        if result.is_ok() {
            if let Err(e) = r {
                result = Err(e);
            }
        }
    };
    body.visit(&mut |s| match s {
        Stmt::Assign { var, expr, .. } => {
            check(check_var(decls, var));
            check(check_expr_vars(decls, expr));
        }
        Stmt::Random { var, dist, .. } => {
            check(check_var(decls, var));
            check(check_distribution(decls, var, dist));
        }
        Stmt::If { cond, .. } | Stmt::While { cond, .. } => {
            check(check_bexpr_vars(decls, cond));
        }
        Stmt::Choose { branches, .. } => {
            let all_literal = branches.iter().all(|(p, _)| p.literal().is_some());
            if all_literal {
                let sum: f64 = branches.iter().filter_map(|(p, _)| p.literal()).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    check(Err(ParseError::ChooseSum(sum)));
                }
            }
        }
        _ => {}
    });
    result
}

fn check_var(decls: &[VarDecl], name: &str) -> Result<(), ParseError> {
    if decls.iter().any(|d| d.name == name) {
        Ok(())
    } else {
        Err(ParseError::UndeclaredVariable(name.to_string()))
    }
}

fn check_expr_vars(decls: &[VarDecl], expr: &Expr) -> Result<(), ParseError> {
    match expr {
        Expr::Int(_) => Ok(()),
        Expr::Var(name) => check_var(decls, name),
        Expr::Neg(e) => check_expr_vars(decls, e),
        Expr::Bin(_, l, r) => {
            check_expr_vars(decls, l)?;
            check_expr_vars(decls, r)
        }
    }
}

fn check_bexpr_vars(decls: &[VarDecl], b: &BExpr) -> Result<(), ParseError> {
    match b {
        BExpr::Const(_) => Ok(()),
        BExpr::Cmp(_, l, r) => {
            check_expr_vars(decls, l)?;
            check_expr_vars(decls, r)
        }
        BExpr::Not(inner) => check_bexpr_vars(decls, inner),
        BExpr::And(l, r) | BExpr::Or(l, r) => {
            check_bexpr_vars(decls, l)?;
            check_bexpr_vars(decls, r)
        }
    }
}

fn check_distribution(decls: &[VarDecl], var: &str, dist: &Distribution) -> Result<(), ParseError> {
    let domain = decls
        .iter()
        .find(|d| d.name == var)
        .map(|d| d.domain.as_slice())
        .unwrap_or(&[]);
    if dist.support.is_empty() {
        return Err(ParseError::EmptyDistribution);
    }
    let mut seen = BTreeSet::new();
    for &(v, p) in &dist.support {
        if !domain.contains(&v) {
            return Err(ParseError::ValueOutsideDomain {
                var: var.to_string(),
                value: v,
            });
        }
        if !seen.insert(v) {
            return Err(ParseError::DuplicateSupportValue(v));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(ParseError::ProbabilityRange(p));
        }
    }
    let sum: f64 = dist.support.iter().map(|&(_, p)| p).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ParseError::DistributionSum(sum));
    }
    Ok(())
}
