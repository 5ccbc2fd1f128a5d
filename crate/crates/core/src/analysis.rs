//! Fixed-point analysis of compiled operators and least-squares abstraction
//! of states and operators.
//!
//! An [`Abstraction`] is a full-column-rank nonnegative matrix A built as a
//! tensor product of per-variable-group factors; its Moore-Penrose
//! pseudo-inverse A† turns a concrete operator T into the abstract operator
//! A†·T·A and a distribution x into x·A.

use crate::lang::{parse_bexpr, Label, VarDecl};
use crate::linalg::{LinalgError, SparseMatrix, StateVector};
use crate::los::{eval_bexpr, CompileError, LabelIndex, LosOperator, StateSpace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no fixed point within {steps} steps (residual {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },
    #[error("label @{0} does not occur in the program")]
    UnknownLabel(Label),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("abstraction spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Result of iterating an operator to its fixed point.
#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub terminal: StateVector,
    pub steps: usize,
    pub residual: f64,
}

/// Power iteration x, x·T, x·T², ... until the l1 residual of successive
/// iterates drops below `eps`. Terminating programs reach an exact fixed
/// point; a residual that never falls below `eps` within `max_steps` means
/// the program may not terminate almost surely.
pub fn iterate(
    matrix: &SparseMatrix,
    x0: &StateVector,
    eps: f64,
    max_steps: usize,
) -> Result<AnalysisResult, AnalysisError> {
    let mut x = x0.clone();
    let mut residual = f64::INFINITY;
    for step in 0..=max_steps {
        let next = x.mul_mat(matrix)?;
        residual = next.sub(&x)?.l1();
        x = next;
        if residual < eps {
            return Ok(AnalysisResult {
                terminal: x,
                steps: step + 1,
                residual,
            });
        }
    }
    Err(AnalysisError::NonConvergence {
        steps: max_steps,
        residual,
    })
}

/// Default iteration parameters.
pub const DEFAULT_EPS: f64 = 1e-12;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Initial configuration s0 ⊗ e_init: the given distribution over states,
/// placed at the program's initial label.
pub fn initial_config(op: &LosOperator, s0: &StateVector) -> Result<StateVector, AnalysisError> {
    if s0.dim() != op.space.size() {
        return Err(AnalysisError::Linalg(LinalgError::DimensionMismatch(
            format!("state dim {} vs space size {}", s0.dim(), op.space.size()),
        )));
    }
    let pos = op
        .labels
        .position(op.init_label)
        .ok_or(AnalysisError::UnknownLabel(op.init_label))?;
    let e = StateVector::basis(pos + 1, op.labels.count())?;
    Ok(s0.kron(&e))
}

/// Point distribution on one concrete valuation.
pub fn point_state(space: &StateSpace, values: &[i64]) -> Result<StateVector, AnalysisError> {
    let off = space.offset(values)?;
    Ok(StateVector::basis(off + 1, space.size())?)
}

/// The sub-distribution of mass sitting at one label, as a vector over
/// states. Not renormalized; use [`StateVector::normalized`] explicitly when
/// a conditional distribution is wanted.
pub fn extract_label(
    x: &StateVector,
    label: Label,
    labels: &LabelIndex,
) -> Result<StateVector, AnalysisError> {
    let l = labels.count();
    if !x.dim().is_multiple_of(l) {
        return Err(AnalysisError::Linalg(LinalgError::DimensionMismatch(
            format!("vector dim {} not divisible by label count {}", x.dim(), l),
        )));
    }
    let pos = labels
        .position(label)
        .ok_or(AnalysisError::UnknownLabel(label))?;
    let mut out = StateVector::zeros(x.dim() / l);
    for (i, v) in x.iter() {
        if i % l == pos {
            out.set(i / l, v);
        }
    }
    Ok(out)
}

/// Forgetful factor: the n x 1 all-ones column that collapses a component to
/// a single point. Its pseudo-inverse is the uniform row.
pub fn forgetful(n: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(n, 1, (0..n).map(|i| (i, 0, 1.0)))
        .expect("in-range by construction")
}

/// Classification factor from a class assignment: row i carries a single 1
/// in column `class_of[i]`. Every class up to the maximum must be inhabited,
/// which makes the factor full column rank.
pub fn class_matrix(class_of: &[usize]) -> Result<SparseMatrix, AnalysisError> {
    let classes = class_of.iter().max().map_or(0, |m| m + 1);
    if classes == 0 {
        return Err(AnalysisError::Spec("empty classification".into()));
    }
    for c in 0..classes {
        if !class_of.contains(&c) {
            return Err(AnalysisError::Spec(format!("class {c} is uninhabited")));
        }
    }
    Ok(SparseMatrix::from_triplets(
        class_of.len(),
        classes,
        class_of.iter().enumerate().map(|(i, &c)| (i, c, 1.0)),
    )?)
}

/// A tensor-factored abstraction together with its pseudo-inverse.
#[derive(Debug, Clone)]
pub struct Abstraction {
    factors: Vec<SparseMatrix>,
    matrix: SparseMatrix,
    dagger: SparseMatrix,
}

impl Abstraction {
    /// Tensors the factors into A and computes A† from the normal equations.
    /// Fails when some factor (equivalently A) is not full column rank.
    pub fn from_factors(factors: Vec<SparseMatrix>) -> Result<Self, AnalysisError> {
        let mut it = factors.iter();
        let first = it
            .next()
            .ok_or_else(|| AnalysisError::Spec("abstraction needs at least one factor".into()))?;
        let mut matrix = first.clone();
        for f in it {
            matrix = matrix.kron(f)?;
        }
        let dagger = matrix.pseudo_inverse()?;
        Ok(Abstraction {
            factors,
            matrix,
            dagger,
        })
    }

    pub fn identity(n: usize) -> Self {
        let i = SparseMatrix::identity(n);
        Abstraction {
            factors: vec![i.clone()],
            matrix: i.clone(),
            dagger: i,
        }
    }

    pub fn factors(&self) -> &[SparseMatrix] {
        &self.factors
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dagger(&self) -> &SparseMatrix {
        &self.dagger
    }

    pub fn concrete_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn abstract_dim(&self) -> usize {
        self.matrix.cols()
    }
}

/// x · A.
pub fn abstract_state(x: &StateVector, a: &Abstraction) -> Result<StateVector, AnalysisError> {
    Ok(x.mul_mat(a.matrix())?)
}

/// A† · T · A.
pub fn abstract_operator(t: &SparseMatrix, a: &Abstraction) -> Result<SparseMatrix, AnalysisError> {
    Ok(a.dagger().matmul(t)?.matmul(a.matrix())?)
}

// ---------------------------------------------------------------------------
// Declarative abstraction specs.

/// Per-factor map: keep a variable group exactly, forget it, or classify its
/// joint valuations by a partition of boolean predicates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum FactorMap {
    Keyword(String),
    Classes { classes: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FactorSpec {
    pub vars: Vec<String>,
    pub map: FactorMap,
}

/// Declarative form of an abstraction: one factor per consecutive variable
/// group (in declaration order, covering all variables), plus an optional
/// factor for the label component.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AbstractionSpec {
    pub factors: Vec<FactorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl AbstractionSpec {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        serde_json::from_str(text).map_err(|e| AnalysisError::Spec(e.to_string()))
    }

    /// Compiles the spec against a state space. `label_count` must be given
    /// when the abstraction is applied to full (state, label) configuration
    /// vectors and absent for state-only vectors.
    pub fn compile(
        &self,
        space: &StateSpace,
        label_count: Option<usize>,
    ) -> Result<Abstraction, AnalysisError> {
        let mut factors = Vec::new();
        let mut next_var = 0usize;
        let decls = space.vars();
        for spec in &self.factors {
            let group: Vec<VarDecl> = spec
                .vars
                .iter()
                .map(|name| {
                    let decl = decls.get(next_var).filter(|d| &d.name == name);
                    match decl {
                        Some(d) => {
                            next_var += 1;
                            Ok(d.clone())
                        }
                        None => Err(AnalysisError::Spec(format!(
                            "factor variables must cover the declarations in order; \
                             expected '{}', found '{}'",
                            decls
                                .get(next_var)
                                .map(|d| d.name.as_str())
                                .unwrap_or("<none>"),
                            name
                        ))),
                    }
                })
                .collect::<Result<_, _>>()?;
            if group.is_empty() {
                return Err(AnalysisError::Spec("factor with no variables".into()));
            }
            let sub_space = StateSpace::new(&group)?;
            factors.push(compile_factor(&sub_space, &spec.map)?);
        }
        if next_var != decls.len() {
            return Err(AnalysisError::Spec(format!(
                "factors cover {next_var} of {} declared variables",
                decls.len()
            )));
        }
        match (label_count, &self.label) {
            (Some(l), choice) => {
                let map = choice.as_deref().unwrap_or("forget");
                factors.push(match map {
                    "id" => SparseMatrix::identity(l),
                    "forget" => forgetful(l),
                    other => {
                        return Err(AnalysisError::Spec(format!(
                            "label factor must be 'id' or 'forget', got '{other}'"
                        )))
                    }
                });
            }
            (None, Some(_)) => {
                return Err(AnalysisError::Spec(
                    "label factor given but the target vectors carry no label component".into(),
                ))
            }
            (None, None) => {}
        }
        Abstraction::from_factors(factors)
    }
}

fn compile_factor(sub_space: &StateSpace, map: &FactorMap) -> Result<SparseMatrix, AnalysisError> {
    match map {
        FactorMap::Keyword(k) if k == "id" => Ok(SparseMatrix::identity(sub_space.size())),
        FactorMap::Keyword(k) if k == "forget" => Ok(forgetful(sub_space.size())),
        FactorMap::Keyword(other) => Err(AnalysisError::Spec(format!(
            "unknown factor map '{other}' (expected 'id', 'forget', or classes)"
        ))),
        FactorMap::Classes { classes } => {
            let predicates = classes
                .iter()
                .map(|text| {
                    parse_bexpr(text)
                        .map_err(|e| AnalysisError::Spec(format!("class '{text}': {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut class_of = Vec::with_capacity(sub_space.size());
            for (off, values) in sub_space.valuations().enumerate() {
                let mut hits = predicates
                    .iter()
                    .enumerate()
                    .filter_map(|(c, b)| match eval_bexpr(b, sub_space, &values) {
                        Ok(true) => Some(Ok(c)),
                        Ok(false) => None,
                        Err(e) => Some(Err(AnalysisError::Spec(e.to_string()))),
                    });
                let first = hits.next().transpose()?;
                let second = hits.next().transpose()?;
                match (first, second) {
                    (Some(c), None) => class_of.push(c),
                    (None, _) => {
                        return Err(AnalysisError::Spec(format!(
                            "state ({}) matches no class",
                            sub_space.describe(off)
                        )))
                    }
                    (Some(a), Some(b)) => {
                        return Err(AnalysisError::Spec(format!(
                            "state ({}) matches classes {a} and {b}",
                            sub_space.describe(off)
                        )))
                    }
                }
            }
            if class_of.iter().max() != Some(&(predicates.len() - 1))
                || (0..predicates.len()).any(|c| !class_of.contains(&c))
            {
                return Err(AnalysisError::Spec("every class must be inhabited".into()));
            }
            class_matrix(&class_of)
        }
    }
}

/// Names for the coordinates of the abstract space, factor by factor; used
/// for CSV descriptions.
pub fn abstract_coordinate_names(
    spec: &AbstractionSpec,
    space: &StateSpace,
    labelled: bool,
) -> Result<Vec<String>, AnalysisError> {
    let mut per_factor: Vec<Vec<String>> = Vec::new();
    let mut var_cursor = 0usize;
    for fspec in &spec.factors {
        let group: Vec<VarDecl> = space.vars()[var_cursor..var_cursor + fspec.vars.len()].to_vec();
        var_cursor += fspec.vars.len();
        let names = match &fspec.map {
            FactorMap::Keyword(k) if k == "id" => {
                let sub = StateSpace::new(&group)?;
                (0..sub.size()).map(|off| sub.describe(off)).collect()
            }
            FactorMap::Keyword(_) => {
                vec![format!(
                    "{}=*",
                    group
                        .iter()
                        .map(|d| d.name.clone())
                        .collect::<Vec<_>>()
                        .join(",")
                )]
            }
            FactorMap::Classes { classes } => classes.clone(),
        };
        per_factor.push(names);
    }
    if labelled {
        match spec.label.as_deref() {
            Some("id") => per_factor.push(vec!["label=?".into()]),
            _ => per_factor.push(vec!["label=*".into()]),
        }
    }
    let mut out = vec![String::new()];
    for names in per_factor {
        let mut next = Vec::with_capacity(out.len() * names.len());
        for prefix in &out {
            for n in &names {
                if prefix.is_empty() {
                    next.push(n.clone());
                } else {
                    next.push(format!("{prefix}; {n}"));
                }
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::los::assemble;

    fn monty_winning_abstraction(label_count: usize) -> Abstraction {
        let aw = class_matrix(&[0, 1, 1, 1, 0, 1, 1, 1, 0]).unwrap();
        Abstraction::from_factors(vec![aw, forgetful(3), forgetful(label_count)]).unwrap()
    }

    #[test]
    fn forgetful_factor_and_its_dagger() {
        let af = forgetful(3);
        assert_eq!((af.rows(), af.cols()), (3, 1));
        let a = Abstraction::from_factors(vec![af]).unwrap();
        for j in 0..3 {
            assert!((a.dagger().get(0, j) - 1.0 / 3.0).abs() < 1e-12);
        }
        let scalar = Abstraction::from_factors(vec![forgetful(1)]).unwrap();
        assert_eq!(scalar.matrix(), &SparseMatrix::identity(1));
        // Tensoring forgetful columns is again a forgetful column.
        assert_eq!(forgetful(2).kron(&forgetful(3)).unwrap(), forgetful(6));
    }

    #[test]
    fn iterate_on_identity_returns_input() {
        let x = StateVector::from_dense(&[0.25, 0.75]);
        let r = iterate(&SparseMatrix::identity(2), &x, 1e-12, 10).unwrap();
        assert_eq!(r.terminal, x);
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.steps, 1);
    }

    #[test]
    fn iterate_reports_non_convergence() {
        // A two-cycle has no fixed point from an asymmetric start.
        let swap = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = StateVector::from_dense(&[1.0, 0.0]);
        match iterate(&swap, &x, 1e-12, 50) {
            Err(AnalysisError::NonConvergence {
                steps: 50,
                residual,
            }) => {
                assert!(residual > 1.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn monty_ht_terminal_distribution_matches_known_entries() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[0, 0, 0]).unwrap()).unwrap();
        let r = iterate(&op.matrix, &x0, 1e-12, 1000).unwrap();
        assert_eq!(r.terminal.nnz(), 12);
        // 1-based configuration indices.
        assert!((r.terminal.get(11) - 0.074074).abs() < 1e-5);
        assert!((r.terminal.get(35) - 0.11111).abs() < 1e-5);
        assert!((r.terminal.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monty_hw_terminal_distribution_matches_known_entries() {
        let op = assemble(&fixtures::corpus("monty_hw.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[0, 0, 0]).unwrap()).unwrap();
        let r = iterate(&op.matrix, &x0, 1e-12, 1000).unwrap();
        assert!((r.terminal.get(17) - 0.11111).abs() < 1e-5);
        assert!((r.terminal.get(53) - 0.037037).abs() < 1e-5);
    }

    #[test]
    fn initial_config_places_mass_at_the_initial_label() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[0, 0, 0]).unwrap()).unwrap();
        assert_eq!(x0.get(0), 1.0);
        assert_eq!(x0.nnz(), 1);

        let uniform = StateVector::from_dense(&[0.5, 0.5]);
        let small = assemble(&crate::lang::parse("var x:{0,1}; skip").unwrap()).unwrap();
        let x0 = initial_config(&small, &uniform).unwrap();
        assert_eq!(x0.to_dense(), vec![0.5, 0.0, 0.5, 0.0]);

        let bad = StateVector::from_dense(&[1.0, 0.0, 0.0]);
        assert!(initial_config(&small, &bad).is_err());
    }

    #[test]
    fn extract_label_splits_the_tensor() {
        let labels = LabelIndex::new(vec![1, 2]);
        let s = StateVector::from_dense(&[0.25, 0.75]);
        let x = s.kron(&StateVector::basis(2, 2).unwrap());
        let extracted = extract_label(&x, 2, &labels).unwrap();
        assert_eq!(extracted, s);
        let empty = extract_label(&x, 1, &labels).unwrap();
        assert_eq!(empty.nnz(), 0);
        assert!(extract_label(&x, 7, &labels).is_err());
    }

    #[test]
    fn monty_ht_terminates_with_all_mass_at_stop() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[0, 0, 0]).unwrap()).unwrap();
        let r = iterate(&op.matrix, &x0, 1e-12, 1000).unwrap();
        let at_stop = extract_label(&r.terminal, op.stop_label, &op.labels).unwrap();
        assert!((at_stop.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mass_at_stop_is_monotone_and_converges_to_one() {
        for name in ["monty_ht.pw", "monty_hw.pw", "coin_flips.pw"] {
            let op = assemble(&fixtures::corpus(name)).unwrap();
            let first: Vec<i64> = op.space.vars().iter().map(|d| d.domain[0]).collect();
            let mut x = initial_config(&op, &point_state(&op.space, &first).unwrap()).unwrap();
            let mut prev = 0.0;
            for _ in 0..200 {
                let mass = extract_label(&x, op.stop_label, &op.labels).unwrap().sum();
                assert!(mass >= prev - 1e-12, "{name}: stop mass decreased");
                prev = mass;
                x = x.mul_mat(&op.matrix).unwrap();
            }
            assert!((prev - 1.0).abs() < 1e-6, "{name}: stop mass {prev}");
        }
    }

    #[test]
    fn one_operator_step_spreads_the_first_random_assignment() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[0, 0, 0]).unwrap()).unwrap();
        let x1 = x0.mul_mat(&op.matrix).unwrap();
        // One application of the first block (d ?= {0,1,2}): a third of the
        // mass on each door value, control at label 2.
        let mut expected = StateVector::zeros(162);
        for d in 0..3 {
            let state = op.space.offset(&[d, 0, 0]).unwrap();
            expected.set(state * 6 + 1, 1.0 / 3.0);
        }
        assert!(x1.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn winning_abstraction_of_both_strategies() {
        let op_t = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let x0 = initial_config(&op_t, &point_state(&op_t.space, &[0, 0, 0]).unwrap()).unwrap();
        let terminal = iterate(&op_t.matrix, &x0, 1e-12, 1000).unwrap().terminal;
        let a = monty_winning_abstraction(6);
        let abstracted = abstract_state(&terminal, &a).unwrap();
        assert!((abstracted.get(0) - 1.0 / 3.0).abs() < 1e-5);
        assert!((abstracted.get(1) - 2.0 / 3.0).abs() < 1e-5);

        let op_w = assemble(&fixtures::corpus("monty_hw.pw")).unwrap();
        let x0 = initial_config(&op_w, &point_state(&op_w.space, &[0, 0, 0]).unwrap()).unwrap();
        let terminal = iterate(&op_w.matrix, &x0, 1e-12, 1000).unwrap().terminal;
        let a = monty_winning_abstraction(9);
        let abstracted = abstract_state(&terminal, &a).unwrap();
        assert!((abstracted.get(0) - 2.0 / 3.0).abs() < 1e-5);
        assert!((abstracted.get(1) - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn identity_abstraction_preserves_states_and_operators() {
        let x = StateVector::from_dense(&[0.1, 0.2, 0.7]);
        let a = Abstraction::identity(3);
        assert_eq!(abstract_state(&x, &a).unwrap(), x);
        let t = SparseMatrix::from_dense(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.2, 0.3, 0.5],
        ]);
        assert_eq!(abstract_operator(&t, &a).unwrap(), t);
    }

    #[test]
    fn abstracting_an_identity_collapses_to_identity() {
        let a = monty_winning_abstraction(6);
        let abstracted = abstract_operator(&SparseMatrix::identity(162), &a).unwrap();
        assert!(abstracted.max_abs_diff(&SparseMatrix::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn abstraction_is_linear_over_block_sums() {
        let p = fixtures::corpus("monty_ht.pw");
        let op = assemble(&p).unwrap();
        let a = monty_winning_abstraction(6);
        // Split T into its per-source-label row blocks and abstract each.
        let l = op.labels.count();
        let mut parts = Vec::new();
        for pos in 0..l {
            let triplets: Vec<_> = op
                .matrix
                .triplets()
                .filter(|&(i, _, _)| i % l == pos)
                .collect();
            parts.push(SparseMatrix::from_triplets(op.dim(), op.dim(), triplets).unwrap());
        }
        let summed = abstract_operator(&op.matrix, &a).unwrap();
        let blockwise =
            SparseMatrix::sum(parts.iter().map(|b| abstract_operator(b, &a).unwrap())).unwrap();
        assert!(summed.max_abs_diff(&blockwise).unwrap() < 1e-12);
    }

    #[test]
    fn spec_compiles_the_winning_abstraction() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../programs/abstractions/winning.json"
        ))
        .unwrap();
        let spec = AbstractionSpec::from_json(&text).unwrap();
        let a = spec.compile(&op.space, Some(op.labels.count())).unwrap();
        let reference = monty_winning_abstraction(6);
        assert_eq!(a.matrix(), reference.matrix());
        let names = abstract_coordinate_names(&spec, &op.space, true).unwrap();
        assert_eq!(names.len(), 2);
        assert!(names[0].starts_with("d == g"));
    }

    #[test]
    fn spec_rejects_bad_partitions_and_wrong_order() {
        let op = assemble(&fixtures::corpus("monty_ht.pw")).unwrap();
        let overlapping = AbstractionSpec {
            factors: vec![
                FactorSpec {
                    vars: vec!["d".into(), "g".into()],
                    map: FactorMap::Classes {
                        classes: vec!["d == g".into(), "d >= g".into()],
                    },
                },
                FactorSpec {
                    vars: vec!["o".into()],
                    map: FactorMap::Keyword("forget".into()),
                },
            ],
            label: Some("forget".into()),
        };
        assert!(matches!(
            overlapping.compile(&op.space, Some(6)),
            Err(AnalysisError::Spec(_))
        ));

        let wrong_order = AbstractionSpec {
            factors: vec![
                FactorSpec {
                    vars: vec!["g".into()],
                    map: FactorMap::Keyword("id".into()),
                },
                FactorSpec {
                    vars: vec!["d".into()],
                    map: FactorMap::Keyword("id".into()),
                },
                FactorSpec {
                    vars: vec!["o".into()],
                    map: FactorMap::Keyword("forget".into()),
                },
            ],
            label: None,
        };
        assert!(matches!(
            wrong_order.compile(&op.space, Some(6)),
            Err(AnalysisError::Spec(_))
        ));
    }

    #[test]
    fn dagger_factorizes_over_the_tensor_product() {
        let aw = class_matrix(&[0, 1, 1, 1, 0, 1, 1, 1, 0]).unwrap();
        let a = Abstraction::from_factors(vec![aw.clone(), forgetful(3), forgetful(6)]).unwrap();
        let factored = aw
            .pseudo_inverse()
            .unwrap()
            .kron(&forgetful(3).pseudo_inverse().unwrap())
            .unwrap()
            .kron(&forgetful(6).pseudo_inverse().unwrap())
            .unwrap();
        assert!(a.dagger().max_abs_diff(&factored).unwrap() < 1e-10);
    }

    #[test]
    fn mass_is_preserved_by_row_normalized_abstractions() {
        let op = assemble(&fixtures::corpus("monty_hw.pw")).unwrap();
        let x0 = initial_config(&op, &point_state(&op.space, &[1, 2, 0]).unwrap()).unwrap();
        let terminal = iterate(&op.matrix, &x0, 1e-12, 1000).unwrap().terminal;
        let a = monty_winning_abstraction(9);
        let abstracted = abstract_state(&terminal, &a).unwrap();
        assert!((abstracted.sum() - 1.0).abs() < 1e-9);
    }
}
