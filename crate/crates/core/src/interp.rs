//! Operational interpreter: seeded Monte Carlo execution of programs, used
//! as an independent oracle for the compiled operator semantics.
//!
//! Randomness comes from a self-contained splitmix-style 64-bit generator so
//! that results are bit-identical across platforms and runs. Sample run `i`
//! of a simulation draws from its own substream derived from (seed, i), so
//! aggregation does not depend on execution order.

use crate::lang::{Label, ProbExpr, Program, Stmt};
use crate::linalg::StateVector;
use crate::los::{eval_bexpr, eval_expr, CompileError, EvalError, StateSpace};
use thiserror::Error;

/// SplitMix64: additive 0x9E3779B97F4A7C15 sequence with a two-round
/// finalizer. Small, seedable, and equidistributed enough for sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1), using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed of the substream used by sample run `run` of a simulation.
pub fn run_seed(seed: u64, run: u64) -> u64 {
    SplitMix64::new(seed ^ run.wrapping_mul(0xA076_1D64_78BD_642F)).next_u64()
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("run exceeded {0} steps")]
    Timeout(u64),
    #[error("unbound parameter '#{0}'; interpretation needs literal probabilities")]
    UnboundParameter(String),
    #[error("assignment to '{var}' evaluates to {value} outside its domain")]
    OutOfDomain { var: String, value: i64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

pub struct RunConfig {
    pub seed: u64,
    pub runs: usize,
    pub max_steps: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            runs: 100_000,
            max_steps: 100_000,
        }
    }
}

struct Execution<'a> {
    space: &'a StateSpace,
    rng: &'a mut SplitMix64,
    steps_left: u64,
    budget: u64,
}

impl Execution<'_> {
    fn tick(&mut self) -> Result<(), RunError> {
        if self.steps_left == 0 {
            return Err(RunError::Timeout(self.budget));
        }
        self.steps_left -= 1;
        Ok(())
    }

    fn exec(&mut self, stmt: &Stmt, state: &mut Vec<i64>) -> Result<(), RunError> {
        match stmt {
            Stmt::Skip { .. } => self.tick(),
            Stmt::Assign { var, expr, .. } => {
                self.tick()?;
                let value = eval_expr(expr, self.space, state)?;
                let idx = self.space.var_index(var).expect("validated at parse");
                if !self.space.domain(idx).contains(&value) {
                    return Err(RunError::OutOfDomain {
                        var: var.clone(),
                        value,
                    });
                }
                state[idx] = value;
                Ok(())
            }
            Stmt::Random { var, dist, .. } => {
                self.tick()?;
                let idx = self.space.var_index(var).expect("validated at parse");
                let mut r = self.rng.next_f64();
                let mut chosen = dist.support.last().expect("non-empty support").0;
                for &(value, p) in &dist.support {
                    if r < p {
                        chosen = value;
                        break;
                    }
                    r -= p;
                }
                state[idx] = chosen;
                Ok(())
            }
            Stmt::Seq(a, b) => {
                self.exec(a, state)?;
                self.exec(b, state)
            }
            Stmt::Choose { branches, .. } => {
                self.tick()?;
                let mut r = self.rng.next_f64();
                let mut selected = None;
                for (prob, branch) in branches {
                    let p = match prob {
                        ProbExpr::Lit(v) => *v,
                        ProbExpr::Param(name) | ProbExpr::Complement(name) => {
                            return Err(RunError::UnboundParameter(name.clone()))
                        }
                    };
                    if r < p {
                        selected = Some(branch);
                        break;
                    }
                    r -= p;
                }
                let branch = selected.unwrap_or(&branches.last().expect("branches").1);
                self.exec(branch, state)
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                self.tick()?;
                if eval_bexpr(cond, self.space, state)? {
                    self.exec(then_branch, state)
                } else {
                    self.exec(else_branch, state)
                }
            }
            Stmt::While { cond, body, .. } => loop {
                self.tick()?;
                if !eval_bexpr(cond, self.space, state)? {
                    return Ok(());
                }
                self.exec(body, state)?;
            },
        }
    }
}

/// Executes the program once from the given valuation, returning the
/// terminal valuation, or a timeout after `max_steps` executed blocks.
pub fn run_once(
    program: &Program,
    space: &StateSpace,
    initial: &[i64],
    rng: &mut SplitMix64,
    max_steps: u64,
) -> Result<Vec<i64>, RunError> {
    let mut state = initial.to_vec();
    let mut exec = Execution {
        space,
        rng,
        steps_left: max_steps,
        budget: max_steps,
    };
    exec.exec(&program.body, &mut state)?;
    Ok(state)
}

/// Empirical distribution over terminal valuations.
#[derive(Debug, Clone)]
pub struct Estimate {
    /// Terminal frequency per state (enumeration order), normalized by the
    /// number of runs.
    pub frequencies: StateVector,
    /// Fraction of runs that hit the step budget before terminating.
    pub censored: f64,
    pub runs: usize,
}

impl Estimate {
    /// Total-variation distance to a reference distribution over states:
    /// half the l1 difference.
    pub fn total_variation(
        &self,
        reference: &StateVector,
    ) -> Result<f64, crate::linalg::LinalgError> {
        Ok(0.5 * self.frequencies.sub(reference)?.l1())
    }
}

/// Runs the program `config.runs` times from `initial` and tallies terminal
/// valuations. Each run draws from a substream derived from
/// (config.seed, run index); identical configs give identical estimates.
pub fn estimate(
    program: &Program,
    space: &StateSpace,
    initial: &[i64],
    config: &RunConfig,
) -> Result<Estimate, RunError> {
    assert!(config.runs >= 1, "estimate needs at least one run");
    let mut counts = vec![0u64; space.size()];
    let mut censored = 0u64;
    for run in 0..config.runs {
        let mut rng = SplitMix64::new(run_seed(config.seed, run as u64));
        match run_once(program, space, initial, &mut rng, config.max_steps) {
            Ok(terminal) => {
                let off = space.offset(&terminal)?;
                counts[off] += 1;
            }
            Err(RunError::Timeout(_)) => censored += 1,
            Err(other) => return Err(other),
        }
    }
    let n = config.runs as f64;
    let dense: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(Estimate {
        frequencies: StateVector::from_dense(&dense),
        censored: censored as f64 / n,
        runs: config.runs,
    })
}

/// One-step transition kernel of a configuration, read directly off the
/// program's control flow: the distribution over successor (state, label)
/// pairs. This is the operational counterpart of one operator application.
pub fn step_kernel(
    program: &Program,
    space: &StateSpace,
    values: &[i64],
    label: Label,
) -> Result<Vec<(Vec<i64>, Label, f64)>, RunError> {
    use crate::lang::{Block, Polarity};
    let blocks = program.blocks();
    let edges = crate::lang::flow(program);
    let out_edges: Vec<_> = edges.iter().filter(|e| e.from == label).collect();
    let block = blocks
        .get(&label)
        .unwrap_or_else(|| panic!("label @{label} not in program"));
    let mut successors: Vec<(Vec<i64>, Label, f64)> = Vec::new();
    match block {
        Block::Skip | Block::Stop => {
            successors.push((values.to_vec(), out_edges[0].to, 1.0));
        }
        Block::Assign { var, expr } => {
            let idx = space.var_index(var).expect("validated at parse");
            let value = eval_expr(expr, space, values)?;
            if !space.domain(idx).contains(&value) {
                return Err(RunError::OutOfDomain {
                    var: var.to_string(),
                    value,
                });
            }
            let mut next = values.to_vec();
            next[idx] = value;
            successors.push((next, out_edges[0].to, 1.0));
        }
        Block::Random { var, dist } => {
            let idx = space.var_index(var).expect("validated at parse");
            for &(value, p) in &dist.support {
                let mut next = values.to_vec();
                next[idx] = value;
                successors.push((next, out_edges[0].to, p));
            }
        }
        Block::Test(cond) => {
            let holds = eval_bexpr(cond, space, values)?;
            let wanted = if holds {
                Polarity::Underlined
            } else {
                Polarity::Plain
            };
            let edge = out_edges
                .iter()
                .find(|e| e.polarity == wanted)
                .expect("tests have both polarities");
            successors.push((values.to_vec(), edge.to, 1.0));
        }
        Block::Choose(_) => {
            for edge in &out_edges {
                let p = match edge.prob.as_ref().expect("choice edges carry weights") {
                    ProbExpr::Lit(v) => *v,
                    ProbExpr::Param(name) | ProbExpr::Complement(name) => {
                        return Err(RunError::UnboundParameter(name.clone()))
                    }
                };
                successors.push((values.to_vec(), edge.to, p));
            }
        }
    }
    // Merge duplicate successors (a distribution may list several values
    // that lead to the same configuration only when values repeat, which
    // parsing rejects; choice branches may still coincide).
    let mut merged: Vec<(Vec<i64>, Label, f64)> = Vec::new();
    for (state, label, p) in successors {
        if let Some(existing) = merged
            .iter_mut()
            .find(|(s, l, _)| *s == state && *l == label)
        {
            existing.2 += p;
        } else {
            merged.push((state, label, p));
        }
    }
    Ok(merged)
}
