use super::{Lambda, SynthError};
use crate::interp::{run_seed, SplitMix64};

/// Euclidean projection of a real vector onto the probability simplex
/// { p : p_i >= 0, Σ p_i = 1 }.
pub fn project_simplex(row: &[f64]) -> Vec<f64> {
    assert!(!row.is_empty(), "cannot project an empty row");
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = sorted[0] - 1.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u > t {
            threshold = t;
        }
    }
    row.iter().map(|&x| (x - threshold).max(0.0)).collect()
}

fn project_rows(lambda: &Lambda) -> Lambda {
    lambda.iter().map(|row| project_simplex(row)).collect()
}

#[derive(Debug, Clone)]
pub struct OptConfig {
    /// Accepted descent steps per start before giving up on it.
    pub max_iters: usize,
    /// Target objective value; optimization stops once reached.
    pub tol: f64,
    /// Seeded random restarts tried when a start fails to reach `tol`.
    pub restarts: usize,
    pub seed: u64,
    /// Forward finite-difference step.
    pub fd_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Step-size halvings per line search.
    pub max_backtracks: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            max_iters: 400,
            tol: 1e-8,
            restarts: 20,
            seed: 0,
            fd_step: 1e-6,
            armijo_c: 1e-4,
            max_backtracks: 40,
        }
    }
}

/// One accepted objective value: (restart index, iteration, value). Restart 0
/// is the caller's λ0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub restart: usize,
    pub iteration: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub lambda: Lambda,
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Projected gradient descent with forward-difference gradients and an
/// Armijo backtracking line search along the projected arc, restarted from
/// seeded random points while the target value has not been reached.
///
/// The objective is evaluated at (slightly) infeasible points when forming
/// gradients; it must be defined off the simplex, as polynomials in λ are.
pub fn optimize<F>(
    objective: F,
    lambda0: &Lambda,
    config: &OptConfig,
) -> Result<OptResult, SynthError>
where
    F: Fn(&Lambda) -> Result<f64, SynthError>,
{
    assert!(
        lambda0.iter().all(|row| !row.is_empty()),
        "lambda rows must be non-empty"
    );
    let mut trace = Vec::new();
    let mut total_iters = 0usize;

    let mut best = descent(
        &objective,
        project_rows(lambda0),
        config,
        0,
        &mut trace,
        &mut total_iters,
    )?;
    let mut restarts_used = 0usize;
    while best.1 > config.tol && restarts_used < config.restarts {
        restarts_used += 1;
        let start = random_feasible(lambda0, config.seed, restarts_used as u64);
        let candidate = descent(
            &objective,
            start,
            config,
            restarts_used,
            &mut trace,
            &mut total_iters,
        )?;
        if candidate.1 < best.1 {
            best = candidate;
        }
    }

    let converged = best.1 <= config.tol;
    Ok(OptResult {
        lambda: best.0,
        value: best.1,
        iterations: total_iters,
        restarts_used,
        converged,
        trace,
    })
}

fn random_feasible(shape: &Lambda, seed: u64, restart: u64) -> Lambda {
    let mut rng = SplitMix64::new(run_seed(seed, restart));
    let raw: Lambda = shape
        .iter()
        .map(|row| row.iter().map(|_| rng.next_f64()).collect())
        .collect();
    project_rows(&raw)
}

fn descent<F>(
    objective: &F,
    mut x: Lambda,
    config: &OptConfig,
    restart: usize,
    trace: &mut Vec<TracePoint>,
    total_iters: &mut usize,
) -> Result<(Lambda, f64), SynthError>
where
    F: Fn(&Lambda) -> Result<f64, SynthError>,
{
    let mut fx = objective(&x)?;
    trace.push(TracePoint {
        restart,
        iteration: 0,
        value: fx,
    });
    for iteration in 1..=config.max_iters {
        if fx <= config.tol {
            break;
        }
        let grad = gradient(objective, &x, fx, config.fd_step)?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..config.max_backtracks {
            let candidate = step(&x, &grad, alpha);
            let directional: f64 = candidate
                .iter()
                .zip(&x)
                .zip(&grad)
                .flat_map(|((c, xr), gr)| {
                    c.iter()
                        .zip(xr)
                        .zip(gr)
                        .map(|((cv, xv), gv)| (cv - xv) * gv)
                })
                .sum();
            if directional >= 0.0 {
                // No descent along the projected arc at this step size.
                alpha *= 0.5;
                continue;
            }
            let fc = objective(&candidate)?;
            if fc <= fx + config.armijo_c * directional {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            break; // Stationary within line-search resolution.
        };
        let moved: f64 = next
            .iter()
            .zip(&x)
            .flat_map(|(n, o)| n.iter().zip(o).map(|(a, b)| (a - b).abs()))
            .sum();
        x = next;
        fx = fnext;
        *total_iters += 1;
        trace.push(TracePoint {
            restart,
            iteration,
            value: fx,
        });
        if moved < 1e-14 {
            break;
        }
    }
    Ok((x, fx))
}

fn step(x: &Lambda, grad: &Lambda, alpha: f64) -> Lambda {
    let moved: Lambda = x
        .iter()
        .zip(grad)
        .map(|(row, grow)| row.iter().zip(grow).map(|(&v, &g)| v - alpha * g).collect())
        .collect();
    project_rows(&moved)
}

fn gradient<F>(objective: &F, x: &Lambda, fx: f64, h: f64) -> Result<Lambda, SynthError>
where
    F: Fn(&Lambda) -> Result<f64, SynthError>,
{
    let mut grad: Lambda = x.iter().map(|row| vec![0.0; row.len()]).collect();
    let mut probe = x.clone();
    for i in 0..x.len() {
        for j in 0..x[i].len() {
            probe[i][j] = x[i][j] + h;
            let f_plus = objective(&probe)?;
            probe[i][j] = x[i][j];
            grad[i][j] = (f_plus - fx) / h;
        }
    }
    Ok(grad)
}
