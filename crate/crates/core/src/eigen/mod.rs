//! Ground states, perturbed eigenpairs and minmax upper bounds.

mod courant_fischer;
pub(crate) mod descent;
mod ls_bound;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{Field, PotentialSpec};
use crate::error::{invalid, PlapError, Result};
use crate::geometry::Grid;
use descent::{minimize, DescentSettings, Quotient};

pub use courant_fischer::courant_fischer_p2;
pub use ls_bound::{disjoint_pieces, ls_upper_bound, LsBound};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol_residual: f64,
    pub tol_lambda: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Number of independent starts; the lowest quotient wins.
    pub restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol_residual: 1e-8, tol_lambda: 1e-10, max_iters: 20_000, seed: 0, restarts: 2 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) || !(self.tol_lambda > 0.0) {
            return Err(invalid("solver tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Eigenvalue estimate with its normalised eigenfunction.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda: f64,
    pub u: Field,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    /// `||u||_inf / lambda^{d/p^2}`; the constant of the sup bound is not known.
    pub linf_ratio: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent must satisfy p > 1, got {p}")))
    }
}

/// Positive start: distance to the masked boundary, optionally jittered.
fn initial_guess(grid: &Grid, seed: u64, restart: usize) -> Vec<f64> {
    let mut u = grid.boundary_distance();
    if restart > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        for v in &mut u {
            *v *= 1.0 + 0.5 * rng.random::<f64>();
        }
    }
    u
}

fn run(
    grid: &Arc<Grid>,
    p: f64,
    weight: Option<Vec<f64>>,
    opts: &SolverOptions,
    warm: Option<&[f64]>,
) -> Result<EigenResult> {
    check_p(p)?;
    opts.validate()?;
    if grid.is_empty() {
        return Err(PlapError::EmptyGrid);
    }
    let q = Quotient { grid, p, weight };
    let settings =
        DescentSettings { tol_residual: opts.tol_residual, tol_lambda: opts.tol_lambda, max_iters: opts.max_iters };
    let starts: Vec<Vec<f64>> = match warm {
        Some(w) => vec![w.to_vec()],
        None => (0..opts.restarts).map(|r| initial_guess(grid, opts.seed, r)).collect(),
    };
    let runs: Vec<_> = starts.into_par_iter().map(|s| minimize(&q, s, &settings)).collect::<Result<_>>()?;
    let best = runs.into_iter().reduce(|a, b| if b.lambda < a.lambda { b } else { a }).expect("at least one start");
    let linf = best.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let linf_ratio = linf / best.lambda.powf(grid.dim() as f64 / (p * p));
    Ok(EigenResult {
        lambda: best.lambda,
        u: Field::new(Arc::clone(grid), best.u)?,
        residual: best.residual,
        iterations: best.iterations,
        converged: best.converged,
        energy_history: best.history,
        linf_ratio,
    })
}

/// Minimises the discrete Rayleigh quotient over nonnegative fields.
pub fn solve_ground_state(grid: &Arc<Grid>, p: f64, opts: &SolverOptions) -> Result<EigenResult> {
    run(grid, p, None, opts, None)
}

/// Same as [`solve_ground_state`] but started from `init` only.
pub fn solve_ground_state_from(grid: &Arc<Grid>, p: f64, opts: &SolverOptions, init: &Field) -> Result<EigenResult> {
    run(grid, p, None, opts, Some(init.values()))
}

/// `E_p(u) / ||u||_p^p`.
pub fn rayleigh(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    let den = crate::energy::lp_norm_p(u, p)?;
    if den == 0.0 {
        return Err(PlapError::ZeroField);
    }
    Ok(crate::energy::dirichlet_energy_p(u, p)? / den)
}

/// Discrete `L^2` norm of `-Delta_p u - lambda |u|^{p-2} u` for a normalised `u`.
pub fn residual_norm(u: &Field, lambda: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let q = Quotient { grid: u.grid(), p, weight: None };
    let mut r = vec![0.0; u.values().len()];
    q.residual_vector(u.values(), lambda, &mut r);
    Ok(q.residual_norm(&r))
}

fn potential_weight(grid: &Grid, v: &PotentialSpec, eps: f64) -> Result<Vec<f64>> {
    v.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(v.sample(grid).into_iter().map(|x| eps * x).collect())
}

/// Ground state of the weighted functional `E_p + eps int V |u|^p`.
pub fn solve_perturbed(
    grid: &Arc<Grid>,
    p: f64,
    v: &PotentialSpec,
    eps: f64,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    let w = potential_weight(grid, v, eps)?;
    run(grid, p, Some(w), opts, None)
}

/// Runs [`solve_perturbed`] for each `eps` in decreasing order, warm-starting
/// every member from the previous eigenfunction. Results follow that order.
pub fn sweep_perturbed(
    grid: &Arc<Grid>,
    p: f64,
    v: &PotentialSpec,
    eps_list: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<EigenResult>> {
    if eps_list.is_empty() {
        return Err(invalid("eps list is empty"));
    }
    let mut eps_list = eps_list.to_vec();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps values must be distinct"));
    }
    let mut out: Vec<EigenResult> = Vec::with_capacity(eps_list.len());
    for (i, &eps) in eps_list.iter().enumerate() {
        let w = potential_weight(grid, v, eps)?;
        let res = if i == 0 {
            run(grid, p, Some(w), opts, None)?
        } else {
            run(grid, p, Some(w), opts, Some(out[i - 1].u.values()))?
        };
        out.push(res);
    }
    Ok(out)
}

/// True when every member of a sweep converged.
pub fn sweep_converged(results: &[EigenResult]) -> bool {
    results.iter().all(|r| r.converged)
}
