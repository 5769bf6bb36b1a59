use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_p;
use crate::eigen::{solve_ground_state, SolverOptions};
use crate::error::{invalid, PlapError, Result};
use crate::geometry::{build_grid, DomainSpec, Window};

/// Relative slack allowed by the monotonicity flags (solver tolerance level).
const MONOTONE_SLACK: f64 = 1e-7;

/// `pi_p`, from the ground state of `(-1/2, 1/2)` at spacings `h` and `h/2`
/// combined by Richardson extrapolation.
pub fn pi_p(p: f64, h: f64) -> Result<f64> {
    check_p(p)?;
    if !(h > 0.0 && h < 0.25) {
        return Err(invalid(format!("spacing must lie in (0, 1/4), got {h}")));
    }
    let spec = DomainSpec::interval(-0.5, 0.5)?;
    let window = Window::new(vec![-0.5], vec![0.5]);
    let opts = SolverOptions { tol_residual: 1e-6, restarts: 1, ..SolverOptions::default() };
    let solve = |hh: f64| -> Result<f64> {
        let grid = Arc::new(build_grid(&spec, hh, &window)?);
        Ok(solve_ground_state(&grid, p, &opts)?.lambda)
    };
    let (coarse, fine) = rayon::join(|| solve(h), || solve(0.5 * h));
    let (coarse, fine) = (coarse?, fine?);
    Ok(((4.0 * fine - coarse) / 3.0).powf(1.0 / p))
}

/// One cell of the threshold table: ground state of `(Omega cap window) \ B_R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpCell {
    pub r: f64,
    pub window: f64,
    /// `+inf` when the truncation has no interior nodes.
    pub lambda_ext: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpEstimate {
    pub table: Vec<EpCell>,
    /// Entry at the largest radius and window.
    pub extrapolated: f64,
    pub monotone_ok: bool,
}

/// Tabulates exterior ground states over all `(R, window)` pairs; windows
/// are half-widths of centred boxes.
pub fn estimate_ep(
    spec: &DomainSpec,
    p: f64,
    radii: &[f64],
    windows: &[f64],
    h: f64,
    opts: &SolverOptions,
) -> Result<EpEstimate> {
    check_p(p)?;
    if radii.is_empty() || windows.is_empty() {
        return Err(invalid("radius and window lists must be non-empty"));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] < 0.0 {
        return Err(invalid("radii must be non-negative and strictly increasing"));
    }
    if windows.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("windows must be strictly increasing"));
    }
    let r_max = radii[radii.len() - 1];
    if windows[0] <= r_max {
        return Err(invalid(format!("every window must exceed the largest radius {r_max}")));
    }
    let pairs: Vec<(f64, f64)> = radii.iter().flat_map(|&r| windows.iter().map(move |&w| (r, w))).collect();
    let table: Vec<EpCell> = pairs
        .par_iter()
        .map(|&(r, w)| {
            let ext = DomainSpec::difference_ball(spec.clone(), r)?;
            match build_grid(&ext, h, &Window::centered(spec.dim(), w)) {
                Ok(g) => {
                    let res = solve_ground_state(&Arc::new(g), p, opts)?;
                    Ok(EpCell { r, window: w, lambda_ext: res.lambda, converged: res.converged })
                }
                Err(PlapError::EmptyGrid) => Ok(EpCell { r, window: w, lambda_ext: f64::INFINITY, converged: true }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    if table.iter().all(|c| c.lambda_ext.is_infinite()) {
        return Err(PlapError::EmptyGrid);
    }
    let nw = windows.len();
    let cell = |i: usize, j: usize| table[i * nw + j].lambda_ext;
    let le = |a: f64, b: f64| a.is_infinite() && b.is_infinite() || a <= b * (1.0 + MONOTONE_SLACK);
    let mut monotone_ok = true;
    for i in 0..radii.len() {
        for j in 0..nw {
            if i + 1 < radii.len() && !le(cell(i, j), cell(i + 1, j)) {
                monotone_ok = false;
            }
            if j + 1 < nw && !le(cell(i, j + 1), cell(i, j)) {
                monotone_ok = false;
            }
        }
    }
    let extrapolated = table[table.len() - 1].lambda_ext;
    Ok(EpEstimate { table, extrapolated, monotone_ok })
}

/// Smallest tabulated radius whose exterior value (at the largest window)
/// reaches `(1 - eps) ep`; the largest radius when none does.
pub fn estimate_r0(estimate: &EpEstimate, eps: f64, ep: f64) -> f64 {
    let w_max = estimate.table.iter().map(|c| c.window).fold(f64::NEG_INFINITY, f64::max);
    let mut cells: Vec<&EpCell> = estimate.table.iter().filter(|c| c.window == w_max).collect();
    cells.sort_by(|a, b| a.r.total_cmp(&b.r));
    cells.iter().find(|c| c.lambda_ext >= (1.0 - eps) * ep).or(cells.last()).map_or(0.0, |c| c.r)
}
