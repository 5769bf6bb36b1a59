//! Projected descent for the discrete Rayleigh quotient on the `L^p` sphere.
//!
//! Each step moves along a preconditioned descent direction, accepts the
//! step by Armijo backtracking (with one quadratic-model refinement) and
//! renormalises onto `||u||_p = 1`. Directions are combined Polak-Ribiere
//! style and reset to the preconditioned gradient whenever they stop being
//! descent directions. The preconditioner is the P1 stiffness matrix,
//! reweighted by `|grad u|^{p-2}` on a refresh schedule when `p != 2`.

use crate::energy::{chain_sq, energy_gradient_values, energy_values, lp_values};
use crate::error::Result;
use crate::geometry::Grid;
use crate::linalg::{assemble_stiffness, axpy, dot, EnvelopeCholesky};

const ARMIJO_C1: f64 = 1e-4;
const STAGNATION_WINDOW: usize = 10;
const MAX_BACKTRACKS: usize = 40;
/// Relative size below which quotient differences are treated as round-off.
const FLAT_TOL: f64 = 1e-11;
/// Slope window of the approximate Wolfe test used on flat stretches.
const WOLFE_SIGMA: f64 = 0.9;
const WOLFE_DELTA: f64 = 0.1;

/// Quotient `(E_p(u) + sum_i m_i w_i |u_i|^p) / sum_i m_i |u_i|^p`.
pub(crate) struct Quotient<'g> {
    pub grid: &'g Grid,
    pub p: f64,
    /// `eps * V(x_i)` per node, when a potential is present.
    pub weight: Option<Vec<f64>>,
}

impl Quotient<'_> {
    pub fn numerator(&self, u: &[f64]) -> f64 {
        let mut e = energy_values(self.grid, u, self.p);
        if let Some(w) = &self.weight {
            let m = self.grid.node_mass();
            e += m * u.iter().zip(w).map(|(x, wi)| wi * x.abs().powf(self.p)).sum::<f64>();
        }
        e
    }

    pub fn denominator(&self, u: &[f64]) -> f64 {
        lp_values(self.grid, u, self.p)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.numerator(u) / self.denominator(u)
    }

    /// Gradient of the numerator minus `lambda` times the gradient of the denominator.
    pub fn residual_vector(&self, u: &[f64], lambda: f64, out: &mut [f64]) {
        energy_gradient_values(self.grid, u, self.p, out);
        let m = self.grid.node_mass();
        let pm = self.p * m;
        for (i, o) in out.iter_mut().enumerate() {
            let x = u[i];
            let s = x.abs().powf(self.p - 2.0) * x;
            let s = if x == 0.0 { 0.0 } else { s };
            let w = self.weight.as_ref().map_or(0.0, |w| w[i]);
            *o += pm * (w - lambda) * s;
        }
    }

    /// Discrete `L^2` norm of the strong-form residual, `sqrt(sum_i r_i^2 / m_i)`.
    pub fn residual_norm(&self, r: &[f64]) -> f64 {
        (dot(r, r) / self.grid.node_mass()).sqrt()
    }

    fn preconditioner(&self, u: Option<&[f64]>) -> Result<EnvelopeCholesky> {
        let grid = self.grid;
        let p = self.p;
        let m = grid.node_mass();
        let adaptive = u.filter(|_| (p - 2.0).abs() > 1e-14);
        let scale = 0.5 * p * (p - 1.0);
        let (weights, node_factor) = match adaptive {
            None => (None, vec![1.0; grid.len()]),
            Some(u) => {
                let len = grid.chain_len();
                let h2 = grid.spacing() * grid.spacing();
                let g2: Vec<f64> = grid.elements().iter().map(|e| chain_sq(u, &e.chain, len) / h2).collect();
                let gmax = g2.iter().cloned().fold(0.0, f64::max);
                let delta2 = 1e-6 * gmax.max(1e-300);
                let w = g2.iter().map(|g| scale * (g + delta2).powf(0.5 * p - 1.0)).collect::<Vec<_>>();
                let umax = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                let du2 = 1e-6 * umax * umax + 1e-300;
                let nf = u.iter().map(|x| scale * (x * x + du2).powf(0.5 * p - 1.0)).collect();
                (Some(w), nf)
            }
        };
        let diag =
            self.weight.as_ref().map(|w| w.iter().zip(&node_factor).map(|(wi, f)| m * wi * f).collect::<Vec<_>>());
        let k = assemble_stiffness(grid, weights.as_deref(), diag.as_deref());
        EnvelopeCholesky::factor(&k)
    }
}

/// Outcome of a single descent run.
pub(crate) struct DescentRun {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

pub(crate) struct DescentSettings {
    pub tol_residual: f64,
    pub tol_lambda: f64,
    pub max_iters: usize,
}

fn normalize(q: &Quotient, u: &mut [f64]) -> f64 {
    let n = q.denominator(u);
    let c = n.powf(-1.0 / q.p);
    u.iter_mut().for_each(|v| *v *= c);
    c
}

fn refresh_due(iter: usize) -> bool {
    // geometric early refreshes, then every 25 iterations
    matches!(iter, 0 | 2 | 5 | 10 | 17) || (iter > 17 && (iter - 17).is_multiple_of(25))
}

pub(crate) fn minimize(q: &Quotient, init: Vec<f64>, settings: &DescentSettings) -> Result<DescentRun> {
    let n = q.grid.len();
    let mut u = init;
    u.iter_mut().for_each(|v| *v = v.abs());
    normalize(q, &mut u);
    let mut lambda = q.value(&u);
    let mut history = vec![lambda];

    let adaptive = (q.p - 2.0).abs() > 1e-14;
    let mut precond = q.preconditioner(adaptive.then_some(&u[..]))?;

    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut g_prev = vec![0.0; n];
    let mut z_prev = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut rbuf = vec![0.0; n];
    let mut have_prev = false;
    let mut step = 0.5;
    let mut stagnant = 0usize;
    let mut residual;
    let mut iterations = 0;
    let mut stalls = 0usize;

    loop {
        q.residual_vector(&u, lambda, &mut g);
        residual = q.residual_norm(&g);
        if residual < settings.tol_residual && stagnant >= STAGNATION_WINDOW {
            break;
        }
        if iterations >= settings.max_iters {
            break;
        }
        if adaptive && iterations > 0 && refresh_due(iterations) {
            precond = q.preconditioner(Some(&u))?;
            have_prev = false;
        }
        z.copy_from_slice(&g);
        precond.solve_in_place(&mut z);

        let mut beta = 0.0;
        if have_prev {
            let denom = dot(&z_prev, &g_prev);
            if denom > 0.0 {
                let num = dot(&z, &g) - dot(&z, &g_prev);
                beta = (num / denom).max(0.0);
            }
        }
        for (di, zi) in d.iter_mut().zip(&z) {
            *di = -zi + beta * *di;
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            for i in 0..n {
                d[i] = -z[i];
            }
            slope = -dot(&g, &z);
        }
        if !(slope < 0.0) {
            // gradient is numerically zero
            stagnant += 1;
            iterations += 1;
            history.push(lambda);
            if stagnant >= STAGNATION_WINDOW {
                break;
            }
            continue;
        }

        // slope of R along d at the normalised point, where N(u) = 1
        let phi0 = lambda;
        let accepted = line_search(q, &u, &d, phi0, slope, step, &mut trial, &mut rbuf);

        iterations += 1;
        match accepted {
            Some((t_acc, _)) => {
                stalls = 0;
                axpy(t_acc, &d, &mut u);
                let had_negative = u.iter().any(|&v| v < 0.0);
                if had_negative {
                    u.iter_mut().for_each(|v| *v = v.abs());
                }
                let c = normalize(q, &mut u);
                d.iter_mut().for_each(|v| *v *= c);
                let new_lambda = q.value(&u).min(phi0);
                let rel = (phi0 - new_lambda).abs() / new_lambda.abs().max(f64::MIN_POSITIVE);
                if rel < settings.tol_lambda {
                    stagnant += 1;
                } else {
                    stagnant = 0;
                }
                lambda = new_lambda;
                step = (2.0 * t_acc).min(1e6);
                g_prev.copy_from_slice(&g);
                z_prev.copy_from_slice(&z);
                have_prev = !had_negative;
            }
            None => {
                // no decrease at round-off level: restart from the preconditioned gradient
                stagnant += 1;
                stalls += 1;
                have_prev = false;
                step = 0.5;
                if stalls >= STAGNATION_WINDOW {
                    history.push(lambda);
                    q.residual_vector(&u, lambda, &mut g);
                    residual = q.residual_norm(&g);
                    break;
                }
            }
        }
        history.push(lambda);
    }

    let converged = residual < settings.tol_residual && stagnant >= STAGNATION_WINDOW;
    let lambda = q.value(&u);
    Ok(DescentRun { u, lambda, residual, iterations, converged, history })
}

fn quotient_at(q: &Quotient, u: &[f64], d: &[f64], t: f64, buf: &mut [f64]) -> f64 {
    buf.copy_from_slice(u);
    axpy(t, d, buf);
    q.value(buf)
}

/// Directional derivative of the quotient at `u + t d` along `d`.
fn slope_at(q: &Quotient, u: &[f64], d: &[f64], t: f64, buf: &mut [f64], r: &mut [f64]) -> f64 {
    let val = quotient_at(q, u, d, t, buf);
    q.residual_vector(buf, val, r);
    dot(r, d) / q.denominator(buf)
}

/// Armijo backtracking with one quadratic-model refinement. Once quotient
/// values stop resolving the decrease, steps are judged by slopes instead
/// (approximate Wolfe conditions, secant updates), since slopes stay accurate
/// long after function differences drown in round-off.
#[allow(clippy::too_many_arguments)]
fn line_search(
    q: &Quotient,
    u: &[f64],
    d: &[f64],
    phi0: f64,
    slope: f64,
    step: f64,
    trial: &mut [f64],
    r: &mut [f64],
) -> Option<(f64, f64)> {
    let flat = FLAT_TOL * phi0.abs();
    let mut t = step;
    for _ in 0..MAX_BACKTRACKS {
        let val = quotient_at(q, u, d, t, trial);
        if val.is_finite() && val <= phi0 + ARMIJO_C1 * t * slope && phi0 - val > flat {
            let curv = (val - phi0 - slope * t) / (t * t);
            let mut best = (t, val);
            if curv > 0.0 {
                let t_star = -slope / (2.0 * curv);
                if (t_star / t - 1.0).abs() > 0.05 && t_star.is_finite() {
                    let v_star = quotient_at(q, u, d, t_star, trial);
                    if v_star.is_finite() && v_star < val && v_star <= phi0 + ARMIJO_C1 * t_star * slope {
                        best = (t_star, v_star);
                    }
                }
            }
            return Some(best);
        }
        if val.is_finite() && (val - phi0).abs() <= flat {
            return wolfe_secant(q, u, d, phi0, slope, t, trial, r);
        }
        let curv = (val - phi0 - slope * t) / (t * t);
        let t_model = if curv > 0.0 && val.is_finite() { -slope / (2.0 * curv) } else { 0.1 * t };
        t = t_model.clamp(0.1 * t, 0.5 * t);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn wolfe_secant(
    q: &Quotient,
    u: &[f64],
    d: &[f64],
    phi0: f64,
    slope: f64,
    t0: f64,
    trial: &mut [f64],
    r: &mut [f64],
) -> Option<(f64, f64)> {
    let flat = FLAT_TOL * phi0.abs();
    let (lower, upper) = (WOLFE_SIGMA * slope, (2.0 * WOLFE_DELTA - 1.0) * slope);
    let mut t = t0;
    for _ in 0..8 {
        let dp = slope_at(q, u, d, t, trial, r);
        let val = q.value(trial);
        if !dp.is_finite() || !val.is_finite() {
            return None;
        }
        if (lower..=upper).contains(&dp) && val <= phi0 + flat {
            return Some((t, val));
        }
        t = if dp < slope {
            // slope steepened, the model is not convex here
            return None;
        } else {
            // zero of the secant through (0, slope) and (t, dp)
            (t * slope / (slope - dp)).min(100.0 * t)
        };
        if !(t > 0.0) {
            return None;
        }
    }
    None
}
