//! Discrete p-Dirichlet energy, lumped `L^p` norms and potential terms.
//!
//! The energy of a nodal field is the exact integral of `|grad u|^p` for its
//! continuous piecewise-linear interpolant, so it is exactly `p`-homogeneous
//! and monotone under mask inclusion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, PlapError, Result};
use crate::geometry::{Grid, OUTSIDE};

/// Nodal values of a discrete `W^{1,p}_0` function.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("field has {} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PlapError::InvalidField);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Samples `f` at every active node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent must satisfy p > 1, got {p}")))
    }
}

#[inline]
pub(crate) fn at(u: &[f64], i: u32) -> f64 {
    if i == OUTSIDE {
        0.0
    } else {
        u[i as usize]
    }
}

/// Squared element gradient `|grad u|^2` times `h^2`.
#[inline]
pub(crate) fn chain_sq(u: &[f64], chain: &[u32; 3], len: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..len - 1 {
        let d = at(u, chain[k + 1]) - at(u, chain[k]);
        s += d * d;
    }
    s
}

/// `sum_T |T| |grad u|^p` on raw nodal values.
pub fn energy_values(grid: &Grid, u: &[f64], p: f64) -> f64 {
    let len = grid.chain_len();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let half_p = 0.5 * p;
    let sum: f64 = grid
        .elements()
        .iter()
        .map(|e| {
            let g2 = chain_sq(u, &e.chain, len) * inv_h2;
            if g2 > 0.0 {
                g2.powf(half_p)
            } else {
                0.0
            }
        })
        .sum();
    grid.element_measure() * sum
}

/// Gradient of [`energy_values`] with respect to the nodal values, written into `out`.
///
/// Elements with vanishing gradient contribute nothing, which is the
/// subgradient selection used for `1 < p < 2`.
pub fn energy_gradient_values(grid: &Grid, u: &[f64], p: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let len = grid.chain_len();
    let h2 = grid.spacing() * grid.spacing();
    let scale = grid.element_measure() * p / h2;
    for e in grid.elements() {
        let g2 = chain_sq(u, &e.chain, len) / h2;
        if g2 <= 0.0 {
            continue;
        }
        let w = scale * g2.powf(0.5 * p - 1.0);
        for k in 0..len - 1 {
            let (a, b) = (e.chain[k], e.chain[k + 1]);
            let d = w * (at(u, b) - at(u, a));
            if b != OUTSIDE {
                out[b as usize] += d;
            }
            if a != OUTSIDE {
                out[a as usize] -= d;
            }
        }
    }
}

/// `sum_i m_i |u_i|^p` on raw nodal values.
pub fn lp_values(grid: &Grid, u: &[f64], p: f64) -> f64 {
    grid.node_mass() * u.iter().map(|v| v.abs().powf(p)).sum::<f64>()
}

/// Discrete p-Dirichlet energy of a field.
pub fn dirichlet_energy_p(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    check_finite(u)?;
    Ok(energy_values(u.grid(), u.values(), p))
}

/// Mass-lumped `||u||_p^p`.
pub fn lp_norm_p(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    check_finite(u)?;
    Ok(lp_values(u.grid(), u.values(), p))
}

/// Exact gradient of [`dirichlet_energy_p`].
pub fn energy_gradient(u: &Field, p: f64) -> Result<Field> {
    check_p(p)?;
    check_finite(u)?;
    let mut out = vec![0.0; u.values().len()];
    energy_gradient_values(u.grid(), u.values(), p, &mut out);
    Ok(Field { grid: Arc::clone(u.grid()), values: out })
}

fn check_finite(u: &Field) -> Result<()> {
    if u.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(PlapError::InvalidField)
    }
}

/// Confining potential family `V(x) = |x|^q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    PowerLaw { q: f64 },
}

impl PotentialSpec {
    pub fn power_law(q: f64) -> Result<Self> {
        let v = PotentialSpec::PowerLaw { q };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::PowerLaw { q } if *q > 0.0 && q.is_finite() => Ok(()),
            PotentialSpec::PowerLaw { q } => Err(invalid(format!("power-law exponent must be positive, got {q}"))),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            PotentialSpec::PowerLaw { q } => x[0].hypot(x[1]).powf(*q),
        }
    }

    /// Lower bound `alpha(R)` of the potential outside `B_R`.
    pub fn alpha(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::PowerLaw { q } => r.powf(*q),
        }
    }

    /// Node-wise values `V(x_i)` on a grid.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.coords(i))).collect()
    }
}

/// Amplitudes `eps_n` of the perturbation, strictly decreasing to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsSchedule {
    Geometric { eps0: f64, ratio: f64, count: usize },
    Explicit { values: Vec<f64> },
}

impl EpsSchedule {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self {
            EpsSchedule::Geometric { eps0, ratio, count } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(invalid(format!("geometric ratio must lie in (0,1), got {ratio}")));
                }
                (0..*count).map(|n| eps0 * ratio.powi(n as i32)).collect()
            }
            EpsSchedule::Explicit { values } => values.clone(),
        };
        if v.is_empty() {
            return Err(invalid("eps schedule is empty"));
        }
        if v.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(invalid("eps values must be positive"));
        }
        if v.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("eps values must be strictly decreasing"));
        }
        Ok(v)
    }
}

/// `E_p(u) + eps sum_i m_i V(x_i) |u_i|^p`.
pub fn weighted_energy(u: &Field, v: &PotentialSpec, eps: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_finite(u)?;
    v.validate()?;
    if !(eps >= 0.0) {
        return Err(invalid(format!("eps must be non-negative, got {eps}")));
    }
    let grid = u.grid();
    let potential: f64 = u.values().iter().enumerate().map(|(i, x)| v.eval(grid.coords(i)) * x.abs().powf(p)).sum();
    Ok(energy_values(grid, u.values(), p) + eps * grid.node_mass() * potential)
}

/// Constant `c_p = 1 + (2^{p-1} (p-1))^{p-1}` of the elementary inequality
/// `||a+b|^p - |a|^p| <= eps |a|^p + c_p eps^{1-p} |b|^p`, `0 < eps < 1`.
pub fn elementary_inequality_constant(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(1.0 + (2f64.powf(p - 1.0) * (p - 1.0)).powf(p - 1.0))
}
