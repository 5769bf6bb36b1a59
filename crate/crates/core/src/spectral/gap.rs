use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::threshold::{estimate_ep, EpEstimate};
use crate::eigen::{disjoint_pieces, ls_upper_bound, solve_ground_state, SolverOptions};
use crate::error::{invalid, Result};
use crate::geometry::{build_grid, DomainSpec, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Applies,
    Inconclusive,
    NotApplies,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Applies => "APPLIES",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NotApplies => "NOT-APPLIES",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapSettings {
    /// Relative margin the upper bound must clear below the threshold.
    pub safety: f64,
    /// Bounds within this relative distance of the threshold (or above it)
    /// are reported as no gap.
    pub no_gap_tolerance: f64,
    pub radii: Vec<f64>,
    pub windows: Vec<f64>,
    /// Half-width of the box the upper-bound pieces are cut from.
    pub piece_window: f64,
    pub solver: SolverOptions,
}

impl Default for GapSettings {
    fn default() -> Self {
        Self {
            safety: 0.05,
            no_gap_tolerance: 0.01,
            radii: vec![4.0, 6.0, 8.0],
            windows: vec![16.0, 20.0],
            piece_window: 20.0,
            solver: SolverOptions { tol_residual: 1e-6, ..SolverOptions::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub verdict: Verdict,
    pub k: usize,
    pub p: f64,
    pub h: f64,
    pub upper_bound: f64,
    pub piece_lambdas: Vec<f64>,
    pub ep_estimate: f64,
    pub ep: EpEstimate,
    pub safety: f64,
    pub converged: bool,
}

/// Upper bound for the `k`-th level against the estimated threshold at infinity.
pub fn gap_certificate(spec: &DomainSpec, k: usize, p: f64, h: f64, settings: &GapSettings) -> Result<GapReport> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(0.0..1.0).contains(&settings.safety) || !(0.0..=settings.safety).contains(&settings.no_gap_tolerance) {
        return Err(invalid("need 0 <= no_gap_tolerance <= safety < 1"));
    }
    let window = Window::centered(spec.dim(), settings.piece_window);
    let (upper_bound, piece_lambdas, pieces_converged) = if k == 1 {
        let grid = Arc::new(build_grid(spec, h, &window)?);
        let r = solve_ground_state(&grid, p, &settings.solver)?;
        (r.lambda, vec![r.lambda], r.converged)
    } else {
        let pieces = disjoint_pieces(spec, k, h, &window)?;
        let lb = ls_upper_bound(&pieces, p, &settings.solver)?;
        let conv = lb.converged();
        (lb.bound, lb.pieces.iter().map(|r| r.lambda).collect(), conv)
    };
    let ep = estimate_ep(spec, p, &settings.radii, &settings.windows, h, &settings.solver)?;
    let e = ep.extrapolated;
    let verdict = if upper_bound < (1.0 - settings.safety) * e {
        Verdict::Applies
    } else if upper_bound >= (1.0 - settings.no_gap_tolerance) * e {
        Verdict::NotApplies
    } else {
        Verdict::Inconclusive
    };
    let converged = pieces_converged && ep.table.iter().all(|c| c.converged);
    Ok(GapReport {
        verdict,
        k,
        p,
        h,
        upper_bound,
        piece_lambdas,
        ep_estimate: e,
        ep,
        safety: settings.safety,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_labels() {
        assert_eq!(Verdict::NotApplies.to_string(), "NOT-APPLIES");
        assert_eq!(Verdict::Applies.to_string(), "APPLIES");
    }

    #[test]
    fn k_zero_rejected() {
        let spec = DomainSpec::strip(0.5).unwrap();
        assert!(gap_certificate(&spec, 0, 2.0, 0.1, &GapSettings::default()).is_err());
    }
}
