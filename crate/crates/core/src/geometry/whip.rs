//! Calibration of the bump pieces that make up a whip.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::curve::CurveSpec;
use super::domain::{whip_translations, DomainSpec, WHIP_HALFWIDTH};
use super::grid::build_grid;
use crate::eigen::{solve_ground_state, SolverOptions};
use crate::error::{invalid, PlapError, Result};
use crate::spectral::pi_p;

/// One calibrated piece: half-length, centre shift and bump height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhipSegment {
    pub length: f64,
    pub tau: f64,
    pub amplitude: f64,
    /// Discrete ground state of the piece at the calibrated length.
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhipCalibration {
    /// Required relative gap below `pi_p^p`.
    pub margin: f64,
    /// Largest half-length tried before giving up.
    pub max_length: f64,
    /// Factor between successive trial lengths.
    pub growth: f64,
    pub solver: SolverOptions,
}

impl Default for WhipCalibration {
    fn default() -> Self {
        Self {
            margin: 0.10,
            max_length: 24.0,
            growth: 1.25,
            solver: SolverOptions { tol_residual: 1e-6, restarts: 1, ..SolverOptions::default() },
        }
    }
}

/// Bump piece `n` of half-length `length`, centred at the origin.
pub fn whip_piece(n: usize, length: f64) -> Result<DomainSpec> {
    if !(length > PI) || !length.is_finite() {
        return Err(invalid(format!("piece half-length must exceed pi, got {length}")));
    }
    let tube = DomainSpec::waveguide(CurveSpec::CosBump { n: n as u32 }, WHIP_HALFWIDTH)?;
    let cut = DomainSpec::rect(vec![-length, f64::NEG_INFINITY], vec![length, f64::INFINITY])?;
    DomainSpec::intersection(vec![tube, cut])
}

fn piece_lambda(n: usize, length: f64, p: f64, h: f64, opts: &SolverOptions) -> Result<f64> {
    let spec = whip_piece(n, length)?;
    let grid = Arc::new(build_grid(&spec, h, &spec.bounding_box())?);
    Ok(solve_ground_state(&grid, p, opts)?.lambda)
}

/// Finds, piece by piece, a half-length whose discrete ground state lies
/// below `(1 - margin) pi_p^p`, growing the trial length geometrically and
/// then bisecting down to the shortest admissible one.
pub fn whip_layout(n_segments: usize, p: f64, h: f64, cal: &WhipCalibration) -> Result<Vec<WhipSegment>> {
    if n_segments == 0 {
        return Err(invalid("need at least one whip segment"));
    }
    if !(p > 1.0) || !(h > 0.0) {
        return Err(invalid(format!("need p > 1 and h > 0, got p = {p}, h = {h}")));
    }
    if !(0.0..1.0).contains(&cal.margin) || !(cal.growth > 1.0) || !(cal.max_length > PI) {
        return Err(invalid("calibration needs 0 <= margin < 1, growth > 1 and max_length > pi"));
    }
    let threshold = pi_p(p, h)?.powf(p) * (1.0 - cal.margin);
    let mut lengths = Vec::with_capacity(n_segments);
    let mut lambdas = Vec::with_capacity(n_segments);
    for n in 0..n_segments {
        let mut failing = PI;
        let mut len = PI + 1.0;
        let mut best = f64::INFINITY;
        let found = loop {
            let lam = piece_lambda(n, len, p, h, &cal.solver)?;
            best = best.min(lam);
            if lam < threshold {
                break Some((len, lam));
            }
            if len >= cal.max_length {
                break None;
            }
            failing = len;
            len = (len * cal.growth).min(cal.max_length);
        };
        let Some((mut ok, mut lam_ok)) = found else {
            return Err(PlapError::SegmentCalibrationFailed {
                segment: n,
                threshold,
                max_length: cal.max_length,
                best,
            });
        };
        for _ in 0..6 {
            let mid = 0.5 * (failing + ok);
            let lam = piece_lambda(n, mid, p, h, &cal.solver)?;
            if lam < threshold {
                ok = mid;
                lam_ok = lam;
            } else {
                failing = mid;
            }
        }
        lengths.push(ok);
        lambdas.push(lam_ok);
    }
    let taus = whip_translations(&lengths);
    Ok((0..n_segments)
        .map(|n| WhipSegment {
            length: lengths[n],
            tau: taus[n],
            amplitude: CurveSpec::CosBump { n: n as u32 }.amplitude(),
            lambda: lambdas[n],
        })
        .collect())
}
