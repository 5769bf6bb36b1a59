//! Thresholds at infinity, decay constants and gap certificates.

mod decay;
mod gap;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::energy::elementary_inequality_constant;
use crate::error::{invalid, PlapError, Result};

pub use decay::{
    check_caccioppoli, fit_decay, fit_decay_from, gradient_decay_profile, log_slope, radial_profile, Caccioppoli,
    DecayFit, DEFAULT_FLOOR,
};
pub use gap::{gap_certificate, GapReport, GapSettings, Verdict};
pub use threshold::{estimate_ep, estimate_r0, pi_p, EpCell, EpEstimate};

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent must satisfy p > 1, got {p}")))
    }
}

/// Right end of the domain of [`h_function`].
pub fn h_domain_end(p: f64) -> f64 {
    (1.0 / (p - 1.0)).min(1.0)
}

/// `h(t) = (1 - t)/(1 + t) (1 - (p - 1) t)` on `[0, min(1, 1/(p-1))]`.
pub fn h_function(t: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let end = h_domain_end(p);
    if !(0.0..=end).contains(&t) {
        return Err(invalid(format!("t = {t} outside [0, {end}]")));
    }
    Ok(h_raw(t, p))
}

fn h_raw(t: f64, p: f64) -> f64 {
    (1.0 - t) / (1.0 + t) * (1.0 - (p - 1.0) * t)
}

/// The unique `t` with `h(t) = target`, by bisection.
pub fn solve_h_inverse(target: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(target > 0.0 && target <= 1.0) {
        return Err(invalid(format!("target must lie in (0, 1], got {target}")));
    }
    let (mut lo, mut hi) = (0.0, h_domain_end(p));
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h_raw(mid, p) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Decay constants for an eigenvalue below the threshold at infinity,
/// optionally paired with a fitted rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub p: f64,
    pub lambda: f64,
    pub ep: f64,
    pub eps_lambda: f64,
    pub c4: f64,
    pub alpha_theory: f64,
    pub r0: f64,
    pub c1: f64,
    pub alpha_fit: Option<f64>,
    pub c_fit: Option<f64>,
    pub fit_range: Option<(f64, f64)>,
}

impl DecayModel {
    pub fn with_fit(mut self, fit: &DecayFit) -> Self {
        self.alpha_fit = Some(fit.alpha);
        self.c_fit = Some(fit.c);
        self.fit_range = Some((fit.r_min, fit.r_max));
        self
    }

    /// Constant `M` of the gradient tail bound.
    pub fn gradient_constant(&self) -> f64 {
        let p = self.p;
        (2f64.powf(p) * (p - 1.0).powf(p - 1.0) + 2.0 * self.lambda).powf(1.0 / p) * self.c1
    }

    /// `M e^{-alpha R}`, the bound on the gradient tail outside `B_{R+1}`.
    pub fn gradient_envelope(&self, r: f64) -> f64 {
        self.gradient_constant() * (-self.alpha_theory * r).exp()
    }
}

/// Chains `eps_lambda`, `C_4`, `alpha` and `C_1` for `0 < lambda < ep < inf`.
pub fn theoretical_decay(lambda: f64, ep: f64, p: f64, r0: f64) -> Result<DecayModel> {
    check_p(p)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if !ep.is_finite() {
        return Err(invalid("threshold at infinity must be finite"));
    }
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(invalid(format!("r0 must be non-negative, got {r0}")));
    }
    if lambda >= ep {
        return Err(PlapError::GapViolation { lambda, threshold: ep });
    }
    let eps = solve_h_inverse(0.5 * (1.0 + lambda / ep), p)?;
    let cp = elementary_inequality_constant(p)?;
    let c4 = 2.0 / (ep - lambda) * (eps.powf(1.0 - p) * (1.0 + (1.0 - (p - 1.0) * eps) / (1.0 + eps) * cp) + lambda);
    let alpha = (1.0 + 1.0 / c4).ln() / p;
    let c1 = (1.0 + 1.0 / c4).powf((r0 + 1.0) / p);
    Ok(DecayModel {
        p,
        lambda,
        ep,
        eps_lambda: eps,
        c4,
        alpha_theory: alpha,
        r0,
        c1,
        alpha_fit: None,
        c_fit: None,
        fit_range: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn h_values() {
        assert_eq!(h_function(0.0, 2.5).unwrap(), 1.0);
        assert!(h_function(0.5, 3.0).unwrap().abs() < 1e-15);
        assert!((h_function(0.5, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(h_function(0.6, 3.0).is_err());
        assert!(h_function(-0.1, 2.0).is_err());
    }

    #[test]
    fn h_inverse_quadratic_root() {
        let t = solve_h_inverse(0.75, 2.0).unwrap();
        assert!((t - (11.0 - 105f64.sqrt()) / 8.0).abs() < 1e-12);
        assert!(solve_h_inverse(1.0 - 1e-15, 2.0).unwrap() < 1e-12);
        assert!(solve_h_inverse(0.0, 2.0).is_err());
        assert!(solve_h_inverse(1.5, 2.0).is_err());
    }

    #[test]
    fn alpha_vanishes_at_threshold() {
        let ep = PI * PI;
        let m = theoretical_decay(ep * (1.0 - 1e-6), ep, 2.0, 0.0).unwrap();
        assert!(m.alpha_theory < 1e-4);
        assert!(matches!(theoretical_decay(ep, ep, 2.0, 0.0), Err(PlapError::GapViolation { .. })));
    }

    #[test]
    fn alpha_decreases_in_lambda() {
        let ep = PI * PI;
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let a = theoretical_decay(ep * i as f64 / 50.0, ep, 2.0, 1.0).unwrap().alpha_theory;
            assert!(a < last);
            last = a;
        }
    }

    #[test]
    fn regression_half_threshold() {
        // p = 2, Ep = pi^2, lambda = Ep/2, r0 = 1
        let ep = PI * PI;
        let m = theoretical_decay(ep / 2.0, ep, 2.0, 1.0).unwrap();
        let eps = solve_h_inverse(0.75, 2.0).unwrap();
        let c4 = 2.0 / (ep / 2.0) * ((1.0 / eps) * (1.0 + (1.0 - eps) / (1.0 + eps) * 3.0) + ep / 2.0);
        assert!((m.c4 - c4).abs() < 1e-12 * c4);
        assert!((m.alpha_theory - 0.5 * (1.0 + 1.0 / c4).ln()).abs() < 1e-15);
        assert!((m.alpha_theory - 0.028_579_815_019).abs() < 1e-10, "{}", m.alpha_theory);
    }
}
