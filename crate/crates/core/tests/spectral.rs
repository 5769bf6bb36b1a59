use std::f64::consts::PI;
use std::sync::Arc;

use plap_core::spectral::{estimate_r0, h_domain_end};
use plap_core::*;
use proptest::prelude::*;

fn pi_p_exact(p: f64) -> f64 {
    (p - 1.0).powf(1.0 / p) * 2.0 * PI / (p * (PI / p).sin())
}

#[test]
fn one_dimensional_constant_matches_closed_form() {
    for p in [1.5, 2.0, 3.0, 4.0] {
        let v = pi_p(p, 1.0 / 128.0).unwrap();
        assert!((v / pi_p_exact(p) - 1.0).abs() < 1e-4, "p = {p}: {v}");
    }
    assert!((pi_p_exact(3.0) - pi_p_exact(1.5)).abs() < 1e-12);
    assert!(pi_p(2.0, 0.5).is_err());
}

#[test]
fn h_function_examples() {
    assert!((h_function(0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((h_function(0.5, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(h_function(1.0, 2.0).unwrap(), 0.0);
    assert!(h_function(1.5, 2.0).is_err());
    assert!(solve_h_inverse(1.5, 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn h_inverse_round_trips(y in 1e-3f64..1.0, p in 1.1f64..6.0) {
        let t = solve_h_inverse(y, p).unwrap();
        prop_assert!(t > 0.0 && t < h_domain_end(p));
        prop_assert!((h_function(t, p).unwrap() - y).abs() < 1e-12);
    }

    #[test]
    fn alpha_decreases_towards_threshold(a in 0.05f64..0.9, b in 0.05f64..0.9, p in 1.2f64..4.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m_lo = theoretical_decay(lo * 10.0, 10.0, p, 1.0).unwrap();
        let m_hi = theoretical_decay(hi * 10.0, 10.0, p, 1.0).unwrap();
        prop_assert!(m_lo.alpha_theory > 0.0);
        prop_assert!(m_hi.alpha_theory <= m_lo.alpha_theory);
    }
}

#[test]
fn decay_model_rejects_gap_violation() {
    assert!(matches!(theoretical_decay(10.0, 9.0, 2.0, 1.0), Err(PlapError::GapViolation { .. })));
    assert!(theoretical_decay(1.0, f64::INFINITY, 2.0, 1.0).is_err());
}

#[test]
fn fitted_rates_recover_synthetic_exponentials() {
    let spec = DomainSpec::ball(vec![0.0, 0.0], 8.0).unwrap();
    let g = Arc::new(build_grid(&spec, 1.0 / 8.0, &Window::centered(2, 8.0)).unwrap());
    for a in [0.5, 1.0, 2.0] {
        let u = Field::from_fn(Arc::clone(&g), |x| (-a * x[0].hypot(x[1])).exp()).unwrap();
        let fit = fit_decay(&u, 1e-12).unwrap();
        assert!((fit.alpha / a - 1.0).abs() < 0.01, "{a}: {}", fit.alpha);
    }
}

#[test]
fn ball_has_no_exterior() {
    let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    let opts = SolverOptions { tol_residual: 1e-6, restarts: 1, ..Default::default() };
    let est = estimate_ep(&ball, 2.0, &[2.0], &[3.0], 1.0 / 16.0, &opts);
    assert!(matches!(est, Err(PlapError::EmptyGrid)));
}

#[test]
fn strip_threshold_is_close_to_one_dimensional() {
    let strip = DomainSpec::strip(0.5).unwrap();
    let opts = SolverOptions { tol_residual: 1e-6, restarts: 1, ..Default::default() };
    let est = estimate_ep(&strip, 2.0, &[2.0, 4.0], &[10.0, 12.0], 1.0 / 16.0, &opts).unwrap();
    assert!(est.monotone_ok);
    assert_eq!(est.table.len(), 4);
    // truncation only raises the eigenvalue
    assert!(est.extrapolated >= PI * PI * 0.99);
    assert!((est.extrapolated / (PI * PI) - 1.0).abs() < 0.05, "{}", est.extrapolated);
    let r0 = estimate_r0(&est, 0.5, est.extrapolated);
    assert!(r0 == 2.0 || r0 == 4.0);
}

#[test]
fn caccioppoli_holds_for_a_ground_state() {
    let spec = DomainSpec::slab_with_ball(0.5, 1.5).unwrap();
    let g = Arc::new(build_grid(&spec, 1.0 / 16.0, &Window::centered(2, 6.0)).unwrap());
    let res = solve_ground_state(&g, 2.0, &SolverOptions { tol_residual: 1e-8, ..Default::default() }).unwrap();
    for r in [1.0, 2.0, 3.0] {
        for d in [0.1, 0.5, 0.9] {
            let c = check_caccioppoli(&res.u, res.lambda, r, d, 2.0).unwrap();
            assert!(c.holds, "R = {r}, delta = {d}: {} > {}", c.lhs, c.rhs);
        }
    }
    let tails = gradient_decay_profile(&res.u, 2.0, &[0.5, 1.0, 2.0, 3.0]).unwrap();
    assert!(tails.windows(2).all(|w| w[1].1 <= w[0].1));
    assert!(check_caccioppoli(&res.u, res.lambda, 1.0, 1.5, 2.0).is_err());
}

#[test]
fn gap_certificate_labels() {
    let settings = GapSettings { radii: vec![3.0], windows: vec![8.0], piece_window: 8.0, ..Default::default() };
    let slab = DomainSpec::slab_with_ball(0.5, 2.4).unwrap();
    let rep = gap_certificate(&slab, 1, 2.0, 1.0 / 16.0, &settings).unwrap();
    assert_eq!(rep.verdict, Verdict::Applies, "{} vs {}", rep.upper_bound, rep.ep_estimate);
    assert!(gap_certificate(&slab, 0, 2.0, 1.0 / 16.0, &settings).is_err());
}
