use std::f64::consts::PI;
use std::sync::Arc;

use plap_core::*;

fn grid(spec: &DomainSpec, h: f64, half: f64) -> Arc<Grid> {
    Arc::new(build_grid(spec, h, &Window::centered(spec.dim(), half)).unwrap())
}

fn tight() -> SolverOptions {
    SolverOptions { tol_residual: 1e-9, ..Default::default() }
}

/// Closed form of the one-dimensional constant.
fn pi_p_exact(p: f64) -> f64 {
    (p - 1.0).powf(1.0 / p) * 2.0 * PI / (p * (PI / p).sin())
}

#[test]
fn interval_ground_state() {
    let g = grid(&DomainSpec::interval(0.0, 1.0).unwrap(), 1.0 / 256.0, 1.0);
    let res = solve_ground_state(&g, 2.0, &tight()).unwrap();
    assert!(res.converged);
    assert!((res.lambda / (PI * PI) - 1.0).abs() < 0.01);
    // positive, normalised, and the quotient agrees with lambda
    assert!(res.u.values().iter().all(|&v| v >= 0.0));
    assert!((lp_norm_p(&res.u, 2.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((rayleigh(&res.u, 2.0).unwrap() - res.lambda).abs() < 1e-10 * res.lambda);
    assert!(residual_norm(&res.u, res.lambda, 2.0).unwrap() <= 1e-9);
}

#[test]
fn one_dimensional_constant_for_p_three() {
    let g = grid(&DomainSpec::interval(-0.5, 0.5).unwrap(), 1.0 / 256.0, 1.0);
    let res = solve_ground_state(&g, 3.0, &tight()).unwrap();
    let expect = pi_p_exact(3.0).powi(3);
    assert!((res.lambda / expect - 1.0).abs() < 0.01, "{} vs {}", res.lambda, expect);
}

#[test]
fn energy_history_never_increases() {
    let g = grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), 1.0 / 16.0, 1.0);
    for p in [1.5, 2.0, 3.0] {
        let res = solve_ground_state(&g, p, &tight()).unwrap();
        assert!(res.energy_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "p = {p}");
        assert!(res.u.values().iter().all(|&v| v >= 0.0));
        assert!((lp_norm_p(&res.u, p).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn rayleigh_is_scale_invariant_and_bounded_below() {
    let g = grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), 1.0 / 16.0, 1.0);
    let lam = solve_ground_state(&g, 2.5, &tight()).unwrap().lambda;
    let u = Field::from_fn(Arc::clone(&g), |x| 1.0 - x[0] * x[0] - 0.5 * x[1]).unwrap();
    let q = rayleigh(&u, 2.5).unwrap();
    assert!((rayleigh(&u.scaled(-3.7), 2.5).unwrap() - q).abs() < 1e-12 * q);
    assert!(q >= lam * (1.0 - 1e-9));
    assert!(matches!(rayleigh(&Field::zeros(Arc::clone(&g)), 2.5), Err(PlapError::ZeroField)));
}

#[test]
fn wrong_lambda_gives_large_residual() {
    let g = grid(&DomainSpec::interval(0.0, 1.0).unwrap(), 1.0 / 128.0, 1.0);
    let res = solve_ground_state(&g, 2.0, &tight()).unwrap();
    assert!(residual_norm(&res.u, 2.0 * res.lambda, 2.0).unwrap() > 1.0);
}

#[test]
fn ball_eigenvalues_scale_with_radius() {
    let h = 1.0 / 32.0;
    let opts = SolverOptions { tol_residual: 1e-7, restarts: 1, ..Default::default() };
    for p in [1.5, 2.0, 3.0] {
        let small = grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), h, 1.0);
        let big = grid(&DomainSpec::ball(vec![0.0, 0.0], 2.0).unwrap(), h, 2.0);
        let a = solve_ground_state(&small, p, &opts).unwrap().lambda;
        let b = solve_ground_state(&big, p, &opts).unwrap().lambda;
        assert!((b / a / 2f64.powf(-p) - 1.0).abs() < 0.04, "p = {p}: {}", b / a);
    }
}

#[test]
fn larger_domain_has_smaller_eigenvalue() {
    let h = 1.0 / 16.0;
    let a = grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), h, 2.0);
    let b = grid(&DomainSpec::rect(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(), h, 2.0);
    assert!(a.mask_subset_of(&b));
    for p in [1.5, 3.0] {
        let la = solve_ground_state(&a, p, &tight()).unwrap().lambda;
        let lb = solve_ground_state(&b, p, &tight()).unwrap().lambda;
        assert!(lb <= la * (1.0 + 1e-9));
    }
}

#[test]
fn quadratic_case_matches_linear_algebra() {
    let specs = [
        (DomainSpec::interval(0.0, 1.0).unwrap(), 1.0 / 128.0),
        (DomainSpec::rect(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 1.0 / 24.0),
        (DomainSpec::ball(vec![0.3, 0.0], 1.0).unwrap(), 1.0 / 16.0),
    ];
    for (spec, h) in specs {
        let g = grid(&spec, h, 2.0);
        let gs = solve_ground_state(&g, 2.0, &SolverOptions { tol_residual: 1e-10, ..Default::default() }).unwrap();
        let cf = courant_fischer_p2(&g, 1).unwrap()[0];
        assert!((gs.lambda / cf - 1.0).abs() < 1e-4, "{} vs {}", gs.lambda, cf);
    }
}

#[test]
fn interval_spectrum_and_square() {
    let g = grid(&DomainSpec::interval(0.0, 1.0).unwrap(), 1.0 / 512.0, 1.0);
    let ev = courant_fischer_p2(&g, 3).unwrap();
    for (j, l) in ev.iter().enumerate() {
        let exact = ((j + 1) as f64 * PI).powi(2);
        assert!((l / exact - 1.0).abs() < 0.005);
    }
    let sq = grid(&DomainSpec::rect(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 1.0 / 64.0, 1.0);
    let ev = courant_fischer_p2(&sq, 3).unwrap();
    assert!((ev[0] / (2.0 * PI * PI) - 1.0).abs() < 0.01);
    // the second level is double
    assert!((ev[1] - ev[2]).abs() < 1e-8 * ev[1]);
    assert!(matches!(courant_fischer_p2(&sq, 0), Err(PlapError::InvalidInput(_))));
}

#[test]
fn perturbation_is_sandwiched() {
    let g = grid(&DomainSpec::interval(-1.0, 1.0).unwrap(), 1.0 / 64.0, 1.0);
    let v = PotentialSpec::power_law(2.0).unwrap();
    let base = solve_ground_state(&g, 2.0, &tight()).unwrap();
    let sweep = sweep_perturbed(&g, 2.0, &v, &[1e-4, 1.0, 1e-2], &tight()).unwrap();
    assert!(sweep_converged(&sweep));
    let lams: Vec<f64> = sweep.iter().map(|r| r.lambda).collect();
    assert!(lams.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
    // lambda <= lambda_eps <= lambda + eps * max V
    for (r, eps) in sweep.iter().zip([1.0, 1e-2, 1e-4]) {
        assert!(r.lambda >= base.lambda * (1.0 - 1e-10));
        assert!(r.lambda <= base.lambda + eps * 1.0 + 1e-10);
    }
    let tiny = solve_perturbed(&g, 2.0, &v, 1e-12, &tight()).unwrap();
    assert!((tiny.lambda - base.lambda).abs() < 1e-8 * base.lambda);
    assert!(sweep_perturbed(&g, 2.0, &v, &[0.1, 0.1], &tight()).is_err());
    assert!(solve_perturbed(&g, 2.0, &v, 0.0, &tight()).is_err());
}

#[test]
fn minmax_bound_dominates_pieces() {
    let h = 1.0 / 16.0;
    let w = Window::centered(2, 4.0);
    let a = Arc::new(build_grid(&DomainSpec::ball(vec![-1.5, 0.0], 1.0).unwrap(), h, &w).unwrap());
    let b = Arc::new(build_grid(&DomainSpec::ball(vec![1.5, 0.0], 0.8).unwrap(), h, &w).unwrap());
    let bound = ls_upper_bound(&[Arc::clone(&a), Arc::clone(&b)], 2.0, &tight()).unwrap();
    let lb = solve_ground_state(&b, 2.0, &tight()).unwrap().lambda;
    assert!((bound.bound - lb).abs() < 1e-8 * lb);
    assert!(bound.converged());
    let c = Arc::new(build_grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), h, &w).unwrap());
    assert!(matches!(
        ls_upper_bound(&[a, c], 2.0, &tight()),
        Err(PlapError::DisjointnessViolation { first: 0, second: 1 })
    ));
}

#[test]
fn solver_inputs_are_validated() {
    let g = grid(&DomainSpec::interval(0.0, 1.0).unwrap(), 1.0 / 16.0, 1.0);
    assert!(matches!(solve_ground_state(&g, 1.0, &tight()), Err(PlapError::InvalidInput(_))));
    let bad = SolverOptions { restarts: 0, ..Default::default() };
    assert!(solve_ground_state(&g, 2.0, &bad).is_err());
}
