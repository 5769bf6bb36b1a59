//! Self-check suite run by `plap check`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use plap_core::spectral::{h_domain_end, h_function, solve_h_inverse, theoretical_decay};
use plap_core::{
    build_grid, dirichlet_energy_p, elementary_inequality_constant, energy_gradient, rayleigh, solve_ground_state,
    DomainSpec, Field, Grid, SolverOptions, Window,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn item(name: &str, passed: bool, detail: String) -> CheckItem {
    CheckItem { name: name.to_string(), passed, detail }
}

const EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, 4.7];

/// Runs every invariant with randomness drawn from `seed`.
pub fn run_checks(seed: u64) -> Vec<CheckItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        elementary_inequality(&mut rng, 100_000),
        h_round_trip(&mut rng, 100),
        h_monotone(),
        gradient_consistency(&mut rng),
        homogeneity(&mut rng),
        scaling_law(&mut rng),
        domain_monotonicity(),
        alpha_monotone(),
    ]
}

fn random_vec2(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    [scale * rng.random_range(-1.0..1.0), scale * rng.random_range(-1.0..1.0)]
}

/// `||a+b|^p - |a|^p| <= eps |a|^p + c_p eps^{1-p} |b|^p` on random samples.
pub fn elementary_inequality(rng: &mut ChaCha8Rng, samples: usize) -> CheckItem {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0usize;
    for i in 0..samples {
        let p = EXPONENTS[i % EXPONENTS.len()];
        let cp = elementary_inequality_constant(p).expect("valid exponent");
        let a = random_vec2(rng);
        let b = random_vec2(rng);
        let eps: f64 = rng.random_range(1e-3..1.0);
        let na = a[0].hypot(a[1]);
        let nab = (a[0] + b[0]).hypot(a[1] + b[1]);
        let nb = b[0].hypot(b[1]);
        let lhs = (nab.powf(p) - na.powf(p)).abs();
        let rhs = eps * na.powf(p) + cp * eps.powf(1.0 - p) * nb.powf(p);
        let ratio = lhs / rhs;
        worst = worst.max(ratio);
        if lhs > rhs * (1.0 + 1e-12) {
            failures += 1;
        }
    }
    item(
        "elementary_inequality",
        failures == 0,
        format!("{samples} samples, {failures} violations, worst lhs/rhs {worst:.6}"),
    )
}

pub fn h_round_trip(rng: &mut ChaCha8Rng, targets: usize) -> CheckItem {
    let mut worst = 0.0f64;
    for i in 0..targets {
        let p = EXPONENTS[i % EXPONENTS.len()];
        let x: f64 = rng.random_range(0.01..0.99);
        let t = solve_h_inverse(x, p).expect("target in range");
        worst = worst.max((h_function(t, p).expect("t in domain") - x).abs());
    }
    item("h_round_trip", worst < 1e-10, format!("{targets} targets, max error {worst:e}"))
}

pub fn h_monotone() -> CheckItem {
    let mut ok = true;
    for p in EXPONENTS {
        let end = h_domain_end(p);
        let n = 10_000;
        let vals: Vec<f64> = (0..=n).map(|i| h_function(end * i as f64 / n as f64, p).unwrap()).collect();
        ok &= vals.windows(2).all(|w| w[1] < w[0]);
        ok &= vals[0] == 1.0 && vals[n].abs() < 1e-12;
    }
    item("h_decreasing_onto_unit_interval", ok, "sampled 10^4 points per exponent".into())
}

fn test_grid() -> Arc<Grid> {
    let spec = DomainSpec::ball(vec![0.0, 0.0], 1.0).expect("valid ball");
    Arc::new(build_grid(&spec, 1.0 / 8.0, &Window::centered(2, 1.0)).expect("non-empty grid"))
}

fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Field {
    let vals = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(Arc::clone(grid), vals).expect("finite values")
}

pub fn gradient_consistency(rng: &mut ChaCha8Rng) -> CheckItem {
    let g = test_grid();
    let mut worst = 0.0f64;
    for p in EXPONENTS {
        for _ in 0..5 {
            let u = random_field(&g, rng);
            let v = random_field(&g, rng);
            let grad = energy_gradient(&u, p).unwrap();
            let exact: f64 = grad.values().iter().zip(v.values()).map(|(a, b)| a * b).sum();
            let step = 1e-5;
            let shifted = |s: f64| {
                let vals = u.values().iter().zip(v.values()).map(|(a, b)| a + s * b).collect();
                dirichlet_energy_p(&Field::new(Arc::clone(&g), vals).unwrap(), p).unwrap()
            };
            let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
            worst = worst.max((fd - exact).abs() / exact.abs());
        }
    }
    item("gradient_matches_finite_differences", worst < 1e-5, format!("max relative error {worst:e}"))
}

pub fn homogeneity(rng: &mut ChaCha8Rng) -> CheckItem {
    let g = test_grid();
    let mut worst = 0.0f64;
    for p in EXPONENTS {
        let u = random_field(&g, rng);
        let c: f64 = rng.random_range(-3.0..3.0);
        let e = dirichlet_energy_p(&u, p).unwrap();
        let ec = dirichlet_energy_p(&u.scaled(c), p).unwrap();
        worst = worst.max((ec - c.abs().powf(p) * e).abs() / (c.abs().powf(p) * e));
    }
    item("energy_p_homogeneous", worst < 1e-12, format!("max relative error {worst:e}"))
}

/// Scaling a ball and the spacing by 2 keeps the lattice mask and scales the
/// quotient of every nodal vector by `2^{-p}`.
pub fn scaling_law(rng: &mut ChaCha8Rng) -> CheckItem {
    let h = 1.0 / 16.0;
    let small = build_grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), h, &Window::centered(2, 1.0)).unwrap();
    let large =
        build_grid(&DomainSpec::ball(vec![0.0, 0.0], 2.0).unwrap(), 2.0 * h, &Window::centered(2, 2.0)).unwrap();
    if small.active_lattice() != large.active_lattice() {
        return item("scaling_law", false, "masks differ after scaling".into());
    }
    let (small, large) = (Arc::new(small), Arc::new(large));
    let mut worst = 0.0f64;
    for p in EXPONENTS {
        let vals: Vec<f64> = (0..small.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let a = rayleigh(&Field::new(Arc::clone(&small), vals.clone()).unwrap(), p).unwrap();
        let b = rayleigh(&Field::new(Arc::clone(&large), vals).unwrap(), p).unwrap();
        worst = worst.max((b / a - 2f64.powf(-p)).abs() / 2f64.powf(-p));
    }
    item("scaling_law", worst < 1e-12, format!("max relative error {worst:e}"))
}

pub fn domain_monotonicity() -> CheckItem {
    let h = 1.0 / 16.0;
    let w = Window::centered(2, 2.0);
    let inner = Arc::new(build_grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap(), h, &w).unwrap());
    let outer = Arc::new(build_grid(&DomainSpec::ball(vec![0.2, 0.0], 1.5).unwrap(), h, &w).unwrap());
    let nested = inner.mask_subset_of(&outer);
    let opts = SolverOptions { tol_residual: 1e-6, restarts: 1, ..SolverOptions::default() };
    let mut ok = nested;
    let mut detail = format!("mask nested: {nested}");
    for p in [1.5, 2.0, 3.0] {
        let a = solve_ground_state(&inner, p, &opts).unwrap().lambda;
        let b = solve_ground_state(&outer, p, &opts).unwrap().lambda;
        ok &= a >= b * (1.0 - 1e-8);
        detail.push_str(&format!("; p={p}: {a:.6} >= {b:.6}"));
    }
    item("domain_monotonicity", ok, detail)
}

pub fn alpha_monotone() -> CheckItem {
    let ep = std::f64::consts::PI.powi(2);
    let mut ok = true;
    for p in [1.5, 2.0, 3.0] {
        let alphas: Vec<f64> =
            (1..100).map(|i| theoretical_decay(ep * i as f64 / 100.0, ep, p, 1.0).unwrap().alpha_theory).collect();
        ok &= alphas.windows(2).all(|w| w[1] < w[0]);
    }
    let near = theoretical_decay(ep * (1.0 - 1e-6), ep, 2.0, 0.0).unwrap().alpha_theory;
    ok &= near < 1e-4;
    item("decay_rate_monotone", ok, format!("alpha just below the threshold: {near:e}"))
}
