use serde::{Deserialize, Serialize};

use super::check_p;
use crate::energy::{at, chain_sq, Field};
use crate::error::{invalid, PlapError, Result};

/// Default noise floor for radial profiles.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Least-squares fit of `log max|u|` against the radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub c: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub bins: usize,
}

/// `(r, max |u|)` over radial bins `[r, r + 2h)` starting at zero.
pub fn radial_profile(u: &Field) -> Vec<(f64, f64)> {
    let grid = u.grid();
    let dr = 2.0 * grid.spacing();
    let mut bins: Vec<f64> = Vec::new();
    for (i, v) in u.values().iter().enumerate() {
        let b = (grid.radius(i) / dr).floor() as usize;
        if b >= bins.len() {
            bins.resize(b + 1, f64::NAN);
        }
        let m = v.abs();
        if bins[b].is_nan() || m > bins[b] {
            bins[b] = m;
        }
    }
    bins.into_iter().enumerate().filter(|(_, m)| !m.is_nan()).map(|(b, m)| (b as f64 * dr, m)).collect()
}

/// Fits over every bin above `floor`.
pub fn fit_decay(u: &Field, floor: f64) -> Result<DecayFit> {
    fit_decay_from(u, floor, 0.0)
}

/// Fits over the bins starting at radius `r_min` or beyond and above `floor`.
pub fn fit_decay_from(u: &Field, floor: f64, r_min: f64) -> Result<DecayFit> {
    if !(floor > 0.0) {
        return Err(invalid(format!("floor must be positive, got {floor}")));
    }
    let pts: Vec<(f64, f64)> =
        radial_profile(u).into_iter().filter(|&(r, m)| r >= r_min && m > floor).map(|(r, m)| (r, m.ln())).collect();
    if pts.len() < 4 {
        return Err(PlapError::InsufficientDecayData { bins: pts.len() });
    }
    let (slope, intercept) = least_squares(&pts);
    Ok(DecayFit { alpha: -slope, c: intercept.exp(), r_min: pts[0].0, r_max: pts[pts.len() - 1].0, bins: pts.len() })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Slope of `log y` against `x` over the points with `y > 0`.
pub fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    (logs.len() >= 2).then(|| least_squares(&logs).0)
}

/// Both sides of the cut-off energy inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caccioppoli {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn cutoff(x: [f64; 2], r: f64) -> f64 {
    (x[0].hypot(x[1]) - r).clamp(0.0, 1.0)
}

/// Evaluates `(1 - (p-1) delta) int |grad u|^p eta^p` against
/// `delta^{1-p} int |grad eta|^p |u|^p + lambda int |u|^p eta^p` with
/// `eta = min((|x| - R)_+, 1)` interpolated at the nodes. Products with `eta`
/// are integrated by the vertex rule, which reduces to the lumped mass.
pub fn check_caccioppoli(u: &Field, lambda: f64, r: f64, delta: f64, p: f64) -> Result<Caccioppoli> {
    check_p(p)?;
    if !(delta > 0.0 && delta < 1.0 / (p - 1.0)) {
        return Err(invalid(format!("delta must lie in (0, 1/(p-1)), got {delta}")));
    }
    let grid = u.grid();
    let h = grid.spacing();
    let len = grid.chain_len();
    let vals = u.values();
    let measure = grid.element_measure();
    let (mut grad_u, mut grad_eta) = (0.0, 0.0);
    for e in grid.elements() {
        let verts = grid.element_vertices(e);
        let eta: Vec<f64> = verts[..len].iter().map(|&x| cutoff(x, r)).collect();
        let mean = |f: &dyn Fn(usize) -> f64| (0..len).map(f).sum::<f64>() / len as f64;
        let eta_p = mean(&|k| eta[k].powf(p));
        let u_p = mean(&|k| at(vals, e.chain[k]).abs().powf(p));
        let gu = (chain_sq(vals, &e.chain, len) / (h * h)).sqrt();
        let ge = ((0..len - 1).map(|k| (eta[k + 1] - eta[k]).powi(2)).sum::<f64>() / (h * h)).sqrt();
        grad_u += measure * gu.powf(p) * eta_p;
        grad_eta += measure * ge.powf(p) * u_p;
    }
    let mass = grid.node_mass();
    let potential: f64 =
        (0..vals.len()).map(|i| mass * vals[i].abs().powf(p) * cutoff(grid.coords(i), r).powf(p)).sum();
    let lhs = (1.0 - (p - 1.0) * delta) * grad_u;
    let rhs = delta.powf(1.0 - p) * grad_eta + lambda * potential;
    Ok(Caccioppoli { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-8) })
}

/// `(R, ||grad u||_{L^p} outside B_{R+1})` for each radius, the exterior
/// being the elements whose centroid lies beyond `R + 1`.
pub fn gradient_decay_profile(u: &Field, p: f64, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_p(p)?;
    let grid = u.grid();
    let h = grid.spacing();
    let len = grid.chain_len();
    let measure = grid.element_measure();
    let mut contrib: Vec<(f64, f64)> = grid
        .elements()
        .iter()
        .map(|e| {
            let g2 = chain_sq(u.values(), &e.chain, len) / (h * h);
            (e.centroid[0].hypot(e.centroid[1]), measure * g2.powf(0.5 * p))
        })
        .collect();
    // accumulate from the outside in so every tail sums the same terms in the same order
    contrib.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let mut out = vec![(0.0, 0.0); radii.len()];
    let (mut acc, mut k) = (0.0, 0);
    for i in order {
        let cut = radii[i] + 1.0;
        while k < contrib.len() && contrib[k].0 > cut {
            acc += contrib[k].1;
            k += 1;
        }
        out[i] = (radii[i], acc.powf(1.0 / p));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec, Window};
    use std::sync::Arc;

    fn disc(h: f64) -> Arc<crate::geometry::Grid> {
        let spec = DomainSpec::ball(vec![0.0, 0.0], 6.0).unwrap();
        Arc::new(build_grid(&spec, h, &Window::centered(2, 6.0)).unwrap())
    }

    #[test]
    fn exponential_rates_recovered() {
        let g = disc(1.0 / 16.0);
        for rate in [0.5, 1.0, 2.0, 4.0] {
            let u = Field::from_fn(Arc::clone(&g), |x| (-rate * x[0].hypot(x[1])).exp()).unwrap();
            let fit = fit_decay(&u, DEFAULT_FLOOR).unwrap();
            assert!((fit.alpha / rate - 1.0).abs() < 0.01, "{rate}: {}", fit.alpha);
        }
    }

    #[test]
    fn constant_field_has_no_decay() {
        let g = disc(1.0 / 8.0);
        let u = Field::from_fn(g, |_| 1.0).unwrap();
        assert!(fit_decay(&u, DEFAULT_FLOOR).unwrap().alpha.abs() < 1e-12);
    }

    #[test]
    fn too_few_bins() {
        let g = disc(1.0 / 8.0);
        let u = Field::from_fn(g, |x| if x[0].hypot(x[1]) < 0.3 { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(fit_decay(&u, DEFAULT_FLOOR), Err(PlapError::InsufficientDecayData { .. })));
    }

    #[test]
    fn zero_field_passes_trivially() {
        let g = disc(1.0 / 8.0);
        let u = Field::zeros(g);
        let c = check_caccioppoli(&u, 1.0, 2.0, 0.1, 2.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.holds);
        let prof = gradient_decay_profile(&u, 2.0, &[1.0, 2.0]).unwrap();
        assert!(prof.iter().all(|t| t.1 == 0.0));
    }

    #[test]
    fn tails_shrink_with_radius() {
        let g = disc(1.0 / 8.0);
        let u = Field::from_fn(g, |x| (-x[0].hypot(x[1])).exp()).unwrap();
        let prof = gradient_decay_profile(&u, 3.0, &[3.0, 0.0, 1.0, 2.0]).unwrap();
        assert!(prof[1].1 >= prof[2].1 && prof[2].1 >= prof[3].1 && prof[3].1 >= prof[0].1);
    }
}
