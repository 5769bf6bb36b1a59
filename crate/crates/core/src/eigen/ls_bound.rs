//! Minmax upper bounds from eigenfunctions with pairwise disjoint supports.
//!
//! If `u_1, ..., u_k` have disjoint supports and unit `L^p` norm, every
//! combination `sum a_i u_i` with `sum |a_i|^p = 1` has quotient
//! `sum |a_i|^p lambda_i <= max lambda_i`, and the span carries a set of
//! genus `k`. The largest piece eigenvalue therefore bounds the `k`-th level.

use std::sync::Arc;

use rayon::prelude::*;

use super::{solve_ground_state, EigenResult, SolverOptions};
use crate::error::{invalid, PlapError, Result};
use crate::geometry::{build_grid, whip_translations, DomainSpec, Grid, Window};

/// Upper bound together with the per-piece ground states.
#[derive(Clone, Debug)]
pub struct LsBound {
    pub bound: f64,
    pub pieces: Vec<EigenResult>,
}

impl LsBound {
    pub fn converged(&self) -> bool {
        self.pieces.iter().all(|r| r.converged)
    }
}

/// `max_i lambda_1(piece_i)` over grids with pairwise disjoint supports.
pub fn ls_upper_bound(subgrids: &[Arc<Grid>], p: f64, opts: &SolverOptions) -> Result<LsBound> {
    if subgrids.is_empty() {
        return Err(invalid("need at least one subdomain"));
    }
    for i in 0..subgrids.len() {
        for j in i + 1..subgrids.len() {
            if !subgrids[i].disjoint_from(&subgrids[j]) {
                return Err(PlapError::DisjointnessViolation { first: i, second: j });
            }
        }
    }
    let pieces: Vec<EigenResult> =
        subgrids.par_iter().map(|g| solve_ground_state(g, p, opts)).collect::<Result<_>>()?;
    let bound = pieces.iter().map(|r| r.lambda).fold(f64::NEG_INFINITY, f64::max);
    Ok(LsBound { bound, pieces })
}

/// Splits `spec` into `k` disjoint subdomains and grids each of them.
///
/// Whips are cut into their first `k` bump pieces, balls and slabs with a
/// core ball into `k` touching balls along the first axis, and everything
/// else into `k` equal slices of `window` along the first axis.
pub fn disjoint_pieces(spec: &DomainSpec, k: usize, h: f64, window: &Window) -> Result<Vec<Arc<Grid>>> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let specs = piece_specs(spec, k, window)?;
    specs
        .par_iter()
        .map(|s| {
            let win = s.bounding_box().intersect(window);
            build_grid(s, h, &win).map(Arc::new)
        })
        .collect()
}

fn piece_specs(spec: &DomainSpec, k: usize, window: &Window) -> Result<Vec<DomainSpec>> {
    let inf = f64::INFINITY;
    let balls = |center: &[f64], radius: f64| -> Result<Vec<DomainSpec>> {
        let r = radius / k as f64;
        (0..k)
            .map(|i| {
                let mut c = center.to_vec();
                c[0] += -radius + r * (2 * i + 1) as f64;
                DomainSpec::ball(c, r)
            })
            .collect()
    };
    match spec {
        DomainSpec::Whip { lengths } => {
            if k > lengths.len() {
                return Err(invalid(format!("whip has {} pieces, asked for {k}", lengths.len())));
            }
            let taus = whip_translations(lengths);
            (0..k)
                .map(|n| {
                    let cut = DomainSpec::rect(vec![taus[n] - lengths[n], -inf], vec![taus[n] + lengths[n], inf])?;
                    DomainSpec::intersection(vec![spec.clone(), cut])
                })
                .collect()
        }
        DomainSpec::Ball { center, radius } if k > 1 => balls(center, *radius),
        DomainSpec::SlabWithBall { ball_radius, .. } if k > 1 => balls(&[0.0, 0.0], *ball_radius),
        _ if k == 1 => Ok(vec![spec.clone()]),
        _ => {
            let region = window.intersect(&spec.bounding_box());
            if !region.is_bounded() {
                return Err(invalid("window must bound the domain to slice it"));
            }
            let (a, b) = (region.lo[0], region.hi[0]);
            let step = (b - a) / k as f64;
            let d = spec.dim();
            (0..k)
                .map(|i| {
                    let mut lo = vec![-inf; d];
                    let mut hi = vec![inf; d];
                    lo[0] = a + step * i as f64;
                    hi[0] = a + step * (i + 1) as f64;
                    DomainSpec::intersection(vec![spec.clone(), DomainSpec::rect(lo, hi)?])
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions { tol_residual: 1e-6, restarts: 1, ..Default::default() }
    }

    #[test]
    fn single_piece_is_its_ground_state() {
        let spec = DomainSpec::interval(0.0, 1.0).unwrap();
        let g = Arc::new(build_grid(&spec, 1.0 / 64.0, &Window::new(vec![0.0], vec![1.0])).unwrap());
        let lb = ls_upper_bound(&[Arc::clone(&g)], 2.0, &opts()).unwrap();
        let gs = solve_ground_state(&g, 2.0, &opts()).unwrap();
        assert!((lb.bound - gs.lambda).abs() < 1e-9 * gs.lambda);
    }

    #[test]
    fn bound_is_the_largest_piece() {
        // intervals of length 1/2 and 1/3 in units where lambda = (pi/len)^2
        let h = 1.0 / 96.0;
        let w = Window::new(vec![-1.0], vec![2.0]);
        let a = Arc::new(build_grid(&DomainSpec::interval(0.0, 0.5).unwrap(), h, &w).unwrap());
        let b = Arc::new(build_grid(&DomainSpec::interval(0.5, 5.0 / 6.0).unwrap(), h, &w).unwrap());
        let lb = ls_upper_bound(&[a, b], 2.0, &opts()).unwrap();
        let small = lb.pieces.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
        assert!(lb.bound > small);
        assert!((lb.bound / (9.0 * std::f64::consts::PI.powi(2)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let h = 1.0 / 16.0;
        let w = Window::new(vec![-1.0], vec![2.0]);
        let a = Arc::new(build_grid(&DomainSpec::interval(0.0, 0.6).unwrap(), h, &w).unwrap());
        let b = Arc::new(build_grid(&DomainSpec::interval(0.5, 1.0).unwrap(), h, &w).unwrap());
        let err = ls_upper_bound(&[a, b], 2.0, &opts()).unwrap_err();
        assert_eq!(err, PlapError::DisjointnessViolation { first: 0, second: 1 });
    }

    #[test]
    fn sliced_pieces_are_disjoint() {
        let spec = DomainSpec::strip(0.5).unwrap();
        let pieces = disjoint_pieces(&spec, 3, 1.0 / 8.0, &Window::centered(2, 3.0)).unwrap();
        assert_eq!(pieces.len(), 3);
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(pieces[i].disjoint_from(&pieces[j]));
            }
        }
    }
}
