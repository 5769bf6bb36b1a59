//! Linear (`p = 2`) spectrum by block inverse subspace iteration.
//!
//! The lumped mass is the scalar `h^d`, so the generalized problem reduces to
//! the stiffness spectrum divided by `h^d`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, PlapError, Result};
use crate::geometry::Grid;
use crate::linalg::{assemble_stiffness, dot, CsrMatrix, EnvelopeCholesky};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 5000;

/// The `k` smallest eigenvalues of the P1 stiffness against the lumped mass, ascending.
pub fn courant_fischer_p2(grid: &Grid, k: usize) -> Result<Vec<f64>> {
    let n = grid.len();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= {n}, got {k}")));
    }
    let stiff = assemble_stiffness(grid, None, None);
    let mass = grid.node_mass();
    let mut vals = if n <= 64 { dense_spectrum(&stiff, k) } else { subspace_iteration(&stiff, k)? };
    vals.iter_mut().for_each(|v| *v /= mass);
    Ok(vals)
}

fn dense_spectrum(a: &CsrMatrix, k: usize) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(k);
    ev
}

fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let norm0 = dot(v, v).sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = dot(v, v).sqrt();
    if norm <= 1e-12 * norm0.max(f64::MIN_POSITIVE) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn subspace_iteration(a: &CsrMatrix, k: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let block = (k + 4).max(2 * k).min(n);
    let chol = EnvelopeCholesky::factor(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut x: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut ax = vec![0.0; n];

    for _ in 0..MAX_SWEEPS {
        // Y = A^{-1} X, deflated against locked vectors
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(x.len());
        for col in &x {
            let mut y = col.clone();
            chol.solve_in_place(&mut y);
            let mut against = locked.clone();
            against.extend(basis.iter().cloned());
            if orthonormalize_against(&mut y, &against) {
                basis.push(y);
            }
        }
        while basis.len() < x.len() {
            let mut y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let mut against = locked.clone();
            against.extend(basis.iter().cloned());
            if orthonormalize_against(&mut y, &against) {
                basis.push(y);
            }
        }
        // Rayleigh-Ritz on span(basis)
        let b = basis.len();
        let abasis: Vec<Vec<f64>> = basis
            .iter()
            .map(|v| {
                let mut out = vec![0.0; n];
                a.mul_vec(v, &mut out);
                out
            })
            .collect();
        let h = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&basis[i], &abasis[j]) + dot(&basis[j], &abasis[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut ritz: Vec<(f64, Vec<f64>)> = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, bv) in basis.iter().enumerate() {
                    let coef = eig.eigenvectors[(r, c)];
                    v.iter_mut().zip(bv).for_each(|(x, y)| *x += coef * y);
                }
                (eig.eigenvalues[c], v)
            })
            .collect();
        // lock leading converged pairs in order
        let mut newly = 0;
        for (theta, v) in &ritz {
            if locked.len() >= k {
                break;
            }
            a.mul_vec(v, &mut ax);
            let res: f64 = ax.iter().zip(v).map(|(p, q)| (p - theta * q).powi(2)).sum::<f64>().sqrt();
            if res <= RESIDUAL_TOL * theta.abs() {
                locked.push(v.clone());
                locked_vals.push(*theta);
                newly += 1;
            } else {
                break;
            }
        }
        if locked.len() >= k {
            let mut vals = locked_vals;
            vals.sort_by(f64::total_cmp);
            vals.truncate(k);
            return Ok(vals);
        }
        ritz.drain(..newly);
        ritz.truncate(block.saturating_sub(locked.len()).max(k - locked.len()));
        x = ritz.into_iter().map(|(_, v)| v).collect();
    }
    Err(PlapError::EigenIterationFailed(format!(
        "subspace iteration locked {} of {k} eigenpairs in {MAX_SWEEPS} sweeps",
        locked.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec, Window};

    #[test]
    fn matches_dense_on_small_square() {
        let spec = DomainSpec::rect(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let g = build_grid(&spec, 1.0 / 10.0, &Window::centered(2, 1.0)).unwrap();
        let a = assemble_stiffness(&g, None, None);
        let dense = dense_spectrum(&a, 4);
        let iter = subspace_iteration(&a, 4).unwrap();
        for (d, i) in dense.iter().zip(&iter) {
            assert!((d - i).abs() < 1e-9 * d, "{d} vs {i}");
        }
    }

    #[test]
    fn rejects_bad_k() {
        let spec = DomainSpec::interval(0.0, 1.0).unwrap();
        let g = build_grid(&spec, 0.25, &Window::new(vec![0.0], vec![1.0])).unwrap();
        assert!(courant_fischer_p2(&g, 0).is_err());
        assert!(courant_fischer_p2(&g, 4).is_err());
        assert_eq!(courant_fischer_p2(&g, 3).unwrap().len(), 3);
    }

    #[test]
    fn interval_closed_form() {
        // 1D P1 with lumped mass: lambda_j = (4/h^2) sin^2(j pi h / 2)
        let h = 1.0 / 128.0;
        let spec = DomainSpec::interval(0.0, 1.0).unwrap();
        let g = build_grid(&spec, h, &Window::new(vec![0.0], vec![1.0])).unwrap();
        let vals = courant_fischer_p2(&g, 3).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let exact = 4.0 / (h * h) * ((j + 1) as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2);
            assert!((v - exact).abs() < 1e-9 * exact);
        }
    }
}
