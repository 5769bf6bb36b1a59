//! Sparse symmetric matrices on grid nodes and an envelope Cholesky solver.

use crate::error::{PlapError, Result};
use crate::geometry::{Grid, OUTSIDE};

/// Symmetric matrix in compressed sparse row form (both triangles stored).
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        dot(x, &y)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }
}

/// Weighted P1 stiffness `sum_T w_T |T| grad u . grad v` plus a diagonal term.
///
/// With unit weights and no diagonal this is the Dirichlet Laplacian, which on
/// the split-square mesh coincides with the five-point stencil.
pub fn assemble_stiffness(grid: &Grid, weights: Option<&[f64]>, diagonal: Option<&[f64]>) -> CsrMatrix {
    let n = grid.len();
    let len = grid.chain_len();
    let base = grid.element_measure() / (grid.spacing() * grid.spacing());
    let mut trip = Vec::with_capacity(grid.elements().len() * 4 * (len - 1) + n);
    for (t, e) in grid.elements().iter().enumerate() {
        let c = base * weights.map_or(1.0, |w| w[t]);
        for k in 0..len - 1 {
            let (a, b) = (e.chain[k], e.chain[k + 1]);
            if a != OUTSIDE {
                trip.push((a as usize, a as usize, c));
            }
            if b != OUTSIDE {
                trip.push((b as usize, b as usize, c));
            }
            if a != OUTSIDE && b != OUTSIDE {
                trip.push((a as usize, b as usize, -c));
                trip.push((b as usize, a as usize, -c));
            }
        }
    }
    if let Some(d) = diagonal {
        for (i, &v) in d.iter().enumerate() {
            trip.push((i, i, v));
        }
    }
    CsrMatrix::from_triplets(n, trip)
}

/// Lower-triangular Cholesky factor stored row-wise over each row's envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            let f = a.row(i).map(|(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i);
            first[i] = f;
            start[i + 1] = start[i] + (i - f + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    data[start[i] + (j - first[i])] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[start[i] + (j - fi)];
                if k0 < j {
                    let ri = &data[start[i] + (k0 - fi)..start[i] + (j - fi)];
                    let rj = &data[start[j] + (k0 - fj)..start[j] + (j - fj)];
                    s -= dot(ri, rj);
                }
                if j < i {
                    let djj = data[start[j] + (j - fj)];
                    data[start[i] + (j - fi)] = s / djj;
                } else {
                    if !(s > 0.0) {
                        return Err(PlapError::EigenIterationFailed(format!(
                            "matrix is not positive definite at row {i} (pivot {s})"
                        )));
                    }
                    data[start[i] + (i - fi)] = s.sqrt();
                }
            }
        }
        Ok(Self { n, first, start, data })
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s = x[i] - dot(&row[..i - fi], &x[fi..i]);
            x[i] = s / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = x[i] / row[i - fi];
            x[i] = xi;
            for (k, l) in row[..i - fi].iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
    }

    /// Stored entries of the factor.
    pub fn nnz(&self) -> usize {
        self.data.len()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
