//! Masked Cartesian grids with homogeneous Dirichlet conditions.
//!
//! Nodes sit on the lattice `h Z^d`. A node is active only when the support of
//! its P1 hat function (the six triangles around it, or the two intervals in
//! 1D) lies in the closure of the domain, so every discrete field is a
//! genuine `W^{1,p}_0` function and discrete eigenvalues bound the continuum
//! ones from above.
//!
//! In 2D every lattice square is split along its `(0,0)-(1,1)` diagonal.

use std::collections::VecDeque;

use super::domain::{DomainSpec, Window};
use crate::error::{invalid, PlapError, Result};

/// Sentinel for a masked-out (Dirichlet) vertex.
pub const OUTSIDE: u32 = u32::MAX;

/// Patch neighbours of a node in the split-square triangulation, in angular order.
const PATCH_2D: [[i64; 2]; 6] = [[1, 0], [1, 1], [0, 1], [-1, 0], [-1, -1], [0, -1]];

/// A P1 element stored as a chain of `d + 1` vertices.
///
/// The squared gradient is `sum_k (u[chain[k+1]] - u[chain[k]])^2 / h^2`: in
/// 1D the chain is the two endpoints, in 2D the right-angle vertex sits in the
/// middle of the chain so the two legs give the two axis-aligned differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub chain: [u32; 3],
    pub centroid: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    h: f64,
    /// Lattice index of the first stored lattice node along each axis.
    offset: [i64; 2],
    /// Number of stored lattice nodes along each axis.
    dims: [usize; 2],
    mask: Vec<bool>,
    lattice_to_node: Vec<u32>,
    nodes: Vec<[i64; 2]>,
    elements: Vec<Element>,
}

impl Grid {
    /// Lattice nodes of `h Z^d` inside `window`, classified against `spec`.
    pub fn build(spec: &DomainSpec, h: f64, window: &Window) -> Result<Grid> {
        spec.validate()?;
        let dim = spec.dim();
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {h}")));
        }
        if window.dim() != dim || window.hi.len() != dim {
            return Err(invalid(format!("window dimension {} does not match domain dimension {dim}", window.dim())));
        }
        if !window.is_bounded() {
            return Err(invalid("grid window must be bounded"));
        }
        let region = window.intersect(&spec.bounding_box());
        let mut offset = [0i64; 2];
        let mut dims = [1usize; 2];
        for ax in 0..dim {
            let lo = (region.lo[ax] / h - 1e-9).ceil() as i64;
            let hi = (region.hi[ax] / h + 1e-9).floor() as i64;
            if hi - lo < 2 {
                return Err(PlapError::EmptyGrid);
            }
            offset[ax] = lo;
            dims[ax] = (hi - lo + 1) as usize;
        }
        let total = dims[0] * dims[1];
        let coord = |k: [i64; 2]| -> [f64; 2] { [k[0] as f64 * h, k[1] as f64 * h] };
        let point = |c: [f64; 2]| -> Vec<f64> { c[..dim].to_vec() };

        let mut level = vec![0.0; total];
        for ix in 0..dims[0] {
            for iy in 0..dims[1] {
                let k = [offset[0] + ix as i64, offset[1] + iy as i64];
                level[ix * dims[1] + iy] = spec.level(&point(coord(k)));
            }
        }
        let inside = |ix: i64, iy: i64| -> Option<f64> {
            if ix < 0 || iy < 0 || ix >= dims[0] as i64 || iy >= dims[1] as i64 {
                None
            } else {
                Some(level[ix as usize * dims[1] + iy as usize])
            }
        };
        let closed = |lv: f64| lv <= super::domain::CLOSURE_TOL;

        let mut mask = vec![false; total];
        for ix in 0..dims[0] as i64 {
            for iy in 0..dims[1] as i64 {
                let lv = inside(ix, iy).unwrap();
                if !(lv < 0.0) {
                    continue;
                }
                let k = [offset[0] + ix, offset[1] + iy];
                let ok = if dim == 1 {
                    [-1i64, 1].iter().all(|&s| inside(ix + s, iy).is_some_and(closed))
                        && [-1.0, 1.0].iter().all(|&s| {
                            let c = coord(k);
                            spec.contains_closed(&[c[0] + 0.5 * s * h])
                        })
                } else {
                    let vertices = PATCH_2D.iter().all(|o| inside(ix + o[0], iy + o[1]).is_some_and(closed));
                    vertices
                        && (0..6).all(|e| {
                            let a = PATCH_2D[e];
                            let b = PATCH_2D[(e + 1) % 6];
                            let c = coord(k);
                            let mid = [c[0] + 0.5 * (a[0] + b[0]) as f64 * h, c[1] + 0.5 * (a[1] + b[1]) as f64 * h];
                            spec.contains_closed(&mid)
                        })
                };
                mask[ix as usize * dims[1] + iy as usize] = ok;
            }
        }
        Self::from_mask(dim, h, offset, dims, mask)
    }

    fn from_mask(dim: usize, h: f64, offset: [i64; 2], dims: [usize; 2], mask: Vec<bool>) -> Result<Grid> {
        let total = dims[0] * dims[1];
        let mut lattice_to_node = vec![OUTSIDE; total];
        let mut nodes = Vec::new();
        // enumerate with the shorter axis fastest so the stiffness profile stays narrow
        let (outer, inner) = if dims[0] >= dims[1] { (0, 1) } else { (1, 0) };
        for a in 0..dims[outer] {
            for b in 0..dims[inner] {
                let mut idx = [0usize; 2];
                idx[outer] = a;
                idx[inner] = b;
                let lin = idx[0] * dims[1] + idx[1];
                if mask[lin] {
                    lattice_to_node[lin] = nodes.len() as u32;
                    nodes.push([offset[0] + idx[0] as i64, offset[1] + idx[1] as i64]);
                }
            }
        }
        if nodes.is_empty() {
            return Err(PlapError::EmptyGrid);
        }
        let node_at = |ix: i64, iy: i64| -> u32 {
            if ix < 0 || iy < 0 || ix >= dims[0] as i64 || iy >= dims[1] as i64 {
                OUTSIDE
            } else {
                lattice_to_node[ix as usize * dims[1] + iy as usize]
            }
        };
        let mut elements = Vec::new();
        if dim == 1 {
            for ix in -1..dims[0] as i64 {
                let a = node_at(ix, 0);
                let b = node_at(ix + 1, 0);
                if a != OUTSIDE || b != OUTSIDE {
                    let x = (offset[0] + ix) as f64 * h + 0.5 * h;
                    elements.push(Element { chain: [a, b, OUTSIDE], centroid: [x, 0.0] });
                }
            }
        } else {
            for ix in -1..dims[0] as i64 {
                for iy in -1..dims[1] as i64 {
                    let p00 = node_at(ix, iy);
                    let p10 = node_at(ix + 1, iy);
                    let p01 = node_at(ix, iy + 1);
                    let p11 = node_at(ix + 1, iy + 1);
                    let x0 = (offset[0] + ix) as f64 * h;
                    let y0 = (offset[1] + iy) as f64 * h;
                    if p00 != OUTSIDE || p10 != OUTSIDE || p11 != OUTSIDE {
                        elements.push(Element { chain: [p00, p10, p11], centroid: [x0 + 2.0 * h / 3.0, y0 + h / 3.0] });
                    }
                    if p00 != OUTSIDE || p01 != OUTSIDE || p11 != OUTSIDE {
                        elements.push(Element { chain: [p00, p01, p11], centroid: [x0 + h / 3.0, y0 + 2.0 * h / 3.0] });
                    }
                }
            }
        }
        Ok(Grid { dim, h, offset, dims, mask, lattice_to_node, nodes, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Number of active (interior) nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lumped mass of a node, `h^d`.
    pub fn node_mass(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Measure of one element.
    pub fn element_measure(&self) -> f64 {
        if self.dim == 1 {
            self.h
        } else {
            0.5 * self.h * self.h
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Number of vertices in each element chain.
    pub fn chain_len(&self) -> usize {
        self.dim + 1
    }

    pub fn lattice_index(&self, node: usize) -> [i64; 2] {
        self.nodes[node]
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let k = self.nodes[node];
        [k[0] as f64 * self.h, k[1] as f64 * self.h]
    }

    /// Euclidean norm of the node position.
    pub fn radius(&self, node: usize) -> f64 {
        let c = self.coords(node);
        c[0].hypot(c[1])
    }

    /// Active node at lattice index `k`, if any.
    pub fn node_at(&self, k: [i64; 2]) -> Option<usize> {
        let ix = k[0] - self.offset[0];
        let iy = k[1] - self.offset[1];
        if ix < 0 || iy < 0 || ix >= self.dims[0] as i64 || iy >= self.dims[1] as i64 {
            return None;
        }
        let v = self.lattice_to_node[ix as usize * self.dims[1] + iy as usize];
        (v != OUTSIDE).then_some(v as usize)
    }

    pub fn origin(&self) -> [f64; 2] {
        [self.offset[0] as f64 * self.h, self.offset[1] as f64 * self.h]
    }

    pub fn lattice_dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Lattice indices of all active nodes, in node order.
    pub fn active_lattice(&self) -> &[[i64; 2]] {
        &self.nodes
    }

    /// True when every active node of `self` is active in `other`.
    pub fn mask_subset_of(&self, other: &Grid) -> bool {
        self.h == other.h && self.nodes.iter().all(|&k| other.node_at(k).is_some())
    }

    /// True when no discrete field on `self` overlaps in support with one on
    /// `other`: no active node of `other` equals or neighbours an active node of `self`.
    pub fn disjoint_from(&self, other: &Grid) -> bool {
        if self.h != other.h || self.dim != other.dim {
            return false;
        }
        let offsets: &[[i64; 2]] = if self.dim == 1 { &[[1, 0], [-1, 0]] } else { &PATCH_2D };
        self.nodes.iter().all(|&k| {
            other.node_at(k).is_none() && offsets.iter().all(|o| other.node_at([k[0] + o[0], k[1] + o[1]]).is_none())
        })
    }

    /// Vertex coordinates of an element, in chain order (the last entry is
    /// unused in 1D).
    pub fn element_vertices(&self, e: &Element) -> [[f64; 2]; 3] {
        let h = self.h;
        if self.dim == 1 {
            let x = e.centroid[0];
            return [[x - 0.5 * h, 0.0], [x + 0.5 * h, 0.0], [x + 0.5 * h, 0.0]];
        }
        let x0 = (e.centroid[0] / h).floor() * h;
        let y0 = (e.centroid[1] / h).floor() * h;
        if e.centroid[0] - x0 > e.centroid[1] - y0 {
            [[x0, y0], [x0 + h, y0], [x0 + h, y0 + h]]
        } else {
            [[x0, y0], [x0, y0 + h], [x0 + h, y0 + h]]
        }
    }

    /// Lattice distance (in units of length) from each active node to the nearest
    /// masked-out node, computed by breadth-first search over axis neighbours.
    pub fn boundary_distance(&self) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        let steps: &[[i64; 2]] = if self.dim == 1 { &[[1, 0], [-1, 0]] } else { &[[1, 0], [-1, 0], [0, 1], [0, -1]] };
        for (i, k) in self.nodes.iter().enumerate() {
            if steps.iter().any(|s| self.node_at([k[0] + s[0], k[1] + s[1]]).is_none()) {
                dist[i] = 1;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let k = self.nodes[i];
            for s in steps {
                if let Some(j) = self.node_at([k[0] + s[0], k[1] + s[1]]) {
                    if dist[j] == usize::MAX {
                        dist[j] = dist[i] + 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        dist.into_iter().map(|d| d as f64 * self.h).collect()
    }
}

/// Builds the grid of `spec` restricted to `window` at spacing `h`.
pub fn build_grid(spec: &DomainSpec, h: f64, window: &Window) -> Result<Grid> {
    Grid::build(spec, h, window)
}
