//! Discrete variational eigenvalue toolkit for the Dirichlet p-Laplacian.
//!
//! Domains are described declaratively ([`DomainSpec`]), truncated to a
//! window and discretised by P1 elements on a masked Cartesian lattice
//! ([`Grid`]). On top of that sit ground-state and perturbed solvers,
//! disjoint-support minmax upper bounds, a `p = 2` linear cross-check, and
//! the decay and threshold analysis in [`spectral`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod spectral;

pub use eigen::{
    courant_fischer_p2, disjoint_pieces, ls_upper_bound, rayleigh, residual_norm, solve_ground_state,
    solve_ground_state_from, solve_perturbed, sweep_converged, sweep_perturbed, EigenResult, LsBound, SolverOptions,
};
pub use energy::{
    dirichlet_energy_p, elementary_inequality_constant, energy_gradient, lp_norm_p, weighted_energy, EpsSchedule,
    Field, PotentialSpec,
};
pub use error::{PlapError, Result};
pub use geometry::{
    build_grid, waveguide_curvature, whip_layout, whip_piece, CurveSpec, DomainSpec, Grid, WhipCalibration,
    WhipSegment, Window,
};
pub use spectral::{
    check_caccioppoli, estimate_ep, fit_decay, gap_certificate, gradient_decay_profile, h_function, pi_p,
    solve_h_inverse, theoretical_decay, DecayFit, DecayModel, EpEstimate, GapReport, GapSettings, Verdict,
};
