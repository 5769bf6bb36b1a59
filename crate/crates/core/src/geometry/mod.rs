//! Domains, centre curves and their masked lattice discretisations.

pub mod curve;
pub mod domain;
pub mod grid;
pub mod whip;

pub use curve::CurveSpec;
pub use domain::{whip_translations, DomainSpec, Window, WHIP_HALFWIDTH};
pub use grid::{build_grid, Element, Grid, OUTSIDE};
pub use whip::{whip_layout, whip_piece, WhipCalibration, WhipSegment};

/// Curvature `kappa_n(s)` of the arc-length parametrised centre curve.
pub fn waveguide_curvature(curve: &CurveSpec, s: f64) -> f64 {
    curve.curvature(s)
}
