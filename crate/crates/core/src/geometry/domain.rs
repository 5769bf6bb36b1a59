use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::curve::CurveSpec;
use crate::error::{invalid, Result};

/// Points with `level <= CLOSURE_TOL` count as belonging to the closure.
pub const CLOSURE_TOL: f64 = 1e-12;

/// Axis-aligned box, possibly unbounded along some axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    /// The centred cube `[-half, half]^dim`.
    pub fn centered(dim: usize, half: f64) -> Self {
        Self { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    fn hull(&self, other: &Window) -> Window {
        Window {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }
}

/// Declarative description of an open set in one or two dimensions.
///
/// Every variant evaluates a continuous level function that is negative
/// exactly on the open set and vanishes on its boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval {
        a: f64,
        b: f64,
    },
    /// Open box; infinite bounds give strips and half-planes.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Planar slab `R x (-w, w)` with a ball `B_R(0)` attached.
    SlabWithBall {
        slab_halfwidth: f64,
        ball_radius: f64,
    },
    /// Tubular neighbourhood of a planar curve.
    Waveguide {
        curve: CurveSpec,
        halfwidth: f64,
    },
    /// Half-strip `(-inf, 0) x (-1/2, 1/2)` followed by glued bump pieces of
    /// half-lengths `lengths[n]`, continued by a straight tail.
    Whip {
        lengths: Vec<f64>,
    },
    Union {
        parts: Vec<DomainSpec>,
    },
    Intersection {
        parts: Vec<DomainSpec>,
    },
    /// `inner` with the closed ball `|x| <= radius` removed.
    DifferenceBall {
        inner: std::boxed::Box<DomainSpec>,
        radius: f64,
    },
}

/// Halfwidth of every whip piece.
pub const WHIP_HALFWIDTH: f64 = 0.5;

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::checked(DomainSpec::Interval { a, b })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::checked(DomainSpec::Ball { center, radius })
    }

    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::checked(DomainSpec::Box { lo, hi })
    }

    /// The straight strip `R x (-w, w)`.
    pub fn strip(halfwidth: f64) -> Result<Self> {
        Self::rect(vec![f64::NEG_INFINITY, -halfwidth], vec![f64::INFINITY, halfwidth])
    }

    pub fn slab_with_ball(slab_halfwidth: f64, ball_radius: f64) -> Result<Self> {
        Self::checked(DomainSpec::SlabWithBall { slab_halfwidth, ball_radius })
    }

    pub fn waveguide(curve: CurveSpec, halfwidth: f64) -> Result<Self> {
        Self::checked(DomainSpec::Waveguide { curve, halfwidth })
    }

    pub fn whip(lengths: Vec<f64>) -> Result<Self> {
        Self::checked(DomainSpec::Whip { lengths })
    }

    pub fn difference_ball(inner: DomainSpec, radius: f64) -> Result<Self> {
        Self::checked(DomainSpec::DifferenceBall { inner: std::boxed::Box::new(inner), radius })
    }

    pub fn union(parts: Vec<DomainSpec>) -> Result<Self> {
        Self::checked(DomainSpec::Union { parts })
    }

    pub fn intersection(parts: Vec<DomainSpec>) -> Result<Self> {
        Self::checked(DomainSpec::Intersection { parts })
    }

    fn checked(spec: DomainSpec) -> Result<Self> {
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Box { lo, .. } => lo.len(),
            DomainSpec::Ball { center, .. } => center.len(),
            DomainSpec::SlabWithBall { .. } | DomainSpec::Waveguide { .. } | DomainSpec::Whip { .. } => 2,
            DomainSpec::Union { parts } | DomainSpec::Intersection { parts } => {
                parts.first().map_or(0, DomainSpec::dim)
            }
            DomainSpec::DifferenceBall { inner, .. } => inner.dim(),
        }
    }

    /// Checks the parameter constraints of every node of the description.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            DomainSpec::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(invalid(format!("interval requires finite a < b, got ({a}, {b})")));
                }
            }
            DomainSpec::Box { lo, hi } => {
                if lo.len() != hi.len() || !(1..=2).contains(&lo.len()) {
                    return Err(invalid("box corners must share dimension 1 or 2"));
                }
                if lo.iter().zip(hi).any(|(l, u)| !(l < u) || l.is_nan() || u.is_nan()) {
                    return Err(invalid("box requires lo < hi on every axis"));
                }
            }
            DomainSpec::Ball { center, radius } => {
                if !(1..=2).contains(&center.len()) || center.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("ball centre must be a finite point in dimension 1 or 2"));
                }
                positive("ball radius", *radius)?;
            }
            DomainSpec::SlabWithBall { slab_halfwidth, ball_radius } => {
                positive("slab halfwidth", *slab_halfwidth)?;
                positive("ball radius", *ball_radius)?;
            }
            DomainSpec::Waveguide { curve, halfwidth } => {
                positive("waveguide halfwidth", *halfwidth)?;
                let kappa = sampled_max_curvature(curve);
                if halfwidth * kappa >= 1.0 {
                    return Err(invalid(format!(
                        "waveguide violates non-overlap: halfwidth * max|kappa| = {} >= 1",
                        halfwidth * kappa
                    )));
                }
            }
            DomainSpec::Whip { lengths } => {
                if lengths.is_empty() {
                    return Err(invalid("whip needs at least one segment"));
                }
                for (n, &l) in lengths.iter().enumerate() {
                    if !(l > PI) || !l.is_finite() {
                        return Err(invalid(format!("whip segment {n} half-length must exceed pi, got {l}")));
                    }
                }
            }
            DomainSpec::Union { parts } | DomainSpec::Intersection { parts } => {
                let Some(first) = parts.first() else {
                    return Err(invalid("set operation needs at least one part"));
                };
                let d = first.dim();
                for part in parts {
                    part.validate()?;
                    if part.dim() != d {
                        return Err(invalid("set operation mixes dimensions"));
                    }
                }
            }
            DomainSpec::DifferenceBall { inner, radius } => {
                inner.validate()?;
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(invalid(format!("removed radius must be finite and non-negative, got {radius}")));
                }
            }
        }
        Ok(())
    }

    /// Continuous level function: negative inside, zero on the boundary.
    ///
    /// Callers must pass a point of dimension `self.dim()`.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Interval { a, b } => (a - x[0]).max(x[0] - b),
            DomainSpec::Box { lo, hi } => {
                lo.iter().zip(hi).zip(x).map(|((l, u), xi)| (l - xi).max(xi - u)).fold(f64::NEG_INFINITY, f64::max)
            }
            DomainSpec::Ball { center, radius } => norm_from(x, center) - radius,
            DomainSpec::SlabWithBall { slab_halfwidth, ball_radius } => {
                let slab = x[1].abs() - slab_halfwidth;
                let ball = x[0].hypot(x[1]) - ball_radius;
                slab.min(ball)
            }
            DomainSpec::Waveguide { curve, halfwidth } => curve.distance(x[0], x[1]) - halfwidth,
            DomainSpec::Whip { lengths } => whip_level(lengths, x[0], x[1]),
            DomainSpec::Union { parts } => parts.iter().map(|p| p.level(x)).fold(f64::INFINITY, f64::min),
            DomainSpec::Intersection { parts } => parts.iter().map(|p| p.level(x)).fold(f64::NEG_INFINITY, f64::max),
            DomainSpec::DifferenceBall { inner, radius } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                inner.level(x).max(radius - r)
            }
        }
    }

    /// Membership of `x` in the open set.
    pub fn indicator(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(invalid(format!("point has dimension {}, domain has {}", x.len(), self.dim())));
        }
        Ok(self.contains(x))
    }

    /// Unchecked membership; the dimension must match.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            // exact forms avoid rounding in the level arithmetic
            DomainSpec::DifferenceBall { inner, radius } => {
                let r2 = x.iter().map(|v| v * v).sum::<f64>();
                inner.contains(x) && r2 > radius * radius
            }
            DomainSpec::Union { parts } => parts.iter().any(|p| p.contains(x)),
            DomainSpec::Intersection { parts } => parts.iter().all(|p| p.contains(x)),
            _ => self.level(x) < 0.0,
        }
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        self.level(x) <= CLOSURE_TOL
    }

    /// Axis-aligned box containing the closure; unbounded axes are infinite.
    pub fn bounding_box(&self) -> Window {
        let inf = f64::INFINITY;
        match self {
            DomainSpec::Interval { a, b } => Window::new(vec![*a], vec![*b]),
            DomainSpec::Box { lo, hi } => Window::new(lo.clone(), hi.clone()),
            DomainSpec::Ball { center, radius } => {
                Window::new(center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            DomainSpec::SlabWithBall { slab_halfwidth, ball_radius } => {
                let w = slab_halfwidth.max(*ball_radius);
                Window::new(vec![-inf, -w], vec![inf, w])
            }
            DomainSpec::Waveguide { curve, halfwidth } => {
                // the tube lies within halfwidth of the graph vertically scaled by the slope factor
                let pad = halfwidth * (1.0 + curve.max_slope().powi(2)).sqrt();
                Window::new(vec![-inf, -pad], vec![inf, curve.amplitude() + pad])
            }
            DomainSpec::Whip { lengths } => {
                let amp = lengths
                    .iter()
                    .enumerate()
                    .map(|(n, _)| CurveSpec::CosBump { n: n as u32 }.amplitude())
                    .fold(0.0, f64::max);
                let pad = WHIP_HALFWIDTH * 2f64.sqrt();
                Window::new(vec![-inf, -pad], vec![inf, amp + pad])
            }
            DomainSpec::Union { parts } => {
                let mut it = parts.iter().map(DomainSpec::bounding_box);
                let first = it.next().expect("validated union is non-empty");
                it.fold(first, |acc, b| acc.hull(&b))
            }
            DomainSpec::Intersection { parts } => {
                let mut it = parts.iter().map(DomainSpec::bounding_box);
                let first = it.next().expect("validated intersection is non-empty");
                it.fold(first, |acc, b| acc.intersect(&b))
            }
            DomainSpec::DifferenceBall { inner, .. } => inner.bounding_box(),
        }
    }
}

fn norm_from(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn sampled_max_curvature(curve: &CurveSpec) -> f64 {
    let s0 = curve.bent_half_length();
    if s0 == 0.0 {
        return 0.0;
    }
    let samples = 2000;
    let sampled =
        (0..=samples).map(|i| curve.curvature(-s0 + 2.0 * s0 * i as f64 / samples as f64).abs()).fold(0.0, f64::max);
    sampled.max(curve.max_curvature())
}

/// Start abscissa and centre shift `tau_n` of each whip piece.
///
/// Piece `n` occupies `[tau_n - L_n, tau_n + L_n]` with `tau_0 = L_0` and
/// `tau_n = 2 (L_0 + ... + L_{n-1}) + L_n`.
pub fn whip_translations(lengths: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lengths.len());
    let mut consumed = 0.0;
    for &l in lengths {
        out.push(2.0 * consumed + l);
        consumed += l;
    }
    out
}

fn whip_level(lengths: &[f64], x: f64, y: f64) -> f64 {
    let straight = y.abs() - WHIP_HALFWIDTH;
    if x < 0.0 {
        return straight;
    }
    let mut start = 0.0;
    for (n, &l) in lengths.iter().enumerate() {
        let end = start + 2.0 * l;
        if x <= end {
            let tau = start + l;
            let curve = CurveSpec::CosBump { n: n as u32 };
            return curve.distance(x - tau, y) - WHIP_HALFWIDTH;
        }
        start = end;
    }
    straight
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_membership() {
        let d = DomainSpec::interval(0.0, 1.0).unwrap();
        assert!(d.indicator(&[0.5]).unwrap());
        assert!(!d.indicator(&[0.0]).unwrap());
        assert!(d.contains_closed(&[0.0]));
    }

    #[test]
    fn ball_boundary_is_excluded() {
        let d = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!d.indicator(&[1.0, 0.0]).unwrap());
        assert!(d.indicator(&[0.5, 0.5]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let d = DomainSpec::interval(0.0, 1.0).unwrap();
        assert!(matches!(d.indicator(&[0.1, 0.2]), Err(crate::PlapError::InvalidInput(_))));
    }

    #[test]
    fn whip_tail_point() {
        let d = DomainSpec::whip(vec![4.0, 4.0]).unwrap();
        assert!(d.indicator(&[-5.0, 0.0]).unwrap());
        assert!(!d.indicator(&[-5.0, 0.6]).unwrap());
    }

    #[test]
    fn whip_translation_recursion() {
        let l = [4.0, 5.0, 6.0];
        let tau = whip_translations(&l);
        assert_eq!(tau[0], 4.0);
        assert_eq!(tau[1], 2.0 * 4.0 + 5.0);
        assert_eq!(tau[2], 2.0 * (4.0 + 5.0) + 6.0);
    }

    #[test]
    fn whip_apex_is_inside() {
        let d = DomainSpec::whip(vec![4.0, 4.0]).unwrap();
        // apex of piece 0 sits at (tau_0, 2)
        assert!(d.contains(&[4.0, 2.0]));
        assert!(!d.contains(&[4.0, 0.0]));
        // apex of piece 1 at (tau_1, 1)
        assert!(d.contains(&[12.0, 1.0]));
    }

    #[test]
    fn overlapping_waveguide_is_rejected() {
        let err = DomainSpec::waveguide(CurveSpec::CosBump { n: 0 }, 1.0).unwrap_err();
        assert!(matches!(err, crate::PlapError::InvalidInput(_)));
        assert!(DomainSpec::waveguide(CurveSpec::CosBump { n: 0 }, 0.5).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        assert!(DomainSpec::ball(vec![0.0], 0.0).is_err());
        assert!(DomainSpec::interval(1.0, 1.0).is_err());
        assert!(DomainSpec::whip(vec![3.0]).is_err());
        assert!(DomainSpec::slab_with_ball(-1.0, 1.0).is_err());
    }

    #[test]
    fn slab_with_ball_shape() {
        let d = DomainSpec::slab_with_ball(0.5, 2.0).unwrap();
        assert!(d.contains(&[100.0, 0.0]));
        assert!(d.contains(&[0.0, 1.9]));
        assert!(!d.contains(&[3.0, 1.0]));
    }
}
