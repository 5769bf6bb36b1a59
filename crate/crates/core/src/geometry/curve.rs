//! Planar centre curves for waveguides.
//!
//! A curve is stored in graph form `t -> (t, y(t))`. The bump family is
//! `y_n(t) = (1 + cos t) / (n + 1)` on `(-pi, pi)` and zero outside, which is
//! `C^{1,1}` with curvature bounded by `1 / (n + 1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Tolerance on the arc-length inversion, measured in arc length.
pub const ARC_LENGTH_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    StraightLine,
    CosBump { n: u32 },
}

impl CurveSpec {
    fn scale(&self) -> Option<f64> {
        match self {
            CurveSpec::StraightLine => None,
            CurveSpec::CosBump { n } => Some(f64::from(*n) + 1.0),
        }
    }

    /// Height of the curve above the abscissa `t`.
    pub fn height(&self, t: f64) -> f64 {
        match self.scale() {
            Some(a) if t.abs() < PI => (1.0 + t.cos()) / a,
            _ => 0.0,
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        match self.scale() {
            Some(a) if t.abs() < PI => -t.sin() / a,
            _ => 0.0,
        }
    }

    /// Peak height of the bump, `2 / (n + 1)`.
    pub fn amplitude(&self) -> f64 {
        self.scale().map_or(0.0, |a| 2.0 / a)
    }

    /// Largest absolute slope of the graph.
    pub fn max_slope(&self) -> f64 {
        self.scale().map_or(0.0, |a| 1.0 / a)
    }

    /// Closed-form bound on `|kappa|`, attained at `t = 0` and `t -> pi`.
    pub fn max_curvature(&self) -> f64 {
        self.scale().map_or(0.0, |a| 1.0 / a)
    }

    /// Arc length of the bent part measured from the apex, `s_0`.
    pub fn bent_half_length(&self) -> f64 {
        match self.scale() {
            None => 0.0,
            Some(a) => arc_length(a, PI),
        }
    }

    /// Inverse of the arc-length parametrisation, `phi(s)`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let Some(a) = self.scale() else { return s };
        let s0 = arc_length(a, PI);
        let sign = s.signum();
        let s_abs = s.abs();
        if s_abs >= s0 {
            return sign * (PI + (s_abs - s0));
        }
        // s(t) is increasing with slope in [1, sqrt(1 + 1/a^2)], which brackets the root.
        let mut lo = s_abs / (1.0 + 1.0 / (a * a)).sqrt();
        let mut hi = s_abs.min(PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let val = arc_length(a, mid);
            if val < s_abs {
                lo = mid;
            } else {
                hi = mid;
            }
            // slope of s(t) is at least 1, so a t-bracket of width w bounds the s-error by 1.2w
            if hi - lo < 0.5 * ARC_LENGTH_TOL {
                break;
            }
        }
        sign * 0.5 * (lo + hi)
    }

    /// Signed curvature of the arc-length parametrised curve.
    pub fn curvature(&self, s: f64) -> f64 {
        let Some(a) = self.scale() else { return 0.0 };
        if s.abs() >= arc_length(a, PI) {
            return 0.0;
        }
        let phi = self.parameter_at(s);
        let a2 = a * a;
        -a2 * phi.cos() / (a2 + phi.sin().powi(2)).powf(1.5)
    }

    /// Euclidean distance from `(x, y)` to the whole curve.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        if self.scale().is_none() {
            return y.abs();
        }
        let vertical = (y - self.height(x)).abs();
        if vertical == 0.0 {
            return 0.0;
        }
        // The vertical gap shrinks by at most sqrt(1 + slope^2) when projecting.
        let lower = vertical / (1.0 + self.max_slope().powi(2)).sqrt();
        if lower > 4.0 {
            return lower;
        }
        let f = |t: f64| (t - x).powi(2) + (self.height(t) - y).powi(2);
        let step = 0.02;
        let samples = ((2.0 * vertical) / step).ceil().max(2.0) as usize;
        let t0 = x - vertical;
        let dt = 2.0 * vertical / samples as f64;
        let mut best_i = 0;
        let mut best = f64::INFINITY;
        for i in 0..=samples {
            let v = f(t0 + i as f64 * dt);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let lo = t0 + best_i.saturating_sub(1) as f64 * dt;
        let hi = t0 + (best_i + 1).min(samples) as f64 * dt;
        let (_, fmin) = golden_min(f, lo, hi, 1e-13);
        best.min(fmin).sqrt()
    }
}

fn arc_length(a: f64, t: f64) -> f64 {
    let inv = 1.0 / (a * a);
    let g = |u: f64| (1.0 + inv * u.sin().powi(2)).sqrt();
    let sign = t.signum();
    sign * adaptive_simpson(&g, 0.0, t.abs(), 1e-13, 40)
}

pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
