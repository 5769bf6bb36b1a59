//! Run configuration: a TOML file with a domain section and optional
//! experiment blocks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use plap_core::geometry::WhipCalibration;
use plap_core::{DomainSpec, EpsSchedule, PotentialSpec, SolverOptions, Window};

/// Parse or validation failure, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub p: f64,
    pub h: f64,
    /// Half-width of the centred computational box; defaults to the domain's
    /// bounding box when that is bounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ep: Option<EpBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsbound: Option<LsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<PerturbBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whip: Option<WhipCalibration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpBlock {
    pub radii: Vec<f64>,
    pub windows: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsBlock {
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbBlock {
    pub potential: PotentialSpec,
    pub eps: EpsSchedule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayBlock {
    #[serde(default = "default_floor")]
    pub floor: f64,
    /// Inner radius of the fitted range.
    #[serde(default)]
    pub r_min: f64,
    /// Radii `R` of the gradient tails outside `B_{R+1}`.
    pub tail_radii: Vec<f64>,
    #[serde(default = "default_cut_radii")]
    pub cutoff_radii: Vec<f64>,
    /// Values of `delta (p - 1)` for the cut-off energy check.
    #[serde(default = "default_delta_fractions")]
    pub delta_fractions: Vec<f64>,
}

fn default_floor() -> f64 {
    plap_core::spectral::DEFAULT_FLOOR
}

fn default_cut_radii() -> Vec<f64> {
    vec![2.0, 4.0, 6.0]
}

fn default_delta_fractions() -> Vec<f64> {
    vec![0.1, 0.3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapBlock {
    pub k: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_no_gap")]
    pub no_gap_tolerance: f64,
}

fn default_safety() -> f64 {
    0.05
}

fn default_no_gap() -> f64 {
    0.01
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.domain.validate().map_err(|e| bad("domain", e.to_string()))?;
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(bad("p", format!("constraint p > 1 violated (p = {})", self.p)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(bad("h", format!("constraint h > 0 violated (h = {})", self.h)));
        }
        if let Some(w) = self.window {
            if !(w > 0.0) || !w.is_finite() {
                return Err(bad("window", format!("must be a positive half-width, got {w}")));
            }
        } else if !self.domain.bounding_box().is_bounded() {
            return Err(bad("window", "required for unbounded domains"));
        }
        self.solver.validate().map_err(|e| bad("solver", e.to_string()))?;
        if let Some(ep) = &self.ep {
            if ep.radii.is_empty() || ep.windows.is_empty() {
                return Err(bad("ep", "radii and windows must be non-empty"));
            }
            if ep.radii.windows(2).any(|w| !(w[0] < w[1])) || ep.radii[0] < 0.0 {
                return Err(bad("ep.radii", "must be non-negative and strictly increasing"));
            }
            if ep.windows.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(bad("ep.windows", "must be strictly increasing"));
            }
            if ep.windows[0] <= ep.radii[ep.radii.len() - 1] {
                return Err(bad("ep.windows", "every window must exceed the largest radius"));
            }
        }
        if let Some(ls) = &self.lsbound {
            if ls.k == 0 {
                return Err(bad("lsbound.k", "constraint k >= 1 violated"));
            }
        }
        if let Some(pb) = &self.perturb {
            pb.potential.validate().map_err(|e| bad("perturb.potential", e.to_string()))?;
            pb.eps.values().map_err(|e| bad("perturb.eps", e.to_string()))?;
        }
        if let Some(d) = &self.decay {
            if !(d.floor > 0.0) {
                return Err(bad("decay.floor", "must be positive"));
            }
            if d.delta_fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
                return Err(bad("decay.delta_fractions", "each entry must lie in (0, 1)"));
            }
        }
        if let Some(g) = &self.gap {
            if g.k == 0 {
                return Err(bad("gap.k", "constraint k >= 1 violated"));
            }
            if !(0.0..1.0).contains(&g.safety) || !(0.0..=g.safety).contains(&g.no_gap_tolerance) {
                return Err(bad("gap", "need 0 <= no_gap_tolerance <= safety < 1"));
            }
        }
        Ok(())
    }

    /// Computational box: the centred window, clipped to the domain.
    pub fn grid_window(&self) -> Window {
        let bbox = self.domain.bounding_box();
        match self.window {
            Some(w) => Window::centered(self.domain.dim(), w).intersect(&bbox),
            None => bbox,
        }
    }

    /// Half-width of the box pieces and truncations are cut from.
    pub fn half_width(&self) -> f64 {
        self.window.unwrap_or_else(|| {
            let b = self.domain.bounding_box();
            b.lo.iter().chain(&b.hi).fold(0.0f64, |m, v| m.max(v.abs()))
        })
    }

    /// Canonical TOML rendering; parsing it back yields the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Canonical JSON with sorted keys.
    pub fn canonical_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises to JSON")
    }

    /// SHA-256 of the canonical JSON.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.canonical_json()).expect("json value serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INTERVAL: &str = r#"
p = 2.0
h = 0.00390625

[domain]
type = "interval"
a = 0.0
b = 1.0
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_toml(INTERVAL).unwrap();
        assert_eq!(cfg.domain, DomainSpec::interval(0.0, 1.0).unwrap());
        assert_eq!(cfg.solver, SolverOptions::default());
    }

    #[test]
    fn round_trip_is_lossless() {
        let cfg = RunConfig::from_toml(INTERVAL).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_toml(), again.to_toml());
        assert_eq!(cfg.digest(), again.digest());
    }

    #[test]
    fn infinite_bounds_parse() {
        let text = r#"
p = 2.0
h = 0.0625
window = 4.0
[domain]
type = "box"
lo = [-inf, -0.5]
hi = [inf, 0.5]
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.domain, DomainSpec::strip(0.5).unwrap());
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_small_p() {
        let err = RunConfig::from_toml(&INTERVAL.replace("p = 2.0", "p = 0.5")).unwrap_err();
        assert!(err.to_string().contains("p > 1"), "{err}");
    }

    #[test]
    fn unknown_field_reports_location() {
        let err = RunConfig::from_toml(&format!("{INTERVAL}\n[solver]\ntol = 1.0\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tol") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn unbounded_domain_needs_window() {
        let text = "p = 2.0\nh = 0.1\n[domain]\ntype = \"slab_with_ball\"\nslab_halfwidth = 0.5\nball_radius = 1.0\n";
        assert!(RunConfig::from_toml(text).is_err());
    }
}
