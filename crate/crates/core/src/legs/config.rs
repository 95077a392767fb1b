use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Landing-gear geometry and hip hinge properties.
///
/// The four physical legs collapse to a fore pair and a hind pair, mirrored
/// about body z. Each pair is a rigid link hanging from its hip at
/// `angle_psi` from the body −z axis, splayed outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegConfig {
    pub name: String,
    /// mm
    pub length: f64,
    /// Splay from body −z, degrees.
    pub angle_psi: f64,
    /// Hinge stiffness, N·mm/rad.
    #[serde(default = "default_hinge_k")]
    pub hinge_k: f64,
    #[serde(default = "default_hinge_zeta")]
    pub hinge_zeta: f64,
    /// m
    #[serde(default = "default_tolerance")]
    pub foot_attach_tolerance: f64,
    /// Mass of one leg link (kg); sets the hinge's own inertia.
    #[serde(default = "default_leg_mass")]
    pub leg_mass: f64,
    /// Hinge travel stop either side of rest, degrees.
    #[serde(default = "default_hinge_limit")]
    pub hinge_limit: f64,
}

fn default_hinge_k() -> f64 {
    0.08
}
fn default_hinge_zeta() -> f64 {
    0.25
}
fn default_tolerance() -> f64 {
    0.002
}
fn default_leg_mass() -> f64 {
    0.0005
}
fn default_hinge_limit() -> f64 {
    10.0
}

/// Table of the six studied designs: (name, ψ deg, L mm).
pub const PRESETS: [(&str, f64, f64); 6] = [
    ("Narrow-Short", 5.0, 50.0),
    ("Narrow-Long", 5.0, 75.0),
    ("Semi-Narrow-Short", 30.0, 50.0),
    ("Semi-Narrow-Long", 30.0, 75.0),
    ("Wide-Short", 60.0, 50.0),
    ("Wide-Long", 60.0, 75.0),
];

impl LegConfig {
    pub fn new(name: impl Into<String>, angle_psi: f64, length: f64) -> Self {
        Self {
            name: name.into(),
            length,
            angle_psi,
            hinge_k: default_hinge_k(),
            hinge_zeta: default_hinge_zeta(),
            foot_attach_tolerance: default_tolerance(),
            leg_mass: default_leg_mass(),
            hinge_limit: default_hinge_limit(),
        }
    }

    /// Look up one of the six named designs. Case and separators are ignored.
    pub fn preset(name: &str) -> Result<Self> {
        let key = canonical(name);
        PRESETS
            .iter()
            .find(|(n, _, _)| canonical(n) == key)
            .map(|&(n, psi, len)| Self::new(n, psi, len))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown leg design `{name}`; expected one of {}",
                    PRESETS.map(|p| p.0).join(", ")
                ))
            })
    }

    pub fn all_presets() -> Vec<Self> {
        PRESETS
            .iter()
            .map(|&(n, psi, len)| Self::new(n, psi, len))
            .collect()
    }

    pub fn narrow_long() -> Self {
        Self::preset("Narrow-Long").expect("preset")
    }

    pub fn semi_narrow_long() -> Self {
        Self::preset("Semi-Narrow-Long").expect("preset")
    }

    pub fn wide_short() -> Self {
        Self::preset("Wide-Short").expect("preset")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.length.is_finite() && self.length > 0.0) {
            return bad(format!("leg length {} mm must be > 0", self.length));
        }
        if !(0.0..90.0).contains(&self.angle_psi) {
            return bad(format!("leg angle {} outside [0, 90) deg", self.angle_psi));
        }
        if !(self.hinge_k.is_finite() && self.hinge_k > 0.0) {
            return bad(format!("hinge_k {} must be > 0", self.hinge_k));
        }
        if !(self.hinge_zeta > 0.0 && self.hinge_zeta < 1.0) {
            return bad(format!("hinge_zeta {} outside (0, 1)", self.hinge_zeta));
        }
        if !(self.foot_attach_tolerance.is_finite() && self.foot_attach_tolerance >= 0.0) {
            return bad("foot_attach_tolerance must be >= 0".into());
        }
        if !(self.leg_mass.is_finite() && self.leg_mass > 0.0) {
            return bad("leg_mass must be > 0".into());
        }
        if !(self.hinge_limit.is_finite() && self.hinge_limit >= 0.0) {
            return bad("hinge_limit must be >= 0".into());
        }
        Ok(())
    }

    pub fn length_m(&self) -> f64 {
        self.length * 1e-3
    }

    pub fn psi_rad(&self) -> f64 {
        self.angle_psi.to_radians()
    }

    /// Hinge stiffness in N·m/rad.
    pub fn stiffness_si(&self) -> f64 {
        self.hinge_k * 1e-3
    }

    /// Inertia of the leg link about its hip (uniform rod).
    pub fn leg_inertia(&self) -> f64 {
        let l = self.length_m();
        self.leg_mass * l * l / 3.0
    }

    /// Damping coefficient c = 2ζ√(k·I_leg), N·m·s/rad.
    pub fn hinge_damping(&self) -> f64 {
        2.0 * self.hinge_zeta * (self.stiffness_si() * self.leg_inertia()).sqrt()
    }

    pub fn hinge_limit_rad(&self) -> f64 {
        self.hinge_limit.to_radians()
    }
}

fn canonical(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_loosely() {
        let a = LegConfig::preset("semi narrow long").unwrap();
        let b = LegConfig::preset("Semi-Narrow-Long").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.angle_psi, 30.0);
        assert_eq!(a.length, 75.0);
        assert!(LegConfig::preset("tripod").is_err());
    }

    #[test]
    fn all_presets_valid() {
        for l in LegConfig::all_presets() {
            l.validate().unwrap();
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let mut l = LegConfig::narrow_long();
        l.hinge_zeta = 1.0;
        assert!(l.validate().is_err());
        let mut l = LegConfig::narrow_long();
        l.angle_psi = 90.0;
        assert!(l.validate().is_err());
    }
}
