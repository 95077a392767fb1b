use serde::{Deserialize, Serialize};

use super::config::LegConfig;
use crate::sim::{QuadParams, QuadState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LegSide {
    Fore,
    Hind,
}

impl LegSide {
    /// +1 fore, −1 hind.
    pub fn sign(self) -> f64 {
        match self {
            LegSide::Fore => 1.0,
            LegSide::Hind => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            LegSide::Fore => LegSide::Hind,
            LegSide::Hind => LegSide::Fore,
        }
    }

    pub fn index(self) -> usize {
        match self {
            LegSide::Fore => 0,
            LegSide::Hind => 1,
        }
    }
}

/// Non-foot points of the collision hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HullPoint {
    /// Body box corner: side along x, `top` along z.
    BodyCorner { side: LegSide, top: bool },
    /// Propeller disk rim: `outer` is the tip away from the body.
    PropTip { side: LegSide, outer: bool },
    Hip(LegSide),
}

impl HullPoint {
    pub fn is_propeller(self) -> bool {
        matches!(self, HullPoint::PropTip { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContactElement {
    Foot(LegSide),
    Hull(HullPoint),
}

/// Every hull point with its body-frame position.
pub fn hull_points(params: &QuadParams) -> Vec<(HullPoint, [f64; 2])> {
    let mut out = Vec::with_capacity(10);
    for side in [LegSide::Fore, LegSide::Hind] {
        let s = side.sign();
        for top in [true, false] {
            let z = if top {
                params.body_halfheight
            } else {
                -params.body_halfheight
            };
            out.push((
                HullPoint::BodyCorner { side, top },
                [s * params.body_halfwidth, z],
            ));
        }
        for outer in [true, false] {
            let r = if outer {
                params.prop_radius
            } else {
                -params.prop_radius
            };
            out.push((
                HullPoint::PropTip { side, outer },
                [s * (params.arm_x + r), params.prop_height],
            ));
        }
        out.push((HullPoint::Hip(side), hip_body(params, side)));
    }
    out
}

pub fn hip_body(params: &QuadParams, side: LegSide) -> [f64; 2] {
    [side.sign() * params.hip_x, params.hip_z]
}

/// Leg direction in the body frame for a hinge deflection (rad, positive splays outward).
pub fn leg_direction_body(legs: &LegConfig, side: LegSide, deflection: f64) -> [f64; 2] {
    let a = legs.psi_rad() + deflection;
    [side.sign() * a.sin(), -a.cos()]
}

pub fn foot_body(params: &QuadParams, legs: &LegConfig, side: LegSide, deflection: f64) -> [f64; 2] {
    let h = hip_body(params, side);
    let d = leg_direction_body(legs, side, deflection);
    let l = legs.length_m();
    [h[0] + l * d[0], h[1] + l * d[1]]
}

pub fn rotate(pitch: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = pitch.sin_cos();
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c]
}

/// World position of a body-frame point.
pub fn to_world(state: &QuadState, p: [f64; 2]) -> [f64; 2] {
    let r = rotate(state.pitch, p);
    [state.x + r[0], state.z + r[1]]
}

/// World velocity of a body-frame point on the rigid body.
pub fn point_velocity(state: &QuadState, p: [f64; 2]) -> [f64; 2] {
    let r = rotate(state.pitch, p);
    [state.vx - state.pitch_rate * r[1], state.vz + state.pitch_rate * r[0]]
}

/// One element at or above the ceiling plane (within tolerance for feet).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactHit {
    pub element: ContactElement,
    pub world: [f64; 2],
    /// Height above the ceiling plane (m); negative means still below it.
    pub penetration: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    /// Sorted by penetration, deepest first.
    pub hits: Vec<ContactHit>,
}

impl ContactEvent {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn first(&self) -> Option<&ContactHit> {
        self.hits.first()
    }

    pub fn feet(&self) -> impl Iterator<Item = LegSide> + '_ {
        self.hits.iter().filter_map(|h| match h.element {
            ContactElement::Foot(s) => Some(s),
            ContactElement::Hull(_) => None,
        })
    }

    pub fn hull(&self) -> impl Iterator<Item = &ContactHit> + '_ {
        self.hits
            .iter()
            .filter(|h| matches!(h.element, ContactElement::Hull(_)))
    }

    pub fn foot(&self, side: LegSide) -> Option<&ContactHit> {
        self.hits
            .iter()
            .find(|h| h.element == ContactElement::Foot(side))
    }
}

/// Contact check with both hinges at rest.
pub fn detect_contact(
    state: &QuadState,
    legs: &LegConfig,
    params: &QuadParams,
    ceiling_z: f64,
) -> ContactEvent {
    detect_contact_deflected(state, legs, params, ceiling_z, [0.0, 0.0])
}

/// Feet within `foot_attach_tolerance` below the plane count as touching;
/// hull points only once they cross it.
pub fn detect_contact_deflected(
    state: &QuadState,
    legs: &LegConfig,
    params: &QuadParams,
    ceiling_z: f64,
    deflections: [f64; 2],
) -> ContactEvent {
    let mut hits = Vec::new();
    for side in [LegSide::Fore, LegSide::Hind] {
        let w = to_world(
            state,
            foot_body(params, legs, side, deflections[side.index()]),
        );
        let pen = w[1] - ceiling_z;
        if pen >= -legs.foot_attach_tolerance {
            hits.push(ContactHit {
                element: ContactElement::Foot(side),
                world: w,
                penetration: pen,
            });
        }
    }
    for (pt, b) in hull_points(params) {
        let w = to_world(state, b);
        let pen = w[1] - ceiling_z;
        if pen > 0.0 {
            hits.push(ContactHit {
                element: ContactElement::Hull(pt),
                world: w,
                penetration: pen,
            });
        }
    }
    hits.sort_by(|a, b| b.penetration.total_cmp(&a.penetration));
    ContactEvent { hits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn upright_far_below_has_no_contact() {
        let p = QuadParams::default();
        let s = QuadState::at_rest(0.0, 1.0);
        assert!(detect_contact(&s, &LegConfig::narrow_long(), &p, 3.0).is_empty());
    }

    #[test]
    fn inverted_feet_touch_together() {
        let p = QuadParams::default();
        let legs = LegConfig::narrow_long();
        let mut s = QuadState::at_rest(0.0, 0.0);
        s.pitch = PI;
        let foot = to_world(&s, foot_body(&p, &legs, LegSide::Fore, 0.0));
        let ev = detect_contact(&s, &legs, &p, foot[1]);
        let feet: Vec<_> = ev.feet().collect();
        assert_eq!(feet.len(), 2);
        assert!(ev.hull().next().is_none());
        let a = ev.foot(LegSide::Fore).unwrap().penetration;
        let b = ev.foot(LegSide::Hind).unwrap().penetration;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn foot_below_hip_at_rest() {
        let p = QuadParams::default();
        let legs = LegConfig::preset("Wide-Short").unwrap();
        let f = foot_body(&p, &legs, LegSide::Fore, 0.0);
        let expect_x = p.hip_x + 0.05 * 60f64.to_radians().sin();
        let expect_z = p.hip_z - 0.05 * 60f64.to_radians().cos();
        assert!((f[0] - expect_x).abs() < 1e-15);
        assert!((f[1] - expect_z).abs() < 1e-15);
        let h = foot_body(&p, &legs, LegSide::Hind, 0.0);
        assert!((h[0] + expect_x).abs() < 1e-15);
    }

    #[test]
    fn point_velocity_matches_finite_difference() {
        let mut s = QuadState::at_rest(0.1, 0.2);
        s.pitch = 0.7;
        s.vx = 0.3;
        s.vz = -0.2;
        s.pitch_rate = 2.0;
        let b = [0.03, -0.05];
        let h = 1e-7;
        let mut s2 = s;
        s2.x += s.vx * h;
        s2.z += s.vz * h;
        s2.pitch += s.pitch_rate * h;
        let a = to_world(&s, b);
        let c = to_world(&s2, b);
        let v = point_velocity(&s, b);
        assert!(((c[0] - a[0]) / h - v[0]).abs() < 1e-6);
        assert!(((c[1] - a[1]) / h - v[1]).abs() < 1e-6);
    }
}
