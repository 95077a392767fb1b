use serde::{Deserialize, Serialize};

use super::config::LegConfig;
use super::geometry::{
    detect_contact_deflected, hull_points, point_velocity, rotate, ContactElement, LegSide,
};
use super::swing::{attach_pivot, SwingSettings};
use crate::sim::{QuadParams, QuadState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactPhase {
    Free,
    ForeAttached,
    FourLegged,
    TwoLeggedRest,
    BodyContact,
}

impl ContactPhase {
    pub fn is_pinned(self) -> bool {
        matches!(
            self,
            ContactPhase::ForeAttached | ContactPhase::FourLegged | ContactPhase::TwoLeggedRest
        )
    }

    /// No further motion is simulated once a phase is terminal.
    pub fn is_terminal(self) -> bool {
        matches!(self, ContactPhase::FourLegged | ContactPhase::TwoLeggedRest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pivot {
    pub x: f64,
    pub z: f64,
    /// Which foot pair forms the pin. Usually the fore pair.
    pub side: LegSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub phase: ContactPhase,
    pub fore_pivot: Option<Pivot>,
    pub hind_attached: bool,
    /// Hinge deflections (rad), `[fore, hind]`; positive splays outward.
    pub hinge_deflections: [f64; 2],
    pub hinge_rates: [f64; 2],
    /// Body pitch at the first foot touch, degrees in (−180, 180].
    pub first_contact_pitch: Option<f64>,
    pub first_contact_time: Option<f64>,
    pub body_or_prop_contact: bool,
    pub prop_contact: bool,
    /// Continuous time spent below the rest energy threshold.
    pub rest_timer: f64,
}

impl Default for ContactState {
    fn default() -> Self {
        Self {
            phase: ContactPhase::Free,
            fore_pivot: None,
            hind_attached: false,
            hinge_deflections: [0.0; 2],
            hinge_rates: [0.0; 2],
            first_contact_pitch: None,
            first_contact_time: None,
            body_or_prop_contact: false,
            prop_contact: false,
            rest_timer: 0.0,
        }
    }
}

impl ContactState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_legs(&self) -> u8 {
        match self.phase {
            ContactPhase::FourLegged => 4,
            ContactPhase::ForeAttached | ContactPhase::TwoLeggedRest => 2,
            ContactPhase::Free | ContactPhase::BodyContact => 0,
        }
    }

    pub(crate) fn record_first_contact(&mut self, pitch: f64, t: f64) {
        if self.first_contact_pitch.is_none() {
            self.first_contact_pitch = Some(crate::sim::wrap_angle(pitch).to_degrees());
            self.first_contact_time = Some(t);
        }
    }
}

/// Passive hinge motion while a leg hangs free. `pitch_acc` is the body's
/// angular acceleration, which drives the leg through the hip.
pub fn advance_free_hinge(
    deflection: &mut f64,
    rate: &mut f64,
    side: LegSide,
    legs: &LegConfig,
    pitch_acc: f64,
    dt: f64,
) {
    let k = legs.stiffness_si();
    let c = legs.hinge_damping();
    let i = legs.leg_inertia();
    let acc = -(k * *deflection + c * *rate) / i - side.sign() * pitch_acc;
    *rate += acc * dt;
    *deflection += *rate * dt;
    clamp_stop(deflection, rate, legs.hinge_limit_rad());
}

pub(crate) fn clamp_stop(deflection: &mut f64, rate: &mut f64, limit: f64) {
    if *deflection > limit {
        *deflection = limit;
        *rate = rate.min(0.0);
    } else if *deflection < -limit {
        *deflection = -limit;
        *rate = rate.max(0.0);
    }
}

/// Resolve ceiling contact for a vehicle that is not pinned.
///
/// `state` is the post-step free-flight state; `pitch_acc` is the angular
/// acceleration seen during that step. Feet within tolerance become a pin;
/// hull points that crossed the plane get a restitution impulse.
pub fn resolve_free_contact(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
    ceiling_z: f64,
    pitch_acc: f64,
    dt: f64,
    settings: &SwingSettings,
) -> (QuadState, ContactState) {
    let mut s = *state;
    let mut c = contact.clone();
    for side in [LegSide::Fore, LegSide::Hind] {
        let i = side.index();
        let (mut d, mut r) = (c.hinge_deflections[i], c.hinge_rates[i]);
        advance_free_hinge(&mut d, &mut r, side, legs, pitch_acc, dt);
        c.hinge_deflections[i] = d;
        c.hinge_rates[i] = r;
    }

    let ev = detect_contact_deflected(&s, legs, params, ceiling_z, c.hinge_deflections);
    if ev.is_empty() {
        return (s, c);
    }

    let feet: Vec<LegSide> = ev.feet().collect();
    if !feet.is_empty() {
        c.record_first_contact(s.pitch, s.t);
        // With both pairs in reach the one deeper into the plane pins first.
        let side = feet[0];
        let (s2, mut c2) = attach_pivot(&s, &c, legs, params, side, ceiling_z, settings);
        if feet.len() == 2 {
            c2.phase = ContactPhase::FourLegged;
            c2.hind_attached = true;
        }
        return (s2, c2);
    }

    for hit in ev.hull() {
        let ContactElement::Hull(pt) = hit.element else {
            continue;
        };
        c.body_or_prop_contact = true;
        if pt.is_propeller() {
            c.prop_contact = true;
        }
        if c.phase == ContactPhase::Free {
            c.phase = ContactPhase::BodyContact;
        }
        let b = hull_points(params)
            .into_iter()
            .find(|(p, _)| *p == pt)
            .map(|(_, b)| b)
            .expect("hull point");
        // Push the body back below the plane, then bounce.
        s.z -= hit.penetration;
        let v = point_velocity(&s, b);
        if v[1] > 0.0 {
            let r = rotate(s.pitch, b);
            let denom = 1.0 / params.mass + r[0] * r[0] / params.inertia_yy;
            let j = (1.0 + settings.restitution) * v[1] / denom;
            s.vz -= j / params.mass;
            s.pitch_rate -= j * r[0] / params.inertia_yy;
        }
    }
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_hinge_overshoots() {
        let legs = LegConfig::narrow_long();
        let (mut d, mut r) = (0.1, 0.0);
        let mut crossed = false;
        let mut min = f64::MAX;
        for _ in 0..2000 {
            advance_free_hinge(&mut d, &mut r, LegSide::Fore, &legs, 0.0, 1e-3);
            if d < 0.0 {
                crossed = true;
            }
            min = min.min(d);
        }
        assert!(crossed);
        // ζ = 0.25 gives about 44 % overshoot.
        let zeta: f64 = 0.25;
        let expect = (-zeta * std::f64::consts::PI / (1.0 - zeta * zeta).sqrt()).exp();
        assert!((-min / 0.1 - expect).abs() < 0.03, "min={min}");
    }

    #[test]
    fn stop_clamps_rate() {
        let (mut d, mut r) = (0.3, 1.0);
        clamp_stop(&mut d, &mut r, 0.2);
        assert_eq!((d, r), (0.2, 0.0));
    }

    #[test]
    fn n_legs_by_phase() {
        let mut c = ContactState::new();
        assert_eq!(c.n_legs(), 0);
        c.phase = ContactPhase::FourLegged;
        assert_eq!(c.n_legs(), 4);
        c.phase = ContactPhase::TwoLeggedRest;
        assert_eq!(c.n_legs(), 2);
    }

    #[test]
    fn first_contact_recorded_once() {
        let mut c = ContactState::new();
        c.record_first_contact(3.0, 0.5);
        c.record_first_contact(1.0, 0.6);
        assert!((c.first_contact_pitch.unwrap() - 3f64.to_degrees()).abs() < 1e-12);
        assert_eq!(c.first_contact_time, Some(0.5));
    }
}
