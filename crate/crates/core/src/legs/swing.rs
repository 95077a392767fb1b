use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::config::LegConfig;
use super::contact::{advance_free_hinge, ContactPhase, ContactState, Pivot};
use super::geometry::{foot_body, hip_body, hull_points, rotate, to_world, LegSide};
use crate::error::{Error, Result};
use crate::sim::{motor_response, MotorCommand, QuadParams, QuadState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HingeMode {
    /// Torsional spring-damper at the pivot hip.
    Compliant,
    /// Pivot hip rigid; the body swings as a single rigid pendulum.
    Locked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwingSettings {
    pub hinge: HingeMode,
    /// Coefficient of restitution for hull strikes.
    pub restitution: f64,
    /// Coefficient of restitution at the pivot hinge stops.
    pub stop_restitution: f64,
    /// J
    pub rest_energy: f64,
    /// s
    pub rest_duration: f64,
    /// m
    pub drift_limit: f64,
}

impl Default for SwingSettings {
    fn default() -> Self {
        Self {
            hinge: HingeMode::Compliant,
            restitution: 0.2,
            stop_restitution: 0.0,
            rest_energy: 1e-6,
            rest_duration: 0.2,
            drift_limit: 1e-4,
        }
    }
}

type V2 = [f64; 2];

fn perp(a: V2) -> V2 {
    [-a[1], a[0]]
}

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn unit(a: f64) -> V2 {
    [a.cos(), a.sin()]
}

/// Body pinned at a foot, in generalized coordinates q = (θ, A): body pitch
/// and the world angle of the pivot leg. The leg itself is massless here;
/// its hinge couples the two.
struct Pinned<'a> {
    params: &'a QuadParams,
    s: f64,
    pivot: V2,
    hip: V2,
    l: f64,
    psi: f64,
    k: f64,
    c: f64,
}

impl<'a> Pinned<'a> {
    fn new(params: &'a QuadParams, legs: &LegConfig, pivot: &Pivot) -> Self {
        Self {
            params,
            s: pivot.side.sign(),
            pivot: [pivot.x, pivot.z],
            hip: hip_body(params, pivot.side),
            l: legs.length_m(),
            psi: legs.psi_rad(),
            k: legs.stiffness_si(),
            c: legs.hinge_damping(),
        }
    }

    fn leg_angle(&self, theta: f64, deflection: f64) -> f64 {
        theta + self.s * (self.psi + deflection) - FRAC_PI_2
    }

    fn deflection(&self, theta: f64, a: f64) -> f64 {
        self.s * (a - theta + FRAC_PI_2) - self.psi
    }

    fn w(&self, theta: f64) -> V2 {
        rotate(theta, self.hip)
    }

    fn com(&self, theta: f64, a: f64) -> V2 {
        let w = self.w(theta);
        let u = unit(a);
        [
            self.pivot[0] - w[0] - self.l * u[0],
            self.pivot[1] - w[1] - self.l * u[1],
        ]
    }

    fn com_velocity(&self, theta: f64, a: f64, td: f64, ad: f64) -> V2 {
        let pw = perp(self.w(theta));
        let pu = perp(unit(a));
        [
            -td * pw[0] - self.l * ad * pu[0],
            -td * pw[1] - self.l * ad * pu[1],
        ]
    }

    fn mass_matrix(&self, theta: f64, a: f64) -> [[f64; 2]; 2] {
        let m = self.params.mass;
        let w = self.w(theta);
        let u = unit(a);
        let m12 = m * self.l * dot(w, u);
        [
            [self.params.inertia_yy + m * dot(w, w), m12],
            [m12, m * self.l * self.l],
        ]
    }

    /// Generalized forces minus velocity-product terms.
    fn forces(&self, theta: f64, a: f64, td: f64, ad: f64, thrust: [f64; 2], hinge: bool) -> V2 {
        let m = self.params.mass;
        let g = self.params.g;
        let w = self.w(theta);
        let u = unit(a);
        let hs = cross(u, w);
        let mut q = [
            m * g * w[0] - m * self.l * hs * ad * ad,
            m * g * self.l * u[0] + m * self.l * hs * td * td,
        ];
        if hinge {
            let d = self.deflection(theta, a);
            let dd = self.s * (ad - td);
            let t = self.s * (self.k * d + self.c * dd);
            q[0] += t;
            q[1] -= t;
        }
        let bz = [-theta.sin(), theta.cos()];
        let motors = [
            (thrust[0], [self.params.arm_x, self.params.prop_height]),
            (thrust[1], [-self.params.arm_x, self.params.prop_height]),
        ];
        for (f, b) in motors {
            if f == 0.0 {
                continue;
            }
            let fw = [f * bz[0], f * bz[1]];
            let arm = rotate(theta, [b[0] - self.hip[0], b[1] - self.hip[1]]);
            q[0] += dot(fw, perp(arm));
            q[1] += dot(fw, [-self.l * perp(u)[0], -self.l * perp(u)[1]]);
        }
        q
    }

    /// d(p_z)/dq for a body-frame point.
    fn height_jacobian(&self, theta: f64, a: f64, b: V2) -> V2 {
        let arm = rotate(theta, [b[0] - self.hip[0], b[1] - self.hip[1]]);
        [arm[0], -self.l * a.cos()]
    }

    fn point_world(&self, theta: f64, a: f64, b: V2) -> V2 {
        let c = self.com(theta, a);
        let r = rotate(theta, b);
        [c[0] + r[0], c[1] + r[1]]
    }

    fn kinetic_energy(&self, theta: f64, a: f64, td: f64, ad: f64) -> f64 {
        let m = self.mass_matrix(theta, a);
        0.5 * (m[0][0] * td * td + 2.0 * m[0][1] * td * ad + m[1][1] * ad * ad)
    }
}

fn solve2(m: [[f64; 2]; 2], b: V2) -> V2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ]
}

/// Pin the touching foot to the ceiling and map the free-flight velocity onto
/// the pinned coordinates by conserving generalized momentum.
pub fn attach_pivot(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
    side: LegSide,
    ceiling_z: f64,
    settings: &SwingSettings,
) -> (QuadState, ContactState) {
    let mut s = *state;
    let mut c = contact.clone();
    let i = side.index();
    let foot = to_world(&s, foot_body(params, legs, side, c.hinge_deflections[i]));
    // Snap vertically so the foot sits exactly on the plane.
    s.z += ceiling_z - foot[1];
    let pivot = Pivot {
        x: foot[0],
        z: ceiling_z,
        side,
    };
    let model = Pinned::new(params, legs, &pivot);
    let theta = s.pitch;
    let a = model.leg_angle(theta, c.hinge_deflections[i]);

    let m = params.mass;
    let w = model.w(theta);
    let u = unit(a);
    let jt = [-perp(w)[0], -perp(w)[1]];
    let ja = [-model.l * perp(u)[0], -model.l * perp(u)[1]];
    let v = [s.vx, s.vz];
    let p = [
        m * dot(jt, v) + params.inertia_yy * s.pitch_rate,
        m * dot(ja, v),
    ];
    let mm = model.mass_matrix(theta, a);
    let (td, ad) = match settings.hinge {
        HingeMode::Locked => {
            let ip = mm[0][0] + 2.0 * mm[0][1] + mm[1][1];
            let r = (p[0] + p[1]) / ip;
            (r, r)
        }
        HingeMode::Compliant => {
            let q = solve2(mm, p);
            (q[0], q[1])
        }
    };
    let cv = model.com_velocity(theta, a, td, ad);
    s.vx = cv[0];
    s.vz = cv[1];
    s.pitch_rate = td;
    c.hinge_rates[i] = side.sign() * (ad - td);
    c.fore_pivot = Some(pivot);
    c.phase = ContactPhase::ForeAttached;
    c.rest_timer = 0.0;
    (s, c)
}

/// One step of the pinned swing. Motors keep following `cmd` with their lag.
pub fn swing_step(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
    cmd: &MotorCommand,
    ceiling_z: f64,
    dt: f64,
    settings: &SwingSettings,
) -> Result<(QuadState, ContactState)> {
    if contact.phase != ContactPhase::ForeAttached {
        return Err(Error::InvalidParameter(format!(
            "swing step needs an attached pivot, phase is {:?}",
            contact.phase
        )));
    }
    let pivot = contact
        .fore_pivot
        .ok_or_else(|| Error::StateCorruption("attached without a pivot".into()))?;
    if !state.is_finite() {
        return Err(Error::StateCorruption(format!("non-finite state {state:?}")));
    }
    let model = Pinned::new(params, legs, &pivot);
    let side = pivot.side;
    let ip = side.index();
    let io = side.other().index();
    let mut c = contact.clone();

    let cmd = cmd.clamped(params);
    let thrust = [state.thrust_fore, state.thrust_aft];
    let mut theta = state.pitch;
    let mut a = model.leg_angle(theta, c.hinge_deflections[ip]);
    let mut td = state.pitch_rate;
    let mut ad = td + side.sign() * c.hinge_rates[ip];

    let locked = settings.hinge == HingeMode::Locked;
    let q = model.forces(theta, a, td, ad, thrust, !locked);
    let mm = model.mass_matrix(theta, a);
    let theta_acc;
    if locked {
        let ipv = mm[0][0] + 2.0 * mm[0][1] + mm[1][1];
        theta_acc = (q[0] + q[1]) / ipv;
        td += theta_acc * dt;
        ad = td;
        theta += td * dt;
        a += td * dt;
    } else {
        let acc = solve2(mm, q);
        theta_acc = acc[0];
        td += acc[0] * dt;
        ad += acc[1] * dt;
        theta += td * dt;
        a += ad * dt;
        // Hinge stops on the pivot leg.
        let limit = legs.hinge_limit_rad();
        let d = model.deflection(theta, a);
        if d.abs() > limit {
            let dc = d.clamp(-limit, limit);
            a = model.leg_angle(theta, dc);
            let n = [-model.s, model.s];
            let rel = n[0] * td + n[1] * ad;
            if rel * d > 0.0 {
                let mm = model.mass_matrix(theta, a);
                let minv_n = solve2(mm, n);
                let lam = -(1.0 + settings.stop_restitution) * rel / dot(n, minv_n);
                td += lam * minv_n[0];
                ad += lam * minv_n[1];
            }
        }
    }

    // Hull strikes: velocity impulse plus a mass-weighted position projection.
    for (pt, b) in hull_points(params) {
        let pos = model.point_world(theta, a, b);
        let pen = pos[1] - ceiling_z;
        if pen <= 0.0 {
            continue;
        }
        c.body_or_prop_contact = true;
        if pt.is_propeller() {
            c.prop_contact = true;
        }
        let j = model.height_jacobian(theta, a, b);
        let mm = model.mass_matrix(theta, a);
        if locked {
            let jl = j[0] + j[1];
            let ipv = mm[0][0] + 2.0 * mm[0][1] + mm[1][1];
            theta -= pen / jl;
            a -= pen / jl;
            let vz = jl * td;
            if vz > 0.0 {
                let lam = -(1.0 + settings.restitution) * vz / (jl * jl / ipv);
                td += lam * jl / ipv;
                ad = td;
            }
        } else {
            let minv_j = solve2(mm, j);
            let denom = dot(j, minv_j);
            theta -= pen * minv_j[0] / denom;
            a -= pen * minv_j[1] / denom;
            let vz = j[0] * td + j[1] * ad;
            if vz > 0.0 {
                let lam = -(1.0 + settings.restitution) * vz / denom;
                td += lam * minv_j[0];
                ad += lam * minv_j[1];
            }
        }
    }

    // The other leg hangs free and is driven by the body's rotation.
    let (mut dov, mut rov) = (c.hinge_deflections[io], c.hinge_rates[io]);
    advance_free_hinge(&mut dov, &mut rov, side.other(), legs, theta_acc, dt);
    c.hinge_deflections[io] = dov;
    c.hinge_rates[io] = rov;
    c.hinge_deflections[ip] = model.deflection(theta, a);
    c.hinge_rates[ip] = side.sign() * (ad - td);

    let com = model.com(theta, a);
    let cv = model.com_velocity(theta, a, td, ad);
    let mut next = QuadState {
        x: com[0],
        z: com[1],
        pitch: theta,
        vx: cv[0],
        vz: cv[1],
        pitch_rate: td,
        thrust_fore: motor_response(state.thrust_fore, cmd.thrust_cmd_fore, params, dt),
        thrust_aft: motor_response(state.thrust_aft, cmd.thrust_cmd_aft, params, dt),
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::StateCorruption(format!("swing produced {next:?}")));
    }

    let drift = pivot_drift(&next, &c, legs, params)?;
    if drift > settings.drift_limit {
        return Err(Error::ConstraintDrift { drift });
    }

    let other = to_world(&next, foot_body(params, legs, side.other(), dov));
    if other[1] >= ceiling_z - legs.foot_attach_tolerance {
        c.phase = ContactPhase::FourLegged;
        c.hind_attached = true;
        next.vx = 0.0;
        next.vz = 0.0;
        next.pitch_rate = 0.0;
        c.hinge_rates = [0.0; 2];
        return Ok((next, c));
    }

    let ke = model.kinetic_energy(theta, a, td, ad);
    if ke < settings.rest_energy {
        c.rest_timer += dt;
        if c.rest_timer >= settings.rest_duration - 1e-12 {
            c.phase = ContactPhase::TwoLeggedRest;
        }
    } else {
        c.rest_timer = 0.0;
    }
    Ok((next, c))
}

/// Distance between the pinned foot computed from the body state and the pivot.
pub fn pivot_drift(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
) -> Result<f64> {
    let pivot = contact
        .fore_pivot
        .ok_or_else(|| Error::StateCorruption("no pivot".into()))?;
    let foot = to_world(
        state,
        foot_body(params, legs, pivot.side, contact.hinge_deflections[pivot.side.index()]),
    );
    Ok((foot[0] - pivot.x).hypot(foot[1] - pivot.z))
}

/// Kinetic energy of the pinned system.
pub fn swing_energy(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
) -> Option<f64> {
    let pivot = contact.fore_pivot?;
    let model = Pinned::new(params, legs, &pivot);
    let i = pivot.side.index();
    let a = model.leg_angle(state.pitch, contact.hinge_deflections[i]);
    let ad = state.pitch_rate + pivot.side.sign() * contact.hinge_rates[i];
    Some(model.kinetic_energy(state.pitch, a, state.pitch_rate, ad))
}

/// Swing under the default settings with motors off.
pub fn swing_dynamics(
    state: &QuadState,
    contact: &ContactState,
    legs: &LegConfig,
    params: &QuadParams,
    ceiling_z: f64,
    dt: f64,
) -> Result<(QuadState, ContactState)> {
    swing_step(
        state,
        contact,
        legs,
        params,
        &MotorCommand::off(),
        ceiling_z,
        dt,
        &SwingSettings::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn hanging(params: &QuadParams, legs: &LegConfig, settings: &SwingSettings, pitch: f64) -> (QuadState, ContactState) {
        let mut s = QuadState::at_rest(0.0, 0.0);
        s.pitch = pitch;
        let foot = to_world(&s, foot_body(params, legs, LegSide::Fore, 0.0));
        let c = ContactState::default();
        attach_pivot(&s, &c, legs, params, LegSide::Fore, foot[1], settings)
    }

    #[test]
    fn weightless_rest_stays_put() {
        let p = QuadParams {
            g: 0.0,
            ..QuadParams::default()
        };
        let legs = LegConfig::narrow_long();
        let settings = SwingSettings::default();
        let ceiling = 1.0;
        let mut s = QuadState::at_rest(0.0, 0.0);
        s.pitch = 2.5;
        let foot = to_world(&s, foot_body(&p, &legs, LegSide::Fore, 0.0));
        s.z += ceiling - foot[1];
        let (mut s, mut c) = attach_pivot(&s, &ContactState::default(), &legs, &p, LegSide::Fore, ceiling, &settings);
        let start = s;
        for _ in 0..500 {
            if c.phase != ContactPhase::ForeAttached {
                break;
            }
            (s, c) = swing_step(&s, &c, &legs, &p, &MotorCommand::off(), ceiling, 1e-3, &settings).unwrap();
        }
        assert_eq!(c.phase, ContactPhase::TwoLeggedRest);
        assert!((s.x - start.x).abs() < 1e-12);
        assert!((s.z - start.z).abs() < 1e-12);
        assert!((s.pitch - start.pitch).abs() < 1e-12);
    }

    #[test]
    fn locked_small_swing_matches_pendulum_period() {
        let p = QuadParams::default();
        let legs = LegConfig::narrow_long();
        let settings = SwingSettings {
            hinge: HingeMode::Locked,
            ..SwingSettings::default()
        };
        // Find the hanging equilibrium: CoM straight below the pivot.
        let foot_b = foot_body(&p, &legs, LegSide::Fore, 0.0);
        let eq = PI / 2.0 - foot_b[1].atan2(foot_b[0]);
        let l_com = foot_b[0].hypot(foot_b[1]);
        let ipiv = p.inertia_yy + p.mass * l_com * l_com;
        let expected = 2.0 * PI * (ipiv / (p.mass * p.g * l_com)).sqrt();

        let amp = 0.05;
        let (mut s, mut c) = hanging(&p, &legs, &settings, eq + amp);
        let ceiling = c.fore_pivot.unwrap().z;
        let dt = 1e-4;
        let mut crossings = Vec::new();
        let mut prev = s.pitch - eq;
        for _ in 0..200_000 {
            (s, c) = swing_step(&s, &c, &legs, &p, &MotorCommand::off(), ceiling + 1.0, dt, &settings).unwrap();
            let cur = s.pitch - eq;
            if prev > 0.0 && cur <= 0.0 {
                crossings.push(s.t);
            }
            prev = cur;
            if crossings.len() == 3 {
                break;
            }
        }
        let period = (crossings[2] - crossings[0]) / 2.0;
        assert!((period - expected).abs() / expected < 0.02, "T={period} expected={expected}");
    }

    #[test]
    fn compliant_swing_conserves_energy_without_damping() {
        let p = QuadParams::default();
        let mut legs = LegConfig::narrow_long();
        legs.hinge_zeta = 1e-9;
        // Stiff enough to stay off the stops, which dissipate.
        legs.hinge_k = 20.0;
        legs.hinge_limit = 170.0;
        let settings = SwingSettings::default();
        let (mut s, mut c) = hanging(&p, &legs, &settings, 2.2);
        let ceiling = c.fore_pivot.unwrap().z + 1.0;
        let energy = |s: &QuadState, c: &ContactState| {
            let i = c.hinge_deflections[0];
            swing_energy(s, c, &legs, &p).unwrap()
                + p.mass * p.g * s.z
                + 0.5 * legs.stiffness_si() * i * i
        };
        let e0 = energy(&s, &c);
        for _ in 0..20_000 {
            (s, c) = swing_step(&s, &c, &legs, &p, &MotorCommand::off(), ceiling, 1e-5, &settings).unwrap();
        }
        let e1 = energy(&s, &c);
        let scale = p.mass * p.g * legs.length_m();
        assert!(((e1 - e0) / scale).abs() < 1e-3, "e0={e0} e1={e1}");
    }

    #[test]
    fn pivot_stays_fixed() {
        let p = QuadParams::default();
        let legs = LegConfig::semi_narrow_long();
        let settings = SwingSettings::default();
        let (mut s, mut c) = hanging(&p, &legs, &settings, 2.0);
        s.pitch_rate = 10.0;
        let ceiling = c.fore_pivot.unwrap().z + 1.0;
        for _ in 0..1000 {
            (s, c) = swing_step(&s, &c, &legs, &p, &MotorCommand::off(), ceiling, 1e-3, &settings).unwrap();
            assert!(pivot_drift(&s, &c, &legs, &p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn wrong_phase_is_rejected() {
        let p = QuadParams::default();
        let legs = LegConfig::narrow_long();
        let s = QuadState::at_rest(0.0, 0.0);
        assert!(swing_dynamics(&s, &ContactState::default(), &legs, &p, 1.0, 1e-3).is_err());
    }
}
