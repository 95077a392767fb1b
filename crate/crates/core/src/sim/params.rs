use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the planar vehicle.
///
/// Body frame: `x` forward (toward the fore motors), `z` up through the
/// propeller plane. Geometry fields below `g` describe the collision envelope
/// and the hip locations the legs hang from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadParams {
    /// kg
    pub mass: f64,
    /// kg·m², about the pitch axis.
    pub inertia_yy: f64,
    /// Fore/aft motor offset from the centre of mass along body x (m).
    pub arm_x: f64,
    /// Per physical motor (N).
    pub max_thrust_per_motor: f64,
    /// Physical motors lumped into each planar channel (fore pair, aft pair).
    pub motors_per_side: u32,
    /// Spin-up time constant (s).
    pub tau_up: f64,
    /// Spin-down time constant (s).
    pub tau_down: f64,
    /// Half-length of the central body box along body x (m).
    pub body_halfwidth: f64,
    /// Half-height of the central body box along body z (m).
    pub body_halfheight: f64,
    pub prop_radius: f64,
    /// Height of the propeller plane above the centre of mass (m).
    pub prop_height: f64,
    /// Hip (leg hinge) offset along body x (m); legs mount at `±hip_x`.
    pub hip_x: f64,
    /// Hip offset along body z (m), negative below the centre of mass.
    pub hip_z: f64,
    pub g: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            mass: 0.0381,
            inertia_yy: 30.46e-6,
            arm_x: 0.033,
            max_thrust_per_motor: 0.15,
            motors_per_side: 2,
            tau_up: 0.05,
            tau_down: 0.16,
            body_halfwidth: 0.02,
            body_halfheight: 0.01,
            prop_radius: 0.0225,
            prop_height: 0.015,
            hip_x: 0.0325,
            hip_z: -0.008,
            g: 9.81,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("inertia_yy", self.inertia_yy),
            ("arm_x", self.arm_x),
            ("max_thrust_per_motor", self.max_thrust_per_motor),
            ("tau_up", self.tau_up),
            ("tau_down", self.tau_down),
            ("body_halfwidth", self.body_halfwidth),
            ("body_halfheight", self.body_halfheight),
            ("prop_radius", self.prop_radius),
            ("prop_height", self.prop_height),
            ("hip_x", self.hip_x),
            ("g", self.g),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 0 (got {v})"
                )));
            }
        }
        if self.motors_per_side == 0 {
            return Err(Error::InvalidParameter("motors_per_side must be >= 1".into()));
        }
        if self.tau_up >= self.tau_down {
            return Err(Error::InvalidParameter(format!(
                "tau_up ({}) must be < tau_down ({})",
                self.tau_up, self.tau_down
            )));
        }
        if !self.hip_z.is_finite() {
            return Err(Error::InvalidParameter("hip_z must be finite".into()));
        }
        Ok(())
    }

    /// Thrust limit of one planar channel (a fore or aft motor pair), N.
    pub fn channel_max_thrust(&self) -> f64 {
        self.max_thrust_per_motor * f64::from(self.motors_per_side)
    }

    /// Largest pitch moment a single channel can produce, in N·mm.
    pub fn a_rot_max(&self) -> f64 {
        self.arm_x * self.channel_max_thrust() * 1e3
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.g
    }
}

/// Planar rigid-body state plus the two first-order motor outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadState {
    pub x: f64,
    pub z: f64,
    /// 0 upright, positive nose-up (rad).
    pub pitch: f64,
    pub vx: f64,
    pub vz: f64,
    pub pitch_rate: f64,
    pub thrust_fore: f64,
    pub thrust_aft: f64,
    pub t: f64,
}

impl QuadState {
    /// Hovering at `(x, z)` with the motors already spun up to carry the weight.
    pub fn hover(x: f64, z: f64, params: &QuadParams) -> Self {
        let each = params.weight() / 2.0;
        Self {
            x,
            z,
            pitch: 0.0,
            vx: 0.0,
            vz: 0.0,
            pitch_rate: 0.0,
            thrust_fore: each,
            thrust_aft: each,
            t: 0.0,
        }
    }

    /// At rest with motors off.
    pub fn at_rest(x: f64, z: f64) -> Self {
        Self {
            x,
            z,
            pitch: 0.0,
            vx: 0.0,
            vz: 0.0,
            pitch_rate: 0.0,
            thrust_fore: 0.0,
            thrust_aft: 0.0,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.x,
            self.z,
            self.pitch,
            self.vx,
            self.vz,
            self.pitch_rate,
            self.thrust_fore,
            self.thrust_aft,
            self.t,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vz)
    }

    /// Flight-path angle above horizontal, degrees.
    pub fn flight_angle_deg(&self) -> f64 {
        self.vz.atan2(self.vx).to_degrees()
    }

    /// Translational plus rotational kinetic energy and gravitational potential (z datum 0).
    pub fn mechanical_energy(&self, params: &QuadParams) -> f64 {
        0.5 * params.mass * (self.vx * self.vx + self.vz * self.vz)
            + 0.5 * params.inertia_yy * self.pitch_rate * self.pitch_rate
            + params.mass * params.g * self.z
    }
}

/// Constant-velocity ceiling approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachCondition {
    /// m/s
    pub speed: f64,
    /// Degrees above horizontal.
    pub angle: f64,
    /// Ceiling height above the starting hover point (m).
    pub ceiling_height: f64,
}

pub const DEFAULT_CEILING_HEIGHT: f64 = 3.0;

impl ApproachCondition {
    pub fn new(speed: f64, angle: f64, ceiling_height: f64) -> Result<Self> {
        let c = Self {
            speed,
            angle,
            ceiling_height,
        };
        c.validate()?;
        Ok(c)
    }

    /// Station-keeping below the ceiling; the only accepted speed outside `[0.5, 5]`.
    pub fn hover(ceiling_height: f64) -> Self {
        Self {
            speed: 0.0,
            angle: 90.0,
            ceiling_height,
        }
    }

    pub fn is_hover(&self) -> bool {
        self.speed == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.is_hover() || (0.5..=5.0).contains(&self.speed)) {
            return Err(Error::InvalidParameter(format!(
                "approach speed {} outside [0.5, 5.0] m/s",
                self.speed
            )));
        }
        if !(self.angle > 0.0 && self.angle <= 90.0) {
            return Err(Error::InvalidParameter(format!(
                "approach angle {} outside (0, 90] deg",
                self.angle
            )));
        }
        if !(self.ceiling_height.is_finite() && self.ceiling_height > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ceiling_height {} must be > 0",
                self.ceiling_height
            )));
        }
        Ok(())
    }

    pub fn velocity(&self) -> (f64, f64) {
        let a = self.angle.to_radians();
        (self.speed * a.cos(), self.speed * a.sin())
    }
}

/// Thrust commands for the fore and aft channels (N).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorCommand {
    pub thrust_cmd_fore: f64,
    pub thrust_cmd_aft: f64,
}

impl MotorCommand {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn clamped(self, params: &QuadParams) -> Self {
        let max = params.channel_max_thrust();
        Self {
            thrust_cmd_fore: clamp_finite(self.thrust_cmd_fore, max),
            thrust_cmd_aft: clamp_finite(self.thrust_cmd_aft, max),
        }
    }
}

fn clamp_finite(v: f64, max: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, max)
    }
}
