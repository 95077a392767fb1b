use serde::{Deserialize, Serialize};

use super::params::{ApproachCondition, MotorCommand, QuadParams, QuadState};

/// Gains for the cascaded planar tracking controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingGains {
    /// Velocity error gain (1/s).
    pub k_vel: f64,
    /// Cross-track position gain (1/s²).
    pub k_cross: f64,
    /// Position gain used when station-keeping (1/s²).
    pub k_hold: f64,
    /// Attitude stiffness (1/s²).
    pub k_pitch: f64,
    /// Attitude damping (1/s).
    pub k_rate: f64,
    /// Largest commanded tilt from vertical (deg).
    pub max_tilt_deg: f64,
    /// Largest commanded acceleration magnitude (m/s²).
    pub max_accel: f64,
    /// Target motor response time after lag inversion (s); 0 disables it.
    pub motor_lead: f64,
}

impl Default for TrackingGains {
    fn default() -> Self {
        Self {
            k_vel: 7.0,
            k_cross: 6.0,
            k_hold: 4.0,
            k_pitch: 400.0,
            k_rate: 28.0,
            max_tilt_deg: 40.0,
            max_accel: 14.0,
            motor_lead: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOutput {
    pub cmd: MotorCommand,
    pub desired_pitch: f64,
    /// A channel command hit a limit.
    pub saturated: bool,
}

/// Tracks the ray that leaves `origin` at the commanded speed and angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingController {
    pub gains: TrackingGains,
    pub origin: (f64, f64),
}

impl Default for TrackingController {
    fn default() -> Self {
        Self {
            gains: TrackingGains::default(),
            origin: (0.0, 0.0),
        }
    }
}

impl TrackingController {
    pub fn new(gains: TrackingGains, origin: (f64, f64)) -> Self {
        Self { gains, origin }
    }

    pub fn command(
        &self,
        state: &QuadState,
        target: &ApproachCondition,
        params: &QuadParams,
    ) -> TrackingOutput {
        let g = &self.gains;
        let ex = state.x - self.origin.0;
        let ez = state.z - self.origin.1;

        let (mut ax, mut az) = if target.is_hover() {
            (
                -g.k_hold * ex - g.k_vel * state.vx,
                -g.k_hold * ez - g.k_vel * state.vz,
            )
        } else {
            let (vx_cmd, vz_cmd) = target.velocity();
            let a = target.angle.to_radians();
            let (dx, dz) = (a.cos(), a.sin());
            let along = ex * dx + ez * dz;
            let (cx, cz) = (ex - along * dx, ez - along * dz);
            (
                g.k_vel * (vx_cmd - state.vx) - g.k_cross * cx,
                g.k_vel * (vz_cmd - state.vz) - g.k_cross * cz,
            )
        };

        let norm = ax.hypot(az);
        if norm > g.max_accel {
            ax *= g.max_accel / norm;
            az *= g.max_accel / norm;
        }
        az += params.g;
        // Thrust must keep pointing upward within the tilt limit.
        let max_tan = g.max_tilt_deg.to_radians().tan();
        az = az.max(0.2 * params.g);
        ax = ax.clamp(-az * max_tan, az * max_tan);

        // Body z is (-sin θ, cos θ); align it with the desired acceleration.
        let desired_pitch = (-ax).atan2(az);
        let thrust = params.mass * ax.hypot(az);

        let err = wrap_angle(desired_pitch - state.pitch);
        let moment = params.inertia_yy * (g.k_pitch * err - g.k_rate * state.pitch_rate);

        let half = thrust / 2.0;
        let diff = moment / (2.0 * params.arm_x);
        let raw = MotorCommand {
            thrust_cmd_fore: half + diff,
            thrust_cmd_aft: half - diff,
        };
        let wanted = allocate(raw, params);
        let cmd = if g.motor_lead > 0.0 {
            MotorCommand {
                thrust_cmd_fore: lead(state.thrust_fore, wanted.thrust_cmd_fore, g.motor_lead, params),
                thrust_cmd_aft: lead(state.thrust_aft, wanted.thrust_cmd_aft, g.motor_lead, params),
            }
            .clamped(params)
        } else {
            wanted
        };
        TrackingOutput {
            saturated: wanted != raw,
            cmd,
            desired_pitch,
        }
    }
}

/// Clamp into the motor box while preserving the differential (moment) part.
fn allocate(raw: MotorCommand, params: &QuadParams) -> MotorCommand {
    let max = params.channel_max_thrust();
    let diff = 0.5 * (raw.thrust_cmd_fore - raw.thrust_cmd_aft);
    let mut mean = 0.5 * (raw.thrust_cmd_fore + raw.thrust_cmd_aft);
    let diff = diff.clamp(-max / 2.0, max / 2.0);
    mean = mean.clamp(diff.abs(), max - diff.abs());
    MotorCommand {
        thrust_cmd_fore: mean + diff,
        thrust_cmd_aft: mean - diff,
    }
    .clamped(params)
}

/// Invert the first-order motor lag so the output approaches `wanted` with time constant `lead_tau`.
fn lead(current: f64, wanted: f64, lead_tau: f64, params: &QuadParams) -> f64 {
    let tau = if wanted >= current {
        params.tau_up
    } else {
        params.tau_down
    };
    current + (tau / lead_tau).max(1.0) * (wanted - current)
}

/// Command from the default controller tracking a ray that starts at the origin.
pub fn track_trajectory(
    state: &QuadState,
    target: &ApproachCondition,
    params: &QuadParams,
) -> MotorCommand {
    TrackingController::default()
        .command(state, target, params)
        .cmd
}

pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}
