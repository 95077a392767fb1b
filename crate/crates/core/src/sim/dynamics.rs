use super::params::{MotorCommand, QuadParams, QuadState};
use crate::error::{Error, Result};

/// Physics step used throughout (s).
pub const DT: f64 = 0.001;

/// Advance one first-order motor toward its command.
///
/// The exponential update is exact for a command held over the step; the
/// time constant switches on direction.
pub fn motor_response(current: f64, command: f64, params: &QuadParams, dt: f64) -> f64 {
    let tau = if command >= current {
        params.tau_up
    } else {
        params.tau_down
    };
    let next = command + (current - command) * (-dt / tau).exp();
    next.clamp(0.0, params.channel_max_thrust())
}

/// Net planar force and pitch moment from the current motor outputs.
pub fn body_wrench(state: &QuadState, params: &QuadParams) -> (f64, f64, f64) {
    let thrust = state.thrust_fore + state.thrust_aft;
    let (s, c) = state.pitch.sin_cos();
    let fx = -thrust * s;
    let fz = thrust * c - params.mass * params.g;
    let moment = (state.thrust_fore - state.thrust_aft) * params.arm_x;
    (fx, fz, moment)
}

/// One free-flight step.
///
/// Velocities are updated first from the current wrench; positions then move
/// with the mean of old and new velocity, which is exact whenever the
/// acceleration is constant across the step (ballistic flight, hover).
/// Motors respond after the wrench is sampled.
pub fn step_dynamics(
    state: &QuadState,
    cmd: &MotorCommand,
    params: &QuadParams,
    dt: f64,
) -> Result<QuadState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be > 0 (got {dt})")));
    }
    if !state.is_finite() {
        return Err(Error::StateCorruption(format!("non-finite state {state:?}")));
    }
    let cmd = cmd.clamped(params);
    let (fx, fz, moment) = body_wrench(state, params);

    let vx = state.vx + fx / params.mass * dt;
    let vz = state.vz + fz / params.mass * dt;
    let pitch_rate = state.pitch_rate + moment / params.inertia_yy * dt;

    let next = QuadState {
        x: state.x + 0.5 * (state.vx + vx) * dt,
        z: state.z + 0.5 * (state.vz + vz) * dt,
        pitch: state.pitch + 0.5 * (state.pitch_rate + pitch_rate) * dt,
        vx,
        vz,
        pitch_rate,
        thrust_fore: motor_response(state.thrust_fore, cmd.thrust_cmd_fore, params, dt),
        thrust_aft: motor_response(state.thrust_aft, cmd.thrust_cmd_aft, params, dt),
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::StateCorruption(format!("integration produced {next:?}")));
    }
    Ok(next)
}
