use super::params::{MotorCommand, QuadParams};

/// Flip command derived from a requested rotational moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipCommand {
    pub cmd: MotorCommand,
    /// The request exceeded what the fore channel can deliver.
    pub clamped: bool,
}

/// Cut the aft channel and drive the fore channel so that, once the aft
/// thrust has decayed, the pitch moment equals `a_rot` (N·mm).
pub fn execute_flip(a_rot: f64, params: &QuadParams) -> FlipCommand {
    let a_rot = if a_rot.is_finite() { a_rot.max(0.0) } else { 0.0 };
    let wanted = a_rot * 1e-3 / params.arm_x;
    let max = params.channel_max_thrust();
    FlipCommand {
        cmd: MotorCommand {
            thrust_cmd_fore: wanted.min(max),
            thrust_cmd_aft: 0.0,
        },
        clamped: wanted > max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dynamics::{body_wrench, step_dynamics, DT};
    use crate::sim::params::QuadState;

    #[test]
    fn zero_action_cuts_both() {
        let p = QuadParams::default();
        let f = execute_flip(0.0, &p);
        assert_eq!(f.cmd, MotorCommand::off());
        assert!(!f.clamped);
    }

    #[test]
    fn saturation_boundary_is_exact() {
        let p = QuadParams::default();
        let a = p.arm_x * p.channel_max_thrust() * 1e3;
        let f = execute_flip(a, &p);
        assert!((f.cmd.thrust_cmd_fore - p.channel_max_thrust()).abs() < 1e-15);
        assert!(!f.clamped);
        let over = execute_flip(a * 1.5, &p);
        assert_eq!(over.cmd.thrust_cmd_fore, p.channel_max_thrust());
        assert!(over.clamped);
    }

    #[test]
    fn settled_moment_matches_request() {
        let p = QuadParams::default();
        let a_rot = 5.0;
        let flip = execute_flip(a_rot, &p);
        let mut s = QuadState::hover(0.0, 0.0, &p);
        for _ in 0..3000 {
            s = step_dynamics(&s, &flip.cmd, &p, DT).unwrap();
        }
        let (_, _, moment) = body_wrench(&s, &p);
        assert!((moment - a_rot * 1e-3).abs() / (a_rot * 1e-3) < 0.02);
    }
}
