//! Planar quadrotor dynamics: first-order motors, a cascaded tracking
//! controller for constant-velocity approaches, and the flip command.
//!
//! The model lives in the vertical x–z plane. Pitch is the only attitude
//! degree of freedom; the fore and aft motor pairs are lumped into one
//! channel each.

mod controller;
mod dynamics;
mod flip;
mod params;

pub use controller::{
    track_trajectory, wrap_angle, TrackingController, TrackingGains, TrackingOutput,
};
pub use dynamics::{body_wrench, motor_response, step_dynamics, DT};
pub use flip::{execute_flip, FlipCommand};
pub use params::{
    ApproachCondition, MotorCommand, QuadParams, QuadState, DEFAULT_CEILING_HEIGHT,
};
