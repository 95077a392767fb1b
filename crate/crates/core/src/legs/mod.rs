//! Landing gear: leg geometry, ceiling contact, the pinned body swing after
//! the first foot sticks, and landing classification.

mod classify;
mod config;
mod contact;
mod geometry;
mod swing;
mod window;

pub use classify::{classify_landing, LandingClass, LandingOutcome, RolloutSummary};
pub use config::{LegConfig, PRESETS};
pub use contact::{advance_free_hinge, resolve_free_contact, ContactPhase, ContactState, Pivot};
pub use geometry::{
    detect_contact, detect_contact_deflected, foot_body, hip_body, hull_points, leg_direction_body,
    point_velocity, rotate, to_world, ContactElement, ContactEvent, ContactHit, HullPoint, LegSide,
};
pub use swing::{
    attach_pivot, pivot_drift, swing_dynamics, swing_energy, swing_step, HingeMode, SwingSettings,
};
pub use window::{foot_margin, impact_window, ImpactWindow};
