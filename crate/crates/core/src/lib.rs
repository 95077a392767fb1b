//! Planar inverted-landing laboratory for a small quadrotor perching on a
//! ceiling: flight and contact simulation, per-condition policy search, a
//! two-stage trigger/action policy, sweeps, and system identification helpers.

// NaN must fail parameter checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod json;
pub mod learn;
pub mod legs;
pub mod policy;
pub mod rollout;
pub mod sensing;
pub mod sim;
pub mod sysid;
pub mod telemetry;

pub use error::{Error, Result};
