//! One landing attempt end to end: tracked approach, sensor-driven trigger,
//! flip, ceiling contact, pinned swing and classification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learn::PolicyParams;
use crate::legs::{
    classify_landing, resolve_free_contact, swing_step, ContactPhase, ContactState, LandingOutcome,
    LegConfig, RolloutSummary, SwingSettings,
};
use crate::sensing::{Sensor, SensorNoise, SensoryState};
use crate::sim::{
    execute_flip, step_dynamics, ApproachCondition, MotorCommand, QuadParams, QuadState,
    TrackingController, TrackingGains, DT,
};
use crate::telemetry::TelemetryRow;

/// Decides, at each fresh sensor reading, whether to flip and with what moment.
pub trait FlipPolicy {
    /// `Some(a_rot)` in N·mm fires the flip. Called only until it fires.
    fn decide(&mut self, obs: &SensoryState) -> Option<f64>;
}

/// Fires once τ drops to the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy(pub PolicyParams);

impl FlipPolicy for ThresholdPolicy {
    fn decide(&mut self, obs: &SensoryState) -> Option<f64> {
        (obs.tau <= self.0.tau_cr).then_some(self.0.a_rot)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeverFire;

impl FlipPolicy for NeverFire {
    fn decide(&mut self, _: &SensoryState) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RolloutConfig {
    pub params: QuadParams,
    pub legs: LegConfig,
    pub gains: TrackingGains,
    pub noise: SensorNoise,
    pub swing: SwingSettings,
    pub dt: f64,
    /// Simulated time allowed after the trigger or first contact (s).
    pub settle_timeout: f64,
    /// Hard cap on rollout length (s).
    pub max_time: f64,
    /// Ceiling distance at which approach tracking is judged (m).
    pub tracking_check_distance: f64,
    pub record_telemetry: bool,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            params: QuadParams::default(),
            legs: LegConfig::semi_narrow_long(),
            gains: TrackingGains::default(),
            noise: SensorNoise::default(),
            swing: SwingSettings::default(),
            dt: DT,
            settle_timeout: 2.0,
            max_time: 10.0,
            tracking_check_distance: 0.5,
            record_telemetry: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub sensed: SensoryState,
    pub a_rot: f64,
    pub time: f64,
    /// Whether `a_rot` exceeded what the fore channel could deliver.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutResult {
    pub outcome: LandingOutcome,
    pub trigger: Option<TriggerRecord>,
    /// Speed and direction were on target when the vehicle neared the ceiling.
    pub tracking_ok: Option<bool>,
    pub settled: bool,
    pub final_state: QuadState,
    pub contact: ContactState,
    pub telemetry: Vec<TelemetryRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Drive {
    Track,
    Flip(MotorCommand),
    Off,
}

/// Fly one rollout with `params` (possibly randomized) from hover at the origin
/// toward a ceiling `cond.ceiling_height` above it.
pub fn simulate_rollout<R: Rng + ?Sized>(
    cond: &ApproachCondition,
    cfg: &RolloutConfig,
    params: &QuadParams,
    policy: &mut dyn FlipPolicy,
    rng: &mut R,
) -> Result<RolloutResult> {
    cond.validate()?;
    params.validate()?;
    cfg.legs.validate()?;
    let ceiling = cond.ceiling_height;
    let dt = cfg.dt;
    let controller = TrackingController::new(cfg.gains, (0.0, 0.0));
    let mut sensor = Sensor::new(cfg.noise);
    let mut s = QuadState::hover(0.0, 0.0, params);
    let mut contact = ContactState::new();
    let mut drive = Drive::Track;
    let mut trigger: Option<TriggerRecord> = None;
    let mut tracking_ok = None;
    let mut end_time = cfg.max_time;
    let mut min_d = f64::INFINITY;
    let mut telemetry = Vec::new();
    let mut settled = false;

    loop {
        let (obs, fresh) = sensor.observe(&s, ceiling, rng);
        if cfg.record_telemetry {
            telemetry.push(TelemetryRow {
                state: s,
                sensed: obs,
            });
        }
        min_d = min_d.min((ceiling - s.z).max(0.0));
        if contact.phase.is_terminal() {
            settled = true;
            break;
        }
        if s.t >= end_time - 1e-9 {
            break;
        }
        if tracking_ok.is_none() && ceiling - s.z <= cfg.tracking_check_distance {
            tracking_ok = Some(on_target(&s, cond));
        }

        let untouched = contact.first_contact_time.is_none() && !contact.body_or_prop_contact;
        if drive == Drive::Track && untouched && fresh {
            if let Some(a_rot) = policy.decide(&obs) {
                let flip = execute_flip(a_rot, params);
                if tracking_ok.is_none() {
                    tracking_ok = Some(on_target(&s, cond));
                }
                trigger = Some(TriggerRecord {
                    sensed: obs,
                    a_rot,
                    time: s.t,
                    clamped: flip.clamped,
                });
                drive = Drive::Flip(flip.cmd);
                end_time = end_time.min(s.t + cfg.settle_timeout);
            }
        }
        let cmd = match drive {
            Drive::Track => controller.command(&s, cond, params).cmd,
            Drive::Flip(c) => c,
            Drive::Off => MotorCommand::off(),
        };

        if contact.phase == ContactPhase::ForeAttached {
            (s, contact) = swing_step(&s, &contact, &cfg.legs, params, &cmd, ceiling, dt, &cfg.swing)?;
        } else {
            let next = step_dynamics(&s, &cmd, params, dt)?;
            let pitch_acc = (next.pitch_rate - s.pitch_rate) / dt;
            (s, contact) = resolve_free_contact(
                &next, &contact, &cfg.legs, params, ceiling, pitch_acc, dt, &cfg.swing,
            );
            let touched = contact.first_contact_time.is_some() || contact.body_or_prop_contact;
            if touched && untouched {
                // The maneuver ends at the first touch; motors are cut.
                drive = Drive::Off;
                end_time = end_time.min(s.t + cfg.settle_timeout);
            }
        }
    }

    let summary = RolloutSummary {
        min_ceiling_distance: min_d,
        trigger_tau: trigger.map(|t| t.sensed.tau),
        settled,
    };
    Ok(RolloutResult {
        outcome: classify_landing(&contact, &summary),
        trigger,
        tracking_ok,
        settled,
        final_state: s,
        contact,
        telemetry,
    })
}

fn on_target(s: &QuadState, cond: &ApproachCondition) -> bool {
    if cond.is_hover() {
        return s.speed() < 0.1;
    }
    let speed_ok = (s.speed() - cond.speed).abs() <= 0.1 * cond.speed;
    let angle_ok = (s.flight_angle_deg() - cond.angle).abs() <= 5.0;
    speed_ok && angle_ok
}
