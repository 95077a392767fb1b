use serde::{Deserialize, Serialize};

use crate::legs::LandingOutcome;

pub const C0: f64 = 10.0;
pub const C1: f64 = 20.0;
pub const WEIGHTS: [f64; 4] = [0.05, 0.1, 0.2, 0.65];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_d: f64,
    pub r_tau: f64,
    pub r_theta: f64,
    pub r_legs: f64,
    pub penalty_applied: bool,
    pub total: f64,
}

fn clip_ratio(x: f64, cap: f64) -> f64 {
    // 1/0 is +inf, which clips to the cap.
    let inv = 1.0 / x.abs();
    if inv.is_nan() {
        return 0.0;
    }
    inv.clamp(0.0, cap) / cap
}

pub fn r_distance(d_min: f64) -> f64 {
    clip_ratio(d_min, C0)
}

pub fn r_tau(tau_trg: Option<f64>) -> f64 {
    tau_trg.map_or(0.0, |t| clip_ratio(t - 0.2, C1))
}

/// Impact angle term; `impact_deg` is folded into [0, 180].
pub fn r_theta(impact_deg: f64) -> f64 {
    let mut a = impact_deg.abs() % 360.0;
    if a > 180.0 {
        a = 360.0 - a;
    }
    if a < 120.0 {
        a / 120.0
    } else {
        1.0
    }
}

pub fn r_legs(n_legs: u8, body_or_prop_contact: bool) -> f64 {
    let base = match n_legs {
        0 => 0.0,
        1 | 2 => 0.5,
        _ => 1.0,
    };
    if body_or_prop_contact {
        base / 3.0
    } else {
        base
    }
}

pub fn combine(r_d: f64, r_tau: f64, r_theta: f64, r_legs: f64) -> f64 {
    WEIGHTS[0] * r_d + WEIGHTS[1] * r_tau + WEIGHTS[2] * r_theta + WEIGHTS[3] * r_legs
}

pub fn compute_reward(outcome: &LandingOutcome) -> RewardBreakdown {
    let r_d = r_distance(outcome.min_ceiling_distance);
    let rt = r_tau(outcome.trigger_tau);
    let rth = outcome.impact_angle.map_or(0.0, r_theta);
    let rl = r_legs(outcome.n_legs, outcome.body_or_prop_contact);
    RewardBreakdown {
        r_d,
        r_tau: rt,
        r_theta: rth,
        r_legs: rl,
        penalty_applied: outcome.body_or_prop_contact && outcome.n_legs > 0,
        total: combine(r_d, rt, rth, rl),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legs::LandingClass;

    #[test]
    fn table_values() {
        assert_eq!(r_theta(120.0), 1.0);
        assert_eq!(r_theta(60.0), 0.5);
        assert_eq!(r_theta(-170.0), 1.0);
        assert_eq!(r_legs(4, false), 1.0);
        assert_eq!(r_legs(2, false), 0.5);
        assert_eq!(r_legs(0, false), 0.0);
        assert_eq!(r_legs(4, true), 1.0 / 3.0);
        assert_eq!(combine(1.0, 1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn clipped_terms_bounded() {
        assert_eq!(r_distance(0.0), 1.0);
        assert_eq!(r_distance(0.05), 1.0);
        assert!((r_distance(0.2) - 0.5).abs() < 1e-12);
        assert_eq!(r_tau(Some(0.2)), 1.0);
        assert_eq!(r_tau(Some(0.25)), 1.0);
        assert!((r_tau(Some(0.3)) - 0.5).abs() < 1e-12);
        assert_eq!(r_tau(None), 0.0);
    }

    #[test]
    fn missing_trigger_scores_zero_tau() {
        let o = LandingOutcome {
            class: LandingClass::FailureBodyOnly,
            n_legs: 0,
            body_or_prop_contact: true,
            impact_angle: None,
            min_ceiling_distance: 0.03,
            trigger_tau: None,
        };
        let r = compute_reward(&o);
        assert_eq!(r.r_tau, 0.0);
        assert_eq!(r.r_theta, 0.0);
        assert!(!r.penalty_applied);
        assert!((r.total - 0.05).abs() < 1e-12);
    }
}
