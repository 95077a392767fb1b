use serde::{Deserialize, Serialize};

use super::contact::{ContactPhase, ContactState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LandingClass {
    OptimalFourLeg,
    SubOptimalFourLegContact,
    SubOptimalTwoLeg,
    FailureBodyOnly,
}

impl LandingClass {
    pub const ALL: [LandingClass; 4] = [
        LandingClass::OptimalFourLeg,
        LandingClass::SubOptimalFourLegContact,
        LandingClass::SubOptimalTwoLeg,
        LandingClass::FailureBodyOnly,
    ];

    pub fn is_success(self) -> bool {
        self == LandingClass::OptimalFourLeg
    }

    pub fn is_suboptimal(self) -> bool {
        matches!(
            self,
            LandingClass::SubOptimalFourLegContact | LandingClass::SubOptimalTwoLeg
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            LandingClass::OptimalFourLeg => "optimal",
            LandingClass::SubOptimalFourLegContact => "four-leg-contact",
            LandingClass::SubOptimalTwoLeg => "two-leg",
            LandingClass::FailureBodyOnly => "failure",
        }
    }
}

/// Quantities gathered over a rollout that the outcome reports.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RolloutSummary {
    /// Smallest centre-of-mass distance to the ceiling (m).
    pub min_ceiling_distance: f64,
    pub trigger_tau: Option<f64>,
    /// The rollout reached a terminal phase before the timeout.
    pub settled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandingOutcome {
    pub class: LandingClass,
    pub n_legs: u8,
    pub body_or_prop_contact: bool,
    /// |pitch| at first foot contact, degrees; absent if no foot touched.
    pub impact_angle: Option<f64>,
    pub min_ceiling_distance: f64,
    pub trigger_tau: Option<f64>,
}

pub fn classify_landing(final_state: &ContactState, history: &RolloutSummary) -> LandingOutcome {
    let body = final_state.body_or_prop_contact;
    let class = match final_state.phase {
        ContactPhase::FourLegged if !body => LandingClass::OptimalFourLeg,
        ContactPhase::FourLegged => LandingClass::SubOptimalFourLegContact,
        // A pinned swing still going at timeout counts as hanging by two legs.
        ContactPhase::TwoLeggedRest | ContactPhase::ForeAttached => LandingClass::SubOptimalTwoLeg,
        ContactPhase::Free | ContactPhase::BodyContact => LandingClass::FailureBodyOnly,
    };
    LandingOutcome {
        class,
        n_legs: final_state.n_legs(),
        body_or_prop_contact: body,
        impact_angle: final_state.first_contact_pitch.map(f64::abs),
        min_ceiling_distance: history.min_ceiling_distance,
        trigger_tau: history.trigger_tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(phase: ContactPhase, body: bool) -> ContactState {
        ContactState {
            phase,
            body_or_prop_contact: body,
            ..ContactState::default()
        }
    }

    #[test]
    fn fig_cases() {
        let h = RolloutSummary::default();
        assert_eq!(
            classify_landing(&with(ContactPhase::FourLegged, false), &h).class,
            LandingClass::OptimalFourLeg
        );
        assert_eq!(
            classify_landing(&with(ContactPhase::FourLegged, true), &h).class,
            LandingClass::SubOptimalFourLegContact
        );
        assert_eq!(
            classify_landing(&with(ContactPhase::TwoLeggedRest, false), &h).class,
            LandingClass::SubOptimalTwoLeg
        );
        let fail = classify_landing(&with(ContactPhase::BodyContact, true), &h);
        assert_eq!(fail.class, LandingClass::FailureBodyOnly);
        assert_eq!(fail.n_legs, 0);
    }

    #[test]
    fn timeout_mapping() {
        let h = RolloutSummary::default();
        assert_eq!(
            classify_landing(&with(ContactPhase::Free, false), &h).class,
            LandingClass::FailureBodyOnly
        );
        assert_eq!(
            classify_landing(&with(ContactPhase::ForeAttached, false), &h).class,
            LandingClass::SubOptimalTwoLeg
        );
    }

    #[test]
    fn impact_angle_is_magnitude() {
        let mut c = with(ContactPhase::FourLegged, false);
        c.first_contact_pitch = Some(-170.0);
        let o = classify_landing(&c, &RolloutSummary::default());
        assert_eq!(o.impact_angle, Some(170.0));
    }
}
