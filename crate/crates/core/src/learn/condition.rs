use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ephe::{rollout_rng, run_ephe, EpheConfig, EpisodeRecord, PolicyParams, RolloutRecord, EVAL_EPISODE};
use super::randomize::{randomize_inertia, DomainRandomization};
use super::reward::compute_reward;
use crate::error::Result;
use crate::legs::{LandingClass, LandingOutcome};
use crate::rollout::{simulate_rollout, NeverFire, RolloutConfig, ThresholdPolicy};
use crate::sensing::SensoryState;
use crate::sim::ApproachCondition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct LearnConfig {
    pub ephe: EpheConfig,
    pub rollout: RolloutConfig,
    pub randomization: DomainRandomization,
}

/// Count of each landing class, in `LandingClass::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeHistogram {
    pub optimal: usize,
    pub four_leg_contact: usize,
    pub two_leg: usize,
    pub failure: usize,
}

impl OutcomeHistogram {
    pub fn add(&mut self, class: LandingClass) {
        match class {
            LandingClass::OptimalFourLeg => self.optimal += 1,
            LandingClass::SubOptimalFourLegContact => self.four_leg_contact += 1,
            LandingClass::SubOptimalTwoLeg => self.two_leg += 1,
            LandingClass::FailureBodyOnly => self.failure += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.optimal + self.four_leg_contact + self.two_leg + self.failure
    }

    pub fn success_rate(&self) -> f64 {
        ratio(self.optimal, self.total())
    }

    pub fn suboptimal_rate(&self) -> f64 {
        ratio(self.four_leg_contact + self.two_leg, self.total())
    }
}

fn ratio(a: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        a as f64 / n as f64
    }
}

/// Compact per-rollout log entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutBrief {
    pub outcome: LandingOutcome,
    pub trigger: Option<SensoryState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: ApproachCondition,
    pub legs: String,
    pub seed: u64,
    pub feasible: bool,
    pub converged: bool,
    /// Final distribution mean.
    pub policy: PolicyParams,
    /// Mean sensed state at trigger over the evaluation rollouts that fired.
    pub trigger_state: Option<SensoryState>,
    pub success_rate: f64,
    pub suboptimal_rate: f64,
    pub histogram: OutcomeHistogram,
    pub eval_no_trigger: usize,
    pub curve: Vec<EpisodeRecord>,
    pub rollouts: Vec<RolloutRecord<RolloutBrief>>,
}

impl ConditionResult {
    pub fn n_rollouts(&self) -> usize {
        self.rollouts.len() + self.histogram.total()
    }
}

/// Optimize the trigger threshold and flip moment for one approach condition,
/// then evaluate the converged mean.
pub fn learn_condition(
    cond: &ApproachCondition,
    cfg: &LearnConfig,
    seed: u64,
) -> Result<ConditionResult> {
    let rcfg = &cfg.rollout;
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = simulate_rollout(cond, rcfg, &rcfg.params, &mut NeverFire, &mut probe_rng)?;
    let feasible = probe.tracking_ok == Some(true);
    if !feasible {
        return Ok(ConditionResult {
            condition: *cond,
            legs: rcfg.legs.name.clone(),
            seed,
            feasible,
            converged: false,
            policy: cfg.ephe.initial.mu,
            trigger_state: None,
            success_rate: 0.0,
            suboptimal_rate: 0.0,
            histogram: OutcomeHistogram::default(),
            eval_no_trigger: 0,
            curve: Vec::new(),
            rollouts: Vec::new(),
        });
    }

    let mut failure = None;
    let trace = run_ephe(&cfg.ephe, seed, |p, rng| {
        let params = randomize_inertia(&rcfg.params, &cfg.randomization, rng);
        match simulate_rollout(cond, rcfg, &params, &mut ThresholdPolicy(p), rng) {
            Ok(r) => (
                compute_reward(&r.outcome).total,
                RolloutBrief {
                    outcome: r.outcome,
                    trigger: r.trigger.map(|t| t.sensed),
                },
            ),
            Err(e) => {
                failure.get_or_insert(e);
                (0.0, RolloutBrief {
                    outcome: r_failed(),
                    trigger: None,
                })
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mu = trace.final_dist.mu;
    let mut hist = OutcomeHistogram::default();
    let mut no_trigger = 0;
    let mut fired: Vec<SensoryState> = Vec::new();
    for i in 0..cfg.ephe.eval_rollouts {
        let mut rng = rollout_rng(seed, EVAL_EPISODE, i as u64);
        let params = randomize_inertia(&rcfg.params, &cfg.randomization, &mut rng);
        let r = simulate_rollout(cond, rcfg, &params, &mut ThresholdPolicy(mu), &mut rng)?;
        // A threshold that never fires still flew into the ceiling; it counts.
        hist.add(r.outcome.class);
        match r.trigger {
            Some(t) => fired.push(t.sensed),
            None => no_trigger += 1,
        }
    }

    Ok(ConditionResult {
        condition: *cond,
        legs: rcfg.legs.name.clone(),
        seed,
        feasible,
        converged: trace.converged,
        policy: mu,
        trigger_state: mean_state(&fired),
        success_rate: hist.success_rate(),
        suboptimal_rate: hist.suboptimal_rate(),
        histogram: hist,
        eval_no_trigger: no_trigger,
        curve: trace.episodes,
        rollouts: trace.rollouts,
    })
}

fn r_failed() -> LandingOutcome {
    LandingOutcome {
        class: LandingClass::FailureBodyOnly,
        n_legs: 0,
        body_or_prop_contact: false,
        impact_angle: None,
        min_ceiling_distance: 0.0,
        trigger_tau: None,
    }
}

fn mean_state(states: &[SensoryState]) -> Option<SensoryState> {
    if states.is_empty() {
        return None;
    }
    let n = states.len() as f64;
    let mut m = SensoryState {
        tau: 0.0,
        theta_x: 0.0,
        d_ceil: 0.0,
        stamp: 0.0,
    };
    for s in states {
        m.tau += s.tau / n;
        m.theta_x += s.theta_x / n;
        m.d_ceil += s.d_ceil / n;
        m.stamp += s.stamp / n;
    }
    Some(m)
}
