//! Per-condition policy search: the landing reward, the elite-weighted
//! Gaussian search over (τ_cr, a_rot), and mass/inertia randomization.

mod condition;
mod ephe;
mod randomize;
mod reward;

pub use condition::{
    learn_condition, ConditionResult, LearnConfig, OutcomeHistogram, RolloutBrief,
};
pub use ephe::{
    ephe_update, learning_curve_csv, rollout_rng, run_ephe, synthetic_bandit, EpheConfig, EpheTrace, EpisodeRecord,
    PolicyParams, RolloutRecord, SearchDistribution, UpdateResult, EVAL_EPISODE,
};
pub use randomize::{randomize_inertia, DomainRandomization};
pub use reward::{
    combine, compute_reward, r_distance, r_legs, r_tau, r_theta, RewardBreakdown, C0, C1, WEIGHTS,
};
