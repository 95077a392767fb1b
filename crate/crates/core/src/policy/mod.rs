//! Two-stage flip policy: a one-class trigger boundary over the sensory space
//! and a regressor for the flip moment.

mod net;
mod normalizer;
mod ocsvm;
mod two_stage;

pub use net::{elu, train_action, ActionNet, TrainReport, TrainSettings, LAYER_SIZES};
pub use normalizer::{policy_features, Normalizer};
pub use ocsvm::{
    rbf, solve_dual, train_trigger, DualSolution, OcSvmModel, OcSvmSettings, DEFAULT_GAMMA,
    DEFAULT_NU, KKT_TOLERANCE,
};
pub use two_stage::{
    act, default_hyperparams, run_two_stage, train_policy, trigger_decision, LandingRecord,
    PolicyHyperparams, PolicyTrainReport, Provenance, TrainedPolicy, TriggerDecision,
    TriggerRuntime,
};
