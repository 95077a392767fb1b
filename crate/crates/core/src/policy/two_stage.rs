use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{train_action, ActionNet, TrainReport, TrainSettings};
use super::normalizer::{policy_features, Normalizer};
use super::ocsvm::{solve_dual, OcSvmModel, OcSvmSettings};
use crate::error::{Error, Result};
use crate::learn::{randomize_inertia, DomainRandomization};
use crate::legs::LandingOutcome;
use crate::rollout::{simulate_rollout, FlipPolicy, RolloutConfig, TriggerRecord};
use crate::sensing::SensoryState;
use crate::sim::{ApproachCondition, QuadParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerDecision {
    Fire,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyHyperparams {
    pub svm: OcSvmSettings,
    pub net: TrainSettings,
    /// Upper clamp on the commanded moment (N·mm).
    pub a_rot_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_sha256: String,
    pub n_pairs: usize,
    pub hyperparams: PolicyHyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicy {
    pub normalizer: Normalizer,
    pub trigger: OcSvmModel,
    pub action: ActionNet,
    pub success_threshold: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrainReport {
    pub n_pairs: usize,
    pub svm_iterations: usize,
    pub svm_violation: f64,
    pub n_support: usize,
    pub action: TrainReport,
}

pub fn default_hyperparams(params: &QuadParams) -> PolicyHyperparams {
    PolicyHyperparams {
        svm: OcSvmSettings::default(),
        net: TrainSettings::default(),
        a_rot_max: params.a_rot_max(),
    }
}

/// Fit the normalizer, trigger boundary and action network on one pair set.
pub fn train_policy(
    pairs: &[(SensoryState, f64)],
    hyper: &PolicyHyperparams,
    success_threshold: f64,
    dataset_sha256: &str,
) -> Result<(TrainedPolicy, PolicyTrainReport)> {
    if pairs.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "policy training needs at least 10 pairs, got {}",
            pairs.len()
        )));
    }
    let raw: Vec<[f64; 3]> = pairs.iter().map(|(s, _)| policy_features(s)).collect();
    let normalizer = Normalizer::fit(&raw)?;
    let xs: Vec<[f64; 3]> = raw.iter().map(|x| normalizer.apply(x)).collect();
    let targets: Vec<f64> = pairs.iter().map(|(_, a)| *a).collect();

    let sol = solve_dual(&xs, &hyper.svm)?;
    let mut trigger = OcSvmModel {
        support_vectors: Vec::new(),
        alphas: Vec::new(),
        rho: sol.rho,
        gamma: hyper.svm.gamma,
        nu: hyper.svm.nu,
    };
    for (x, a) in xs.iter().zip(&sol.alphas) {
        if *a > 0.0 {
            trigger.support_vectors.push(*x);
            trigger.alphas.push(*a);
        }
    }
    let (action, rep) = train_action(&xs, &targets, &hyper.net)?;
    let report = PolicyTrainReport {
        n_pairs: pairs.len(),
        svm_iterations: sol.iterations,
        svm_violation: sol.violation,
        n_support: trigger.alphas.len(),
        action: rep,
    };
    let policy = TrainedPolicy {
        normalizer,
        trigger,
        action,
        success_threshold,
        provenance: Provenance {
            dataset_sha256: dataset_sha256.to_string(),
            n_pairs: pairs.len(),
            hyperparams: *hyper,
        },
    };
    Ok((policy, report))
}

pub fn trigger_decision(model: &OcSvmModel, norm: &Normalizer, s: &SensoryState) -> TriggerDecision {
    if model.decision(&norm.state(s)) >= 0.0 {
        TriggerDecision::Fire
    } else {
        TriggerDecision::Hold
    }
}

/// Flip moment for a trigger state, clamped to `[0, a_rot_max]`.
pub fn act(net: &ActionNet, norm: &Normalizer, s: &SensoryState, a_rot_max: f64) -> f64 {
    net.predict(&norm.state(s)).clamp(0.0, a_rot_max)
}

impl TrainedPolicy {
    pub fn decide(&self, s: &SensoryState) -> TriggerDecision {
        trigger_decision(&self.trigger, &self.normalizer, s)
    }

    pub fn act(&self, s: &SensoryState) -> f64 {
        act(&self.action, &self.normalizer, s, self.provenance.hyperparams.a_rot_max)
    }

    pub fn validate(&self) -> Result<()> {
        self.normalizer.validate()?;
        self.trigger.validate()?;
        self.action.validate()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::json::write_file(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let p: Self = crate::json::read_file(path, "trained policy JSON")?;
        p.validate()?;
        Ok(p)
    }
}

/// Online two-stage controller: fires on the first tick inside the trigger
/// region and latches the moment computed from that tick.
#[derive(Debug, Clone)]
pub struct TriggerRuntime<'a> {
    policy: &'a TrainedPolicy,
    latched: Option<(SensoryState, f64)>,
}

impl<'a> TriggerRuntime<'a> {
    pub fn new(policy: &'a TrainedPolicy) -> Self {
        Self { policy, latched: None }
    }

    pub fn latched(&self) -> Option<(SensoryState, f64)> {
        self.latched
    }
}

impl FlipPolicy for TriggerRuntime<'_> {
    fn decide(&mut self, obs: &SensoryState) -> Option<f64> {
        if let Some((_, a)) = self.latched {
            return Some(a);
        }
        if self.policy.decide(obs) == TriggerDecision::Fire {
            let a = self.policy.act(obs);
            self.latched = Some((*obs, a));
            return Some(a);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandingRecord {
    pub condition: ApproachCondition,
    pub seed: u64,
    pub outcome: LandingOutcome,
    pub trigger: Option<TriggerRecord>,
    /// The approach never entered the trigger region.
    pub no_trigger: bool,
}

/// Fly one approach under the two-stage policy.
pub fn run_two_stage(
    cond: &ApproachCondition,
    cfg: &RolloutConfig,
    randomization: &DomainRandomization,
    policy: &TrainedPolicy,
    seed: u64,
) -> Result<LandingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = randomize_inertia(&cfg.params, randomization, &mut rng);
    let mut runtime = TriggerRuntime::new(policy);
    let r = simulate_rollout(cond, cfg, &params, &mut runtime, &mut rng)?;
    Ok(LandingRecord {
        condition: *cond,
        seed,
        outcome: r.outcome,
        trigger: r.trigger,
        no_trigger: r.trigger.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_pairs(n: usize) -> Vec<(SensoryState, f64)> {
        (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                let v = ((i * 7) % n) as f64 / n as f64;
                let s = SensoryState {
                    tau: 0.18 + 0.06 * u,
                    theta_x: 1.0 + 2.0 * v,
                    d_ceil: 0.3 + 0.3 * u,
                    stamp: 0.0,
                };
                (s, 3.0 + 4.0 * u + v)
            })
            .collect()
    }

    fn trained() -> TrainedPolicy {
        let hyper = default_hyperparams(&QuadParams::default());
        train_policy(&synthetic_pairs(60), &hyper, 0.8, "00").unwrap().0
    }

    #[test]
    fn far_hover_state_holds() {
        let p = trained();
        let far = SensoryState { tau: 5.0, theta_x: 0.0, d_ceil: 2.0, stamp: 0.0 };
        assert_eq!(p.decide(&far), TriggerDecision::Hold);
        assert_eq!(p.decide(&far), p.decide(&far));
    }

    #[test]
    fn clamp_floor() {
        let mut p = trained();
        let mut net = ActionNet::zeros(&p.action.sizes);
        net.biases[2][0] = -1.0;
        p.action = net;
        let s = synthetic_pairs(60)[5].0;
        assert_eq!(p.act(&s), 0.0);
    }

    #[test]
    fn runtime_latches_first_fire() {
        let p = trained();
        let mut rt = TriggerRuntime::new(&p);
        let inside = synthetic_pairs(60)[30].0;
        assert_eq!(p.decide(&inside), TriggerDecision::Fire);
        let first = rt.decide(&inside).unwrap();
        let far = SensoryState { tau: 5.0, theta_x: 0.0, d_ceil: 2.0, stamp: 0.0 };
        assert_eq!(rt.decide(&far), Some(first));
        assert_eq!(rt.latched().unwrap().0, inside);
    }

    #[test]
    fn hover_never_triggers() {
        let p = trained();
        let cfg = RolloutConfig {
            max_time: 2.0,
            ..RolloutConfig::default()
        };
        let r = run_two_stage(&ApproachCondition::hover(3.0), &cfg, &DomainRandomization::off(), &p, 1).unwrap();
        assert!(r.no_trigger);
    }

    #[test]
    fn save_load_reproduces_outputs() {
        let p = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        p.save(&path).unwrap();
        let q = TrainedPolicy::load(&path).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn too_few_pairs() {
        let hyper = default_hyperparams(&QuadParams::default());
        assert!(train_policy(&synthetic_pairs(60)[..5], &hyper, 0.8, "").is_err());
    }
}
