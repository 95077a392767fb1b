use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::TAU_CLAMP;

/// Trigger threshold and flip moment sampled for one rollout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// s
    pub tau_cr: f64,
    /// N·mm
    pub a_rot: f64,
}

impl PolicyParams {
    pub fn as_array(&self) -> [f64; 2] {
        [self.tau_cr, self.a_rot]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self {
            tau_cr: a[0],
            a_rot: a[1],
        }
    }

    /// Project onto the valid set.
    pub fn clamped(self) -> Self {
        Self {
            tau_cr: self.tau_cr.clamp(1e-3, TAU_CLAMP),
            a_rot: self.a_rot.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchDistribution {
    pub mu: PolicyParams,
    pub sigma: PolicyParams,
}

impl SearchDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolicyParams {
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        PolicyParams {
            tau_cr: self.mu.tau_cr + self.sigma.tau_cr * z0,
            a_rot: self.mu.a_rot + self.sigma.a_rot * z1,
        }
        .clamped()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpheConfig {
    pub rollouts_per_episode: usize,
    pub elites: usize,
    pub max_episodes: usize,
    pub sigma_floor: PolicyParams,
    pub convergence_eps: PolicyParams,
    pub initial: SearchDistribution,
    pub eval_rollouts: usize,
}

impl Default for EpheConfig {
    fn default() -> Self {
        Self {
            rollouts_per_episode: 8,
            elites: 3,
            max_episodes: 15,
            sigma_floor: PolicyParams {
                tau_cr: 0.005,
                a_rot: 0.1,
            },
            convergence_eps: PolicyParams {
                tau_cr: 0.01,
                a_rot: 0.2,
            },
            initial: SearchDistribution {
                mu: PolicyParams {
                    tau_cr: 0.25,
                    a_rot: 4.0,
                },
                sigma: PolicyParams {
                    tau_cr: 0.1,
                    a_rot: 2.0,
                },
            },
            eval_rollouts: 10,
        }
    }
}

impl EpheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.elites < 2 || self.elites > self.rollouts_per_episode {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= elites ({}) <= rollouts_per_episode ({})",
                self.elites, self.rollouts_per_episode
            )));
        }
        if self.max_episodes == 0 {
            return Err(Error::InvalidParameter("max_episodes must be >= 1".into()));
        }
        let floor = self.sigma_floor.as_array();
        if floor.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter("sigma_floor must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateResult {
    pub dist: SearchDistribution,
    /// Every elite scored zero, so nothing moved.
    pub stagnant: bool,
}

/// Reward-weighted elite mean and spread. Negative rewards weigh as zero.
pub fn ephe_update(
    dist: &SearchDistribution,
    elites: &[(PolicyParams, f64)],
    sigma_floor: PolicyParams,
) -> UpdateResult {
    let total: f64 = elites.iter().map(|(_, r)| r.max(0.0)).sum();
    if !(total > 0.0) {
        return UpdateResult {
            dist: *dist,
            stagnant: true,
        };
    }
    let mut mu = [0.0; 2];
    for (p, r) in elites {
        let w = r.max(0.0) / total;
        let a = p.as_array();
        mu[0] += w * a[0];
        mu[1] += w * a[1];
    }
    let mut var = [0.0; 2];
    for (p, r) in elites {
        let w = r.max(0.0) / total;
        let a = p.as_array();
        var[0] += w * (a[0] - mu[0]).powi(2);
        var[1] += w * (a[1] - mu[1]).powi(2);
    }
    let floor = sigma_floor.as_array();
    UpdateResult {
        dist: SearchDistribution {
            mu: PolicyParams::from_array(mu),
            sigma: PolicyParams::from_array([
                var[0].sqrt().max(floor[0]),
                var[1].sqrt().max(floor[1]),
            ]),
        },
        stagnant: false,
    }
}

/// Per-rollout RNG: one ChaCha stream per (episode, rollout).
pub fn rollout_rng(seed: u64, episode: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((episode << 20) | index);
    rng
}

/// Stream id used for the final evaluation rollouts.
pub const EVAL_EPISODE: u64 = (1 << 40) - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub dist: SearchDistribution,
    pub best_reward: f64,
    pub stagnant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord<T> {
    pub episode: usize,
    pub index: usize,
    pub params: PolicyParams,
    pub reward: f64,
    pub detail: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpheTrace<T> {
    /// Distribution before each episode, plus the final one.
    pub episodes: Vec<EpisodeRecord>,
    pub rollouts: Vec<RolloutRecord<T>>,
    pub final_dist: SearchDistribution,
    pub converged: bool,
}

impl<T> EpheTrace<T> {
    pub fn learning_curve_csv(&self) -> String {
        learning_curve_csv(&self.episodes)
    }
}

/// `episode,mu_tau,mu_arot,sigma_tau,sigma_arot,best_reward`
pub fn learning_curve_csv(episodes: &[EpisodeRecord]) -> String {
    use crate::telemetry::fmt_g;
    let mut out = String::from("episode,mu_tau,mu_arot,sigma_tau,sigma_arot,best_reward\n");
    for e in episodes {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.episode,
            fmt_g(e.dist.mu.tau_cr),
            fmt_g(e.dist.mu.a_rot),
            fmt_g(e.dist.sigma.tau_cr),
            fmt_g(e.dist.sigma.a_rot),
            fmt_g(e.best_reward),
        ));
    }
    out
}

/// Run the optimizer against `evaluate`, which scores one parameter sample
/// with its own RNG and returns the reward plus anything worth logging.
pub fn run_ephe<T, F>(config: &EpheConfig, seed: u64, mut evaluate: F) -> Result<EpheTrace<T>>
where
    F: FnMut(PolicyParams, &mut ChaCha8Rng) -> (f64, T),
{
    config.validate()?;
    let mut dist = config.initial;
    let mut episodes = Vec::new();
    let mut rollouts = Vec::new();
    let mut converged = false;
    for ep in 0..config.max_episodes {
        let mut scored = Vec::with_capacity(config.rollouts_per_episode);
        for idx in 0..config.rollouts_per_episode {
            let mut rng = rollout_rng(seed, ep as u64, idx as u64);
            let p = dist.sample(&mut rng);
            let (reward, detail) = evaluate(p, &mut rng);
            scored.push((idx, p, reward));
            rollouts.push(RolloutRecord {
                episode: ep,
                index: idx,
                params: p,
                reward,
                detail,
            });
        }
        scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        let elites: Vec<(PolicyParams, f64)> = scored
            .iter()
            .take(config.elites)
            .map(|&(_, p, r)| (p, r))
            .collect();
        let best = scored.first().map_or(0.0, |s| s.2);
        let upd = ephe_update(&dist, &elites, config.sigma_floor);
        episodes.push(EpisodeRecord {
            episode: ep,
            dist,
            best_reward: best,
            stagnant: upd.stagnant,
        });
        dist = upd.dist;
        if dist.sigma.tau_cr < config.convergence_eps.tau_cr
            && dist.sigma.a_rot < config.convergence_eps.a_rot
        {
            converged = true;
            break;
        }
    }
    // Closing row: the final distribution and the best reward seen overall.
    episodes.push(EpisodeRecord {
        episode: episodes.len(),
        dist,
        best_reward: best_overall(&rollouts),
        stagnant: false,
    });
    Ok(EpheTrace {
        episodes,
        rollouts,
        final_dist: dist,
        converged,
    })
}

fn best_overall<T>(rollouts: &[RolloutRecord<T>]) -> f64 {
    rollouts
        .iter()
        .map(|r| r.reward)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Quadratic bandit with its optimum at (0.2 s, 5 N·mm).
pub fn synthetic_bandit(p: PolicyParams) -> f64 {
    1.0 - (p.tau_cr - 0.2).powi(2) - (p.a_rot - 5.0).powi(2) / 25.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floor() -> PolicyParams {
        EpheConfig::default().sigma_floor
    }

    #[test]
    fn weighted_mean_example() {
        let d = EpheConfig::default().initial;
        let el = [1.0, 2.0, 3.0].map(|v| (PolicyParams { tau_cr: v, a_rot: v }, 0.0));
        let el = [(el[0].0, 1.0), (el[1].0, 1.0), (el[2].0, 2.0)];
        let u = ephe_update(&d, &el, floor());
        assert!((u.dist.mu.tau_cr - 2.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_elites_hit_floor() {
        let d = EpheConfig::default().initial;
        let p = PolicyParams {
            tau_cr: 0.18,
            a_rot: 6.0,
        };
        let u = ephe_update(&d, &[(p, 0.5), (p, 0.7), (p, 0.2)], floor());
        assert!((u.dist.mu.tau_cr - 0.18).abs() < 1e-15);
        assert_eq!(u.dist.sigma, floor());
    }

    #[test]
    fn zero_rewards_leave_distribution() {
        let d = EpheConfig::default().initial;
        let p = PolicyParams {
            tau_cr: 0.1,
            a_rot: 1.0,
        };
        let u = ephe_update(&d, &[(p, 0.0), (p, 0.0)], floor());
        assert!(u.stagnant);
        assert_eq!(u.dist, d);
    }

    #[test]
    fn reward_scale_invariance() {
        let d = EpheConfig::default().initial;
        let el = [
            (PolicyParams { tau_cr: 0.1, a_rot: 3.0 }, 0.2),
            (PolicyParams { tau_cr: 0.3, a_rot: 5.0 }, 0.5),
            (PolicyParams { tau_cr: 0.2, a_rot: 9.0 }, 0.9),
        ];
        let scaled = el.map(|(p, r)| (p, r * 7.5));
        let a = ephe_update(&d, &el, floor());
        let b = ephe_update(&d, &scaled, floor());
        assert!((a.dist.mu.tau_cr - b.dist.mu.tau_cr).abs() < 1e-12);
        assert!((a.dist.mu.a_rot - b.dist.mu.a_rot).abs() < 1e-12);
    }

    #[test]
    fn bandit_sigma_shrinks_and_a_rot_found() {
        let cfg = EpheConfig::default();
        let mut first = Vec::new();
        let mut last = Vec::new();
        for seed in 0..20 {
            let t = run_ephe(&cfg, seed, |p, _| (synthetic_bandit(p), ())).unwrap();
            first.push(t.episodes[1].dist.sigma.a_rot);
            last.push(t.final_dist.sigma.a_rot);
            assert!((t.final_dist.mu.a_rot - 5.0).abs() < 1.0, "seed {seed}");
        }
        first.sort_by(f64::total_cmp);
        last.sort_by(f64::total_cmp);
        assert!(last[10] < first[10]);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = EpheConfig::default();
        let a = run_ephe(&cfg, 9, |p, _| (synthetic_bandit(p), ())).unwrap();
        let b = run_ephe(&cfg, 9, |p, _| (synthetic_bandit(p), ())).unwrap();
        assert_eq!(a.final_dist, b.final_dist);
    }
}
