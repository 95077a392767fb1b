use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{derive_seed, with_pool, SweepRow, SweepSpec};
use crate::error::Result;
use crate::legs::LandingClass;
use crate::policy::{run_two_stage, TrainedPolicy};
use crate::sim::ApproachCondition;

/// Success statistics for one (speed, angle) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCell {
    pub speed: f64,
    pub angle_deg: f64,
    pub success_rate: f64,
    pub suboptimal_rate: f64,
    /// Landings counted in the rates.
    pub n: usize,
}

/// Pool the evaluation histograms of all repeats of each cell.
pub fn aggregate_rows(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<PolarCell> {
    let mut out = Vec::new();
    for &speed in &spec.speeds {
        for &angle in &spec.angles {
            let mut opt = 0;
            let mut sub = 0;
            let mut n = 0;
            for r in rows
                .iter()
                .filter(|r| r.condition.speed == speed && r.condition.angle == angle)
            {
                let h = &r.histogram;
                opt += h.optimal;
                sub += h.four_leg_contact + h.two_leg;
                n += h.total();
            }
            out.push(PolarCell {
                speed,
                angle_deg: angle,
                success_rate: rate(opt, n),
                suboptimal_rate: rate(sub, n),
                n,
            });
        }
    }
    out
}

fn rate(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub speed: f64,
    pub angle_deg: f64,
    pub n_eval: usize,
    pub optimal: usize,
    pub suboptimal: usize,
    pub failure: usize,
    pub no_trigger: usize,
    /// Optimal landings over runs that triggered.
    pub success_rate: f64,
    pub suboptimal_rate: f64,
}

impl GridCell {
    /// Every run stayed outside the trigger region.
    pub fn never_triggered(&self) -> bool {
        self.no_trigger == self.n_eval
    }

    pub fn polar(&self) -> PolarCell {
        PolarCell {
            speed: self.speed,
            angle_deg: self.angle_deg,
            success_rate: self.success_rate,
            suboptimal_rate: self.suboptimal_rate,
            n: self.n_eval - self.no_trigger,
        }
    }
}

const EVAL_SALT: u64 = 0x5EED_E7A1;

/// Fly the two-stage policy `n_eval` times per (speed, angle) cell.
pub fn evaluate_policy_grid(
    policy: &TrainedPolicy,
    spec: &SweepSpec,
    n_eval: usize,
    jobs: Option<usize>,
) -> Result<Vec<GridCell>> {
    spec.validate()?;
    policy.validate()?;
    let cfg = spec.learn_config();
    let mut conds = Vec::new();
    for &s in &spec.speeds {
        for &a in &spec.angles {
            conds.push(ApproachCondition::new(s, a, spec.ceiling_height)?);
        }
    }
    let base = spec.seed ^ EVAL_SALT;
    let cells: Vec<Result<GridCell>> = with_pool(jobs, || {
        conds
            .par_iter()
            .enumerate()
            .map(|(ci, cond)| {
                let mut cell = GridCell {
                    speed: cond.speed,
                    angle_deg: cond.angle,
                    n_eval,
                    optimal: 0,
                    suboptimal: 0,
                    failure: 0,
                    no_trigger: 0,
                    success_rate: 0.0,
                    suboptimal_rate: 0.0,
                };
                for k in 0..n_eval {
                    let seed = derive_seed(base, (ci * n_eval + k) as u64);
                    let rec = run_two_stage(cond, &cfg.rollout, &cfg.randomization, policy, seed)?;
                    if rec.no_trigger {
                        cell.no_trigger += 1;
                        continue;
                    }
                    match rec.outcome.class {
                        LandingClass::OptimalFourLeg => cell.optimal += 1,
                        LandingClass::FailureBodyOnly => cell.failure += 1,
                        _ => cell.suboptimal += 1,
                    }
                }
                let fired = n_eval - cell.no_trigger;
                cell.success_rate = rate(cell.optimal, fired);
                cell.suboptimal_rate = rate(cell.suboptimal, fired);
                Ok(cell)
            })
            .collect()
    })?;
    cells.into_iter().collect()
}
