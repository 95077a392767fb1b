use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{
    learn_condition, ConditionResult, DomainRandomization, EpheConfig, EpisodeRecord, LearnConfig,
    OutcomeHistogram, PolicyParams,
};
use crate::legs::LegConfig;
use crate::rollout::RolloutConfig;
use crate::sensing::SensoryState;
use crate::sim::{ApproachCondition, DEFAULT_CEILING_HEIGHT};

pub const SPEED_RANGE: (f64, f64) = (1.5, 3.5);
pub const ANGLE_RANGE: (f64, f64) = (30.0, 90.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    /// m/s
    pub speeds: Vec<f64>,
    /// deg above horizontal
    pub angles: Vec<f64>,
    pub repeats: usize,
    pub legs: LegConfig,
    pub randomization: DomainRandomization,
    pub seed: u64,
    /// m above the start point
    pub ceiling_height: f64,
    pub ephe: EpheConfig,
    /// `legs` here is replaced by the sweep's `legs`.
    pub rollout: RolloutConfig,
    /// Lift the default speed and angle bounds.
    pub unrestricted: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self::desk()
    }
}

fn steps(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| ((lo + step * i as f64) * 1e6).round() / 1e6).collect()
}

impl SweepSpec {
    /// 5 speeds × 5 angles × 3 repeats with Semi-Narrow-Long legs.
    pub fn desk() -> Self {
        Self {
            speeds: steps(1.5, 0.5, 5),
            angles: steps(30.0, 15.0, 5),
            repeats: 3,
            legs: LegConfig::semi_narrow_long(),
            randomization: DomainRandomization::default(),
            seed: 0,
            ceiling_height: DEFAULT_CEILING_HEIGHT,
            ephe: EpheConfig::default(),
            rollout: RolloutConfig::default(),
            unrestricted: false,
        }
    }

    /// 0.1 m/s and 3.75° increments over the full envelope: 21 × 17 × 3.
    pub fn full() -> Self {
        Self {
            speeds: steps(1.5, 0.1, 21),
            angles: steps(30.0, 3.75, 17),
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.speeds.is_empty() || self.angles.is_empty() {
            return bad("sweep needs at least one speed and one angle".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if !self.unrestricted {
            let (s0, s1) = SPEED_RANGE;
            let (a0, a1) = ANGLE_RANGE;
            if let Some(s) = self.speeds.iter().find(|s| !(s0..=s1).contains(*s)) {
                return bad(format!("speed {s} outside [{s0}, {s1}] m/s"));
            }
            if let Some(a) = self.angles.iter().find(|a| !(a0..=a1).contains(*a)) {
                return bad(format!("angle {a} outside [{a0}, {a1}] deg"));
            }
        }
        self.legs.validate()?;
        self.ephe.validate()?;
        for &s in &self.speeds {
            for &a in &self.angles {
                ApproachCondition::new(s, a, self.ceiling_height)?;
            }
        }
        Ok(())
    }

    pub fn learn_config(&self) -> LearnConfig {
        let mut rollout = self.rollout.clone();
        rollout.legs = self.legs.clone();
        LearnConfig {
            ephe: self.ephe,
            rollout,
            randomization: self.randomization,
        }
    }

    /// Cells in (speed, angle, repeat) order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.speeds.len() * self.angles.len() * self.repeats);
        for &speed in &self.speeds {
            for &angle in &self.angles {
                for repeat in 0..self.repeats {
                    let index = out.len();
                    out.push(SweepCell {
                        index,
                        speed,
                        angle,
                        repeat,
                        seed: derive_seed(self.seed, index as u64),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub index: usize,
    pub speed: f64,
    pub angle: f64,
    pub repeat: usize,
    pub seed: u64,
}

/// SplitMix64 of the pair, so neighbouring cells get unrelated streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index))
}

/// One optimized condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub condition: ApproachCondition,
    pub repeat: usize,
    pub seed: u64,
    pub legs: String,
    pub feasible: bool,
    pub converged: bool,
    pub policy: PolicyParams,
    pub trigger: Option<SensoryState>,
    pub success_rate: f64,
    pub suboptimal_rate: f64,
    pub histogram: OutcomeHistogram,
    pub eval_no_trigger: usize,
    pub n_rollouts: usize,
}

impl SweepRow {
    fn from_result(cell: &SweepCell, r: &ConditionResult) -> Self {
        Self {
            index: cell.index,
            condition: r.condition,
            repeat: cell.repeat,
            seed: cell.seed,
            legs: r.legs.clone(),
            feasible: r.feasible,
            converged: r.converged,
            policy: r.policy,
            trigger: r.trigger_state,
            success_rate: r.success_rate,
            suboptimal_rate: r.suboptimal_rate,
            histogram: r.histogram,
            eval_no_trigger: r.eval_no_trigger,
            n_rollouts: r.n_rollouts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepDataset {
    pub rows: Vec<SweepRow>,
    /// Learning curve per row, same order.
    pub curves: Vec<Vec<EpisodeRecord>>,
}

impl SweepDataset {
    pub fn total_rollouts(&self) -> usize {
        self.rows.iter().map(|r| r.n_rollouts).sum()
    }
}

/// Run `f` on a pool of `jobs` workers (all cores when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Optimize every cell. Cells run concurrently; results keep cell order.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepDataset> {
    run_cells(spec, &spec.cells(), jobs)
}

/// Optimize a subset of cells, e.g. the ones missing from an earlier run.
pub fn run_cells(spec: &SweepSpec, cells: &[SweepCell], jobs: Option<usize>) -> Result<SweepDataset> {
    run_cells_with(spec, cells, jobs, |_, _, _| Ok(()))
}

/// As [`run_cells`], calling `on_cell` from the worker as each cell finishes.
pub fn run_cells_with<F>(spec: &SweepSpec, cells: &[SweepCell], jobs: Option<usize>, on_cell: F) -> Result<SweepDataset>
where
    F: Fn(&SweepCell, &SweepRow, &[EpisodeRecord]) -> Result<()> + Sync,
{
    spec.validate()?;
    let cfg = spec.learn_config();
    let results: Vec<Result<(SweepRow, Vec<EpisodeRecord>)>> = with_pool(jobs, || {
        cells
            .par_iter()
            .map(|c| {
                let cond = ApproachCondition::new(c.speed, c.angle, spec.ceiling_height)?;
                let r = learn_condition(&cond, &cfg, c.seed)?;
                let row = SweepRow::from_result(c, &r);
                on_cell(c, &row, &r.curve)?;
                Ok((row, r.curve))
            })
            .collect()
    })?;
    let mut out = SweepDataset::default();
    for r in results {
        let (row, curve) = r?;
        out.rows.push(row);
        out.curves.push(curve);
    }
    Ok(out)
}

/// Trigger states and moments from rows whose evaluated optimal-landing rate
/// reaches `threshold`.
pub fn filter_training_set(rows: &[SweepRow], threshold: f64) -> Result<Vec<(SensoryState, f64)>> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("sweep dataset is empty".into()));
    }
    let pairs: Vec<(SensoryState, f64)> = rows
        .iter()
        .filter(|r| r.success_rate >= threshold)
        .filter_map(|r| r.trigger.map(|s| (s, r.policy.a_rot)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyTrainingSet { threshold });
    }
    Ok(pairs)
}
