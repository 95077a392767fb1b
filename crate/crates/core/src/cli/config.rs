//! One JSON config schema per subcommand. Relative paths inside a config are
//! resolved against the config file's directory.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::harness::SweepSpec;
use crate::learn::{DomainRandomization, PolicyParams};
use crate::legs::LegConfig;
use crate::policy::PolicyHyperparams;
use crate::rollout::RolloutConfig;
use crate::sim::ApproachCondition;
use crate::sysid::{Direction, PendulumSetup, PWM_MAX};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegsChoice {
    Preset(String),
    Custom(LegConfig),
}

impl Default for LegsChoice {
    fn default() -> Self {
        Self::Preset("semi_narrow_long".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    /// Fire at `tau_cr` with moment `a_rot`.
    Fixed(PolicyParams),
    /// Path to a trained two-stage policy.
    Trained(PathBuf),
}

fn randomization_off() -> DomainRandomization {
    DomainRandomization::off()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub condition: ApproachCondition,
    #[serde(default)]
    pub legs: LegsChoice,
    pub policy: PolicyChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "randomization_off")]
    pub randomization: DomainRandomization,
    #[serde(default)]
    pub rollout: RolloutConfig,
}

fn default_threshold() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dataset: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Defaults derive from the nominal vehicle.
    #[serde(default)]
    pub hyperparams: Option<PolicyHyperparams>,
}

fn default_n_eval() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub policy: PathBuf,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
}

fn default_title() -> String {
    "Optimal landing rate".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    pub dataset: PathBuf,
    #[serde(default = "default_title")]
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    pub gyro_csv: PathBuf,
    pub setup: PendulumSetup,
}

fn default_pwm_max() -> f64 {
    PWM_MAX
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmQuery {
    pub thrust_gf: f64,
    pub v_battery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub thrust_stand_csv: PathBuf,
    #[serde(default = "default_pwm_max")]
    pub pwm_max: f64,
    /// Compensated PWM is reported for each query.
    #[serde(default)]
    pub queries: Vec<PwmQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorConfig {
    pub tachometer_csv: PathBuf,
    /// Thrust per rpm² in the output thrust unit.
    pub thrust_per_rpm2: f64,
    pub direction: Direction,
}
