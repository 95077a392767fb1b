use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{
    BatteryConfig, EvaluateConfig, InertiaConfig, LegsChoice, MotorConfig, PlotConfig, PolicyChoice, PwmQuery,
    SimulateConfig, TrainConfig,
};
use super::{finish, load_config, write_atomic, Cli, OutDir, RunSummary, SysidKind};
use crate::error::{Error, Result};
use crate::harness::{
    aggregate_rows, dataset_jsonl, evaluate_policy_grid, filter_training_set, parse_jsonl, polar_csv, polar_svg,
    run_cells_with, sha256_hex, GridCell, SweepCell, SweepRow, SweepSpec,
};
use crate::learn::{learning_curve_csv, randomize_inertia, EpisodeRecord};
use crate::legs::{LandingOutcome, LegConfig};
use crate::policy::{default_hyperparams, train_policy, PolicyTrainReport, TrainedPolicy, TriggerDecision, TriggerRuntime};
use crate::rollout::{simulate_rollout, FlipPolicy, ThresholdPolicy, TriggerRecord};
use crate::sim::{ApproachCondition, QuadParams};
use crate::sysid::{
    compensate_pwm, estimate_inertia, fit_thrust_voltage, fit_time_constant, read_gyro_csv, read_tachometer_csv,
    read_thrust_stand_csv, BatteryFit, InertiaEstimate, PendulumSetup, PwmCommand, TimeConstantFit,
};
use crate::telemetry::telemetry_csv;

fn read_bytes(path: &Path, expected: &str) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.display().to_string(),
            expected: expected.to_string(),
        },
        _ => Error::Io(e),
    })
}

fn load_rows(path: &Path) -> Result<(Vec<SweepRow>, String)> {
    let bytes = read_bytes(path, "sweep dataset (JSON lines)")?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))?;
    let rows = parse_jsonl(&text)?;
    Ok((rows, sha256_hex(text.as_bytes())))
}

fn load_policy(path: &Path) -> Result<(TrainedPolicy, String)> {
    let bytes = read_bytes(path, "trained policy JSON")?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))?;
    let p: TrainedPolicy = crate::json::from_str(&text)?;
    p.validate()?;
    Ok((p, sha256_hex(text.as_bytes())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub condition: ApproachCondition,
    pub legs: String,
    pub seed: u64,
    pub outcome: LandingOutcome,
    pub trigger: Option<TriggerRecord>,
    pub no_trigger: bool,
    pub tracking_ok: Option<bool>,
    pub settled: bool,
}

pub(super) fn simulate(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config::<SimulateConfig>(cli.config.as_deref(), "simulate", None)?;
    let c = &cfg.value;
    c.condition.validate()?;
    let legs = match &c.legs {
        LegsChoice::Preset(name) => LegConfig::preset(name)?,
        LegsChoice::Custom(l) => l.clone(),
    };
    legs.validate()?;
    let seed = cli.seed.unwrap_or(c.seed);
    let mut inputs = BTreeMap::new();
    let trained = match &c.policy {
        PolicyChoice::Fixed(p) => {
            if !(p.tau_cr > 0.0 && p.a_rot >= 0.0) {
                return Err(Error::Schema {
                    path: "policy.fixed".into(),
                    message: "tau_cr must be positive and a_rot non-negative".into(),
                });
            }
            None
        }
        PolicyChoice::Trained(path) => {
            let (p, sha) = load_policy(&cfg.resolve(path))?;
            inputs.insert("policy".into(), sha);
            Some(p)
        }
    };
    let mut summary = RunSummary::default();
    if cli.dry_run {
        summary.messages.push(format!(
            "simulate: 1 rollout at {} m/s, {} deg with {} legs, seed {seed}",
            c.condition.speed, c.condition.angle, legs.name
        ));
        return Ok(summary);
    }

    let mut rcfg = c.rollout.clone();
    rcfg.legs = legs;
    rcfg.record_telemetry = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = randomize_inertia(&rcfg.params, &c.randomization, &mut rng);
    let mut fixed;
    let mut runtime;
    let policy: &mut dyn FlipPolicy = match (&c.policy, &trained) {
        (PolicyChoice::Fixed(p), _) => {
            fixed = ThresholdPolicy(*p);
            &mut fixed
        }
        (_, Some(t)) => {
            runtime = TriggerRuntime::new(t);
            &mut runtime
        }
        _ => unreachable!("trained policy loaded above"),
    };
    let r = simulate_rollout(&c.condition, &rcfg, &params, policy, &mut rng)?;
    let report = SimulateReport {
        condition: c.condition,
        legs: rcfg.legs.name.clone(),
        seed,
        outcome: r.outcome,
        trigger: r.trigger,
        no_trigger: r.trigger.is_none(),
        tracking_ok: r.tracking_ok,
        settled: r.settled,
    };
    if r.tracking_ok == Some(false) {
        summary.warnings.push("approach was off the commanded speed or angle near the ceiling".into());
    }
    if r.trigger.is_some_and(|t| t.clamped) {
        summary.warnings.push("flip moment exceeded the fore channel limit and was clamped".into());
    }
    let mut out = OutDir::create(&cli.out)?;
    out.write("telemetry.csv", telemetry_csv(&r.telemetry).as_bytes())?;
    out.write_json("outcome.json", &report)?;
    summary.messages.push(format!(
        "outcome: {:?} ({} legs, trigger {})",
        report.outcome.class,
        report.outcome.n_legs,
        report.trigger.map_or("none".to_string(), |t| format!("tau {:.3} s, a_rot {:.2} N·mm", t.sensed.tau, t.a_rot))
    ));
    let manifest = cli.manifest(&cfg, Some(seed), inputs, out);
    finish(cli, manifest, &mut summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellRecord {
    row: SweepRow,
    curve: Vec<EpisodeRecord>,
}

fn cell_file(out: &Path, index: usize) -> std::path::PathBuf {
    out.join("cells").join(format!("cell_{index:04}.json"))
}

/// A finished cell from an earlier run, if its file is intact and matches.
fn completed_cell(out: &Path, cell: &SweepCell) -> Option<CellRecord> {
    let text = std::fs::read_to_string(cell_file(out, cell.index)).ok()?;
    let rec: CellRecord = crate::json::from_str(&text).ok()?;
    (rec.row.index == cell.index && rec.row.seed == cell.seed).then_some(rec)
}

pub(super) fn learn(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config::<SweepSpec>(cli.config.as_deref(), "sweep", Some(SweepSpec::desk()))?;
    let mut spec = cfg.value.clone();
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    spec.validate()?;
    let cells = spec.cells();
    let spec_text = {
        let mut s = crate::json::to_string(&spec)?;
        s.push('\n');
        s
    };
    let spec_path = cli.out.join("spec.json");
    if let Ok(prev) = std::fs::read_to_string(&spec_path) {
        if prev != spec_text {
            return Err(Error::InvalidParameter(format!(
                "{} holds a different sweep; pass a fresh --out or remove it",
                cli.out.display()
            )));
        }
    }
    let done: Vec<Option<CellRecord>> = cells.iter().map(|c| completed_cell(&cli.out, c)).collect();
    let n_done = done.iter().filter(|d| d.is_some()).count();
    let mut summary = RunSummary::default();
    if cli.dry_run {
        summary.messages.push(format!(
            "{} cells ({} speeds x {} angles x {} repeats); {} already complete",
            cells.len(),
            spec.speeds.len(),
            spec.angles.len(),
            spec.repeats,
            n_done
        ));
        return Ok(summary);
    }

    let mut out = OutDir::create(&cli.out)?;
    std::fs::create_dir_all(cli.out.join("cells"))?;
    write_atomic(&spec_path, spec_text.as_bytes())?;
    let todo: Vec<SweepCell> = cells.iter().zip(&done).filter(|(_, d)| d.is_none()).map(|(c, _)| *c).collect();
    let total = cells.len();
    let counter = AtomicUsize::new(n_done);
    let root = cli.out.clone();
    run_cells_with(&spec, &todo, cli.jobs, |cell, row, curve| {
        let rec = CellRecord {
            row: row.clone(),
            curve: curve.to_vec(),
        };
        let mut s = crate::json::to_string(&rec)?;
        s.push('\n');
        write_atomic(&cell_file(&root, cell.index), s.as_bytes())?;
        let k = counter.fetch_add(1, Ordering::SeqCst) + 1;
        eprintln!(
            "[{k}/{total}] cell {} ({} m/s, {} deg, repeat {}): success {:.2}",
            cell.index, cell.speed, cell.angle, cell.repeat, row.success_rate
        );
        Ok(())
    })?;

    let mut rows = Vec::with_capacity(total);
    let mut curves = Vec::with_capacity(total);
    for c in &cells {
        let rec = completed_cell(&cli.out, c)
            .ok_or_else(|| Error::StateCorruption(format!("cell {} output missing after run", c.index)))?;
        rows.push(rec.row);
        curves.push(rec.curve);
    }
    let text = dataset_jsonl(&rows)?;
    out.write("dataset.jsonl", text.as_bytes())?;
    for (row, curve) in rows.iter().zip(&curves) {
        out.write(&format!("curves/cell_{:04}.csv", row.index), learning_curve_csv(curve).as_bytes())?;
    }
    let converged = rows.iter().filter(|r| r.converged).count();
    summary.messages.push(format!(
        "{} cells ({} resumed), {} converged; dataset sha256 {}",
        total,
        n_done,
        converged,
        sha256_hex(text.as_bytes())
    ));
    let manifest = cli.manifest(&cfg, Some(spec.seed), BTreeMap::new(), out);
    finish(cli, manifest, &mut summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrainOutput {
    threshold: f64,
    /// Training states the trigger boundary would hold.
    nu_violation_fraction: f64,
    rmse_over_target_std: f64,
    report: PolicyTrainReport,
}

pub(super) fn train(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config::<TrainConfig>(cli.config.as_deref(), "train", None)?;
    let c = &cfg.value;
    if !(0.0..=1.0).contains(&c.threshold) {
        return Err(Error::Schema {
            path: "threshold".into(),
            message: format!("must lie in [0, 1], got {}", c.threshold),
        });
    }
    let (rows, sha) = load_rows(&cfg.resolve(&c.dataset))?;
    let pairs = filter_training_set(&rows, c.threshold)?;
    let mut hyper = c.hyperparams.unwrap_or_else(|| default_hyperparams(&QuadParams::default()));
    if let Some(s) = cli.seed {
        hyper.net.seed = s;
    }
    let mut summary = RunSummary::default();
    summary.messages.push(format!("{} training pairs at threshold {}", pairs.len(), c.threshold));
    if cli.dry_run {
        return Ok(summary);
    }
    let (policy, report) = train_policy(&pairs, &hyper, c.threshold, &sha)?;
    let held = pairs.iter().filter(|(s, _)| policy.decide(s) == TriggerDecision::Hold).count();
    let nu_violation = held as f64 / pairs.len() as f64;
    let rel = if report.action.target_std > 0.0 {
        report.action.rmse / report.action.target_std
    } else {
        0.0
    };
    summary.messages.push(format!(
        "trigger: {} support vectors, nu-violation fraction {:.3}",
        report.n_support, nu_violation
    ));
    summary.messages.push(format!(
        "action: RMSE {:.4} N·mm ({:.1}% of target std) after {} steps",
        report.action.rmse,
        rel * 100.0,
        report.action.steps
    ));
    let mut out = OutDir::create(&cli.out)?;
    out.write_json("policy.json", &policy)?;
    out.write_json(
        "train_report.json",
        &TrainOutput {
            threshold: c.threshold,
            nu_violation_fraction: nu_violation,
            rmse_over_target_std: rel,
            report,
        },
    )?;
    let inputs = BTreeMap::from([("dataset".to_string(), sha)]);
    let manifest = cli.manifest(&cfg, Some(hyper.net.seed), inputs, out);
    finish(cli, manifest, &mut summary)?;
    Ok(summary)
}

pub(super) fn evaluate(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config::<EvaluateConfig>(cli.config.as_deref(), "evaluate", None)?;
    let c = &cfg.value;
    let mut spec = c.sweep.clone();
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    spec.validate()?;
    if c.n_eval == 0 {
        return Err(Error::Schema {
            path: "n_eval".into(),
            message: "must be at least 1".into(),
        });
    }
    let (policy, sha) = load_policy(&cfg.resolve(&c.policy))?;
    let mut summary = RunSummary::default();
    let n_cells = spec.speeds.len() * spec.angles.len();
    summary.messages.push(format!("{n_cells} cells x {} rollouts", c.n_eval));
    if cli.dry_run {
        return Ok(summary);
    }
    let grid: Vec<GridCell> = evaluate_policy_grid(&policy, &spec, c.n_eval, cli.jobs)?;
    let polar: Vec<_> = grid.iter().map(GridCell::polar).collect();
    let silent = grid.iter().filter(|g| g.never_triggered()).count();
    if silent > 0 {
        summary.warnings.push(format!("{silent} cells never entered the trigger region"));
    }
    let mut out = OutDir::create(&cli.out)?;
    out.write_json("grid.json", &grid)?;
    out.write("polar.csv", polar_csv(&polar).as_bytes())?;
    out.write("polar.svg", polar_svg(&polar, "Two-stage policy: optimal landing rate").as_bytes())?;
    let inputs = BTreeMap::from([("policy".to_string(), sha)]);
    let manifest = cli.manifest(&cfg, Some(spec.seed), inputs, out);
    finish(cli, manifest, &mut summary)?;
    Ok(summary)
}

/// Grid spanned by the speeds and angles present in `rows`.
pub fn spec_from_rows(rows: &[SweepRow]) -> SweepSpec {
    let mut speeds: Vec<f64> = rows.iter().map(|r| r.condition.speed).collect();
    let mut angles: Vec<f64> = rows.iter().map(|r| r.condition.angle).collect();
    for v in [&mut speeds, &mut angles] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    SweepSpec {
        speeds,
        angles,
        ..SweepSpec::desk()
    }
}

pub(super) fn plot(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config::<PlotConfig>(cli.config.as_deref(), "plot", None)?;
    let (rows, sha) = load_rows(&cfg.resolve(&cfg.value.dataset))?;
    if rows.is_empty() {
        return Err(Error::InsufficientData("dataset has no rows".into()));
    }
    let spec = spec_from_rows(&rows);
    let cells = aggregate_rows(&spec, &rows);
    let mut summary = RunSummary::default();
    summary.messages.push(format!("{} rows over {} cells", rows.len(), cells.len()));
    if cli.dry_run {
        return Ok(summary);
    }
    let mut out = OutDir::create(&cli.out)?;
    out.write("polar.csv", polar_csv(&cells).as_bytes())?;
    out.write("polar.svg", polar_svg(&cells, &cfg.value.title).as_bytes())?;
    let inputs = BTreeMap::from([("dataset".to_string(), sha)]);
    let manifest = cli.manifest(&cfg, None, inputs, out);
    finish(cli, manifest, &mut summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InertiaReport {
    setup: PendulumSetup,
    estimate: InertiaEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PwmRow {
    query: PwmQuery,
    command: PwmCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BatteryReport {
    fit: BatteryFit,
    compensation: Vec<PwmRow>,
}

pub(super) fn sysid(cli: &Cli, kind: SysidKind) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    match kind {
        SysidKind::Inertia => {
            let cfg = load_config::<InertiaConfig>(cli.config.as_deref(), "sysid inertia", None)?;
            cfg.value.setup.validate()?;
            let path = cfg.resolve(&cfg.value.gyro_csv);
            let bytes = read_bytes(&path, "gyro CSV `t,rate`")?;
            let trace = read_gyro_csv(&path)?;
            if cli.dry_run {
                summary.messages.push(format!("{} gyro samples", trace.len()));
                return Ok(summary);
            }
            let estimate = estimate_inertia(&cfg.value.setup, &trace)?;
            summary.messages.push(format!(
                "T_avg {:.4} s over {} peaks -> I = {:.4e} kg·m²",
                estimate.period_avg,
                estimate.peak_times.len(),
                estimate.inertia
            ));
            summary.warnings.extend(estimate.warnings.iter().cloned());
            let mut out = OutDir::create(&cli.out)?;
            out.write_json("inertia.json", &InertiaReport { setup: cfg.value.setup, estimate })?;
            let inputs = BTreeMap::from([("gyro_csv".to_string(), sha256_hex(&bytes))]);
            let manifest = cli.manifest(&cfg, None, inputs, out);
            finish(cli, manifest, &mut summary)?;
        }
        SysidKind::Battery => {
            let cfg = load_config::<BatteryConfig>(cli.config.as_deref(), "sysid battery", None)?;
            let c = &cfg.value;
            if !(c.pwm_max > 0.0) {
                return Err(Error::Schema {
                    path: "pwm_max".into(),
                    message: "must be positive".into(),
                });
            }
            let path = cfg.resolve(&c.thrust_stand_csv);
            let bytes = read_bytes(&path, "thrust-stand CSV `pwm,thrust_gf,v_supply,v_onboard`")?;
            let samples = read_thrust_stand_csv(&path, c.pwm_max)?;
            if cli.dry_run {
                summary.messages.push(format!("{} thrust-stand samples", samples.len()));
                return Ok(summary);
            }
            let mut fit = fit_thrust_voltage(&samples)?;
            fit.params.pwm_max = c.pwm_max;
            let mut compensation = Vec::new();
            for q in &c.queries {
                let command = compensate_pwm(&fit.params, q.thrust_gf, q.v_battery)?;
                if command.clamped {
                    summary.warnings.push(format!(
                        "{} gf at {} V saturates the PWM range",
                        q.thrust_gf, q.v_battery
                    ));
                }
                compensation.push(PwmRow { query: *q, command });
            }
            let p = &fit.params;
            summary.messages.push(format!(
                "low: a {:.4} b {:.4} c {:.4} (rms {:.2e}); high: a {:.4} b {:.4} c {:.4} (rms {:.2e})",
                p.low.a, p.low.b, p.low.c, fit.low.residual_rms, p.high.a, p.high.b, p.high.c, fit.high.residual_rms
            ));
            if let Some(d) = fit.discontinuity {
                summary.messages.push(format!("jump at {} gf: {:+.4} V", p.split_gf, d));
            }
            let mut out = OutDir::create(&cli.out)?;
            out.write_json("battery.json", &BatteryReport { fit, compensation })?;
            let inputs = BTreeMap::from([("thrust_stand_csv".to_string(), sha256_hex(&bytes))]);
            let manifest = cli.manifest(&cfg, None, inputs, out);
            finish(cli, manifest, &mut summary)?;
        }
        SysidKind::Motor => {
            let cfg = load_config::<MotorConfig>(cli.config.as_deref(), "sysid motor", None)?;
            let c = &cfg.value;
            if !(c.thrust_per_rpm2 > 0.0) {
                return Err(Error::Schema {
                    path: "thrust_per_rpm2".into(),
                    message: "must be positive".into(),
                });
            }
            let path = cfg.resolve(&c.tachometer_csv);
            let bytes = read_bytes(&path, "tachometer CSV `t,rpm`")?;
            let trace = read_tachometer_csv(&path, c.thrust_per_rpm2)?;
            if cli.dry_run {
                summary.messages.push(format!("{} tachometer samples", trace.len()));
                return Ok(summary);
            }
            let fit: TimeConstantFit = fit_time_constant(&trace, c.direction)?;
            summary.messages.push(format!("tau_{:?} = {:.4} s (R² {:.4})", c.direction, fit.tau, fit.r_squared).to_lowercase());
            summary.warnings.extend(fit.warnings.iter().cloned());
            let mut out = OutDir::create(&cli.out)?;
            out.write_json("motor.json", &fit)?;
            let inputs = BTreeMap::from([("tachometer_csv".to_string(), sha256_hex(&bytes))]);
            let manifest = cli.manifest(&cfg, None, inputs, out);
            finish(cli, manifest, &mut summary)?;
        }
    }
    Ok(summary)
}
