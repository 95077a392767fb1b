//! Fit the two-stage policy to the shipped sample dataset.

use std::path::Path;

use perchlab::harness::{dataset_sha256, filter_training_set, read_dataset};
use perchlab::policy::{default_hyperparams, train_policy, TriggerDecision};
use perchlab::sim::QuadParams;

fn main() -> perchlab::error::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample/dataset.jsonl");
    let rows = read_dataset(&path)?;
    let pairs = filter_training_set(&rows, 0.8)?;
    let hyper = default_hyperparams(&QuadParams::default());
    let (policy, report) = train_policy(&pairs, &hyper, 0.8, &dataset_sha256(&rows)?)?;
    let fire = pairs.iter().filter(|(s, _)| policy.decide(s) == TriggerDecision::Fire).count();
    println!("{} training pairs, {fire} inside the trigger region", pairs.len());
    println!(
        "action net RMSE {:.2e} N·mm (target std {:.3})",
        report.action.rmse, report.action.target_std
    );
    for (s, a) in pairs.iter().take(5) {
        println!("tau {:.3}  theta_x {:+.3}  d {:.3}  ->  {:.2} (learned {a:.2})", s.tau, s.theta_x, s.d_ceil, policy.act(s));
    }
    Ok(())
}
