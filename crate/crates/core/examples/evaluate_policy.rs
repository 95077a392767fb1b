//! Fly the shipped trained policy over a small grid of approaches.

use std::path::Path;

use perchlab::harness::{evaluate_policy_grid, SweepSpec};
use perchlab::policy::TrainedPolicy;

fn main() -> perchlab::error::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample/policy.json");
    let policy = TrainedPolicy::load(&path)?;
    let spec = SweepSpec {
        speeds: vec![2.0, 3.0],
        angles: vec![30.0, 45.0, 60.0],
        ..SweepSpec::desk()
    };
    for c in evaluate_policy_grid(&policy, &spec, 10, None)? {
        let note = if c.never_triggered() { "  (never fired)" } else { "" };
        println!(
            "{:.1} m/s {:>4.0} deg  optimal {:>2}  sub-optimal {:>2}  failure {:>2}  no trigger {:>2}{note}",
            c.speed, c.angle_deg, c.optimal, c.suboptimal, c.failure, c.no_trigger
        );
    }
    Ok(())
}
