//! Fly one approach with a fixed trigger threshold and flip moment.
//!
//! cargo run --example simulate_rollout -- [speed m/s] [angle deg]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use perchlab::learn::PolicyParams;
use perchlab::rollout::{simulate_rollout, RolloutConfig, ThresholdPolicy};
use perchlab::sim::ApproachCondition;

fn main() -> perchlab::error::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("number"));
    let speed = args.next().unwrap_or(2.5);
    let angle = args.next().unwrap_or(40.0);
    let cond = ApproachCondition::new(speed, angle, 2.1)?;
    let cfg = RolloutConfig {
        record_telemetry: true,
        ..RolloutConfig::default()
    };
    let mut policy = ThresholdPolicy(PolicyParams { tau_cr: 0.22, a_rot: 6.0 });
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let r = simulate_rollout(&cond, &cfg, &cfg.params, &mut policy, &mut rng)?;

    println!("{speed} m/s at {angle} deg, legs {}", cfg.legs.name);
    if let Some(t) = r.trigger {
        println!("fired at t = {:.3} s, sensed tau {:.3} s", t.time, t.sensed.tau);
    }
    println!("outcome {:?}, legs on ceiling {}", r.outcome.class, r.outcome.n_legs);
    if let Some(a) = r.outcome.impact_angle {
        println!("impact pitch {a:.1} deg");
    }
    println!("{} telemetry rows", r.telemetry.len());
    Ok(())
}
