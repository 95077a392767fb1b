//! Optimize the trigger threshold and flip moment for one approach.

use perchlab::learn::{learn_condition, LearnConfig};
use perchlab::sim::ApproachCondition;

fn main() -> perchlab::error::Result<()> {
    let cond = ApproachCondition::new(3.0, 45.0, 2.1)?;
    let res = learn_condition(&cond, &LearnConfig::default(), 7)?;
    for ep in &res.curve {
        println!(
            "episode {:>2}: mu = ({:.3} s, {:.2} N·mm), best reward {:.3}",
            ep.episode, ep.dist.mu.tau_cr, ep.dist.mu.a_rot, ep.best_reward
        );
    }
    println!(
        "converged {}, policy ({:.3} s, {:.2} N·mm), success {:.0}%",
        res.converged,
        res.policy.tau_cr,
        res.policy.a_rot,
        res.success_rate * 100.0
    );
    Ok(())
}
