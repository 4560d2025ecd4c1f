//! Runs the tail and moment checks on a few built-in laws and prints the
//! status of each one.

use bridge_kmt::harness::analyze;
use bridge_kmt::jump_dist::{CheckConfig, JumpDistribution};

fn main() -> bridge_kmt::Result<()> {
    let laws = [
        JumpDistribution::bernoulli(0.3)?,
        JumpDistribution::geometric(0.5)?,
        JumpDistribution::exponential(1.0)?,
        JumpDistribution::log_gamma(2.0)?,
        JumpDistribution::counterexample_spiky(),
    ];
    for d in &laws {
        let r = analyze(d, &CheckConfig::default())?;
        println!("{} (mean {:.4}, variance {:.4}, log-concave {})", r.family, r.mean, r.variance, r.log_concave);
        for c in &r.checks {
            println!("  {:<3} {:<14} {}", c.id, format!("{:?}", c.status), c.detail);
        }
    }
    Ok(())
}
