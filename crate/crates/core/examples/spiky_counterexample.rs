//! The spiky law pins a two-step bridge to a pair of huge, opposite jumps,
//! while ordinary laws spread no wider than their own jumps.

use bridge_kmt::harness::{midpoint_spread, run_counterexample};
use bridge_kmt::jump_dist::JumpDistribution;

fn main() -> bridge_kmt::Result<()> {
    for r in run_counterexample(&[1, 2, 3, 4, 5])? {
        if r.overflow {
            println!("m = {}: spike weights leave the f64 range", r.m);
            continue;
        }
        println!(
            "m = {}, z = {}: spike mass {:.12}, log₁₀ sd {:.3} (floor {:.3})",
            r.m,
            r.z,
            r.spike_mass.unwrap_or(f64::NAN),
            r.log10_conditional_std.unwrap_or(f64::NAN),
            r.log10_std_floor
        );
    }
    for d in [JumpDistribution::bernoulli(0.5)?, JumpDistribution::geometric(0.4)?, JumpDistribution::exponential(2.0)?] {
        for s in midpoint_spread(&d)? {
            println!("{:<12} z = {:>7.3}: sd {:.4} = {:.3} jump sd", s.family, s.z, s.conditional_std, s.ratio);
        }
    }
    Ok(())
}
