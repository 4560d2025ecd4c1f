//! Empirical survival of Δ beyond M₀ log n and its exponential rate.

use bridge_kmt::harness::{run_tails, ExperimentKind, ExperimentSpec};
use serde_json::json;

fn main() -> bridge_kmt::Result<()> {
    let spec = ExperimentSpec::new(ExperimentKind::Tails, json!({"family": "uniform_int", "params": {"lo": -1, "hi": 1}}))
        .with_n_list(vec![512])
        .with_samples(20_000)
        .with_seed(3);
    let t = run_tails(&spec)?;
    println!("n = {}, M₀ = {:.4}, λ = {:?}, R² = {:?}", t.n, t.m0, t.lambda, t.r2);
    for r in t.rows.iter().step_by(4) {
        println!("  x = {:>6.3}  P = {:.5}{}", r.x, r.survival, if r.in_window { "  *" } else { "" });
    }
    Ok(())
}
