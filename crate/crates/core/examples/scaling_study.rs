//! Median coupling error across n, next to what √n growth would give.

use bridge_kmt::harness::{run_scaling, ExperimentKind, ExperimentSpec};
use serde_json::json;

fn main() -> bridge_kmt::Result<()> {
    let spec = ExperimentSpec::new(ExperimentKind::Scaling, json!({"family": "bernoulli", "params": {"p": 0.5}}))
        .with_n_list((6..=12).map(|k| 1usize << k).collect())
        .with_samples(500)
        .with_seed(7);
    let r = run_scaling(&spec)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>13}", "n", "median", "mean", "q95", "log E e^{aΔ}");
    for row in &r.rows {
        println!("{:>6} {:>9.4} {:>9.4} {:>9.4} {:>8.4} ± {:.4}", row.n, row.delta_median, row.delta_mean, row.delta_q95, row.log_mean_exp, row.log_mean_exp_se);
    }
    if let Some(f) = r.fit {
        println!("median ≈ {:.3} + {:.3} log n (R² {:.3}); residual RMS / range = {:.3}", f.a0, f.b0, f.r2, f.rms_over_range);
        println!("median ratio {:.2} against √n ratio {:.2}", f.median_ratio, f.sqrt_n_ratio);
    }
    Ok(())
}
