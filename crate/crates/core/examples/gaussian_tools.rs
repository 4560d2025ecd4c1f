//! Normal quantiles deep in the tails and Brownian bridge covariances.

use bridge_kmt::gaussian::{self, BridgeCovariance};

fn main() -> bridge_kmt::Result<()> {
    for p in [1e-300, 1e-20, 1e-3, 0.5, 0.975] {
        let x = gaussian::quantile(p)?;
        println!("Φ⁻¹({p:e}) = {x:.12}, Φ back = {:e}", gaussian::cdf(x));
    }
    println!("upper tail: Φ⁻¹(1 − 1e-200) = {:.10}", gaussian::quantile_upper(1e-200)?);
    for t in [0.5f64, 2.0, 8.0] {
        println!("Mills ratio at {t}: {:.10}", gaussian::mills_ratio(t));
    }
    let cov = BridgeCovariance::new(64.0, 0.5);
    for s in [16.0f64, 32.0, 48.0] {
        println!("Cov(𝔅_{s}, 𝔅_48) = {}", cov.cov(s, 48.0)?);
    }
    Ok(())
}
