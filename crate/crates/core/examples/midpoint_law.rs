//! Law of the walk at the midpoint of a bridge, its quantiles and how far
//! it sits from the matching Gaussian.

use bridge_kmt::density::{midpoint_gaussian_deviation, midpoint_law, Engine};
use bridge_kmt::jump_dist::JumpDistribution;

fn main() -> bridge_kmt::Result<()> {
    let d = JumpDistribution::uniform_int(-2, 3)?;
    let (n, z) = (200usize, 150.0);
    let law = midpoint_law(&d, n, n, z, Engine::Auto)?;
    println!("S_{n} given S_{} = {z}: {} support points, mean {:.4}, sd {:.4}", 2 * n, law.len(), law.mean(), law.std_dev());
    for p in [1e-6, 0.01, 0.25, 0.5, 0.75, 0.99] {
        println!("  lower quantile {p:>8}: {:>6}   upper quantile {p:>8}: {:>6}", law.quantile_lower(p), law.quantile_upper(p));
    }

    let g = JumpDistribution::geometric(0.5)?;
    println!("\ngeometric(1/2), |δ₂| over |x − z/2| ≤ 0.05:");
    for total in [64usize, 256, 1024] {
        let r = midpoint_gaussian_deviation(&g, total, total as f64, 0.05)?;
        println!("  N = {total:>5}: max |δ₂| = {:.4e}, ratio to 1/√N + N w³ = {:.3}", r.max_abs_delta2, r.m_hat);
    }
    Ok(())
}
