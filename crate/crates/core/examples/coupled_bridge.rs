//! One coupled pair of paths: the lattice bridge and the Brownian bridge
//! built from the same Gaussians.

use bridge_kmt::coupling::{Coupler, CouplerConfig, CouplingMode};
use bridge_kmt::jump_dist::JumpDistribution;

fn main() -> bridge_kmt::Result<()> {
    let d = JumpDistribution::bernoulli(0.5)?;
    let (n, z) = (1024usize, 512.0);
    for mode in [CouplingMode::PureQuantile, CouplingMode::Truncated] {
        let cfg = CouplerConfig { mode, rng_seed: 2024, ..Default::default() };
        let c = Coupler::new(&d, n, z, cfg)?;
        let s = c.sample(0)?;
        println!("{mode}: Δ = {:.4}, σ_p = {}, {} Gaussians, W at the root = {:?}", s.delta, s.sigma_p, s.xi_count, s.midpoint_w);
        for t in (0..=n).step_by(128) {
            let linear = t as f64 / n as f64 * z;
            println!("  t = {t:>4}  S_t − tz/n = {:>7.2}  𝔅_t = {:>7.3}", s.s_path[t] - linear, s.b_path[t]);
        }
    }
    Ok(())
}
