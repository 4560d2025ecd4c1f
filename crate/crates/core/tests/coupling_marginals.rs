//! The coupled bridge must have the exact bridge marginal at every time.

use bridge_kmt::coupling::{Coupler, CouplerConfig, CouplingMode};
use bridge_kmt::density::pmf_exact_convolution;
use bridge_kmt::jump_dist::JumpDistribution;
use std::collections::HashMap;

/// `P(S_t = x | S_n = z)` from exact convolution tables.
fn bridge_marginal(d: &JumpDistribution, n: usize, z: i64, t: usize) -> HashMap<i64, f64> {
    let a = pmf_exact_convolution(d, t).unwrap();
    let b = pmf_exact_convolution(d, n - t).unwrap();
    let total = pmf_exact_convolution(d, n).unwrap().log_pmf(z);
    let mut out = HashMap::new();
    for i in 0..a.len() {
        let x = a.position(i) as i64;
        let p = (a.log_pmf(x) + b.log_pmf(z - x) - total).exp();
        if p > 0.0 {
            out.insert(x, p);
        }
    }
    out
}

fn max_tv(d: &JumpDistribution, n: usize, z: i64, cfg: CouplerConfig, samples: u64) -> f64 {
    let coupler = Coupler::new(d, n, z as f64, cfg).unwrap();
    let paths: Vec<Vec<f64>> = (0..samples).map(|i| coupler.sample(i).unwrap().s_path).collect();
    (1..n)
        .map(|t| {
            let exact = bridge_marginal(d, n, z, t);
            let mut counts: HashMap<i64, f64> = HashMap::new();
            for p in &paths {
                *counts.entry(p[t] as i64).or_default() += 1.0 / samples as f64;
            }
            let mut keys: Vec<i64> = exact.keys().chain(counts.keys()).copied().collect();
            keys.sort();
            keys.dedup();
            keys.iter().map(|k| (exact.get(k).unwrap_or(&0.0) - counts.get(k).unwrap_or(&0.0)).abs()).sum::<f64>() / 2.0
        })
        .fold(0.0, f64::max)
}

#[test]
fn marginals_match_exact_bridge() {
    let laws = [JumpDistribution::bernoulli(0.5).unwrap(), JumpDistribution::uniform_int(-1, 2).unwrap()];
    for d in &laws {
        for n in [2usize, 4, 8] {
            let z = (n as f64 * d.mean()).round() as i64 + (n > 2) as i64;
            for (n_min, mode) in [(1, CouplingMode::PureQuantile), (2, CouplingMode::Truncated)] {
                let cfg = CouplerConfig { n_min, mode, eps3: 0.05, rng_seed: 17, ..Default::default() };
                let tv = max_tv(d, n, z, cfg, 20_000);
                assert!(tv < 0.02, "{} n={n} z={z} n_min={n_min}: TV {tv}", d.name());
            }
        }
    }
}
