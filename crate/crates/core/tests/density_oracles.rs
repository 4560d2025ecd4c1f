use bridge_kmt::density::{density_saddle, midpoint_law, pmf_convolution_tilted, pmf_exact_convolution, DensityOracle, Engine};
use bridge_kmt::jump_dist::JumpDistribution;
use statrs::distribution::{Binomial, Discrete, NegativeBinomial};

#[test]
fn binomial_rows_against_statrs() {
    let d = JumpDistribution::bernoulli(0.3).unwrap();
    for n in [5u64, 40, 200] {
        let table = pmf_exact_convolution(&d, n as usize).unwrap();
        let oracle = Binomial::new(0.3, n).unwrap();
        for k in 0..=n {
            let p = oracle.pmf(k);
            if p > 1e-200 {
                assert!((table.log_pmf(k as i64) - p.ln()).abs() < 1e-9 * (1.0 + p.ln().abs()), "n={n} k={k}");
            }
        }
    }
}

#[test]
fn geometric_sums_are_negative_binomial() {
    let d = JumpDistribution::geometric(0.4).unwrap();
    for n in [3usize, 50] {
        let oracle = NegativeBinomial::new(n as f64, 0.4).unwrap();
        for k in [0u64, 5, 30, 120] {
            let exact = oracle.ln_pmf(k);
            let s = density_saddle(&d, n, k as f64);
            if k > 0 {
                assert!((s.unwrap() - exact).abs() < 1e-8, "n={n} k={k}");
            }
            let t = if k == 0 { pmf_exact_convolution(&d, n) } else { pmf_convolution_tilted(&d, n, k as f64 / n as f64) };
            assert!((t.unwrap().log_pmf(k as i64) - exact).abs() < 1e-8, "n={n} k={k}");
        }
    }
}

#[test]
fn oracle_engines_agree_on_midpoints() {
    let d = JumpDistribution::uniform_int(-2, 3).unwrap();
    let (n, z) = (64usize, 40.0);
    let exact = DensityOracle::new(&d, Engine::Exact, z / (2 * n) as f64).unwrap().midpoint_law(n, n, z).unwrap();
    let saddle = DensityOracle::new(&d, Engine::Saddle, z / (2 * n) as f64).unwrap().midpoint_law(n, n, z).unwrap();
    let tv: f64 = exact
        .xs
        .iter()
        .zip(&exact.log_weights)
        .map(|(x, l)| (l.exp() - saddle.log_weight_at(*x).exp()).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 1e-8, "{tv}");
}

#[test]
fn midpoint_law_normalized_and_ordered() {
    let d = JumpDistribution::geometric(0.5).unwrap();
    for (n, z) in [(1usize, 7.0), (10, 3.0), (300, 600.0)] {
        let law = midpoint_law(&d, n, n, z, Engine::Auto).unwrap();
        assert!((law.mass() - 1.0).abs() < 1e-12);
        assert!(law.xs.windows(2).all(|w| w[0] < w[1]));
        assert!(law.xs[0] >= 0.0 && *law.xs.last().unwrap() <= z);
    }
}
