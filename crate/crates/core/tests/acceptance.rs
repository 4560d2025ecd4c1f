//! Acceptance suite: nine criteria, one PASS/FAIL line each. Exits non-zero
//! when any criterion fails.

use std::time::Instant;

use bridge_kmt::coupling::{quantile_coupled, Coupler, CouplerConfig};
use bridge_kmt::cramer::solve_saddle;
use bridge_kmt::density::{density_gaussian_asymptotic, density_saddle, midpoint_law, Engine};
use bridge_kmt::gaussian::{self, CDF_LIPSCHITZ};
use bridge_kmt::harness::{midpoint_spread, run_counterexample, run_scaling, run_tails, ExperimentKind, ExperimentSpec};
use bridge_kmt::jump_dist::JumpDistribution;
use bridge_kmt::numeric::linear_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;
use statrs::function::gamma::ln_gamma;

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn bern() -> JumpDistribution {
    JumpDistribution::bernoulli(0.5).unwrap()
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

fn exact_density_oracles() -> Outcome {
    let b = density_saddle(&bern(), 100, 50.0).map_err(err)?.exp();
    let b_exact = (ln_choose(100.0, 50.0) - 100.0 * 2f64.ln()).exp();
    let rel_b = (b / b_exact - 1.0).abs();
    let g = JumpDistribution::geometric(0.5).map_err(err)?;
    let mut rel_g = 0.0f64;
    for k in [32.0, 64.0, 128.0] {
        // C(k + N − 1, k) q^N (1 − q)^k
        let exact = (ln_choose(k + 63.0, k) + 64.0 * 0.5f64.ln() + k * 0.5f64.ln()).exp();
        let s = density_saddle(&g, 64, k).map_err(err)?.exp();
        rel_g = rel_g.max((s / exact - 1.0).abs());
    }
    Ok((rel_b <= 1e-3 && rel_g <= 1e-3, format!("binomial rel err {rel_b:.2e} (value {b:.7}), negative binomial max rel err {rel_g:.2e}")))
}

fn delta1_rate() -> Outcome {
    let d = bern();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for k in 6..=12 {
        let n = 1usize << k;
        let z = n as f64 / 2.0;
        let d1 = density_saddle(&d, n, z).map_err(err)? - density_gaussian_asymptotic(&d, n, z).map_err(err)?;
        x.push((n as f64).ln());
        y.push(d1.abs().ln());
    }
    let (_, slope, r2) = linear_fit(&x, &y).ok_or("degenerate fit")?;
    Ok(((-0.8..=-0.3).contains(&slope), format!("log-log slope of |δ₁| at the mean slope = {slope:.4} (R² {r2:.4}), target [-0.8, -0.3]")))
}

fn midpoint_exactness() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        for z in 0..=(2 * n) {
            let law = midpoint_law(&bern(), n, n, z as f64, Engine::Auto).map_err(err)?;
            let nf = n as f64;
            for k in 0..=n {
                let kf = k as f64;
                let zf = z as f64;
                let exact = if zf - kf < 0.0 || zf - kf > nf {
                    0.0
                } else {
                    (ln_choose(nf, kf) + ln_choose(nf, zf - kf) - ln_choose(2.0 * nf, zf)).exp()
                };
                worst = worst.max((law.log_weight_at(kf).exp() - exact).abs());
            }
        }
    }
    let g = midpoint_law(&JumpDistribution::geometric(0.5).map_err(err)?, 1, 1, 2.0, Engine::Auto).map_err(err)?;
    let geo = (0..=2).map(|k| (g.log_weight_at(k as f64).exp() - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-12 && geo <= 1e-12 && g.len() == 3, format!("hypergeometric max abs err {worst:.2e}, geometric uniform-thirds err {geo:.2e}")))
}

/// χ² critical value with 5 degrees of freedom at level 1e-3.
const CHI2_5_CRIT: f64 = 20.515;

fn coupler_marginals() -> Outcome {
    let cfg = CouplerConfig { n_min: 1, rng_seed: 4, ..Default::default() };
    let c = Coupler::new(&bern(), 4, 2.0, cfg).map_err(err)?;
    let m = 200_000u64;
    let mut counts = std::collections::HashMap::<Vec<i64>, f64>::new();
    for i in 0..m {
        let s = c.sample(i).map_err(err)?;
        let steps: Vec<i64> = s.s_path.windows(2).map(|w| (w[1] - w[0]) as i64).collect();
        *counts.entry(steps).or_default() += 1.0;
    }
    let expect = m as f64 / 6.0;
    let chi2: f64 = counts.values().map(|o| (o - expect).powi(2) / expect).sum::<f64>() + (6 - counts.len()) as f64 * expect;

    let cfg = CouplerConfig { rng_seed: 8, ..Default::default() };
    let c = Coupler::new(&bern(), 64, 32.0, cfg).map_err(err)?;
    let sigma2 = c.sigma_p().powi(2);
    let grid = [16usize, 24, 32, 40, 48];
    let m = 100_000u64;
    let mut sum = [0.0; 5];
    let mut prod = [[0.0; 5]; 5];
    for i in 0..m {
        let b = c.sample(i).map_err(err)?.b_path;
        for (a, &s) in grid.iter().enumerate() {
            sum[a] += b[s];
            for (k, &t) in grid.iter().enumerate() {
                prod[a][k] += b[s] * b[t];
            }
        }
    }
    let mf = m as f64;
    let mut worst = 0.0f64;
    for (a, &s) in grid.iter().enumerate() {
        for (k, &t) in grid.iter().enumerate() {
            let (lo, hi) = (s.min(t) as f64, s.max(t) as f64);
            let theory = sigma2 * lo * (64.0 - hi) / 64.0;
            let cov = prod[a][k] / mf - sum[a] * sum[k] / (mf * mf);
            worst = worst.max((cov / theory - 1.0).abs());
        }
    }
    Ok((
        chi2 <= CHI2_5_CRIT && counts.len() == 6 && worst <= 0.05,
        format!("χ² = {chi2:.3} on {} paths (critical {CHI2_5_CRIT}), covariance max rel err {worst:.4}", counts.len()),
    ))
}

fn log_growth() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::Scaling, json!({"family": "bernoulli", "params": {"p": 0.5}}))
        .with_n_list((6..=13).map(|k| 1usize << k).collect())
        .with_samples(2000)
        .with_seed(2024);
    let r = run_scaling(&spec).map_err(err)?;
    let f = r.fit.ok_or("no fit")?;
    Ok((
        f.median_ratio <= 3.5 && f.rms_over_range <= 0.15 && r.rows.len() == 8,
        format!("median ratio {:.3} (√n ratio {:.1}), residual RMS / range {:.4}, slope b0 {:.3}", f.median_ratio, f.sqrt_n_ratio, f.rms_over_range, f.b0),
    ))
}

fn exponential_tail() -> Outcome {
    let spec = ExperimentSpec::new(ExperimentKind::Tails, json!({"family": "bernoulli", "params": {"p": 0.5}}))
        .with_n_list(vec![1024])
        .with_samples(100_000)
        .with_seed(99);
    let t = run_tails(&spec).map_err(err)?;
    let (lambda, r2) = (t.lambda.ok_or("no fit")?, t.r2.ok_or("no fit")?);
    Ok((lambda > 0.0 && r2 >= 0.9, format!("λ = {lambda:.4}, R² = {r2:.4} on {} mid-tail points, M₀ = {:.4}", t.window_points, t.m0)))
}

fn counterexample() -> Outcome {
    let rows = run_counterexample(&[2]).map_err(err)?;
    let r = &rows[0];
    let mass = r.spike_mass.ok_or("overflow")?;
    let sd = r.conditional_std.ok_or("overflow")?;
    let laws = [
        JumpDistribution::bernoulli(0.5),
        JumpDistribution::bernoulli(0.2),
        JumpDistribution::uniform_int(-3, 3),
        JumpDistribution::geometric(0.5),
        JumpDistribution::exponential(1.0),
        JumpDistribution::log_gamma(2.0),
        JumpDistribution::tabulated_standard_normal(0.05, 8.0),
    ];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for d in laws {
        for s in midpoint_spread(&d.map_err(err)?).map_err(err)? {
            if s.log_concave {
                worst = worst.max(s.ratio);
                checked += 1;
            }
        }
    }
    Ok((
        mass >= 1.0 - 1e-6 && sd >= 1e8 && worst <= 2.0 && checked > 0,
        format!("m = 2: spike mass {mass:.12}, conditional sd {sd:.4e}; log-concave laws at n = 2: max sd ratio {worst:.3} over {checked} endpoints"),
    ))
}

fn gaussian_inequalities() -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=1200 {
        let x = i as f64 * 0.01;
        let r = gaussian::sf(x) * (1.0 + x) / gaussian::pdf(x);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let mills = lo >= 0.65 && hi <= 1.30;

    let mut ineq_margin = f64::INFINITY;
    for a in [1.0f64, 2.0] {
        for n in [64.0 * a * a, 256.0 * a * a] {
            for i in 0..=200 {
                let x = i as f64 / 200.0 / (8.0 * a);
                let u = 2.0 * a * (n.sqrt() * x * x + 1.0 / n.sqrt());
                let lhs = gaussian::log_cdf(-n.sqrt() * x + u) - gaussian::log_cdf(-n.sqrt() * x);
                ineq_margin = ineq_margin.min(lhs - a * (n * x.powi(3) + 1.0 / n.sqrt()));
            }
        }
    }

    let mut round_trip = 0.0f64;
    for i in 0..=3000 {
        // log-spaced probabilities on [1e-15, 0.5] and their mirror images
        let p = 10f64.powf(-15.0 + i as f64 * (15.0 - 2f64.log10()) / 3000.0);
        for q in [p, 1.0 - p] {
            if (1e-15..=1.0 - 1e-15).contains(&q) {
                let x = gaussian::quantile(q).map_err(err)?;
                round_trip = round_trip.max((gaussian::cdf(x) - q).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lipschitz = true;
    for _ in 0..100_000 {
        let x: f64 = rng.sample::<f64, _>(StandardNormal) * 3.0;
        let y: f64 = x + rng.sample::<f64, _>(StandardNormal);
        lipschitz &= (gaussian::cdf(x) - gaussian::cdf(y)).abs() <= CDF_LIPSCHITZ * (x - y).abs() + 1e-16;
    }
    let spot = (gaussian::cdf(1.959964) - 0.975).abs() < 1e-6
        && (gaussian::quantile(0.975).map_err(err)? - 1.959964).abs() < 1e-5
        && (gaussian::quantile(gaussian::cdf(3.7)).map_err(err)? - 3.7).abs() < 1e-9;
    Ok((
        mills && ineq_margin >= 0.0 && round_trip <= 1e-12 && lipschitz && spot,
        format!(
            "Mills (1−Φ)(1+x)/φ range [{lo:.4}, {hi:.4}] vs [0.65, 1.30]: {}; log-ratio inequality min margin {ineq_margin:.4}; round trip {round_trip:.1e}; Lipschitz {lipschitz}; reference values {spot}",
            if mills { "inside" } else { "outside" }
        ),
    ))
}

fn quantile_sandwich() -> Outcome {
    let mut chats = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [128usize, 512, 2048] {
        let k = n / 2;
        let z = n as f64 / 2.0;
        let law = midpoint_law(&bern(), k, n - k, z, Engine::Auto).map_err(err)?;
        let sigma = solve_saddle(&bern(), 0.5).map_err(err)?.sigma_z_sq.sqrt();
        let sd = sigma * ((k * (n - k)) as f64 / n as f64).sqrt();
        let centre = z * k as f64 / n as f64;
        let mut c = 0.0f64;
        for _ in 0..100_000 {
            let xi: f64 = rng.sample(StandardNormal);
            let w = quantile_coupled(&law, xi);
            let gauss = centre + sd * xi;
            c = c.max((w - gauss).abs() / (1.0 + (w - centre).powi(2) / k as f64));
        }
        chats.push(c);
    }
    let ratio = chats.iter().cloned().fold(0.0, f64::max) / chats.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((ratio <= 2.0, format!("ĉ = {:.4} / {:.4} / {:.4} for n = 128 / 512 / 2048, max/min {ratio:.3}", chats[0], chats[1], chats[2])))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact-density oracle agreement", exact_density_oracles),
        ("δ₁ decay rate", delta1_rate),
        ("midpoint-law exactness", midpoint_exactness),
        ("coupler marginal correctness", coupler_marginals),
        ("logarithmic growth of Δ", log_growth),
        ("exponential tail of Δ", exponential_tail),
        ("spiky counterexample", counterexample),
        ("Gaussian inequality suite", gaussian_inequalities),
        ("quantile sandwich stability", quantile_sandwich),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("[{}] {} {name}: {detail} ({:.1} s)", if ok { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
