//! Compares the contour-integral density, its leading Gaussian term and the
//! exact convolution for a lattice law and a continuous one.

use bridge_kmt::density::{delta1, density_gaussian_asymptotic, density_saddle, pdf_grid_convolution, pmf_exact_convolution, GridSpec};
use bridge_kmt::jump_dist::JumpDistribution;

fn main() -> bridge_kmt::Result<()> {
    let bern = JumpDistribution::bernoulli(0.5)?;
    println!("bernoulli(1/2), S_N = N/2 + 3");
    println!("{:>6} {:>14} {:>14} {:>14} {:>12}", "N", "saddle", "gaussian", "exact", "delta1");
    for n in [16usize, 64, 256, 1024] {
        let z = (n / 2 + 3) as f64;
        let exact = pmf_exact_convolution(&bern, n)?.log_pmf(z as i64);
        println!(
            "{n:>6} {:>14.9} {:>14.9} {:>14.9} {:>12.3e}",
            density_saddle(&bern, n, z)?,
            density_gaussian_asymptotic(&bern, n, z)?,
            exact,
            delta1(&bern, n, z)?
        );
    }

    // Exp(1) sums are Gamma(N, 1)
    let exp = JumpDistribution::exponential(1.0)?;
    println!("\nexponential(1), S_N = 1.2 N");
    for n in [8usize, 32] {
        let z = 1.2 * n as f64;
        let nf = n as f64;
        let gamma = (nf - 1.0) * z.ln() - z - (1..n).map(|k| (k as f64).ln()).sum::<f64>();
        let grid = pdf_grid_convolution(&exp, n, GridSpec::new(0.002))?.log_value_at(z);
        println!("N = {n:>4}: saddle {:.9}  grid {:.9}  closed form {:.9}", density_saddle(&exp, n, z)?, grid, gamma);
    }
    Ok(())
}
