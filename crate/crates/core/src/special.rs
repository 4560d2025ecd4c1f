//! Gamma-family special functions: complex log-gamma on the right half-plane
//! and real polygamma functions of low order.

use num_complex::Complex64;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} for k = 1..=10.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const SHIFT_TO: f64 = 15.0;

/// `log Γ(z)` for `Re z > 0`, on the branch that is continuous on the right
/// half-plane and real on the positive real axis.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0, "ln_gamma_complex needs Re z > 0, got {z}");
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < SHIFT_TO {
        shift += z.ln();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = (k + 1) as f64;
        series += pow * (b / (2.0 * k * (2.0 * k - 1.0)));
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - shift
}

/// Real `log Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_complex(Complex64::new(x, 0.0)).re
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Polygamma `ψ⁽ⁿ⁾(x)` for `x > 0` and `n ≤ 6`; `n = 0` is the digamma function.
pub fn polygamma(n: u32, x: f64) -> f64 {
    debug_assert!(x > 0.0 && n <= 6);
    let mut x = x;
    let mut acc = 0.0;
    // ψ⁽ⁿ⁾(x) = ψ⁽ⁿ⁾(x+1) − (−1)ⁿ n! / x^{n+1}
    let sign_n = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let n_fact = factorial(n);
    while x < SHIFT_TO {
        acc -= sign_n * n_fact / x.powi(n as i32 + 1);
        x += 1.0;
    }
    let asym = if n == 0 {
        let inv2 = 1.0 / (x * x);
        let mut s = x.ln() - 0.5 / x;
        let mut pow = inv2;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k = (k + 1) as f64;
            s -= b / (2.0 * k) * pow;
            pow *= inv2;
        }
        s
    } else {
        let mut s = factorial(n - 1) / x.powi(n as i32) + n_fact / (2.0 * x.powi(n as i32 + 1));
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k2 = 2 * (k as u32 + 1);
            let coeff = factorial(k2 + n - 1) / factorial(k2);
            s += b * coeff / x.powi((k2 + n) as i32);
        }
        // (−1)^{n+1}
        -sign_n * s
    };
    asym + acc
}
