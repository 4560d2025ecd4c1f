//! Contour-integral evaluation of `f_N` and `p_N` through the saddle point,
//! and the leading Gaussian term.

use num_complex::Complex64;

use crate::cramer::{solve_saddle, SaddleData};
use crate::error::{Error, Result};
use crate::jump_dist::JumpDistribution;
use crate::quadrature::{integrate, Tolerance};

/// Integrand magnitude (in log) where the contour is cut off.
pub const CUTOFF_LOG: f64 = -40.0;
/// Relative accuracy of the contour integral.
pub const CONTOUR_REL_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 12;

fn saddle_for(dist: &JumpDistribution, n: usize, z: f64) -> Result<SaddleData> {
    if n == 0 {
        return Err(Error::Spec("N must be positive".into()));
    }
    solve_saddle(dist, z / n as f64)
}

/// `log f_N(z)` (continuous) or `log p_N(z)` (discrete) by integrating the
/// tilted characteristic function along the vertical line through the
/// saddle point. `z` is the endpoint value of the walk.
pub fn density_saddle(dist: &JumpDistribution, n: usize, z: f64) -> Result<f64> {
    let sd = saddle_for(dist, n, z)?;
    if dist.is_discrete() {
        if z.fract() != 0.0 {
            return Err(Error::UnattainableEndpoint { n, z });
        }
        discrete_contour(dist, n, z, &sd)
    } else {
        continuous_contour(dist, n, z, &sd)
    }
}

/// `N·G_z(u_z) − ½ log(2πNσ_z²)`.
pub fn density_gaussian_asymptotic(dist: &JumpDistribution, n: usize, z: f64) -> Result<f64> {
    let sd = saddle_for(dist, n, z)?;
    let nf = n as f64;
    Ok(nf * sd.g_value - 0.5 * (2.0 * std::f64::consts::PI * nf * sd.sigma_z_sq).ln())
}

/// `δ₁(z, N)`: saddle value minus the leading Gaussian term.
pub fn delta1(dist: &JumpDistribution, n: usize, z: f64) -> Result<f64> {
    Ok(density_saddle(dist, n, z)? - density_gaussian_asymptotic(dist, n, z)?)
}

/// `N(Λ(u+iy) − Λ(u)) − i y z`, whose exponential is the tilted integrand.
fn exponent(dist: &JumpDistribution, n: f64, z: f64, sd: &SaddleData, y: f64) -> Result<Complex64> {
    let lam = dist.log_mgf_principal(Complex64::new(sd.u_z, y))?;
    Ok(n * (lam - sd.lambda_at_u) - Complex64::new(0.0, y * z))
}

fn continuous_contour(dist: &JumpDistribution, n: usize, z: f64, sd: &SaddleData) -> Result<f64> {
    let nf = n as f64;
    let width = 1.0 / (nf * sd.sigma_z_sq).sqrt();
    let mut y_max = width;
    for _ in 0..60 {
        if exponent(dist, nf, z, sd, y_max)?.re < CUTOFF_LOG {
            break;
        }
        y_max *= 2.0;
    }
    let mut fail = None;
    let mut f = |y: f64| match exponent(dist, nf, z, sd, y) {
        Ok(e) if e.re > -700.0 => e.exp().re,
        Ok(_) => 0.0,
        Err(e) => {
            fail.get_or_insert(e);
            0.0
        }
    };
    // panels doubling in width keep the peak and the tail resolved
    let tol = Tolerance { abs: 0.0, rel: CONTOUR_REL_TOL, max_intervals: 4000 };
    let mut total = 0.0f64;
    let mut err = 0.0;
    let mut a = 0.0;
    let mut b = width.min(y_max);
    loop {
        let piece = integrate(&mut f, a, b, Tolerance { abs: 1e-12 * total.abs().max(width), ..tol })?;
        total += piece.value;
        err += piece.error;
        if b >= y_max {
            break;
        }
        a = b;
        b = (2.0 * b).min(y_max);
    }
    if let Some(e) = fail {
        return Err(e);
    }
    if !(total > 0.0) || err > 1e-6 * total {
        return Err(Error::QuadratureFailure { value: total, error: err });
    }
    Ok(nf * sd.g_value + (total / std::f64::consts::PI).ln())
}

fn discrete_contour(dist: &JumpDistribution, n: usize, z: f64, sd: &SaddleData) -> Result<f64> {
    let nf = n as f64;
    let trapezoid = |k: usize| -> Result<f64> {
        // y_j = 2πj/k, symmetric about 0 so only the real part survives
        let mut s = 0.0;
        for j in 0..k {
            let y = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
            let e = exponent(dist, nf, z, sd, y)?;
            if e.re > -700.0 {
                s += e.exp().re;
            }
        }
        Ok(s / k as f64)
    };
    let mut k = 8 * (nf.sqrt().ceil() as usize).max(1);
    let mut prev = trapezoid(k)?;
    for _ in 0..MAX_DOUBLINGS {
        k *= 2;
        let next = trapezoid(k)?;
        let change = (next - prev).abs();
        prev = next;
        if change <= 1e-12 * next.abs() {
            if !(next > 0.0) {
                return Err(Error::QuadratureFailure { value: next, error: change });
            }
            return Ok(nf * sd.g_value + next.ln());
        }
    }
    Err(Error::QuadratureFailure { value: prev, error: f64::NAN })
}
