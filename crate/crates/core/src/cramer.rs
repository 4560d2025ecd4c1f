//! Saddle point of the tilt equation `Λ'(u) = z`, the rate function and the
//! derivatives of the free energy `F(z) = Λ(u_z) − z u_z`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jump_dist::JumpDistribution;

pub const TOL_SADDLE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleData {
    pub z: f64,
    pub u_z: f64,
    pub lambda_at_u: f64,
    /// `G_z(u_z) = Λ(u_z) − z u_z = −Λ*(z)`.
    pub g_value: f64,
    pub sigma_z_sq: f64,
    /// `F⁽ᵏ⁾(z)` for `k = 0..=4`.
    pub f_derivs: [f64; 5],
    /// Bracket on `u` explored before the Newton phase.
    pub domain: (f64, f64),
}

fn slope_error(dist: &JumpDistribution, z: f64) -> Error {
    let (lo, hi) = dist.support();
    Error::SlopeOutOfRange { slope: z, lo, hi }
}

/// Moves `edge` one step further toward `bound` (which may be infinite).
fn push(edge: f64, bound: f64, dir: f64) -> f64 {
    if bound.is_finite() {
        edge + 0.5 * (bound - edge)
    } else if edge * dir <= 0.0 {
        dir
    } else {
        2.0 * edge
    }
}

/// Solves `Λ'(u) = z`: expanding bracket, then Newton safeguarded by
/// bisection.
pub fn solve_saddle(dist: &JumpDistribution, z: f64) -> Result<SaddleData> {
    let (alpha, beta) = dist.support();
    if !(z > alpha && z < beta) || !z.is_finite() {
        return Err(slope_error(dist, z));
    }
    let (a_dom, b_dom) = dist.mgf_domain();
    let resid = |u: f64| dist.log_mgf_d1(u).map(|v| v - z);
    let scale = z.abs().max(1.0);

    let mut lo = -(1f64.min(a_dom.abs() / 2.0));
    let mut hi = 1f64.min(b_dom / 2.0);
    let mut f_lo = resid(lo)?;
    let mut f_hi = resid(hi)?;
    while f_hi < 0.0 {
        let next = push(hi, b_dom, 1.0);
        if next == hi || !next.is_finite() {
            return Err(slope_error(dist, z));
        }
        lo = hi;
        f_lo = f_hi;
        hi = next;
        f_hi = resid(hi)?;
    }
    while f_lo > 0.0 {
        let next = push(lo, a_dom, -1.0);
        if next == lo || !next.is_finite() {
            return Err(slope_error(dist, z));
        }
        hi = lo;
        f_hi = f_lo;
        lo = next;
        f_lo = resid(lo)?;
    }
    let domain = (lo, hi);

    let mut u = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    if !(u > a_dom && u < b_dom) {
        u = 0.5 * (lo + hi);
    }
    let mut f = resid(u)?;
    let mut iterations = 0;
    while f.abs() > TOL_SADDLE * scale {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: f });
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let slope = dist.log_mgf_d2(u)?;
        let newton = u - f / slope;
        u = if newton > lo && newton < hi && slope > 0.0 { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * u.abs().max(1e-300) {
            f = resid(u)?;
            if f.abs() > 1e-6 * scale {
                return Err(Error::NoConvergence { iterations, residual: f });
            }
            break;
        }
        f = resid(u)?;
    }
    // one polishing step; quadratic convergence makes it nearly free
    let slope = dist.log_mgf_d2(u)?;
    if slope > 0.0 && f != 0.0 {
        let v = u - f / slope;
        if v > a_dom && v < b_dom {
            let fv = resid(v)?;
            if fv.abs() < f.abs() {
                u = v;
            }
        }
    }

    let lambda_at_u = dist.log_mgf_real(u)?;
    let g_value = lambda_at_u - z * u;
    let l2 = dist.log_mgf_d2(u)?;
    let l3 = dist.cumulant_derivative(3, u)?;
    let l4 = dist.cumulant_derivative(4, u)?;
    let f_derivs = [g_value, -u, -1.0 / l2, l3 / l2.powi(3), (l4 * l2 - 3.0 * l3 * l3) / l2.powi(5)];
    Ok(SaddleData { z, u_z: u, lambda_at_u, g_value, sigma_z_sq: l2, f_derivs, domain })
}

/// `Λ*(z) = z u_z − Λ(u_z)`. For discrete laws with finite support the
/// endpoints are accepted and return `−log p(α)` or `−log p(β)`.
pub fn rate_function(dist: &JumpDistribution, z: f64) -> Result<f64> {
    let (alpha, beta) = dist.support();
    if dist.is_discrete() && alpha.is_finite() && beta.is_finite() && (z == alpha || z == beta) {
        return Ok(-dist.log_weight(z));
    }
    Ok(-solve_saddle(dist, z)?.g_value)
}

/// `[F(z), F'(z), …, F⁽⁴⁾(z)]`.
pub fn free_energy_derivs(dist: &JumpDistribution, z: f64) -> Result<[f64; 5]> {
    Ok(solve_saddle(dist, z)?.f_derivs)
}
