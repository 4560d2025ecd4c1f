//! Gaussian deviation of midpoint laws, Gaussian tail bounds and the
//! envelopes on `f_N` implied by the jump-law tail assumptions.

use serde::Serialize;

use super::midpoint::{DensityOracle, MidpointLaw};
use super::saddle::density_saddle;
use super::Engine;
use crate::cramer::solve_saddle;
use crate::error::{Error, Result};
use crate::jump_dist::{check_assumptions, CheckConfig, JumpDistribution, Side};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub n_total: usize,
    pub z: f64,
    pub window: f64,
    pub points: usize,
    pub max_abs_delta2: f64,
    /// Offset `x − z/2` (slope units) where the maximum is attained.
    pub argmax_offset: f64,
    /// `1/√N + N w³` at the window half-width `w`.
    pub predicted_bound: f64,
    /// `max |δ₂| / predicted_bound`.
    pub m_hat: f64,
    /// `max_x |δ₂(x)| / (1/√N + N|x − z/2|³)`.
    pub m_hat_pointwise: f64,
}

/// `δ₂(N, x, z)` over `|x − z/2| ≤ window` in slope units, `x = k/N`,
/// `z = l/N`, against the Gaussian form with variance `Nσ_z²/4`.
/// `z_total` is the endpoint value.
pub fn midpoint_gaussian_deviation(dist: &JumpDistribution, n_total: usize, z_total: f64, window: f64) -> Result<DeviationReport> {
    if n_total < 2 {
        return Err(Error::Spec("N must be at least 2".into()));
    }
    let nf = n_total as f64;
    let sd = solve_saddle(dist, z_total / nf)?;
    let k = n_total / 2;
    let oracle = DensityOracle::new(dist, Engine::Exact, z_total / nf)?;
    let law = oracle.midpoint_law(k, n_total - k, z_total)?;
    let sigma = sd.sigma_z_sq.sqrt();
    let log_front = (2.0 / ((2.0 * std::f64::consts::PI * nf).sqrt() * sigma)).ln();
    let (mut max_abs, mut arg, mut pointwise, mut count) = (0.0f64, 0.0, 0.0f64, 0);
    for (x, lw) in law.xs.iter().zip(&law.log_weights) {
        let off = (x - 0.5 * z_total) / nf;
        if off.abs() > window || *lw == f64::NEG_INFINITY {
            continue;
        }
        count += 1;
        let gauss = log_front - 2.0 * nf * off * off / sd.sigma_z_sq;
        let d2 = (lw - gauss).abs();
        if d2 > max_abs {
            max_abs = d2;
            arg = off;
        }
        pointwise = pointwise.max(d2 / (1.0 / nf.sqrt() + nf * off.abs().powi(3)));
    }
    let predicted_bound = 1.0 / nf.sqrt() + nf * window.powi(3);
    Ok(DeviationReport {
        n_total,
        z: z_total,
        window,
        points: count,
        max_abs_delta2: max_abs,
        argmax_offset: arg,
        predicted_bound,
        m_hat: max_abs / predicted_bound,
        m_hat_pointwise: pointwise,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBoundReport {
    pub holds: bool,
    /// Support point with the largest `log weight − log bound`.
    pub worst_x: f64,
    pub worst_margin: f64,
}

/// Checks `weight(x) ≤ A·exp(−a (x − z/2)²/N)` at every support point,
/// with `N = n + m`.
pub fn tail_bound_check(law: &MidpointLaw, big_a: f64, a: f64) -> TailBoundReport {
    let nf = (law.n + law.m) as f64;
    let centre = 0.5 * law.z;
    let (mut worst_x, mut worst) = (centre, f64::NEG_INFINITY);
    for (x, lw) in law.xs.iter().zip(&law.log_weights) {
        let margin = lw - (big_a.ln() - a * (x - centre).powi(2) / nf);
        if margin > worst {
            worst = margin;
            worst_x = *x;
        }
    }
    TailBoundReport { holds: worst <= 0.0, worst_x, worst_margin: worst }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub n: usize,
    pub holds: bool,
    pub probes: usize,
    pub worst_x: f64,
    /// Largest `log f_N(x) − log bound(x)` on the probes.
    pub worst_margin: f64,
    /// Base of the envelope (`W` or `L`).
    pub base: f64,
}

fn probe_slopes(dist: &JumpDistribution, probes: usize) -> Vec<f64> {
    let (alpha, beta) = dist.support();
    let (mu, sd) = (dist.mean(), dist.variance().sqrt());
    let lo = if alpha.is_finite() { alpha } else { mu - 6.0 * sd };
    let hi = if beta.is_finite() { beta } else { mu + 6.0 * sd };
    (1..=probes).map(|i| lo + (hi - lo) * i as f64 / (probes + 1) as f64).collect()
}

/// `f_N(x) ≤ W^N e^{−d x²/N}` with `W = D√π/√d + 1 + D`, where `(D, d)`
/// come from a two-sided Gaussian envelope of the jump density.
pub fn gaussian_envelope_check(dist: &JumpDistribution, n: usize, probes: usize) -> Result<EnvelopeReport> {
    if dist.is_discrete() {
        return Err(Error::WrongKind { expected: "continuous" });
    }
    let report = check_assumptions(dist, &CheckConfig::default());
    let tp = match report.tail_params {
        Some(tp) if tp.side == Side::Both => tp,
        _ => return Err(Error::Spec("jump density lacks a two-sided Gaussian envelope".into())),
    };
    let w = tp.big_d * std::f64::consts::PI.sqrt() / tp.d.sqrt() + 1.0 + tp.big_d;
    let nf = n as f64;
    let mut out = EnvelopeReport { n, holds: true, probes: 0, worst_x: 0.0, worst_margin: f64::NEG_INFINITY, base: w };
    for s in probe_slopes(dist, probes) {
        let x = nf * s;
        let Ok(v) = density_saddle(dist, n, x) else { continue };
        let margin = v - (nf * w.ln() - tp.d * x * x / nf);
        out.probes += 1;
        if margin > out.worst_margin {
            out.worst_margin = margin;
            out.worst_x = x;
        }
    }
    out.holds = out.worst_margin <= 0.0;
    Ok(out)
}

/// `f_N(x) ≤ L^N (x − Nα)^{N−1}/(N−1)!` for a density bounded by `L` with
/// support bounded below by `α`.
pub fn compact_support_envelope_check(dist: &JumpDistribution, n: usize, probes: usize) -> Result<EnvelopeReport> {
    if dist.is_discrete() || n == 0 {
        return Err(Error::WrongKind { expected: "continuous" });
    }
    let (alpha, beta) = dist.support();
    if !alpha.is_finite() {
        return Err(Error::Spec("support must be bounded below".into()));
    }
    let hi = if beta.is_finite() { beta } else { dist.mean() + 12.0 * dist.variance().sqrt() };
    let l = (0..=2000)
        .map(|i| dist.log_weight(alpha + (hi - alpha) * i as f64 / 2000.0))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let nf = n as f64;
    let mut out = EnvelopeReport { n, holds: true, probes: 0, worst_x: 0.0, worst_margin: f64::NEG_INFINITY, base: l };
    for s in probe_slopes(dist, probes) {
        let x = nf * s;
        let v = if n == 1 { dist.log_weight(x) } else {
            match density_saddle(dist, n, x) {
                Ok(v) => v,
                Err(_) => continue,
            }
        };
        let bound = nf * l.ln() + (nf - 1.0) * (x - nf * alpha).ln() - ln_gamma(nf);
        let margin = v - bound;
        out.probes += 1;
        if margin > out.worst_margin {
            out.worst_margin = margin;
            out.worst_x = x;
        }
    }
    // on the first piece the bound is attained exactly
    out.holds = out.worst_margin <= 1e-8;
    Ok(out)
}
