//! Growth of the coupling error `Δ(n, z)` with `n`.

use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentSpec;
use crate::coupling::{Coupler, CouplerConfig};
use crate::error::{Error, Result};
use crate::jump_dist::{check_assumptions, AssumptionId, CheckConfig, JumpDistribution, Status};
use crate::numeric::{linear_fit, quantile_sorted};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub z: f64,
    pub samples: usize,
    pub delta_median: f64,
    pub delta_mean: f64,
    pub delta_q95: f64,
    pub exp_a: f64,
    /// `log(M⁻¹ Σ e^{aΔ_i})`.
    pub log_mean_exp: f64,
    pub log_mean_exp_se: f64,
    /// `|z − pn|²/n`.
    pub z_offset_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// `delta_median ≈ a0 + b0 log n`.
    pub a0: f64,
    pub b0: f64,
    pub r2: f64,
    pub residual_rms: f64,
    /// Fitted value at the largest `n` minus that at the smallest.
    pub fitted_range: f64,
    pub rms_over_range: f64,
    pub median_ratio: f64,
    /// `√(n_max / n_min)`, the ratio diffusive growth would give.
    pub sqrt_n_ratio: f64,
    /// `delta_median ≈ c0 + c1 √n`.
    pub diffusive_c0: f64,
    pub diffusive_c1: f64,
    pub diffusive_r2: f64,
    pub diffusive_residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFailure {
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    pub fit: Option<ScalingFit>,
    pub failures: Vec<ScalingFailure>,
}

/// Log-mean-exp of `a·x` with its jackknife standard error.
pub fn log_mean_exp_jackknife(xs: &[f64], a: f64) -> (f64, f64) {
    let m = xs.len();
    let top = xs.iter().map(|x| a * x).fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = xs.iter().map(|x| (a * x - top).exp()).collect();
    let sum: f64 = terms.iter().sum();
    let full = top + (sum / m as f64).ln();
    if m < 2 {
        return (full, f64::NAN);
    }
    let mf = m as f64;
    let loo: Vec<f64> = terms.iter().map(|t| top + ((sum - t).max(f64::MIN_POSITIVE) / (mf - 1.0)).ln()).collect();
    let mean = loo.iter().sum::<f64>() / mf;
    let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (mf - 1.0) / mf;
    (full, var.sqrt())
}

pub(crate) fn require_moments(dist: &JumpDistribution) -> Result<()> {
    let id = if dist.is_discrete() { AssumptionId::D1 } else { AssumptionId::C1 };
    let report = check_assumptions(dist, &CheckConfig::default());
    match report.get(id) {
        Some(c) if c.status == Status::Fail => Err(Error::Spec(format!("{} fails {id}: {}", dist.name(), c.detail))),
        _ => Ok(()),
    }
}

/// `Δ` for samples `0..samples` of the coupled bridge.
pub fn sample_deltas(dist: &JumpDistribution, n: usize, z: f64, cfg: &CouplerConfig, samples: usize) -> Result<Vec<f64>> {
    let coupler = Coupler::new(dist, n, z, cfg.clone())?;
    (0..samples as u64).into_par_iter().map(|i| coupler.sample(i).map(|s| s.delta)).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn rms_residual(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    (x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

fn fit_rows(rows: &[ScalingRow]) -> Option<ScalingFit> {
    if rows.len() < 3 {
        return None;
    }
    let logn: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let sqrtn: Vec<f64> = rows.iter().map(|r| (r.n as f64).sqrt()).collect();
    let med: Vec<f64> = rows.iter().map(|r| r.delta_median).collect();
    let (a0, b0, r2) = linear_fit(&logn, &med)?;
    let (c0, c1, dr2) = linear_fit(&sqrtn, &med)?;
    let residual_rms = rms_residual(&logn, &med, a0, b0);
    let fitted_range = b0 * (logn[logn.len() - 1] - logn[0]);
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    Some(ScalingFit {
        a0,
        b0,
        r2,
        residual_rms,
        fitted_range,
        rms_over_range: residual_rms / fitted_range.abs(),
        median_ratio: last.delta_median / first.delta_median,
        sqrt_n_ratio: (last.n as f64 / first.n as f64).sqrt(),
        diffusive_c0: c0,
        diffusive_c1: c1,
        diffusive_r2: dr2,
        diffusive_residual_rms: rms_residual(&sqrtn, &med, c0, c1),
    })
}

/// One row per `n`; see [`run_scaling_with`].
pub fn run_scaling(spec: &ExperimentSpec) -> Result<ScalingResult> {
    run_scaling_with(spec, |_| Ok(()))
}

/// Runs the sweep, handing each finished row to `sink` before the next `n`
/// starts. A failing `n` is recorded and the sweep continues.
pub fn run_scaling_with<F>(spec: &ExperimentSpec, mut sink: F) -> Result<ScalingResult>
where
    F: FnMut(&ScalingRow) -> Result<()>,
{
    spec.validate()?;
    let dist = spec.distribution()?;
    require_moments(&dist)?;
    let p = spec.ref_slope.unwrap_or_else(|| dist.mean());
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &spec.n_list {
        let z = spec.z_rule.endpoint(&dist, n, spec.ref_slope);
        let deltas = match sample_deltas(&dist, n, z, &spec.coupler_config(n), spec.samples) {
            Ok(d) => sorted(d),
            Err(e) => {
                log::warn!("n = {n}: {e}");
                failures.push(ScalingFailure { n, error: e.to_string() });
                continue;
            }
        };
        let (lme, se) = log_mean_exp_jackknife(&deltas, spec.exp_a);
        let row = ScalingRow {
            n,
            z,
            samples: deltas.len(),
            delta_median: quantile_sorted(&deltas, 0.5),
            delta_mean: deltas.iter().sum::<f64>() / deltas.len() as f64,
            delta_q95: quantile_sorted(&deltas, 0.95),
            exp_a: spec.exp_a,
            log_mean_exp: lme,
            log_mean_exp_se: se,
            z_offset_sq: (z - p * n as f64).powi(2) / n as f64,
        };
        sink(&row)?;
        rows.push(row);
    }
    let fit = fit_rows(&rows);
    Ok(ScalingResult { rows, fit, failures })
}
