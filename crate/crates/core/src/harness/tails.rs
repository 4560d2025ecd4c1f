//! Empirical tail of `Δ(n, z)` beyond `M₀ log n`.

use serde::Serialize;

use super::scaling::{require_moments, sample_deltas};
use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, quantile_sorted};

/// Points on the `x` grid.
pub const GRID_POINTS: usize = 41;
/// Upper survival edge of the fit window.
pub const WINDOW_HI: f64 = 0.3;
/// Lower survival edge, raised to `50/M` for small samples.
pub const WINDOW_LO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub x: f64,
    pub threshold: f64,
    pub count: usize,
    /// Fraction of samples with `Δ ≥ M₀ log n + x`.
    pub survival: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailResult {
    pub n: usize,
    pub z: f64,
    pub samples: usize,
    /// Sample median of `Δ` divided by `log n`.
    pub m0: f64,
    pub lambda: Option<f64>,
    pub log_k: Option<f64>,
    pub r2: Option<f64>,
    pub window: (f64, f64),
    pub window_points: usize,
    pub rows: Vec<TailRow>,
}

/// Survival of sorted `deltas` at `x` steps past `m0·log n`, and the
/// least-squares `log S = log K − λx` over the mid-tail.
pub fn tail_table(deltas: &[f64], n: usize, z: f64) -> Result<TailResult> {
    if deltas.is_empty() {
        return Err(Error::Spec("no samples".into()));
    }
    let mut d = deltas.to_vec();
    d.sort_by(|a, b| a.total_cmp(b));
    let m = d.len();
    let log_n = (n.max(2) as f64).ln();
    let median = quantile_sorted(&d, 0.5);
    let m0 = median / log_n;
    let base = m0 * log_n;
    let span = (d[m - 1] - base).max(0.0);
    let dx = span / (GRID_POINTS - 1) as f64;
    let lo = WINDOW_LO.max(50.0 / m as f64);
    let mut rows = Vec::with_capacity(GRID_POINTS);
    for i in 0..GRID_POINTS {
        let x = i as f64 * dx;
        let threshold = base + x;
        let below = d.partition_point(|v| *v < threshold);
        let count = m - below;
        let survival = count as f64 / m as f64;
        rows.push(TailRow { x, threshold, count, survival, in_window: survival >= lo && survival <= WINDOW_HI });
        if dx == 0.0 {
            break;
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.in_window).map(|r| (r.x, r.survival.ln())).unzip();
    let fit = if xs.len() >= 3 { linear_fit(&xs, &ys) } else { None };
    Ok(TailResult {
        n,
        z,
        samples: m,
        m0,
        lambda: fit.map(|f| -f.1),
        log_k: fit.map(|f| f.0),
        r2: fit.map(|f| f.2),
        window: (lo, WINDOW_HI),
        window_points: xs.len(),
        rows,
    })
}

/// Tail study at the single `n` of `spec.n_list`.
pub fn run_tails(spec: &ExperimentSpec) -> Result<TailResult> {
    spec.validate()?;
    if spec.n_list.len() != 1 {
        return Err(Error::Spec("tails takes exactly one n".into()));
    }
    if spec.samples < 10_000 {
        log::warn!("tails with M = {} samples; at least 1e4 gives a usable mid-tail", spec.samples);
    }
    let dist = spec.distribution()?;
    require_moments(&dist)?;
    let n = spec.n_list[0];
    let z = spec.z_rule.endpoint(&dist, n, spec.ref_slope);
    let deltas = sample_deltas(&dist, n, z, &spec.coupler_config(n), spec.samples)?;
    tail_table(&deltas, n, z)
}
