//! Quantile coupling of bridge midpoints to Gaussians and the dyadic
//! construction of a random-walk bridge jointly with a Brownian bridge.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::density::{Engine, MidpointLaw};
use crate::error::{Error, Result};
use crate::gaussian;

mod coupler;
pub mod rng;

pub use coupler::{exact_bridge_sample, sample_coupled_bridge, Coupler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Monotone quantile transform everywhere.
    #[default]
    PureQuantile,
    /// Quantile transform inside a central window, independent tail draw
    /// outside it.
    Truncated,
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingMode::PureQuantile => "pure_quantile",
            CouplingMode::Truncated => "truncated",
        })
    }
}

impl FromStr for CouplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_quantile" | "pure" => Ok(CouplingMode::PureQuantile),
            "truncated_paper" | "truncated" => Ok(CouplingMode::Truncated),
            other => Err(Error::Spec(format!("unknown coupling mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplerConfig {
    /// Bridges of at most this many steps are sampled directly.
    pub n_min: usize,
    pub mode: CouplingMode,
    pub eps3: f64,
    /// Reference slope `p` fixing `σ_p`; `None` means `z/n` of the root.
    pub ref_slope: Option<f64>,
    pub engine: Engine,
    pub rng_seed: u64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        CouplerConfig { n_min: 16, mode: CouplingMode::PureQuantile, eps3: 0.05, ref_slope: None, engine: Engine::Auto, rng_seed: 0 }
    }
}

impl CouplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 {
            return Err(Error::Spec("n_min must be at least 1".into()));
        }
        if !(self.eps3 > 0.0 && self.eps3 < 1.0) {
            return Err(Error::Spec(format!("eps3 = {} must lie in (0, 1)", self.eps3)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledSample {
    pub n: usize,
    pub z: f64,
    pub sample_index: u64,
    pub s_path: Vec<f64>,
    pub b_path: Vec<f64>,
    pub delta: f64,
    pub xi_count: usize,
    /// Sum at the root split, absent when the root is a base case.
    pub midpoint_w: Option<f64>,
    pub sigma_p: f64,
}

/// `max_t |b_t + (t/n) z − s_t|` over integer `t`.
pub fn compute_delta(sample: &CoupledSample) -> f64 {
    path_delta(&sample.s_path, &sample.b_path, sample.z)
}

pub fn path_delta(s_path: &[f64], b_path: &[f64], z: f64) -> f64 {
    let n = (s_path.len() - 1) as f64;
    s_path
        .iter()
        .zip(b_path)
        .enumerate()
        .map(|(t, (s, b))| (b + t as f64 / n * z - s).abs())
        .fold(0.0, f64::max)
}

/// Scaled Brownian bridge on `0..=n` with `Cov(𝔅_s, 𝔅_t) = σ² s(n−t)/n`.
pub fn brownian_bridge_sample<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    let mut path = vec![0.0; n + 1];
    fill_brownian(&mut path[1..], sigma, rng);
    path
}

/// Writes `𝔅_1, …, 𝔅_n` (the last entry is 0).
pub(crate) fn fill_brownian<R: Rng + ?Sized>(out: &mut [f64], sigma: f64, rng: &mut R) {
    let n = out.len();
    let mut prev = 0.0;
    for t in 1..n {
        let rest = (n - t) as f64;
        let ratio = rest / (rest + 1.0);
        let xi: f64 = rng.sample(StandardNormal);
        prev = prev * ratio + sigma * ratio.sqrt() * xi;
        out[t - 1] = prev;
    }
    if n > 0 {
        out[n - 1] = 0.0;
    }
}

/// Sample of `law` coupled to the standard normal `xi`. Lower quantiles
/// use `Φ(ξ)`, upper quantiles `Φ(−ξ)` so both tails stay accurate.
pub fn quantile_coupled(law: &MidpointLaw, xi: f64) -> f64 {
    if xi <= 0.0 {
        law.quantile_lower(gaussian::cdf(xi))
    } else {
        law.quantile_upper(gaussian::sf(xi))
    }
}

/// Couples `law` to `xi`. In truncated mode, draws landing outside
/// `centre ± 2·eps3·(n + m)` are replaced by an independent draw from the
/// law conditioned on that outer region, which leaves the marginal exact.
pub fn couple_midpoint<R: Rng + ?Sized>(law: &MidpointLaw, xi: f64, mode: CouplingMode, eps3: f64, rng: &mut R) -> f64 {
    let w = quantile_coupled(law, xi);
    if mode == CouplingMode::PureQuantile {
        return w;
    }
    let total = (law.n + law.m) as f64;
    let centre = law.z * law.n as f64 / total;
    let half = 2.0 * eps3 * total;
    let (lo, hi) = (centre - half, centre + half);
    if w >= lo && w <= hi {
        return w;
    }
    let below = law.cdf_below(lo);
    let above = law.sf_at(hi);
    let outer = below + above;
    if !(outer > 0.0) {
        return w;
    }
    let u: f64 = rng.random::<f64>() * outer;
    if u < below {
        law.quantile_lower(u.max(f64::MIN_POSITIVE))
    } else {
        law.quantile_upper((outer - u).min(above))
    }
}
