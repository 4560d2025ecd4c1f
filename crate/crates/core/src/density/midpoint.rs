//! Conditional law of `S_n` given `S_{n+m} = z`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::convolution::{tilt_for_slope, GridSpec, TableCache, DEFAULT_BUDGET};
use super::saddle::{density_gaussian_asymptotic, density_saddle};
use super::{Engine, DEFAULT_MIN_N};
use crate::error::{Error, Result};
use crate::jump_dist::{JumpDistribution, Kind};
use crate::numeric::log_sum_exp;

/// Points in a continuous midpoint grid.
pub const CONTINUOUS_POINTS: usize = 4096;
/// Lattice supports up to this size are enumerated in full.
pub const FULL_SUPPORT_LIMIT: i64 = 2048;
// log-weight gap below the mode at which a lattice window edge is negligible
const EDGE_LOG_GAP: f64 = 50.0;
const EDGE_MASS_REL: f64 = 1e-12;
// tilted table entries below this have lost relative accuracy
const TILT_FLOOR: f64 = 1e-150;

#[derive(Debug, Clone, Serialize)]
pub struct MidpointLaw {
    pub n: usize,
    pub m: usize,
    pub z: f64,
    pub kind: Kind,
    /// Support points, increasing.
    pub xs: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// `P(X ≤ xs[i])`.
    pub cdf: Vec<f64>,
    /// `P(X > xs[i])`, accumulated from the top.
    pub sf: Vec<f64>,
    /// `log f_{n+m}(z)` or `log p_{n+m}(z)` implied by the weights.
    pub normalizer: f64,
    pub engine: Engine,
}

impl MidpointLaw {
    /// Normalizes raw log weights `log f_n(x) + log f_m(z − x)`.
    pub fn from_raw(n: usize, m: usize, z: f64, kind: Kind, xs: Vec<f64>, raw: Vec<f64>, engine: Engine) -> Result<Self> {
        let (xs, raw): (Vec<f64>, Vec<f64>) = match kind {
            Kind::Discrete => xs.into_iter().zip(raw).filter(|(_, w)| *w > f64::NEG_INFINITY).unzip(),
            Kind::Continuous => (xs, raw),
        };
        if xs.is_empty() {
            return Err(Error::UnattainableEndpoint { n: n + m, z });
        }
        let top = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY || top.is_nan() {
            return Err(Error::UnattainableEndpoint { n: n + m, z });
        }
        let w: Vec<f64> = raw.iter().map(|r| (r - top).exp()).collect();
        let len = xs.len();
        let mut cdf = vec![0.0; len];
        let mut sf = vec![0.0; len];
        let log_mass = match kind {
            Kind::Discrete => {
                let mut acc = 0.0;
                for i in 0..len {
                    acc += w[i];
                    cdf[i] = acc;
                }
                let mut acc = 0.0;
                for i in (0..len).rev() {
                    sf[i] = acc;
                    acc += w[i];
                }
                log_sum_exp(&raw)
            }
            Kind::Continuous => {
                if len < 2 {
                    return Err(Error::UnattainableEndpoint { n: n + m, z });
                }
                for i in 1..len {
                    cdf[i] = cdf[i - 1] + 0.5 * (w[i - 1] + w[i]) * (xs[i] - xs[i - 1]);
                }
                for i in (0..len - 1).rev() {
                    sf[i] = sf[i + 1] + 0.5 * (w[i] + w[i + 1]) * (xs[i + 1] - xs[i]);
                }
                cdf[len - 1].ln() + top
            }
        };
        let total = cdf[len - 1];
        cdf.iter_mut().for_each(|c| *c = (*c / total).min(1.0));
        sf.iter_mut().for_each(|s| *s = (*s / total).min(1.0));
        cdf[len - 1] = 1.0;
        sf[len - 1] = 0.0;
        let log_weights = raw.iter().map(|r| r - log_mass).collect();
        Ok(MidpointLaw { n, m, z, kind, xs, log_weights, cdf, sf, normalizer: log_mass, engine })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == Kind::Discrete
    }

    /// Total mass (sum, or trapezoid integral) of `exp(log_weights)`.
    pub fn mass(&self) -> f64 {
        let w: Vec<f64> = self.log_weights.iter().map(|l| l.exp()).collect();
        match self.kind {
            Kind::Discrete => w.iter().sum(),
            Kind::Continuous => self.xs.windows(2).zip(w.windows(2)).map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0])).sum(),
        }
    }

    /// Mass or density at a support point, `−∞` elsewhere (lattice) or by
    /// linear interpolation of the log weights (grid).
    pub fn log_weight_at(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Discrete => match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
                Ok(i) => self.log_weights[i],
                Err(_) => f64::NEG_INFINITY,
            },
            Kind::Continuous => {
                if x < self.xs[0] || x > self.xs[self.len() - 1] {
                    return f64::NEG_INFINITY;
                }
                let i = self.xs.partition_point(|v| *v <= x).clamp(1, self.len() - 1);
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let t = (x - x0) / (x1 - x0);
                let (a, b) = (self.log_weights[i - 1], self.log_weights[i]);
                if t <= 0.0 {
                    a
                } else if t >= 1.0 {
                    b
                } else {
                    a + t * (b - a)
                }
            }
        }
    }

    fn interp(&self, i: usize, target: f64, table: &[f64]) -> f64 {
        if i == 0 || self.is_discrete() {
            return self.xs[i];
        }
        let (c0, c1) = (table[i - 1], table[i]);
        if c1 == c0 {
            return self.xs[i];
        }
        let t = ((target - c0) / (c1 - c0)).clamp(0.0, 1.0);
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }

    /// Smallest `x` with `P(X ≤ x) ≥ p`.
    pub fn quantile_lower(&self, p: f64) -> f64 {
        let i = self.cdf.partition_point(|c| *c < p).min(self.len() - 1);
        self.interp(i, p, &self.cdf)
    }

    /// Smallest `x` with `P(X > x) ≤ q`; accurate for small `q`.
    pub fn quantile_upper(&self, q: f64) -> f64 {
        let i = self.sf.partition_point(|s| *s > q).min(self.len() - 1);
        if i == 0 || self.is_discrete() {
            return self.xs[i];
        }
        let (s0, s1) = (self.sf[i - 1], self.sf[i]);
        if s0 == s1 {
            return self.xs[i];
        }
        let t = ((s0 - q) / (s0 - s1)).clamp(0.0, 1.0);
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        self.quantile_lower(p)
    }

    /// `P(X ≤ x)`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|v| *v <= x);
        if i == 0 {
            return 0.0;
        }
        if i == self.len() || self.is_discrete() {
            return self.cdf[i - 1];
        }
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        self.cdf[i - 1] + t * (self.cdf[i] - self.cdf[i - 1])
    }

    /// `P(X < x)`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|v| *v < x);
        if i == 0 {
            0.0
        } else if self.is_discrete() {
            self.cdf[i - 1]
        } else {
            self.cdf_at(x)
        }
    }

    /// `P(X > x)`.
    pub fn sf_at(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|v| *v <= x);
        if i == 0 {
            return 1.0;
        }
        if i == self.len() || self.is_discrete() {
            return self.sf[i - 1];
        }
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        self.sf[i - 1] + t * (self.sf[i] - self.sf[i - 1])
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn std_dev(&self) -> f64 {
        self.moments().1.sqrt()
    }

    fn moments(&self) -> (f64, f64) {
        let w: Vec<f64> = self.log_weights.iter().map(|l| l.exp()).collect();
        match self.kind {
            Kind::Discrete => {
                let mean: f64 = self.xs.iter().zip(&w).map(|(x, p)| x * p).sum();
                let var = self.xs.iter().zip(&w).map(|(x, p)| (x - mean).powi(2) * p).sum();
                (mean, var)
            }
            Kind::Continuous => {
                let trap = |g: &dyn Fn(f64) -> f64| -> f64 {
                    (1..self.len())
                        .map(|i| 0.5 * (g(self.xs[i - 1]) * w[i - 1] + g(self.xs[i]) * w[i]) * (self.xs[i] - self.xs[i - 1]))
                        .sum()
                };
                let mean = trap(&|x| x);
                let var = trap(&|x| (x - mean).powi(2));
                (mean, var)
            }
        }
    }
}

/// Evaluates `log f_k(x)` or `log p_k(x)` in the engine of choice and builds
/// midpoint laws from those values. Tables are shared and built lazily.
#[derive(Debug)]
pub struct DensityOracle {
    dist: JumpDistribution,
    engine: Engine,
    min_n: usize,
    sd: f64,
    cache: Option<Arc<TableCache>>,
}

impl DensityOracle {
    /// Oracle whose tables are tilted toward the per-step slope `slope`.
    pub fn new(dist: &JumpDistribution, engine: Engine, slope: f64) -> Result<Self> {
        Self::with_grid(dist, engine, slope, None)
    }

    pub fn with_grid(dist: &JumpDistribution, engine: Engine, slope: f64, grid: Option<GridSpec>) -> Result<Self> {
        let uses_tables = matches!(engine, Engine::Exact | Engine::Auto);
        let cache = if uses_tables {
            let tilt = tilt_for_slope(dist, slope, 2)?;
            Some(Arc::new(TableCache::with_tilt(dist, tilt, grid, DEFAULT_BUDGET)?))
        } else {
            None
        };
        let tilt = cache.as_ref().map_or(0.0, |c| c.tilt());
        let sd = dist.log_mgf_d2(tilt).unwrap_or_else(|_| dist.variance()).sqrt();
        Ok(DensityOracle { dist: dist.clone(), engine, min_n: DEFAULT_MIN_N, sd, cache })
    }

    pub fn dist(&self) -> &JumpDistribution {
        &self.dist
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn with_min_n(mut self, min_n: usize) -> Self {
        self.min_n = min_n;
        self
    }

    pub fn cache(&self) -> Option<&Arc<TableCache>> {
        self.cache.as_ref()
    }

    fn resolved(&self, k: usize) -> Engine {
        match self.engine {
            Engine::Auto if self.dist.is_discrete() || k < self.min_n => Engine::Exact,
            Engine::Auto => Engine::Saddle,
            e => e,
        }
    }

    /// `log f_k(x)` (grid value for tables) or `log p_k(x)`.
    pub fn log_density(&self, k: usize, x: f64) -> Result<f64> {
        if k == 1 {
            return Ok(self.dist.log_weight(x));
        }
        let (alpha, beta) = self.dist.support();
        let (lo, hi) = (k as f64 * alpha, k as f64 * beta);
        if !(x >= lo && x <= hi) {
            return Ok(f64::NEG_INFINITY);
        }
        match self.resolved(k) {
            Engine::Exact => {
                let cache = self.cache.as_ref().ok_or(Error::Spec("oracle has no tables".into()))?;
                Ok(cache.get(k)?.log_value_at(x))
            }
            e => {
                if x == lo || x == hi {
                    return Ok(if self.dist.is_discrete() { k as f64 * self.dist.log_weight(x / k as f64) } else { f64::NEG_INFINITY });
                }
                let r = if e == Engine::Saddle {
                    density_saddle(&self.dist, k, x)
                } else {
                    density_gaussian_asymptotic(&self.dist, k, x)
                };
                match r {
                    Err(Error::SlopeOutOfRange { .. }) => Ok(f64::NEG_INFINITY),
                    other => other,
                }
            }
        }
    }

    fn raw_weights(&self, n: usize, m: usize, z: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let eval = |x: &f64| -> Result<f64> {
            let a = self.log_density(n, *x)?;
            if a == f64::NEG_INFINITY {
                return Ok(a);
            }
            Ok(a + self.log_density(m, z - *x)?)
        };
        if matches!(self.resolved(n.max(m)), Engine::Saddle) {
            xs.par_iter().map(eval).collect()
        } else {
            xs.iter().map(eval).collect()
        }
    }

    /// Law of `S_n` given `S_{n+m} = z`.
    pub fn midpoint_law(&self, n: usize, m: usize, z: f64) -> Result<MidpointLaw> {
        if n == 0 || m == 0 {
            return Err(Error::Spec("midpoint split sizes must be positive".into()));
        }
        let total = n + m;
        let (alpha, beta) = self.dist.support();
        let (lo_n, hi_n) = ((n as f64 * alpha).max(z - m as f64 * beta), (n as f64 * beta).min(z - m as f64 * alpha));
        if !(lo_n <= hi_n) || !z.is_finite() {
            return Err(Error::UnattainableEndpoint { n: total, z });
        }
        if self.dist.is_discrete() {
            if z.fract() != 0.0 {
                return Err(Error::UnattainableEndpoint { n: total, z });
            }
            let law = match self.lattice_law(n, m, z, lo_n, hi_n) {
                Err(Error::UnattainableEndpoint { .. }) if self.cache.is_some() => {
                    // every product underflowed in the shared tables
                    return self.retilted(z / total as f64)?.lattice_law(n, m, z, lo_n, hi_n);
                }
                other => other?,
            };
            if let Some(local) = self.lacks_accuracy(&law, n, m, z)? {
                return local.lattice_law(n, m, z, lo_n, hi_n);
            }
            Ok(law)
        } else {
            self.grid_law(n, m, z, lo_n, hi_n)
        }
    }

    /// A retilted oracle when the shared tables underflowed at the mode.
    fn lacks_accuracy(&self, law: &MidpointLaw, n: usize, m: usize, z: f64) -> Result<Option<DensityOracle>> {
        let Some(cache) = &self.cache else { return Ok(None) };
        if self.resolved(n.max(m)) != Engine::Exact || (n == 1 && m == 1) {
            return Ok(None);
        }
        let mode = law
            .log_weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| law.xs[i])
            .unwrap_or(z / 2.0);
        let weak = |k: usize, x: f64| -> Result<bool> { Ok(k > 1 && cache.get(k)?.tilted_value(x) < TILT_FLOOR) };
        if weak(n, mode)? || weak(m, z - mode)? {
            return Ok(Some(self.retilted(z / (n + m) as f64)?));
        }
        Ok(None)
    }

    fn retilted(&self, slope: f64) -> Result<DensityOracle> {
        let grid = self.cache.as_ref().and_then(|c| c.grid());
        Ok(DensityOracle::with_grid(&self.dist, self.engine, slope, grid)?.with_min_n(self.min_n))
    }

    fn lattice_law(&self, n: usize, m: usize, z: f64, lo: f64, hi: f64) -> Result<MidpointLaw> {
        let kind = Kind::Discrete;
        if n == 1 && m == 1 {
            if let Some(atoms) = self.dist.atoms() {
                let mut xs: Vec<f64> = atoms.xs.iter().flat_map(|&a| [a as f64, z - a as f64]).collect();
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                xs.dedup();
                let raw = xs.iter().map(|&x| self.dist.log_weight(x) + self.dist.log_weight(z - x)).collect();
                return MidpointLaw::from_raw(n, m, z, kind, xs, raw, self.engine);
            }
        }
        if lo.is_finite() && hi.is_finite() && hi - lo < FULL_SUPPORT_LIMIT as f64 {
            let xs: Vec<f64> = (lo as i64..=hi as i64).map(|k| k as f64).collect();
            let raw = self.raw_weights(n, m, z, &xs)?;
            return MidpointLaw::from_raw(n, m, z, kind, xs, raw, self.engine);
        }
        let centre = (z * n as f64 / (n + m) as f64).round();
        let sd = self.sd * ((n * m) as f64 / (n + m) as f64).sqrt();
        let mut half = (14.0 * sd).ceil().max(64.0);
        loop {
            let a = (centre - half).max(lo);
            let b = (centre + half).min(hi);
            let xs: Vec<f64> = (a as i64..=b as i64).map(|k| k as f64).collect();
            let raw = self.raw_weights(n, m, z, &xs)?;
            let top = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let open_lo = a > lo && raw[0] > top - EDGE_LOG_GAP;
            let open_hi = b < hi && raw[raw.len() - 1] > top - EDGE_LOG_GAP;
            if !(open_lo || open_hi) || half > 1e8 {
                return MidpointLaw::from_raw(n, m, z, kind, xs, raw, self.engine);
            }
            half *= 2.0;
        }
    }

    fn grid_law(&self, n: usize, m: usize, z: f64, lo: f64, hi: f64) -> Result<MidpointLaw> {
        let total = n + m;
        let centre = z * n as f64 / total as f64;
        let sd_z = crate::cramer::solve_saddle(&self.dist, z / total as f64).map(|s| s.sigma_z_sq.sqrt()).unwrap_or(self.sd);
        let sd = sd_z * ((n * m) as f64 / total as f64).sqrt();
        let (mut a, mut b) = ((centre - 8.0 * sd).max(lo), (centre + 8.0 * sd).min(hi));
        for _ in 0..40 {
            let step = (b - a) / (CONTINUOUS_POINTS - 1) as f64;
            let xs: Vec<f64> = (0..CONTINUOUS_POINTS).map(|i| a + i as f64 * step).collect();
            let raw = self.raw_weights(n, m, z, &xs)?;
            let law = MidpointLaw::from_raw(n, m, z, Kind::Continuous, xs, raw, self.engine)?;
            let width = b - a;
            let edge = |i: usize| law.log_weights[i].exp() * width;
            let grow_lo = a > lo && edge(0) > EDGE_MASS_REL;
            let grow_hi = b < hi && edge(law.len() - 1) > EDGE_MASS_REL;
            if !(grow_lo || grow_hi) {
                return Ok(law);
            }
            if grow_lo {
                a = (a - 0.5 * width).max(lo);
            }
            if grow_hi {
                b = (b + 0.5 * width).min(hi);
            }
        }
        Err(Error::QuadratureFailure { value: f64::NAN, error: f64::NAN })
    }
}

/// Law of `S_n` given `S_{n+m} = z` with tables tilted toward `z/(n+m)`.
pub fn midpoint_law(dist: &JumpDistribution, n: usize, m: usize, z: f64, engine: Engine) -> Result<MidpointLaw> {
    if n.abs_diff(m) > 1 {
        return Err(Error::Spec(format!("split sizes {n} and {m} differ by more than one")));
    }
    let (alpha, beta) = dist.support();
    let slope = (z / (n + m) as f64).clamp(alpha, beta);
    DensityOracle::new(dist, engine, slope)?.midpoint_law(n, m, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;

    fn ln_choose(n: usize, k: usize) -> f64 {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }

    fn bern() -> JumpDistribution {
        JumpDistribution::bernoulli(0.5).unwrap()
    }

    #[test]
    fn two_step_bernoulli() {
        let law = midpoint_law(&bern(), 1, 1, 1.0, Engine::Exact).unwrap();
        assert_eq!(law.xs, vec![0.0, 1.0]);
        for w in &law.log_weights {
            assert!((w.exp() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hypergeometric_weights() {
        for n in 1..=8 {
            for l in 0..=2 * n {
                let law = midpoint_law(&bern(), n, n, l as f64, Engine::Exact).unwrap();
                for (x, w) in law.xs.iter().zip(&law.log_weights) {
                    let k = *x as usize;
                    let exact = (ln_choose(n, k) + ln_choose(n, l - k) - ln_choose(2 * n, l)).exp();
                    assert!((w.exp() - exact).abs() < 1e-12, "n={n} l={l} k={k}");
                }
                assert!((law.mass() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometric_pair_is_uniform() {
        let d = JumpDistribution::geometric(0.5).unwrap();
        let law = midpoint_law(&d, 1, 1, 2.0, Engine::Exact).unwrap();
        assert_eq!(law.xs, vec![0.0, 1.0, 2.0]);
        for w in &law.log_weights {
            assert!((w.exp() - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn saddle_engine_matches_tables() {
        let d = JumpDistribution::bernoulli(0.4).unwrap();
        let exact = midpoint_law(&d, 40, 40, 30.0, Engine::Exact).unwrap();
        let saddle = midpoint_law(&d, 40, 40, 30.0, Engine::Saddle).unwrap();
        assert_eq!(exact.xs, saddle.xs);
        for (a, b) in exact.log_weights.iter().zip(&saddle.log_weights) {
            if *a > -30.0 {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn large_split_uses_window() {
        let law = midpoint_law(&bern(), 4096, 4096, 4096.0, Engine::Exact).unwrap();
        assert!(law.len() < 4097);
        assert!((law.mass() - 1.0).abs() < 1e-10);
        let centre = law.log_weight_at(2048.0);
        let exact = 2.0 * ln_choose(4096, 2048) - ln_choose(8192, 4096);
        assert!((centre - exact).abs() < 1e-9);
        assert!((law.mean() - 2048.0).abs() < 1e-9);
    }

    #[test]
    fn far_slope_retilts() {
        // tables tilted at 1/2 underflow near slope 0.05
        let oracle = DensityOracle::new(&bern(), Engine::Exact, 0.5).unwrap();
        let law = oracle.midpoint_law(2000, 2000, 200.0).unwrap();
        let k = 100usize;
        let exact = ln_choose(2000, k) + ln_choose(2000, 200 - k) - ln_choose(4000, 200);
        assert!((law.log_weight_at(k as f64) - exact).abs() < 1e-8);
    }

    #[test]
    fn cdf_and_quantiles() {
        let law = midpoint_law(&bern(), 2, 2, 2.0, Engine::Exact).unwrap();
        assert!((law.cdf[0] - 1.0 / 6.0).abs() < 1e-14);
        assert!((law.cdf[1] - 5.0 / 6.0).abs() < 1e-14);
        assert_eq!(law.quantile(0.5), 1.0);
        assert_eq!(law.quantile(0.1), 0.0);
        assert_eq!(law.quantile(0.9), 2.0);
        assert_eq!(law.quantile_upper(0.1), 2.0);
        assert_eq!(law.quantile_upper(0.5), 1.0);
        for (i, x) in law.xs.iter().enumerate() {
            assert_eq!(law.quantile(law.cdf[i]), *x);
        }
    }

    #[test]
    fn continuous_law_is_normalized_and_symmetric() {
        let d = JumpDistribution::tabulated_standard_normal(0.01, 10.0).unwrap();
        let law = midpoint_law(&d, 8, 8, 1.0, Engine::Auto).unwrap();
        assert!((law.mass() - 1.0).abs() < 1e-6);
        assert!((law.mean() - 0.5).abs() < 1e-3);
        // Gaussian bridge: variance 8·8/16
        assert!((law.std_dev() - 2.0).abs() < 1e-2);
        for x in [0.5, 1.5, 3.0] {
            let a = law.log_weight_at(0.5 + x);
            let b = law.log_weight_at(0.5 - x);
            assert!((a - b).abs() < 1e-3, "{a} {b}");
        }
        let step = law.xs[1] - law.xs[0];
        for &p in &[0.01, 0.3, 0.5, 0.9] {
            let q = law.quantile(p);
            assert!((law.cdf_at(q) - p).abs() < 1e-9);
            assert!((law.quantile(law.cdf_at(q)) - q).abs() <= step);
        }
    }

    #[test]
    fn exponential_saddle_midpoint() {
        // S_n given S_2n = z has a Beta(n, n) law scaled by z
        let d = JumpDistribution::exponential(1.0).unwrap();
        let law = midpoint_law(&d, 40, 40, 80.0, Engine::Saddle).unwrap();
        for x in [30.0, 40.0, 50.0] {
            let t = x / 80.0;
            let beta = ln_gamma(80.0) - 2.0 * ln_gamma(40.0) + 39.0 * (t * (1.0 - t) as f64).ln() - 80f64.ln();
            assert!((law.log_weight_at(x) - beta).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn unattainable() {
        assert!(matches!(midpoint_law(&bern(), 2, 2, 5.0, Engine::Exact), Err(Error::UnattainableEndpoint { .. })));
        assert!(midpoint_law(&bern(), 2, 5, 2.0, Engine::Exact).is_err());
    }

    #[test]
    fn spiky_pair_enumeration() {
        let d = JumpDistribution::counterexample_spiky();
        let z = 18.0;
        let law = midpoint_law(&d, 1, 1, z, Engine::Exact).unwrap();
        let a = 3f64.powi(18) + 18.0;
        let b = -(3f64.powi(18));
        let mass = law.log_weight_at(a).exp() + law.log_weight_at(b).exp();
        assert!(mass > 1.0 - 1e-6);
        assert!(law.std_dev() > 1e8);
    }
}
