use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::node_rng;
use super::{couple_midpoint, fill_brownian, path_delta, CoupledSample, CouplerConfig};
use crate::cramer::solve_saddle;
use crate::density::{DensityOracle, DensityTable, Engine, MidpointLaw};
use crate::error::{Error, Result};
use crate::jump_dist::JumpDistribution;

// recursion below this size runs on the calling thread
const PARALLEL_SPLIT: usize = 4096;
// cap on cached midpoint-law points
const LAW_CACHE_POINTS: usize = 8_000_000;
// atom laws with at most this many atoms are stepped inline in base cases
const INLINE_ATOMS: usize = 64;

type LawKey = (usize, usize, i64);

/// Reusable sampler for one jump law, endpoint and configuration.
#[derive(Debug)]
pub struct Coupler {
    dist: JumpDistribution,
    cfg: CouplerConfig,
    n: usize,
    z: f64,
    sigma_p: f64,
    oracle: DensityOracle,
    small: Vec<Arc<DensityTable>>,
    steps: Option<(Vec<i64>, Vec<f64>)>,
    laws: RwLock<HashMap<LawKey, Arc<MidpointLaw>>>,
    law_points: AtomicUsize,
}

fn attainable(dist: &JumpDistribution, n: usize, z: f64) -> Result<()> {
    let (alpha, beta) = dist.support();
    let nf = n as f64;
    let ok = z.is_finite() && z >= nf * alpha && z <= nf * beta && (!dist.is_discrete() || z.fract() == 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::UnattainableEndpoint { n, z })
    }
}

impl Coupler {
    pub fn new(dist: &JumpDistribution, n: usize, z: f64, cfg: CouplerConfig) -> Result<Self> {
        cfg.validate()?;
        if n == 0 {
            return Err(Error::Spec("n must be positive".into()));
        }
        attainable(dist, n, z)?;
        let (alpha, beta) = dist.support();
        let p = cfg.ref_slope.unwrap_or(z / n as f64);
        if !(p > alpha && p < beta) {
            return Err(Error::SlopeOutOfRange { slope: p, lo: alpha, hi: beta });
        }
        let sigma_p = solve_saddle(dist, p)?.sigma_z_sq.sqrt();
        let oracle = DensityOracle::new(dist, cfg.engine, p)?;
        let mut small = Vec::new();
        let mut steps = None;
        if dist.is_discrete() && matches!(cfg.engine, Engine::Exact | Engine::Auto) {
            if let Some(cache) = oracle.cache() {
                for k in 1..=cfg.n_min.min(n) {
                    small.push(cache.get(k)?);
                }
            }
            if let Some(atoms) = dist.atoms() {
                if atoms.xs.len() <= INLINE_ATOMS {
                    steps = Some((atoms.xs.clone(), atoms.xs.iter().map(|&a| dist.log_pmf(a)).collect()));
                }
            }
        }
        Ok(Coupler {
            dist: dist.clone(),
            cfg,
            n,
            z,
            sigma_p,
            oracle,
            small,
            steps,
            laws: RwLock::new(HashMap::new()),
            law_points: AtomicUsize::new(0),
        })
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn config(&self) -> &CouplerConfig {
        &self.cfg
    }

    pub fn dist(&self) -> &JumpDistribution {
        &self.dist
    }

    /// Law of the first `k` steps' sum given the `k + m`-step total `z`.
    pub fn midpoint_law(&self, k: usize, m: usize, z: f64) -> Result<Arc<MidpointLaw>> {
        if !self.dist.is_discrete() {
            return Ok(Arc::new(self.oracle.midpoint_law(k, m, z)?));
        }
        let key = (k, m, z as i64);
        if let Some(law) = self.laws.read().unwrap().get(&key) {
            return Ok(law.clone());
        }
        let law = Arc::new(self.oracle.midpoint_law(k, m, z)?);
        if self.law_points.fetch_add(law.len(), Ordering::Relaxed) < LAW_CACHE_POINTS {
            self.laws.write().unwrap().insert(key, law.clone());
        }
        Ok(law)
    }

    /// Sample number `index` under the configured seed.
    pub fn sample(&self, index: u64) -> Result<CoupledSample> {
        let n = self.n;
        let mut s = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        let (xi_count, root_w) = self.fill(n, self.z, index, 1, &mut s[1..], &mut b[1..])?;
        let delta = path_delta(&s, &b, self.z);
        Ok(CoupledSample {
            n,
            z: self.z,
            sample_index: index,
            s_path: s,
            b_path: b,
            delta,
            xi_count,
            midpoint_w: root_w,
            sigma_p: self.sigma_p,
        })
    }

    /// Fills `S_1..S_n` and `𝔅_1..𝔅_n` for a bridge ending at `z`.
    fn fill(&self, n: usize, z: f64, index: u64, node: u64, s: &mut [f64], b: &mut [f64]) -> Result<(usize, Option<f64>)> {
        let mut rng = node_rng(self.cfg.rng_seed, index, node);
        if n <= self.cfg.n_min {
            self.base_path(n, z, &mut rng, s)?;
            fill_brownian(b, self.sigma_p, &mut rng);
            return Ok((n.saturating_sub(1), None));
        }
        let k = n / 2;
        let xi: f64 = rng.sample(StandardNormal);
        let law = self.midpoint_law(k, n - k, z)?;
        let w = couple_midpoint(&law, xi, self.cfg.mode, self.cfg.eps3, &mut rng);
        let big_m = self.sigma_p * ((k * (n - k)) as f64 / n as f64).sqrt() * xi;
        let (s_left, s_right) = s.split_at_mut(k);
        let (b_left, b_right) = b.split_at_mut(k);
        let (l, r) = if n >= PARALLEL_SPLIT {
            rayon::join(
                || self.fill(k, w, index, 2 * node, &mut *s_left, &mut *b_left),
                || self.fill(n - k, z - w, index, 2 * node + 1, &mut *s_right, &mut *b_right),
            )
        } else {
            (
                self.fill(k, w, index, 2 * node, s_left, b_left),
                self.fill(n - k, z - w, index, 2 * node + 1, s_right, b_right),
            )
        };
        let (l, r) = (l?.0, r?.0);
        for (t, bv) in b_left.iter_mut().enumerate() {
            *bv += (t + 1) as f64 / k as f64 * big_m;
        }
        let rest = (n - k) as f64;
        for (t, (sv, bv)) in s_right.iter_mut().zip(b_right.iter_mut()).enumerate() {
            *sv += w;
            *bv += (rest - (t + 1) as f64) / rest * big_m;
        }
        Ok((1 + l + r, Some(w)))
    }

    /// Exact bridge path `S_1..S_n` ending at `z`.
    fn base_path<R: Rng + ?Sized>(&self, n: usize, z: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let mut s = 0.0;
        for i in 1..n {
            let rest = n - i;
            let rem = z - s;
            let step = match self.inline_step(rest, rem, rng) {
                Some(a) => a,
                None => {
                    let law = self.midpoint_law(1, rest, rem)?;
                    law.quantile_lower(rng.random::<f64>())
                }
            };
            s += step;
            out[i - 1] = s;
        }
        if n >= 1 {
            out[n - 1] = z;
        }
        Ok(())
    }

    /// One step of a lattice bridge from the prebuilt small tables, or
    /// `None` when they do not resolve this endpoint.
    fn inline_step<R: Rng + ?Sized>(&self, rest: usize, rem: f64, rng: &mut R) -> Option<f64> {
        let (xs, lp) = self.steps.as_ref()?;
        let table = self.small.get(rest - 1)?;
        let rem = rem as i64;
        let mut buf = [f64::NEG_INFINITY; INLINE_ATOMS];
        let (mut top, mut mode) = (f64::NEG_INFINITY, 0);
        for (j, (&a, &l)) in xs.iter().zip(lp).enumerate() {
            let v = l + table.log_pmf(rem - a);
            buf[j] = v;
            if v > top {
                top = v;
                mode = j;
            }
        }
        // tilted entries this small have lost relative accuracy
        if top == f64::NEG_INFINITY || (rest > 1 && table.tilted_value((rem - xs[mode]) as f64) < 1e-150) {
            return None;
        }
        let mut total = 0.0;
        for v in buf[..xs.len()].iter_mut() {
            *v = (*v - top).exp();
            total += *v;
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (j, v) in buf[..xs.len()].iter().enumerate() {
            if *v > 0.0 {
                last = j;
                acc += v;
                if u < acc {
                    return Some(xs[j] as f64);
                }
            }
        }
        Some(xs[last] as f64)
    }
}

/// One coupled sample for the given configuration.
pub fn sample_coupled_bridge(dist: &JumpDistribution, n: usize, z: f64, cfg: &CouplerConfig, sample_index: u64) -> Result<CoupledSample> {
    Coupler::new(dist, n, z, cfg.clone())?.sample(sample_index)
}

/// Path `S_0..S_n` of the bridge ending at `z`, drawn step by step from
/// the exact conditional law of the next value.
pub fn exact_bridge_sample<R: Rng + ?Sized>(dist: &JumpDistribution, n: usize, z: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Spec("n must be positive".into()));
    }
    attainable(dist, n, z)?;
    let (alpha, beta) = dist.support();
    let slope = (z / n as f64).clamp(alpha, beta);
    let oracle = DensityOracle::new(dist, Engine::Auto, slope)?;
    let mut path = vec![0.0; n + 1];
    let mut s = 0.0;
    for i in 1..n {
        let law = oracle.midpoint_law(1, n - i, z - s)?;
        s += law.quantile_lower(rng.random::<f64>());
        path[i] = s;
    }
    path[n] = z;
    Ok(path)
}
