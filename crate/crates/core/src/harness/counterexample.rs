//! Two-step bridge of the spiky law, enumerated exactly in log space, and
//! the matching spread for ordinary jump laws.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::density::{midpoint_law, Engine};
use crate::error::{Error, Result};
use crate::jump_dist::{check_assumptions, CheckConfig, JumpDistribution};
use crate::numeric::log_sum_exp;

/// Small atoms enumerated around the origin and around `z`.
pub const K_MAX: i64 = 50;
/// Largest accepted `m`.
pub const M_MAX: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub m: u32,
    /// `2·3^m`.
    pub z: u64,
    /// `3^z + z` in decimal.
    pub a_z: String,
    /// `−3^z` in decimal.
    pub b_z: String,
    pub candidates: usize,
    /// Conditional mass of `S₁ ∈ {a_z, b_z}` given `S₂ = z`.
    pub spike_mass: Option<f64>,
    pub conditional_std: Option<f64>,
    pub log10_conditional_std: Option<f64>,
    /// `log₁₀(3^z / 2)`.
    pub log10_std_floor: f64,
    pub exceeds_floor: Option<bool>,
    /// `3 p(a_z) p(b_z) ≥ p₂(z)`.
    pub pair_bound_holds: Option<bool>,
    /// Set when spike weights leave the `f64` range.
    pub overflow: bool,
}

fn pow3(e: u64) -> BigInt {
    num_traits::pow(BigInt::from(3), e as usize)
}

struct Spikes {
    set: HashSet<BigInt>,
}

impl Spikes {
    fn up_to(r_max: u64) -> Self {
        let mut set = HashSet::new();
        for r in 1..=r_max {
            let p = pow3(r);
            set.insert(&p + r);
            set.insert(-p);
        }
        Spikes { set }
    }

    /// Unnormalized `log w(x)`. Away from the spikes and for `|x| ≥ 3` the
    /// weight `exp(−10^{10^{|x|}})` is below the smallest `f64`.
    fn log_weight(&self, x: &BigInt) -> f64 {
        if self.set.contains(x) {
            let v = x.to_f64().unwrap_or(f64::INFINITY);
            -(v * v)
        } else {
            match x.abs().to_i64() {
                Some(k) if k <= 2 => -(10f64.powf(10f64.powi(k as i32))),
                _ => f64::NEG_INFINITY,
            }
        }
    }
}

/// Row for one `m`. Spike indices up to `z + 2` cover every pair of
/// spikes summing to `z`.
fn counterexample_row(m: u32) -> Result<CounterexampleRow> {
    if m == 0 || m > M_MAX {
        return Err(Error::Spec(format!("m = {m} must lie in 1..={M_MAX}")));
    }
    let z = 2 * 3u64.pow(m);
    let big_z = BigInt::from(z);
    let p = pow3(z);
    let a = &p + z;
    let b = -p;
    let log10_std_floor = z as f64 * 3f64.log10() - 2f64.log10();
    let mut row = CounterexampleRow {
        m,
        z,
        a_z: a.to_string(),
        b_z: b.to_string(),
        candidates: 0,
        spike_mass: None,
        conditional_std: None,
        log10_conditional_std: None,
        log10_std_floor,
        exceeds_floor: None,
        pair_bound_holds: None,
        overflow: false,
    };
    // squared spike positions must stay finite
    if 2.0 * (z + 2) as f64 * 3f64.ln() >= f64::MAX.ln() {
        row.overflow = true;
        return Ok(row);
    }
    let spikes = Spikes::up_to(z + 2);
    let mut cands: HashSet<BigInt> = HashSet::new();
    for s in &spikes.set {
        cands.insert(s.clone());
        cands.insert(&big_z - s);
    }
    for k in -K_MAX..=K_MAX {
        cands.insert(BigInt::from(k));
        cands.insert(&big_z - k);
    }
    let mut cands: Vec<BigInt> = cands.into_iter().collect();
    cands.sort();
    let lw: Vec<f64> = cands.iter().map(|k| spikes.log_weight(k) + spikes.log_weight(&(&big_z - k))).collect();
    row.candidates = cands.len();
    let total = log_sum_exp(&lw);
    let pair = spikes.log_weight(&a) + spikes.log_weight(&b);
    if !total.is_finite() || !pair.is_finite() {
        row.overflow = true;
        return Ok(row);
    }
    // weights relative to the largest term, so the top terms are exact
    let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rel: Vec<f64> = lw.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = rel.iter().sum();
    let mass_of = |x: &BigInt| cands.binary_search(x).map(|i| rel[i] / sum).unwrap_or(0.0);
    row.spike_mass = Some(mass_of(&a) + mass_of(&b));
    // moments about z/2 keep the cancellation small
    let half = z as f64 / 2.0;
    let (mut mean, mut sq) = (0.0, 0.0);
    for (k, r) in cands.iter().zip(&rel) {
        let w = r / sum;
        if w > 0.0 {
            let c = k.to_f64().unwrap_or(f64::INFINITY) - half;
            mean += w * c;
            sq += w * c * c;
        }
    }
    let std = (sq - mean * mean).max(0.0).sqrt();
    row.conditional_std = Some(std);
    row.log10_conditional_std = Some(std.log10());
    row.exceeds_floor = Some(std.log10() >= log10_std_floor);
    row.pair_bound_holds = Some(3f64.ln() + pair >= total);
    Ok(row)
}

/// One row per `m`.
pub fn run_counterexample(m_list: &[u32]) -> Result<Vec<CounterexampleRow>> {
    if m_list.is_empty() {
        return Err(Error::Spec("m list must not be empty".into()));
    }
    m_list.iter().map(|&m| counterexample_row(m)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadRow {
    pub family: String,
    pub log_concave: bool,
    pub z: f64,
    pub conditional_std: f64,
    pub jump_sd: f64,
    /// `conditional_std / jump_sd`.
    pub ratio: f64,
}

/// Standard deviation of `S₁` given `S₂ = z` at endpoints
/// `2μ + c√2σ` for `c ∈ {−2, …, 2}` strictly inside the attainable range.
pub fn midpoint_spread(dist: &JumpDistribution) -> Result<Vec<SpreadRow>> {
    let log_concave = check_assumptions(dist, &CheckConfig::default()).log_concave;
    let (alpha, beta) = dist.support();
    let (mu, sd) = (dist.mean(), dist.variance().sqrt());
    let mut zs: Vec<f64> = (-2..=2)
        .map(|c| {
            let z = 2.0 * mu + c as f64 * 2f64.sqrt() * sd;
            if dist.is_discrete() {
                z.round()
            } else {
                z
            }
        })
        .filter(|z| *z > 2.0 * alpha && *z < 2.0 * beta)
        .collect();
    zs.dedup();
    zs.into_iter()
        .map(|z| {
            let law = midpoint_law(dist, 1, 1, z, Engine::Auto)?;
            let s = law.std_dev();
            Ok(SpreadRow { family: dist.name().to_string(), log_concave, z, conditional_std: s, jump_sd: sd, ratio: s / sd })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_pair() {
        let r = counterexample_row(1).unwrap();
        assert_eq!(r.z, 6);
        assert_eq!(r.a_z, "735");
        assert_eq!(r.b_z, "-729");
        assert!(!r.overflow);
        assert!(r.spike_mass.unwrap() > 1.0 - 1e-12, "{r:?}");
        // the pair splits evenly, so the spread is (a − b)/2
        assert!((r.conditional_std.unwrap() - 732.0).abs() < 1e-9);
        assert_eq!(r.pair_bound_holds, Some(true));
    }

    #[test]
    fn large_m_trips_guard() {
        let r = counterexample_row(5).unwrap();
        assert!(r.overflow);
        assert_eq!(r.spike_mass, None);
        let r4 = counterexample_row(4).unwrap();
        assert!(!r4.overflow);
        assert_eq!(r4.exceeds_floor, Some(true));
        assert!(counterexample_row(9).is_err());
        assert!(run_counterexample(&[]).is_err());
    }

    #[test]
    fn weights_off_spikes() {
        let s = Spikes::up_to(4);
        assert_eq!(s.log_weight(&BigInt::from(0)), -10.0);
        assert_eq!(s.log_weight(&BigInt::from(-2)), -1e100);
        assert_eq!(s.log_weight(&BigInt::from(5)), f64::NEG_INFINITY);
        assert_eq!(s.log_weight(&BigInt::from(11)), -121.0);
        assert_eq!(s.log_weight(&BigInt::from(-27)), -729.0);
    }

    #[test]
    fn bernoulli_spread() {
        let rows = midpoint_spread(&JumpDistribution::bernoulli(0.5).unwrap()).unwrap();
        let mid = rows.iter().find(|r| r.z == 1.0).unwrap();
        assert!((mid.conditional_std - 0.5).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.conditional_std <= 1.0));
    }
}
