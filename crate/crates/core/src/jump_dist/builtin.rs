use serde_json::Value;

use super::{Atoms, Family, JumpDistribution, Kind};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::special::polygamma;

pub(crate) const TABLE_MASS_TOL: f64 = 1e-8;

/// Log-weight floor used for the counterexample away from its spikes.
pub const SPIKY_CLAMP: f64 = -1e300;

/// Largest spike index whose position fits in an `i64`.
pub const SPIKY_MAX_INDEX: u32 = 39;

/// `a_r = 3^r + r`.
pub fn spike_a(r: u32) -> i64 {
    3i64.pow(r) + r as i64
}

/// `b_r = −3^r`.
pub fn spike_b(r: u32) -> i64 {
    -(3i64.pow(r))
}

/// Spike index of `k` if `k ∈ A ∪ B`.
pub fn spike_index(k: i64) -> Option<u32> {
    (1..=SPIKY_MAX_INDEX).find(|&r| spike_a(r) == k || spike_b(r) == k)
}

/// Unnormalized log-weight of the counterexample: `−k²` on the spikes,
/// `−10^{10^{|k|}}` elsewhere, floored at [`SPIKY_CLAMP`].
pub fn spiky_log_weight(k: i64) -> f64 {
    if spike_index(k).is_some() {
        let x = k as f64;
        -x * x
    } else if k.abs() <= 2 {
        -(10f64.powf(10f64.powi(k.abs() as i32))).min(-SPIKY_CLAMP)
    } else {
        SPIKY_CLAMP
    }
}

fn finite(family: &str, name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(family, format!("{name} must be finite")))
    }
}

fn from_atoms(family: Family, xs: Vec<i64>, log_p: Vec<f64>, log_norm: f64) -> JumpDistribution {
    let support = match family {
        Family::CounterexampleSpiky => (f64::NEG_INFINITY, f64::INFINITY),
        _ => (xs[0] as f64, *xs.last().unwrap() as f64),
    };
    JumpDistribution {
        family,
        kind: Kind::Discrete,
        support,
        mgf_domain: (f64::NEG_INFINITY, f64::INFINITY),
        atoms: Some(Atoms { xs, log_p }),
        log_norm,
    }
}

impl JumpDistribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("bernoulli", format!("p = {p} must lie in (0, 1)")));
        }
        Ok(from_atoms(Family::Bernoulli { p }, vec![0, 1], vec![(-p).ln_1p(), p.ln()], 0.0))
    }

    pub fn uniform_int(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::invalid("uniform_int", format!("empty range {lo}..={hi}")));
        }
        let len = (hi - lo + 1) as usize;
        if len > 1 << 24 {
            return Err(Error::invalid("uniform_int", "range too wide"));
        }
        let lp = -(len as f64).ln();
        Ok(from_atoms(Family::UniformInt { lo, hi }, (lo..=hi).collect(), vec![lp; len], 0.0))
    }

    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::invalid("geometric", format!("q = {q} must lie in (0, 1)")));
        }
        Ok(JumpDistribution {
            family: Family::Geometric { q },
            kind: Kind::Discrete,
            support: (0.0, f64::INFINITY),
            mgf_domain: (f64::NEG_INFINITY, -(-q).ln_1p()),
            atoms: None,
            log_norm: 0.0,
        })
    }

    pub fn exponential(mu: f64) -> Result<Self> {
        Self::exponential_shifted(mu, 0.0)
    }

    /// Exponential law with rate `mu` translated to start at `shift`.
    pub fn exponential_shifted(mu: f64, shift: f64) -> Result<Self> {
        finite("exponential", "shift", shift)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("exponential", format!("mu = {mu} must be positive")));
        }
        Ok(JumpDistribution {
            family: Family::Exponential { mu, shift },
            kind: Kind::Continuous,
            support: (shift, f64::INFINITY),
            mgf_domain: (f64::NEG_INFINITY, mu),
            atoms: None,
            log_norm: 0.0,
        })
    }

    /// Standardized log-gamma law.
    pub fn log_gamma(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("log_gamma", format!("gamma = {gamma} must be positive")));
        }
        let m = polygamma(0, gamma);
        let sigma = polygamma(1, gamma).sqrt();
        Ok(JumpDistribution {
            family: Family::LogGamma { gamma, m, sigma },
            kind: Kind::Continuous,
            support: (f64::NEG_INFINITY, f64::INFINITY),
            mgf_domain: (-gamma * sigma, f64::INFINITY),
            atoms: None,
            log_norm: 0.0,
        })
    }

    /// Probabilities on consecutive integers from `support_lo`. Leading and
    /// trailing zeros are trimmed; the mass must be 1 within `1e-8`.
    pub fn tabulated_pmf(support_lo: i64, probs: &[f64]) -> Result<Self> {
        const F: &str = "tabulated_pmf";
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid(F, "weights must be finite and non-negative"));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > TABLE_MASS_TOL {
            return Err(Error::UnnormalizedTable { mass });
        }
        let first = probs.iter().position(|&p| p > 0.0).ok_or_else(|| Error::invalid(F, "no positive weight"))?;
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap();
        let probs: Vec<f64> = probs[first..=last].iter().map(|p| p / mass).collect();
        let lo = support_lo + first as i64;
        let (mut xs, mut lp) = (Vec::new(), Vec::new());
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                xs.push(lo + i as i64);
                lp.push(p.ln());
            }
        }
        Ok(from_atoms(Family::TabulatedPmf { support_lo: lo, probs }, xs, lp, 0.0))
    }

    /// Piecewise-linear density through the given knots. The trapezoid mass
    /// must be 1 within `1e-8`.
    pub fn tabulated_pdf(x: &[f64], density: &[f64]) -> Result<Self> {
        const F: &str = "tabulated_pdf";
        if x.len() < 2 || x.len() != density.len() {
            return Err(Error::invalid(F, "need at least two knots and matching lengths"));
        }
        if x.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(F, "knots must be finite and strictly increasing"));
        }
        if density.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::invalid(F, "density values must be finite and non-negative"));
        }
        let mass = trapezoid_mass(x, density);
        if (mass - 1.0).abs() > TABLE_MASS_TOL {
            return Err(Error::UnnormalizedTable { mass });
        }
        Ok(JumpDistribution {
            family: Family::TabulatedPdf { x: x.to_vec(), density: density.to_vec() },
            kind: Kind::Continuous,
            support: (x[0], x[x.len() - 1]),
            mgf_domain: (f64::NEG_INFINITY, f64::INFINITY),
            atoms: None,
            log_norm: mass.ln(),
        })
    }

    /// Standard normal density tabulated with spacing `h` on
    /// `[−half_width, half_width]`, renormalized to unit trapezoid mass.
    pub fn tabulated_standard_normal(h: f64, half_width: f64) -> Result<Self> {
        if !(h > 0.0 && half_width > h) {
            return Err(Error::invalid("tabulated_pdf", "need 0 < h < half_width"));
        }
        let n = (half_width / h).round() as i64;
        let x: Vec<f64> = (-n..=n).map(|i| i as f64 * h).collect();
        let mut f: Vec<f64> = x.iter().map(|&v| crate::gaussian::pdf(v)).collect();
        let mass = trapezoid_mass(&x, &f);
        f.iter_mut().for_each(|v| *v /= mass);
        Self::tabulated_pdf(&x, &f)
    }

    /// The spiky law `p(k) ∝ w(k)`.
    pub fn counterexample_spiky() -> Self {
        let mut xs: Vec<i64> = (-2..=2).collect();
        for r in 1..=SPIKY_MAX_INDEX {
            xs.push(spike_a(r));
            xs.push(spike_b(r));
        }
        xs.sort_unstable();
        let lw: Vec<f64> = xs.iter().map(|&k| spiky_log_weight(k)).collect();
        let log_norm = log_sum_exp(&lw);
        let lp = lw.iter().map(|v| v - log_norm).collect();
        from_atoms(Family::CounterexampleSpiky, xs, lp, log_norm)
    }
}

pub(crate) fn trapezoid_mass(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2).zip(f.windows(2)).map(|(xw, fw)| 0.5 * (xw[1] - xw[0]) * (fw[0] + fw[1])).sum()
}

fn num(family: &str, params: &Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::invalid(family, format!("missing numeric parameter `{key}`")))
}

fn int(family: &str, params: &Value, key: &str) -> Result<i64> {
    params
        .get(key)
        .and_then(Value::as_i64)
        .ok_or_else(|| Error::invalid(family, format!("missing integer parameter `{key}`")))
}

fn num_list(family: &str, params: &Value, key: &str) -> Result<Vec<f64>> {
    params
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::invalid(family, format!("missing array parameter `{key}`")))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| Error::invalid(family, format!("`{key}` must hold numbers"))))
        .collect()
}

/// Builds a family from its name and a JSON parameter object.
///
/// | family | params |
/// |---|---|
/// | `bernoulli` | `p` |
/// | `uniform_int` | `lo`, `hi` |
/// | `geometric` | `q` |
/// | `exponential` | `mu`, optional `shift` |
/// | `log_gamma` | `gamma` |
/// | `tabulated_pmf` | `support_lo`, `weights` |
/// | `tabulated_pdf` | `x`, `density` |
/// | `counterexample_spiky` | none |
pub fn make_builtin(family: &str, params: &Value) -> Result<JumpDistribution> {
    match family {
        "bernoulli" => JumpDistribution::bernoulli(num(family, params, "p")?),
        "uniform_int" => JumpDistribution::uniform_int(int(family, params, "lo")?, int(family, params, "hi")?),
        "geometric" => JumpDistribution::geometric(num(family, params, "q")?),
        "exponential" => {
            let shift = params.get("shift").and_then(Value::as_f64).unwrap_or(0.0);
            JumpDistribution::exponential_shifted(num(family, params, "mu")?, shift)
        }
        "log_gamma" => JumpDistribution::log_gamma(num(family, params, "gamma")?),
        "tabulated_pmf" => {
            JumpDistribution::tabulated_pmf(int(family, params, "support_lo")?, &num_list(family, params, "weights")?)
        }
        "tabulated_pdf" => {
            JumpDistribution::tabulated_pdf(&num_list(family, params, "x")?, &num_list(family, params, "density")?)
        }
        "counterexample_spiky" => Ok(JumpDistribution::counterexample_spiky()),
        other => Err(Error::invalid(other, "unknown family")),
    }
}
