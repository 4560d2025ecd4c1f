//! Jump laws for the random walk: built-in families, tabulated laws and the
//! spiky counterexample, with density/pmf and cumulant generating function
//! evaluators.

mod assumptions;
mod builtin;
mod mgf;
mod spec;

pub use assumptions::{check_assumptions, AssumptionId, AssumptionReport, Check, CheckConfig, Side, Status, TailParams};
pub use builtin::make_builtin;
pub use spec::{dist_from_json, dist_from_value, load_dist};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Continuous,
    Discrete,
}

/// Parameter record of a jump law.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Bernoulli { p: f64 },
    /// Uniform on the integers `lo..=hi`.
    UniformInt { lo: i64, hi: i64 },
    /// `p(k) = q (1 − q)^k` for `k ≥ 0`.
    Geometric { q: f64 },
    /// Rate `mu`, shifted so the support starts at `shift`.
    Exponential { mu: f64, shift: f64 },
    /// Standardized `(ξ − m)/σ` where `ξ` has density `exp(γx − eˣ)/Γ(γ)`.
    LogGamma { gamma: f64, m: f64, sigma: f64 },
    /// Probabilities on `support_lo, support_lo + 1, …`.
    TabulatedPmf { support_lo: i64, probs: Vec<f64> },
    /// Piecewise-linear density through `(x[i], density[i])`.
    TabulatedPdf { x: Vec<f64>, density: Vec<f64> },
    CounterexampleSpiky,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Bernoulli { .. } => "bernoulli",
            Family::UniformInt { .. } => "uniform_int",
            Family::Geometric { .. } => "geometric",
            Family::Exponential { .. } => "exponential",
            Family::LogGamma { .. } => "log_gamma",
            Family::TabulatedPmf { .. } => "tabulated_pmf",
            Family::TabulatedPdf { .. } => "tabulated_pdf",
            Family::CounterexampleSpiky => "counterexample_spiky",
        }
    }
}

/// Finitely many lattice atoms, sorted by position.
#[derive(Debug, Clone)]
pub(crate) struct Atoms {
    pub xs: Vec<i64>,
    pub log_p: Vec<f64>,
}

impl Atoms {
    fn log_mgf_real(&self, t: f64) -> f64 {
        let terms: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.log_p)
            .map(|(&x, &lp)| lp + t * x as f64)
            .collect();
        log_sum_exp(&terms)
    }

    /// Mean and central moments 2..4 of the law tilted by `e^{tx}`.
    fn tilted_moments(&self, t: f64) -> [f64; 4] {
        let terms: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.log_p)
            .map(|(&x, &lp)| lp + t * x as f64)
            .collect();
        let lz = log_sum_exp(&terms);
        let w: Vec<f64> = terms.iter().map(|v| (v - lz).exp()).collect();
        let mean: f64 = self.xs.iter().zip(&w).map(|(&x, &w)| w * x as f64).sum();
        let mut c = [mean, 0.0, 0.0, 0.0];
        for (&x, &w) in self.xs.iter().zip(&w) {
            let d = x as f64 - mean;
            c[1] += w * d * d;
            c[2] += w * d * d * d;
            c[3] += w * d * d * d * d;
        }
        c
    }
}

/// A jump law. Immutable after construction.
#[derive(Debug, Clone)]
pub struct JumpDistribution {
    pub(crate) family: Family,
    pub(crate) kind: Kind,
    pub(crate) support: (f64, f64),
    pub(crate) mgf_domain: (f64, f64),
    pub(crate) atoms: Option<Atoms>,
    /// Log normalizer for the counterexample weights and for tabulated pdfs.
    pub(crate) log_norm: f64,
}

impl JumpDistribution {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == Kind::Discrete
    }

    /// Support interval `(α, β)`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Open interval `(A_Λ, B_Λ)` on which the MGF is finite.
    pub fn mgf_domain(&self) -> (f64, f64) {
        self.mgf_domain
    }

    /// True when Λ and its derivatives are evaluated from closed forms or
    /// exact finite sums rather than numerical differentiation.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.family, Family::TabulatedPdf { .. })
    }

    /// Log density (continuous) or log mass at the integer `x` (discrete).
    /// Returns `−∞` off the support.
    pub fn log_weight(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Discrete => {
                if x.fract() != 0.0 || !x.is_finite() || x.abs() > 9.0e18 {
                    f64::NEG_INFINITY
                } else {
                    self.log_pmf(x as i64)
                }
            }
            Kind::Continuous => self.log_density(x),
        }
    }

    /// Log mass at `k`; `−∞` for continuous laws.
    pub fn log_pmf(&self, k: i64) -> f64 {
        match &self.family {
            Family::Bernoulli { p } => match k {
                0 => (-p).ln_1p(),
                1 => p.ln(),
                _ => f64::NEG_INFINITY,
            },
            Family::UniformInt { lo, hi } => {
                if k >= *lo && k <= *hi {
                    -((hi - lo + 1) as f64).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Geometric { q } => {
                if k >= 0 {
                    q.ln() + k as f64 * (-q).ln_1p()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::TabulatedPmf { support_lo, probs } => {
                let i = k.checked_sub(*support_lo);
                match i {
                    Some(i) if i >= 0 && (i as usize) < probs.len() => probs[i as usize].ln(),
                    _ => f64::NEG_INFINITY,
                }
            }
            Family::CounterexampleSpiky => builtin::spiky_log_weight(k) - self.log_norm,
            _ => f64::NEG_INFINITY,
        }
    }

    fn log_density(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { mu, shift } => {
                if x >= *shift {
                    mu.ln() - mu * (x - shift)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::LogGamma { gamma, m, sigma } => {
                let xi = m + sigma * x;
                sigma.ln() + gamma * xi - xi.exp() - crate::special::ln_gamma(*gamma)
            }
            Family::TabulatedPdf { x: xs, density } => {
                if !(x >= xs[0] && x <= xs[xs.len() - 1]) {
                    return f64::NEG_INFINITY;
                }
                let i = match xs.partition_point(|&v| v <= x) {
                    0 => 0,
                    j if j >= xs.len() => xs.len() - 2,
                    j => j - 1,
                };
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                (density[i] + t * (density[i + 1] - density[i])).ln() - self.log_norm
            }
            _ => f64::NEG_INFINITY,
        }
    }

    fn check_real(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.mgf_domain;
        if t > lo && t < hi {
            Ok(())
        } else {
            Err(Error::Domain { re: t, lo, hi })
        }
    }

    /// `Λ(t)` for real `t` in the MGF domain.
    pub fn log_mgf_real(&self, t: f64) -> Result<f64> {
        self.check_real(t)?;
        if let Some(a) = &self.atoms {
            return Ok(a.log_mgf_real(t));
        }
        Ok(match &self.family {
            Family::Geometric { q } => q.ln() - (-(1.0 - q) * t.exp()).ln_1p(),
            Family::Exponential { mu, shift } => mu.ln() - (mu - t).ln() + shift * t,
            Family::LogGamma { gamma, m, sigma } => {
                crate::special::ln_gamma(gamma + t / sigma) - crate::special::ln_gamma(*gamma) - m * t / sigma
            }
            Family::TabulatedPdf { .. } => mgf::pdf_log_mgf_principal(self, Complex64::new(t, 0.0)).re,
            _ => unreachable!("finite families carry atoms"),
        })
    }

    /// `Λ(u)` on the vertical strip, on the branch that is continuous along
    /// vertical lines and real on the real axis.
    pub fn log_mgf(&self, u: Complex64) -> Result<Complex64> {
        self.check_real(u.re)?;
        Ok(mgf::log_mgf_continuous(self, u))
    }

    /// `Λ(u)` with the principal branch of the logarithm. Cheaper than
    /// [`log_mgf`](Self::log_mgf); adequate wherever only `exp(N·Λ)` with
    /// integer `N` is consumed.
    pub fn log_mgf_principal(&self, u: Complex64) -> Result<Complex64> {
        self.check_real(u.re)?;
        Ok(mgf::log_mgf_principal(self, u))
    }

    /// `Λ⁽ᵏ⁾(t)` for `k ∈ 1..=4`.
    pub fn cumulant_derivative(&self, order: usize, t: f64) -> Result<f64> {
        self.check_real(t)?;
        if !(1..=4).contains(&order) {
            return Err(Error::Spec(format!("derivative order {order} not in 1..=4")));
        }
        if let Some(a) = &self.atoms {
            let c = a.tilted_moments(t);
            return Ok(match order {
                1 => c[0],
                2 => c[1],
                3 => c[2],
                _ => c[3] - 3.0 * c[1] * c[1],
            });
        }
        Ok(match &self.family {
            Family::Geometric { q } => {
                let r = (1.0 - q) * t.exp();
                let s = r / (1.0 - r);
                match order {
                    1 => s,
                    2 => s * (1.0 + s),
                    3 => s * (1.0 + s) * (1.0 + 2.0 * s),
                    _ => s * (1.0 + s) * (1.0 + 6.0 * s + 6.0 * s * s),
                }
            }
            Family::Exponential { mu, shift } => {
                let d = 1.0 / (mu - t);
                match order {
                    1 => d + shift,
                    2 => d * d,
                    3 => 2.0 * d * d * d,
                    _ => 6.0 * d * d * d * d,
                }
            }
            Family::LogGamma { gamma, m, sigma } => {
                let arg = gamma + t / sigma;
                let k = order as u32;
                let v = crate::special::polygamma(k - 1, arg);
                if order == 1 {
                    (v - m) / sigma
                } else {
                    v / sigma.powi(order as i32)
                }
            }
            Family::TabulatedPdf { .. } => mgf::numeric_derivative(self, order, t),
            _ => unreachable!("finite families carry atoms"),
        })
    }

    /// `Λ'(t)`.
    pub fn log_mgf_d1(&self, t: f64) -> Result<f64> {
        self.cumulant_derivative(1, t)
    }

    /// `Λ''(t)`.
    pub fn log_mgf_d2(&self, t: f64) -> Result<f64> {
        self.cumulant_derivative(2, t)
    }

    pub fn mean(&self) -> f64 {
        self.cumulant_derivative(1, 0.0).expect("0 lies in every MGF domain")
    }

    pub fn variance(&self) -> f64 {
        self.cumulant_derivative(2, 0.0).expect("0 lies in every MGF domain")
    }

    /// Finite atom list when the law has one (tabulated, bounded families and
    /// the truncated spiky law).
    pub(crate) fn atoms(&self) -> Option<&Atoms> {
        self.atoms.as_ref()
    }

    /// Integer range outside of which the law tilted by `e^{tx}` carries less
    /// than `tail` mass on each side.
    pub fn lattice_range(&self, t: f64, tail: f64) -> Result<(i64, i64)> {
        if !self.is_discrete() {
            return Err(Error::WrongKind { expected: "discrete" });
        }
        self.check_real(t)?;
        match &self.family {
            Family::Geometric { q } => {
                let r = (1.0 - q) * t.exp();
                // tilted tail beyond K is r^{K+1}
                let k = (tail.ln() / r.ln()).ceil().max(1.0) as i64;
                Ok((0, k))
            }
            Family::CounterexampleSpiky => {
                let a = self.atoms.as_ref().expect("spiky law carries atoms");
                let lz = a.log_mgf_real(t);
                let keep: Vec<i64> = a
                    .xs
                    .iter()
                    .zip(&a.log_p)
                    .filter(|(&x, &lp)| lp + t * x as f64 - lz > tail.ln())
                    .map(|(&x, _)| x)
                    .collect();
                Ok((*keep.first().unwrap(), *keep.last().unwrap()))
            }
            _ => {
                let a = self.atoms.as_ref().expect("finite families carry atoms");
                Ok((a.xs[0], *a.xs.last().unwrap()))
            }
        }
    }

    /// Interval carrying all but `tail` of the mass (per side) of the law
    /// tilted by `e^{tx}`.
    pub fn continuous_range(&self, t: f64, tail: f64) -> Result<(f64, f64)> {
        if self.is_discrete() {
            return Err(Error::WrongKind { expected: "continuous" });
        }
        self.check_real(t)?;
        match &self.family {
            Family::Exponential { mu, shift } => {
                let rate = mu - t;
                Ok((*shift, shift - tail.ln() / rate))
            }
            Family::TabulatedPdf { x, .. } => Ok((x[0], x[x.len() - 1])),
            _ => {
                // scan outward from the tilted mean in units of tilted sd
                let c = self.cumulant_derivative(1, t)?;
                let sd = self.cumulant_derivative(2, t)?.sqrt();
                let lam = self.log_mgf_real(t)?;
                let tilted = |x: f64| self.log_weight(x) + t * x - lam;
                let target = tail.ln() - sd.ln();
                let mut lo = c - sd;
                while tilted(lo) + (lo - c).abs().ln() > target {
                    lo -= sd;
                }
                let mut hi = c + sd;
                while tilted(hi) + (hi - c).abs().ln() > target {
                    hi += sd;
                }
                Ok((lo.max(self.support.0), hi.min(self.support.1)))
            }
        }
    }
}

/// `Λ(u)` on the vertically continuous branch.
pub fn log_mgf_complex(dist: &JumpDistribution, u: Complex64) -> Result<Complex64> {
    dist.log_mgf(u)
}

#[cfg(test)]
mod tests;
