//! Standard normal primitives and Brownian-bridge covariance.
//!
//! The CDF is evaluated through `erfc`, switching to a Mills-ratio continued
//! fraction in log space below `x = -8` so that far-tail probabilities keep
//! their relative accuracy. The quantile is an Acklam rational start polished
//! by two Halley steps.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FAR_TAIL: f64 = -8.0;

/// `φ(x)`.
#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// `log φ(x)`.
#[inline]
pub fn log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `Φ(x)`.
pub fn cdf(x: f64) -> f64 {
    if x < FAR_TAIL {
        log_cdf(x).exp()
    } else {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    }
}

/// `1 − Φ(x)`, accurate in the upper tail.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// `log Φ(x)`.
pub fn log_cdf(x: f64) -> f64 {
    if x < FAR_TAIL {
        log_pdf(x) + mills_ratio(-x).ln()
    } else if x > -FAR_TAIL {
        (-sf(x)).ln_1p()
    } else {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    }
}

/// Mills ratio `(1 − Φ(t)) / φ(t)` for `t ≥ 0`.
pub fn mills_ratio(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t < -FAR_TAIL {
        return 0.5 * libm::erfc(t * FRAC_1_SQRT_2) / pdf(t);
    }
    // R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...))))
    let mut tail = t;
    for k in (1..=80).rev() {
        tail = t + k as f64 / tail;
    }
    1.0 / tail
}

const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam_lower(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

// p <= 0.5
fn quantile_lower(p: f64) -> f64 {
    let mut x = acklam_lower(p);
    for _ in 0..2 {
        let e = if x < FAR_TAIL {
            // relative residual keeps the step meaningful when Φ(x) is tiny
            (log_cdf(x) - p.ln()).exp_m1() * p
        } else {
            cdf(x) - p
        };
        let u = e / pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityDomain { p });
    }
    Ok(if p <= 0.5 {
        quantile_lower(p)
    } else {
        -quantile_lower(1.0 - p)
    })
}

/// `Φ⁻¹(1 − q)`, computed without forming `1 − q`.
pub fn quantile_upper(q: f64) -> Result<f64> {
    quantile(q).map(|x| -x)
}

/// Brownian bridge on `[0, n]` whose per-unit-time variance is `sigma²`:
/// `Cov(s, t) = σ² s (n − t) / n` for `s ≤ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeCovariance {
    pub n: f64,
    pub sigma: f64,
}

impl BridgeCovariance {
    pub fn new(n: f64, sigma: f64) -> Self {
        BridgeCovariance { n, sigma }
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        bridge_cov(self.n, self.sigma, lo, hi)
    }

    pub fn var(&self, t: f64) -> Result<f64> {
        bridge_cov(self.n, self.sigma, t, t)
    }
}

/// `σ² s (n − t) / n`, requiring `0 ≤ s ≤ t ≤ n`.
pub fn bridge_cov(n: f64, sigma: f64, s: f64, t: f64) -> Result<f64> {
    if !(0.0 <= s && s <= t && t <= n) || n <= 0.0 {
        return Err(Error::OrderViolation { s, t, n });
    }
    Ok(sigma * sigma * s * (n - t) / n)
}

/// Lipschitz constant of `Φ`, attained at the origin.
pub const CDF_LIPSCHITZ: f64 = 0.398_942_280_401_432_7;
