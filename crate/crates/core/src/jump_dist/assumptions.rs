use std::fmt;

use serde::Serialize;

use super::builtin::SPIKY_CLAMP;
use super::{Family, JumpDistribution, Kind};
use crate::numeric::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssumptionId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl fmt::Display for AssumptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotCheckable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: AssumptionId,
    pub status: Status,
    pub detail: String,
    pub measured: Option<f64>,
}

/// Envelope `w(x) ≤ D e^{−d x²}` on the reported side of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailParams {
    #[serde(rename = "D")]
    pub big_d: f64,
    pub d: f64,
    pub side: Side,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<Check>,
    pub tail_params: Option<TailParams>,
    pub log_concave: bool,
}

impl AssumptionReport {
    pub fn get(&self, id: AssumptionId) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn status(&self, id: AssumptionId) -> Option<Status> {
        self.get(id).map(|c| c.status)
    }

    /// True when no check failed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

/// Probe window and budget for [`check_assumptions`].
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Half-width of the probe window in standard deviations around the mean.
    pub window_sds: f64,
    pub probe_points: usize,
    /// Exponent for the exponential-moment check; defaults to a value inside
    /// the MGF domain.
    pub lambda: Option<f64>,
    pub tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { window_sds: 12.0, probe_points: 401, lambda: None, tol: 1e-9 }
    }
}

fn check(id: AssumptionId, status: Status, detail: impl Into<String>, measured: Option<f64>) -> Check {
    Check { id, status, detail: detail.into(), measured }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

struct Probe<'a> {
    dist: &'a JumpDistribution,
    lo: f64,
    hi: f64,
    points: usize,
}

impl Probe<'_> {
    /// Probe abscissae strictly inside the support, within the window.
    fn grid(&self) -> Vec<f64> {
        let (a, b) = self.dist.support;
        match self.dist.kind {
            Kind::Discrete => {
                let lo = self.lo.max(a).ceil() as i64;
                let hi = self.hi.min(b).floor() as i64;
                integers(lo, hi, self.points)
            }
            Kind::Continuous => {
                let lo = self.lo.max(a);
                let hi = self.hi.min(b);
                let n = self.points.max(3);
                (1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
            }
        }
    }
}

fn integers(lo: i64, hi: i64, budget: usize) -> Vec<f64> {
    if hi < lo {
        return Vec::new();
    }
    let count = (hi - lo + 1) as usize;
    if count <= budget {
        (lo..=hi).map(|k| k as f64).collect()
    } else {
        (0..budget).map(|i| (lo + ((hi - lo) as f64 * i as f64 / (budget - 1) as f64).round() as i64) as f64).collect()
    }
}

/// Gaussian envelope on one side of the origin (`sign = +1` upper).
fn side_envelope(dist: &JumpDistribution, sign: f64, reach: f64, points: usize) -> Result<(f64, f64), String> {
    let (a, b) = dist.support;
    let bounded = if sign > 0.0 { b.is_finite() } else { a.is_finite() };
    let far = if bounded { if sign > 0.0 { b.max(0.0) } else { (-a).max(0.0) } } else { reach };
    let xs: Vec<f64> = match dist.kind {
        Kind::Discrete => integers(0, far.floor() as i64, points).into_iter().map(|k| sign * k).collect(),
        Kind::Continuous => (0..=points).map(|i| sign * far * i as f64 / points as f64).collect(),
    };
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| (x, dist.log_weight(x)))
        .filter(|(_, l)| l.is_finite() && *l > 0.5 * SPIKY_CLAMP)
        .collect();
    if bounded {
        let d = 1.0;
        let log_big_d = pts.iter().map(|(x, l)| l + d * x * x).fold(f64::NEG_INFINITY, f64::max);
        return Ok((log_big_d.exp().max(f64::MIN_POSITIVE), d));
    }
    // points that beat every point farther out
    let mut env = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for &(x, l) in pts.iter().rev() {
        if l > best {
            env.push((x, l));
            best = l;
        }
    }
    // r(x) = (ref − log w)/x² stays bounded below for Gaussian decay and
    // falls like 1/|x| for exponential decay
    let reference = best + 1.0;
    let outer: Vec<(f64, f64)> = env
        .iter()
        .filter(|(x, _)| x.abs() >= far / 16.0)
        .map(|&(x, l)| (x.abs().ln(), ((reference - l) / (x * x)).ln()))
        .collect();
    if outer.len() < 2 {
        return Err("too few envelope points in the outer window".into());
    }
    let (lx, lr): (Vec<f64>, Vec<f64>) = outer.iter().cloned().unzip();
    let kappa = if lx.len() == 2 {
        (lr[1] - lr[0]) / (lx[1] - lx[0])
    } else {
        linear_fit(&lx, &lr).ok_or("degenerate envelope fit")?.1
    };
    if kappa < -0.5 {
        return Err(format!("log-weight decays like |x|^{:.2}, slower than Gaussian", kappa + 2.0));
    }
    let d = 0.5 * lr.iter().cloned().fold(f64::INFINITY, f64::min).exp();
    let log_big_d = pts.iter().map(|(x, l)| l + d * x * x).fold(f64::NEG_INFINITY, f64::max);
    Ok((log_big_d.exp(), d))
}

fn log_concavity(dist: &JumpDistribution, grid: &[f64], tol: f64) -> (bool, Option<f64>) {
    let step = match dist.kind {
        Kind::Discrete => 1.0,
        Kind::Continuous => {
            if grid.len() < 2 {
                return (true, None);
            }
            grid[1] - grid[0]
        }
    };
    let (a, b) = dist.support;
    for &x in grid {
        if x - step < a && dist.kind == Kind::Continuous || x + step > b && dist.kind == Kind::Continuous {
            continue;
        }
        let c = dist.log_weight(x);
        let l = dist.log_weight(x - step);
        let r = dist.log_weight(x + step);
        if !c.is_finite() || !l.is_finite() || !r.is_finite() {
            continue;
        }
        if 2.0 * c < l + r - tol * (1.0 + l.abs() + r.abs()) {
            return (false, Some(x));
        }
    }
    (true, None)
}

fn has_decay_certificate(f: &Family) -> bool {
    matches!(f, Family::Exponential { .. } | Family::LogGamma { .. } | Family::TabulatedPdf { .. })
}

/// Runs the numerically checkable parts of the standing assumptions.
pub fn check_assumptions(dist: &JumpDistribution, cfg: &CheckConfig) -> AssumptionReport {
    let discrete = dist.is_discrete();
    let ids = if discrete {
        [AssumptionId::D1, AssumptionId::D2, AssumptionId::D3, AssumptionId::D4, AssumptionId::D5]
    } else {
        [AssumptionId::C1, AssumptionId::C2, AssumptionId::C3, AssumptionId::C5, AssumptionId::C6]
    };
    let (a, b) = dist.support;
    let mean = dist.mean();
    let sd = dist.variance().sqrt();
    let probe = Probe { dist, lo: mean - cfg.window_sds * sd, hi: mean + cfg.window_sds * sd, points: cfg.probe_points };
    let grid = probe.grid();
    let mut checks = Vec::new();

    // single interval of positivity
    let zero = grid.iter().find(|&&x| dist.log_weight(x) == f64::NEG_INFINITY);
    checks.push(check(
        ids[0],
        pass_if(zero.is_none() && !grid.is_empty()),
        match zero {
            Some(x) => format!("weight vanishes at interior probe {x}"),
            None => format!("weight positive at {} probes in ({a}, {b})", grid.len()),
        },
        Some(grid.len() as f64),
    ));

    // exponential moment on both sides
    let (lo, hi) = dist.mgf_domain;
    let lam = cfg.lambda.unwrap_or_else(|| 0.5 * 1f64.min(-lo).min(hi));
    let finite = lam > 0.0
        && [-lam, lam].iter().all(|&t| dist.log_mgf_real(t).map(f64::is_finite).unwrap_or(false));
    checks.push(check(
        ids[1],
        pass_if(finite),
        format!("Λ(±{lam:.4}) finite: {finite}; MGF domain ({lo}, {hi})"),
        Some(lam),
    ));

    // lower semicontinuity of Λ
    let whole_line = lo == f64::NEG_INFINITY && hi == f64::INFINITY;
    checks.push(if whole_line {
        check(ids[2], Status::Pass, "MGF finite on all of ℝ, so Λ is continuous", None)
    } else if dist.has_closed_form() {
        check(ids[2], Status::Pass, "closed-form Λ diverges at the finite ends of its domain", None)
    } else {
        check(ids[2], Status::NotCheckable, "no closed form registered for the domain boundary", None)
    });

    if !discrete {
        checks.push(if has_decay_certificate(&dist.family) {
            check(
                AssumptionId::C4,
                Status::Pass,
                format!("{}: analytic decay of |M(u)| in Im(u) registered", dist.name()),
                None,
            )
        } else {
            check(AssumptionId::C4, Status::NotCheckable, "polynomial MGF decay cannot be certified from samples", None)
        });
    }

    // Gaussian tail envelope on at least one side
    let reach = mean.abs() + cfg.window_sds * sd;
    let reach = if discrete { reach.max(256.0) } else { reach };
    let upper = side_envelope(dist, 1.0, reach, cfg.probe_points);
    let lower = side_envelope(dist, -1.0, reach, cfg.probe_points);
    let max_lw = grid.iter().map(|&x| dist.log_weight(x)).fold(f64::NEG_INFINITY, f64::max);
    let bounded_density = discrete || max_lw.is_finite();
    let tail_params = match (&upper, &lower) {
        (Ok(u), Ok(l)) => Some(TailParams { big_d: u.0.max(l.0), d: u.1.min(l.1), side: Side::Both }),
        (Ok(u), Err(_)) => Some(TailParams { big_d: u.0, d: u.1, side: Side::Upper }),
        (Err(_), Ok(l)) => Some(TailParams { big_d: l.0, d: l.1, side: Side::Lower }),
        _ => None,
    }
    .filter(|_| bounded_density);
    let describe = |r: &Result<(f64, f64), String>| match r {
        Ok((bd, d)) => format!("D = {bd:.4e}, d = {d:.4e}"),
        Err(e) => e.clone(),
    };
    checks.push(check(
        ids[3],
        pass_if(tail_params.is_some()),
        format!("upper: {}; lower: {}", describe(&upper), describe(&lower)),
        tail_params.map(|t| t.d),
    ));

    let (log_concave, violation) = log_concavity(dist, &grid, cfg.tol);
    let c6 = a.is_finite() || b.is_finite() || log_concave;
    let why = if a.is_finite() {
        "support bounded below".to_string()
    } else if b.is_finite() {
        "support bounded above".to_string()
    } else if log_concave {
        "log-concave on the probe grid".to_string()
    } else {
        format!("unbounded support and log-concavity fails near {}", violation.unwrap_or(f64::NAN))
    };
    checks.push(check(ids[4], pass_if(c6), why, violation));

    AssumptionReport { checks, tail_params, log_concave }
}
