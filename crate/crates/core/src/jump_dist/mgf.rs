use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Atoms, Family, JumpDistribution};
use crate::numeric::{first_derivative, second_derivative};
use crate::special::ln_gamma_complex;

const COMPLEX_STEP: f64 = 1e-20;
// exp() underflows to zero below this
const NEGLIGIBLE: f64 = -745.0;

/// `log z`, reporting a cancelled sum as a `−∞` real part.
fn ln_or_zero(z: Complex64, scale: f64) -> Complex64 {
    if z.norm() <= 1e-14 * scale {
        Complex64::new(f64::NEG_INFINITY, z.arg())
    } else {
        z.ln()
    }
}

fn bernoulli(p: f64, u: Complex64) -> Complex64 {
    let e = u.exp();
    if p * e.norm() > 1.0 - p {
        u + ln_or_zero(p + (1.0 - p) / e, p)
    } else {
        ln_or_zero(1.0 - p + p * e, 1.0 - p)
    }
}

// (1/L) Σ_{k=lo}^{hi} w^k = w^lo/L · Π_{j=1}^{L-1} (w − ω_j), using
// Π (−ω_j) = 1 and pairing conjugate roots so the result is real on the axis
fn uniform_int(lo: i64, hi: i64, u: Complex64) -> Complex64 {
    let len = (hi - lo + 1) as usize;
    let mut acc = u * lo as f64 - (len as f64).ln();
    let w = u.exp();
    let outside = u.re >= 0.0;
    let factor = |omega: Complex64| {
        if outside {
            u + ln_or_zero(1.0 - omega / w, 1.0)
        } else {
            ln_or_zero(1.0 - w / omega, 1.0)
        }
    };
    // near the real axis the conjugate pair is merged into one real
    // quadratic so that complex-step derivatives stay exact
    let near_axis = u.im.abs() < 1e-8;
    for j in 1..len.div_ceil(2) {
        let omega = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / len as f64);
        acc += if near_axis {
            let c = 2.0 * omega.re;
            if outside {
                2.0 * u + ln_or_zero(1.0 - c / w + 1.0 / (w * w), 1.0)
            } else {
                ln_or_zero(1.0 - c * w + w * w, 1.0)
            }
        } else {
            factor(omega) + factor(omega.conj())
        };
    }
    if len.is_multiple_of(2) {
        acc += factor(Complex64::new(-1.0, 0.0));
    }
    acc
}

/// Atoms that matter after tilting by `e^{ax}`: (positions, reduced log
/// weights, offset) with the largest reduced weight equal to zero.
fn significant(atoms: &Atoms, a: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let tilted: Vec<f64> = atoms.xs.iter().zip(&atoms.log_p).map(|(&x, &lp)| lp + a * x as f64).collect();
    let m = tilted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut xs = Vec::new();
    let mut lw = Vec::new();
    for (&x, &t) in atoms.xs.iter().zip(&tilted) {
        if t - m > NEGLIGIBLE {
            xs.push(x as f64);
            lw.push(t - m);
        }
    }
    (xs, lw, m)
}

fn atom_sum(xs: &[f64], lw: &[f64], centre: f64, y: f64) -> Complex64 {
    xs.iter()
        .zip(lw)
        .map(|(&x, &l)| Complex64::from_polar(l.exp(), y * (x - centre)))
        .sum()
}

fn atoms_principal(atoms: &Atoms, u: Complex64) -> Complex64 {
    let (xs, lw, m) = significant(atoms, u.re);
    let scale: f64 = lw.iter().map(|l| l.exp()).sum();
    m + ln_or_zero(atom_sum(&xs, &lw, 0.0, u.im), scale)
}

// E1(w) = (e^w − 1)/w, E2(w) = (e^w (w − 1) + 1)/w²
fn e1_e2(w: Complex64) -> (Complex64, Complex64) {
    if w.norm() < 0.5 {
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut e2 = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0); // w^k / k!
        for k in 0..20 {
            e1 += pow / (k + 1) as f64;
            e2 += pow / (k + 2) as f64;
            pow = pow * w / (k + 1) as f64;
        }
        (e1, e2)
    } else {
        let ew = w.exp();
        ((ew - 1.0) / w, (ew * (w - 1.0) + 1.0) / (w * w))
    }
}

/// Segment sums of the piecewise-linear MGF as `(offset, Σ)` so that
/// `M(u) = e^{offset} Σ`, with each term anchored at the segment end where
/// `Re(u x)` is larger.
fn pdf_segments(x: &[f64], f: &[f64], u: Complex64, centre: f64) -> (f64, Complex64, f64) {
    let forward = u.re < 0.0;
    let mut logs = Vec::with_capacity(x.len() - 1);
    let mut parts = Vec::with_capacity(x.len() - 1);
    for i in 0..x.len() - 1 {
        let h = x[i + 1] - x[i];
        let (xr, fr, fo, w) = if forward {
            (x[i], f[i], f[i + 1], u * h)
        } else {
            (x[i + 1], f[i + 1], f[i], -u * h)
        };
        let fmax = fr.max(fo);
        if fmax == 0.0 {
            continue;
        }
        let (e1, e2) = e1_e2(w);
        let c = h * (fr * e1 + (fo - fr) * e2) / fmax;
        logs.push(u.re * xr + (fmax).ln());
        parts.push((c, xr));
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (l, (c, xr)) in logs.iter().zip(parts) {
        if l - m > NEGLIGIBLE {
            let r = (l - m).exp();
            s += c * Complex64::from_polar(r, u.im * (xr - centre));
            scale += c.norm() * r;
        }
    }
    (m, s, scale)
}

pub(super) fn pdf_log_mgf_principal(d: &JumpDistribution, u: Complex64) -> Complex64 {
    let Family::TabulatedPdf { x, density } = &d.family else { unreachable!() };
    let (m, s, scale) = pdf_segments(x, density, u, 0.0);
    m - d.log_norm + ln_or_zero(s, scale)
}

/// Follows `arg S(y)` from `y = 0`, where `S(0) > 0`, in steps small enough
/// that the phase never moves by more than one radian.
fn unwrap_phase<F: Fn(f64) -> Complex64>(s: F, y: f64, spread: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let max_step = (0.5 / spread.max(1e-300)).min(y.abs());
    let dir = y.signum();
    let mut pos = 0.0;
    let mut phase = 0.0;
    let mut prev = s(0.0).arg();
    let mut step = max_step;
    while pos < y.abs() {
        let next = (pos + step).min(y.abs());
        let a = s(dir * next).arg();
        let mut diff = a - prev;
        diff -= 2.0 * PI * (diff / (2.0 * PI)).round();
        if diff.abs() > 1.0 && step > max_step * 1e-12 {
            step *= 0.5;
            continue;
        }
        phase += diff;
        prev = a;
        pos = next;
        step = (step * 2.0).min(max_step);
    }
    phase
}

fn atoms_continuous(atoms: &Atoms, u: Complex64) -> Complex64 {
    let (xs, lw, m) = significant(atoms, u.re);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let centre = 0.5 * (lo + hi);
    let spread = 0.5 * (hi - lo);
    let s = |y: f64| atom_sum(&xs, &lw, centre, y);
    let end = s(u.im);
    let scale: f64 = lw.iter().map(|l| l.exp()).sum();
    let phase = unwrap_phase(s, u.im, spread);
    Complex64::new(m + ln_or_zero(end, scale).re, centre * u.im + phase)
}

fn pdf_continuous(d: &JumpDistribution, u: Complex64) -> Complex64 {
    let Family::TabulatedPdf { x, density } = &d.family else { unreachable!() };
    let lo = x[0];
    let hi = x[x.len() - 1];
    let centre = 0.5 * (lo + hi);
    let spread = 0.5 * (hi - lo);
    let s = |y: f64| pdf_segments(x, density, Complex64::new(u.re, y), centre).1;
    let (m, end, scale) = pdf_segments(x, density, u, centre);
    let phase = unwrap_phase(s, u.im, spread);
    Complex64::new(m - d.log_norm + ln_or_zero(end, scale).re, centre * u.im + phase)
}

fn closed_form(d: &JumpDistribution, u: Complex64) -> Option<Complex64> {
    Some(match &d.family {
        Family::Bernoulli { p } => bernoulli(*p, u),
        Family::UniformInt { lo, hi } => uniform_int(*lo, *hi, u),
        Family::Geometric { q } => q.ln() - ln_or_zero(1.0 - (1.0 - q) * u.exp(), 1.0),
        Family::Exponential { mu, shift } => mu.ln() - (mu - u).ln() + shift * u,
        Family::LogGamma { gamma, m, sigma } => {
            ln_gamma_complex(gamma + u / sigma) - crate::special::ln_gamma(*gamma) - m * u / sigma
        }
        _ => return None,
    })
}

pub(super) fn log_mgf_continuous(d: &JumpDistribution, u: Complex64) -> Complex64 {
    if let Some(v) = closed_form(d, u) {
        return v;
    }
    match &d.family {
        Family::TabulatedPdf { .. } => pdf_continuous(d, u),
        _ => atoms_continuous(d.atoms.as_ref().expect("tabulated laws carry atoms"), u),
    }
}

pub(super) fn log_mgf_principal(d: &JumpDistribution, u: Complex64) -> Complex64 {
    match &d.family {
        Family::TabulatedPmf { .. } | Family::CounterexampleSpiky => atoms_principal(d.atoms.as_ref().unwrap(), u),
        Family::TabulatedPdf { .. } => pdf_log_mgf_principal(d, u),
        Family::UniformInt { lo, hi } if hi - lo > 64 => atoms_principal(d.atoms.as_ref().unwrap(), u),
        _ => closed_form(d, u).expect("closed form registered"),
    }
}

fn complex_step_d1(d: &JumpDistribution, t: f64) -> f64 {
    pdf_log_mgf_principal(d, Complex64::new(t, COMPLEX_STEP)).im / COMPLEX_STEP
}

/// Λ⁽ᵏ⁾ for laws without closed-form derivatives: complex step for Λ', and
/// Richardson differences of Λ' (orders 2, 3) or of Λ'' (order 4), with the
/// step scaled to the tilted standard deviation.
pub(super) fn numeric_derivative(d: &JumpDistribution, order: usize, t: f64) -> f64 {
    let Family::TabulatedPdf { x, density } = &d.family else { unreachable!() };
    let d1 = |s: f64| complex_step_d1(d, s);
    if order == 1 {
        return d1(t);
    }
    let (lo, hi) = d.support;
    let sd0 = table_sd(x, density).max(1e-3 * (hi - lo));
    let var = first_derivative(&d1, t, 0.1 / sd0);
    let h = 0.1 / var.sqrt().max(1e-3 * (hi - lo) / 24.0);
    match order {
        2 => first_derivative(&d1, t, h),
        3 => second_derivative(&d1, t, h),
        _ => {
            let d2 = |s: f64| first_derivative(&d1, s, h);
            second_derivative(&d2, t, h)
        }
    }
}

fn table_sd(x: &[f64], f: &[f64]) -> f64 {
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..x.len() - 1 {
        let w = 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
        let c = 0.5 * (x[i] + x[i + 1]);
        m0 += w;
        m1 += w * c;
        m2 += w * c * c;
    }
    let mean = m1 / m0;
    (m2 / m0 - mean * mean).max(0.0).sqrt()
}
