use std::f64::consts::{LN_2, PI};

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use super::builtin::{spike_a, spike_b, spiky_log_weight};
use super::*;
use crate::quadrature::{integrate, Tolerance};

fn builtins() -> Vec<JumpDistribution> {
    vec![
        JumpDistribution::bernoulli(0.5).unwrap(),
        JumpDistribution::bernoulli(0.3).unwrap(),
        JumpDistribution::uniform_int(-1, 1).unwrap(),
        JumpDistribution::uniform_int(0, 5).unwrap(),
        JumpDistribution::geometric(0.5).unwrap(),
        JumpDistribution::geometric(0.2).unwrap(),
        JumpDistribution::exponential(1.0).unwrap(),
        JumpDistribution::exponential_shifted(2.0, -0.5).unwrap(),
        JumpDistribution::log_gamma(2.0).unwrap(),
        JumpDistribution::log_gamma(0.7).unwrap(),
        JumpDistribution::tabulated_pmf(-2, &[0.1, 0.2, 0.4, 0.2, 0.1]).unwrap(),
    ]
}

fn grid_in_half_domain(d: &JumpDistribution) -> Vec<f64> {
    let (a, b) = d.mgf_domain();
    let lo = (a / 2.0).max(-1.0);
    let hi = (b / 2.0).min(1.0);
    (1..=5).map(|i| lo + (hi - lo) * i as f64 / 6.0).collect()
}

/// `log Σ or ∫ e^{tx} w(x)`, truncating infinite supports at negligible mass.
fn brute_log_mgf(d: &JumpDistribution, t: f64) -> f64 {
    if d.is_discrete() {
        let (lo, hi) = d.support();
        let lo = if lo.is_finite() { lo as i64 } else { -200 };
        let hi = if hi.is_finite() { hi as i64 } else { 400 };
        let s: f64 = (lo..=hi).map(|k| (d.log_pmf(k) + t * k as f64).exp()).sum();
        s.ln()
    } else {
        let (lo, hi) = d.support();
        let (lo, hi) = (lo.max(-60.0), hi.min(80.0));
        let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 5000 };
        integrate(|x| (d.log_weight(x) + t * x).exp(), lo, hi, tol).unwrap().value.ln()
    }
}

#[test]
fn exponential_mgf_value() {
    let d = JumpDistribution::exponential(1.0).unwrap();
    assert_relative_eq!(d.log_mgf_real(0.5).unwrap(), LN_2, max_relative = 1e-14);
    let c = log_mgf_complex(&d, Complex64::new(0.5, 0.0)).unwrap();
    assert_relative_eq!(c.re, LN_2, max_relative = 1e-14);
    assert_eq!(c.im, 0.0);
    // independent oracle: ∫₀^∞ e^{ux − x} dx
    assert_relative_eq!(brute_log_mgf(&d, 0.5), LN_2, max_relative = 1e-9);
}

#[test]
fn bernoulli_mean_and_zero_of_mgf() {
    let d = JumpDistribution::bernoulli(0.5).unwrap();
    assert_eq!(d.mean(), 0.5);
    let v = d.log_mgf(Complex64::new(0.0, PI)).unwrap();
    assert_eq!(v.re, f64::NEG_INFINITY);
}

#[test]
fn geometric_mgf_is_zero_at_origin() {
    let d = JumpDistribution::geometric(0.5).unwrap();
    assert_eq!(d.log_mgf(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
    assert!(d.log_mgf(Complex64::new(LN_2, 0.0)).is_err());
}

#[test]
fn log_gamma_is_standardized() {
    let d = JumpDistribution::log_gamma(2.0).unwrap();
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 5000 };
    let mass = integrate(|x| d.log_weight(x).exp(), -40.0, 15.0, tol).unwrap().value;
    let m1 = integrate(|x| x * d.log_weight(x).exp(), -40.0, 15.0, tol).unwrap().value;
    let m2 = integrate(|x| x * x * d.log_weight(x).exp(), -40.0, 15.0, tol).unwrap().value;
    assert!((mass - 1.0).abs() < 1e-10);
    assert!(m1.abs() < 1e-8, "mean {m1}");
    assert!((m2 - 1.0).abs() < 1e-6, "variance {m2}");
    assert!(d.mean().abs() < 1e-12);
    assert!((d.variance() - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(JumpDistribution::bernoulli(1.0), Err(Error::InvalidParameter { .. })));
    assert!(JumpDistribution::geometric(0.0).is_err());
    assert!(JumpDistribution::log_gamma(-1.0).is_err());
    assert!(JumpDistribution::exponential(0.0).is_err());
    assert!(JumpDistribution::uniform_int(3, 1).is_err());
    assert!(matches!(JumpDistribution::tabulated_pmf(0, &[0.5, 0.6]), Err(Error::UnnormalizedTable { .. })));
    assert!(matches!(JumpDistribution::tabulated_pdf(&[0.0, 1.0], &[1.0, 1.5]), Err(Error::UnnormalizedTable { .. })));
    assert!(make_builtin("cauchy", &serde_json::json!({})).is_err());
}

#[test]
fn mgf_matches_brute_force_on_half_domain() {
    for d in builtins() {
        for t in grid_in_half_domain(&d) {
            let exact = d.log_mgf_real(t).unwrap();
            let brute = brute_log_mgf(&d, t);
            assert!(
                (exact - brute).abs() <= 1e-6 * exact.abs().max(1e-6),
                "{} t={t}: {exact} vs {brute}",
                d.name()
            );
        }
    }
}

#[test]
fn complex_step_derivative_matches_closed_form() {
    for d in builtins() {
        for t in grid_in_half_domain(&d) {
            let h = 1e-20;
            let cs = d.log_mgf_principal(Complex64::new(t, h)).unwrap().im / h;
            let an = d.log_mgf_d1(t).unwrap();
            assert!((cs - an).abs() <= 1e-8 * an.abs().max(1.0), "{} t={t}: {cs} vs {an}", d.name());
        }
    }
}

#[test]
fn higher_cumulants_match_finite_differences() {
    for d in builtins() {
        for t in grid_in_half_domain(&d) {
            for k in 2..=4 {
                let lower = |s: f64| d.cumulant_derivative(k - 1, s).unwrap();
                let fd = crate::numeric::first_derivative(&lower, t, 1e-3);
                let an = d.cumulant_derivative(k, t).unwrap();
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{} k={k} t={t}: {fd} vs {an}", d.name());
            }
        }
    }
}

#[test]
fn strict_convexity_and_normalization_at_zero() {
    for d in builtins() {
        assert!(d.log_mgf_real(0.0).unwrap().abs() < 1e-14, "{}", d.name());
        for t in grid_in_half_domain(&d) {
            assert!(d.log_mgf_d2(t).unwrap() > 0.0);
        }
    }
}

fn assert_continuous_branch(d: &JumpDistribution, re: f64, y_max: f64) {
    let real = d.log_mgf_real(re).unwrap();
    let at_axis = d.log_mgf(Complex64::new(re, 0.0)).unwrap();
    assert!((at_axis.re - real).abs() < 1e-10 && at_axis.im.abs() < 1e-10, "{}", d.name());
    let steps = 2000;
    let mut prev = at_axis;
    for i in 1..=steps {
        let y = y_max * i as f64 / steps as f64;
        let v = d.log_mgf(Complex64::new(re, y)).unwrap();
        if v.re.is_finite() && prev.re.is_finite() {
            assert!((v.im - prev.im).abs() < 1.0, "{} jump at y={y}: {} -> {}", d.name(), prev.im, v.im);
        }
        // same value as the principal branch up to 2πi
        let p = d.log_mgf_principal(Complex64::new(re, y)).unwrap();
        if p.re.is_finite() {
            let k = ((v.im - p.im) / (2.0 * PI)).round();
            assert!((v.re - p.re).abs() < 1e-8 && (v.im - p.im - 2.0 * PI * k).abs() < 1e-8);
        }
        prev = v;
    }
}

#[test]
fn branch_is_continuous_along_vertical_lines() {
    assert_continuous_branch(&JumpDistribution::bernoulli(0.3).unwrap(), 0.2, 20.0);
    assert_continuous_branch(&JumpDistribution::bernoulli(0.3).unwrap(), 1.5, 20.0);
    assert_continuous_branch(&JumpDistribution::uniform_int(-2, 3).unwrap(), 0.3, 15.0);
    assert_continuous_branch(&JumpDistribution::uniform_int(-2, 3).unwrap(), -0.3, 15.0);
    assert_continuous_branch(&JumpDistribution::geometric(0.4).unwrap(), 0.1, 15.0);
    assert_continuous_branch(&JumpDistribution::exponential(1.0).unwrap(), 0.5, 50.0);
    assert_continuous_branch(&JumpDistribution::log_gamma(2.0).unwrap(), 0.3, 30.0);
    assert_continuous_branch(&JumpDistribution::tabulated_pmf(0, &[0.2, 0.1, 0.3, 0.4]).unwrap(), 0.1, 12.0);
    let tri = JumpDistribution::tabulated_pdf(&[-1.0, 0.0, 2.0], &[0.0, 2.0 / 3.0, 0.0]).unwrap();
    assert_continuous_branch(&tri, 0.4, 12.0);
}

#[test]
fn tabulated_normal_is_nearly_gaussian() {
    let d = JumpDistribution::tabulated_standard_normal(1e-3, 12.0).unwrap();
    assert!(d.mean().abs() < 1e-10);
    assert!((d.variance() - 1.0).abs() < 1e-6);
    for t in [-1.0, 0.5, 2.0] {
        assert!((d.log_mgf_real(t).unwrap() - t * t / 2.0).abs() < 1e-6);
        assert!((d.cumulant_derivative(3, t).unwrap()).abs() < 1e-4);
        let k4 = d.cumulant_derivative(4, t).unwrap();
        assert!(k4.abs() < 1e-3, "{k4} {}", d.cumulant_derivative(3, t).unwrap());
    }
    let v = d.log_mgf(Complex64::new(0.0, 3.0)).unwrap();
    assert!((v.re + 4.5).abs() < 1e-5 && v.im.abs() < 1e-6);
}

#[test]
fn assumption_report_geometric() {
    let r = check_assumptions(&JumpDistribution::geometric(0.5).unwrap(), &CheckConfig::default());
    assert_eq!(r.status(AssumptionId::D1), Some(Status::Pass));
    assert_eq!(r.status(AssumptionId::D2), Some(Status::Pass));
    assert_eq!(r.status(AssumptionId::D4), Some(Status::Pass));
    assert_eq!(r.status(AssumptionId::D5), Some(Status::Pass));
    assert_eq!(r.tail_params.unwrap().side, Side::Lower);
    assert!(r.log_concave);
    assert_eq!(r.checks.len(), 5);
}

#[test]
fn assumption_report_bernoulli_all_pass() {
    let r = check_assumptions(&JumpDistribution::bernoulli(0.3).unwrap(), &CheckConfig::default());
    for c in &r.checks {
        assert_eq!(c.status, Status::Pass, "{:?}", c);
    }
    assert_eq!(r.tail_params.unwrap().side, Side::Both);
}

#[test]
fn assumption_report_ids_are_unique_and_complete() {
    for d in builtins() {
        let r = check_assumptions(&d, &CheckConfig::default());
        let mut ids: Vec<String> = r.checks.iter().map(|c| c.id.to_string()).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert_eq!(n, if d.is_discrete() { 5 } else { 6 });
        assert_eq!(r.tail_params.is_some(), r.status(if d.is_discrete() { AssumptionId::D4 } else { AssumptionId::C5 }) == Some(Status::Pass));
    }
}

#[test]
fn log_concavity_of_standard_families() {
    let cfg = CheckConfig::default();
    for d in [
        JumpDistribution::bernoulli(0.3).unwrap(),
        JumpDistribution::geometric(0.3).unwrap(),
        JumpDistribution::exponential(1.5).unwrap(),
        JumpDistribution::log_gamma(2.0).unwrap(),
        JumpDistribution::log_gamma(0.5).unwrap(),
    ] {
        let r = check_assumptions(&d, &cfg);
        assert!(r.log_concave, "{}", d.name());
    }
    let lg = check_assumptions(&JumpDistribution::log_gamma(2.0).unwrap(), &cfg);
    assert!(lg.all_pass(), "{:?}", lg.checks);
    assert_eq!(lg.tail_params.unwrap().side, Side::Upper);
    let ex = check_assumptions(&JumpDistribution::exponential(1.0).unwrap(), &cfg);
    assert_eq!(ex.tail_params.unwrap().side, Side::Lower);
    assert_eq!(ex.status(AssumptionId::C4), Some(Status::Pass));
}

#[test]
fn counterexample_is_not_log_concave() {
    let d = JumpDistribution::counterexample_spiky();
    // oracle: 2 log p(3) < log p(2) + log p(4) because the spike sits at a_1 = 4
    assert!(2.0 * d.log_pmf(3) < d.log_pmf(2) + d.log_pmf(4));
    let r = check_assumptions(&d, &CheckConfig::default());
    assert!(!r.log_concave);
    assert_eq!(r.status(AssumptionId::D1), Some(Status::Pass));
    assert_eq!(r.status(AssumptionId::D4), Some(Status::Pass));
    assert_eq!(r.status(AssumptionId::D5), Some(Status::Fail));
}

#[test]
fn counterexample_weights_on_spikes() {
    for r in 1..=12u32 {
        let a = spike_a(r);
        let b = spike_b(r);
        assert_eq!(a, 3i64.pow(r) + r as i64);
        assert_eq!(spiky_log_weight(a), -((a * a) as f64));
        assert_eq!(spiky_log_weight(b), -((b * b) as f64));
    }
    assert_eq!(spiky_log_weight(0), -10.0);
    assert_eq!(spiky_log_weight(1), -1e10);
    assert_eq!(spiky_log_weight(2), -1e100);
    assert_eq!(spiky_log_weight(5), -1e300);
    let d = JumpDistribution::counterexample_spiky();
    let total: f64 = (-30..=30).map(|k| d.log_pmf(k).exp()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn json_loading_normalizes_tables() {
    let d = dist_from_json(r#"{"family":"tabulated_pmf","support_lo":-1,"weights":[1,2,1]}"#).unwrap();
    assert!((d.log_pmf(0).exp() - 0.5).abs() < 1e-15);
    let d = dist_from_json(r#"{"family":"bernoulli","params":{"p":0.25}}"#).unwrap();
    assert_eq!(d.family(), &Family::Bernoulli { p: 0.25 });
    let d = dist_from_json(r#"{"family":"exponential","params":{"mu":2,"shift":-0.5}}"#).unwrap();
    assert!(d.mean().abs() < 1e-15);
    assert!(dist_from_json(r#"{"params":{}}"#).is_err());
    assert!(dist_from_json("not json").is_err());
    assert!(load_dist(r#"{"family":"geometric","params":{"q":0.5}}"#).is_ok());
}

#[test]
fn ranges_cover_tilted_mass() {
    let g = JumpDistribution::geometric(0.5).unwrap();
    let (lo, hi) = g.lattice_range(0.0, 1e-12).unwrap();
    assert_eq!(lo, 0);
    let tail: f64 = (hi + 1..hi + 200).map(|k| g.log_pmf(k).exp()).sum();
    assert!(tail < 1e-12);
    let e = JumpDistribution::exponential(1.0).unwrap();
    let (_, hi) = e.continuous_range(0.0, 1e-12).unwrap();
    assert!((-hi).exp() <= 1e-12 * 1.0001);
    assert!(g.continuous_range(0.0, 1e-12).is_err());
}

proptest! {
    #[test]
    fn bernoulli_closed_form_matches_sum(p in 0.01f64..0.99, re in -3.0f64..3.0, im in -10.0f64..10.0) {
        let d = JumpDistribution::bernoulli(p).unwrap();
        let u = Complex64::new(re, im);
        let direct = (1.0 - p + p * u.exp()).ln();
        let v = d.log_mgf(u).unwrap();
        prop_assume!(direct.re > -20.0);
        prop_assert!((v.re - direct.re).abs() < 1e-9);
        let k = ((v.im - direct.im) / (2.0 * PI)).round();
        prop_assert!((v.im - direct.im - 2.0 * PI * k).abs() < 1e-9);
    }

    #[test]
    fn mean_is_first_cumulant(q in 0.05f64..0.95) {
        let d = JumpDistribution::geometric(q).unwrap();
        prop_assert!((d.mean() - (1.0 - q) / q).abs() < 1e-10 * (1.0 - q) / q);
    }
}
