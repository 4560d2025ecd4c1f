//! `f_N` from each engine against the exact convolution table, plus the
//! decay rate of `δ₁` in `N`.

use serde::Serialize;

use super::ExperimentSpec;
use crate::density::{
    delta1, density_gaussian_asymptotic, density_saddle, pdf_grid_convolution, pmf_convolution_tilted, Engine, GridSpec,
};
use crate::error::{Error, Result};
use crate::jump_dist::JumpDistribution;
use crate::numeric::linear_fit;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub engine: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub z: f64,
    pub log_density: f64,
    /// `log_density` minus the exact table value.
    pub delta_vs_exact: Option<f64>,
}

/// `log|δ₁| ≈ intercept + slope·log N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
    pub delta1: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityValidation {
    pub rows: Vec<DensityRow>,
    pub rate_fit: Option<RateFit>,
}

/// `"all"` or one of `saddle`, `fft`, `gauss`.
pub fn parse_engines(s: &str) -> Result<Vec<Engine>> {
    if s == "all" {
        return Ok(vec![Engine::Saddle, Engine::Exact, Engine::Gaussian]);
    }
    match s.parse::<Engine>()? {
        Engine::Auto => Err(Error::Spec("density validation needs a concrete engine or `all`".into())),
        e => Ok(vec![e]),
    }
}

pub fn engine_label(e: Engine) -> &'static str {
    match e {
        Engine::Exact => "fft",
        Engine::Saddle => "saddle",
        Engine::Gaussian => "gauss",
        Engine::Auto => "auto",
    }
}

/// Exact `log f_N(z)`: lattice tables tilted at `z/N`, or the grid
/// convolution for continuous laws.
pub fn exact_log_density(dist: &JumpDistribution, n: usize, z: f64) -> Result<f64> {
    if dist.is_discrete() {
        if z.fract() != 0.0 {
            return Err(Error::UnattainableEndpoint { n, z });
        }
        Ok(pmf_convolution_tilted(dist, n, z / n as f64)?.log_pmf(z as i64))
    } else {
        Ok(pdf_grid_convolution(dist, n, GridSpec::for_dist(dist))?.log_value_at(z))
    }
}

fn evaluate(dist: &JumpDistribution, engine: Engine, n: usize, z: f64) -> Result<f64> {
    match engine {
        Engine::Saddle => density_saddle(dist, n, z),
        Engine::Gaussian => density_gaussian_asymptotic(dist, n, z),
        Engine::Exact => exact_log_density(dist, n, z),
        Engine::Auto => Err(Error::Spec("unresolved engine".into())),
    }
}

/// Rows for every `(engine, N)` with `z` from the endpoint rule.
pub fn run_density_validation(spec: &ExperimentSpec, engines: &[Engine]) -> Result<DensityValidation> {
    spec.validate()?;
    if engines.is_empty() {
        return Err(Error::Spec("no engines selected".into()));
    }
    let dist = spec.distribution()?;
    let mut rows = Vec::new();
    let mut d1 = Vec::new();
    for &n in &spec.n_list {
        let z = spec.z_rule.endpoint(&dist, n, spec.ref_slope);
        let exact = if engines.contains(&Engine::Exact) {
            Some(exact_log_density(&dist, n, z)?)
        } else {
            exact_log_density(&dist, n, z).ok()
        };
        for &e in engines {
            let v = match (e, exact) {
                (Engine::Exact, Some(x)) => x,
                _ => evaluate(&dist, e, n, z)?,
            };
            rows.push(DensityRow {
                engine: engine_label(e).to_string(),
                n,
                z,
                log_density: v,
                delta_vs_exact: exact.map(|x| v - x),
            });
        }
        match delta1(&dist, n, z) {
            Ok(d) if d != 0.0 && d.is_finite() => d1.push((n, d)),
            Ok(_) => {}
            Err(e) => log::warn!("δ₁ at N = {n}: {e}"),
        }
    }
    let rate_fit = (d1.len() >= 2)
        .then(|| {
            let x: Vec<f64> = d1.iter().map(|(n, _)| (*n as f64).ln()).collect();
            let y: Vec<f64> = d1.iter().map(|(_, d)| d.abs().ln()).collect();
            linear_fit(&x, &y).map(|(intercept, slope, r2)| RateFit { slope, intercept, r2, points: d1.len(), delta1: d1.clone() })
        })
        .flatten();
    Ok(DensityValidation { rows, rate_fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{ExperimentKind, ZRule};
    use serde_json::json;

    fn spec(dist: serde_json::Value, n_list: Vec<usize>) -> ExperimentSpec {
        ExperimentSpec::new(ExperimentKind::Density, dist).with_n_list(n_list)
    }

    #[test]
    fn binomial_column() {
        let s = spec(json!({"family": "bernoulli", "params": {"p": 0.5}}), vec![100]);
        let v = run_density_validation(&s, &parse_engines("all").unwrap()).unwrap();
        assert_eq!(v.rows.len(), 3);
        let fft = v.rows.iter().find(|r| r.engine == "fft").unwrap();
        // log(C(100, 50) 2⁻¹⁰⁰)
        assert!((fft.log_density - (-2.530_876_5)).abs() < 1e-6);
        assert_eq!(fft.delta_vs_exact, Some(0.0));
        let sad = v.rows.iter().find(|r| r.engine == "saddle").unwrap();
        assert!(sad.delta_vs_exact.unwrap().abs() < 1e-9);
    }

    #[test]
    fn gaussian_error_decays_at_mean() {
        let s = spec(json!({"family": "uniform_int", "params": {"lo": -2, "hi": 3}}), vec![16, 64, 256]);
        let v = run_density_validation(&s, &[Engine::Gaussian]).unwrap();
        let errs: Vec<f64> = v.rows.iter().map(|r| r.delta_vs_exact.unwrap().abs()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(v.rate_fit.unwrap().slope < 0.0);
    }

    #[test]
    fn single_engine_and_parsing() {
        let s = spec(json!({"family": "geometric", "params": {"q": 0.5}}), vec![32]).with_z_rule(ZRule::Fixed(40.0));
        let v = run_density_validation(&s, &parse_engines("saddle").unwrap()).unwrap();
        assert_eq!(v.rows.len(), 1);
        assert_eq!(v.rows[0].engine, "saddle");
        assert!(v.rate_fit.is_none());
        assert!(parse_engines("auto").is_err());
        assert!(parse_engines("bogus").is_err());
    }
}
