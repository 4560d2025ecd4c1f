//! Assumption report for a jump law.

use serde::Serialize;

use crate::error::Result;
use crate::jump_dist::{check_assumptions, CheckConfig, JumpDistribution, Status, TailParams};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub status: Status,
    pub detail: String,
    pub measured: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub family: String,
    pub discrete: bool,
    pub mean: f64,
    pub variance: f64,
    pub support: (f64, f64),
    pub mgf_domain: (f64, f64),
    pub log_concave: bool,
    pub tail_params: Option<TailParams>,
    pub all_pass: bool,
    pub checks: Vec<CheckRow>,
}

pub fn analyze(dist: &JumpDistribution, cfg: &CheckConfig) -> Result<AnalyzeReport> {
    let report = check_assumptions(dist, cfg);
    Ok(AnalyzeReport {
        family: dist.name().to_string(),
        discrete: dist.is_discrete(),
        mean: dist.mean(),
        variance: dist.variance(),
        support: dist.support(),
        mgf_domain: dist.mgf_domain(),
        log_concave: report.log_concave,
        tail_params: report.tail_params,
        all_pass: report.all_pass(),
        checks: report
            .checks
            .iter()
            .map(|c| CheckRow { id: c.id.to_string(), status: c.status, detail: c.detail.clone(), measured: c.measured })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_report() {
        let r = analyze(&JumpDistribution::bernoulli(0.5).unwrap(), &CheckConfig::default()).unwrap();
        assert!(r.discrete);
        assert_eq!(r.mean, 0.5);
        assert!(r.checks.iter().any(|c| c.id == "D1"));
        assert!(r.all_pass);
    }

    #[test]
    fn spiky_is_not_log_concave() {
        let r = analyze(&JumpDistribution::counterexample_spiky(), &CheckConfig::default()).unwrap();
        assert!(!r.log_concave);
    }
}
