//! Experiment drivers behind the command-line tool: assumption reports,
//! density validation, coupling scaling and tail studies, and the spiky
//! counterexample.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::coupling::{CouplerConfig, CouplingMode};
use crate::density::Engine;
use crate::error::{Error, Result};
use crate::jump_dist::{dist_from_value, JumpDistribution};

pub mod analyze;
pub mod counterexample;
pub mod density_validation;
pub mod output;
pub mod scaling;
pub mod tails;

pub use analyze::{analyze, AnalyzeReport};
pub use counterexample::{midpoint_spread, run_counterexample, CounterexampleRow, SpreadRow};
pub use density_validation::{run_density_validation, DensityRow, DensityValidation};
pub use output::{write_json, write_rows, Format, RowWriter};
pub use scaling::{log_mean_exp_jackknife, run_scaling, ScalingFit, ScalingResult, ScalingRow};
pub use tails::{run_tails, TailResult, TailRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Analyze,
    Density,
    Couple,
    Scaling,
    Tails,
    Counterexample,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "analyze" => ExperimentKind::Analyze,
            "density" => ExperimentKind::Density,
            "couple" => ExperimentKind::Couple,
            "scaling" => ExperimentKind::Scaling,
            "tails" => ExperimentKind::Tails,
            "counterexample" => ExperimentKind::Counterexample,
            other => return Err(Error::Spec(format!("unknown experiment kind `{other}`"))),
        })
    }
}

/// How the endpoint is chosen for each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum ZRule {
    /// `z = n·p` with `p` the reference slope (the mean by default).
    MeanSlope,
    Fixed(f64),
    /// `z = n·p + c√n`.
    Offset(f64),
}

impl ZRule {
    /// Endpoint for `n` steps, rounded to the lattice for discrete laws.
    pub fn endpoint(&self, dist: &JumpDistribution, n: usize, ref_slope: Option<f64>) -> f64 {
        let p = ref_slope.unwrap_or_else(|| dist.mean());
        let nf = n as f64;
        let z = match *self {
            ZRule::MeanSlope => nf * p,
            ZRule::Fixed(z) => z,
            ZRule::Offset(c) => nf * p + c * nf.sqrt(),
        };
        if dist.is_discrete() {
            z.round()
        } else {
            z
        }
    }
}

impl fmt::Display for ZRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZRule::MeanSlope => f.write_str("mean_slope"),
            ZRule::Fixed(z) => write!(f, "fixed:{z}"),
            ZRule::Offset(c) => write!(f, "offset:{c}"),
        }
    }
}

impl FromStr for ZRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s.split_once(':').map_or((s, None), |(h, t)| (h, Some(t)));
        let value = || -> Result<f64> {
            tail.and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::Spec(format!("z rule `{s}` needs a numeric value")))
        };
        match head {
            "mean" | "mean_slope" => Ok(ZRule::MeanSlope),
            "fixed" => Ok(ZRule::Fixed(value()?)),
            "offset" => Ok(ZRule::Offset(value()?)),
            _ => Err(Error::Spec(format!("unknown z rule `{s}`"))),
        }
    }
}

/// One experiment: what to run, on which law, and where to write it.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dist: Value,
    pub n_list: Vec<usize>,
    pub z_rule: ZRule,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<String>,
    pub format: Format,
    /// Exponent `a` of the `E[e^{aΔ}]` estimate.
    pub exp_a: f64,
    pub mode: CouplingMode,
    pub n_min: usize,
    pub eps3: f64,
    pub ref_slope: Option<f64>,
    pub engine: Engine,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, dist: Value) -> Self {
        let cfg = CouplerConfig::default();
        ExperimentSpec {
            kind,
            dist,
            n_list: Vec::new(),
            z_rule: ZRule::MeanSlope,
            samples: 1000,
            seed: 0,
            output: None,
            format: Format::Csv,
            exp_a: 0.1,
            mode: cfg.mode,
            n_min: cfg.n_min,
            eps3: cfg.eps3,
            ref_slope: None,
            engine: cfg.engine,
        }
    }

    pub fn with_n_list(mut self, n_list: Vec<usize>) -> Self {
        self.n_list = n_list;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_z_rule(mut self, rule: ZRule) -> Self {
        self.z_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Spec("n_list must not be empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Spec("n_list must be strictly increasing".into()));
        }
        if self.n_list[0] == 0 {
            return Err(Error::Spec("n values must be positive".into()));
        }
        if self.samples < 1 {
            return Err(Error::Spec("samples must be at least 1".into()));
        }
        self.coupler_config(0).validate()
    }

    pub fn distribution(&self) -> Result<JumpDistribution> {
        dist_from_value(&self.dist)
    }

    /// Coupler settings for `n` (the seed is mixed with `n`).
    pub fn coupler_config(&self, n: usize) -> CouplerConfig {
        CouplerConfig {
            n_min: self.n_min,
            mode: self.mode,
            eps3: self.eps3,
            ref_slope: self.ref_slope,
            engine: self.engine,
            rng_seed: crate::coupling::rng::splitmix64(self.seed ^ (n as u64).rotate_left(32)),
        }
    }
}
