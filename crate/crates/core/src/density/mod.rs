//! Densities of sums `S_N`, midpoint conditional laws of the bridge and
//! their Gaussian diagnostics.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

pub mod convolution;
pub mod diagnostics;
pub mod midpoint;
pub mod saddle;

pub use convolution::{
    pdf_grid_convolution, pmf_convolution_tilted, pmf_exact_convolution, DensityTable, EngineKind, GridSpec, TableCache,
    TableKind,
};
pub use diagnostics::{
    compact_support_envelope_check, gaussian_envelope_check, midpoint_gaussian_deviation, tail_bound_check,
    DeviationReport, EnvelopeReport, TailBoundReport,
};
pub use midpoint::{midpoint_law, DensityOracle, MidpointLaw};
pub use saddle::{delta1, density_gaussian_asymptotic, density_saddle};

/// Below this many steps `Auto` prefers tables over the contour integral.
pub const DEFAULT_MIN_N: usize = 32;

/// How `f_k` or `p_k` is evaluated inside midpoint laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Convolution tables (exact for lattice laws, grid for densities).
    Exact,
    /// Contour integral through the saddle point.
    Saddle,
    /// Leading Gaussian term only.
    Gaussian,
    /// Tables for lattice laws and short continuous sums, contour
    /// integral otherwise.
    #[default]
    Auto,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exact => "exact",
            Engine::Saddle => "saddle",
            Engine::Gaussian => "gauss",
            Engine::Auto => "auto",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "exact" | "fft" | "fft_exact" => Ok(Engine::Exact),
            "saddle" => Ok(Engine::Saddle),
            "gauss" | "gaussian" | "gaussian_asymptotic" => Ok(Engine::Gaussian),
            "auto" => Ok(Engine::Auto),
            other => Err(Error::Spec(format!("unknown engine `{other}`"))),
        }
    }
}
