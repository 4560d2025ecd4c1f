//! N-fold convolution tables, kept in the exponentially tilted domain so
//! that entries far from the mean of the untilted law keep their relative
//! accuracy.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::cramer::solve_saddle;
use crate::error::{Error, Result};
use crate::jump_dist::JumpDistribution;

/// Tail mass discarded on each side of the one-step law.
pub const STEP_TAIL: f64 = 1e-12;
/// Products of lengths up to this bound are convolved directly.
pub const DIRECT_LIMIT: usize = 1 << 25;
/// Default cap on table length.
pub const DEFAULT_BUDGET: usize = 1 << 26;
// FFT output below this fraction of the total mass is round-off
const FFT_TRIM: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    Pmf,
    PdfGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    FftExact,
    Saddle,
    GaussianAsymptotic,
}

/// Grid used for continuous tables: spacing `h` and the one-step tail mass
/// to discard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub tail: f64,
}

impl GridSpec {
    pub fn new(h: f64) -> Self {
        GridSpec { h, tail: STEP_TAIL }
    }

    /// Spacing of one hundredth of the jump standard deviation.
    pub fn for_dist(dist: &JumpDistribution) -> Self {
        GridSpec::new(dist.variance().sqrt() / 100.0)
    }
}

/// Log density or log mass of `S_n` on the lattice `origin + i·step`.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub n: usize,
    pub kind: TableKind,
    pub origin: f64,
    pub step: f64,
    pub log_values: Vec<f64>,
    pub engine: EngineKind,
    /// Exponential tilt `u` of the internal representation.
    pub tilt: f64,
    tilted: Vec<f64>,
}

impl DensityTable {
    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn position(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    /// Largest position in the table.
    pub fn end(&self) -> f64 {
        self.position(self.len().saturating_sub(1))
    }

    /// Log mass at the integer `k` (pmf tables).
    pub fn log_pmf(&self, k: i64) -> f64 {
        let i = k - self.origin as i64;
        if i < 0 || i as usize >= self.len() {
            f64::NEG_INFINITY
        } else {
            self.log_values[i as usize]
        }
    }

    /// Log density at `x`, linear in the log between grid points (grid
    /// tables) or exact lookup (pmf tables).
    pub fn log_value_at(&self, x: f64) -> f64 {
        match self.kind {
            TableKind::Pmf => {
                if x.fract() != 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.log_pmf(x as i64)
                }
            }
            TableKind::PdfGrid => {
                let s = (x - self.origin) / self.step;
                let last = (self.len() - 1) as f64;
                if !(s >= -0.5 && s <= last + 0.5) {
                    return f64::NEG_INFINITY;
                }
                let s = s.clamp(0.0, last);
                let i = (s.floor() as usize).min(self.len().saturating_sub(2));
                let t = s - i as f64;
                let (a, b) = (self.log_values[i], self.log_values[(i + 1).min(self.len() - 1)]);
                if t == 0.0 {
                    a
                } else if t == 1.0 {
                    b
                } else if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    a + t * (b - a)
                }
            }
        }
    }

    /// Tilted value at `x`; 0 off the table. Tiny values mean the entry
    /// has lost relative accuracy.
    pub fn tilted_value(&self, x: f64) -> f64 {
        let s = ((x - self.origin) / self.step).round();
        if s < 0.0 || s as usize >= self.len() {
            0.0
        } else {
            self.tilted[s as usize]
        }
    }

    /// Total mass of the untilted table (sum, or grid sum times step).
    pub fn mass(&self) -> f64 {
        let s: f64 = self.log_values.iter().map(|v| v.exp()).sum();
        match self.kind {
            TableKind::Pmf => s,
            TableKind::PdfGrid => s * self.step,
        }
    }

    /// Mass of the tilted representation; 1 up to truncation.
    pub fn tilted_mass(&self) -> f64 {
        let s: f64 = self.tilted.iter().sum();
        match self.kind {
            TableKind::Pmf => s,
            TableKind::PdfGrid => s * self.step,
        }
    }
}

fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..len].iter().map(|c| (c.re * scale).max(0.0)).collect()
}

/// Drops leading and trailing entries whose cumulative mass is below
/// `cut`; returns the number dropped at the front.
fn trim(v: &mut Vec<f64>, cut: f64) -> usize {
    let mut acc = 0.0;
    let mut front = 0;
    while front + 1 < v.len() && acc + v[front] < cut {
        acc += v[front];
        front += 1;
    }
    let mut acc = 0.0;
    let mut back = v.len();
    while back > front + 1 && acc + v[back - 1] < cut {
        acc += v[back - 1];
        back -= 1;
    }
    v.truncate(back);
    v.drain(..front);
    front
}

/// Tilted one-step table: (origin, values) with values summing (or
/// integrating) to about 1.
fn base_table(dist: &JumpDistribution, u: f64, grid: Option<GridSpec>) -> Result<(f64, Vec<f64>)> {
    let lam = dist.log_mgf_real(u)?;
    if dist.is_discrete() {
        let (lo, hi) = dist.lattice_range(u, STEP_TAIL)?;
        let len = (hi - lo + 1) as usize;
        if len > DEFAULT_BUDGET {
            return Err(Error::MemoryBudgetExceeded { needed: len, budget: DEFAULT_BUDGET });
        }
        let v = (lo..=hi).map(|k| (dist.log_pmf(k) + u * k as f64 - lam).exp()).collect();
        Ok((lo as f64, v))
    } else {
        let g = grid.unwrap_or_else(|| GridSpec::for_dist(dist));
        let (lo, hi) = dist.continuous_range(u, g.tail)?;
        let cells = ((hi - lo) / g.h).ceil().max(1.0) as usize;
        if cells > DEFAULT_BUDGET {
            return Err(Error::MemoryBudgetExceeded { needed: cells, budget: DEFAULT_BUDGET });
        }
        let x0 = lo + 0.5 * g.h;
        let v = (0..cells)
            .map(|i| {
                let x = x0 + i as f64 * g.h;
                (dist.log_weight(x) + u * x - lam).exp()
            })
            .collect();
        Ok((x0, v))
    }
}

fn finish(dist: &JumpDistribution, n: usize, origin: f64, step: f64, tilted: Vec<f64>, u: f64) -> Result<DensityTable> {
    let lam = dist.log_mgf_real(u)?;
    let kind = if dist.is_discrete() { TableKind::Pmf } else { TableKind::PdfGrid };
    let log_values = tilted
        .iter()
        .enumerate()
        .map(|(i, &v)| v.ln() - u * (origin + i as f64 * step) + n as f64 * lam)
        .collect();
    Ok(DensityTable { n, kind, origin, step, log_values, engine: EngineKind::FftExact, tilt: u, tilted })
}

/// Convolves two tables that share a tilt and lattice step.
pub fn convolve_tables(dist: &JumpDistribution, a: &DensityTable, b: &DensityTable, budget: usize) -> Result<DensityTable> {
    let needed = a.len() + b.len() - 1;
    if needed > budget {
        return Err(Error::MemoryBudgetExceeded { needed, budget });
    }
    let continuous = a.kind == TableKind::PdfGrid;
    let (mut v, direct) = if a.len().saturating_mul(b.len()) <= DIRECT_LIMIT {
        (convolve_direct(&a.tilted, &b.tilted), true)
    } else {
        (convolve_fft(&a.tilted, &b.tilted), false)
    };
    if continuous {
        v.iter_mut().for_each(|x| *x *= a.step);
    }
    let mut origin = a.origin + b.origin;
    let mass: f64 = v.iter().sum::<f64>() * if continuous { a.step } else { 1.0 };
    if !direct {
        let dropped = trim(&mut v, FFT_TRIM * mass / if continuous { a.step } else { 1.0 });
        origin += dropped as f64 * a.step;
    }
    let first = v.iter().position(|&x| x > 0.0).unwrap_or(0);
    let last = v.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    v.truncate(last + 1);
    v.drain(..first);
    origin += first as f64 * a.step;
    finish(dist, a.n + b.n, origin, a.step, v, a.tilt)
}

/// Slope clamped to where a tilt is well defined for `n`-step tables.
fn interior_slope(dist: &JumpDistribution, slope: f64, n: usize) -> f64 {
    let (a, b) = dist.support();
    let margin = 0.5 / n.max(1) as f64;
    let (lo, hi) = (a + margin, b - margin);
    if lo < hi {
        slope.clamp(lo, hi)
    } else {
        0.5 * (a + b)
    }
}

/// Tilt `u` solving `Λ'(u) = slope`, with the slope pulled into the
/// interior of the support.
pub fn tilt_for_slope(dist: &JumpDistribution, slope: f64, n: usize) -> Result<f64> {
    let s = interior_slope(dist, slope, n);
    if (s - dist.mean()).abs() <= 1e-14 * dist.mean().abs().max(1.0) {
        return Ok(0.0);
    }
    Ok(solve_saddle(dist, s)?.u_z)
}

/// Memoized tables `S_k` for one tilt; safe to share across threads.
#[derive(Debug)]
pub struct TableCache {
    dist: JumpDistribution,
    tilt: f64,
    grid: Option<GridSpec>,
    budget: usize,
    base: (f64, Vec<f64>),
    tables: RwLock<HashMap<usize, Arc<DensityTable>>>,
}

impl TableCache {
    pub fn with_tilt(dist: &JumpDistribution, tilt: f64, grid: Option<GridSpec>, budget: usize) -> Result<Self> {
        let base = base_table(dist, tilt, grid)?;
        Ok(TableCache {
            dist: dist.clone(),
            tilt,
            grid,
            budget,
            base,
            tables: RwLock::new(HashMap::new()),
        })
    }

    /// Cache tilted to the slope `slope` (per step) for sums of up to `n`
    /// steps.
    pub fn for_slope(dist: &JumpDistribution, slope: f64, n: usize, grid: Option<GridSpec>) -> Result<Self> {
        Self::with_tilt(dist, tilt_for_slope(dist, slope, n)?, grid, DEFAULT_BUDGET)
    }

    pub fn dist(&self) -> &JumpDistribution {
        &self.dist
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid
    }

    pub fn step(&self) -> f64 {
        if self.dist.is_discrete() {
            1.0
        } else {
            self.grid.unwrap_or_else(|| GridSpec::for_dist(&self.dist)).h
        }
    }

    /// Table of `S_k`.
    pub fn get(&self, k: usize) -> Result<Arc<DensityTable>> {
        if k == 0 {
            return Err(Error::Spec("convolution power must be positive".into()));
        }
        if let Some(t) = self.tables.read().unwrap().get(&k) {
            return Ok(t.clone());
        }
        let table = if k == 1 {
            let step = self.step();
            let (origin, v) = self.base.clone();
            finish(&self.dist, 1, origin, step, v, self.tilt)?
        } else {
            let a = self.get(k / 2)?;
            let b = self.get(k - k / 2)?;
            convolve_tables(&self.dist, &a, &b, self.budget)?
        };
        let table = Arc::new(table);
        self.tables.write().unwrap().insert(k, table.clone());
        Ok(table)
    }
}

/// `p_N` by repeated convolution of the one-step pmf, tilted at the mean.
pub fn pmf_exact_convolution(dist: &JumpDistribution, n: usize) -> Result<DensityTable> {
    if !dist.is_discrete() {
        return Err(Error::WrongKind { expected: "discrete" });
    }
    let cache = TableCache::with_tilt(dist, 0.0, None, DEFAULT_BUDGET)?;
    Ok((*cache.get(n)?).clone())
}

/// Same as [`pmf_exact_convolution`] with the tables tilted toward the
/// per-step slope `slope`, which keeps relative accuracy near `n·slope`.
pub fn pmf_convolution_tilted(dist: &JumpDistribution, n: usize, slope: f64) -> Result<DensityTable> {
    if !dist.is_discrete() {
        return Err(Error::WrongKind { expected: "discrete" });
    }
    let cache = TableCache::for_slope(dist, slope, n, None)?;
    Ok((*cache.get(n)?).clone())
}

/// `f_N` on a cell-centred grid by repeated convolution of the sampled
/// density. The discretization bias is `O(h²)`.
pub fn pdf_grid_convolution(dist: &JumpDistribution, n: usize, grid: GridSpec) -> Result<DensityTable> {
    if dist.is_discrete() {
        return Err(Error::WrongKind { expected: "continuous" });
    }
    let cache = TableCache::with_tilt(dist, 0.0, Some(grid), DEFAULT_BUDGET)?;
    let base_mass = cache.base.1.iter().sum::<f64>() * grid.h;
    let drift = (base_mass - 1.0).abs();
    if drift > 1e-4 {
        return Err(Error::GridTooCoarse { drift });
    }
    let mut t = (*cache.get(n)?).clone();
    let mass = t.tilted_mass();
    let drift = (mass - 1.0).abs();
    if drift > 1e-4 {
        return Err(Error::GridTooCoarse { drift });
    }
    let shift = mass.ln();
    t.tilted.iter_mut().for_each(|v| *v /= mass);
    t.log_values.iter_mut().for_each(|v| *v -= shift);
    Ok(t)
}
