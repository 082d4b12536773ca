//! Reproducible experiment drivers: bound-tightness sweeps on the ribbon
//! density, the two-moons comparison, and the hard-case study on the
//! rectangle mixture.
//!
//! Every driver takes a JSON config in which each field has a default, runs
//! its trials in parallel on independent derived RNG streams, and writes
//! outputs ordered by (grid index, trial) so reruns are byte-identical.

pub mod bounds_sweep;
pub mod hard_case;
pub mod svg;
pub mod two_moons;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{build_graph, is_connected, smallest_connecting_radius, NeighborhoodGraph};
use crate::synthetic::PointCloud;

pub use bounds_sweep::{run_bounds_sweep, BoundsConfig, BoundsOutput, BoundsRow, SweepVar};
pub use hard_case::{run_hard_case, HardCaseConfig, HardCaseOutput, HardCaseReport};
pub use two_moons::{run_two_moons, MoonPreset, MoonsConfig, MoonsOutput, MoonsReport};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "PPRLS_THREADS";

/// How the neighborhood radius is chosen for each trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusPolicy {
    Fixed { r: f64 },
    /// Smallest r connecting the trial's own sample.
    SmallestConnected,
    /// Largest of the per-trial smallest connecting radii over the whole
    /// experiment, so that every trial uses the same r.
    SmallestConnectedShared,
    /// r = fraction·σ.
    SigmaFraction { fraction: f64 },
}

/// How the teleportation parameter α is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaPolicy {
    /// Lower end of the well-initialized range, 1/(10·τ̄).
    WellInitialized,
    Fixed { alpha: f64 },
    /// α = factor·Φ̂(L[X]) for the lower half-space L, capped at 1.
    ConductanceMultiple { factor: f64 },
}

/// Sweep interval (L, U).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntervalPolicy {
    /// (1/50, 1/5)·1/(n(n−1)·vol_{P,r}(Cσ)).
    WellInitialized,
    Fixed { lower: f64, upper: f64 },
}

/// Any experiment config, tagged by `"experiment"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Bounds(BoundsConfig),
    Moons(MoonsConfig),
    HardCase(HardCaseConfig),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match &cfg {
            Self::Bounds(c) => c.validate()?,
            Self::Moons(c) => c.validate()?,
            Self::HardCase(c) => c.validate()?,
        }
        Ok(cfg)
    }

    /// Runs the experiment, writing outputs under `out_dir` and optional SVGs
    /// under `svg_dir`. Returns the written paths.
    pub fn run(&self, out_dir: &Path, svg_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
        match self {
            Self::Bounds(c) => run_bounds_sweep(c)?.write(out_dir, svg_dir),
            Self::Moons(c) => run_two_moons(c)?.write(out_dir, svg_dir),
            Self::HardCase(c) => run_hard_case(c)?.write(out_dir, svg_dir),
        }
    }
}

/// Runs `f` on a rayon pool sized by `PPRLS_THREADS` (default: all logical cores).
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| invalid(format!("{THREADS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(invalid(format!("{THREADS_ENV} must be a positive integer")));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Numeric(e.to_string()))?;
    faer::set_global_parallelism(faer::Par::Seq);
    Ok(pool.install(f))
}

/// Radius for one trial, given the policy, the model's σ and the precomputed
/// shared radius (if any).
pub(crate) fn trial_radius(policy: &RadiusPolicy, points: &PointCloud, sigma: f64, shared: Option<f64>) -> Result<f64> {
    match policy {
        RadiusPolicy::Fixed { r } => Ok(*r),
        RadiusPolicy::SmallestConnected => smallest_connecting_radius(points),
        RadiusPolicy::SmallestConnectedShared => shared.ok_or_else(|| invalid("shared radius was not computed")),
        RadiusPolicy::SigmaFraction { fraction } => Ok(fraction * sigma),
    }
}

/// Builds the graph at `r`, raising r to the smallest connecting radius when
/// the graph is disconnected. Returns the graph and whether r was raised.
pub(crate) fn connected_graph(points: &PointCloud, r: f64) -> Result<(NeighborhoodGraph, bool)> {
    let g = build_graph(points, r)?;
    if is_connected(&g) {
        return Ok((g, false));
    }
    let r2 = smallest_connecting_radius(points)?.max(r);
    Ok((build_graph(points, r2)?, true))
}

pub(crate) fn validate_radius_policy(p: &RadiusPolicy) -> Result<()> {
    match p {
        RadiusPolicy::Fixed { r } if !(*r > 0.0 && r.is_finite()) => Err(invalid("fixed radius must be positive")),
        RadiusPolicy::SigmaFraction { fraction } if !(*fraction > 0.0 && fraction.is_finite()) => {
            Err(invalid("radius fraction must be positive"))
        }
        _ => Ok(()),
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Median of the finite values; NaN when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares slope and intercept of y on x.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

/// The grid 0.1·√2^j, j = 1..=10.
pub fn sqrt2_grid() -> Vec<f64> {
    (1..=10).map(|j| 0.1 * 2f64.sqrt().powi(j)).collect()
}
