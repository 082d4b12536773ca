//! Empirical normalized cut and mixing time of Cσ[X] on the ribbon density,
//! swept over σ or ρ and compared with the theoretical upper bounds.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg::{panels, Plot, Series};
use super::{
    ensure_dir, least_squares, median, spearman, sqrt2_grid, trial_radius, validate_radius_policy, write_json,
    RadiusPolicy,
};
use crate::bounds::{phi_bar, tau_bar, BoundConstants, GeometricParams};
use crate::diagnostics::{default_t_max, mixing_time_inf_with, MixingMethod};
use crate::error::{invalid, Result};
use crate::graph::{build_graph, induced_subgraph, is_connected, normalized_cut, smallest_connecting_radius, VertexSet};
use crate::rng::derive_seed;
use crate::synthetic::{sample_ribbon, LabeledPointCloud, RibbonParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Sigma,
    Rho,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::Sigma => "sigma",
            SweepVar::Rho => "rho",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    NormalizedCut,
    MixingTime,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::NormalizedCut => "normalized_cut",
            Quantity::MixingTime => "mixing_time",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub sweep: SweepVar,
    /// Values of the swept parameter; defaults to 0.1·√2^j, j = 1..=10.
    pub grid: Vec<f64>,
    pub sigma: f64,
    pub rho: f64,
    pub gamma: f64,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub radius: RadiusPolicy,
    pub quantities: Vec<Quantity>,
    /// Step cap of the mixing-time search; defaults to 50·|Cσ[X]|.
    pub t_max: Option<u64>,
    pub mixing_method: MixingMethod,
    pub constants: BoundConstants,
    /// File stem of the outputs.
    pub output: String,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            sweep: SweepVar::Sigma,
            grid: sqrt2_grid(),
            sigma: 0.1,
            rho: 3.2,
            gamma: 1.0,
            d: 2,
            n: 5000,
            trials: 5,
            seed: 0,
            radius: RadiusPolicy::SmallestConnected,
            quantities: vec![Quantity::NormalizedCut, Quantity::MixingTime],
            t_max: None,
            mixing_method: MixingMethod::Auto,
            constants: BoundConstants::default(),
            output: "bounds".into(),
        }
    }
}

impl BoundsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(invalid("grid must not be empty"));
        }
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if self.quantities.is_empty() {
            return Err(invalid("at least one quantity is required"));
        }
        if self.output.is_empty() {
            return Err(invalid("output stem must not be empty"));
        }
        validate_radius_policy(&self.radius)?;
        for &v in &self.grid {
            self.params(v).validate()?;
        }
        Ok(())
    }

    /// Ribbon parameters at grid value `v`.
    pub fn params(&self, v: f64) -> RibbonParams {
        let (sigma, rho) = match self.sweep {
            SweepVar::Sigma => (v, self.rho),
            SweepVar::Rho => (self.sigma, v),
        };
        RibbonParams { sigma, rho, gamma: self.gamma, d: self.d }
    }
}

/// One long-format CSV row. `empirical` is `None` for a walk that did not mix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub sweep_var: SweepVar,
    pub value: f64,
    pub trial: usize,
    pub empirical: Option<f64>,
    pub theoretical: f64,
    pub quantity: Quantity,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialInfo {
    pub value: f64,
    pub trial: usize,
    pub seed: u64,
    pub r: f64,
    pub n_csigma: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantitySummary {
    pub quantity: Quantity,
    pub values: Vec<f64>,
    pub median_empirical: Vec<Option<f64>>,
    pub median_theoretical: Vec<f64>,
    /// c minimizing Σ (log e − log(c·t))² over all finite rows.
    pub fitted_constant: Option<f64>,
    /// Least-squares slope of log empirical on log swept value over all finite rows.
    pub loglog_slope: Option<f64>,
    /// Spearman correlation between the grid values and the empirical medians.
    pub spearman_medians: Option<f64>,
    pub not_mixed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub sweep_var: SweepVar,
    pub d: usize,
    pub quantities: Vec<QuantitySummary>,
    pub trials: Vec<TrialInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsOutput {
    pub config: BoundsConfig,
    pub rows: Vec<BoundsRow>,
    pub summary: BoundsSummary,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

impl BoundsOutput {
    /// CSV text with header `sweep_var,value,trial,empirical,theoretical,quantity,d`.
    pub fn csv(&self) -> Result<String> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        wr.write_record(["sweep_var", "value", "trial", "empirical", "theoretical", "quantity", "d"])?;
        for row in &self.rows {
            wr.write_record([
                row.sweep_var.as_str().to_string(),
                fmt_f64(row.value),
                row.trial.to_string(),
                row.empirical.map_or_else(|| "not_mixed".to_string(), fmt_f64),
                fmt_f64(row.theoretical),
                row.quantity.as_str().to_string(),
                row.d.to_string(),
            ])?;
        }
        let bytes = wr.into_inner().map_err(|e| crate::Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn svg(&self) -> String {
        let plots: Vec<Plot> = self
            .summary
            .quantities
            .iter()
            .map(|q| {
                let emp: Vec<(f64, f64)> =
                    q.values.iter().zip(&q.median_empirical).filter_map(|(&x, y)| Some((x, (*y)?))).collect();
                let c = q.fitted_constant.unwrap_or(1.0);
                let theo: Vec<(f64, f64)> = q.values.iter().zip(&q.median_theoretical).map(|(&x, &t)| (x, c * t)).collect();
                Plot::new(q.quantity.as_str(), self.summary.sweep_var.as_str(), q.quantity.as_str())
                    .log_log()
                    .with(Series::line("empirical", "#2ca02c", true, emp.clone()))
                    .with(Series::dots("", "#2ca02c", emp))
                    .with(Series::line("bound (rescaled)", "#555555", false, theo))
            })
            .collect();
        panels(&plots, plots.len())
    }

    pub fn write(&self, out_dir: &Path, svg_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        let csv_path = out_dir.join(format!("{}.csv", self.config.output));
        std::fs::write(&csv_path, self.csv()?)?;
        let json_path = out_dir.join(format!("{}_summary.json", self.config.output));
        write_json(&json_path, &self.summary)?;
        let mut paths = vec![csv_path, json_path];
        if let Some(dir) = svg_dir {
            ensure_dir(dir)?;
            let p = dir.join(format!("{}.svg", self.config.output));
            std::fs::write(&p, self.svg())?;
            paths.push(p);
        }
        Ok(paths)
    }
}

struct TrialResult {
    info: TrialInfo,
    rows: Vec<BoundsRow>,
}

fn run_trial(cfg: &BoundsConfig, gi: usize, trial: usize, sample: &LabeledPointCloud, shared: Option<f64>) -> Result<TrialResult> {
    let value = cfg.grid[gi];
    let params = cfg.params(value);
    let r = trial_radius(&cfg.radius, &sample.points, params.sigma, shared)?;
    let g = build_graph(&sample.points, r)?;
    let members = sample.indices_where(|l| l.in_expansion());
    let set = VertexSet::new(g.n(), members.iter().copied())?;
    let geom = GeometricParams::ribbon_cluster(&params);
    let mut rows = Vec::new();
    for &q in &cfg.quantities {
        let (empirical, theoretical) = match q {
            Quantity::NormalizedCut => (Some(normalized_cut(&g, &set)), phi_bar(&geom, r, &cfg.constants).value),
            Quantity::MixingTime => {
                let tau = if set.is_empty() {
                    None
                } else {
                    let sub = induced_subgraph(&g, &set)?;
                    if is_connected(&sub) {
                        let t_max = cfg.t_max.unwrap_or_else(|| default_t_max(&sub));
                        mixing_time_inf_with(&sub, t_max, cfg.mixing_method)?.tau_inf.map(|t| t as f64)
                    } else {
                        None
                    }
                };
                (tau, tau_bar(&geom, r, &cfg.constants)?.value)
            }
        };
        rows.push(BoundsRow { sweep_var: cfg.sweep, value, trial, empirical, theoretical, quantity: q, d: cfg.d });
    }
    Ok(TrialResult {
        info: TrialInfo { value, trial, seed: trial_seed(cfg, gi, trial), r, n_csigma: members.len() },
        rows,
    })
}

fn trial_seed(cfg: &BoundsConfig, gi: usize, trial: usize) -> u64 {
    derive_seed(cfg.seed, &[gi as u64, trial as u64])
}

fn summarize(cfg: &BoundsConfig, rows: &[BoundsRow], trials: Vec<TrialInfo>) -> BoundsSummary {
    let quantities = cfg
        .quantities
        .iter()
        .map(|&q| {
            let qrows: Vec<&BoundsRow> = rows.iter().filter(|r| r.quantity == q).collect();
            let mut med_e = Vec::new();
            let mut med_t = Vec::new();
            for &v in &cfg.grid {
                let at: Vec<&&BoundsRow> = qrows.iter().filter(|r| r.value == v).collect();
                let e: Vec<f64> = at.iter().filter_map(|r| r.empirical).collect();
                med_e.push((!e.is_empty()).then(|| median(&e)));
                med_t.push(median(&at.iter().map(|r| r.theoretical).collect::<Vec<_>>()));
            }
            let finite: Vec<(f64, f64, f64)> = qrows
                .iter()
                .filter_map(|r| {
                    let e = r.empirical?;
                    (e > 0.0 && r.theoretical > 0.0 && r.theoretical.is_finite()).then_some((r.value, e, r.theoretical))
                })
                .collect();
            let fitted_constant = (!finite.is_empty())
                .then(|| (finite.iter().map(|(_, e, t)| e.ln() - t.ln()).sum::<f64>() / finite.len() as f64).exp());
            let lx: Vec<f64> = finite.iter().map(|f| f.0.ln()).collect();
            let ly: Vec<f64> = finite.iter().map(|f| f.1.ln()).collect();
            let (gx, gy): (Vec<f64>, Vec<f64>) =
                cfg.grid.iter().zip(&med_e).filter_map(|(&x, y)| Some((x, (*y)?))).unzip();
            QuantitySummary {
                quantity: q,
                values: cfg.grid.clone(),
                median_empirical: med_e,
                median_theoretical: med_t,
                fitted_constant,
                loglog_slope: least_squares(&lx, &ly).map(|s| s.0),
                spearman_medians: spearman(&gx, &gy),
                not_mixed: qrows.iter().filter(|r| r.empirical.is_none()).count(),
            }
        })
        .collect();
    BoundsSummary { sweep_var: cfg.sweep, d: cfg.d, quantities, trials }
}

/// Runs the sweep. Rows are ordered by (grid index, trial, quantity).
pub fn run_bounds_sweep(cfg: &BoundsConfig) -> Result<BoundsOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len()).flat_map(|g| (0..cfg.trials).map(move |t| (g, t))).collect();
    let samples: Vec<LabeledPointCloud> = jobs
        .par_iter()
        .map(|&(gi, t)| sample_ribbon(&cfg.params(cfg.grid[gi]), cfg.n, trial_seed(cfg, gi, t)))
        .collect::<Result<_>>()?;
    let shared = if cfg.radius == RadiusPolicy::SmallestConnectedShared {
        let radii: Vec<f64> = samples.par_iter().map(|s| smallest_connecting_radius(&s.points)).collect::<Result<_>>()?;
        Some(radii.into_iter().fold(0.0, f64::max))
    } else {
        None
    };
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .zip(samples.par_iter())
        .map(|(&(gi, t), s)| run_trial(cfg, gi, t, s, shared))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut infos = Vec::new();
    for r in results {
        rows.extend(r.rows);
        infos.push(r.info);
    }
    let summary = summarize(cfg, &rows, infos);
    Ok(BoundsOutput { config: cfg.clone(), rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_gives_one_row_per_quantity() {
        let cfg = BoundsConfig {
            grid: vec![0.2],
            rho: 0.4,
            n: 300,
            trials: 1,
            ..BoundsConfig::default()
        };
        let out = run_bounds_sweep(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2);
        let csv = out.csv().unwrap();
        assert!(csv.starts_with("sweep_var,value,trial,empirical,theoretical,quantity,d\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
