//! PPR on the three-rectangle mixture: the failure regime for tall thin
//! clusters and the recovery regime for small ε.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg::{Plot, Series};
use super::{ensure_dir, median, trial_radius, validate_radius_policy, write_json, AlphaPolicy, IntervalPolicy, RadiusPolicy};
use crate::bounds::{hard_case_thresholds, vol_p_r, BoundConstants, GeometricParams, HardCaseThresholds};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{consistency_check, symmetric_diff_volume};
use crate::graph::{build_graph, normalized_cut, smallest_connecting_radius, VertexSet};
use crate::ppr::{make_initialization_plan, ppr_cluster, ClusterOptions, InitializationPlan};
use crate::rng::derive_seed;
use crate::synthetic::{sample_rect_mixture, LabeledPointCloud, Model, RectMixtureParams, Region};

/// Normalized symmetric difference at or above which PPR is said to fail.
pub const FAILURE_BAR: f64 = 0.125;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardCaseConfig {
    pub cases: Vec<RectMixtureParams>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub radius: RadiusPolicy,
    pub alpha: AlphaPolicy,
    pub interval: IntervalPolicy,
    /// Seed vertex override; by default the point of C⁽¹⁾[X] nearest its centroid.
    pub seed_vertex: Option<usize>,
    /// Constant c of the failure and recovery conditions.
    pub c: f64,
    pub constants: BoundConstants,
    /// Monte Carlo samples for vol_{P,r}(Cσ) under the well-initialized policies.
    pub volume_samples: usize,
    pub output: String,
}

impl Default for HardCaseConfig {
    fn default() -> Self {
        Self {
            cases: vec![RectMixtureParams { epsilon: 0.3, sigma: 0.1, rho: 1.0 }],
            n: 5000,
            trials: 10,
            seed: 0,
            radius: RadiusPolicy::SigmaFraction { fraction: 0.25 },
            alpha: AlphaPolicy::ConductanceMultiple { factor: 65.0 },
            interval: IntervalPolicy::Fixed { lower: 0.0, upper: 1.0 },
            seed_vertex: None,
            c: 1.0,
            constants: BoundConstants::default(),
            volume_samples: 200_000,
            output: "hardcase".into(),
        }
    }
}

impl HardCaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.cases.is_empty() {
            return Err(invalid("at least one case is required"));
        }
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if let Some(v) = self.seed_vertex {
            if v >= self.n {
                return Err(invalid(format!("seed vertex {v} is out of range for n = {}", self.n)));
            }
        }
        if !(self.c > 0.0) {
            return Err(invalid("c must be positive"));
        }
        if self.output.is_empty() {
            return Err(invalid("output stem must not be empty"));
        }
        match self.alpha {
            AlphaPolicy::Fixed { alpha } if !(alpha > 0.0 && alpha <= 1.0) => return Err(invalid("alpha must lie in (0,1]")),
            AlphaPolicy::ConductanceMultiple { factor } if !(factor > 0.0) => return Err(invalid("alpha factor must be positive")),
            _ => {}
        }
        if let IntervalPolicy::Fixed { lower, upper } = self.interval {
            if !(lower >= 0.0 && lower < upper) {
                return Err(invalid("need 0 <= lower < upper"));
            }
        }
        validate_radius_policy(&self.radius)?;
        for c in &self.cases {
            c.validate()?;
        }
        Ok(())
    }

    fn needs_plan(&self) -> bool {
        self.alpha == AlphaPolicy::WellInitialized || self.interval == IntervalPolicy::WellInitialized
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCaseTrial {
    pub trial: usize,
    pub sample_seed: u64,
    pub r: f64,
    pub seed_vertex: usize,
    /// Φ_{n,r}(L[X]) for the lower half-plane L.
    pub phi_lower: f64,
    pub alpha: f64,
    pub interval: (f64, f64),
    pub estimate_size: usize,
    pub estimate_volume: usize,
    pub estimate_phi: Option<f64>,
    pub truth_size: usize,
    pub delta_vol: usize,
    /// (σρ)/(r²n²)·vol(Ĉ △ C⁽¹⁾[X]).
    pub normalized_delta: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCaseCaseReport {
    pub epsilon: f64,
    pub sigma: f64,
    pub rho: f64,
    pub n: usize,
    pub thresholds: HardCaseThresholds,
    pub plan: Option<InitializationPlan>,
    pub trials: Vec<HardCaseTrial>,
    pub median_normalized_delta: f64,
    pub failure_bar: f64,
    pub meets_failure_bar: bool,
    pub consistent_trials: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCaseReport {
    pub cases: Vec<HardCaseCaseReport>,
}

/// Per-trial data for the scatter plots; not serialized.
#[derive(Clone, Debug)]
struct Panel {
    name: String,
    points: Vec<(f64, f64)>,
    estimate: Vec<bool>,
    truth: Vec<bool>,
    seed: usize,
}

#[derive(Clone, Debug)]
pub struct HardCaseOutput {
    pub config: HardCaseConfig,
    pub report: HardCaseReport,
    panels: Vec<Panel>,
}

impl HardCaseOutput {
    pub fn json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)? + "\n")
    }

    pub fn write(&self, out_dir: &Path, svg_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
        ensure_dir(out_dir)?;
        let path = out_dir.join(format!("{}.json", self.config.output));
        write_json(&path, &self.report)?;
        let mut paths = vec![path];
        if let Some(dir) = svg_dir {
            ensure_dir(dir)?;
            for p in &self.panels {
                let path = dir.join(format!("{}_{}.svg", self.config.output, p.name));
                std::fs::write(&path, panel_svg(p))?;
                paths.push(path);
            }
        }
        Ok(paths)
    }
}

fn panel_svg(p: &Panel) -> String {
    let pick = |f: &dyn Fn(usize) -> bool| -> Vec<(f64, f64)> { (0..p.points.len()).filter(|&i| f(i)).map(|i| p.points[i]).collect() };
    let mut plot = Plot::new(&p.name, "x1", "x2")
        .with(Series::dots("other", "#bbbbbb", pick(&|i| !p.estimate[i] && !p.truth[i])))
        .with(Series::dots("C1 missed", "#1f77b4", pick(&|i| !p.estimate[i] && p.truth[i])))
        .with(Series::dots("estimate", "#d62728", pick(&|i| p.estimate[i])))
        .with(Series::cross("seed", "black", p.points[p.seed]));
    plot.width = 360.0;
    plot.height = 600.0;
    plot.to_svg()
}

fn trial_seed(cfg: &HardCaseConfig, ci: usize, trial: usize) -> u64 {
    derive_seed(cfg.seed, &[ci as u64, trial as u64])
}

fn plan_for(cfg: &HardCaseConfig, ci: usize, params: &RectMixtureParams, r: f64) -> Result<InitializationPlan> {
    let model = Model::RectMixture(params.clone());
    let sigma = params.sigma;
    let p2 = params.clone();
    let region = move |x: &[f64]| p2.region(x, sigma).in_expansion();
    let vol = vol_p_r(&model, &region, r, cfg.volume_samples, derive_seed(cfg.seed, &[ci as u64, u64::MAX]))?;
    let w = params.weights();
    // Cσ is C⁽¹⁾ together with the middle rectangle.
    let p_csigma = w[0] + w[1];
    make_initialization_plan(&GeometricParams::rect_cluster(params), r, vol.value, p_csigma, cfg.n, &cfg.constants)
}

fn run_trial(
    cfg: &HardCaseConfig,
    ci: usize,
    trial: usize,
    sample: &LabeledPointCloud,
    r: f64,
    plan: Option<&InitializationPlan>,
) -> Result<(HardCaseTrial, Panel)> {
    let params = &cfg.cases[ci];
    let n = sample.len();
    let g = build_graph(&sample.points, r)?;
    let truth = VertexSet::new(n, sample.indices_where(|l| l == Region::Core))?;
    let other = VertexSet::new(n, sample.indices_where(|l| l == Region::Other))?;
    let lower = VertexSet::new(n, (0..n).filter(|&i| sample.points.point(i)[1] < 0.0))?;
    let phi_lower = normalized_cut(&g, &lower);
    let alpha = match cfg.alpha {
        AlphaPolicy::Fixed { alpha } => alpha,
        AlphaPolicy::ConductanceMultiple { factor } => (factor * phi_lower).min(1.0),
        AlphaPolicy::WellInitialized => plan.expect("plan computed").alpha_interval.0,
    };
    if !(alpha > 0.0) {
        return Err(Error::Numeric(format!("teleportation parameter {alpha} is not positive")));
    }
    let interval = match cfg.interval {
        IntervalPolicy::Fixed { lower, upper } => (lower, upper),
        IntervalPolicy::WellInitialized => plan.expect("plan computed").sweep_interval,
    };
    let seed_vertex = match cfg.seed_vertex {
        Some(v) => v,
        None => {
            let c = sample.points.centroid(truth.as_slice());
            sample.points.nearest(truth.as_slice(), &c).ok_or_else(|| invalid("C1[X] is empty"))?
        }
    };
    let (estimate, estimate_phi) = match ppr_cluster(&g, seed_vertex, &ClusterOptions::normalized(alpha, interval)) {
        Ok(res) => (res.members, Some(res.phi)),
        Err(Error::NoCluster { .. }) => (VertexSet::empty(n), None),
        Err(e) => return Err(e),
    };
    let delta_vol = symmetric_diff_volume(&g, &estimate, &truth);
    let normalized_delta = params.sigma * params.rho / (r * r * (n * n) as f64) * delta_vol as f64;
    let consistent = consistency_check(&estimate, &truth, std::slice::from_ref(&other))?.consistent;
    let record = HardCaseTrial {
        trial,
        sample_seed: trial_seed(cfg, ci, trial),
        r,
        seed_vertex,
        phi_lower,
        alpha,
        interval,
        estimate_size: estimate.len(),
        estimate_volume: crate::graph::vol(&g, &estimate),
        estimate_phi,
        truth_size: truth.len(),
        delta_vol,
        normalized_delta,
        consistent,
    };
    let panel = Panel {
        name: format!("case{ci}_trial{trial}"),
        points: sample.points.iter().map(|p| (p[0], p[1])).collect(),
        estimate: estimate.mask().to_vec(),
        truth: truth.mask().to_vec(),
        seed: seed_vertex,
    };
    Ok((record, panel))
}

/// Runs every case of the config; trials run in parallel.
pub fn run_hard_case(cfg: &HardCaseConfig) -> Result<HardCaseOutput> {
    cfg.validate()?;
    let mut cases = Vec::new();
    let mut panels = Vec::new();
    for (ci, params) in cfg.cases.iter().enumerate() {
        let samples: Vec<LabeledPointCloud> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| sample_rect_mixture(params, cfg.n, trial_seed(cfg, ci, t)))
            .collect::<Result<_>>()?;
        let shared = if cfg.radius == RadiusPolicy::SmallestConnectedShared {
            let radii: Vec<f64> = samples.par_iter().map(|s| smallest_connecting_radius(&s.points)).collect::<Result<_>>()?;
            Some(radii.into_iter().fold(0.0, f64::max))
        } else {
            None
        };
        let radii: Vec<f64> =
            samples.iter().map(|s| trial_radius(&cfg.radius, &s.points, params.sigma, shared)).collect::<Result<_>>()?;
        // One plan per distinct radius; with a σ-proportional radius this is a single plan.
        let mut plans: Vec<(f64, InitializationPlan)> = Vec::new();
        if cfg.needs_plan() {
            for &r in &radii {
                if !plans.iter().any(|(pr, _)| *pr == r) {
                    plans.push((r, plan_for(cfg, ci, params, r)?));
                }
            }
        }
        let plan_of = |r: f64| plans.iter().find(|(pr, _)| *pr == r).map(|(_, p)| p);
        let results: Vec<(HardCaseTrial, Panel)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, ci, t, &samples[t], radii[t], plan_of(radii[t])))
            .collect::<Result<_>>()?;
        let thresholds = hard_case_thresholds(params.epsilon, params.sigma, params.rho, radii[0], cfg.c)?;
        let mut warnings = thresholds.warnings.clone();
        if (cfg.n as f64) < thresholds.n_floor {
            warnings.push(format!("n = {} is below the sample-size floor {:.0} of the failure guarantee", cfg.n, thresholds.n_floor));
        }
        let plan = plan_of(radii[0]).cloned();
        if let Some(p) = &plan {
            warnings.extend(p.warnings.iter().cloned());
        }
        let (trials, trial_panels): (Vec<HardCaseTrial>, Vec<Panel>) = results.into_iter().unzip();
        panels.extend(trial_panels);
        let med = median(&trials.iter().map(|t| t.normalized_delta).collect::<Vec<_>>());
        cases.push(HardCaseCaseReport {
            epsilon: params.epsilon,
            sigma: params.sigma,
            rho: params.rho,
            n: cfg.n,
            thresholds,
            plan,
            consistent_trials: trials.iter().filter(|t| t.consistent).count(),
            median_normalized_delta: med,
            failure_bar: FAILURE_BAR,
            meets_failure_bar: med >= FAILURE_BAR,
            trials,
            warnings,
        });
    }
    Ok(HardCaseOutput { config: cfg.clone(), report: HardCaseReport { cases }, panels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_reports_floor_warning() {
        let cfg = HardCaseConfig { n: 400, trials: 2, ..HardCaseConfig::default() };
        let out = run_hard_case(&cfg).unwrap();
        let case = &out.report.cases[0];
        assert_eq!(case.trials.len(), 2);
        assert!(case.warnings.iter().any(|w| w.contains("floor")));
        assert!(case.trials.iter().all(|t| t.alpha > 0.0 && t.alpha <= 1.0));
    }
}
