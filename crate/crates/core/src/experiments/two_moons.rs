//! Two-moons comparison of PPR, the global normalized cut and the empirical
//! density level set, as the moons move closer together.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg::{panels, Plot, Series};
use super::{connected_graph, ensure_dir, trial_radius, validate_radius_policy, write_json, AlphaPolicy, IntervalPolicy, RadiusPolicy};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{consistency_check, empirical_level_set_clusters, global_spectral_bipartition, knn_density, symmetric_diff_volume};
use crate::graph::{NeighborhoodGraph, VertexSet};
use crate::ppr::{ppr_cluster, ClusterOptions};
use crate::rng::derive_seed;
use crate::synthetic::{sample_two_moons, LabeledPointCloud, Region, TwoMoonsParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoonPreset {
    pub name: String,
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
}

impl MoonPreset {
    /// The three offsets of increasing difficulty.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self { name: "row1".into(), mu1: [-0.5, 0.0], mu2: [0.0, 0.0] },
            Self { name: "row2".into(), mu1: [-0.5, -0.07], mu2: [0.0, 0.07] },
            Self { name: "row3".into(), mu1: [-0.5, -0.125], mu2: [0.0, 0.125] },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoonsConfig {
    pub presets: Vec<MoonPreset>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub moon_radius: f64,
    pub noise_scale: f64,
    pub radius: RadiusPolicy,
    pub alpha: AlphaPolicy,
    pub interval: IntervalPolicy,
    /// Neighbors used by the k-NN density estimate.
    pub knn_k: usize,
    /// Fraction of points, by estimated density, dropped below the level set.
    pub level_quantile: f64,
    pub seed_vertex: Option<usize>,
    pub output: String,
}

impl Default for MoonsConfig {
    fn default() -> Self {
        Self {
            presets: MoonPreset::defaults(),
            n: 800,
            trials: 10,
            seed: 0,
            moon_radius: 0.5,
            noise_scale: 0.05,
            radius: RadiusPolicy::Fixed { r: 0.1 },
            alpha: AlphaPolicy::Fixed { alpha: 0.05 },
            interval: IntervalPolicy::Fixed { lower: 0.0, upper: 1.0 },
            knn_k: 10,
            level_quantile: 0.05,
            seed_vertex: None,
            output: "moons".into(),
        }
    }
}

impl MoonsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.presets.is_empty() {
            return Err(invalid("at least one preset is required"));
        }
        if self.n <= self.knn_k || self.knn_k == 0 {
            return Err(invalid("need 1 <= knn_k < n"));
        }
        if !(0.0..1.0).contains(&self.level_quantile) {
            return Err(invalid("level_quantile must lie in [0,1)"));
        }
        if let Some(v) = self.seed_vertex {
            if v >= self.n {
                return Err(invalid(format!("seed vertex {v} is out of range for n = {}", self.n)));
            }
        }
        if self.output.is_empty() {
            return Err(invalid("output stem must not be empty"));
        }
        match self.alpha {
            AlphaPolicy::Fixed { alpha } if alpha > 0.0 && alpha <= 1.0 => {}
            AlphaPolicy::Fixed { .. } => return Err(invalid("alpha must lie in (0,1]")),
            _ => return Err(invalid("the two-moons experiment supports only a fixed alpha")),
        }
        match self.interval {
            IntervalPolicy::Fixed { lower, upper } if lower >= 0.0 && lower < upper => {}
            IntervalPolicy::Fixed { .. } => return Err(invalid("need 0 <= lower < upper")),
            _ => return Err(invalid("the two-moons experiment supports only a fixed sweep interval")),
        }
        validate_radius_policy(&self.radius)?;
        for p in &self.presets {
            self.params(p).validate()?;
        }
        Ok(())
    }

    pub fn params(&self, p: &MoonPreset) -> TwoMoonsParams {
        TwoMoonsParams { mu1: p.mu1, mu2: p.mu2, moon_radius: self.moon_radius, noise_scale: self.noise_scale, ambient_dim: 2 }
    }
}

/// One estimated cluster and how it compares with the moon-1 core.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub members: Vec<usize>,
    pub phi: Option<f64>,
    pub delta_vol: usize,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoonsTrial {
    pub trial: usize,
    pub sample_seed: u64,
    pub r: f64,
    /// Whether r was raised to the smallest connecting radius.
    pub r_raised: bool,
    pub seed_vertex: usize,
    pub alpha: f64,
    pub density_level: f64,
    pub core: Vec<usize>,
    pub other: Vec<usize>,
    pub ppr: MethodResult,
    pub normalized_cut: MethodResult,
    pub level_set: MethodResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetReport {
    pub name: String,
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub ppr_consistent: usize,
    pub normalized_cut_consistent: usize,
    pub level_set_consistent: usize,
    pub trials: Vec<MoonsTrial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoonsReport {
    pub presets: Vec<PresetReport>,
}

#[derive(Clone, Debug)]
pub struct MoonsOutput {
    pub config: MoonsConfig,
    pub report: MoonsReport,
    points: Vec<Vec<(f64, f64)>>,
}

impl MoonsOutput {
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
            let mut k = 0;
            for p in &self.report.presets {
                for t in &p.trials {
                    let path = dir.join(format!("{}_{}_trial{}.svg", self.config.output, p.name, t.trial));
                    std::fs::write(&path, trial_svg(&p.name, t, &self.points[k]))?;
                    paths.push(path);
                    k += 1;
                }
            }
        }
        Ok(paths)
    }
}

fn trial_svg(name: &str, t: &MoonsTrial, pts: &[(f64, f64)]) -> String {
    let n = pts.len();
    let split = |members: &[usize]| {
        let mut mask = vec![false; n];
        members.iter().for_each(|&i| mask[i] = true);
        let inside: Vec<(f64, f64)> = (0..n).filter(|&i| mask[i]).map(|i| pts[i]).collect();
        let outside: Vec<(f64, f64)> = (0..n).filter(|&i| !mask[i]).map(|i| pts[i]).collect();
        (inside, outside)
    };
    let panel = |title: &str, members: &[usize]| {
        let (a, b) = split(members);
        let mut p = Plot::new(&format!("{name}: {title}"), "x1", "x2")
            .with(Series::dots("", "#bbbbbb", b))
            .with(Series::dots("cluster", "#d62728", a))
            .with(Series::cross("seed", "black", pts[t.seed_vertex]));
        p.width = 380.0;
        p.height = 320.0;
        p
    };
    let mut truth = panel("density clusters", &t.core);
    let (other, _) = split(&t.other);
    truth.series.insert(1, Series::dots("C'", "#1f77b4", other));
    panels(
        &[truth, panel("PPR", &t.ppr.members), panel("normalized cut", &t.normalized_cut.members), panel("level set", &t.level_set.members)],
        4,
    )
}

fn evaluate(g: &NeighborhoodGraph, est: &VertexSet, core: &VertexSet, other: &VertexSet, phi: Option<f64>) -> Result<MethodResult> {
    Ok(MethodResult {
        members: est.as_slice().to_vec(),
        phi,
        delta_vol: symmetric_diff_volume(g, est, core),
        consistent: consistency_check(est, core, std::slice::from_ref(other))?.consistent,
    })
}

/// The set among `candidates` sharing the most points with `core` (first on ties).
fn best_match(candidates: Vec<VertexSet>, core: &VertexSet) -> Option<VertexSet> {
    let mut best: Option<(usize, VertexSet)> = None;
    for c in candidates {
        let k = c.intersection(core).len();
        if best.as_ref().is_none_or(|(bk, _)| k > *bk) {
            best = Some((k, c));
        }
    }
    best.map(|b| b.1)
}

fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).floor() as usize]
}

fn run_trial(cfg: &MoonsConfig, preset: &MoonPreset, sample: &LabeledPointCloud, sample_seed: u64, trial: usize) -> Result<MoonsTrial> {
    let n = sample.len();
    let params = cfg.params(preset);
    let r0 = trial_radius(&cfg.radius, &sample.points, cfg.noise_scale, None)?;
    let (g, r_raised) = connected_graph(&sample.points, r0)?;
    let r = g.radius();
    // Density clusters: points within one noise scale of each arc.
    let regions: Vec<Region> = sample.points.iter().map(|x| params.region(x, 0.0)).collect();
    let core = VertexSet::new(n, (0..n).filter(|&i| regions[i] == Region::Core))?;
    let other = VertexSet::new(n, (0..n).filter(|&i| regions[i] == Region::Other))?;
    let seed_vertex = match cfg.seed_vertex {
        Some(v) => v,
        None => {
            let bary = [params.mu1[0], params.mu1[1] + 2.0 * params.moon_radius / std::f64::consts::PI];
            sample.points.nearest(core.as_slice(), &bary).ok_or_else(|| invalid("moon 1 has no core points"))?
        }
    };
    let (AlphaPolicy::Fixed { alpha }, IntervalPolicy::Fixed { lower, upper }) = (&cfg.alpha, &cfg.interval) else {
        unreachable!("validated");
    };
    let ppr = match ppr_cluster(&g, seed_vertex, &ClusterOptions::normalized(*alpha, (*lower, *upper))) {
        Ok(res) => evaluate(&g, &res.members, &core, &other, Some(res.phi))?,
        Err(Error::NoCluster { .. }) => evaluate(&g, &VertexSet::empty(n), &core, &other, None)?,
        Err(e) => return Err(e),
    };
    let (side, phi) = global_spectral_bipartition(&g)?;
    let side = best_match(vec![side.clone(), side.complement()], &core).expect("two candidates");
    let normalized_cut = evaluate(&g, &side, &core, &other, Some(phi))?;
    let density_level = quantile(&knn_density(&sample.points, cfg.knn_k)?, cfg.level_quantile);
    // The level set drops the outliers that forced r up, so it uses the configured radius.
    let clusters = empirical_level_set_clusters(&sample.points, r0, density_level, cfg.knn_k)?;
    let level = best_match(clusters, &core).unwrap_or_else(|| VertexSet::empty(n));
    let level_set = evaluate(&g, &level, &core, &other, None)?;
    Ok(MoonsTrial {
        trial,
        sample_seed,
        r,
        r_raised,
        seed_vertex,
        alpha: *alpha,
        density_level,
        core: core.as_slice().to_vec(),
        other: other.as_slice().to_vec(),
        ppr,
        normalized_cut,
        level_set,
    })
}

pub fn run_two_moons(cfg: &MoonsConfig) -> Result<MoonsOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.presets.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let results: Vec<(MoonsTrial, Vec<(f64, f64)>)> = jobs
        .par_iter()
        .map(|&(pi, t)| {
            let seed = derive_seed(cfg.seed, &[pi as u64, t as u64]);
            let sample = sample_two_moons(&cfg.params(&cfg.presets[pi]), cfg.n, seed)?;
            let pts = sample.points.iter().map(|p| (p[0], p[1])).collect();
            Ok((run_trial(cfg, &cfg.presets[pi], &sample, seed, t)?, pts))
        })
        .collect::<Result<_>>()?;
    let mut presets: Vec<PresetReport> = cfg
        .presets
        .iter()
        .map(|p| PresetReport {
            name: p.name.clone(),
            mu1: p.mu1,
            mu2: p.mu2,
            ppr_consistent: 0,
            normalized_cut_consistent: 0,
            level_set_consistent: 0,
            trials: Vec::new(),
        })
        .collect();
    let mut points = Vec::new();
    for (&(pi, _), (trial, pts)) in jobs.iter().zip(results) {
        let p = &mut presets[pi];
        p.ppr_consistent += trial.ppr.consistent as usize;
        p.normalized_cut_consistent += trial.normalized_cut.consistent as usize;
        p.level_set_consistent += trial.level_set.consistent as usize;
        p.trials.push(trial);
        points.push(pts);
    }
    Ok(MoonsOutput { config: cfg.clone(), report: MoonsReport { presets }, points })
}
