use pprls::evaluation::empirical_level_set_clusters;
use pprls::experiments::{run_bounds_sweep, run_hard_case, run_two_moons, BoundsConfig, HardCaseConfig, MoonPreset, MoonsConfig, SweepVar};
use pprls::graph::build_graph;
use pprls::ppr::{ppr_cluster, ClusterOptions};
use pprls::synthetic::RectMixtureParams;
use pprls::{Model, PointCloud};

fn preset(name: &str) -> MoonPreset {
    MoonPreset::defaults().into_iter().find(|p| p.name == name).unwrap()
}

#[test]
fn moons_row1_ppr_is_consistent() {
    let cfg = MoonsConfig { presets: vec![preset("row1")], ..MoonsConfig::default() };
    let out = run_two_moons(&cfg).unwrap();
    let p = &out.report.presets[0];
    assert!(p.ppr_consistent >= 8, "PPR consistent in {}/10", p.ppr_consistent);
}

#[test]
fn moons_row3_ppr_fails_while_normalized_cut_succeeds() {
    let cfg = MoonsConfig { presets: vec![preset("row3")], ..MoonsConfig::default() };
    let out = run_two_moons(&cfg).unwrap();
    let p = &out.report.presets[0];
    assert!(p.trials.len() - p.ppr_consistent >= 5, "PPR failed in only {}/10", p.trials.len() - p.ppr_consistent);
    assert!(p.normalized_cut_consistent > p.ppr_consistent);
    for t in &p.trials {
        assert!(t.core.contains(&t.seed_vertex));
    }
}

#[test]
fn ppr_returns_the_seed_component_of_separated_moons() {
    let pts = PointCloud::from_rows(&[[0.0, 0.0], [0.05, 0.0], [5.0, 0.0], [5.05, 0.0]]).unwrap();
    let g = build_graph(&pts, 0.1).unwrap();
    let c = ppr_cluster(&g, 1, &ClusterOptions::normalized(0.1, (0.0, 1.0))).unwrap();
    assert_eq!(c.members.as_slice(), &[0, 1]);
    assert_eq!(c.phi, 0.0);
}

#[test]
fn level_set_separates_the_two_dense_rectangles() {
    let p = RectMixtureParams::default();
    // Density levels of the middle and outer rectangles, as probability densities.
    let z = 1.0 - p.epsilon / 2.0;
    let low = p.epsilon / 2.0 / (p.rho * p.sigma) / z;
    let high = (1.0 - p.epsilon) / 2.0 / (p.rho * p.sigma) / z;
    let level = (low * high).sqrt();
    let two = (0..10)
        .filter(|&seed| {
            let s = Model::RectMixture(p.clone()).sample(4000, seed).unwrap();
            empirical_level_set_clusters(&s.points, p.sigma / 4.0, level, 50).unwrap().len() == 2
        })
        .count();
    assert!(two >= 8, "two components in {two}/10 samples");
}

#[test]
fn level_set_extremes() {
    let pts = PointCloud::from_rows(&[[0.0], [0.1], [0.2], [3.0], [3.1]]).unwrap();
    assert_eq!(empirical_level_set_clusters(&pts, 0.15, 0.0, 1).unwrap().len(), 2);
    assert!(empirical_level_set_clusters(&pts, 0.15, f64::INFINITY, 1).unwrap().is_empty());
}

#[test]
fn bounds_sweep_emits_a_row_per_grid_point_trial_and_quantity() {
    let cfg = BoundsConfig { sweep: SweepVar::Sigma, n: 300, ..BoundsConfig::default() };
    let out = run_bounds_sweep(&cfg).unwrap();
    assert_eq!(out.rows.len(), 10 * 5 * 2);
    let csv = out.csv().unwrap();
    assert_eq!(csv.lines().count(), 101);
    let summary = &out.summary.quantities;
    assert!(summary.iter().all(|q| q.fitted_constant.is_some_and(|c| c > 0.0)));
}

#[test]
fn hard_case_below_the_sample_floor_warns_and_runs() {
    let cfg = HardCaseConfig { n: 500, trials: 2, ..HardCaseConfig::default() };
    let out = run_hard_case(&cfg).unwrap();
    let case = &out.report.cases[0];
    assert_eq!(case.trials.len(), 2);
    assert!(case.warnings.iter().any(|w| w.contains("floor")));
}
