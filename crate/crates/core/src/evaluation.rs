//! Recovery metrics and baseline clusterers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::unit_ball_volume;
use crate::graph::{build_graph, connected_components, induced_subgraph, vol, NeighborhoodGraph, VertexSet};
use crate::synthetic::PointCloud;

/// vol(estimate △ truth).
pub fn symmetric_diff_volume(g: &NeighborhoodGraph, estimate: &VertexSet, truth: &VertexSet) -> usize {
    vol(g, &estimate.symmetric_difference(truth))
}

/// |estimate △ truth|.
pub fn misclassification_count(estimate: &VertexSet, truth: &VertexSet) -> usize {
    estimate.symmetric_difference(truth).len()
}

/// Outcome of the consistency test C[X] ⊆ Ĉ and Ĉ ∩ C′[X] = ∅ for every other cluster.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Consistency {
    pub consistent: bool,
    pub contains_core: bool,
    pub disjoint_from_others: bool,
    pub missing_core: usize,
    pub other_overlap: usize,
}

pub fn consistency_check(estimate: &VertexSet, core: &VertexSet, other_cores: &[VertexSet]) -> Result<Consistency> {
    for (i, a) in other_cores.iter().enumerate() {
        if !a.is_disjoint(core) {
            return Err(invalid("cluster cores overlap"));
        }
        if other_cores[i + 1..].iter().any(|b| !a.is_disjoint(b)) {
            return Err(invalid("cluster cores overlap"));
        }
    }
    let missing_core = core.iter().filter(|&u| !estimate.contains(u)).count();
    let other_overlap: usize = other_cores.iter().map(|o| o.iter().filter(|&u| estimate.contains(u)).count()).sum();
    Ok(Consistency {
        consistent: missing_core == 0 && other_overlap == 0,
        contains_core: missing_core == 0,
        disjoint_from_others: other_overlap == 0,
        missing_core,
        other_overlap,
    })
}

/// Recovery metrics of one estimate against the empirical target Cσ[X].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub delta_vol: usize,
    /// delta_vol / vol(Cσ[X]).
    pub delta_vol_ratio: f64,
    pub mc_count: usize,
    pub consistent: bool,
    pub contains_core: bool,
    pub disjoint_from_others: bool,
}

/// Metrics of `estimate` against the target `truth`, with `core` and `other_cores` for consistency.
pub fn recovery_report(
    g: &NeighborhoodGraph,
    estimate: &VertexSet,
    truth: &VertexSet,
    core: &VertexSet,
    other_cores: &[VertexSet],
) -> Result<RecoveryReport> {
    let delta = symmetric_diff_volume(g, estimate, truth);
    let tv = vol(g, truth);
    let c = consistency_check(estimate, core, other_cores)?;
    Ok(RecoveryReport {
        delta_vol: delta,
        delta_vol_ratio: if tv > 0 { delta as f64 / tv as f64 } else { f64::INFINITY },
        mc_count: misclassification_count(estimate, truth),
        consistent: c.consistent,
        contains_core: c.contains_core,
        disjoint_from_others: c.disjoint_from_others,
    })
}

/// One row of the batch output `trial,seed,delta_vol,ratio,mc,consistent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub delta_vol: usize,
    pub ratio: f64,
    pub mc: usize,
    pub consistent: bool,
}

pub fn write_trials_csv<W: Write>(rows: &[TrialRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}

/// k-NN density estimate (k−1)/((n−1)·ν_d·R_k^d), with k−1 replaced by 1 when k = 1.
///
/// For a uniform density f the number of other points in B(x, R) is
/// Binomial(n−1, f·ν_d·R^d), and E[(k−1)/((n−1)ν_d R_k^d)] = f, so the
/// estimate is unbiased at interior points of a uniform rectangle.
pub fn knn_density(points: &PointCloud, k: usize) -> Result<Vec<f64>> {
    let n = points.len();
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if k >= n {
        return Err(invalid(format!("k = {k} needs at least k+1 points, got {n}")));
    }
    let d = points.dim();
    let nu = unit_ball_volume(d);
    let numer = (k.max(2) - 1) as f64 / (n - 1) as f64;
    use rayon::prelude::*;
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            let mut d2: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| points.point(j).iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let (_, kth, _) = d2.select_nth_unstable_by(k - 1, f64::total_cmp);
            let rk = kth.sqrt();
            numer / (nu * rk.powi(d as i32))
        })
        .collect();
    Ok(out)
}

/// Connected components of the r-neighborhood graph restricted to points whose
/// k-NN density estimate is at least `level`; sets are over all point indices.
pub fn empirical_level_set_clusters(points: &PointCloud, r: f64, level: f64, k: usize) -> Result<Vec<VertexSet>> {
    let dens = knn_density(points, k)?;
    let g = build_graph(points, r)?;
    let keep = VertexSet::new(points.len(), (0..points.len()).filter(|&i| dens[i] >= level))?;
    if keep.is_empty() {
        return Ok(Vec::new());
    }
    let sub = induced_subgraph(&g, &keep)?;
    connected_components(&sub)
        .into_iter()
        .map(|c| VertexSet::new(points.len(), c.iter().map(|u| sub.origin(u))))
        .collect()
}

/// Iteration cap of the power method in [`global_spectral_bipartition`].
pub const POWER_ITERATIONS: usize = 20_000;

/// Sweep over the second eigenvector of the lazy walk, found by power iteration
/// on ½(I + D^{-1/2}AD^{-1/2}) with the top eigenvector deflated. Returns the
/// prefix set of least normalized cut.
pub fn global_spectral_bipartition(g: &NeighborhoodGraph) -> Result<(VertexSet, f64)> {
    let n = g.n();
    if n < 2 {
        return Err(invalid("bipartition needs at least two vertices"));
    }
    if g.num_edges() == 0 {
        return Err(Error::Edgeless);
    }
    let comps = connected_components(g).len();
    if comps > 1 {
        return Err(Error::Disconnected { components: comps });
    }
    let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let vol: f64 = deg.iter().sum();
    let top: Vec<f64> = deg.iter().map(|d| (d / vol).sqrt()).collect();
    let deflate = |x: &mut [f64]| {
        let c: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= c * b);
    };
    let normalize = |x: &mut [f64]| {
        let s = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if s > 0.0 {
            x.iter_mut().for_each(|a| *a /= s);
        }
        s
    };
    // Deterministic, non-symmetric start so no eigenvector is missed by symmetry.
    let mut x: Vec<f64> = (0..n).map(|u| ((u as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5).collect();
    deflate(&mut x);
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut last = f64::NAN;
    for _ in 0..POWER_ITERATIONS {
        for u in 0..n {
            let s: f64 = g.neighbors(u).iter().map(|&w| x[w] / deg[w].sqrt()).sum();
            y[u] = 0.5 * x[u] + 0.5 * s / deg[u].sqrt();
        }
        deflate(&mut y);
        let ray = normalize(&mut y);
        std::mem::swap(&mut x, &mut y);
        if ray == 0.0 || (ray - last).abs() <= 1e-15 {
            break;
        }
        last = ray;
    }
    let score: Vec<f64> = x.iter().zip(&deg).map(|(a, d)| a / d.sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let total = g.total_volume();
    let mut in_set = vec![false; n];
    let (mut cut, mut volume) = (0usize, 0usize);
    let mut best = (f64::INFINITY, 0usize);
    for (i, &u) in order.iter().enumerate().take(n - 1) {
        let inner = g.neighbors(u).iter().filter(|&&w| in_set[w]).count();
        cut = cut + g.degree(u) - 2 * inner;
        volume += g.degree(u);
        in_set[u] = true;
        let phi = crate::graph::phi_from_counts(cut, volume, total);
        if phi < best.0 {
            best = (phi, i + 1);
        }
    }
    let set = VertexSet::new(n, order[..best.1].iter().copied())?;
    Ok((set, best.0))
}
