//! Personalized PageRank vectors, sweep cuts and the clustering pipelines.
//!
//! Distributions are row vectors: one lazy-walk step maps q to qW with
//! W = (I + D⁻¹A)/2, and the PPR vector of seed v solves
//! p = α·e_v + (1 − α)·pW.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{tau_bar, BoundConstants, GeometricParams};
use crate::error::{invalid, Error, Result};
use crate::graph::{connected_components, phi_from_counts, NeighborhoodGraph, VertexSet};

/// Default ℓ1 tolerance for exact solves.
pub const DEFAULT_TOL: f64 = 1e-12;

/// One lazy random walk step: returns dist·W. Isolated vertices keep their mass.
pub fn lazy_walk_apply(g: &NeighborhoodGraph, dist: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    lazy_walk_into(g, dist, &mut out);
    out
}

pub(crate) fn lazy_walk_into(g: &NeighborhoodGraph, dist: &[f64], out: &mut [f64]) {
    assert_eq!(dist.len(), g.n(), "distribution length does not match the graph");
    out.iter_mut().for_each(|o| *o = 0.0);
    for (u, &m) in dist.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let deg = g.degree(u);
        if deg == 0 {
            out[u] += m;
            continue;
        }
        out[u] += 0.5 * m;
        let share = 0.5 * m / deg as f64;
        for &w in g.neighbors(u) {
            out[w] += share;
        }
    }
}

/// A PPR vector with its provenance. `epsilon == 0` marks an exact solve, in
/// which case the residual is identically zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PprVector {
    pub seed: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub values: Vec<f64>,
    pub residual: Vec<f64>,
}

impl PprVector {
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Writes `vertex,p,degree,score` rows, score being p/degree (empty for isolated vertices).
    pub fn write_csv<W: Write>(&self, g: &NeighborhoodGraph, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["vertex", "p", "degree", "score"])?;
        for (u, &p) in self.values.iter().enumerate() {
            let d = g.degree(u);
            let score = if d > 0 { (p / d as f64).to_string() } else { String::new() };
            wr.write_record([u.to_string(), p.to_string(), d.to_string(), score])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Linear solver used for exact PPR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PprSolver {
    /// Fixed-point iteration from the estimated iteration count.
    #[default]
    Auto,
    /// Damped fixed-point iteration p ← α·e_v + (1−α)·pW; converges at rate 1 − α.
    FixedPoint,
    /// Deflated, degree-preconditioned conjugate gradients; suited to tiny α.
    ConjugateGradient,
}

/// Fixed-point iteration is chosen by `Auto` when it needs at most this many steps.
const FIXED_POINT_MAX_STEPS: f64 = 20_000.0;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0,1], got {alpha}")));
    }
    Ok(())
}

fn check_vertex(g: &NeighborhoodGraph, v: usize) -> Result<()> {
    if v >= g.n() {
        return Err(invalid(format!("seed vertex {v} out of range for {} vertices", g.n())));
    }
    Ok(())
}

/// Exact PPR vector of seed `v` to ℓ1 accuracy `tol`, by fixed-point
/// iteration or, for very small α, conjugate gradients.
pub fn ppr_exact(g: &NeighborhoodGraph, v: usize, alpha: f64, tol: f64) -> Result<PprVector> {
    ppr_exact_with(g, v, alpha, tol, PprSolver::Auto)
}

pub fn ppr_exact_with(g: &NeighborhoodGraph, v: usize, alpha: f64, tol: f64, solver: PprSolver) -> Result<PprVector> {
    check_vertex(g, v)?;
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let solver = match solver {
        PprSolver::Auto => {
            let steps = if alpha >= 1.0 { 1.0 } else { (tol * alpha).ln() / (1.0 - alpha).ln() };
            if steps <= FIXED_POINT_MAX_STEPS {
                PprSolver::FixedPoint
            } else {
                PprSolver::ConjugateGradient
            }
        }
        s => s,
    };
    let values = if g.degree(v) == 0 {
        let mut e = vec![0.0; g.n()];
        e[v] = 1.0;
        e
    } else {
        match solver {
            PprSolver::ConjugateGradient => ppr_conjugate_gradient(g, v, alpha, tol)?,
            _ => {
                let mut start = vec![0.0; g.n()];
                start[v] = 1.0;
                ppr_fixed_point(g, &start, alpha, tol)
            }
        }
    };
    Ok(PprVector { seed: v, alpha, epsilon: 0.0, values, residual: vec![0.0; g.n()] })
}

/// PPR vector of an arbitrary starting distribution by fixed-point iteration.
pub fn ppr_from_distribution(g: &NeighborhoodGraph, start: &[f64], alpha: f64, tol: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if start.len() != g.n() {
        return Err(invalid("starting distribution length does not match the graph"));
    }
    Ok(ppr_fixed_point(g, start, alpha, tol))
}

/// The map is a (1−α)-contraction in ℓ1, so after a step of size δ the
/// distance to the fixed point is at most δ(1−α)/α.
fn ppr_fixed_point(g: &NeighborhoodGraph, start: &[f64], alpha: f64, tol: f64) -> Vec<f64> {
    let mut p = start.to_vec();
    let mut walked = vec![0.0; g.n()];
    loop {
        lazy_walk_into(g, &p, &mut walked);
        let mut change = 0.0;
        for u in 0..p.len() {
            let next = alpha * start[u] + (1.0 - alpha) * walked[u];
            change += (next - p[u]).abs();
            p[u] = next;
        }
        if change * (1.0 - alpha) < tol * alpha {
            return p;
        }
    }
}

/// Solves for z = p/D on the seed's component. z satisfies M z = α e_v with
/// M = ((1+α)D − (1−α)A)/2, which is SPD but has an O(α) eigenvalue along the
/// constant vector. Writing z = 1/vol + w removes that mode: w solves
/// M w = α(e_v − d/vol) with Σ d·w = 0, and CG with a D preconditioner stays
/// in that subspace once each preconditioned residual is projected onto it.
fn ppr_conjugate_gradient(g: &NeighborhoodGraph, v: usize, alpha: f64, tol: f64) -> Result<Vec<f64>> {
    let comp = connected_components(g).into_iter().find(|c| c.contains(v)).expect("seed has a component");
    let idx = comp.as_slice();
    let m = idx.len();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &u) in idx.iter().enumerate() {
        local[u] = i;
    }
    let deg: Vec<f64> = idx.iter().map(|&u| g.degree(u) as f64).collect();
    let vol: f64 = deg.iter().sum();
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &u) in idx.iter().enumerate() {
            let s: f64 = g.neighbors(u).iter().map(|&w| x[local[w]]).sum();
            out[i] = 0.5 * ((1.0 + alpha) * deg[i] * x[i] - (1.0 - alpha) * s);
        }
    };
    let project = |x: &mut [f64]| {
        let mean = x.iter().zip(&deg).map(|(a, d)| a * d).sum::<f64>() / vol;
        x.iter_mut().for_each(|a| *a -= mean);
    };
    let mut b: Vec<f64> = deg.iter().map(|d| -alpha * d / vol).collect();
    b[local[v]] += alpha;
    let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut w = vec![0.0; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&deg).map(|(a, d)| a / d).collect();
    project(&mut z);
    let mut dir = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut md = vec![0.0; m];
    // The recursive residual stagnates near machine precision relative to b.
    let target = (tol * 1e-3).max(64.0 * f64::EPSILON) * bnorm;
    let max_iter = 20 * m + 1000;
    let mut converged = bnorm == 0.0;
    for _ in 0..max_iter {
        if converged {
            break;
        }
        apply(&dir, &mut md);
        let denom: f64 = dir.iter().zip(&md).map(|(a, b)| a * b).sum();
        if denom <= 0.0 {
            break;
        }
        let step = rz / denom;
        for i in 0..m {
            w[i] += step * dir[i];
            r[i] -= step * md[i];
        }
        let rnorm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rnorm <= target {
            converged = true;
            break;
        }
        for i in 0..m {
            z[i] = r[i] / deg[i];
        }
        project(&mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    if !converged {
        return Err(Error::Numeric(format!("PPR conjugate gradients did not converge (alpha={alpha})")));
    }
    let mut p = vec![0.0; g.n()];
    for (i, &u) in idx.iter().enumerate() {
        p[u] = (deg[i] * (1.0 / vol + w[i])).max(0.0);
    }
    Ok(p)
}

/// ε-approximate PPR by the push procedure with a FIFO queue.
///
/// Invariant: p + ppr(residual) = ppr(e_v). Vertices are pushed while
/// residual(u) ≥ ε·deg(u); at termination p(u) ∈ [p_exact(u) − ε·deg(u), p_exact(u)].
pub fn appr_push(g: &NeighborhoodGraph, v: usize, alpha: f64, epsilon: f64) -> Result<PprVector> {
    check_vertex(g, v)?;
    check_alpha(alpha)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = g.n();
    let mut p = vec![0.0; n];
    let mut r = vec![0.0; n];
    if g.degree(v) == 0 {
        // The walk never leaves v, so all of the geometric self mass lands on it.
        p[v] = 1.0;
        return Ok(PprVector { seed: v, alpha, epsilon, values: p, residual: r });
    }
    r[v] = 1.0;
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    let active = |r: &[f64], u: usize| g.degree(u) > 0 && r[u] >= epsilon * g.degree(u) as f64;
    if active(&r, v) {
        queue.push_back(v);
        queued[v] = true;
    }
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        if !active(&r, u) {
            continue;
        }
        let ru = r[u];
        let deg = g.degree(u) as f64;
        p[u] += alpha * ru;
        r[u] = 0.5 * (1.0 - alpha) * ru;
        let share = 0.5 * (1.0 - alpha) * ru / deg;
        for &w in g.neighbors(u) {
            r[w] += share;
            if !queued[w] && active(&r, w) {
                queued[w] = true;
                queue.push_back(w);
            }
        }
        if !queued[u] && active(&r, u) {
            queued[u] = true;
            queue.push_back(u);
        }
    }
    Ok(PprVector { seed: v, alpha, epsilon, values: p, residual: r })
}

/// Which score a sweep thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariant {
    /// S_β = {u : p(u)/deg(u) > β}; isolated vertices are never included.
    Normalized,
    /// S_β = {u : p(u) > β·π₀}.
    Unnormalized,
}

/// A sweep set with its threshold and normalized cut.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCut {
    pub beta: f64,
    pub members: VertexSet,
    pub phi: f64,
    pub normalized: bool,
}

/// Compact description of all distinct sweep sets in an interval: set i is the
/// first `sizes[i]` vertices of `order`.
#[derive(Clone, Debug)]
pub struct SweepProfile {
    pub order: Vec<usize>,
    pub sizes: Vec<usize>,
    pub betas: Vec<f64>,
    pub phis: Vec<f64>,
    pub volumes: Vec<usize>,
    pub normalized: bool,
}

impl SweepProfile {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn members(&self, i: usize, universe: usize) -> VertexSet {
        VertexSet::new(universe, self.order[..self.sizes[i]].iter().copied()).expect("sweep vertices in range")
    }

    pub fn cuts(&self, universe: usize) -> Vec<SweepCut> {
        (0..self.len())
            .map(|i| SweepCut {
                beta: self.betas[i],
                members: self.members(i, universe),
                phi: self.phis[i],
                normalized: self.normalized,
            })
            .collect()
    }

    /// Index minimizing Φ; ties go to the smaller volume, then the smaller β.
    pub fn best(&self) -> Option<usize> {
        (0..self.len()).filter(|&i| self.phis[i].is_finite()).min_by(|&a, &b| {
            self.phis[a]
                .total_cmp(&self.phis[b])
                .then(self.volumes[a].cmp(&self.volumes[b]))
                .then(self.betas[a].total_cmp(&self.betas[b]))
        })
    }
}

/// Per-vertex sweep scores; `None` marks vertices excluded from every sweep set.
fn sweep_scores(g: &NeighborhoodGraph, p: &[f64], variant: SweepVariant, pi0: Option<f64>) -> Result<Vec<Option<f64>>> {
    match variant {
        SweepVariant::Normalized => Ok((0..g.n())
            .map(|u| {
                let d = g.degree(u);
                (d > 0).then(|| p[u] / d as f64)
            })
            .collect()),
        SweepVariant::Unnormalized => {
            let pi0 = pi0.ok_or_else(|| invalid("the unnormalized sweep requires pi0"))?;
            if !(pi0 > 0.0 && pi0.is_finite()) {
                return Err(invalid(format!("pi0 must be positive, got {pi0}")));
            }
            Ok(p.iter().map(|&x| Some(x / pi0)).collect())
        }
    }
}

/// All distinct sweep sets {score > β} for β ∈ (lower, upper), in increasing size.
///
/// The achievable sets are {score > s} for each distinct score s strictly
/// inside the interval, plus {score > lower} itself; empty sets are dropped.
pub fn sweep_profile(
    g: &NeighborhoodGraph,
    p: &[f64],
    interval: (f64, f64),
    variant: SweepVariant,
    pi0: Option<f64>,
) -> Result<SweepProfile> {
    let (lower, upper) = interval;
    if p.len() != g.n() {
        return Err(invalid("PPR vector length does not match the graph"));
    }
    if lower.is_nan() || upper.is_nan() || lower >= upper {
        return Err(invalid(format!("sweep interval ({lower}, {upper}) is empty")));
    }
    let scores = sweep_scores(g, p, variant, pi0)?;
    let mut order: Vec<usize> = (0..g.n()).filter(|&u| scores[u].is_some_and(|s| s > lower)).collect();
    let score = |u: usize| scores[u].expect("filtered");
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));

    let inside: Vec<f64> = {
        let mut v: Vec<f64> = order.iter().map(|&u| score(u)).filter(|&s| s > lower && s < upper).collect();
        v.dedup();
        v
    };
    // Thresholds in decreasing order, each with the size of {score > β}.
    let mut thresholds: Vec<(f64, usize)> = Vec::with_capacity(inside.len() + 1);
    let mut k = 0;
    for &s in &inside {
        while k < order.len() && score(order[k]) > s {
            k += 1;
        }
        thresholds.push((s, k));
    }
    let smallest_inside = inside.last().copied().unwrap_or(upper);
    let bottom_beta = if smallest_inside.is_finite() {
        0.5 * (lower + smallest_inside)
    } else {
        lower + 1.0
    };
    thresholds.push((bottom_beta, order.len()));

    let mut in_set = vec![false; g.n()];
    let total = g.total_volume();
    let (mut cut, mut vol, mut added) = (0usize, 0usize, 0usize);
    let mut prof = SweepProfile {
        order,
        sizes: Vec::new(),
        betas: Vec::new(),
        phis: Vec::new(),
        volumes: Vec::new(),
        normalized: variant == SweepVariant::Normalized,
    };
    for (beta, size) in thresholds {
        if size == 0 || prof.sizes.last() == Some(&size) {
            continue;
        }
        while added < size {
            let u = prof.order[added];
            let inner = g.neighbors(u).iter().filter(|&&w| in_set[w]).count();
            cut = cut + g.degree(u) - 2 * inner;
            vol += g.degree(u);
            in_set[u] = true;
            added += 1;
        }
        prof.sizes.push(size);
        prof.betas.push(beta);
        prof.phis.push(phi_from_counts(cut, vol, total));
        prof.volumes.push(vol);
    }
    Ok(prof)
}

/// Materialized sweep cuts, one per distinct member set, in increasing size.
pub fn sweep_cuts(
    g: &NeighborhoodGraph,
    p: &PprVector,
    interval: (f64, f64),
    variant: SweepVariant,
    pi0: Option<f64>,
) -> Result<Vec<SweepCut>> {
    Ok(sweep_profile(g, &p.values, interval, variant, pi0)?.cuts(g.n()))
}

/// Inputs of the PPR clustering pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    pub alpha: f64,
    pub interval: (f64, f64),
    pub variant: SweepVariant,
    pub pi0: Option<f64>,
    /// Use the push approximation with this ε instead of the exact vector.
    pub epsilon: Option<f64>,
    pub tol: f64,
    pub solver: PprSolver,
}

impl ClusterOptions {
    pub fn normalized(alpha: f64, interval: (f64, f64)) -> Self {
        Self {
            alpha,
            interval,
            variant: SweepVariant::Normalized,
            pi0: None,
            epsilon: None,
            tol: DEFAULT_TOL,
            solver: PprSolver::Auto,
        }
    }
}

/// The selected sweep cut together with the PPR vector that produced it.
#[derive(Clone, Debug)]
pub struct ClusterResult {
    pub members: VertexSet,
    pub phi: f64,
    pub beta: f64,
    pub volume: usize,
    pub ppr: PprVector,
    pub candidates: usize,
}

/// JSON form of a cluster: `{seed, alpha, epsilon, beta, phi, members}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub seed: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub phi: f64,
    pub members: Vec<usize>,
}

impl ClusterResult {
    pub fn record(&self) -> ClusterRecord {
        ClusterRecord {
            seed: self.ppr.seed,
            alpha: self.ppr.alpha,
            epsilon: self.ppr.epsilon,
            beta: self.beta,
            phi: self.phi,
            members: self.members.as_slice().to_vec(),
        }
    }
}

/// Computes the PPR vector of `v` (exact, or pushed when ε is given), sweeps
/// the interval and returns the cut of least normalized cut.
pub fn ppr_cluster(g: &NeighborhoodGraph, v: usize, opts: &ClusterOptions) -> Result<ClusterResult> {
    if opts.variant == SweepVariant::Unnormalized && opts.pi0.is_none() {
        return Err(invalid("the unnormalized variant requires pi0"));
    }
    let ppr = match opts.epsilon {
        Some(eps) => appr_push(g, v, opts.alpha, eps)?,
        None => ppr_exact_with(g, v, opts.alpha, opts.tol, opts.solver)?,
    };
    let prof = sweep_profile(g, &ppr.values, opts.interval, opts.variant, opts.pi0)?;
    let best = prof.best().ok_or(Error::NoCluster { lower: opts.interval.0, upper: opts.interval.1 })?;
    Ok(ClusterResult {
        members: prof.members(best, g.n()),
        phi: prof.phis[best],
        beta: prof.betas[best],
        volume: prof.volumes[best],
        candidates: prof.len(),
        ppr,
    })
}

/// Tuning ranges under which the pipelines are well-initialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitializationPlan {
    /// σ/(2d).
    pub r_max: f64,
    pub r: f64,
    /// [1/10, 1/9)·1/τ̄.
    pub alpha_interval: (f64, f64),
    /// (1/50, 1/5)·1/(2·C(n,2)·vol_{P,r}(Cσ)).
    pub sweep_interval: (f64, f64),
    /// λσ/(Λσ·P(Cσ)·n), the target stationary probability of the unnormalized variant.
    pub pi0: f64,
    /// vol_{P,r}(Cσ)/25.
    pub epsilon_appr: f64,
    pub tau_bar: f64,
    pub warnings: Vec<String>,
}

/// Well-initialization ranges for radius `r` and sample size `n`.
pub fn make_initialization_plan(
    geom: &GeometricParams,
    r: f64,
    vol_p_r_csigma: f64,
    p_csigma: f64,
    n: usize,
    constants: &BoundConstants,
) -> Result<InitializationPlan> {
    geom.validate()?;
    if !(vol_p_r_csigma > 0.0 && p_csigma > 0.0) {
        return Err(invalid("volume and probability estimates must be positive"));
    }
    if n < 2 {
        return Err(invalid("sample size must be at least 2"));
    }
    let r_max = geom.sigma / (2.0 * geom.d as f64);
    let tb = tau_bar(geom, r, constants)?;
    let mut warnings = tb.warnings.clone();
    if r > r_max {
        warnings.push(format!("radius {r} exceeds sigma/(2d) = {r_max}"));
    }
    let pairs = n as f64 * (n as f64 - 1.0);
    Ok(InitializationPlan {
        r_max,
        r,
        alpha_interval: (1.0 / (10.0 * tb.value), 1.0 / (9.0 * tb.value)),
        sweep_interval: (1.0 / (50.0 * pairs * vol_p_r_csigma), 1.0 / (5.0 * pairs * vol_p_r_csigma)),
        pi0: geom.lambda_sigma / (geom.lambda_sigma_upper * p_csigma * n as f64),
        epsilon_appr: vol_p_r_csigma / 25.0,
        tau_bar: tb.value,
        warnings,
    })
}
