//! Random-walk diagnostics: stationary distribution, mixing time, local
//! spread, conductance and the Lovász–Simonovits curve.

use std::io::Write;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{connected_components, normalized_cut, phi_from_counts, NeighborhoodGraph, VertexSet};
use crate::ppr::lazy_walk_into;

fn require_connected(g: &NeighborhoodGraph) -> Result<()> {
    if g.n() > 1 {
        let comps = connected_components(g).len();
        if comps > 1 {
            return Err(Error::Disconnected { components: comps });
        }
    }
    Ok(())
}

/// π(u) = deg(u)/vol(V).
pub fn stationary_distribution(g: &NeighborhoodGraph) -> Result<Vec<f64>> {
    if g.num_edges() == 0 {
        return Err(Error::Edgeless);
    }
    require_connected(g)?;
    let vol = g.total_volume() as f64;
    Ok((0..g.n()).map(|u| g.degree(u) as f64 / vol).collect())
}

/// How τ∞ was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MixingMethod {
    /// Propagation for small graphs, spectral evaluation otherwise.
    #[default]
    Auto,
    /// Literal evaluation: every start distribution is stepped through the walk.
    Propagation,
    /// Exact evaluation from the eigendecomposition of the symmetrized walk,
    /// with a rigorous truncation bound and a binary search over t.
    Spectral,
}

/// Largest graph for which `Auto` uses propagation.
pub const PROPAGATION_MAX_N: usize = 200;

/// Result of a mixing-time computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    /// Smallest t with max_{u,v} (π(u) − q_v^t(u))/π(u) ≤ 1/4; `None` if not reached by `t_max`.
    pub tau_inf: Option<u64>,
    pub t_max: u64,
    /// (start v, target u) attaining the maximum at the reported step.
    pub worst_pair: Option<(usize, usize)>,
    /// Relative uniform distance at `tau_inf`, or at `t_max` when not mixed.
    pub distance: f64,
    pub method: MixingMethod,
    pub n: usize,
}

impl MixingReport {
    pub fn mixed(&self) -> bool {
        self.tau_inf.is_some()
    }
}

/// Default step cap: 50·n.
pub fn default_t_max(g: &NeighborhoodGraph) -> u64 {
    50 * g.n().max(1) as u64
}

/// Mixing time τ∞ with the default method.
pub fn mixing_time_inf(g: &NeighborhoodGraph, t_max: u64) -> Result<MixingReport> {
    mixing_time_inf_with(g, t_max, MixingMethod::Auto)
}

pub fn mixing_time_inf_with(g: &NeighborhoodGraph, t_max: u64, method: MixingMethod) -> Result<MixingReport> {
    let n = g.n();
    if n == 0 {
        return Err(invalid("mixing time of an empty graph"));
    }
    require_connected(g)?;
    if n == 1 {
        return Ok(MixingReport {
            tau_inf: Some(0),
            t_max,
            worst_pair: Some((0, 0)),
            distance: 0.0,
            method: MixingMethod::Propagation,
            n,
        });
    }
    let method = match method {
        MixingMethod::Auto if n <= PROPAGATION_MAX_N => MixingMethod::Propagation,
        MixingMethod::Auto => MixingMethod::Spectral,
        m => m,
    };
    match method {
        MixingMethod::Spectral => spectral_mixing(g, t_max),
        _ => Ok(propagation_mixing(g, t_max)),
    }
}

/// Worst one-sided relative deviation of a single row: max_u 1 − q(u)/π(u).
/// Mixing at level 1/4 is tested as 4·q(u)·vol ≥ 3·deg(u), which is exact for
/// dyadic probabilities.
fn row_extreme(q: &[f64], deg: &[f64], vol: f64) -> (f64, usize, bool) {
    let mut worst = f64::NEG_INFINITY;
    let mut arg = 0;
    let mut ok = true;
    for u in 0..q.len() {
        let ratio = q[u] * vol / deg[u];
        let dist = 1.0 - ratio;
        if dist > worst {
            worst = dist;
            arg = u;
        }
        if 4.0 * q[u] * vol < 3.0 * deg[u] {
            ok = false;
        }
    }
    (worst, arg, ok)
}

fn propagation_mixing(g: &NeighborhoodGraph, t_max: u64) -> MixingReport {
    let n = g.n();
    let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let vol = g.total_volume() as f64;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let mut e = vec![0.0; n];
            e[v] = 1.0;
            e
        })
        .collect();
    let mut scratch: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    let mut t = 0u64;
    loop {
        let stats: Vec<(f64, usize, bool)> = rows.par_iter().map(|q| row_extreme(q, &deg, vol)).collect();
        let mixed = stats.iter().all(|s| s.2);
        let (v, &(dist, u, _)) = stats
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        if mixed || t >= t_max {
            return MixingReport {
                tau_inf: mixed.then_some(t),
                t_max,
                worst_pair: Some((v, u)),
                distance: dist,
                method: MixingMethod::Propagation,
                n,
            };
        }
        rows.par_iter().zip(scratch.par_iter_mut()).for_each(|(q, out)| lazy_walk_into(g, q, out));
        std::mem::swap(&mut rows, &mut scratch);
        t += 1;
    }
}

/// Eigendecomposition of S = ½(I + D^{-1/2} A D^{-1/2}) = Σ μ_k φ_k φ_kᵀ,
/// expressed through ψ_k = sqrt(vol/d)·φ_k so that
/// q_v^t(u)/π(u) = Σ_k μ_k^t ψ_k(v) ψ_k(u).
struct WalkSpectrum {
    /// Eigenvalues in decreasing order.
    mu: Vec<f64>,
    /// psi[k][u].
    psi: Vec<Vec<f64>>,
    /// vol / d_min, bounding Σ_k |ψ_k(v) ψ_k(u)|.
    spread: f64,
}

impl WalkSpectrum {
    fn new(g: &NeighborhoodGraph) -> Result<Self> {
        let n = g.n();
        let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
        let vol: f64 = deg.iter().sum();
        let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut s = Mat::<f64>::zeros(n, n);
        for u in 0..n {
            s[(u, u)] = 0.5;
            for &w in g.neighbors(u) {
                s[(u, w)] = 0.5 * inv_sqrt[u] * inv_sqrt[w];
            }
        }
        let eig = s
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
        let vals = eig.S().column_vector();
        let vecs = eig.U();
        // faer returns ascending eigenvalues.
        let mut mu = Vec::with_capacity(n);
        let mut psi = Vec::with_capacity(n);
        for k in (0..n).rev() {
            mu.push(vals[k].clamp(0.0, 1.0));
            psi.push((0..n).map(|u| vecs[(u, k)] * (vol / deg[u]).sqrt()).collect::<Vec<f64>>());
        }
        // The top eigenvector is sqrt(d/vol) up to sign; pin it exactly.
        mu[0] = 1.0;
        psi[0] = vec![1.0; n];
        let dmin = deg.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self { mu, psi, spread: vol / dmin })
    }

    /// Smallest K such that the discarded modes contribute at most `tail` to any entry at step t.
    fn modes_for(&self, t: u64, tail: f64) -> (usize, f64) {
        let n = self.mu.len();
        for k in 1..n {
            let bound = self.mu[k].powf(t as f64) * self.spread;
            if bound <= tail {
                return (k, bound);
            }
        }
        (n, 0.0)
    }

    /// min over (v, u) of M_t(v, u) from the first K modes, with its location.
    fn min_entry(&self, t: u64, k: usize) -> (f64, usize, usize) {
        let n = self.psi[0].len();
        let weights: Vec<f64> = (0..k).map(|j| self.mu[j].powf(t as f64)).collect();
        let rows: Vec<(f64, usize, usize)> = (0..n)
            .into_par_iter()
            .map(|v| {
                let coef: Vec<f64> = (0..k).map(|j| weights[j] * self.psi[j][v]).collect();
                let mut best = (f64::INFINITY, v, 0);
                for u in 0..n {
                    let mut m = 0.0;
                    for j in 0..k {
                        m += coef[j] * self.psi[j][u];
                    }
                    if m < best.0 {
                        best = (m, v, u);
                    }
                }
                best
            })
            .collect();
        rows.into_iter().fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Exact row v of M_t from every mode: (min over u, argmin).
    fn row_min(&self, t: u64, v: usize) -> (f64, usize) {
        let n = self.psi[0].len();
        let coef: Vec<f64> = (0..self.mu.len()).map(|j| self.mu[j].powf(t as f64) * self.psi[j][v]).collect();
        let mut best = (f64::INFINITY, 0);
        for u in 0..n {
            let m: f64 = coef.iter().zip(&self.psi).map(|(c, p)| c * p[u]).sum();
            if m < best.0 {
                best = (m, u);
            }
        }
        best
    }

    /// Whether the walk is mixed at step t, with the attained minimum ratio.
    ///
    /// Rows that were worst at earlier steps are checked exactly first; they
    /// usually certify "not mixed" without the full all-pairs evaluation,
    /// which is expensive for small t where few modes can be truncated.
    fn mixed_at(&self, t: u64, witnesses: &mut Vec<usize>) -> (bool, f64, usize, usize) {
        for &v in witnesses.iter() {
            let (m, u) = self.row_min(t, v);
            if m < 0.75 {
                return (false, m, v, u);
            }
        }
        let mut tail = 1e-12;
        loop {
            let (k, bound) = self.modes_for(t, tail);
            let (m, v, u) = self.min_entry(t, k);
            let decided = if m - bound >= 0.75 {
                Some(true)
            } else if m + bound < 0.75 || k == self.mu.len() {
                Some(m >= 0.75)
            } else {
                None
            };
            if let Some(ok) = decided {
                if !witnesses.contains(&v) && witnesses.len() < 8 {
                    witnesses.push(v);
                }
                return (ok, m, v, u);
            }
            tail *= 1e-3;
        }
    }
}

fn spectral_mixing(g: &NeighborhoodGraph, t_max: u64) -> Result<MixingReport> {
    let n = g.n();
    let spec = WalkSpectrum::new(g)?;
    let mu2 = spec.mu[1];
    let report = |tau: Option<u64>, (m, v, u): (f64, usize, usize)| MixingReport {
        tau_inf: tau,
        t_max,
        worst_pair: Some((v, u)),
        distance: 1.0 - m,
        method: MixingMethod::Spectral,
        n,
    };
    // Upper bracket: 1 − M_t(v,u) ≤ μ₂^t·vol/d_min ≤ 1/4.
    let t_hi = if mu2 <= 0.0 {
        1
    } else if mu2 >= 1.0 {
        u64::MAX
    } else {
        ((4.0 * spec.spread).ln() / -mu2.ln()).ceil().max(1.0) as u64
    };
    let mut hi = t_hi.min(t_max);
    let mut witnesses = Vec::new();
    let (ok, m, v, u) = spec.mixed_at(hi, &mut witnesses);
    if !ok {
        return Ok(report(None, (m, v, u)));
    }
    let mut at_hi = (m, v, u);
    // With n ≥ 2, q_v^0 vanishes off v, so t = 0 is never mixed. The row
    // minimum of q_v^t/π is nondecreasing in t, so mixing is monotone.
    let mut lo = 0u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let (ok, m, v, u) = spec.mixed_at(mid, &mut witnesses);
        if ok {
            hi = mid;
            at_hi = (m, v, u);
        } else {
            lo = mid;
        }
    }
    Ok(report(Some(hi), at_hi))
}

/// s(G) = (9/10)·min deg·min π.
pub fn local_spread(g: &NeighborhoodGraph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::Edgeless);
    }
    let dmin = g.degrees().into_iter().min().unwrap_or(0) as f64;
    Ok(0.9 * dmin * dmin / g.total_volume() as f64)
}

/// The minimum normalized cut over a family of sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ConductanceScan {
    pub phi: f64,
    pub argmin: usize,
    pub set: VertexSet,
}

/// Minimum of Φ over `candidates` (first index on ties).
pub fn conductance_scan(g: &NeighborhoodGraph, candidates: &[VertexSet]) -> Result<ConductanceScan> {
    if candidates.is_empty() {
        return Err(invalid("conductance scan needs at least one candidate set"));
    }
    let mut best = (f64::INFINITY, 0);
    for (i, s) in candidates.iter().enumerate() {
        let phi = normalized_cut(g, s);
        if i == 0 || phi < best.0 {
            best = (phi, i);
        }
    }
    Ok(ConductanceScan { phi: best.0, argmin: best.1, set: candidates[best.1].clone() })
}

/// Largest graph accepted by [`exhaustive_conductance`].
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Φ(G) = min over all nonempty proper subsets, by enumerating 2^n masks.
pub fn exhaustive_conductance(g: &NeighborhoodGraph) -> Result<ConductanceScan> {
    let n = g.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(invalid(format!("exhaustive conductance is limited to {EXHAUSTIVE_MAX_N} vertices")));
    }
    let adj: Vec<u32> = (0..n).map(|u| g.neighbors(u).iter().fold(0u32, |m, &v| m | (1 << v))).collect();
    let deg: Vec<usize> = g.degrees();
    let total = g.total_volume();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1u32 << n) {
        let (mut cut, mut vol) = (0usize, 0usize);
        let mut rest = mask;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            vol += deg[u];
            cut += (adj[u] & !mask).count_ones() as usize;
        }
        let phi = phi_from_counts(cut, vol, total);
        if phi < best.0 || (best.1 == 0 && mask == 1) {
            best = (phi, mask);
        }
    }
    let set = VertexSet::new(n, (0..n).filter(|&u| best.1 >> u & 1 == 1))?;
    Ok(ConductanceScan { phi: best.0, argmin: best.1 as usize, set })
}

/// Lovász–Simonovits curve of q = start·W^t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsCurve {
    /// Cumulative volumes of the sorted prefixes, from 0 to 2m.
    pub knots_x: Vec<f64>,
    /// h at each knot: Σ over the prefix of (q(u) − π(u)).
    pub knots_y: Vec<f64>,
    pub t: u64,
    pub start: String,
}

impl LsCurve {
    pub fn max_abs(&self) -> f64 {
        self.knots_y.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    /// Slopes of consecutive segments.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots_x
            .windows(2)
            .zip(self.knots_y.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Evaluates h by linear interpolation at volume `k`.
    pub fn eval(&self, k: f64) -> f64 {
        let i = self.knots_x.partition_point(|&x| x <= k);
        if i == 0 {
            return self.knots_y[0];
        }
        if i >= self.knots_x.len() {
            return *self.knots_y.last().expect("nonempty");
        }
        let (x0, x1, y0, y1) = (self.knots_x[i - 1], self.knots_x[i], self.knots_y[i - 1], self.knots_y[i]);
        y0 + (y1 - y0) * (k - x0) / (x1 - x0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "h"])?;
        for (x, y) in self.knots_x.iter().zip(&self.knots_y) {
            wr.write_record([x.to_string(), y.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Lovász–Simonovits curve after t steps from `start`. Vertices are sorted by
/// q(u)/π(u) in decreasing order, ties by index.
pub fn ls_curve(g: &NeighborhoodGraph, start: &[f64], t: u64, label: &str) -> Result<LsCurve> {
    let pi = stationary_distribution(g)?;
    if start.len() != g.n() {
        return Err(invalid("start distribution length does not match the graph"));
    }
    let mut q = start.to_vec();
    let mut next = vec![0.0; g.n()];
    for _ in 0..t {
        lazy_walk_into(g, &q, &mut next);
        std::mem::swap(&mut q, &mut next);
    }
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| (q[b] / pi[b]).total_cmp(&(q[a] / pi[a])).then(a.cmp(&b)));
    let mut xs = Vec::with_capacity(g.n() + 1);
    let mut ys = Vec::with_capacity(g.n() + 1);
    xs.push(0.0);
    ys.push(0.0);
    let (mut vol, mut h) = (0usize, 0.0);
    for &u in &order {
        vol += g.degree(u);
        h += q[u] - pi[u];
        xs.push(vol as f64);
        ys.push(h);
    }
    Ok(LsCurve { knots_x: xs, knots_y: ys, t, start: label.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> NeighborhoodGraph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        NeighborhoodGraph::from_edges(n, 1.0, &edges).unwrap()
    }

    fn path(n: usize) -> NeighborhoodGraph {
        let edges: Vec<_> = (0..n - 1).map(|u| (u, u + 1)).collect();
        NeighborhoodGraph::from_edges(n, 1.0, &edges).unwrap()
    }

    fn two_triangles() -> NeighborhoodGraph {
        NeighborhoodGraph::from_edges(6, 1.0, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap()
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(stationary_distribution(&complete(2)).unwrap(), vec![0.5, 0.5]);
        assert_eq!(stationary_distribution(&path(3)).unwrap(), vec![0.25, 0.5, 0.25]);
        assert!(stationary_distribution(&complete(5)).unwrap().iter().all(|&p| (p - 0.2).abs() < 1e-15));
        let split = NeighborhoodGraph::from_edges(4, 1.0, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(stationary_distribution(&split), Err(Error::Disconnected { .. })));
        assert!(matches!(stationary_distribution(&NeighborhoodGraph::from_edges(2, 1.0, &[]).unwrap()), Err(Error::Edgeless)));
    }

    #[test]
    fn mixing_small_cases() {
        let single = NeighborhoodGraph::from_edges(1, 1.0, &[]).unwrap();
        assert_eq!(mixing_time_inf(&single, 10).unwrap().tau_inf, Some(0));
        assert_eq!(mixing_time_inf(&complete(2), 10).unwrap().tau_inf, Some(1));
        let capped = mixing_time_inf(&path(30), 5).unwrap();
        assert_eq!(capped.tau_inf, None);
        assert!(capped.distance > 0.25);
    }

    #[test]
    fn spectral_agrees_with_propagation() {
        for g in [path(12), two_triangles(), complete(7), path(40)] {
            let a = mixing_time_inf_with(&g, 100_000, MixingMethod::Propagation).unwrap();
            let b = mixing_time_inf_with(&g, 100_000, MixingMethod::Spectral).unwrap();
            assert_eq!(a.tau_inf, b.tau_inf, "n={}", g.n());
        }
        let capped = mixing_time_inf_with(&path(40), 10, MixingMethod::Spectral).unwrap();
        assert_eq!(capped.tau_inf, None);
    }

    #[test]
    fn local_spread_examples() {
        assert!((local_spread(&complete(2)).unwrap() - 0.45).abs() < 1e-15);
        assert!((local_spread(&complete(4)).unwrap() - 0.675).abs() < 1e-15);
        let star = NeighborhoodGraph::from_edges(4, 1.0, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!((local_spread(&star).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn conductance_examples() {
        assert!((exhaustive_conductance(&complete(4)).unwrap().phi - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(exhaustive_conductance(&two_triangles()).unwrap().phi, 1.0 / 7.0);
        let g = complete(4);
        let scan = conductance_scan(&g, &[g.full_set()]).unwrap();
        assert_eq!(scan.phi, f64::INFINITY);
    }

    #[test]
    fn ls_curve_examples() {
        let g = two_triangles();
        let pi = stationary_distribution(&g).unwrap();
        let flat = ls_curve(&g, &pi, 3, "pi").unwrap();
        assert!(flat.max_abs() < 1e-15);
        let mut e = vec![0.0; 6];
        e[2] = 1.0;
        let c = ls_curve(&g, &e, 0, "e2").unwrap();
        assert_eq!(c.knots_x[1], 3.0);
        assert!((c.knots_y[1] - (1.0 - pi[2])).abs() < 1e-15);
        assert!((c.eval(3.0) - (1.0 - pi[2])).abs() < 1e-15);
    }
}
