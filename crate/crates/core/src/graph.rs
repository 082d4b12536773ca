//! Exact r-neighborhood graphs and their cut functionals.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};
use crate::synthetic::PointCloud;

/// Undirected, unweighted graph in compressed sparse row layout.
///
/// Neighbor lists are sorted ascending and never contain the vertex itself.
/// `origin[u]` maps each vertex back to a point index (or to a vertex of the
/// parent graph, for induced subgraphs).
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodGraph {
    radius: f64,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
    origin: Vec<usize>,
}

impl NeighborhoodGraph {
    /// Builds a graph on `n` vertices from an undirected edge list.
    /// Duplicate edges are merged; self-loops are rejected.
    pub fn from_edges(n: usize, radius: f64, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(radius, lists, (0..n).collect()))
    }

    fn from_lists(radius: f64, mut lists: Vec<Vec<usize>>, origin: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut adjacency = Vec::new();
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
            adjacency.extend_from_slice(l);
            offsets.push(adjacency.len());
        }
        Self { radius, offsets, adjacency, origin }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|u| self.degree(u)).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.len() / 2
    }

    /// vol(V) = 2m.
    pub fn total_volume(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn origin(&self, u: usize) -> usize {
        self.origin[u]
    }

    pub fn origins(&self) -> &[usize] {
        &self.origin
    }

    /// Edges (u, v) with u < v in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    /// Writes the `n r` header followed by one `u v` line per edge (u < v).
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n(), self.radius)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))??;
        let mut it = header.split_whitespace();
        let n: usize = parse_field(it.next(), "vertex count")?;
        let radius: f64 = parse_field(it.next(), "radius")?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: usize = parse_field(it.next(), "edge endpoint")?;
            let v: usize = parse_field(it.next(), "edge endpoint")?;
            edges.push((u, v));
        }
        Self::from_edges(n, radius, &edges)
    }
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse(format!("missing or malformed {what}")))
}

/// A sorted set of vertices with a membership bitmap over `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl VertexSet {
    /// Set over `0..universe` holding the given indices (duplicates are merged).
    pub fn new(universe: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; universe];
        for u in items {
            if u >= universe {
                return Err(invalid(format!("vertex {u} outside 0..{universe}")));
            }
            mask[u] = true;
        }
        Ok(Self::from_mask(mask))
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let members = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        Self { members, mask }
    }

    pub fn empty(universe: usize) -> Self {
        Self { members: Vec::new(), mask: vec![false; universe] }
    }

    pub fn full(universe: usize) -> Self {
        Self { members: (0..universe).collect(), mask: vec![true; universe] }
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.mask.get(u).copied().unwrap_or(false)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.mask.iter().map(|b| !b).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect())
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        Self::from_mask(self.mask.iter().zip(&other.mask).map(|(a, b)| a != b).collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().all(|&u| other.contains(u))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.iter().all(|&u| !other.contains(u))
    }
}

fn check_universe(g: &NeighborhoodGraph, s: &VertexSet) {
    assert_eq!(s.universe(), g.n(), "vertex set universe does not match the graph");
}

/// Number of edges between S and its complement.
pub fn cut(g: &NeighborhoodGraph, s: &VertexSet) -> usize {
    check_universe(g, s);
    s.iter().map(|u| g.neighbors(u).iter().filter(|&&v| !s.contains(v)).count()).sum()
}

/// Sum of degrees over S.
pub fn vol(g: &NeighborhoodGraph, s: &VertexSet) -> usize {
    check_universe(g, s);
    s.iter().map(|u| g.degree(u)).sum()
}

/// Normalized cut cut(S)/min(vol(S), vol(Sᶜ)); +∞ when the smaller volume is 0.
pub fn normalized_cut(g: &NeighborhoodGraph, s: &VertexSet) -> f64 {
    let c = cut(g, s);
    let v = vol(g, s);
    phi_from_counts(c, v, g.total_volume())
}

pub(crate) fn phi_from_counts(cut: usize, vol_s: usize, vol_total: usize) -> f64 {
    let denom = vol_s.min(vol_total - vol_s);
    if denom == 0 {
        f64::INFINITY
    } else {
        cut as f64 / denom as f64
    }
}

/// Subgraph induced by S, reindexed in increasing order of S.
/// `origin` of the result refers to vertices of `g`.
pub fn induced_subgraph(g: &NeighborhoodGraph, s: &VertexSet) -> Result<NeighborhoodGraph> {
    check_universe(g, s);
    if s.is_empty() {
        return Err(invalid("induced subgraph of an empty vertex set"));
    }
    let mut index = vec![usize::MAX; g.n()];
    for (i, u) in s.iter().enumerate() {
        index[u] = i;
    }
    let lists = s
        .iter()
        .map(|u| g.neighbors(u).iter().filter(|&&v| s.contains(v)).map(|&v| index[v]).collect())
        .collect();
    Ok(NeighborhoodGraph::from_lists(g.radius, lists, s.as_slice().to_vec()))
}

/// Connected components, ordered by their smallest vertex.
pub fn connected_components(g: &NeighborhoodGraph) -> Vec<VertexSet> {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    let mut masks = vec![vec![false; n]; count];
    for (u, &c) in comp.iter().enumerate() {
        masks[c][u] = true;
    }
    masks.into_iter().map(VertexSet::from_mask).collect()
}

pub fn is_connected(g: &NeighborhoodGraph) -> bool {
    g.n() <= 1 || connected_components(g).len() == 1
}

fn check_points(points: &PointCloud) -> Result<()> {
    if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact r-neighborhood graph: u ~ v iff ‖x_u − x_v‖ ≤ r (squared distances are
/// compared with r², so points at distance exactly r are joined).
///
/// Uses a uniform grid with cells slightly larger than r for d ≤ 3 and a
/// pairwise scan otherwise.
pub fn build_graph(points: &PointCloud, r: f64) -> Result<NeighborhoodGraph> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive and finite, got {r}")));
    }
    if points.is_empty() {
        return Err(invalid("cannot build a graph on zero points"));
    }
    check_points(points)?;
    let lists = if points.dim() <= 3 { grid_neighbors(points, r) } else { brute_neighbors(points, r) };
    Ok(NeighborhoodGraph::from_lists(r, lists, (0..points.len()).collect()))
}

/// O(n²) reference construction.
pub fn build_graph_brute_force(points: &PointCloud, r: f64) -> Result<NeighborhoodGraph> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive and finite, got {r}")));
    }
    check_points(points)?;
    Ok(NeighborhoodGraph::from_lists(r, brute_neighbors(points, r), (0..points.len()).collect()))
}

fn brute_neighbors(points: &PointCloud, r: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let r2 = r * r;
    let mut lists = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dist2(points.point(i), points.point(j)) <= r2 {
                lists[i].push(j);
                lists[j].push(i);
            }
        }
    }
    lists
}

fn grid_neighbors(points: &PointCloud, r: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let d = points.dim();
    let r2 = r * r;
    let side = r * (1.0 + 1e-9);
    let mut lo = [0.0f64; 3];
    for j in 0..d {
        lo[j] = points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
    }
    let key = |p: &[f64]| {
        let mut k = [0i64; 3];
        for j in 0..d {
            k[j] = ((p[j] - lo[j]) / side).floor() as i64;
        }
        k
    };
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    let offsets: Vec<[i64; 3]> = {
        let range = |j: usize| if j < d { -1..=1 } else { 0..=0 };
        let mut v = Vec::new();
        for a in range(0) {
            for b in range(1) {
                for c in range(2) {
                    v.push([a, b, c]);
                }
            }
        }
        v
    };
    let mut lists = vec![Vec::new(); n];
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        for off in &offsets {
            let nk = [k[0] + off[0], k[1] + off[1], k[2] + off[2]];
            if let Some(bucket) = cells.get(&nk) {
                for &j in bucket {
                    if j > i && dist2(p, points.point(j)) <= r2 {
                        lists[i].push(j);
                        lists[j].push(i);
                    }
                }
            }
        }
    }
    lists
}

/// Smallest r for which the r-neighborhood graph of `points` is connected: the
/// longest edge of a Euclidean minimum spanning tree (Prim, O(n²)).
///
/// The returned value r satisfies r·r ≥ the squared MST edge length exactly,
/// so [`build_graph`] at this radius keeps every MST edge.
pub fn smallest_connecting_radius(points: &PointCloud) -> Result<f64> {
    check_points(points)?;
    let n = points.len();
    if n <= 1 {
        return Ok(0.0);
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut max_edge2: f64 = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut bu = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < bu {
                bu = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        max_edge2 = max_edge2.max(bu);
        let pu = points.point(u);
        for v in 0..n {
            if !in_tree[v] {
                let d2 = dist2(pu, points.point(v));
                if d2 < best[v] {
                    best[v] = d2;
                }
            }
        }
    }
    Ok(sqrt_covering(max_edge2))
}

/// Smallest double s with s·s ≥ x (for x ≥ 0).
pub(crate) fn sqrt_covering(x: f64) -> f64 {
    let mut s = x.sqrt();
    while s * s < x {
        s = s.next_up();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> NeighborhoodGraph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        NeighborhoodGraph::from_edges(n, 1.0, &edges).unwrap()
    }

    fn p3() -> NeighborhoodGraph {
        NeighborhoodGraph::from_edges(3, 1.0, &[(0, 1), (1, 2)]).unwrap()
    }

    fn set(n: usize, items: &[usize]) -> VertexSet {
        VertexSet::new(n, items.iter().copied()).unwrap()
    }

    #[test]
    fn inclusive_boundary() {
        let pts = PointCloud::from_rows(&[[0.0, 0.0], [0.25, 0.0]]).unwrap();
        let g = build_graph(&pts, 0.25).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn collinear_path() {
        let r = 1.0;
        let pts = PointCloud::from_rows(&[[0.0], [0.6 * r], [1.2 * r]]).unwrap();
        let g = build_graph(&pts, r).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn single_point() {
        let g = build_graph(&PointCloud::from_rows(&[[1.0, 2.0]]).unwrap(), 0.1).unwrap();
        assert_eq!((g.n(), g.degree(0)), (1, 0));
    }

    #[test]
    fn rejects_non_finite() {
        let pts = PointCloud::from_rows(&[[0.0, f64::NAN]]).unwrap();
        assert!(matches!(build_graph(&pts, 1.0), Err(Error::NonFinite(0))));
    }

    #[test]
    fn cut_vol_examples() {
        let g = p3();
        assert_eq!(cut(&g, &g.full_set()), 0);
        assert_eq!(cut(&g, &set(3, &[0])), 1);
        assert_eq!(vol(&g, &set(3, &[0, 1])), 3);
        assert_eq!(vol(&g, &VertexSet::empty(3)), 0);
        let k4 = k(4);
        assert_eq!(cut(&k4, &set(4, &[0, 2])), 4);
        assert_eq!(vol(&k4, &k4.full_set()), 12);
    }

    #[test]
    fn normalized_cut_examples() {
        let k4 = k(4);
        assert_eq!(normalized_cut(&k4, &set(4, &[1, 3])), 4.0 / 6.0);
        assert_eq!(normalized_cut(&k4, &VertexSet::empty(4)), f64::INFINITY);
        assert_eq!(normalized_cut(&p3(), &set(3, &[0])), 1.0);
    }

    #[test]
    fn induced_examples() {
        let g = p3();
        let sub = induced_subgraph(&g, &set(3, &[0, 2])).unwrap();
        assert_eq!((sub.n(), sub.num_edges()), (2, 0));
        assert_eq!(sub.origins(), &[0, 2]);
        let k3 = induced_subgraph(&k(4), &set(4, &[0, 1, 3])).unwrap();
        assert_eq!(k3, k(3).with_origin(vec![0, 1, 3]));
        assert!(induced_subgraph(&g, &VertexSet::empty(3)).is_err());
        assert_eq!(induced_subgraph(&g, &g.full_set()).unwrap(), g);
    }

    #[test]
    fn components_examples() {
        assert_eq!(connected_components(&k(4)).len(), 1);
        let pts = PointCloud::from_rows(&[[0.0, 0.0], [3.0, 0.0]]).unwrap();
        assert_eq!(connected_components(&build_graph(&pts, 1.0).unwrap()).len(), 2);
        let g = induced_subgraph(&p3(), &set(3, &[0, 2])).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].as_slice(), &[0]);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = k(4);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("4 1\n0 1\n"));
        assert_eq!(NeighborhoodGraph::read_edge_list(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn covering_sqrt() {
        for x in [2.0, 0.3, 1e-7, 12345.678] {
            let s = sqrt_covering(x);
            assert!(s * s >= x);
            assert!(s.next_down() * s.next_down() < x);
        }
    }

    impl NeighborhoodGraph {
        fn with_origin(mut self, origin: Vec<usize>) -> Self {
            self.origin = origin;
            self
        }
    }
}
