//! Synthetic point clouds and their analytic densities.
//!
//! Three families are supported: a mixture of three adjacent rectangles (the
//! hard case for PPR), a thin "ribbon" with a decaying collar, and the noisy
//! two-moons model. A uniform box is included as a calibration model.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{adaptive_simpson, box_parallel_surface, dist_to_box, elementary_symmetric};
use crate::rng;

/// An n×d point matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(invalid("rows have inconsistent dimensions"));
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Sub-cloud of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords }
    }

    pub fn centroid(&self, rows: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for &i in rows {
            for (a, b) in c.iter_mut().zip(self.point(i)) {
                *a += b;
            }
        }
        let k = rows.len().max(1) as f64;
        c.iter_mut().for_each(|a| *a /= k);
        c
    }

    /// Index of the row closest to `target` among `rows` (ties to the smaller index).
    pub fn nearest(&self, rows: &[usize], target: &[f64]) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &i in rows {
            let d2: f64 = self.point(i).iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(bd, bi)| d2 < bd || (d2 == bd && i < bi)) {
                best = Some((d2, i));
            }
        }
        best.map(|(_, i)| i)
    }
}

/// Ground-truth region of a point relative to the model's target cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Inside the target cluster C.
    Core,
    /// In the σ-expansion of C but not in C.
    Expansion,
    /// Inside another density cluster C′.
    Other,
    /// Anywhere else.
    Background,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Core => "core",
            Region::Expansion => "expansion",
            Region::Other => "other",
            Region::Background => "background",
        }
    }

    /// Integer code used by compact exports: core 0, expansion 1, other 2, background 3.
    pub fn code(&self) -> u8 {
        match self {
            Region::Core => 0,
            Region::Expansion => 1,
            Region::Other => 2,
            Region::Background => 3,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "core" | "0" => Ok(Region::Core),
            "expansion" | "1" => Ok(Region::Expansion),
            "other" | "2" => Ok(Region::Other),
            "background" | "3" => Ok(Region::Background),
            other => Err(Error::Parse(format!("unknown region label {other:?}"))),
        }
    }

    /// Core or expansion, i.e. inside Cσ.
    pub fn in_expansion(&self) -> bool {
        matches!(self, Region::Core | Region::Expansion)
    }
}

/// Three σ×ρ rectangles side by side; the outer two carry mass (1−ε)/2 each
/// and the middle one ε/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RectMixtureParams {
    pub epsilon: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl Default for RectMixtureParams {
    fn default() -> Self {
        Self { epsilon: 0.3, sigma: 0.1, rho: 1.0 }
    }
}

impl RectMixtureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.sigma > 0.0 && self.sigma < self.rho && self.rho.is_finite()) {
            return Err(invalid(format!(
                "rectangle sides need 0 < sigma < rho, got sigma={} rho={}",
                self.sigma, self.rho
            )));
        }
        Ok(())
    }

    /// Corners of rectangle `k`: 0 is the middle one, 1 the left, 2 the right.
    pub fn rect(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let shift = match k {
            0 => 0.0,
            1 => -self.sigma,
            _ => self.sigma,
        };
        let (hs, hr) = (self.sigma / 2.0, self.rho / 2.0);
        ([shift - hs, -hr], [shift + hs, hr])
    }

    /// Unnormalized component weights (ε/2, (1−ε)/2, (1−ε)/2), indexed like [`Self::rect`].
    pub fn raw_weights(&self) -> [f64; 3] {
        let e = self.epsilon;
        [e / 2.0, (1.0 - e) / 2.0, (1.0 - e) / 2.0]
    }

    /// Sampling probabilities: the raw weights sum to 1 − ε/2 and are rescaled.
    pub fn weights(&self) -> [f64; 3] {
        let w = self.raw_weights();
        let total: f64 = w.iter().sum();
        [w[0] / total, w[1] / total, w[2] / total]
    }

    /// Rectangle containing `x`, preferring the outer rectangles on shared edges.
    pub fn component_of(&self, x: &[f64]) -> Option<usize> {
        [1usize, 2, 0].into_iter().find(|&k| {
            let (lo, hi) = self.rect(k);
            x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1]
        })
    }

    /// f(x) = (1/ρσ)·Σ_k w_k·1(x ∈ C⁽ᵏ⁾) with the raw weights.
    pub fn density(&self, x: &[f64]) -> f64 {
        match self.component_of(x) {
            Some(k) => self.raw_weights()[k] / (self.rho * self.sigma),
            None => 0.0,
        }
    }

    pub fn region(&self, x: &[f64], expansion: f64) -> Region {
        match self.component_of(x) {
            Some(1) => Region::Core,
            Some(2) => Region::Other,
            _ => {
                let (lo, hi) = self.rect(1);
                if dist_to_box(x, &lo, &hi) <= expansion {
                    Region::Expansion
                } else {
                    Region::Background
                }
            }
        }
    }
}

/// The ribbon density: constant λ on C = [0,σ]×[0,ρ]^{d−1}, linear decay on
/// the σ-collar and a γ-power decay on the next σ-collar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RibbonParams {
    pub sigma: f64,
    pub rho: f64,
    pub gamma: f64,
    pub d: usize,
}

impl Default for RibbonParams {
    fn default() -> Self {
        Self { sigma: 0.1, rho: 3.2, gamma: 1.0, d: 2 }
    }
}

impl RibbonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.rho > 0.0 && self.sigma.is_finite() && self.rho.is_finite()) {
            return Err(invalid("ribbon sigma and rho must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid(format!("gamma must lie in [0,1], got {}", self.gamma)));
        }
        if self.d < 2 {
            return Err(invalid("ribbon dimension must be at least 2"));
        }
        Ok(())
    }

    /// λ = (150/81)·σ^γ.
    pub fn lambda(&self) -> f64 {
        150.0 / 81.0 * self.sigma.powf(self.gamma)
    }

    /// η = (15/81)·σ^{γ−1}.
    pub fn eta(&self) -> f64 {
        15.0 / 81.0 * self.sigma.powf(self.gamma - 1.0)
    }

    pub fn core_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut hi = vec![self.rho; self.d];
        hi[0] = self.sigma;
        (vec![0.0; self.d], hi)
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        self.core_box().1
    }

    /// Density profile as a function of the distance to C.
    pub fn profile(&self, dist: f64) -> f64 {
        let (lam, eta, s) = (self.lambda(), self.eta(), self.sigma);
        if dist <= 0.0 {
            lam
        } else if dist <= s {
            lam - dist * eta
        } else if dist <= 2.0 * s {
            (lam - s * eta - (dist - s).powf(self.gamma)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let (lo, hi) = self.core_box();
        self.profile(dist_to_box(x, &lo, &hi))
    }

    pub fn region(&self, x: &[f64], expansion: f64) -> Region {
        let (lo, hi) = self.core_box();
        let dist = dist_to_box(x, &lo, &hi);
        if dist == 0.0 {
            Region::Core
        } else if dist <= expansion {
            Region::Expansion
        } else {
            Region::Background
        }
    }

    /// ∫ q over the core C.
    pub fn core_mass(&self) -> f64 {
        self.lambda() * elementary_symmetric(&self.side_lengths())[self.d]
    }

    /// ∫ q over the shell a < dist(x, C) ≤ b.
    pub fn shell_mass(&self, a: f64, b: f64) -> f64 {
        let sides = self.side_lengths();
        let g = |t: f64| self.profile(t) * box_parallel_surface(&sides, t);
        // Split at σ where the profile changes form.
        let s = self.sigma;
        let mut total = 0.0;
        for (lo, hi) in [(a, b.min(s)), (a.max(s), b.min(2.0 * s))] {
            if hi > lo {
                total += adaptive_simpson(&g, lo, hi, 1e-13);
            }
        }
        total
    }

    /// Normalizing constant ∫ q.
    pub fn total_mass(&self) -> f64 {
        self.core_mass() + self.shell_mass(0.0, 2.0 * self.sigma)
    }
}

/// Two interleaved half-circles plus isotropic Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoMoonsParams {
    pub mu1: [f64; 2],
    pub mu2: [f64; 2],
    pub moon_radius: f64,
    pub noise_scale: f64,
    pub ambient_dim: usize,
}

impl Default for TwoMoonsParams {
    fn default() -> Self {
        Self { mu1: [-0.5, 0.0], mu2: [0.0, 0.0], moon_radius: 0.5, noise_scale: 0.05, ambient_dim: 2 }
    }
}

impl TwoMoonsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.moon_radius > 0.0 && self.moon_radius.is_finite()) {
            return Err(invalid("moon_radius must be positive"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(invalid("noise_scale must be nonnegative"));
        }
        if self.ambient_dim < 2 {
            return Err(invalid("ambient_dim must be at least 2"));
        }
        if self.mu1.iter().chain(&self.mu2).any(|v| !v.is_finite()) {
            return Err(invalid("moon centers must be finite"));
        }
        Ok(())
    }

    /// Distance from `x` to the noiseless arc of moon `z` (1 is the upper moon around μ₁).
    pub fn arc_distance(&self, x: &[f64], z: u8) -> f64 {
        let (mu, sign) = if z == 1 { (self.mu1, 1.0) } else { (self.mu2, -1.0) };
        let vx = x[0] - mu[0];
        let vy = sign * (x[1] - mu[1]);
        let r = self.moon_radius;
        let planar = if vy >= 0.0 {
            ((vx * vx + vy * vy).sqrt() - r).abs()
        } else {
            let d1 = ((vx - r).powi(2) + vy * vy).sqrt();
            let d2 = ((vx + r).powi(2) + vy * vy).sqrt();
            d1.min(d2)
        };
        let extra: f64 = x[2..].iter().map(|v| v * v).sum();
        (planar * planar + extra).sqrt()
    }

    /// Core: within one noise scale of the first moon's arc; other: within one
    /// noise scale of the second arc; expansion: within `expansion` more of the first.
    pub fn region(&self, x: &[f64], expansion: f64) -> Region {
        let band = self.noise_scale;
        let d1 = self.arc_distance(x, 1);
        let d2 = self.arc_distance(x, 0);
        if d1 <= band && d1 <= d2 {
            Region::Core
        } else if d2 <= band {
            Region::Other
        } else if d1 <= band + expansion {
            Region::Expansion
        } else {
            Region::Background
        }
    }
}

/// Uniform distribution on an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformBoxParams {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Default for UniformBoxParams {
    fn default() -> Self {
        Self { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0] }
    }
}

impl UniformBoxParams {
    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(invalid("box bounds must be nonempty and of equal length"));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(invalid("box bounds need lower < upper in every coordinate"));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| v >= l && v <= u)
    }
}

/// One of the supported generative models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    RectMixture(RectMixtureParams),
    Ribbon(RibbonParams),
    TwoMoons(TwoMoonsParams),
    UniformBox(UniformBoxParams),
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::RectMixture(_) => "rect_mixture",
            Model::Ribbon(_) => "ribbon",
            Model::TwoMoons(_) => "two_moons",
            Model::UniformBox(_) => "uniform_box",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::RectMixture(p) => p.validate(),
            Model::Ribbon(p) => p.validate(),
            Model::TwoMoons(p) => p.validate(),
            Model::UniformBox(p) => p.validate(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::RectMixture(_) => 2,
            Model::Ribbon(p) => p.d,
            Model::TwoMoons(p) => p.ambient_dim,
            Model::UniformBox(p) => p.lower.len(),
        }
    }

    /// Expansion radius σ the model's labels are computed with.
    pub fn default_expansion(&self) -> f64 {
        match self {
            Model::RectMixture(p) => p.sigma,
            Model::Ribbon(p) => p.sigma,
            Model::TwoMoons(p) => p.noise_scale,
            Model::UniformBox(_) => 0.0,
        }
    }

    /// Normalizing constant turning [`density_at`] into a probability density.
    pub fn density_normalizer(&self) -> Result<f64> {
        match self {
            Model::RectMixture(p) => Ok(p.raw_weights().iter().sum()),
            Model::Ribbon(p) => Ok(p.total_mass()),
            Model::TwoMoons(_) => Err(Error::UnsupportedDensity("two_moons")),
            Model::UniformBox(_) => Ok(1.0),
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledPointCloud> {
        match self {
            Model::RectMixture(p) => sample_rect_mixture(p, n, seed),
            Model::Ribbon(p) => sample_ribbon(p, n, seed),
            Model::TwoMoons(p) => sample_two_moons(p, n, seed),
            Model::UniformBox(p) => sample_uniform_box(p, n, seed),
        }
    }
}

/// Sampled points with analytic ground-truth labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPointCloud {
    pub points: PointCloud,
    pub labels: Vec<Region>,
    /// Mixture component each point was drawn from (rectangle index, moon Z, or 0).
    pub components: Vec<u8>,
    pub model: Model,
}

impl LabeledPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices whose label satisfies `pred`.
    pub fn indices_where(&self, pred: impl Fn(Region) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| pred(self.labels[i])).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_points_csv(&self.points, Some(&self.labels), w)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("sample size n must be at least 1"));
    }
    Ok(())
}

/// n i.i.d. draws from the three-rectangle mixture.
pub fn sample_rect_mixture(params: &RectMixtureParams, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    params.validate()?;
    check_n(n)?;
    let mut rng = rng::from_seed(seed);
    let w = params.weights();
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = if u < w[1] {
            1
        } else if u < w[1] + w[2] {
            2
        } else {
            0
        };
        let (lo, hi) = params.rect(k);
        let x = [lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(), lo[1] + (hi[1] - lo[1]) * rng.random::<f64>()];
        coords.extend_from_slice(&x);
        labels.push(match k {
            1 => Region::Core,
            2 => Region::Other,
            _ => params.region(&x, params.sigma),
        });
        components.push(k as u8);
    }
    Ok(LabeledPointCloud {
        points: PointCloud::new(2, coords)?,
        labels,
        components,
        model: Model::RectMixture(params.clone()),
    })
}

/// Smallest acceptance rate tolerated by the ribbon rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// n i.i.d. draws from the ribbon density by rejection from the bounding box of
/// the support, which extends 2σ beyond C.
pub fn sample_ribbon(params: &RibbonParams, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    sample_ribbon_with_floor(params, n, seed, MIN_ACCEPTANCE)
}

pub fn sample_ribbon_with_floor(params: &RibbonParams, n: usize, seed: u64, floor: f64) -> Result<LabeledPointCloud> {
    params.validate()?;
    check_n(n)?;
    let d = params.d;
    let s = params.sigma;
    let (clo, chi) = params.core_box();
    let lo: Vec<f64> = clo.iter().map(|v| v - 2.0 * s).collect();
    let hi: Vec<f64> = chi.iter().map(|v| v + 2.0 * s).collect();
    let qmax = params.lambda();
    let mut rng = rng::from_seed(seed);
    let mut coords = Vec::with_capacity(d * n);
    let mut labels = Vec::with_capacity(n);
    let mut x = vec![0.0; d];
    let mut proposals = 0u64;
    let mut accepted = 0usize;
    while accepted < n {
        for j in 0..d {
            x[j] = lo[j] + (hi[j] - lo[j]) * rng.random::<f64>();
        }
        proposals += 1;
        let q = params.density(&x);
        if q > 0.0 && rng.random::<f64>() * qmax < q {
            coords.extend_from_slice(&x);
            labels.push(params.region(&x, s));
            accepted += 1;
        }
        if proposals >= 100_000 && proposals % 100_000 == 0 {
            let rate = accepted as f64 / proposals as f64;
            if rate < floor {
                return Err(Error::LowAcceptance { rate, floor });
            }
        }
    }
    Ok(LabeledPointCloud {
        points: PointCloud::new(d, coords)?,
        labels,
        components: vec![0; n],
        model: Model::Ribbon(params.clone()),
    })
}

/// n i.i.d. draws from the two-moons model.
pub fn sample_two_moons(params: &TwoMoonsParams, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    params.validate()?;
    check_n(n)?;
    let d = params.ambient_dim;
    let r = params.moon_radius;
    let mut rng = rng::from_seed(seed);
    let mut coords = Vec::with_capacity(d * n);
    let mut labels = Vec::with_capacity(n);
    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let z = rng.random_bool(0.5);
        let theta = PI * rng.random::<f64>();
        let (base, y) = if z {
            (params.mu1, r * theta.sin())
        } else {
            (params.mu2, -r * theta.sin())
        };
        for j in 0..d {
            let noise: f64 = StandardNormal.sample(&mut rng);
            let mean = match j {
                0 => base[0] + r * theta.cos(),
                1 => base[1] + y,
                _ => 0.0,
            };
            coords.push(mean + params.noise_scale * noise);
        }
        labels.push(if z { Region::Core } else { Region::Other });
        components.push(z as u8);
    }
    Ok(LabeledPointCloud {
        points: PointCloud::new(d, coords)?,
        labels,
        components,
        model: Model::TwoMoons(params.clone()),
    })
}

pub fn sample_uniform_box(params: &UniformBoxParams, n: usize, seed: u64) -> Result<LabeledPointCloud> {
    params.validate()?;
    check_n(n)?;
    let d = params.lower.len();
    let mut rng = rng::from_seed(seed);
    let mut coords = Vec::with_capacity(d * n);
    for _ in 0..n {
        for j in 0..d {
            coords.push(params.lower[j] + (params.upper[j] - params.lower[j]) * rng.random::<f64>());
        }
    }
    Ok(LabeledPointCloud {
        points: PointCloud::new(d, coords)?,
        labels: vec![Region::Core; n],
        components: vec![0; n],
        model: Model::UniformBox(params.clone()),
    })
}

/// Analytic density at `x`. Rectangle and ribbon densities are returned exactly
/// as written (the rectangle weights sum to 1 − ε/2 and the ribbon q is
/// unnormalized); see [`Model::density_normalizer`].
pub fn density_at(model: &Model, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(invalid(format!("point has dimension {}, model expects {}", x.len(), model.dim())));
    }
    match model {
        Model::RectMixture(p) => Ok(p.density(x)),
        Model::Ribbon(p) => Ok(p.density(x)),
        Model::TwoMoons(_) => Err(Error::UnsupportedDensity("two_moons")),
        Model::UniformBox(p) => Ok(if p.contains(x) { 1.0 / p.volume() } else { 0.0 }),
    }
}

/// Region of `x` relative to the model's target cluster with expansion radius `expansion`.
pub fn region_membership(model: &Model, x: &[f64], expansion: f64) -> Region {
    match model {
        Model::RectMixture(p) => p.region(x, expansion),
        Model::Ribbon(p) => p.region(x, expansion),
        Model::TwoMoons(p) => p.region(x, expansion),
        Model::UniformBox(p) => {
            if p.contains(x) {
                Region::Core
            } else {
                let d = dist_to_box(x, &p.lower, &p.upper);
                if d <= expansion {
                    Region::Expansion
                } else {
                    Region::Background
                }
            }
        }
    }
}

/// Writes `x0,...,x{d-1}[,label]` rows.
pub fn write_points_csv<W: Write>(points: &PointCloud, labels: Option<&[Region]>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..points.dim()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    wr.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(l[i].as_str().to_string());
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a point CSV; the `label` column is optional.
pub fn read_points_csv<R: Read>(r: R) -> Result<(PointCloud, Option<Vec<Region>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let label_col = headers.iter().position(|h| h == "label");
    let dim = headers.len() - label_col.is_some() as usize;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            if Some(j) == label_col {
                labels.push(Region::parse(field)?);
            } else {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {row}: bad coordinate {field:?}")))?;
                coords.push(v);
            }
        }
    }
    let cloud = PointCloud::new(dim, coords)?;
    Ok((cloud, label_col.map(|_| labels)))
}
