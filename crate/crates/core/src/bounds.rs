//! Closed-form theoretical quantities: Φ̄, τ̄, the condition number κ, the
//! consistency threshold, the hard-case thresholds, P-weighted volumes,
//! spherical caps and the uniform local conductance bound.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{disc_rect_overlap, incomplete_beta_half, unit_ball_volume};
use crate::rng;
use crate::synthetic::{density_at, Model, RectMixtureParams, RibbonParams};

/// Universal constants of the bounds. c1, c2, c3 have their proven values; the
/// remaining constants are left symbolic by the theory and default to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Constant of the condition-number restriction for consistent recovery.
    pub c_kappa: f64,
    /// Constant of the symmetric-difference upper bound.
    pub c_volume: f64,
    /// Constant of the hard-case failure condition.
    pub c_hard: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c1: 50.0, c2: 2f64.powi(34), c3: 3.0, c_kappa: 1.0, c_volume: 1.0, c_hard: 1.0 }
    }
}

/// Geometric description of a density cluster C and its σ-expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricParams {
    /// Density level λ defining the cluster.
    pub lambda: f64,
    /// Lower density bound λσ on Cσ.
    pub lambda_sigma: f64,
    /// Upper density bound Λσ on Cσ.
    #[serde(rename = "Lambda_sigma")]
    pub lambda_sigma_upper: f64,
    pub sigma: f64,
    /// Low-noise constants: the density drops by at least c0·dist^γ outside Cσ.
    pub c0: f64,
    pub gamma: f64,
    /// Diameter of the convex preimage K.
    pub rho: f64,
    /// Lipschitz constant of the embedding K → Cσ.
    pub lipschitz: f64,
    pub d: usize,
}

impl GeometricParams {
    /// λ = λσ = Λσ = σ = ρ = L = 1, γ = 0, c0 = 0.01, d = 2.
    pub fn unit() -> Self {
        Self {
            lambda: 1.0,
            lambda_sigma: 1.0,
            lambda_sigma_upper: 1.0,
            sigma: 1.0,
            c0: 0.01,
            gamma: 0.0,
            rho: 1.0,
            lipschitz: 1.0,
            d: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.lambda_sigma) && pos(self.lambda_sigma_upper) && self.lambda_sigma <= self.lambda_sigma_upper) {
            return Err(invalid("need 0 < lambda_sigma <= Lambda_sigma < inf"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma must lie in [0,1]"));
        }
        if !(self.lipschitz >= 1.0) {
            return Err(invalid("the Lipschitz constant must be at least 1"));
        }
        if !(pos(self.rho) && pos(self.c0) && pos(self.sigma) && pos(self.lambda)) {
            return Err(invalid("rho, c0, sigma and lambda must be positive"));
        }
        if self.d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(())
    }

    /// Parameters of the left rectangle C⁽¹⁾ of the hard-case mixture, using the
    /// density exactly as written: (1−ε)/(2ρσ) on the outer rectangles and
    /// ε/(ρσ) as the collar level. λ is the midpoint of the admissible levels.
    pub fn rect_cluster(p: &RectMixtureParams) -> Self {
        let area = p.rho * p.sigma;
        let high = (1.0 - p.epsilon) / 2.0 / area;
        let low = p.epsilon / area;
        Self {
            lambda: 0.5 * (low + high),
            lambda_sigma: high,
            lambda_sigma_upper: high,
            sigma: p.sigma,
            c0: (high - low).max(f64::MIN_POSITIVE),
            gamma: 0.0,
            rho: p.rho,
            lipschitz: 1.0,
            d: 2,
        }
    }

    /// Parameters of the ribbon core C: λσ = λ − ση on Cσ, Λσ = λ and c0 = 1.
    pub fn ribbon_cluster(p: &RibbonParams) -> Self {
        let lam = p.lambda();
        Self {
            lambda: lam,
            lambda_sigma: lam - p.sigma * p.eta(),
            lambda_sigma_upper: lam,
            sigma: p.sigma,
            c0: 1.0,
            gamma: p.gamma,
            rho: p.rho,
            lipschitz: 1.0,
            d: p.d,
        }
    }
}

/// A value with the range warnings raised while computing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checked<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Checked<T> {
    fn new(value: T, warnings: Vec<String>) -> Self {
        Self { value, warnings }
    }
}

fn radius_warnings(geom: &GeometricParams, r: f64) -> Vec<String> {
    let r_max = geom.sigma / (2.0 * geom.d as f64);
    if r > 0.0 && r <= r_max {
        Vec::new()
    } else {
        vec![format!("radius {r} outside (0, sigma/(2d)] = (0, {r_max}]")]
    }
}

/// Φ̄ = c1·r·(d/σ)·(λ/λσ)·(λσ − c0·r^γ/(γ+1))/λσ.
pub fn phi_bar(geom: &GeometricParams, r: f64, c: &BoundConstants) -> Checked<f64> {
    let g = geom;
    let decay = g.c0 * r.powf(g.gamma) / (g.gamma + 1.0);
    let value = c.c1 * r * (g.d as f64 / g.sigma) * (g.lambda / g.lambda_sigma) * (g.lambda_sigma - decay)
        / g.lambda_sigma;
    Checked::new(value, radius_warnings(geom, r))
}

/// τ̄ = c2·Λσ⁴d³ρ²L²/(λσ⁴r²)·log²(Λσ/(λσ²r)) + c3.
pub fn tau_bar(geom: &GeometricParams, r: f64, c: &BoundConstants) -> Result<Checked<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    let g = geom;
    let ratio4 = (g.lambda_sigma_upper / g.lambda_sigma).powi(4);
    let d3 = (g.d as f64).powi(3);
    let arg = g.lambda_sigma_upper / (g.lambda_sigma * g.lambda_sigma * r);
    let mut warnings = Vec::new();
    if !(arg > 1.0) {
        warnings.push(format!("log argument Lambda_sigma/(lambda_sigma^2 r) = {arg} is not above 1"));
    }
    let log = arg.ln();
    let value = c.c2 * ratio4 * d3 * g.rho * g.rho * g.lipschitz * g.lipschitz / (r * r) * log * log + c.c3;
    Ok(Checked::new(value, warnings))
}

/// κ = Φ̄·τ̄ with the constants used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumber {
    pub phi_bar: f64,
    pub tau_bar: f64,
    pub kappa: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub warnings: Vec<String>,
}

pub fn condition_number(geom: &GeometricParams, r: f64, c: &BoundConstants) -> Result<ConditionNumber> {
    geom.validate()?;
    let pb = phi_bar(geom, r, c);
    let tb = tau_bar(geom, r, c)?;
    let mut warnings = pb.warnings;
    warnings.extend(tb.warnings);
    Ok(ConditionNumber {
        phi_bar: pb.value,
        tau_bar: tb.value,
        kappa: pb.value * tb.value,
        c1: c.c1,
        c2: c.c2,
        c3: c.c3,
        warnings,
    })
}

/// Both sides of κ ≤ c·(λσ·r^d·ν_d)²/vol_{P,r}(Cσ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyThreshold {
    pub kappa: f64,
    pub threshold: f64,
    /// κ / threshold; the condition holds iff this is at most 1.
    pub ratio: f64,
    pub passes: bool,
    pub c: f64,
}

pub fn consistency_threshold_from_kappa(
    kappa: f64,
    geom: &GeometricParams,
    r: f64,
    vol_p_r_csigma: f64,
    c: f64,
) -> Result<ConsistencyThreshold> {
    if !(vol_p_r_csigma > 0.0 && r > 0.0 && kappa >= 0.0) {
        return Err(invalid("threshold inputs must be positive"));
    }
    let ball = geom.lambda_sigma * r.powi(geom.d as i32) * unit_ball_volume(geom.d);
    let threshold = c * ball * ball / vol_p_r_csigma;
    let ratio = kappa / threshold;
    Ok(ConsistencyThreshold { kappa, threshold, ratio, passes: ratio <= 1.0, c })
}

pub fn consistency_threshold_check(
    geom: &GeometricParams,
    r: f64,
    vol_p_r_csigma: f64,
    c: &BoundConstants,
) -> Result<ConsistencyThreshold> {
    let k = condition_number(geom, r, c)?;
    consistency_threshold_from_kappa(k.kappa, geom, r, vol_p_r_csigma, c.c_kappa)
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Inner samples per outer point when P(B(x,r)) has no closed form.
pub const VOLUME_INNER_SAMPLES: usize = 64;
const VOLUME_CHUNK: usize = 4096;

/// P(B(x, r)), exact for the rectangle mixture and planar boxes, Monte Carlo otherwise.
pub fn ball_probability<R: rand::Rng>(model: &Model, x: &[f64], r: f64, inner: usize, rng: &mut R) -> Result<f64> {
    match model {
        Model::RectMixture(p) => {
            let w = p.weights();
            let area = p.rho * p.sigma;
            Ok((0..3)
                .map(|k| {
                    let (lo, hi) = p.rect(k);
                    w[k] * disc_rect_overlap([x[0], x[1]], r, lo, hi) / area
                })
                .sum())
        }
        Model::UniformBox(b) if b.lower.len() == 2 => Ok(disc_rect_overlap(
            [x[0], x[1]],
            r,
            [b.lower[0], b.lower[1]],
            [b.upper[0], b.upper[1]],
        ) / b.volume()),
        Model::TwoMoons(_) => Err(Error::UnsupportedDensity("two_moons")),
        _ => {
            let z = model.density_normalizer()?;
            let d = x.len();
            let ball = unit_ball_volume(d) * r.powi(d as i32);
            let mut y = vec![0.0; d];
            let mut acc = 0.0;
            for _ in 0..inner {
                uniform_in_ball(x, r, &mut y, rng);
                acc += density_at(model, &y)?;
            }
            Ok(acc / inner as f64 / z * ball)
        }
    }
}

/// Draws a point uniformly from B(center, r) into `out`.
pub fn uniform_in_ball<R: rand::Rng>(center: &[f64], r: f64, out: &mut [f64], rng: &mut R) {
    let d = center.len();
    let mut norm2 = 0.0;
    for o in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *o = z;
        norm2 += z * z;
    }
    let scale = r * rng.random::<f64>().powf(1.0 / d as f64) / norm2.sqrt();
    for j in 0..d {
        out[j] = center[j] + scale * out[j];
    }
}

/// Monte Carlo estimate of vol_{P,r}(S) = ∫_S P(B(x,r)) f(x) dx = E_{x∼P}[1_S(x)·P(B(x,r))].
///
/// Work is split into fixed chunks with their own derived streams, so the
/// result does not depend on the number of threads.
pub fn vol_p_r(
    model: &Model,
    region: &(dyn Fn(&[f64]) -> bool + Sync),
    r: f64,
    n_mc: usize,
    seed: u64,
) -> Result<Estimate> {
    model.validate()?;
    if n_mc < 1000 {
        return Err(invalid(format!("vol_P_r needs at least 1000 samples, got {n_mc}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("radius must be positive"));
    }
    if matches!(model, Model::TwoMoons(_)) {
        return Err(Error::UnsupportedDensity("two_moons"));
    }
    let chunks = n_mc.div_ceil(VOLUME_CHUNK);
    let partial: Result<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = VOLUME_CHUNK.min(n_mc - c * VOLUME_CHUNK);
            let chunk_seed = rng::derive_seed(seed, &[c as u64]);
            let cloud = model.sample(len, chunk_seed)?;
            let mut inner_rng = rng::stream(chunk_seed, 1);
            let (mut s1, mut s2) = (0.0, 0.0);
            for x in cloud.points.iter() {
                if region(x) {
                    let v = ball_probability(model, x, r, VOLUME_INNER_SAMPLES, &mut inner_rng)?;
                    s1 += v;
                    s2 += v * v;
                }
            }
            Ok((s1, s2))
        })
        .collect();
    let (s1, s2) = partial?.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = n_mc as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(Estimate { value: mean, std_error: (var / n).sqrt(), samples: n_mc })
}

/// Volume of a spherical cap of height h cut from a d-ball of radius r:
/// ½·ν_d·r^d·I_{(2rh−h²)/r²}((d+1)/2, ½), the incomplete beta by quadrature.
pub fn spherical_cap_volume(r: f64, h: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("radius must be positive"));
    }
    if !(0.0..=r).contains(&h) {
        return Err(invalid(format!("cap height {h} outside [0, {r}]")));
    }
    let x = (2.0 * r * h - h * h) / (r * r);
    let ib = incomplete_beta_half(x, (d as f64 + 1.0) / 2.0, 1e-10);
    Ok(0.5 * unit_ball_volume(d) * r.powi(d as i32) * ib)
}

/// Uniform local conductance lower bound (6/25)·ν_d·r^d, valid for r ≤ σ/(2√d).
pub fn local_conductance_lower_bound(d: usize, r: f64, sigma: f64) -> Result<Checked<f64>> {
    if d == 0 || !(r > 0.0) || !(sigma > 0.0) {
        return Err(invalid("need d >= 1, r > 0 and sigma > 0"));
    }
    let limit = sigma / (2.0 * (d as f64).sqrt());
    let warnings = if r <= limit {
        Vec::new()
    } else {
        vec![format!("radius {r} exceeds sigma/(2 sqrt d) = {limit}")]
    };
    Ok(Checked::new(6.0 / 25.0 * unit_ball_volume(d) * r.powi(d as i32), warnings))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Recovery,
    Failure,
    Indeterminate,
}

/// Classification of a hard-case instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCaseThresholds {
    pub epsilon: f64,
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
    pub c: f64,
    /// (c/8)·√(σ/ρ)·√(log(ρσ/(ε²r²))·σ/r); failure when ε² exceeds it.
    pub failure_rhs: f64,
    pub failure: bool,
    /// Largest c for which the failure condition holds.
    pub failure_c_threshold: f64,
    /// c·(σ/(ρ·log(1/σ)))²; recovery when ε is below it.
    pub recovery_rhs: f64,
    pub recovery: bool,
    pub regime: Regime,
    /// max{64/(ε²ρσπr²), 8/ε}, the smallest n covered by the failure guarantee.
    pub n_floor: f64,
    pub warnings: Vec<String>,
}

pub fn hard_case_thresholds(epsilon: f64, sigma: f64, rho: f64, r: f64, c: f64) -> Result<HardCaseThresholds> {
    if !(epsilon > 0.0 && epsilon < 1.0 && sigma > 0.0 && rho > sigma && r > 0.0 && c > 0.0) {
        return Err(invalid("need 0 < epsilon < 1, 0 < sigma < rho, r > 0, c > 0"));
    }
    let mut warnings = Vec::new();
    let r_limit = (rho / 40.0).min(sigma / 4.0);
    if !(r < r_limit) {
        warnings.push(format!("radius {r} is not below min(rho/40, sigma/4) = {r_limit}"));
    }
    let log_arg = rho * sigma / (epsilon * epsilon * r * r);
    let shape = if log_arg > 1.0 {
        (sigma / rho).sqrt() * (log_arg.ln() * sigma / r).sqrt()
    } else {
        warnings.push(format!("log argument rho*sigma/(eps^2 r^2) = {log_arg} is not above 1"));
        f64::NAN
    };
    let failure_rhs = c / 8.0 * shape;
    let failure = shape.is_finite() && epsilon * epsilon > failure_rhs;
    let failure_c_threshold = if shape.is_finite() { 8.0 * epsilon * epsilon / shape } else { f64::NAN };
    let recovery_rhs = if sigma < 1.0 {
        c * (sigma / (rho * (1.0 / sigma).ln())).powi(2)
    } else {
        warnings.push("log(1/sigma) is not positive; recovery condition undefined".into());
        f64::NAN
    };
    let recovery = recovery_rhs.is_finite() && epsilon < recovery_rhs;
    let regime = match (recovery, failure) {
        (true, false) => Regime::Recovery,
        (false, true) => Regime::Failure,
        _ => Regime::Indeterminate,
    };
    let n_floor = (64.0 / (epsilon * epsilon * rho * sigma * std::f64::consts::PI * r * r)).max(8.0 / epsilon);
    Ok(HardCaseThresholds {
        epsilon,
        sigma,
        rho,
        r,
        c,
        failure_rhs,
        failure,
        failure_c_threshold,
        recovery_rhs,
        recovery,
        regime,
        n_floor,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phi_bar_examples() {
        let c = BoundConstants::default();
        let g = GeometricParams { c0: 0.01, ..GeometricParams::unit() };
        let v = phi_bar(&g, 0.1, &c);
        assert!((v.value - 50.0 * 0.1 * 2.0 * (1.0 - 0.01)).abs() < 1e-12);
        assert!(v.warnings.is_empty());
        let vanishing = GeometricParams { c0: 1.0, ..GeometricParams::unit() };
        assert!(phi_bar(&vanishing, 0.1, &c).value.abs() < 1e-15);
        assert!(!phi_bar(&g, 0.9, &c).warnings.is_empty());
    }

    #[test]
    fn tau_bar_examples() {
        let c = BoundConstants::default();
        let g = GeometricParams::unit();
        let v = tau_bar(&g, 0.1, &c).unwrap().value;
        let expect = 2f64.powi(34) * 8.0 * 100.0 * 10f64.ln().powi(2) + 3.0;
        assert!((v - expect).abs() / expect < 1e-14);
        let wide = GeometricParams { rho: 2.0, ..g.clone() };
        let v2 = tau_bar(&wide, 0.1, &c).unwrap().value;
        assert!(((v2 - 3.0) - 4.0 * (v - 3.0)).abs() / v < 1e-14);
        assert!(!tau_bar(&g, 2.0, &c).unwrap().warnings.is_empty());
        assert!(tau_bar(&g, 0.0, &c).is_err());
    }

    #[test]
    fn kappa_is_product() {
        let c = BoundConstants::default();
        let g = GeometricParams::unit();
        let k = condition_number(&g, 0.1, &c).unwrap();
        assert_eq!(k.kappa, k.phi_bar * k.tau_bar);
        let p = phi_bar(&g, 0.1, &c).value;
        let t = tau_bar(&g, 0.1, &c).unwrap().value;
        assert!((k.kappa - p * t).abs() <= 1e-15 * k.kappa);
    }

    #[test]
    fn consistency_threshold_scaling() {
        let g = GeometricParams::unit();
        let a = consistency_threshold_from_kappa(0.0, &g, 0.1, 0.02, 1.0).unwrap();
        assert!(a.passes);
        let b = consistency_threshold_from_kappa(1.0, &g, 0.1, 0.01, 1.0).unwrap();
        assert!((b.threshold / a.threshold - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_closed_forms() {
        let v = spherical_cap_volume(1.0, 0.5, 3).unwrap();
        assert!((v - PI * 0.25 * 2.5 / 3.0).abs() < 1e-8);
        for &h in &[0.05f64, 0.3, 0.77, 1.0] {
            let seg = (1.0 - h).acos() - (1.0 - h) * (2.0 * h - h * h).sqrt();
            assert!((spherical_cap_volume(1.0, h, 2).unwrap() - seg).abs() < 1e-8);
        }
        for d in 1..7 {
            let half = spherical_cap_volume(2.0, 2.0, d).unwrap();
            assert!((half - 0.5 * unit_ball_volume(d) * 2f64.powi(d as i32)).abs() < 1e-9);
        }
        assert!(spherical_cap_volume(1.0, 1.5, 2).is_err());
    }

    #[test]
    fn local_conductance_examples() {
        let v = local_conductance_lower_bound(2, 0.1, 1.0).unwrap();
        assert!((v.value - 6.0 / 25.0 * PI * 0.01).abs() < 1e-15);
        assert!(v.value <= PI * 0.01);
        assert!(!local_conductance_lower_bound(2, 0.5, 1.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn hard_case_classification() {
        let t = hard_case_thresholds(1e-4, 0.1, 1.0, 0.01, 1.0).unwrap();
        assert_eq!(t.regime, Regime::Recovery);
        let t = hard_case_thresholds(0.3, 0.1, 1.0, 0.025, 1.0).unwrap();
        assert!(!t.failure && !t.recovery);
        assert_eq!(t.regime, Regime::Indeterminate);
        let t2 = hard_case_thresholds(0.3, 0.1, 1.0, 0.025, 0.9 * t.failure_c_threshold).unwrap();
        assert_eq!(t2.regime, Regime::Failure);
    }
}
