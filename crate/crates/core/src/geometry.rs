//! Numerical geometry helpers: ball volumes, quadrature, incomplete beta,
//! exact disc/rectangle overlaps and distances to axis-aligned boxes.

use std::f64::consts::PI;

/// Volume of the unit ball in `d` dimensions, π^{d/2}/Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    // ν_d = ν_{d-2} · 2π/d with ν_0 = 1, ν_1 = 2.
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Regularized incomplete beta I_x(a, 1/2) by quadrature.
///
/// With t = 1 − sin²φ the integrand t^{a−1}(1−t)^{−1/2} becomes 2cos^{2a−1}φ,
/// which is smooth on the whole range, so Simpson converges quickly.
pub fn incomplete_beta_half(x: f64, a: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let g = |phi: f64| 2.0 * phi.cos().max(0.0).powf(2.0 * a - 1.0);
    let lo = (1.0 - x).sqrt().asin();
    let part = adaptive_simpson(&g, lo, PI / 2.0, tol);
    let full = adaptive_simpson(&g, 0.0, PI / 2.0, tol);
    (part / full).clamp(0.0, 1.0)
}

/// ∫ sqrt(r² − x²) dx.
fn half_chord_antiderivative(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
}

/// Area of {x² + y² ≤ r², x ≤ a, y ≤ b}.
fn disc_quadrant_area(a: f64, b: f64, r: f64) -> f64 {
    if a <= -r || b <= -r {
        return 0.0;
    }
    let hi = a.min(r);
    let g = |x: f64| half_chord_antiderivative(x, r);
    // Integrates the vertical chord length len(x) over [lo, hi].
    let full = |lo: f64, hi: f64| if hi > lo { 2.0 * (g(hi) - g(lo)) } else { 0.0 };
    let capped = |lo: f64, hi: f64| if hi > lo { b * (hi - lo) + g(hi) - g(lo) } else { 0.0 };
    if b >= r {
        return full(-r, hi);
    }
    let c = (r * r - b * b).max(0.0).sqrt();
    if b >= 0.0 {
        full(-r, hi.min(-c)) + capped(-c, hi.min(c)) + full(c, hi)
    } else {
        capped(-c, hi.min(c))
    }
}

/// Exact area of the intersection of the disc B(center, r) with the rectangle
/// `[lo[0], hi[0]] × [lo[1], hi[1]]`.
pub fn disc_rect_overlap(center: [f64; 2], r: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let f = |x: f64, y: f64| disc_quadrant_area(x - center[0], y - center[1], r);
    let a = f(hi[0], hi[1]) - f(lo[0], hi[1]) - f(hi[0], lo[1]) + f(lo[0], lo[1]);
    a.max(0.0)
}

/// Euclidean distance from `x` to the axis-aligned box `[lo, hi]` (0 inside).
pub fn dist_to_box(x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&xi, (&l, &h))| {
            let e = (l - xi).max(xi - h).max(0.0);
            e * e
        })
        .sum::<f64>()
        .sqrt()
}

/// Surface area of the parallel body {x : dist(x, box) = δ} of a box with the
/// given side lengths, from the Steiner formula Σ_j e_j(sides)·ν_{d−j}·δ^{d−j}.
pub fn box_parallel_surface(sides: &[f64], delta: f64) -> f64 {
    let d = sides.len();
    let e = elementary_symmetric(sides);
    (0..d)
        .map(|j| {
            let k = d - j;
            e[j] * unit_ball_volume(k) * k as f64 * delta.powi(k as i32 - 1)
        })
        .sum()
}

/// Elementary symmetric polynomials e_0..e_d of `xs`.
pub fn elementary_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; xs.len() + 1];
    e[0] = 1.0;
    for (i, &x) in xs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-14);
    }

    #[test]
    fn incomplete_beta_matches_closed_forms() {
        // I_x(1, 1/2) = 1 − sqrt(1 − x).
        for &x in &[0.1, 0.5, 0.9] {
            let v = incomplete_beta_half(x, 1.0, 1e-12);
            assert!((v - (1.0 - (1.0 - x).sqrt())).abs() < 1e-10, "{x} {v}");
        }
    }

    #[test]
    fn disc_overlap_full_half_quarter() {
        let r = 0.3;
        let big = disc_rect_overlap([0.0, 0.0], r, [-1.0, -1.0], [1.0, 1.0]);
        assert!((big - PI * r * r).abs() < 1e-14);
        let half = disc_rect_overlap([0.0, 0.0], r, [0.0, -1.0], [1.0, 1.0]);
        assert!((half - PI * r * r / 2.0).abs() < 1e-14);
        let quarter = disc_rect_overlap([0.0, 0.0], r, [0.0, 0.0], [1.0, 1.0]);
        assert!((quarter - PI * r * r / 4.0).abs() < 1e-14);
        assert_eq!(disc_rect_overlap([0.0, 0.0], r, [0.5, 0.5], [1.0, 1.0]), 0.0);
    }

    #[test]
    fn disc_overlap_matches_grid_count() {
        let (c, r, lo, hi) = ([0.1, -0.05], 0.25, [0.0, -0.2], [0.4, 0.12]);
        let m = 2000;
        let mut count = 0usize;
        for i in 0..m {
            for j in 0..m {
                let x = lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / m as f64;
                let y = lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / m as f64;
                if (x - c[0]).powi(2) + (y - c[1]).powi(2) <= r * r {
                    count += 1;
                }
            }
        }
        let grid = count as f64 / (m * m) as f64 * (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let exact = disc_rect_overlap(c, r, lo, hi);
        assert!((grid - exact).abs() < 1e-4, "{grid} {exact}");
    }

    #[test]
    fn steiner_surface_in_the_plane() {
        // Rectangle a×b: perimeter of the δ-parallel body is 2(a+b) + 2πδ.
        let s = box_parallel_surface(&[0.3, 2.0], 0.1);
        assert!((s - (2.0 * 2.3 + 2.0 * PI * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn box_distance() {
        assert_eq!(dist_to_box(&[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0]), 0.0);
        assert!((dist_to_box(&[2.0, 2.0], &[0.0, 0.0], &[1.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
