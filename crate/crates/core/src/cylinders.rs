//! Horizontal H-cylinders of ℍ²×ℝ in the halfspace model, invariant under (x, y, z) ↦ (eˢx, eˢy, z).

use crate::error::{Error, Result};
use crate::geometry::{surface_curvature_fd, Metric3, SurfaceCurvature};
use crate::quadrature::integrate;
use nalgebra::{Matrix3, Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Product metric y⁻²(dx² + dy²) + dz² on {y > 0}.
#[derive(Clone, Copy, Debug, Default)]
pub struct Halfspace;

impl Metric3 for Halfspace {
    fn metric(&self, p: &Vector3<f64>) -> Matrix3<f64> {
        let s = 1.0 / (p.y * p.y);
        Matrix3::new(s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0)
    }

    fn metric_grad(&self, p: &Vector3<f64>) -> [Matrix3<f64>; 3] {
        let d = -2.0 / (p.y * p.y * p.y);
        [Matrix3::zeros(), Matrix3::new(d, 0.0, 0.0, 0.0, d, 0.0, 0.0, 0.0, 0.0), Matrix3::zeros()]
    }
}

fn check(h_mean: f64) -> Result<()> {
    if !(h_mean > 0.5) || !h_mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "horizontal H-cylinders need H > 1/2, got {h_mean}"
        )));
    }
    Ok(())
}

fn arctanh_clamped(s: f64) -> f64 {
    let s = s.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    0.5 * ((1.0 + s) / (1.0 - s)).ln()
}

/// (r(u), h(u)) of the generating curve α_H.
pub fn profile(h_mean: f64, u: f64) -> Result<(f64, f64)> {
    check(h_mean)?;
    Ok(profile_unchecked(h_mean, u))
}

fn profile_unchecked(hm: f64, u: f64) -> (f64, f64) {
    let (s, c) = u.sin_cos();
    let h4 = 4.0 * hm * hm;
    let r = arctanh_clamped(c / (2.0 * hm));
    let h = 2.0 * hm / (h4 - 1.0).sqrt() * (s / (h4 - c * c).sqrt()).asin();
    (r, h)
}

/// α_H'(u); its norm is 2H/(4H² − cos²u), its direction (−sin u, cos u).
pub fn profile_tangent(h_mean: f64, u: f64) -> Result<Vector2<f64>> {
    check(h_mean)?;
    let (s, c) = u.sin_cos();
    let k = 2.0 * h_mean / (4.0 * h_mean * h_mean - c * c);
    Ok(Vector2::new(-s * k, c * k))
}

/// φ(t, u) = (eᵗ tanh r(u), eᵗ sech r(u), h(u)).
pub fn immersion(h_mean: f64, t: f64, u: f64) -> Result<Vector3<f64>> {
    check(h_mean)?;
    Ok(immersion_unchecked(h_mean, t, u))
}

fn immersion_unchecked(hm: f64, t: f64, u: f64) -> Vector3<f64> {
    let (r, h) = profile_unchecked(hm, u);
    let e = t.exp();
    Vector3::new(e * r.tanh(), e / r.cosh(), h)
}

/// Euclidean curvature of α_H with respect to the inward normal.
pub fn profile_curvature(h_mean: f64, u: f64) -> Result<f64> {
    check(h_mean)?;
    let c = u.cos();
    Ok((4.0 * h_mean * h_mean - c * c) / (2.0 * h_mean))
}

/// Closed form of ‖A‖² for C_H at parameter u.
pub fn shape_operator_norm(h_mean: f64, u: f64) -> Result<f64> {
    check(h_mean)?;
    let h2 = h_mean * h_mean;
    Ok((3.0 - 16.0 * h2 + 64.0 * h2 * h2 + 4.0 * (1.0 - 4.0 * h2) * (2.0 * u).cos() + (4.0 * u).cos())
        / (16.0 * h2))
}

/// Finite-difference curvature of the immersion, normal oriented so that the mean curvature is positive.
pub fn numeric_curvature(h_mean: f64, t: f64, u: f64) -> Result<SurfaceCurvature> {
    check(h_mean)?;
    let step = 1e-4;
    Ok(surface_curvature_fd(&Halfspace, |a, b| immersion_unchecked(h_mean, b, a), u, t, step))
}

/// Area element |φ_t ∧ φ_u| = cosh r(u) · |α_H'(u)|.
pub fn area_element(h_mean: f64, u: f64) -> f64 {
    let c = u.cos();
    4.0 * h_mean * h_mean / (4.0 * h_mean * h_mean - c * c).powf(1.5)
}

/// D = ∫₀^{2π} 4H²(4H² − cos²u)^{−3/2} du.
pub fn area_growth_constant(h_mean: f64) -> Result<f64> {
    check(h_mean)?;
    Ok(integrate(|u| area_element(h_mean, u), 0.0, 2.0 * PI, 1e-13, 0.0).value)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairSeparation {
    pub h1: f64,
    pub h2: f64,
    pub min_separation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationReport {
    pub pairs: Vec<PairSeparation>,
    pub widths: Vec<f64>,
    pub heights: Vec<f64>,
    pub passed: bool,
}

fn sample_curve(h_mean: f64, n: usize) -> Vec<Vector2<f64>> {
    (0..n)
        .map(|k| {
            let (r, h) = profile_unchecked(h_mean, 2.0 * PI * k as f64 / n as f64);
            Vector2::new(r, h)
        })
        .collect()
}

fn point_segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn inside_polygon(p: &Vector2<f64>, poly: &[Vector2<f64>]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Signed separation of the closed polyline `inner` from `outer`: positive iff inner lies strictly inside.
pub fn nested_separation(outer: &[Vector2<f64>], inner: &[Vector2<f64>]) -> f64 {
    let n = outer.len();
    inner
        .iter()
        .map(|p| {
            let d = (0..n)
                .map(|i| point_segment_distance(p, &outer[i], &outer[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min);
            if inside_polygon(p, outer) {
                d
            } else {
                -d
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Nesting certificate for the profile curves of an increasing list of mean curvatures.
pub fn foliation_certificate_grid(hs: &[f64], n_samples: usize) -> Result<FoliationReport> {
    for &h in hs {
        check(h)?;
    }
    if hs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("H grid must be strictly increasing".into()));
    }
    let curves: Vec<Vec<Vector2<f64>>> = hs.par_iter().map(|&h| sample_curve(h, n_samples)).collect();
    let pairs: Vec<PairSeparation> = (1..hs.len())
        .into_par_iter()
        .map(|i| PairSeparation {
            h1: hs[i - 1],
            h2: hs[i],
            min_separation: nested_separation(&curves[i - 1], &curves[i]),
        })
        .collect();
    let widths: Vec<f64> = hs.iter().map(|&h| arctanh_clamped(1.0 / (2.0 * h))).collect();
    let heights: Vec<f64> = hs.iter().map(|&h| profile_unchecked(h, PI / 2.0).1).collect();
    let passed = pairs.iter().all(|p| p.min_separation > 0.0)
        && widths.windows(2).all(|w| w[1] < w[0])
        && heights.windows(2).all(|w| w[1] < w[0]);
    Ok(FoliationReport { pairs, widths, heights, passed })
}

/// Certificate over `n_leaves` geometrically spaced values of H in [h_lo, h_hi].
pub fn foliation_certificate(h_range: [f64; 2], n_leaves: usize, n_samples: usize) -> Result<FoliationReport> {
    let [lo, hi] = h_range;
    check(lo)?;
    if n_leaves < 2 || hi <= lo {
        return Err(Error::InvalidParameter("need n_leaves >= 2 and h_hi > h_lo".into()));
    }
    let ratio = (hi / lo).ln() / (n_leaves - 1) as f64;
    let hs: Vec<f64> = (0..n_leaves).map(|i| lo * (ratio * i as f64).exp()).collect();
    foliation_certificate_grid(&hs, n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        let (r, h) = profile(1.0, PI / 2.0).unwrap();
        assert!(r.abs() < 1e-15);
        assert!((h - PI / (3.0 * 3f64.sqrt())).abs() < 1e-14);
        let (r, h) = profile(1.0, 0.0).unwrap();
        assert!((r - 0.549_306_144_334_054_8).abs() < 1e-14);
        assert_eq!(h, 0.0);
        assert!(profile(0.5, 0.0).is_err());
    }

    #[test]
    fn immersion_point() {
        let p = immersion(1.0, 0.0, PI / 2.0).unwrap();
        assert!((p - Vector3::new(0.0, 1.0, PI / (3.0 * 3f64.sqrt()))).norm() < 1e-14);
    }

    #[test]
    fn shape_norm_value() {
        assert!((shape_operator_norm(1.0, 0.0).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn curvature_values() {
        assert_eq!(profile_curvature(1.0, PI / 2.0).unwrap(), 2.0);
        assert_eq!(profile_curvature(1.0, 0.0).unwrap(), 1.5);
    }
}
