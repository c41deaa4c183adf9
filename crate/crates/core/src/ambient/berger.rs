use super::{AmbientParams, PointM};
use crate::error::{Error, Result};
use crate::geometry::Metric3;
use nalgebra::{Matrix3, Vector2, Vector4};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Unit vector (z, w) of ℂ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointS3 {
    pub z: Complex64,
    pub w: Complex64,
}

impl PointS3 {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    pub fn to_r4(&self) -> Vector4<f64> {
        Vector4::new(self.z.re, self.z.im, self.w.re, self.w.im)
    }

    pub fn from_r4(v: &Vector4<f64>) -> Self {
        Self { z: Complex64::new(v[0], v[1]), w: Complex64::new(v[2], v[3]) }
    }

    /// Real inner product of ℝ⁴ = ℂ².
    pub fn dot(&self, other: &PointS3) -> f64 {
        (self.z * other.z.conj() + self.w * other.w.conj()).re
    }

    /// Fiber direction i(z, w).
    pub fn fiber(&self) -> PointS3 {
        let i = Complex64::i();
        Self { z: i * self.z, w: i * self.w }
    }
}

/// Metric of M(κ_b, τ) in the sign convention pulled back by Θ:
/// (dx² + dy²)/D² + (dz + τ(x dy − y dx)/D)², D = 1 + κ_b(x² + y²)/4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BergerModel {
    pub kappa_b: f64,
    pub tau: f64,
}

impl BergerModel {
    pub fn new(kappa_b: f64, tau: f64) -> Self {
        Self { kappa_b, tau }
    }

    pub fn conformal(&self, p: &PointM) -> f64 {
        1.0 + 0.25 * self.kappa_b * (p.x * p.x + p.y * p.y)
    }

    pub fn in_domain(&self, p: &PointM) -> bool {
        self.conformal(p) > 0.0
    }

    /// Connection form coefficients (a, b) with ω = dz + a dx + b dy.
    fn connection(&self, p: &PointM) -> (f64, f64, f64) {
        let d = self.conformal(p);
        (-self.tau * p.y / d, self.tau * p.x / d, d)
    }

    /// Vertical projection dz-component of a horizontal vector, i.e. ω(v).
    pub fn vertical_part(&self, p: &PointM, v: &PointM) -> f64 {
        let (a, b, _) = self.connection(p);
        v.z + a * v.x + b * v.y
    }

    pub fn metric_at(&self, p: &PointM) -> Matrix3<f64> {
        let (a, b, d) = self.connection(p);
        let e = 1.0 / (d * d);
        Matrix3::new(
            e + a * a, a * b, a, //
            a * b, e + b * b, b, //
            a, b, 1.0,
        )
    }

    pub fn metric_grad_at(&self, p: &PointM) -> [Matrix3<f64>; 3] {
        let (a, b, d) = self.connection(p);
        let t = self.tau;
        let (dx, dy) = (0.5 * self.kappa_b * p.x, 0.5 * self.kappa_b * p.y);
        let d2 = d * d;
        let d3 = d2 * d;
        let ex = -2.0 * dx / d3;
        let ey = -2.0 * dy / d3;
        let ax = t * p.y * dx / d2;
        let ay = -t / d + t * p.y * dy / d2;
        let bx = t / d - t * p.x * dx / d2;
        let by = -t * p.x * dy / d2;
        let build = |e1: f64, a1: f64, b1: f64| {
            Matrix3::new(
                e1 + 2.0 * a * a1,
                a1 * b + a * b1,
                a1,
                a1 * b + a * b1,
                e1 + 2.0 * b * b1,
                b1,
                a1,
                b1,
                0.0,
            )
        };
        [build(ex, ax, bx), build(ey, ay, by), Matrix3::zeros()]
    }
}

impl Metric3 for BergerModel {
    fn metric(&self, p: &PointM) -> Matrix3<f64> {
        self.metric_at(p)
    }

    fn metric_grad(&self, p: &PointM) -> [Matrix3<f64>; 3] {
        self.metric_grad_at(p)
    }
}

/// Metric tensor of M(κ_b, τ_b) at p.
pub fn metric_m(params: &AmbientParams, p: &PointM) -> Result<Matrix3<f64>> {
    let model = params.model();
    let d = model.conformal(p);
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::Domain(d));
    }
    Ok(model.metric_at(p))
}

/// Covering map Θ: M(κ_b, τ_b) → 𝕊³_b(κ_b, τ_b).
pub fn theta_cover(params: &AmbientParams, p: &PointM) -> Result<PointS3> {
    let model = params.model();
    let d = model.conformal(p);
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::Domain(d));
    }
    let kb = params.kappa_b;
    let phase = Complex64::from_polar(1.0, kb * p.z / (4.0 * params.tau_b));
    let s = 1.0 / d.sqrt();
    let z = Complex64::new(p.x, p.y) * (s * 0.5 * kb.sqrt()) * phase;
    Ok(PointS3 { z, w: phase * s })
}

/// Inverse of Θ on the branch whose z-coordinate is closest to `z_ref`.
pub fn theta_inverse(params: &AmbientParams, q: &PointS3, z_ref: f64) -> Result<PointM> {
    if q.w.norm() < 1e-14 {
        return Err(Error::InvalidParameter("w = 0 lies outside the model chart".into()));
    }
    let kb = params.kappa_b;
    let xy = q.z / q.w * (2.0 / kb.sqrt());
    let scale = 4.0 * params.tau_b / kb;
    let period = 2.0 * PI * scale;
    let base = scale * q.w.arg();
    let k = ((z_ref - base) / period).round();
    Ok(PointM::new(xy.re, xy.im, base + k * period))
}

/// Berger metric (4/κ)[⟨X,Y⟩ + (4τ²/κ − 1)⟨X,V⟩⟨Y,V⟩] at q, with V = i q.
pub fn berger_metric(kappa_b: f64, tau: f64, q: &PointS3, x: &PointS3, y: &PointS3) -> f64 {
    let v = q.fiber();
    4.0 / kappa_b * (x.dot(y) + (4.0 * tau * tau / kappa_b - 1.0) * x.dot(&v) * y.dot(&v))
}

/// Hopf fibration Π(z, w) = (2/√κ)(z w̄, ½(|z|² − |w|²)) onto S²(κ_b) ⊂ ℝ³.
pub fn hopf_projection(params: &AmbientParams, q: &PointS3) -> nalgebra::Vector3<f64> {
    let c = 2.0 / params.kappa_b.sqrt();
    let zw = q.z * q.w.conj();
    nalgebra::Vector3::new(c * zw.re, c * zw.im, 0.5 * c * (q.z.norm_sqr() - q.w.norm_sqr()))
}

/// Screw motion: rotation of (x, y) by −t and vertical shift 2Ht/κ_b.
pub fn screw_motion(params: &AmbientParams, t: f64, p: &PointM) -> PointM {
    let (s, c) = t.sin_cos();
    PointM::new(
        p.x * c + p.y * s,
        p.y * c - p.x * s,
        p.z + 2.0 * params.h * t / params.kappa_b,
    )
}

/// The screw motion of 𝕊³_b corresponding to [`screw_motion`] through Θ.
pub fn berger_screw_motion(t: f64, q: &PointS3) -> PointS3 {
    PointS3 {
        z: q.z * Complex64::from_polar(1.0, -0.5 * t),
        w: q.w * Complex64::from_polar(1.0, 0.5 * t),
    }
}

/// Killing submersion Π₀ along the screw-motion orbits.
pub fn killing_submersion_base(params: &AmbientParams, p: &PointM) -> Vector2<f64> {
    let t0 = params.kappa_b * p.z / (2.0 * params.h);
    let q = screw_motion(params, -t0, p);
    Vector2::new(q.x, q.y)
}
