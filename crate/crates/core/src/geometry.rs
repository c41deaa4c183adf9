//! Riemannian helpers for metrics on coordinate charts of 3-manifolds.

use nalgebra::{Matrix2, Matrix3, Vector3};

pub trait Metric3 {
    fn metric(&self, p: &Vector3<f64>) -> Matrix3<f64>;

    /// ∂g/∂x_k for k = 0, 1, 2.
    fn metric_grad(&self, p: &Vector3<f64>) -> [Matrix3<f64>; 3];

    /// Γ^k_ij stored as `gamma[k][(i, j)]`.
    fn christoffel(&self, p: &Vector3<f64>) -> [Matrix3<f64>; 3] {
        let g = self.metric(p);
        let ginv = g.try_inverse().expect("metric must be invertible");
        let dg = self.metric_grad(p);
        // first kind: c[l](i,j) = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let mut first = [Matrix3::zeros(); 3];
        for (l, fl) in first.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    fl[(i, j)] = 0.5 * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
            }
        }
        let mut out = [Matrix3::zeros(); 3];
        for (k, ok) in out.iter_mut().enumerate() {
            for l in 0..3 {
                *ok += first[l] * ginv[(k, l)];
            }
        }
        out
    }

    /// Covariant derivative correction Γ(u, v)^k.
    fn gamma_apply(&self, p: &Vector3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let gam = self.christoffel(p);
        Vector3::new(u.dot(&(gam[0] * v)), u.dot(&(gam[1] * v)), u.dot(&(gam[2] * v)))
    }
}

/// Riemannian cross product: g(a ×_g b, w) = vol_g(a, b, w).
pub fn cross_g(g: &Matrix3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let flat = a.cross(b) * g.determinant().sqrt();
    g.try_inverse().expect("metric must be invertible") * flat
}

/// Unit normal of span(a, b) with respect to g, oriented so that (a, b, N) is positive.
pub fn unit_normal(g: &Matrix3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> Option<Vector3<f64>> {
    let n = cross_g(g, a, b);
    let len = n.dot(&(g * n)).sqrt();
    if !(len > 1e-300) {
        return None;
    }
    Some(n / len)
}

#[derive(Clone, Copy, Debug)]
pub struct SurfaceCurvature {
    pub mean: f64,
    pub gauss_extrinsic: f64,
    pub norm2: f64,
    pub normal: Vector3<f64>,
}

/// Curvature of a parametrized surface from its first and second coordinate derivatives.
pub fn surface_curvature<M: Metric3 + ?Sized>(
    metric: &M,
    p: &Vector3<f64>,
    fu: &Vector3<f64>,
    fv: &Vector3<f64>,
    fuu: &Vector3<f64>,
    fuv: &Vector3<f64>,
    fvv: &Vector3<f64>,
) -> SurfaceCurvature {
    let g = metric.metric(p);
    let n = unit_normal(&g, fu, fv).expect("degenerate parametrization");
    let ip = |a: &Vector3<f64>, b: &Vector3<f64>| a.dot(&(g * b));
    let first = Matrix2::new(ip(fu, fu), ip(fu, fv), ip(fv, fu), ip(fv, fv));
    let cov = |d2: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>| d2 + metric.gamma_apply(p, a, b);
    let l = ip(&cov(fuu, fu, fu), &n);
    let m = ip(&cov(fuv, fu, fv), &n);
    let nn = ip(&cov(fvv, fv, fv), &n);
    let second = Matrix2::new(l, m, m, nn);
    let shape = first.try_inverse().expect("degenerate first fundamental form") * second;
    let sq = shape * shape;
    SurfaceCurvature {
        mean: 0.5 * shape.trace(),
        gauss_extrinsic: shape.determinant(),
        norm2: sq.trace(),
        normal: n,
    }
}

/// Central finite-difference curvature of a map (u, v) ↦ f(u, v).
pub fn surface_curvature_fd<M, F>(metric: &M, f: F, u: f64, v: f64, step: f64) -> SurfaceCurvature
where
    M: Metric3 + ?Sized,
    F: Fn(f64, f64) -> Vector3<f64>,
{
    let h = step;
    let p = f(u, v);
    let fu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
    let fv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
    let fuu = (f(u + h, v) - p * 2.0 + f(u - h, v)) / (h * h);
    let fvv = (f(u, v + h) - p * 2.0 + f(u, v - h)) / (h * h);
    let fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
    surface_curvature(metric, &p, &fu, &fv, &fuu, &fuv, &fvv)
}

/// Riemannian length of a coordinate displacement using the metric at its midpoint.
pub fn segment_length<M: Metric3 + ?Sized>(metric: &M, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = b - a;
    let g = metric.metric(&((a + b) * 0.5));
    d.dot(&(g * d)).max(0.0).sqrt()
}
