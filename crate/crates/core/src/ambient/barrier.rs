use super::{theta_cover, AmbientParams, PointM};
use crate::error::{Error, Result};

/// Named minimal surfaces of M(κ_b, τ_b) used as barriers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Barrier {
    /// Vertical cylinder x² + y² = 4/κ_b (the Clifford torus |z| = |w|).
    CylinderT,
    /// Helicoid y = −x tan(κ_b z / 2H).
    HelicoidS,
    /// Horizontal plane z = 4τ_b c / κ_b, the umbrella centered at (0, e^{ic}).
    Umbrella(f64),
    /// Horizontal umbrella centered at an arbitrary point of the model.
    UmbrellaAt(PointM),
    /// Vertical plane a x + b y = 0 through the z-axis.
    Clifford(f64, f64),
    /// Euclidean helicoid y = x tan(κ_b (c − 1) z / 4τ_b).
    HelicoidC(f64),
}

const POLE_EPS: f64 = 1e-8;

fn tan_residual(x: f64, y: f64, angle: f64) -> Result<f64> {
    let (s, c) = angle.sin_cos();
    if c.abs() < POLE_EPS {
        return Err(Error::PoleAdjacent(c));
    }
    Ok(y - x * s / c)
}

/// Signed residual of p with respect to a barrier surface, zero exactly on it.
pub fn barrier_membership(params: &AmbientParams, p: &PointM, which: Barrier) -> Result<f64> {
    let kb = params.kappa_b;
    match which {
        Barrier::CylinderT => Ok(p.x * p.x + p.y * p.y - 4.0 / kb),
        Barrier::HelicoidS => tan_residual(p.x, p.y, -kb * p.z / (2.0 * params.h)),
        Barrier::Umbrella(c) => Ok(p.z - 4.0 * params.tau_b * c / kb),
        Barrier::UmbrellaAt(center) => {
            let q = theta_cover(params, p)?;
            let q0 = theta_cover(params, &center)?;
            Ok(q.dot(&q0.fiber()))
        }
        Barrier::Clifford(a, b) => Ok(a * p.x + b * p.y),
        Barrier::HelicoidC(c) => tan_residual(p.x, p.y, kb * (c - 1.0) * p.z / (4.0 * params.tau_b)),
    }
}

/// max(x² + y² − 4/κ_b, −(x sin φ + y cos φ)) with φ = κ_b z / 2H; non-positive exactly on Ω.
///
/// The helicoid side is written as the rotating half-plane x sin φ + y cos φ ≥ 0, which agrees
/// with y ≥ −x tan φ where cos φ > 0 and stays defined across the tangent poles.
pub fn omega_residual(params: &AmbientParams, p: &PointM) -> f64 {
    let phi = params.kappa_b * p.z / (2.0 * params.h);
    let (s, c) = phi.sin_cos();
    let cyl = p.x * p.x + p.y * p.y - 4.0 / params.kappa_b;
    cyl.max(-(p.x * s + p.y * c))
}

pub fn omega_contains(params: &AmbientParams, p: &PointM, tol: f64) -> bool {
    omega_residual(params, p) <= tol
}
