use crate::error::{Error, Result};
use crate::plateau::SurfaceMesh;
use crate::polygon::ArcTag;
use crate::quadrature::sampled_integral;
use serde::{Deserialize, Serialize};

/// ν sampled along one boundary arc against arclength from the start of the arc.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub tag: ArcTag,
    pub s: Vec<f64>,
    pub nu: Vec<f64>,
    pub length: f64,
    /// +1 if the arc parameter increases along the trace, −1 if it decreases.
    pub orientation: f64,
}

impl BoundaryTrace {
    pub fn from_mesh(mesh: &SurfaceMesh, tag: ArcTag) -> Self {
        let verts = &mesh.arc_vertices[tag as usize];
        let params = &mesh.arc_params[tag as usize];
        let speed = match tag {
            ArcTag::V => 4.0 * mesh.params.h / mesh.params.kappa_b,
            _ => mesh.params.radius(),
        };
        let p0 = params[0];
        let s: Vec<f64> = params.iter().map(|p| speed * (p - p0).abs()).collect();
        let nu = verts.iter().map(|&v| mesh.nu[v].clamp(-1.0, 1.0)).collect();
        let last = *params.last().expect("arc has samples");
        Self {
            tag,
            length: *s.last().expect("arc has samples"),
            s,
            nu,
            orientation: if last >= p0 { 1.0 } else { -1.0 },
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.length < 1e-9
    }

    /// ∫ f(ν) ds with its quadrature error estimate; zero on a collapsed arc.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
        if self.is_degenerate() {
            return Ok((0.0, 0.0));
        }
        if self.s.len() < 8 {
            return Err(Error::UnresolvedTrace { arc: self.tag.name().into(), samples: self.s.len() });
        }
        let y: Vec<f64> = self.nu.iter().map(|&n| f(n)).collect();
        Ok(sampled_integral(&self.s, &y))
    }
}

/// ℓᵢ = −∫ ν ds (unsigned arclength) and μᵢ = ∫ √(1−ν²) taken along the arc parameter, so μ₁ < 0
/// while h̃₁ runs backwards (λ < π/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub ell: [f64; 3],
    pub mu: [f64; 3],
    pub ell_err: [f64; 3],
    pub mu_err: [f64; 3],
}

pub fn boundary_observables(mesh: &SurfaceMesh) -> Result<Observables> {
    let mut out = Observables { ell: [0.0; 3], mu: [0.0; 3], ell_err: [0.0; 3], mu_err: [0.0; 3] };
    for (i, tag) in [ArcTag::H0, ArcTag::H1, ArcTag::H2].into_iter().enumerate() {
        let trace = BoundaryTrace::from_mesh(mesh, tag);
        let (l, le) = trace.integrate(|n| -n)?;
        let (m, me) = trace.integrate(|n| (1.0 - n * n).max(0.0).sqrt())?;
        out.ell[i] = l;
        out.ell_err[i] = le;
        out.mu[i] = trace.orientation * m;
        out.mu_err[i] = me;
    }
    Ok(out)
}

/// Maximum height of the conjugate surface above the slice containing v.
pub fn max_height(obs: &Observables) -> f64 {
    obs.mu[2]
}
