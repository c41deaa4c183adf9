//! Area-minimizing disk spanning Γ̃_λ, its angle function, nodal set and stability data.

mod mesh;
mod nodal;
mod solver;
mod stability;

pub use mesh::{initial_mesh, SolverConfig, SurfaceMesh, VertexTag};
pub use nodal::{nodal_set, NodalCurve, NodalEnd};
pub use solver::{solve, triangle_area_grad, SolveReport};
pub use stability::{
    annulus_first_eigenvalue, annulus_gluing, jacobi_operator, jacobi_residual, reflected_annulus, stability_report, Annulus,
    JacobiOperator, StabilityReport,
};

use crate::error::Result;
use crate::geometry::segment_length;
use crate::polygon::GeodesicPolygon;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Debug)]
pub struct PlateauSolution {
    pub mesh: SurfaceMesh,
    pub report: SolveReport,
}

/// Solve the Plateau problem for Γ̃_λ and fill in normals, ν, u and K.
pub fn solve_plateau(poly: &GeodesicPolygon, config: &SolverConfig) -> Result<PlateauSolution> {
    let mut mesh = initial_mesh(poly, config)?;
    let mut report = solve(&mut mesh, config)?;
    let mut mixer = FanMixer::default();
    for _ in 0..config.fan_passes {
        let target = mesh.fan_target();
        let change = mesh::fan_distance(&target, &mesh.fans);
        if change < 1e-6 {
            break;
        }
        let next = mixer.next(&mesh.fans, &target);
        if !mesh.set_fans(next) {
            mixer = FanMixer::default();
            mesh.set_fans(target);
        }
        mesh.compute_normals(false);
        report = solve(&mut mesh, config)?;
    }
    mesh.compute_normals(false);
    mesh.gauss = gauss_curvature(&mesh);
    Ok(PlateauSolution { mesh, report })
}

/// Anderson mixing of the fan fixed-point iteration.
#[derive(Default)]
struct FanMixer {
    xs: Vec<DVector<f64>>,
    fs: Vec<DVector<f64>>,
}

impl FanMixer {
    const DEPTH: usize = 4;

    fn next(&mut self, fans: &[Vec<f64>; 2], target: &[Vec<f64>; 2]) -> [Vec<f64>; 2] {
        let n = fans[0].len();
        let x = DVector::from_iterator(2 * n, fans.iter().flatten().copied());
        let g = DVector::from_iterator(2 * n, target.iter().flatten().copied());
        let f = &g - &x;
        self.xs.push(x.clone());
        self.fs.push(f.clone());
        if self.xs.len() > Self::DEPTH + 1 {
            self.xs.remove(0);
            self.fs.remove(0);
        }
        let m = self.xs.len() - 1;
        let mut out = g;
        if m > 0 {
            let df = DMatrix::from_fn(2 * n, m, |r, c| self.fs[c + 1][r] - self.fs[c][r]);
            let dx = DMatrix::from_fn(2 * n, m, |r, c| self.xs[c + 1][r] - self.xs[c][r]);
            if let Ok(gamma) = df.clone().svd(true, true).solve(&f, 1e-10) {
                out = &x + &f - (dx + df) * gamma;
            }
        }
        [out.rows(0, n).iter().copied().collect(), out.rows(n, n).iter().copied().collect()]
    }
}

/// Interior angles of every triangle from midpoint-metric edge lengths.
pub fn triangle_angles(mesh: &SurfaceMesh) -> Vec<[f64; 3]> {
    let model = mesh.params.model();
    mesh.triangles
        .iter()
        .map(|t| {
            let p = |k: usize| &mesh.vertices[t[k]];
            // l[k] is the edge opposite corner k
            let l = [
                segment_length(&model, p(1), p(2)),
                segment_length(&model, p(2), p(0)),
                segment_length(&model, p(0), p(1)),
            ];
            let mut ang = [0.0; 3];
            for k in 0..3 {
                let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
                ang[k] = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos();
            }
            ang
        })
        .collect()
}

/// Vertex areas (one third of the incident triangle areas).
pub fn vertex_areas(mesh: &SurfaceMesh) -> Vec<f64> {
    let model = mesh.params.model();
    let mut out = vec![0.0; mesh.num_vertices()];
    for t in &mesh.triangles {
        let (a, _) = triangle_area_grad(&model, [&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]]);
        for v in t {
            out[*v] += a / 3.0;
        }
    }
    out
}

/// Intrinsic Gauss curvature by angle defect per unit vertex area. The boundary arcs are
/// geodesics, so boundary vertices use π (and corners π/2) as the flat reference angle.
pub fn gauss_curvature(mesh: &SurfaceMesh) -> Vec<f64> {
    let angles = triangle_angles(mesh);
    let mut sum = vec![0.0; mesh.num_vertices()];
    for (t, a) in mesh.triangles.iter().zip(&angles) {
        for k in 0..3 {
            sum[t[k]] += a[k];
        }
    }
    let area = vertex_areas(mesh);
    (0..mesh.num_vertices())
        .map(|v| {
            let tag = mesh.tags[v];
            let flat = if tag.is_interior() {
                2.0 * PI
            } else if tag.is_corner() {
                FRAC_PI_2
            } else {
                PI
            };
            (flat - sum[v]) / area[v]
        })
        .collect()
}

/// Angle function ν = ⟨Ñ, ξ⟩ at each vertex.
pub fn angle_function(mesh: &SurfaceMesh) -> &[f64] {
    &mesh.nu
}
