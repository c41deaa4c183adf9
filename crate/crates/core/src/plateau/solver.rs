use super::mesh::{SolverConfig, SurfaceMesh};
use crate::ambient::{screw_motion, BergerModel, PointM};
use crate::error::{Error, Result};
use crate::geometry::Metric3;
use crate::sparse::{cg, SparseSym};
use nalgebra::Vector2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub area: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Area of the triangle (a, b, c) in the metric frozen at its centroid, with the gradient with
/// respect to the three vertex positions.
pub fn triangle_area_grad(model: &BergerModel, p: [&PointM; 3]) -> (f64, [PointM; 3]) {
    let c = (p[0] + p[1] + p[2]) / 3.0;
    let g = model.metric(&c);
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let (ge1, ge2) = (g * e1, g * e2);
    let a = e1.dot(&ge1);
    let b = e1.dot(&ge2);
    let d = e2.dot(&ge2);
    let det = (a * d - b * b).max(0.0);
    let area = 0.5 * det.sqrt();
    if area < 1e-300 {
        return (0.0, [PointM::zeros(); 3]);
    }
    let s = 1.0 / (8.0 * area);
    let d1 = (ge1 * d - ge2 * b) * (2.0 * s);
    let d2 = (ge2 * a - ge1 * b) * (2.0 * s);
    let dg = model.metric_grad(&c);
    let mut dc = PointM::zeros();
    for k in 0..3 {
        let m = &dg[k];
        dc[k] = s * (d * e1.dot(&(m * e1)) + a * e2.dot(&(m * e2)) - 2.0 * b * e1.dot(&(m * e2)));
    }
    let dc = dc / 3.0;
    (area, [dc - d1 - d2, d1 + dc, d2 + dc])
}

struct Graph<'a> {
    mesh: &'a SurfaceMesh,
    model: BergerModel,
}

impl Graph<'_> {
    fn point(&self, v: usize, t: f64) -> PointM {
        let q: &Vector2<f64> = &self.mesh.base[v];
        screw_motion(&self.mesh.params, t, &PointM::new(q.x, q.y, 0.0))
    }

    fn local(&self, tri: &[usize; 3], t: [f64; 3]) -> (f64, [f64; 3]) {
        let p = [self.point(tri[0], t[0]), self.point(tri[1], t[1]), self.point(tri[2], t[2])];
        let (a, g) = triangle_area_grad(&self.model, [&p[0], &p[1], &p[2]]);
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = g[k].dot(&self.mesh.params.killing(&p[k]));
        }
        (a, out)
    }

    fn area(&self, fiber: &[f64]) -> f64 {
        self.mesh
            .triangles
            .par_iter()
            .map(|tri| self.local(tri, [fiber[tri[0]], fiber[tri[1]], fiber[tri[2]]]).0)
            .sum()
    }

    /// Total area, gradient in t, and vertex areas.
    fn gradient(&self, fiber: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let nv = fiber.len();
        let locals: Vec<_> = self
            .mesh
            .triangles
            .par_iter()
            .map(|tri| self.local(tri, [fiber[tri[0]], fiber[tri[1]], fiber[tri[2]]]))
            .collect();
        let mut grad = vec![0.0; nv];
        let mut varea = vec![0.0; nv];
        let mut total = 0.0;
        for (tri, (a, g)) in self.mesh.triangles.iter().zip(&locals) {
            total += a;
            for k in 0..3 {
                grad[tri[k]] += g[k];
                varea[tri[k]] += a / 3.0;
            }
        }
        (total, grad, varea)
    }

    fn hessian_blocks(&self, fiber: &[f64]) -> Vec<[[f64; 3]; 3]> {
        let h = 1e-5;
        self.mesh
            .triangles
            .par_iter()
            .map(|tri| {
                let t0 = [fiber[tri[0]], fiber[tri[1]], fiber[tri[2]]];
                let mut m = [[0.0; 3]; 3];
                for j in 0..3 {
                    let mut tp = t0;
                    let mut tm = t0;
                    tp[j] += h;
                    tm[j] -= h;
                    let gp = self.local(tri, tp).1;
                    let gm = self.local(tri, tm).1;
                    for i in 0..3 {
                        m[i][j] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                for i in 0..3 {
                    for j in 0..i {
                        let s = 0.5 * (m[i][j] + m[j][i]);
                        m[i][j] = s;
                        m[j][i] = s;
                    }
                }
                m
            })
            .collect()
    }
}

/// Pointwise discrete mean curvature |∂A/∂t_v| / (2 A_v |u_v|) over the free vertices.
fn residual(mesh: &SurfaceMesh, grad: &[f64], varea: &[f64], free: &[usize]) -> f64 {
    let model = mesh.params.model();
    free.iter()
        .map(|&v| {
            let p = &mesh.vertices[v];
            let x = mesh.params.killing(p);
            let xn = x.dot(&(model.metric(p) * x)).sqrt();
            grad[v].abs() / (2.0 * varea[v] * mesh.u[v].abs().max(1e-3 * xn))
        })
        .fold(0.0, f64::max)
}

/// Minimize area over the fiber coordinates of the interior vertices by damped Newton steps.
pub fn solve(mesh: &mut SurfaceMesh, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let tol = config.tolerance_for(&mesh.params);
    let free = mesh.free_vertices();
    let nv = mesh.num_vertices();
    let mut index = vec![usize::MAX; nv];
    for (k, &v) in free.iter().enumerate() {
        index[v] = k;
    }
    let nf = free.len();
    let mut mu = config.damping;
    let mut history = Vec::new();
    let mut fiber = mesh.fiber.clone();

    for it in 0..=config.max_iterations {
        let graph = Graph { mesh, model: mesh.params.model() };
        let (area, grad, varea) = graph.gradient(&fiber);
        let res = residual(mesh, &grad, &varea, &free);
        history.push(res);
        if !res.is_finite() {
            return Err(Error::NonConvergence { iterations: it, residual: res, history });
        }
        if res < tol || nf == 0 {
            return Ok(SolveReport { iterations: it, residual: res, tolerance: tol, area, converged: true, history });
        }
        if it == config.max_iterations {
            break;
        }
        let blocks = graph.hessian_blocks(&fiber);
        let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        for (tri, m) in mesh.triangles.iter().zip(&blocks) {
            for i in 0..3 {
                let fi = index[tri[i]];
                if fi == usize::MAX {
                    continue;
                }
                for j in 0..3 {
                    let fj = index[tri[j]];
                    if fj != usize::MAX {
                        rows.push(fi);
                        cols.push(fj);
                        vals.push(m[i][j]);
                    }
                }
            }
        }
        let hess = SparseSym::from_triplets(nf, &rows, &cols, &vals);
        let diag: Vec<f64> = hess.diagonal().iter().map(|d| d.abs().max(1e-12)).collect();
        let rhs: Vec<f64> = free.iter().map(|&v| -grad[v]).collect();

        let mut accepted = false;
        while mu < 1e8 {
            let shifted = hess.shifted(mu, &diag);
            let mut step = vec![0.0; nf];
            let out = cg(&shifted, &rhs, &mut step, config.cg_tolerance, config.cg_max_iterations);
            if out.indefinite {
                mu = (mu * 10.0).max(1e-8);
                continue;
            }
            let slope: f64 = -step.iter().zip(&rhs).map(|(s, r)| s * r).sum::<f64>();
            if slope >= 0.0 || !slope.is_finite() {
                mu = (mu * 10.0).max(1e-8);
                continue;
            }
            let mut alpha = 1.0;
            let slack = 1e-14 * area.abs();
            while alpha > 1e-6 {
                let mut trial = fiber.clone();
                for (k, &v) in free.iter().enumerate() {
                    trial[v] += alpha * step[k];
                }
                let a_new = graph.area(&trial);
                if a_new <= area + 1e-4 * alpha * slope + slack {
                    fiber = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if accepted {
                if alpha == 1.0 {
                    mu = (mu * 0.1).max(1e-12);
                }
                break;
            }
            mu = (mu * 10.0).max(1e-8);
        }
        if !accepted {
            break;
        }
        mesh.set_fiber(fiber.clone());
        mesh.compute_normals(false);
    }
    let graph = Graph { mesh, model: mesh.params.model() };
    let (_, grad, varea) = graph.gradient(&fiber);
    let res = residual(mesh, &grad, &varea, &free);
    Err(Error::NonConvergence { iterations: history.len(), residual: res, history })
}
