use super::mesh::{SurfaceMesh, VertexTag};
use super::{triangle_angles, vertex_areas};
use crate::error::{Error, Result};
use crate::polygon::ArcTag;
use crate::sparse::{cg, SparseSym};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    /// ‖L u‖ in the dual H¹ norm divided by ‖u‖ in H¹, over non-Dirichlet vertices.
    pub residual: f64,
    /// Smallest u over interior vertices.
    pub min_interior_u: f64,
    pub interior_positive: bool,
    /// First Dirichlet eigenvalue of −L on the reflected annulus A_λ.
    pub lambda1: f64,
    pub annulus_vertices: usize,
    pub annulus_euler: i64,
}

/// Discrete pieces of L = Δ + q with q = −2K + 4H² + κ(1+ν²): cotangent stiffness (as triplets),
/// lumped mass and the potential.
pub struct JacobiOperator {
    pub n: usize,
    pub stiffness: Vec<(usize, usize, f64)>,
    pub mass: Vec<f64>,
    pub potential: Vec<f64>,
}

pub fn jacobi_operator(mesh: &SurfaceMesh) -> JacobiOperator {
    let n = mesh.num_vertices();
    let angles = triangle_angles(mesh);
    let mut stiffness = Vec::with_capacity(mesh.triangles.len() * 9);
    for (t, a) in mesh.triangles.iter().zip(&angles) {
        for k in 0..3 {
            let (i, j) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            let w = 0.5 / a[k].tan();
            stiffness.push((i, i, w));
            stiffness.push((j, j, w));
            stiffness.push((i, j, -w));
            stiffness.push((j, i, -w));
        }
    }
    let (h, kappa) = (mesh.params.h, mesh.params.kappa);
    let potential = (0..n)
        .map(|v| -2.0 * mesh.gauss[v] + 4.0 * h * h + kappa * (1.0 + mesh.nu[v] * mesh.nu[v]))
        .collect();
    JacobiOperator { n, stiffness, mass: vertex_areas(mesh), potential }
}

fn restrict(
    triplets: &[(usize, usize, f64)],
    index: &[usize],
    nf: usize,
    diag_extra: &[(usize, f64)],
) -> SparseSym {
    let (mut r, mut c, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for &(i, j, w) in triplets {
        if index[i] != usize::MAX && index[j] != usize::MAX {
            r.push(index[i]);
            c.push(index[j]);
            v.push(w);
        }
    }
    for &(i, w) in diag_extra {
        if index[i] != usize::MAX {
            r.push(index[i]);
            c.push(index[i]);
            v.push(w);
        }
    }
    SparseSym::from_triplets(nf, &r, &c, &v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual of L u on the mixed problem: Dirichlet on h̃₁ ∪ h̃₂, natural on h̃₀ and ṽ.
pub fn jacobi_residual(mesh: &SurfaceMesh, op: &JacobiOperator) -> Result<f64> {
    let dirichlet = |v: usize| mesh.tags[v].on(ArcTag::H1) || mesh.tags[v].on(ArcTag::H2);
    let mut index = vec![usize::MAX; op.n];
    let mut rows = Vec::new();
    for v in 0..op.n {
        if !dirichlet(v) {
            index[v] = rows.len();
            rows.push(v);
        }
    }
    let nf = rows.len();
    let u = &mesh.u;
    let mut lu = vec![0.0; op.n];
    for &(i, j, w) in &op.stiffness {
        lu[i] -= w * u[j];
    }
    let r: Vec<f64> = rows.iter().map(|&v| lu[v] + op.mass[v] * op.potential[v] * u[v]).collect();
    let extra: Vec<(usize, f64)> = (0..op.n).map(|v| (v, op.mass[v])).collect();
    let h1 = restrict(&op.stiffness, &index, nf, &extra);
    let mut z = vec![0.0; nf];
    let out = cg(&h1, &r, &mut z, 1e-10, 20 * nf + 100);
    if !out.converged {
        return Err(Error::NonConvergence { iterations: out.iterations, residual: out.residual, history: vec![] });
    }
    // ‖u‖_{H¹} over the whole mesh
    let s_full = SparseSym::from_triplets(
        op.n,
        &op.stiffness.iter().map(|t| t.0).chain(0..op.n).collect::<Vec<_>>(),
        &op.stiffness.iter().map(|t| t.1).chain(0..op.n).collect::<Vec<_>>(),
        &op.stiffness.iter().map(|t| t.2).chain(op.mass.iter().copied()).collect::<Vec<_>>(),
    );
    let unorm = dot(u, &s_full.mul(u)).sqrt();
    Ok(dot(&r, &z).max(0.0).sqrt() / unorm)
}

/// Union-find over copies × vertices.
struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The fundamental annulus as four reflected copies of the disk glued along h̃₀ and ṽ.
pub struct Annulus {
    /// Annulus vertex id of (copy, disk vertex).
    pub map: Vec<[usize; 4]>,
    pub n: usize,
    pub triangles: Vec<[usize; 3]>,
    /// Annulus vertices lying on an image of h̃₁ or h̃₂.
    pub dirichlet: Vec<bool>,
}

impl Annulus {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.n as i64 - edges.len() as i64 + self.triangles.len() as i64
    }
}

pub fn reflected_annulus(mesh: &SurfaceMesh) -> Annulus {
    annulus_gluing(&mesh.tags, &mesh.triangles)
}

/// Copies 0..4 are the disk, its mirror across h̃₀, its mirror across ṽ, and both; copies 1
/// and 2 have reversed triangle orientation.
pub fn annulus_gluing(tags: &[VertexTag], triangles: &[[usize; 3]]) -> Annulus {
    let nv = tags.len();
    let mut dsu = Dsu((0..4 * nv).collect());
    for v in 0..nv {
        if tags[v].on(ArcTag::H0) {
            dsu.union(v, nv + v);
            dsu.union(2 * nv + v, 3 * nv + v);
        }
        if tags[v].on(ArcTag::V) {
            dsu.union(v, 2 * nv + v);
            dsu.union(nv + v, 3 * nv + v);
        }
    }
    let mut id = vec![usize::MAX; 4 * nv];
    let mut n = 0;
    for k in 0..4 * nv {
        let r = dsu.find(k);
        if id[r] == usize::MAX {
            id[r] = n;
            n += 1;
        }
        id[k] = id[r];
    }
    let map: Vec<[usize; 4]> = (0..nv).map(|v| [id[v], id[nv + v], id[2 * nv + v], id[3 * nv + v]]).collect();
    let mut out = Vec::with_capacity(4 * triangles.len());
    for c in 0..4 {
        let flip = c == 1 || c == 2;
        for t in triangles {
            let m = [map[t[0]][c], map[t[1]][c], map[t[2]][c]];
            out.push(if flip { [m[0], m[2], m[1]] } else { m });
        }
    }
    let mut dirichlet = vec![false; n];
    for v in 0..nv {
        if tags[v].on(ArcTag::H1) || tags[v].on(ArcTag::H2) {
            for c in 0..4 {
                dirichlet[map[v][c]] = true;
            }
        }
    }
    Annulus { map, n, triangles: out, dirichlet }
}

/// First Dirichlet eigenvalue of −L = S − M q on the annulus by shifted inverse iteration
/// started from the reflected u.
pub fn annulus_first_eigenvalue(mesh: &SurfaceMesh, op: &JacobiOperator) -> Result<(f64, Annulus)> {
    let ann = reflected_annulus(mesh);
    let nv = mesh.num_vertices();
    let mut triplets = Vec::with_capacity(4 * op.stiffness.len());
    let mut mass = vec![0.0; ann.n];
    let mut mq = vec![0.0; ann.n];
    for c in 0..4 {
        for &(i, j, w) in &op.stiffness {
            triplets.push((ann.map[i][c], ann.map[j][c], w));
        }
        for v in 0..nv {
            mass[ann.map[v][c]] += op.mass[v];
            mq[ann.map[v][c]] += op.mass[v] * op.potential[v];
        }
    }
    let mut index = vec![usize::MAX; ann.n];
    let mut free = Vec::new();
    for v in 0..ann.n {
        if !ann.dirichlet[v] {
            index[v] = free.len();
            free.push(v);
        }
    }
    let nf = free.len();
    let m_f: Vec<f64> = free.iter().map(|&v| mass[v]).collect();
    let a = restrict(&triplets, &index, nf, &(0..ann.n).map(|v| (v, -mq[v])).collect::<Vec<_>>());

    let mut x = vec![0.0; nf];
    for v in 0..nv {
        for c in 0..4 {
            let k = index[ann.map[v][c]];
            if k != usize::MAX {
                x[k] = mesh.u[v].abs();
            }
        }
    }
    let rayleigh = |x: &[f64]| dot(x, &a.mul(x)) / dot(x, &x.iter().zip(&m_f).map(|(a, b)| a * b).collect::<Vec<_>>());
    let mut shift = 1.0;
    let mut lambda = rayleigh(&x);
    for _ in 0..200 {
        let shifted = a.shifted(shift, &m_f);
        let rhs: Vec<f64> = x.iter().zip(&m_f).map(|(a, b)| a * b).collect();
        let mut y = x.clone();
        let out = cg(&shifted, &rhs, &mut y, 1e-12, 20 * nf + 100);
        if out.indefinite {
            shift *= 4.0;
            continue;
        }
        let norm = dot(&y, &y.iter().zip(&m_f).map(|(a, b)| a * b).collect::<Vec<_>>()).sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
        let next = rayleigh(&x);
        let done = (next - lambda).abs() <= 1e-10 * (1.0 + next.abs());
        lambda = next;
        if done {
            return Ok((lambda, ann));
        }
    }
    Err(Error::NonConvergence { iterations: 200, residual: lambda, history: vec![] })
}

pub fn stability_report(mesh: &SurfaceMesh) -> Result<StabilityReport> {
    let op = jacobi_operator(mesh);
    let residual = jacobi_residual(mesh, &op)?;
    let min_interior_u = (0..mesh.num_vertices())
        .filter(|&v| mesh.tags[v].is_interior())
        .map(|v| mesh.u[v])
        .fold(f64::INFINITY, f64::min);
    let (lambda1, ann) = annulus_first_eigenvalue(mesh, &op)?;
    Ok(StabilityReport {
        residual,
        min_interior_u,
        interior_positive: min_interior_u > 0.0,
        lambda1,
        annulus_vertices: ann.n,
        annulus_euler: ann.euler_characteristic(),
    })
}
