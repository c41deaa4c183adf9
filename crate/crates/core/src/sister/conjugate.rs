use crate::ambient::{AmbientParams, PointM, PointProd, ProductSpace};
use crate::error::{Error, Result};
use crate::geometry::{cross_g, segment_length, Metric3};
use crate::plateau::{SurfaceMesh, VertexTag};
use crate::polygon::ArcTag;
use crate::sparse::{cg, SparseSym};
use nalgebra::{Matrix3, Rotation3, Vector2, Vector3, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

pub type Frame4 = [Vector4<f64>; 3];

/// Sister H-surface in M²(κ)×ℝ with the combinatorics of the source disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugateMesh {
    pub params: AmbientParams,
    pub lambda: f64,
    pub vertices: Vec<PointProd>,
    /// Adapted frames (e₁, e₂, N) at each vertex.
    pub frames: Vec<Frame4>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<VertexTag>,
    pub nu: Vec<f64>,
    /// Jacobi function of the source, carried over through the isometry.
    pub u: Vec<f64>,
    pub arc_vertices: [Vec<usize>; 4],
    /// Largest closure mismatch (position + frame) over edges outside the spanning tree.
    pub holonomy: f64,
    /// Closure mismatch around each triangle.
    pub face_holonomy: Vec<f64>,
    /// Largest relative difference between source and target edge lengths.
    pub isometry_error: f64,
    /// Largest |⟨N, ξ⟩ − ν|.
    pub nu_mismatch: f64,
    /// Largest |T − J T̃| in the adapted frame.
    pub tangent_mismatch: f64,
    pub mean_edge_length: f64,
}

/// Infinitesimal rotation and tangential displacement carried by one oriented edge.
#[derive(Clone, Copy, Debug)]
struct EdgeData {
    omega: Vector3<f64>,
    d: Vector2<f64>,
}

fn source_frames(mesh: &SurfaceMesh) -> Vec<Matrix3<f64>> {
    let model = mesh.params.model();
    (0..mesh.num_vertices())
        .map(|v| {
            let p = mesh.vertices[v];
            let g = model.metric(&p);
            let n = mesh.normals[v];
            let (pxi, _) = mesh.tangents(v);
            let t = pxi - n * pxi.dot(&(g * n));
            let e1 = t / t.dot(&(g * t)).sqrt();
            let e2 = cross_g(&g, &n, &e1);
            Matrix3::from_columns(&[e1, e2, n])
        })
        .collect()
}

fn transport_matrix<M: Metric3>(model: &M, at: &PointM, dx: &PointM) -> Matrix3<f64> {
    let gam = model.christoffel(at);
    let mut a = Matrix3::zeros();
    for k in 0..3 {
        let row = dx.transpose() * gam[k];
        for j in 0..3 {
            a[(k, j)] = -row[j];
        }
    }
    a.exp()
}

fn source_edge<M: Metric3>(model: &M, x: &[PointM], frames: &[Matrix3<f64>], i: usize, j: usize) -> EdgeData {
    let dx = x[j] - x[i];
    let mid = (x[i] + x[j]) * 0.5;
    let p = transport_matrix(model, &mid, &dx);
    let r = (p * frames[i]).transpose() * model.metric(&x[j]) * frames[j];
    let rot = Rotation3::from_matrix(&r);
    let omega = rot.scaled_axis();
    let half = transport_matrix(model, &((x[i] + mid) * 0.5), &(dx * 0.5));
    let m = half * frames[i] * Rotation3::new(omega * 0.5).into_inner();
    let gd = model.metric(&mid) * dx;
    EdgeData { omega, d: Vector2::new(m.column(0).dot(&gd), m.column(1).dot(&gd)) }
}

/// Rotation generator of the sister frame: same connection, shape operator J S̃ + H.
fn sister_omega(e: &EdgeData, h: f64, j_sign: f64, h_sign: f64) -> Vector3<f64> {
    // skew entries: Ω[1][0] = ω_z, Ω[2][0] = −ω_y, Ω[2][1] = ω_x
    let sigma = Vector2::new(-e.omega.y, e.omega.x);
    let js = Vector2::new(-sigma.y, sigma.x) * j_sign;
    let s = js + e.d * (h_sign * h);
    Vector3::new(s.y, -s.x, e.omega.z)
}

fn combine(f: &Frame4, r: &Matrix3<f64>) -> Frame4 {
    let mut out = [Vector4::zeros(); 3];
    for (b, o) in out.iter_mut().enumerate() {
        for a in 0..3 {
            *o += f[a] * r[(a, b)];
        }
    }
    out
}

fn orthonormalize(space: &ProductSpace, p: &PointProd, f: &Frame4) -> Frame4 {
    let mut out = [Vector4::zeros(); 3];
    for k in 0..3 {
        let mut v = space.project_tangent(p, &f[k]);
        for o in out.iter().take(k) {
            v -= o * space.inner(&v, o);
        }
        out[k] = v / space.norm(&v);
    }
    out
}

fn step(
    space: &ProductSpace,
    p: &PointProd,
    f: &Frame4,
    e: &EdgeData,
    h: f64,
    signs: (f64, f64),
) -> (PointProd, Frame4) {
    let w = sister_omega(e, h, signs.0, signs.1);
    let half = combine(f, Rotation3::new(w * 0.5).matrix());
    let v = half[0] * e.d.x + half[1] * e.d.y;
    let full = combine(f, Rotation3::new(w).matrix());
    let (q, moved) = space.exp_transport(p, &v, &full);
    let frame = [moved[0], moved[1], moved[2]];
    (q, orthonormalize(space, &q, &frame))
}

fn mismatch(space: &ProductSpace, a: &(PointProd, Frame4), b: &(PointProd, Frame4)) -> f64 {
    let pos = space.distance(&a.0, &b.0);
    let fr = (0..3).map(|k| space.norm(&(a.1[k] - b.1[k]))).fold(0.0, f64::max);
    pos + fr
}

/// Least-squares positions in ℝ⁴ matching every edge chord from both of its ends, root pinned,
/// projected back onto M²(κ)×ℝ. Frames are re-projected onto the new tangent spaces.
fn refit_positions(
    space: &ProductSpace,
    edges: &[(usize, usize)],
    data: &HashMap<(usize, usize), EdgeData>,
    state: &[(PointProd, Frame4)],
    root: usize,
    h: f64,
    signs: (f64, f64),
) -> Result<Vec<(PointProd, Frame4)>> {
    let nv = state.len();
    let chords: Vec<Vector4<f64>> = edges
        .par_iter()
        .map(|&(a, b)| {
            let fwd = step(space, &state[a].0, &state[a].1, &data[&(a, b)], h, signs).0.to_r4() - state[a].0.to_r4();
            let bwd = step(space, &state[b].0, &state[b].1, &data[&(b, a)], h, signs).0.to_r4() - state[b].0.to_r4();
            (fwd - bwd) * 0.5
        })
        .collect();
    let fixed = state[root].0.to_r4();
    let (mut rows, mut cols, mut vals) = (vec![root], vec![root], vec![1.0]);
    let mut rhs = vec![Vector4::zeros(); nv];
    rhs[root] = fixed;
    for (&(a, b), d) in edges.iter().zip(&chords) {
        for (p, q, sgn) in [(a, b, -1.0), (b, a, 1.0)] {
            if p == root {
                continue;
            }
            rows.push(p);
            cols.push(p);
            vals.push(1.0);
            rhs[p] += d * sgn;
            if q == root {
                rhs[p] += fixed;
            } else {
                rows.push(p);
                cols.push(q);
                vals.push(-1.0);
            }
        }
    }
    let lap = SparseSym::from_triplets(nv, &rows, &cols, &vals);
    let mut coords = vec![vec![0.0; nv]; 4];
    for (k, c) in coords.iter_mut().enumerate() {
        let b: Vec<f64> = rhs.iter().map(|r| r[k]).collect();
        *c = state.iter().map(|s| s.0.to_r4()[k]).collect();
        let out = cg(&lap, &b, c, 1e-13, 20 * nv);
        if !out.converged && out.residual > 1e-9 {
            return Err(Error::Validation(format!("position refit did not converge ({:.2e})", out.residual)));
        }
    }
    Ok((0..nv)
        .map(|v| {
            let base = space.project_point(&Vector3::new(coords[0][v], coords[1][v], coords[2][v]));
            let p = PointProd { base, height: coords[3][v] };
            (p, orthonormalize(space, &p, &state[v].1))
        })
        .collect())
}

pub(crate) const J_SIGN: f64 = -1.0;
pub(crate) const H_SIGN: f64 = 1.0;

/// Sister surface by integrating the conjugate frame equations along a breadth-first spanning
/// tree rooted at vertex 1̃, which is sent to the origin of Γ with h̃₀ leaving along +x.
pub fn conjugate_mesh(mesh: &SurfaceMesh) -> Result<ConjugateMesh> {
    conjugate_with_signs(mesh, (J_SIGN, H_SIGN))
}

#[doc(hidden)]
pub fn conjugate_with_signs(mesh: &SurfaceMesh, signs: (f64, f64)) -> Result<ConjugateMesh> {
    let params = mesh.params;
    let model = params.model();
    let space = params.target();
    let nv = mesh.num_vertices();
    let frames = source_frames(mesh);
    let edges = mesh.edges();
    let x = &mesh.vertices;
    let data: HashMap<(usize, usize), EdgeData> = edges
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            [((a, b), source_edge(&model, x, &frames, a, b)), ((b, a), source_edge(&model, x, &frames, b, a))]
        })
        .collect();
    let mut adj = vec![Vec::new(); nv];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }

    let root = mesh.corner(1);
    let nu_root = mesh.nu[root];
    // h̃₀ leaves 1̃ along +x in the source chart
    let g = model.metric(&x[root]);
    let t0 = PointM::x();
    let w = Vector2::new(frames[root].column(0).dot(&(g * t0)), frames[root].column(1).dot(&(g * t0)));
    let (ca, sa) = (w.y.atan2(w.x).cos(), w.y.atan2(w.x).sin());
    let o = space.origin();
    let ex = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let ey = Vector4::new(0.0, 1.0, 0.0, 0.0);
    let xi = Vector4::new(0.0, 0.0, 0.0, 1.0);
    // frame with N = ν ξ plus the horizontal part required by |N| = 1
    let tilt = (1.0 - nu_root * nu_root).max(0.0).sqrt();
    let n_root = xi * nu_root + ey * tilt;
    let b_dir = if tilt > 1e-6 { xi * (-tilt) + ey * nu_root } else { ey };
    let b = if space.volume(&o, &ex, &b_dir, &n_root) > 0.0 { b_dir } else { -b_dir };
    let f_root = orthonormalize(&space, &o, &[ex * ca - b * sa, ex * sa + b * ca, n_root]);

    let mut pos: Vec<Option<(PointProd, Frame4)>> = vec![None; nv];
    pos[root] = Some((o, f_root));
    let mut parent = vec![usize::MAX; nv];
    let mut queue = VecDeque::from([root]);
    while let Some(a) = queue.pop_front() {
        let cur = pos[a].expect("visited");
        for &b in &adj[a] {
            if pos[b].is_none() {
                pos[b] = Some(step(&space, &cur.0, &cur.1, &data[&(a, b)], params.h, signs));
                parent[b] = a;
                queue.push_back(b);
            }
        }
    }
    if pos.iter().any(|p| p.is_none()) {
        return Err(Error::Validation("mesh graph is disconnected".into()));
    }
    let state: Vec<(PointProd, Frame4)> = pos.into_iter().map(|p| p.expect("all visited")).collect();

    let holonomy = edges
        .par_iter()
        .filter(|&&(a, b)| parent[a] != b && parent[b] != a)
        .map(|&(a, b)| {
            let fwd = step(&space, &state[a].0, &state[a].1, &data[&(a, b)], params.h, signs);
            mismatch(&space, &fwd, &state[b])
        })
        .reduce(|| 0.0, f64::max);
    let face_holonomy: Vec<f64> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let mut s = state[t[0]];
            for k in 0..3 {
                s = step(&space, &s.0, &s.1, &data[&(t[k], t[(k + 1) % 3])], params.h, signs);
            }
            mismatch(&space, &s, &state[t[0]])
        })
        .collect();

    let state = refit_positions(&space, &edges, &data, &state, root, params.h, signs)?;

    let mut isometry_error: f64 = 0.0;
    let mut total = 0.0;
    for &(a, b) in &edges {
        let ls = segment_length(&model, &x[a], &x[b]);
        let lt = space.distance(&state[a].0, &state[b].0);
        total += ls;
        isometry_error = isometry_error.max((lt - ls).abs() / ls);
    }

    let mut nu_mismatch: f64 = 0.0;
    let mut tangent_mismatch: f64 = 0.0;
    for v in 0..nv {
        let f = &state[v].1;
        nu_mismatch = nu_mismatch.max((f[2][3] - mesh.nu[v]).abs());
        let g = model.metric(&x[v]);
        let tt = Vector2::new((g * frames[v].column(0))[2], (g * frames[v].column(1))[2]);
        let jt = Vector2::new(-tt.y, tt.x) * signs.0;
        tangent_mismatch = tangent_mismatch.max((Vector2::new(f[0][3], f[1][3]) - jt).norm());
    }

    // v lies in the slice t = 0
    let vs = &mesh.arc_vertices[ArcTag::V as usize];
    let shift = vs.iter().map(|&v| state[v].0.height).sum::<f64>() / vs.len() as f64;
    let vertices = state.iter().map(|s| PointProd { base: s.0.base, height: s.0.height - shift }).collect();

    Ok(ConjugateMesh {
        params,
        lambda: mesh.lambda,
        vertices,
        frames: state.iter().map(|s| s.1).collect(),
        triangles: mesh.triangles.clone(),
        tags: mesh.tags.clone(),
        nu: mesh.nu.clone(),
        u: mesh.u.clone(),
        arc_vertices: mesh.arc_vertices.clone(),
        holonomy,
        face_holonomy,
        isometry_error,
        nu_mismatch,
        tangent_mismatch,
        mean_edge_length: total / edges.len() as f64,
    })
}
