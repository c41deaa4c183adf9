use super::conjugate::ConjugateMesh;
use crate::ambient::{PointProd, ProductSpace, VerticalPlane};
use crate::error::{Error, Result};
use crate::plateau::{annulus_gluing, VertexTag};
use crate::polygon::ArcTag;
use nalgebra::{Vector3, Vector4};
use serde::{Deserialize, Serialize};

/// A totally geodesic mirror of M²(κ)×ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mirror {
    Plane(VerticalPlane),
    /// Horizontal slice at the given height.
    Slice(f64),
}

impl Mirror {
    pub fn reflect(&self, space: &ProductSpace, p: &PointProd) -> PointProd {
        match self {
            Mirror::Plane(pl) => space.reflect(pl, p),
            Mirror::Slice(h) => PointProd { base: p.base, height: 2.0 * h - p.height },
        }
    }

    pub fn reflect_vector(&self, space: &ProductSpace, v: &Vector4<f64>) -> Vector4<f64> {
        match self {
            Mirror::Plane(pl) => space.reflect_vector(pl, v),
            Mirror::Slice(_) => Vector4::new(v[0], v[1], v[2], -v[3]),
        }
    }

    /// Image of another mirror under this reflection.
    pub fn reflect_mirror(&self, space: &ProductSpace, other: &Mirror) -> Mirror {
        match (self, other) {
            (Mirror::Plane(a), Mirror::Plane(b)) => Mirror::Plane(space.reflect_plane(a, b)),
            (Mirror::Slice(a), Mirror::Slice(b)) => Mirror::Slice(2.0 * a - b),
            (_, o) => *o,
        }
    }

    /// Signed distance of p to the mirror.
    pub fn distance(&self, space: &ProductSpace, p: &PointProd) -> f64 {
        match self {
            Mirror::Plane(pl) => space.plane_distance(pl, &p.base),
            Mirror::Slice(h) => p.height - h,
        }
    }
}

/// How well the conjugate boundary lies in its mirrors, and how orthogonally the surface meets
/// them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryFits {
    /// Total-least-squares vertical planes P₀, P₁, P₂ through h₀, h₁, h₂.
    pub planes: [VerticalPlane; 3],
    /// Largest distance of an hᵢ vertex to Pᵢ.
    pub plane_residual: [f64; 3],
    /// Largest distance of an h₀ vertex to the coordinate plane Γ×ℝ.
    pub p0_offset: f64,
    /// Largest |height| over v.
    pub slice_residual: f64,
    /// Largest |⟨N, n⟩| along h₀, h₁, h₂ (n the unit normal of Pᵢ) and |⟨N, ξ⟩| along v.
    pub dihedral: [f64; 4],
    /// Largest angle between P₀ and P₁, P₂ measured from a right angle.
    pub plane_orthogonality: f64,
    pub mean_edge_length: f64,
}

impl BoundaryFits {
    /// Plane and slice fits within `edges` mean edge lengths.
    pub fn within(&self, edges: f64) -> bool {
        let tol = edges * self.mean_edge_length;
        self.plane_residual.iter().all(|r| *r <= tol) && self.slice_residual <= tol && self.p0_offset <= tol
    }
}

fn unit_plane_normal(space: &ProductSpace, plane: &VerticalPlane, p: &PointProd) -> Vector4<f64> {
    let n = if space.kappa < 0.0 { Vector3::new(plane.n.x, plane.n.y, -plane.n.z) } else { plane.n };
    let t = space.project_base_tangent(&p.base, &n);
    let v = Vector4::new(t.x, t.y, t.z, 0.0);
    v / space.norm(&v)
}

/// Vertical plane through the base point b meeting Γ×ℝ orthogonally.
fn plane_orthogonal_to_p0(space: &ProductSpace, b: &Vector3<f64>) -> VerticalPlane {
    if space.kappa == 0.0 {
        return VerticalPlane { n: Vector3::x(), c: b.x };
    }
    let j = |v: Vector3<f64>| if space.kappa < 0.0 { Vector3::new(v.x, v.y, -v.z) } else { v };
    let n = j(j(*b).cross(&j(Vector3::y())));
    let norm = space.form(&n, &n).abs().sqrt();
    VerticalPlane { n: n / norm, c: 0.0 }
}

fn arc_points(conj: &ConjugateMesh, tag: ArcTag) -> Vec<usize> {
    let mut vs = conj.arc_vertices[tag as usize].clone();
    vs.dedup();
    vs
}

fn fit_arc_plane(space: &ProductSpace, conj: &ConjugateMesh, tag: ArcTag) -> VerticalPlane {
    let vs = arc_points(conj, tag);
    let pts: Vec<Vector3<f64>> = vs.iter().map(|&v| conj.vertices[v].base).collect();
    let spread = pts.iter().map(|p| space.base_distance(p, &pts[0])).fold(0.0, f64::max);
    if spread < 0.5 * conj.mean_edge_length {
        // a collapsed arc only fixes a point; the plane is the one orthogonal to P₀ through it
        plane_orthogonal_to_p0(space, &pts[0])
    } else {
        space.fit_plane(&pts)
    }
}

pub fn boundary_fits(conj: &ConjugateMesh) -> BoundaryFits {
    let space = conj.params.target();
    let tags = [ArcTag::H0, ArcTag::H1, ArcTag::H2];
    let planes = tags.map(|t| fit_arc_plane(&space, conj, t));
    let mut plane_residual = [0.0; 3];
    let mut dihedral = [0.0; 4];
    for (k, tag) in tags.iter().enumerate() {
        for v in arc_points(conj, *tag) {
            let p = &conj.vertices[v];
            plane_residual[k] = f64::max(plane_residual[k], space.plane_distance(&planes[k], &p.base).abs());
            let n = unit_plane_normal(&space, &planes[k], p);
            dihedral[k] = f64::max(dihedral[k], space.inner(&conj.frames[v][2], &n).abs());
        }
    }
    let p0 = space.plane_p0();
    let p0_offset = arc_points(conj, ArcTag::H0)
        .iter()
        .map(|&v| space.plane_distance(&p0, &conj.vertices[v].base).abs())
        .fold(0.0, f64::max);
    let mut slice_residual: f64 = 0.0;
    for v in arc_points(conj, ArcTag::V) {
        slice_residual = slice_residual.max(conj.vertices[v].height.abs());
        dihedral[3] = f64::max(dihedral[3], conj.frames[v][2][3].abs());
    }
    // angle between two vertical planes at a common point of Γ×ℝ
    let orth = |pl: &VerticalPlane| {
        let q = conj.vertices[arc_points(conj, ArcTag::H0)[0]];
        let a = unit_plane_normal(&space, &planes[0], &q);
        let b = unit_plane_normal(&space, pl, &q);
        space.inner(&a, &b).abs()
    };
    BoundaryFits {
        planes,
        plane_residual,
        p0_offset,
        slice_residual,
        dihedral,
        plane_orthogonality: orth(&planes[1]).max(orth(&planes[2])),
        mean_edge_length: conj.mean_edge_length,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionMode {
    /// Four copies across P₀ and the slice: the fundamental annulus A_λ.
    Annulus,
    /// The given number of annuli, alternately reflected across the images of P₂ and P₁.
    Full { copies: usize },
}

/// Mirror images of the conjugate piece welded into one mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extension {
    pub mode: ExtensionMode,
    pub vertices: Vec<PointProd>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vector4<f64>>,
    pub nu: Vec<f64>,
    /// Jacobi function: kept by P₀ and the slice, negated by P₁ and P₂.
    pub u: Vec<f64>,
    /// Largest distance between mirror images that were welded into one vertex.
    pub weld_mismatch: f64,
    /// Full mode with an even number of copies: largest distance between the last copy's free
    /// seam and the first copy's h₁ seam.
    pub seam_mismatch: Option<f64>,
    /// Whether the closing seam was welded (seam mismatch within two edge lengths).
    pub closed: bool,
    pub mean_edge_length: f64,
    pub euler_characteristic: i64,
}

/// One (transformed) copy of a piece: per-vertex position, normal and u.
#[derive(Clone)]
struct Piece {
    pos: Vec<PointProd>,
    normal: Vec<Vector4<f64>>,
    u: Vec<f64>,
}

impl Piece {
    fn reflected(&self, space: &ProductSpace, m: &Mirror, negate_u: bool) -> Piece {
        let s = if negate_u { -1.0 } else { 1.0 };
        Piece {
            pos: self.pos.iter().map(|p| m.reflect(space, p)).collect(),
            normal: self.normal.iter().map(|n| m.reflect_vector(space, n)).collect(),
            u: self.u.iter().map(|u| u * s).collect(),
        }
    }
}

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

/// Weld pieces with the same combinatorics into one mesh. `flip[k]` reverses the triangle
/// orientation of piece k; `glue` lists (piece, vertex, piece, vertex) pairs.
fn weld(
    space: &ProductSpace,
    pieces: &[Piece],
    triangles: &[[usize; 3]],
    flip: &[bool],
    glue: &[(usize, usize, usize, usize)],
) -> (Vec<PointProd>, Vec<[usize; 3]>, Vec<Vector4<f64>>, Vec<f64>, f64) {
    let nv = pieces[0].pos.len();
    let mut dsu = Dsu((0..pieces.len() * nv).collect());
    for &(a, v, b, w) in glue {
        dsu.union(a * nv + v, b * nv + w);
    }
    let mut id = vec![usize::MAX; pieces.len() * nv];
    let mut rep = Vec::new();
    let mut mismatch: f64 = 0.0;
    for k in 0..pieces.len() * nv {
        let r = dsu.find(k);
        if id[r] == usize::MAX {
            id[r] = rep.len();
            rep.push(r);
        }
        id[k] = id[r];
        let (a, b) = (&pieces[r / nv].pos[r % nv], &pieces[k / nv].pos[k % nv]);
        mismatch = mismatch.max(space.distance(a, b));
    }
    let vertices = rep.iter().map(|&r| pieces[r / nv].pos[r % nv]).collect();
    let normals = rep.iter().map(|&r| pieces[r / nv].normal[r % nv]).collect();
    let u = rep.iter().map(|&r| pieces[r / nv].u[r % nv]).collect();
    let mut tris = Vec::with_capacity(pieces.len() * triangles.len());
    for (k, fl) in flip.iter().enumerate() {
        for t in triangles {
            let m = t.map(|v| id[k * nv + v]);
            tris.push(if *fl { [m[0], m[2], m[1]] } else { m });
        }
    }
    (vertices, tris, normals, u, mismatch)
}

fn euler(nv: usize, tris: &[[usize; 3]]) -> i64 {
    let mut edges = std::collections::HashSet::new();
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    nv as i64 - edges.len() as i64 + tris.len() as i64
}

fn mean_edge(space: &ProductSpace, pos: &[PointProd], tris: &[[usize; 3]]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for t in tris {
        for k in 0..3 {
            total += space.distance(&pos[t[k]], &pos[t[(k + 1) % 3]]);
            count += 1;
        }
    }
    total / count.max(1) as f64
}

/// Extend the conjugate piece by mirror symmetries. Fails if the boundary is not in its mirrors
/// within two edge lengths.
pub fn symmetry_extend(conj: &ConjugateMesh, mode: ExtensionMode) -> Result<Extension> {
    let space = conj.params.target();
    let fits = boundary_fits(conj);
    if !fits.within(2.0) {
        return Err(Error::Validation(format!(
            "boundary off its mirrors: planes {:?}, slice {:.3e}, edge {:.3e}",
            fits.plane_residual, fits.slice_residual, fits.mean_edge_length
        )));
    }
    let base = Piece {
        pos: conj.vertices.clone(),
        normal: conj.frames.iter().map(|f| f[2]).collect(),
        u: conj.u.clone(),
    };
    let p0 = Mirror::Plane(fits.planes[0]);
    let slice = Mirror::Slice(0.0);
    let annulus_pieces = vec![
        base.clone(),
        base.reflected(&space, &p0, false),
        base.reflected(&space, &slice, false),
        base.reflected(&space, &p0, false).reflected(&space, &slice, false),
    ];
    let ann = annulus_gluing(&conj.tags, &conj.triangles);
    let nv = conj.vertices.len();
    let mut glue = Vec::new();
    for v in 0..nv {
        for c in 1..4 {
            if ann.map[v][c] == ann.map[v][0] {
                glue.push((0, v, c, v));
            }
        }
        if ann.map[v][3] == ann.map[v][1] {
            glue.push((1, v, 3, v));
        }
        if ann.map[v][3] == ann.map[v][2] {
            glue.push((2, v, 3, v));
        }
    }
    let flips = [false, true, true, false];
    let (apos, atri, anorm, au, amis) = weld(&space, &annulus_pieces, &conj.triangles, &flips, &glue);

    if mode == ExtensionMode::Annulus {
        let nu = anorm.iter().map(|n: &Vector4<f64>| n[3]).collect();
        let mean = mean_edge(&space, &apos, &atri);
        let chi = euler(apos.len(), &atri);
        return Ok(Extension {
            mode,
            vertices: apos,
            triangles: atri,
            normals: anorm,
            nu,
            u: au,
            weld_mismatch: amis,
            seam_mismatch: None,
            closed: false,
            mean_edge_length: mean,
            euler_characteristic: chi,
        });
    }
    let ExtensionMode::Full { copies } = mode else { unreachable!() };
    if copies == 0 {
        return Err(Error::InvalidParameter("at least one copy is required".into()));
    }
    // annulus vertices on h₁ and h₂
    let mut seam = [Vec::new(), Vec::new()];
    for v in 0..nv {
        for (k, tag) in [ArcTag::H1, ArcTag::H2].iter().enumerate() {
            if conj.tags[v].on(*tag) {
                for c in 0..4 {
                    seam[k].push(ann.map[v][c]);
                }
            }
        }
    }
    for s in seam.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    let annulus = Piece { pos: apos, normal: anorm, u: au };
    let mut near = Mirror::Plane(fits.planes[1]);
    let mut far = Mirror::Plane(fits.planes[2]);
    let mut pieces = vec![annulus];
    let mut glue = Vec::new();
    for k in 1..copies {
        let prev = &pieces[k - 1];
        let next = prev.reflected(&space, &far, true);
        // copy k−1 meets copy k along its far seam: h₂ images for even k−1, h₁ images for odd
        for &v in &seam[if (k - 1) % 2 == 0 { 1 } else { 0 }] {
            glue.push((k - 1, v, k, v));
        }
        let new_far = far.reflect_mirror(&space, &near);
        near = far;
        far = new_far;
        pieces.push(next);
    }
    let last = copies - 1;
    let free = &seam[if last % 2 == 0 { 1 } else { 0 }];
    let seam_mismatch = (last % 2 == 1).then(|| {
        free.iter()
            .map(|&v| space.distance(&pieces[last].pos[v], &pieces[0].pos[v]))
            .fold(0.0, f64::max)
    });
    let ann_mean = mean_edge(&space, &pieces[0].pos, &atri);
    let closed = seam_mismatch.is_some_and(|m| m <= 2.0 * ann_mean);
    if closed {
        for &v in free {
            glue.push((last, v, 0, v));
        }
    }
    let flips: Vec<bool> = (0..copies).map(|k| k % 2 == 1).collect();
    let (pos, tris, normals, u, mis) = weld(&space, &pieces, &atri, &flips, &glue);
    let nu = normals.iter().map(|n| n[3]).collect();
    let chi = euler(pos.len(), &tris);
    Ok(Extension {
        mode,
        vertices: pos,
        triangles: tris,
        normals,
        nu,
        u,
        weld_mismatch: mis.max(amis),
        seam_mismatch,
        closed,
        mean_edge_length: ann_mean,
        euler_characteristic: chi,
    })
}

/// w = ⟨X, N⟩ with X the unit-speed translation field along Γ.
pub fn horizontal_kernel(conj: &ConjugateMesh) -> Vec<f64> {
    let space = conj.params.target();
    conj.vertices
        .iter()
        .zip(&conj.frames)
        .map(|(p, f)| space.inner(&space.gamma_killing(p), &f[2]))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelReport {
    /// Smallest |w| over interior vertices, with w signed by its majority sign.
    pub min_interior: f64,
    /// Number of interior vertices where w has the minority sign.
    pub sign_changes: usize,
    /// Largest |w| over h₁ ∪ h₂.
    pub max_on_h12: f64,
}

pub fn horizontal_kernel_report(conj: &ConjugateMesh) -> KernelReport {
    let w = horizontal_kernel(conj);
    let interior: Vec<f64> =
        conj.tags.iter().zip(&w).filter(|(t, _)| t.is_interior()).map(|(_, w)| *w).collect();
    let pos = interior.iter().filter(|w| **w > 0.0).count();
    let sign = if 2 * pos >= interior.len() { 1.0 } else { -1.0 };
    let min_interior = interior.iter().map(|w| w * sign).fold(f64::INFINITY, f64::min);
    let sign_changes = interior.iter().filter(|w| **w * sign <= 0.0).count();
    let on12 = |t: &VertexTag| t.on(ArcTag::H1) || t.on(ArcTag::H2);
    let max_on_h12 = conj.tags.iter().zip(&w).filter(|(t, _)| on12(t)).map(|(_, w)| w.abs()).fold(0.0, f64::max);
    KernelReport { min_interior, sign_changes, max_on_h12 }
}

/// Rotational symmetry about Γ for κ = 0: every vertex's (x, r) pair, with r the distance to
/// the line Γ, lies on the meridian traced by h₀. Returns the largest distance in the (x, r)
/// half-plane to that meridian polyline.
pub fn rotational_defect(conj: &ConjugateMesh) -> Result<f64> {
    if conj.params.kappa != 0.0 {
        return Err(Error::InvalidParameter("rotational check needs kappa = 0".into()));
    }
    let xr = |p: &PointProd| (p.base.x, (p.base.y * p.base.y + p.height * p.height).sqrt());
    let profile: Vec<(f64, f64)> = arc_points(conj, ArcTag::H0).iter().map(|&v| xr(&conj.vertices[v])).collect();
    let dist = |q: (f64, f64)| {
        profile
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                let len2 = dx * dx + dy * dy;
                let t = if len2 > 0.0 { (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
                ((q.0 - a.0 - t * dx).powi(2) + (q.1 - a.1 - t * dy).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    Ok(conj.vertices.iter().map(|p| dist(xr(p))).fold(0.0, f64::max))
}
