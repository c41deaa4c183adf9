use crate::ambient::{omega_residual, screw_motion, AmbientParams, PointM};
use crate::error::{Error, Result};
use crate::geometry::Metric3;
use crate::polygon::{ArcTag, GeodesicPolygon};
use nalgebra::{DMatrix, DVector, Matrix3, Vector2};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Set of boundary arcs a vertex lies on; empty for interior vertices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexTag(pub u8);

impl VertexTag {
    pub fn with(self, arc: ArcTag) -> Self {
        VertexTag(self.0 | (1 << arc as u8))
    }

    pub fn on(&self, arc: ArcTag) -> bool {
        self.0 & (1 << arc as u8) != 0
    }

    pub fn is_interior(&self) -> bool {
        self.0 == 0
    }

    pub fn is_corner(&self) -> bool {
        self.0.count_ones() >= 2
    }

    /// Boundary arc for non-corner boundary vertices.
    pub fn arc(&self) -> Option<ArcTag> {
        if self.0.count_ones() == 1 {
            ArcTag::ALL.into_iter().find(|a| self.on(*a))
        } else {
            None
        }
    }

    pub fn label(&self) -> String {
        use ArcTag::*;
        if self.is_interior() {
            return "interior".into();
        }
        if let Some(a) = self.arc() {
            return a.name().into();
        }
        let corners: Vec<&str> = [(H0, H2, "1"), (H0, H1, "2"), (H1, V, "3"), (V, H2, "4")]
            .iter()
            .filter(|(a, b, _)| self.on(*a) && self.on(*b))
            .map(|c| c.2)
            .collect();
        format!("corner{}", corners.join("="))
    }
}

/// Resolution and stopping parameters of the Plateau solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid cells per side of the parameter square.
    pub resolution: usize,
    pub max_iterations: usize,
    /// Discrete mean-curvature tolerance; defaults to 1e-4·√κ_b.
    pub tolerance: Option<f64>,
    /// Initial Levenberg damping of the Newton steps.
    pub damping: f64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    /// Amplitude of a seeded perturbation of the initial fiber coordinate (0 disables it).
    pub perturbation: f64,
    pub seed: u64,
    /// Re-solves after adapting the base grid to the fans of the surface at h̃₁ and h̃₂.
    pub fan_passes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            max_iterations: 60,
            tolerance: None,
            damping: 1e-4,
            cg_tolerance: 1e-10,
            cg_max_iterations: 4000,
            perturbation: 0.0,
            seed: 0,
            fan_passes: 40,
        }
    }
}

impl SolverConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        Self { resolution, ..Self::default() }
    }

    /// Resolution giving edges of about `edge` metric units along the longest boundary arc.
    pub fn from_edge_length(poly: &GeodesicPolygon, edge: f64) -> Result<Self> {
        if !(edge > 0.0) {
            return Err(Error::InvalidParameter("edge length must be positive".into()));
        }
        let longest = poly.arcs.iter().map(|a| a.length()).fold(0.0, f64::max);
        Ok(Self::with_resolution(((longest / edge).ceil() as usize).max(4)))
    }

    pub fn tolerance_for(&self, params: &AmbientParams) -> f64 {
        self.tolerance.unwrap_or(1e-4 * params.kappa_b.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 4 {
            return Err(Error::InvalidParameter("resolution must be at least 4".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("tolerance must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Triangulated disk spanning Γ̃_λ, stored as a Killing graph: each vertex is Φ_t(q, 0) for a base
/// point q in the upper half-disk and a fiber coordinate t.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub params: AmbientParams,
    pub lambda: f64,
    /// Grid cells per side; grid node (i, j) has index j·(n+1) + i.
    pub n: usize,
    pub node_vertex: Vec<usize>,
    pub vertex_node: Vec<usize>,
    pub base: Vec<Vector2<f64>>,
    pub fiber: Vec<f64>,
    pub vertices: Vec<PointM>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<VertexTag>,
    pub normals: Vec<PointM>,
    pub nu: Vec<f64>,
    pub u: Vec<f64>,
    pub gauss: Vec<f64>,
    /// Vertex ids along each arc, in the order of the arc parameter, with the parameter values.
    pub arc_vertices: [Vec<usize>; 4],
    pub arc_params: [Vec<f64>; 4],
    /// Sign applied to the parametric normal so that u > 0 inside.
    pub orientation: f64,
    /// Per-row angles at which the base grid lines leave (R, 0) and (−R, 0).
    pub fans: [Vec<f64>; 2],
    /// Grid coordinate ξ of each column.
    pub columns: Vec<f64>,
}

/// Base point of grid node (ξ, η): a point on the circular arc through (±R, 0) that leaves both
/// ends at angle ψ, where ψ blends the row's angles ψ₁ at (R, 0) and ψ₂ at (−R, 0).
fn base_map(r: f64, xi: f64, eta: f64, psi1: f64, psi2: f64) -> Vector2<f64> {
    let f0 = 0.5 * (1.0 - (FRAC_PI_4 - 0.5 * PI * xi).tan());
    let f = (1.0 - eta) * f0 + eta * xi;
    let a = 1.0 - 2.0 * f;
    let w = xi * xi * (3.0 - 2.0 * xi);
    let psi = (1.0 - w) * psi1 + w * psi2;
    if psi < 1e-4 {
        let p2 = psi * psi;
        Vector2::new(r * a * (1.0 + p2 * (1.0 - a * a) / 6.0), r * psi * (1.0 - a * a) * 0.5)
    } else {
        let s = psi.sin();
        Vector2::new(r * (psi * a).sin() / s, r * ((psi * a).cos() - psi.cos()) / s)
    }
}

/// Column coordinates ξ_i, geometrically refined towards ξ = 0 when h̃₁ is short compared to
/// the grid spacing: log ξ'(s) = ln(ε)(1 − s/s₁)³ on [0, s₁], then constant.
pub fn column_grading(n: usize, lambda: f64) -> Vec<f64> {
    let d = (lambda - FRAC_PI_2).abs();
    let target = 0.16 * d;
    let uniform: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    if d < 1e-9 || target * n as f64 >= 1.0 {
        return uniform;
    }
    const S1: f64 = 0.5;
    let density = |eps: f64, s: f64| {
        let x = (1.0 - s / S1).max(0.0);
        (eps.ln() * x * x * x).exp()
    };
    // cumulative density by Simpson on a fine grid, normalized to [0, 1]
    let build = |eps: f64| {
        let sub = 16;
        let m = n * sub;
        let h = 1.0 / m as f64;
        let mut acc = vec![0.0; m + 1];
        for k in 0..m {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            acc[k + 1] = acc[k] + h / 6.0 * (density(eps, a) + 4.0 * density(eps, 0.5 * (a + b)) + density(eps, b));
        }
        let total = acc[m];
        (0..=n).map(|i| acc[i * sub] / total).collect::<Vec<f64>>()
    };
    // first spacing decreases monotonically with ε; bisect in log ε
    let (mut lo, mut hi) = (1e-4f64.ln(), 0.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if build(mid.exp())[1] > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    build(hi.exp())
}

fn boundary_fiber(lambda: f64, xi: f64, eta: f64) -> f64 {
    eta * (lambda - FRAC_PI_2 + PI * xi)
}

/// Least-squares fit ψ(η) = (π/2)η + η(1−η)·P(2η−1) with P of degree 6 in the Chebyshev basis;
/// None if the fit is not strictly increasing.
fn smooth_fan(raw: &[f64]) -> Option<Vec<f64>> {
    const DEG: usize = 7;
    let n = raw.len() - 1;
    let rows = n - 1;
    let mut a = DMatrix::zeros(rows, DEG);
    let mut b = DVector::zeros(rows);
    let basis = |eta: f64| {
        let x = 2.0 * eta - 1.0;
        let mut t = [0.0; DEG];
        t[0] = 1.0;
        t[1] = x;
        for k in 2..DEG {
            t[k] = 2.0 * x * t[k - 1] - t[k - 2];
        }
        t.map(|v| v * eta * (1.0 - eta))
    };
    for j in 1..n {
        let eta = j as f64 / n as f64;
        for (k, v) in basis(eta).iter().enumerate() {
            a[(j - 1, k)] = *v;
        }
        b[j - 1] = raw[j] - FRAC_PI_2 * eta;
    }
    let c = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let fan: Vec<f64> = (0..=n)
        .map(|j| {
            let eta = j as f64 / n as f64;
            FRAC_PI_2 * eta + basis(eta).iter().zip(c.iter()).map(|(x, y)| x * y).sum::<f64>()
        })
        .collect();
    fan.windows(2).all(|w| w[1] > w[0]).then_some(fan)
}

pub(crate) fn fan_distance(a: &[Vec<f64>; 2], b: &[Vec<f64>; 2]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
    }
}

impl SurfaceMesh {
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    pub fn vertex_at(&self, i: usize, j: usize) -> usize {
        self.node_vertex[self.node(i, j)]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn corner(&self, label: u8) -> usize {
        let n = self.n;
        match label {
            1 => self.vertex_at(n, 0),
            2 => self.vertex_at(0, 0),
            3 => self.vertex_at(0, n),
            _ => self.vertex_at(n, n),
        }
    }

    /// Vertices whose fiber coordinate is an unknown of the area minimization.
    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices()).filter(|&v| self.tags[v].is_interior()).collect()
    }

    /// Fan map of the current surface at h̃₁ (side 0) or h̃₂ (side 1): pairs (base direction,
    /// fiber) extrapolated to the fan point from the first two grid columns.
    fn fan_samples(&self, side: usize) -> Vec<(f64, f64)> {
        let n = self.n;
        let r = self.params.radius();
        let (cols, sx) = if side == 0 { ([1, 2], 1.0) } else { ([n - 1, n - 2], -1.0) };
        let ends = [(0.0, 0.0), (FRAC_PI_2, self.fiber[self.vertex_at(if side == 0 { 0 } else { n }, n)])];
        let mut out = vec![ends[0]];
        for j in 1..n {
            let polar = |i: usize| {
                let q = self.base[self.vertex_at(i, j)];
                let (dx, dy) = (sx * r - q.x, q.y);
                ((dx * dx + dy * dy).sqrt(), dy.atan2(sx * dx), self.fiber[self.vertex_at(i, j)])
            };
            let (r1, a1, t1) = polar(cols[0]);
            let (r2, a2, t2) = polar(cols[1]);
            let c = r1 / (r2 - r1);
            out.push((a1 - (a2 - a1) * c, t1 - (t2 - t1) * c));
        }
        out.push(ends[1]);
        out
    }

    /// Fans that re-aim the base grid rows so that row j meets the surface fan at h̃₁ and h̃₂ in
    /// the direction belonging to its boundary vertex.
    pub fn fan_target(&self) -> [Vec<f64>; 2] {
        let n = self.n;
        let mut out = self.fans.clone();
        for (side, target_fan) in out.iter_mut().enumerate() {
            let col = if side == 0 { 0 } else { n };
            if self.vertex_at(col, 1) == self.vertex_at(col, 0) {
                continue;
            }
            let mut samples = self.fan_samples(side);
            let dir = (samples[n].1 - samples[0].1).signum();
            if dir == 0.0 {
                continue;
            }
            // monotone in both coordinates
            for k in 1..samples.len() {
                let prev = samples[k - 1];
                let cur = &mut samples[k];
                cur.0 = cur.0.clamp(prev.0, FRAC_PI_2);
                if (cur.1 - prev.1) * dir < 0.0 {
                    cur.1 = prev.1;
                }
            }
            let mut raw = vec![0.0; n + 1];
            for j in 1..n {
                let target = self.fiber[self.vertex_at(col, j)];
                let k = samples.partition_point(|s| (s.1 - target) * dir < 0.0).clamp(1, samples.len() - 1);
                let (a, b) = (samples[k - 1], samples[k]);
                let span = b.1 - a.1;
                let s = if span.abs() > 1e-300 { (target - a.1) / span } else { 0.5 };
                raw[j] = a.0 + s.clamp(0.0, 1.0) * (b.0 - a.0);
            }
            if let Some(f) = smooth_fan(&raw) {
                *target_fan = f;
            }
        }
        out
    }

    /// Install new fans and move the base points accordingly; keeps the old ones (and returns
    /// false) if a fan is not strictly increasing.
    pub fn set_fans(&mut self, fans: [Vec<f64>; 2]) -> bool {
        let n = self.n;
        if fans.iter().any(|f| f.len() != n + 1 || !f.windows(2).all(|w| w[1] > w[0])) {
            return false;
        }
        self.fans = fans;
        let r = self.params.radius();
        for v in 0..self.num_vertices() {
            let node = self.vertex_node[v];
            let (i, j) = (node % (n + 1), node / (n + 1));
            let (xi, eta) = (self.columns[i], j as f64 / n as f64);
            self.base[v] = base_map(r, xi, eta, self.fans[0][j], self.fans[1][j]);
            self.vertices[v] = self.position_of(&self.base[v], self.fiber[v]);
        }
        true
    }

    /// One plain fan update; returns the largest angle change.
    pub fn adapt_fans(&mut self) -> f64 {
        let target = self.fan_target();
        let change = fan_distance(&target, &self.fans);
        self.set_fans(target);
        change
    }

    /// Refresh the arc parameters of h̃₁ and h̃₂ from the fiber coordinates of their vertices.
    pub fn update_arc_params(&mut self) {
        for (tag, off) in [(ArcTag::H1, FRAC_PI_4), (ArcTag::H2, -FRAC_PI_4)] {
            let k = tag as usize;
            for (idx, &v) in self.arc_vertices[k].iter().enumerate() {
                self.arc_params[k][idx] = 0.5 * self.fiber[v] + off;
            }
        }
    }

    /// Whether the sliding vertices kept their order along h̃₁ and h̃₂.
    pub fn arcs_ordered(&self) -> bool {
        [ArcTag::H1, ArcTag::H2].iter().all(|&tag| {
            let p = &self.arc_params[tag as usize];
            let dir = (p[p.len() - 1] - p[0]).signum();
            dir == 0.0 || p.windows(2).all(|w| (w[1] - w[0]) * dir > 0.0)
        })
    }

    pub fn position_of(&self, q: &Vector2<f64>, t: f64) -> PointM {
        screw_motion(&self.params, t, &PointM::new(q.x, q.y, 0.0))
    }

    pub fn set_fiber(&mut self, fiber: Vec<f64>) {
        self.fiber = fiber;
        for v in 0..self.vertices.len() {
            self.vertices[v] = self.position_of(&self.base[v], self.fiber[v]);
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        let mut e: Vec<_> = set.into_iter().collect();
        e.sort_unstable();
        e
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    pub fn max_omega_residual(&self) -> f64 {
        self.vertices.iter().map(|p| omega_residual(&self.params, p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean metric edge length.
    pub fn mean_edge_length(&self) -> f64 {
        let model = self.params.model();
        let e = self.edges();
        let s: f64 = e
            .iter()
            .map(|&(a, b)| crate::geometry::segment_length(&model, &self.vertices[a], &self.vertices[b]))
            .sum();
        s / e.len() as f64
    }

    /// Coordinate derivative of positions along ξ (dir 0) or η (dir 1) at node (i, j), fourth
    /// order: centered inside, off-centered within two nodes of the grid boundary.
    fn grid_derivative(&self, i: usize, j: usize, dir: usize) -> PointM {
        let n = self.n;
        let p = |k: usize| {
            let (a, b) = if dir == 0 { (k, j) } else { (i, k) };
            self.vertices[self.vertex_at(a, b)]
        };
        let k = if dir == 0 { i } else { j };
        let h = 1.0 / n as f64;
        let one_sided = |base: usize, sgn: f64, off: usize| {
            let q = |m: usize| if sgn > 0.0 { p(base + m) } else { p(base - m) };
            let d = if off == 0 {
                q(0) * -25.0 + q(1) * 48.0 - q(2) * 36.0 + q(3) * 16.0 - q(4) * 3.0
            } else {
                q(0) * -3.0 - q(1) * 10.0 + q(2) * 18.0 - q(3) * 6.0 + q(4)
            };
            d * (sgn / (12.0 * h))
        };
        match k {
            0 => one_sided(0, 1.0, 0),
            1 => one_sided(0, 1.0, 1),
            _ if k == n => one_sided(n, -1.0, 0),
            _ if k == n - 1 => one_sided(n, -1.0, 1),
            _ => (p(k - 2) - p(k + 2) + (p(k + 1) - p(k - 1)) * 8.0) / (12.0 * h),
        }
    }

    /// Parametric tangent frame (∂ξ, ∂η) at a vertex, using its first grid node.
    pub fn tangents(&self, v: usize) -> (PointM, PointM) {
        let node = self.vertex_node[v];
        let (i, j) = (node % (self.n + 1), node / (self.n + 1));
        (self.grid_derivative(i, j, 0), self.grid_derivative(i, j, 1))
    }

    /// Unnormalized normal covector p_ξ × p_η at vertex v; falls back to the two boundary
    /// tangents for a vertex where a collapsed arc makes p_η vanish.
    fn normal_covector(&self, v: usize) -> PointM {
        let (a, b) = self.tangents(v);
        let c = a.cross(&b);
        if c.norm() > 1e-10 * a.norm() * b.norm().max(1e-300) && b.norm() > 1e-12 {
            return c;
        }
        let nodes: Vec<usize> = (0..self.node_vertex.len()).filter(|&k| self.node_vertex[k] == v).collect();
        let w = self.n + 1;
        let (lo, hi) = (nodes[0], *nodes.last().expect("vertex has a node"));
        let ta = self.grid_derivative(lo % w, lo / w, 0);
        let tb = self.grid_derivative(hi % w, hi / w, 0);
        // p_η ≈ (ξ-tangent at the top − ξ-tangent at the bottom) near a collapsed column
        ta.cross(&(tb - ta))
    }

    /// Recompute Ñ, ν and the Jacobi function u = −⟨X̃, Ñ⟩; fixes the orientation so that u > 0
    /// on most interior vertices unless `keep_orientation` is set. With this orientation the
    /// conjugate surface has positive mean curvature and ℓ₀ > 0.
    pub fn compute_normals(&mut self, keep_orientation: bool) {
        let model = self.params.model();
        let nv = self.vertices.len();
        let mut raw = Vec::with_capacity(nv);
        for v in 0..nv {
            let c = self.normal_covector(v);
            let g = model.metric(&self.vertices[v]);
            let ginv: Matrix3<f64> = g.try_inverse().expect("metric invertible");
            let nvec = ginv * c;
            let len = nvec.dot(&c).max(1e-300).sqrt();
            raw.push(nvec / len);
        }
        if !keep_orientation {
            let mut score = 0.0;
            for v in 0..nv {
                if self.tags[v].is_interior() {
                    let g = model.metric(&self.vertices[v]);
                    score -= self.params.killing(&self.vertices[v]).dot(&(g * raw[v])).signum();
                }
            }
            self.orientation = if score >= 0.0 { 1.0 } else { -1.0 };
        }
        self.normals = raw.into_iter().map(|n| n * self.orientation).collect();
        self.nu = vec![0.0; nv];
        self.u = vec![0.0; nv];
        for v in 0..nv {
            let p = self.vertices[v];
            let g = model.metric(&p);
            let gn = g * self.normals[v];
            self.nu[v] = gn.z.clamp(-1.0, 1.0);
            self.u[v] = -self.params.killing(&p).dot(&gn);
        }
    }
}

/// Killing-graph initial disk: base points on circular arcs through (±R, 0) filling the upper
/// half-disk, fiber coordinate by transfinite interpolation of the boundary data.
pub fn initial_mesh(poly: &GeodesicPolygon, config: &SolverConfig) -> Result<SurfaceMesh> {
    config.validate()?;
    let params = poly.params;
    let lambda = poly.lambda;
    let n = config.resolution;
    let r = params.radius();
    let w = n + 1;
    let h1_degenerate = (0.5 * lambda - FRAC_PI_4).abs() < 1e-9;
    let columns = column_grading(n, lambda);

    let mut node_vertex = vec![usize::MAX; w * w];
    let mut vertex_node = Vec::new();
    let mut base = Vec::new();
    let mut fiber = Vec::new();
    let mut tags = Vec::new();
    let mut rng = Lcg(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    for j in 0..w {
        for i in 0..w {
            let k = j * w + i;
            if h1_degenerate && i == 0 && j > 0 {
                node_vertex[k] = node_vertex[0];
                continue;
            }
            let (xi, eta) = (columns[i], j as f64 / n as f64);
            let mut tag = VertexTag::default();
            if j == 0 {
                tag = tag.with(ArcTag::H0);
            }
            if j == n {
                tag = tag.with(ArcTag::V);
            }
            if i == 0 {
                tag = tag.with(ArcTag::H1);
                if h1_degenerate {
                    tag = tag.with(ArcTag::V);
                }
            }
            if i == n {
                tag = tag.with(ArcTag::H2);
            }
            let mut t = boundary_fiber(lambda, xi, eta);
            if tag.is_interior() && config.perturbation != 0.0 {
                t += config.perturbation * rng.next() * 16.0 * xi * (1.0 - xi) * eta * (1.0 - eta);
            }
            node_vertex[k] = base.len();
            vertex_node.push(k);
            base.push(base_map(r, xi, eta, 0.5 * PI * eta, 0.5 * PI * eta));
            fiber.push(t);
            tags.push(tag);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = node_vertex[j * w + i];
            let b = node_vertex[j * w + i + 1];
            let c = node_vertex[(j + 1) * w + i + 1];
            let d = node_vertex[(j + 1) * w + i];
            let pair = [[a, b, c], [a, c, d]];
            for t in pair {
                if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                    triangles.push(t);
                }
            }
        }
    }

    let mut arc_vertices: [Vec<usize>; 4] = Default::default();
    let mut arc_params: [Vec<f64>; 4] = Default::default();
    for k in 0..w {
        let x = k as f64 / n as f64;
        arc_vertices[ArcTag::H0 as usize].push(node_vertex[k]);
        arc_params[ArcTag::H0 as usize].push(FRAC_PI_2 * columns[k]);
        arc_vertices[ArcTag::H1 as usize].push(node_vertex[k * w]);
        arc_params[ArcTag::H1 as usize].push(FRAC_PI_4 + x * (0.5 * lambda - FRAC_PI_4));
        arc_vertices[ArcTag::H2 as usize].push(node_vertex[k * w + n]);
        arc_params[ArcTag::H2 as usize].push(-FRAC_PI_4 + x * (0.5 * lambda + FRAC_PI_4));
        arc_vertices[ArcTag::V as usize].push(node_vertex[n * w + k]);
        arc_params[ArcTag::V as usize].push(FRAC_PI_2 * columns[k]);
    }

    let nv = base.len();
    let mut mesh = SurfaceMesh {
        params,
        lambda,
        n,
        node_vertex,
        vertex_node,
        base,
        fiber: vec![0.0; nv],
        vertices: vec![PointM::zeros(); nv],
        triangles,
        tags,
        normals: vec![PointM::zeros(); nv],
        nu: vec![0.0; nv],
        u: vec![0.0; nv],
        gauss: vec![0.0; nv],
        arc_vertices,
        arc_params,
        orientation: 1.0,
        fans: [(0..w).map(|j| 0.5 * PI * j as f64 / n as f64).collect(), (0..w).map(|j| 0.5 * PI * j as f64 / n as f64).collect()],
        columns,
    };
    mesh.set_fiber(fiber);

    // the grid boundary must reproduce the polygon samples
    for tag in ArcTag::ALL {
        let arc = poly.arc(tag);
        for (v, s) in mesh.arc_vertices[tag as usize].iter().zip(&mesh.arc_params[tag as usize]) {
            let d = (mesh.vertices[*v] - arc.position(*s)).norm();
            if d > 1e-9 {
                return Err(Error::Initialization(format!(
                    "boundary vertex on {} misses the polygon by {d:e}",
                    tag.name()
                )));
            }
        }
    }
    let omega = mesh.max_omega_residual();
    if omega > 1e-9 {
        return Err(Error::Initialization(format!("initial mesh leaves Omega by {omega:e}")));
    }
    mesh.compute_normals(false);
    Ok(mesh)
}
