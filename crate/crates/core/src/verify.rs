//! Desk-scale acceptance suite: twelve numbered criteria, each reported as pass/fail with the
//! measured quantities.

use crate::ambient::{theta_cover, theta_inverse, AmbientParams, PointM, PointS3};
use crate::cylinders::{foliation_certificate, foliation_certificate_grid, numeric_curvature, shape_operator_norm};
use crate::error::{Error, Result};
use crate::moduli::{ell0, ell0_cylinder, ell0_sphere, embedded_window, find_lambda_m};
use crate::plateau::{nodal_set, solve_plateau, stability_report, NodalEnd, SolverConfig, SurfaceMesh};
use crate::polygon::{build_polygon, ArcTag};
use crate::sister::{
    boundary_fits, boundary_observables, conjugate_mesh, rotational_defect, symmetry_extend, ConjugateMesh,
    ExtensionMode, Observables,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {:>7.1}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const NAMES: [&str; 12] = [
    "cylinder curvature",
    "shape-norm formula",
    "foliation nesting",
    "plateau limit cases",
    "ell0 anchors",
    "monotonicity suite",
    "angle-function structure",
    "stability",
    "conjugation integrity",
    "kappa=0 rotational oracle",
    "embeddedness window",
    "closure after 2m copies",
];

type SolKey = (u64, u64, u64, usize);

/// Solved disks and conjugates shared between criteria.
#[derive(Default)]
pub struct Lab {
    meshes: HashMap<SolKey, SurfaceMesh>,
    conjugates: HashMap<SolKey, ConjugateMesh>,
}

impl Lab {
    fn key(kappa: f64, h: f64, lambda: f64, n: usize) -> SolKey {
        (kappa.to_bits(), h.to_bits(), lambda.to_bits(), n)
    }

    pub fn mesh(&mut self, kappa: f64, h: f64, lambda: f64, n: usize) -> Result<&SurfaceMesh> {
        let key = Self::key(kappa, h, lambda, n);
        if !self.meshes.contains_key(&key) {
            let params = AmbientParams::new(kappa, h)?;
            let poly = build_polygon(&params, lambda, n + 1)?;
            let sol = solve_plateau(&poly, &SolverConfig::with_resolution(n))?;
            self.meshes.insert(key, sol.mesh);
        }
        Ok(&self.meshes[&key])
    }

    pub fn conjugate(&mut self, kappa: f64, h: f64, lambda: f64, n: usize) -> Result<&ConjugateMesh> {
        let key = Self::key(kappa, h, lambda, n);
        if !self.conjugates.contains_key(&key) {
            let c = conjugate_mesh(self.mesh(kappa, h, lambda, n)?)?;
            self.conjugates.insert(key, c);
        }
        Ok(&self.conjugates[&key])
    }

    pub fn observables(&mut self, kappa: f64, h: f64, lambda: f64, n: usize) -> Result<Observables> {
        boundary_observables(self.mesh(kappa, h, lambda, n)?)
    }
}

fn sci(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", "))
}

fn check(ok: bool, detail: String) -> Result<(bool, String)> {
    Ok((ok, detail))
}

fn c1_cylinder_curvature() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for h in [0.6, 1.0, 2.0] {
        for _ in 0..200 {
            let (t, u) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0 * PI));
            worst = worst.max((numeric_curvature(h, t, u)?.mean - h).abs());
        }
    }
    check(worst < 1e-5, format!("max |H_num - H| = {worst:.2e} (tol 1e-5)"))
}

fn c2_shape_norm() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for h in [0.6, 1.0, 2.0] {
        for _ in 0..200 {
            let (t, u) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0 * PI));
            worst = worst.max((numeric_curvature(h, t, u)?.norm2 - shape_operator_norm(h, u)?).abs());
        }
    }
    check(worst < 1e-5, format!("max |A|^2 error = {worst:.2e} (tol 1e-5)"))
}

fn c3_foliation() -> Result<(bool, String)> {
    let report = foliation_certificate([0.55, 10.0], 20, 400)?;
    let hs: Vec<f64> = report.pairs.iter().map(|p| p.h1).chain(report.pairs.last().map(|p| p.h2)).collect();
    let mut min_sep = f64::INFINITY;
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let r = foliation_certificate_grid(&[hs[i], hs[j]], 400)?;
            min_sep = min_sep.min(r.pairs[0].min_separation);
        }
    }
    check(
        report.passed && min_sep > 0.0 && hs.len() == 20,
        format!("{} leaves, min pairwise separation {min_sep:.3e}", hs.len()),
    )
}

/// Metric distance from p to the level set {f∘Θ = 0}, to first order.
fn level_distance(params: &AmbientParams, f: &dyn Fn(&PointS3) -> f64, p: &PointM) -> Result<f64> {
    let h = 1e-6;
    let val = f(&theta_cover(params, p)?);
    let mut df = PointM::zeros();
    for k in 0..3 {
        let mut e = PointM::zeros();
        e[k] = h;
        df[k] = (f(&theta_cover(params, &(p + e))?) - f(&theta_cover(params, &(p - e))?)) / (2.0 * h);
    }
    let g = params.model().metric_at(p);
    let ginv = g.try_inverse().ok_or_else(|| Error::Validation("singular metric".into()))?;
    Ok(val.abs() / df.dot(&(ginv * df)).sqrt())
}

fn closest_on_triangle(p: &PointM, a: &PointM, b: &PointM, c: &PointM) -> PointM {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Metric distance from p to the mesh (closest point in coordinates, measured with g at p), and
/// whether the closest triangle touches the boundary.
fn mesh_distance(mesh: &SurfaceMesh, p: &PointM) -> (f64, bool) {
    let g = mesh.params.model().metric_at(p);
    let mut best = (f64::INFINITY, false);
    let mut best_euclid = f64::INFINITY;
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|v| mesh.vertices[v]);
        let q = closest_on_triangle(p, &a, &b, &c);
        let d = (p - q).norm();
        if d < best_euclid {
            best_euclid = d;
            let dm = (p - q).dot(&(g * (p - q))).sqrt();
            best = (dm, t.iter().any(|&v| !mesh.tags[v].is_interior()));
        }
    }
    best
}

fn c4_limits(lab: &mut Lab) -> Result<(bool, String)> {
    let n = 100;
    let params = AmbientParams::new(1.0, 1.0)?;

    // λ = π/2: the umbrella centered at the corner h̃₀ ∩ h̃₂
    let mesh = lab.mesh(1.0, 1.0, FRAC_PI_2, n)?;
    let edge = mesh.mean_edge_length();
    let center = theta_cover(&params, &mesh.vertices[mesh.corner(1)])?.fiber();
    let umb = |q: &PointS3| q.dot(&center);
    let mut d_umb = 0.0f64;
    for p in &mesh.vertices {
        d_umb = d_umb.max(level_distance(&params, &umb, p)?);
    }
    let nv_pi2 = mesh.num_vertices();

    // λ = 0: the spherical helicoid Im(z² + w²) = 0 and its real rotations (z, w) ↦ R_t(z, w)
    let mesh = lab.mesh(1.0, 1.0, 0.0, n)?;
    let edge0 = mesh.mean_edge_length();
    let hel = |q: &PointS3| (q.z * q.z + q.w * q.w).im;
    let mut d_hel = 0.0f64;
    for p in &mesh.vertices {
        d_hel = d_hel.max(level_distance(&params, &hel, p)?);
    }
    let t: f64 = 0.05;
    let (s, c) = t.sin_cos();
    let mut d_screw = 0.0f64;
    let mut used = 0;
    for (v, p) in mesh.vertices.iter().enumerate() {
        if !mesh.tags[v].is_interior() || v % 7 != 0 {
            continue;
        }
        let q = theta_cover(&params, p)?;
        let r = PointS3::new(q.z * c - q.w * s, q.z * s + q.w * c);
        let image = theta_inverse(&params, &r, p.z)?;
        let (d, near_boundary) = mesh_distance(mesh, &image);
        if !near_boundary {
            d_screw = d_screw.max(d);
            used += 1;
        }
    }
    let tol = 2.0 * edge.min(edge0);
    check(
        d_umb < 2.0 * edge && d_hel < 2.0 * edge0 && d_screw < 2.0 * edge0 && used > 100,
        format!(
            "umbrella dist {d_umb:.2e} ({nv_pi2} verts); helicoid dist {d_hel:.2e}, rotated-image dist {d_screw:.2e} over {used} verts; tol {tol:.2e}"
        ),
    )
}

fn c5_anchors() -> Result<(bool, String)> {
    let params = AmbientParams::new(1.0, 1.0)?;
    let cfg = SolverConfig::with_resolution(64);
    let a = ell0(&params, 0.0, &cfg)?;
    let b = ell0(&params, FRAC_PI_2, &cfg)?;
    let (ea, eb) = (ell0_cylinder(&params), ell0_sphere(&params));
    let (ra, rb) = ((a.value - ea).abs() / ea, (b.value - eb).abs() / eb);
    check(
        ra < 0.01 && rb < 0.01,
        format!("ell0(0) {:.6} vs {ea:.6} (rel {ra:.1e}); ell0(pi/2) {:.6} vs {eb:.6} (rel {rb:.1e})", a.value, b.value),
    )
}

/// Values with error bars |v(n) − v(n/2)| ordered strictly in the given direction with disjoint bars.
fn strictly_ordered(v: &[f64], err: &[f64], increasing: bool) -> bool {
    v.windows(2).zip(err.windows(2)).all(|(w, e)| {
        let gap = if increasing { w[1] - w[0] } else { w[0] - w[1] };
        gap > e[0] + e[1]
    })
}

fn c6_monotonicity(lab: &mut Lab) -> Result<(bool, String)> {
    let grid = [PI / 6.0, PI / 3.0, FRAC_PI_2, 0.75 * PI, PI, 1.5 * PI];
    let (fine, coarse) = (128, 64);
    let mut vals: [Vec<f64>; 5] = Default::default();
    let mut errs: [Vec<f64>; 5] = Default::default();
    for &lam in &grid {
        let f = lab.observables(1.0, 1.0, lam, fine)?;
        let c = lab.observables(1.0, 1.0, lam, coarse)?;
        let pick = |o: &Observables| [o.ell[0], o.ell[1], o.ell[2], o.mu[1], o.mu[2]];
        for (k, (a, b)) in pick(&f).iter().zip(pick(&c)).enumerate() {
            vals[k].push(*a);
            errs[k].push((a - b).abs());
        }
    }
    let i_half = 2;
    let ell0_ok = strictly_ordered(&vals[0], &errs[0], false) && vals[0].iter().all(|v| *v > 0.0);
    let ell1_ok = strictly_ordered(&vals[1], &errs[1], false)
        && vals[1][i_half].abs() <= errs[1][i_half] + 1e-12
        && vals[1][i_half - 1] > 0.0
        && vals[1][i_half + 1] < 0.0;
    let ell2_ok = strictly_ordered(&vals[2], &errs[2], true) && vals[2].iter().all(|v| *v > 0.0);
    let mu1_ok = strictly_ordered(&vals[3], &errs[3], true);
    let mu2_ok = strictly_ordered(&vals[4], &errs[4], true);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    let max_err = errs.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
    check(
        ell0_ok && ell1_ok && ell2_ok && mu1_ok && mu2_ok,
        format!(
            "ell0 [{}] {} ell1 [{}] {} ell2 [{}] {} mu1 [{}] {} mu2 [{}] {}; max bar {max_err:.1e}",
            fmt(&vals[0]),
            ell0_ok,
            fmt(&vals[1]),
            ell1_ok,
            fmt(&vals[2]),
            ell2_ok,
            fmt(&vals[3]),
            mu1_ok,
            fmt(&vals[4]),
            mu2_ok
        ),
    )
}

fn c7_angle(lab: &mut Lab) -> Result<(bool, String)> {
    let mesh = lab.mesh(1.0, 1.0, 0.75 * PI, 64)?;
    // ν = +1 at h̃₀ ∩ h̃₁ and −1 at h̃₀ ∩ h̃₂
    let (nu_a, nu_b) = (mesh.nu[mesh.corner(2)], mesh.nu[mesh.corner(1)]);
    let nu_v = mesh.arc_vertices[ArcTag::V as usize].iter().map(|&v| mesh.nu[v].abs()).fold(0.0, f64::max);
    let curves = nodal_set(mesh);
    let single = curves.len() == 1
        && curves[0].touches(ArcTag::H0)
        && curves[0].touches(ArcTag::V)
        && !curves[0].ends.contains(&NodalEnd::Open);
    check(
        (nu_a - 1.0).abs() <= 5e-3 && (nu_b + 1.0).abs() <= 5e-3 && nu_v <= 5e-3 && single,
        format!(
            "nu(h0&h1) {nu_a:.5}, nu(h0&h2) {nu_b:.5}, max|nu| on v {nu_v:.1e}, nodal curves {:?}",
            curves.iter().map(|c| c.ends).collect::<Vec<_>>()
        ),
    )
}

fn c8_stability(lab: &mut Lab) -> Result<(bool, String)> {
    let levels = [32, 64, 128];
    let mut res = vec![];
    let mut min_u = f64::INFINITY;
    let mut lambda1 = f64::NAN;
    for n in levels {
        let r = stability_report(lab.mesh(1.0, 1.0, 0.75 * PI, n)?)?;
        res.push(r.residual);
        min_u = min_u.min(r.min_interior_u);
        lambda1 = r.lambda1;
    }
    let decreasing = res.windows(2).all(|w| w[1] < w[0]);
    check(
        decreasing && min_u > 0.0 && lambda1.abs() < 0.05,
        format!("L u residual {}, min interior u {min_u:.2e}, lambda1(A) {lambda1:.4}", sci(&res)),
    )
}

fn c9_conjugation(lab: &mut Lab) -> Result<(bool, String)> {
    let levels = [32, 64, 128];
    let mut hol = vec![];
    let mut iso = 0.0;
    let mut fits_ok = false;
    let mut fit_detail = String::new();
    for n in levels {
        let c = lab.conjugate(1.0, 1.0, 0.75 * PI, n)?;
        hol.push(c.holonomy);
        iso = c.isometry_error;
        let f = boundary_fits(c);
        fits_ok = f.within(2.0);
        fit_detail = format!(
            "planes {}, slice {:.1e}, edge {:.1e}",
            sci(&f.plane_residual), f.slice_residual, f.mean_edge_length
        );
    }
    let ratios: Vec<f64> = hol.windows(2).map(|w| w[0] / w[1]).collect();
    check(
        ratios.iter().all(|r| *r >= 2.0) && iso <= 1e-3 && fits_ok,
        format!("holonomy {} ratios {ratios:.2?}; isometry {iso:.2e}; {fit_detail}", sci(&hol)),
    )
}

fn c10_rotational(lab: &mut Lab) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = vec![];
    for lam in [0.7, 0.75 * PI] {
        let mut d = vec![];
        let mut edge = 0.0;
        for n in [32, 64] {
            let c = lab.conjugate(0.0, 1.0, lam, n)?;
            d.push(rotational_defect(c)?);
            edge = c.mean_edge_length;
        }
        ok &= d[1] < 0.1 * edge && d[0] / d[1] >= 2.0;
        parts.push(format!("lambda {lam:.3}: defect {} (edge {edge:.2e})", sci(&d)));
    }
    check(ok, parts.join("; "))
}

fn c11_window() -> Result<(bool, String)> {
    let cfg = SolverConfig::with_resolution(64);
    let width = 1e-3;
    let window = embedded_window(1.0, 2)?;
    let probe = [0.45, 0.5, 0.55, 0.62, 0.7, 0.78, 0.866, 0.9];
    let mut ok = true;
    let mut roots = vec![];
    let mut line = vec![];
    for h in probe {
        let params = AmbientParams::new(1.0, h)?;
        let r = find_lambda_m(&params, 2, &cfg, width);
        let succeeded = r.is_ok();
        ok &= succeeded == window.contains(h);
        if let Ok(r) = &r {
            ok &= r.bracket[1] - r.bracket[0] < width;
            roots.push(r.lambda);
            line.push(format!("{h}:{:.4}", r.lambda));
        } else {
            line.push(format!("{h}:none"));
        }
    }
    let decreasing = roots.windows(2).all(|w| w[1] < w[0]);
    let near_half = find_lambda_m(&AmbientParams::new(1.0, 0.5001)?, 2, &cfg, width)?;
    let at_top = find_lambda_m(&AmbientParams::new(1.0, window.hi)?, 2, &cfg, width)?;
    let lim_ok = (FRAC_PI_2 - near_half.lambda).abs() < width && at_top.lambda.abs() < width;
    let below: Vec<bool> =
        (1..=8).map(|m| find_lambda_m(&AmbientParams::new(1.0, 0.45).expect("valid"), m, &cfg, width).is_err()).collect();
    let none_below = below.iter().all(|b| *b);
    check(
        ok && decreasing && lim_ok && none_below,
        format!(
            "probe [{}] decreasing {decreasing}; H=0.5001 -> {:.5}, H=sqrt3/2 -> {:.5}; H=0.45 no root for m=1..8: {none_below}",
            line.join(" "),
            near_half.lambda,
            at_top.lambda
        ),
    )
}

fn c12_closure(lab: &mut Lab) -> Result<(bool, String)> {
    let params = AmbientParams::new(1.0, 0.7)?;
    let n = 64;
    let root = find_lambda_m(&params, 2, &SolverConfig::with_resolution(n), 1e-3)?;
    let conj = lab.conjugate(1.0, 0.7, root.lambda, n)?;
    let ext = symmetry_extend(conj, ExtensionMode::Full { copies: 4 })?;
    let seam = ext.seam_mismatch.unwrap_or(f64::INFINITY);
    check(
        ext.closed && seam < 2.0 * ext.mean_edge_length,
        format!(
            "lambda2(0.7) = {:.5}, seam {seam:.2e} vs 2 edges {:.2e}, closed {}, chi {}",
            root.lambda,
            2.0 * ext.mean_edge_length,
            ext.closed,
            ext.euler_characteristic
        ),
    )
}

/// Runs the selected criteria (all when `only` is empty), calling `report` after each one.
pub fn run_desk(only: &[u8], mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let mut lab = Lab::default();
    let mut out = vec![];
    for id in 1..=12u8 {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = match id {
            1 => c1_cylinder_curvature(),
            2 => c2_shape_norm(),
            3 => c3_foliation(),
            4 => c4_limits(&mut lab),
            5 => c5_anchors(),
            6 => c6_monotonicity(&mut lab),
            7 => c7_angle(&mut lab),
            8 => c8_stability(&mut lab),
            9 => c9_conjugation(&mut lab),
            10 => c10_rotational(&mut lab),
            11 => c11_window(),
            _ => c12_closure(&mut lab),
        };
        let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        let outcome = CriterionOutcome {
            id,
            name: NAMES[id as usize - 1],
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        report(&outcome);
        out.push(outcome);
    }
    out
}
