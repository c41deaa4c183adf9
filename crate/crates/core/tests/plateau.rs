use hdelaunay::ambient::{barrier_membership, killing_submersion_base, omega_contains, theta_cover, AmbientParams, Barrier};
use hdelaunay::plateau::*;
use hdelaunay::polygon::{build_polygon, ArcTag, GeodesicPolygon};
use hdelaunay::Error;
use std::f64::consts::{FRAC_PI_2, PI};

fn polygon(kappa: f64, h: f64, lambda: f64, n: usize) -> GeodesicPolygon {
    build_polygon(&AmbientParams::new(kappa, h).unwrap(), lambda, n + 1).unwrap()
}

fn solved(kappa: f64, h: f64, lambda: f64, n: usize) -> PlateauSolution {
    solve_plateau(&polygon(kappa, h, lambda, n), &SolverConfig::with_resolution(n)).unwrap()
}

/// ν interpolated at arc parameter s along a boundary arc.
fn nu_on_arc(mesh: &SurfaceMesh, tag: ArcTag, s: f64) -> f64 {
    let (vs, ps) = (&mesh.arc_vertices[tag as usize], &mesh.arc_params[tag as usize]);
    for k in 1..ps.len() {
        let (a, b) = (ps[k - 1], ps[k]);
        if (s - a) * (s - b) <= 0.0 && a != b {
            let t = (s - a) / (b - a);
            return (1.0 - t) * mesh.nu[vs[k - 1]] + t * mesh.nu[vs[k]];
        }
    }
    panic!("s = {s} is not on {tag:?}");
}

#[test]
fn initial_mesh_spans_the_polygon() {
    for lambda in [0.0, 1.0, FRAC_PI_2, 2.5] {
        let poly = polygon(1.0, 1.0, lambda, 12);
        let mesh = initial_mesh(&poly, &SolverConfig::with_resolution(12)).unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
        for tag in ArcTag::ALL {
            let arc = poly.arc(tag);
            for (&v, &s) in mesh.arc_vertices[tag as usize].iter().zip(&mesh.arc_params[tag as usize]) {
                assert!((mesh.vertices[v] - arc.position(s)).norm() < 1e-10, "{tag:?} λ = {lambda}");
            }
        }
        assert!(mesh.vertices.iter().all(|p| omega_contains(&mesh.params, p, 1e-6)));
    }
}

#[test]
fn corners_are_the_polygon_vertices() {
    let poly = polygon(1.0, 1.0, 2.0, 12);
    let mesh = solve_plateau(&poly, &SolverConfig::with_resolution(12)).unwrap().mesh;
    for (label, vertex) in [(1u8, 0usize), (2, 1), (3, 2), (4, 3)] {
        assert!((mesh.vertices[mesh.corner(label)] - poly.vertices[vertex]).norm() < 1e-10);
    }
}

#[test]
fn solved_disk_is_a_graph_inside_omega() {
    let sol = solved(1.0, 1.0, 2.0, 24);
    let mesh = &sol.mesh;
    assert!(sol.report.converged);
    assert!(sol.report.residual < sol.report.tolerance);
    assert_eq!(mesh.euler_characteristic(), 1);
    assert!(mesh.max_omega_residual() <= 1e-6);
    let interior: Vec<_> = (0..mesh.num_vertices()).filter(|&v| mesh.tags[v].is_interior()).collect();
    let bases: Vec<_> = interior.iter().map(|&v| killing_submersion_base(&mesh.params, &mesh.vertices[v])).collect();
    let mut min = f64::INFINITY;
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            min = min.min((bases[i] - bases[j]).norm());
        }
    }
    assert!(min > 1e-6, "base collision {min:e}");
}

#[test]
fn umbrella_limit() {
    let mesh = solved(1.0, 1.0, FRAC_PI_2, 24).mesh;
    let center = mesh.vertices[mesh.corner(1)];
    let edge = mesh.mean_edge_length();
    let worst = mesh
        .vertices
        .iter()
        .map(|p| barrier_membership(&mesh.params, p, Barrier::UmbrellaAt(center)).unwrap().abs())
        .fold(0.0, f64::max);
    // the residual is a sine of the metric distance up to the factor 2/√κ_b
    let dist = worst * 2.0 / mesh.params.kappa_b.sqrt();
    assert!(dist < 2.0 * edge, "{dist:e} vs edge {edge:e}");
}

#[test]
fn helicoid_limit() {
    let mesh = solved(1.0, 1.0, 0.0, 24).mesh;
    let edge = mesh.mean_edge_length();
    for p in &mesh.vertices {
        let q = theta_cover(&mesh.params, p).unwrap();
        let r = (q.z * q.z + q.w * q.w).im;
        assert!(r.abs() < edge, "{r:e}");
    }
}

#[test]
fn residual_history_decreases() {
    let sol = solved(1.0, 0.8, 2.2, 16);
    let h = &sol.report.history;
    assert!(h.len() >= 2);
    assert!(h.last().unwrap() < &h[0]);
    assert!(h.windows(2).filter(|w| w[1] > w[0]).count() <= h.len() / 4);
}

#[test]
fn angle_function_structure() {
    let mesh = solved(1.0, 1.0, 0.75 * PI, 32).mesh;
    assert!((mesh.nu[mesh.corner(2)] - 1.0).abs() < 5e-3);
    assert!((mesh.nu[mesh.corner(1)] + 1.0).abs() < 5e-3);
    for &v in &mesh.arc_vertices[ArcTag::V as usize] {
        assert!(mesh.nu[v].abs() < 5e-3);
    }
    assert!(mesh.nu.iter().all(|n| n.abs() <= 1.0 + 1e-12));
    assert_eq!(angle_function(&mesh).len(), mesh.num_vertices());
    let interior_of = |tag: ArcTag| {
        mesh.arc_vertices[tag as usize].iter().copied().filter(|&v| !mesh.tags[v].is_corner()).collect::<Vec<_>>()
    };
    assert!(interior_of(ArcTag::H1).iter().all(|&v| mesh.nu[v] > 0.0));
    assert!(interior_of(ArcTag::H2).iter().all(|&v| mesh.nu[v] < 0.0));
}

#[test]
fn nodal_curve_for_nodoid() {
    let mesh = solved(1.0, 1.0, 0.75 * PI, 32).mesh;
    let curves = nodal_set(&mesh);
    assert_eq!(curves.len(), 1);
    assert!(curves[0].touches(ArcTag::H0) && curves[0].touches(ArcTag::V));
    // one crossing point on h̃₀
    let crossings = curves.iter().flat_map(|c| c.ends).filter(|e| *e == NodalEnd::Arc(ArcTag::H0)).count();
    assert_eq!(crossings, 1);
}

#[test]
fn angle_function_for_unduloid() {
    let mesh = solved(1.0, 1.0, PI / 4.0, 32).mesh;
    assert!((mesh.nu[mesh.corner(1)] + 1.0).abs() < 5e-3);
    assert!((mesh.nu[mesh.corner(2)] + 1.0).abs() < 5e-3);
    for &v in &mesh.arc_vertices[ArcTag::V as usize] {
        assert!(mesh.nu[v].abs() < 5e-3);
    }
    // ν keeps its sign on h̃₀, so the base curve of the conjugate does not backtrack
    assert!(mesh.arc_vertices[ArcTag::H0 as usize].iter().all(|&v| mesh.nu[v] < -0.5));
    let curves = nodal_set(&mesh);
    assert!(curves.iter().all(|c| !c.touches(ArcTag::H0) && !c.ends.contains(&NodalEnd::Open)));
}

#[test]
fn nu_on_h1_increases_with_lambda() {
    let lambdas = [1.2 * FRAC_PI_2, 1.5 * FRAC_PI_2, 1.8 * FRAC_PI_2];
    let meshes: Vec<_> = lambdas.iter().map(|&l| solved(1.0, 1.0, l, 24).mesh).collect();
    for s in [0.82, 0.86, 0.9] {
        let values: Vec<f64> = meshes.iter().map(|m| nu_on_arc(m, ArcTag::H1, s)).collect();
        assert!(values.iter().all(|v| *v > 0.0));
        assert!(values.windows(2).all(|w| w[1] > w[0]), "s = {s}: {values:?}");
    }
}

/// max |u| over the fibers h̃₁, h̃₂ relative to max |u| on the disk
fn fiber_u(mesh: &SurfaceMesh) -> f64 {
    let scale = mesh.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
    [ArcTag::H1, ArcTag::H2]
        .iter()
        .flat_map(|t| mesh.arc_vertices[*t as usize].iter())
        .fold(0.0f64, |m, &v| m.max(mesh.u[v].abs()))
        / scale
}

#[test]
fn jacobi_function_sign() {
    for lambda in [PI / 4.0, 0.75 * PI, PI] {
        let coarse = solved(1.0, 1.0, lambda, 16).mesh;
        let mesh = solved(1.0, 1.0, lambda, 32).mesh;
        let report = stability_report(&mesh).unwrap();
        assert!(report.interior_positive && report.min_interior_u > 0.0, "λ = {lambda}");
        assert_eq!(report.annulus_euler, 0);
        // X̃ is tangent along the fibers, so u vanishes there up to a fourth-order error
        let (a, b) = (fiber_u(&coarse), fiber_u(&mesh));
        assert!(b < 1e-3 && b < a / 8.0, "λ = {lambda}: {a:e} -> {b:e}");
    }
}

#[test]
fn jacobi_residual_and_eigenvalue_shrink() {
    let coarse = stability_report(&solved(1.0, 1.0, 0.75 * PI, 16).mesh).unwrap();
    let fine = stability_report(&solved(1.0, 1.0, 0.75 * PI, 32).mesh).unwrap();
    assert!(fine.residual < coarse.residual);
    assert!(fine.lambda1.abs() < coarse.lambda1.abs().max(0.05));
}

#[test]
fn refinement_changes_area_and_ell0_little() {
    let levels: Vec<_> = [16, 32, 64].iter().map(|&n| solved(1.0, 1.0, 2.0, n)).collect();
    let (a, b) = (&levels[1], &levels[2]);
    assert!((a.report.area - b.report.area).abs() / b.report.area < 0.01);
    let ell = |s: &PlateauSolution| hdelaunay::sister::boundary_observables(&s.mesh).unwrap().ell[0];
    assert!((ell(a) - ell(b)).abs() / ell(b) < 0.01);
}

#[test]
fn solve_is_deterministic() {
    let a = solved(1.0, 0.9, 1.9, 16).mesh;
    let b = solved(1.0, 0.9, 1.9, 16).mesh;
    assert_eq!(a.fiber, b.fiber);
    assert_eq!(a.nu, b.nu);
}

#[test]
fn iteration_cap_reports_history() {
    let config = SolverConfig { max_iterations: 1, fan_passes: 0, tolerance: Some(1e-14), ..SolverConfig::with_resolution(16) };
    match solve_plateau(&polygon(1.0, 1.0, 2.0, 16), &config) {
        Err(Error::NonConvergence { iterations, history, .. }) => {
            assert!(iterations >= 1 && iterations <= 2);
            assert!(!history.is_empty());
        }
        other => panic!("expected non-convergence, got {:?}", other.map(|s| s.report)),
    }
}

#[test]
fn invalid_config_is_rejected() {
    let poly = polygon(1.0, 1.0, 2.0, 16);
    assert!(solve_plateau(&poly, &SolverConfig::with_resolution(2)).is_err());
    let config = SolverConfig { tolerance: Some(-1.0), ..SolverConfig::with_resolution(16) };
    assert!(solve_plateau(&poly, &config).is_err());
}
