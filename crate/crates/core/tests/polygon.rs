use approx::assert_abs_diff_eq;
use hdelaunay::ambient::{killing_submersion_base, metric_m, omega_residual, AmbientParams, PointM};
use hdelaunay::polygon::{build_polygon, validate, ArcTag};
use nalgebra::Matrix3;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn params(kappa: f64, h: f64) -> AmbientParams {
    AmbientParams::new(kappa, h).unwrap()
}

/// Γᵏ(v, v) from finite differences of the metric.
fn christoffel(p: &AmbientParams, x: &PointM, v: &PointM) -> PointM {
    let s = 1e-5;
    let dg: Vec<Matrix3<f64>> = (0..3)
        .map(|k| {
            let mut e = PointM::zeros();
            e[k] = s;
            (metric_m(p, &(x + e)).unwrap() - metric_m(p, &(x - e)).unwrap()) / (2.0 * s)
        })
        .collect();
    let mut lower = PointM::zeros();
    for l in 0..3 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]) * v[i] * v[j];
            }
        }
        lower[l] = 0.5 * acc;
    }
    metric_m(p, x).unwrap().try_inverse().unwrap() * lower
}

#[test]
fn vertex_coordinates() {
    let p = params(1.0, 1.0);
    let poly = build_polygon(&p, 2.0, 16).unwrap();
    let r = 2.0 / 5f64.sqrt();
    assert_abs_diff_eq!(poly.vertices[1], PointM::new(r, 0.0, 0.0), epsilon = 1e-15);
    assert_abs_diff_eq!(poly.vertices[0], PointM::new(-r, 0.0, 0.0), epsilon = 1e-15);
    assert_abs_diff_eq!(poly.vertices[1].x, 0.894427190999916, epsilon = 1e-14);
}

#[test]
fn vertical_arc_span() {
    for (kappa, h, lambda) in [(1.0, 1.0, 0.0), (0.0, 0.7, 2.0), (-1.0, 2.0, 5.0)] {
        let p = params(kappa, h);
        let poly = build_polygon(&p, lambda, 8).unwrap();
        let dz = poly.vertices[3].z - poly.vertices[2].z;
        assert_abs_diff_eq!(dz, 4.0 * h / p.kappa_b * FRAC_PI_2, epsilon = 1e-14);
    }
}

#[test]
fn helicoid_case_intervals() {
    let poly = build_polygon(&params(1.0, 1.0), 0.0, 8).unwrap();
    let h1 = poly.arc(ArcTag::H1);
    let h2 = poly.arc(ArcTag::H2);
    assert_eq!((h1.s0, h1.s1), (FRAC_PI_4, 0.0));
    assert_eq!((h2.s0, h2.s1), (-FRAC_PI_4, 0.0));
    assert!(validate(&poly).passed);
}

#[test]
fn closure_of_vertices() {
    let poly = build_polygon(&params(1.0, 0.8), 1.3, 32).unwrap();
    let [h0, h1, h2, v] = &poly.arcs;
    let lam = poly.lambda;
    let pairs = [
        (h0.position(FRAC_PI_2), h2.position(-FRAC_PI_4), poly.vertices[0]),
        (h0.position(0.0), h1.position(FRAC_PI_4), poly.vertices[1]),
        (h1.position(0.5 * lam), v.position(0.0), poly.vertices[2]),
        (v.position(FRAC_PI_2), h2.position(0.5 * lam), poly.vertices[3]),
    ];
    for (a, b, c) in pairs {
        assert!((a - b).norm() < 1e-12 && (a - c).norm() < 1e-12);
    }
}

#[test]
fn arcs_are_geodesics_of_the_metric() {
    let p = params(1.0, 0.9);
    let poly = build_polygon(&p, 2.5, 40).unwrap();
    for arc in &poly.arcs {
        let s2 = arc.speed().powi(2);
        for (s, x) in &arc.samples {
            let v = arc.velocity(*s);
            let r = arc.acceleration(*s) + christoffel(&p, x, &v);
            let g = metric_m(&p, x).unwrap();
            assert!(r.dot(&(g * r)).sqrt() / s2 < 1e-6, "{:?} at s = {s}", arc.tag);
            assert_abs_diff_eq!(v.dot(&(g * v)).sqrt(), arc.speed(), epsilon = 1e-12);
        }
    }
}

#[test]
fn h1_and_h2_project_to_points() {
    let p = params(1.0, 1.0);
    let poly = build_polygon(&p, 3.0, 50).unwrap();
    for tag in [ArcTag::H1, ArcTag::H2] {
        let arc = poly.arc(tag);
        let b0 = killing_submersion_base(&p, &arc.samples[0].1);
        for (_, x) in &arc.samples {
            assert!((killing_submersion_base(&p, x) - b0).norm() < 1e-9);
        }
    }
    let report = validate(&poly);
    assert!(report.h0_min_base_separation > 0.0 && report.v_min_base_separation > 0.0);
}

#[test]
fn validator_passes_at_pi() {
    let report = validate(&build_polygon(&params(1.0, 1.0), PI, 200).unwrap());
    assert!(report.passed, "{report:?}");
    assert!(report.closure.iter().all(|c| *c < 1e-12));
    assert!(report.corner_angles.iter().all(|a| (a - FRAC_PI_2).abs() < 1e-6));
}

#[test]
fn degenerate_h1_at_half_pi() {
    let poly = build_polygon(&params(1.0, 1.0), FRAC_PI_2, 20).unwrap();
    assert!(poly.arc(ArcTag::H1).is_degenerate());
    assert!(validate(&poly).passed);
}

#[test]
fn invalid_input_is_rejected() {
    let p = params(1.0, 1.0);
    assert!(build_polygon(&p, -0.1, 10).is_err());
    assert!(build_polygon(&p, f64::NAN, 10).is_err());
    assert!(build_polygon(&p, 1.0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_angles_and_omega(lambda in 0.0f64..(3.0 * PI), kappa in -1.0f64..2.0, h in 0.55f64..2.0) {
        let p = params(kappa, h);
        let poly = build_polygon(&p, lambda, 60).unwrap();
        let report = validate(&poly);
        prop_assert!(report.passed, "{report:?}");
        for arc in &poly.arcs {
            for (_, x) in &arc.samples {
                prop_assert!(omega_residual(&p, x) <= 1e-9);
            }
        }
    }

    #[test]
    fn boundaries_grow_with_lambda(a in 0.0f64..(3.0 * PI), b in 0.0f64..(3.0 * PI)) {
        let (l1, l2) = (a.min(b), a.max(b));
        let p = params(1.0, 1.0);
        let (p1, p2) = (build_polygon(&p, l1, 30).unwrap(), build_polygon(&p, l2, 30).unwrap());
        // h̃₀ does not depend on λ
        for ((_, x), (_, y)) in p1.arc(ArcTag::H0).samples.iter().zip(&p2.arc(ArcTag::H0).samples) {
            prop_assert!((x - y).norm() < 1e-15);
        }
        // h̃₁, h̃₂ of the smaller λ lie on those of the larger one with a longer interval
        for tag in [ArcTag::H1, ArcTag::H2] {
            let (small, large) = (p1.arc(tag), p2.arc(tag));
            prop_assert!(large.s1 >= small.s1);
            for (s, x) in &small.samples {
                prop_assert!((large.position(*s) - x).norm() < 1e-14);
            }
        }
        // ṽ moves along the fiber direction through the screw motion
        let (v1, v2) = (p1.arc(ArcTag::V), p2.arc(ArcTag::V));
        let shift = hdelaunay::ambient::screw_motion(&p, l2 - l1, &v1.position(0.3));
        prop_assert!((shift - v2.position(0.3)).norm() < 1e-12);
    }
}
