use approx::assert_abs_diff_eq;
use hdelaunay::ambient::*;
use nalgebra::{Matrix3, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn params(kappa: f64, h: f64) -> AmbientParams {
    AmbientParams::new(kappa, h).unwrap()
}

/// Berger metric written out from the round metric and the fiber direction iq.
fn berger_sq(kb: f64, tau: f64, q: &Vector4<f64>, x: &Vector4<f64>) -> f64 {
    let v = Vector4::new(-q[1], q[0], -q[3], q[2]);
    4.0 / kb * (x.dot(x) + (4.0 * tau * tau / kb - 1.0) * x.dot(&v).powi(2))
}

fn d_theta(p: &AmbientParams, x: &PointM, v: &PointM) -> Vector4<f64> {
    let h = 1e-5;
    let a = theta_cover(p, &(x + v * h)).unwrap().to_r4();
    let b = theta_cover(p, &(x - v * h)).unwrap().to_r4();
    (a - b) / (2.0 * h)
}

#[test]
fn params_derived_fields() {
    let p = params(-1.0, 0.75);
    assert_eq!(p.kappa_b, 4.0 * 0.75 * 0.75 - 1.0);
    assert_eq!(p.tau_b, 0.75);
    assert!(AmbientParams::new(1.0, 0.0).is_err());
    assert!(AmbientParams::new(-1.0, 0.4).is_err());
    assert!(AmbientParams::new(f64::NAN, 1.0).is_err());
}

#[test]
fn metric_at_origin_is_identity() {
    let g = metric_m(&params(0.0, 1.0), &PointM::zeros()).unwrap();
    assert_abs_diff_eq!(g, Matrix3::identity(), epsilon = 1e-15);
}

#[test]
fn metric_entries_at_unit_x() {
    // (dx² + dy²)/4 + (dz + dy/2)² at (1, 0, 0) with κ_b = 4, τ = 1
    let g = metric_m(&params(0.0, 1.0), &PointM::new(1.0, 0.0, 0.0)).unwrap();
    assert_abs_diff_eq!(g[(0, 0)], 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(g[(1, 1)], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(g[(2, 2)], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g[(1, 2)], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(g[(0, 1)], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g[(0, 2)], 0.0, epsilon = 1e-15);
}

#[test]
fn non_finite_points_are_rejected() {
    let p = params(1.0, 1.0);
    let bad = PointM::new(f64::INFINITY, 0.0, 0.0);
    assert!(matches!(metric_m(&p, &bad), Err(hdelaunay::Error::Domain(_))));
    assert!(matches!(theta_cover(&p, &bad), Err(hdelaunay::Error::Domain(_))));
    // the model chart misses the fiber w = 0
    let pole = PointS3::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    assert!(theta_inverse(&p, &pole, 0.0).is_err());
}

#[test]
fn theta_cover_examples() {
    let p = params(1.0, 1.0);
    let q = theta_cover(&p, &PointM::zeros()).unwrap();
    assert_abs_diff_eq!(q.z.norm(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!((q.w - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

    let period = 8.0 * PI * p.tau_b / p.kappa_b;
    let q = theta_cover(&p, &PointM::new(0.0, 0.0, period)).unwrap();
    assert_abs_diff_eq!((q.w - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    let half = theta_cover(&p, &PointM::new(0.0, 0.0, 0.5 * period)).unwrap();
    assert_abs_diff_eq!((half.w + Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
}

#[test]
fn theta_inverse_round_trip() {
    let p = params(1.0, 0.7);
    let x = PointM::new(0.3, -0.4, 2.1);
    let q = theta_cover(&p, &x).unwrap();
    let y = theta_inverse(&p, &q, 2.0).unwrap();
    assert_abs_diff_eq!(x, y, epsilon = 1e-12);
}

#[test]
fn hopf_projection_examples() {
    let p = params(1.0, 1.0);
    let r = 1.0 / p.kappa_b.sqrt();
    let south = hopf_projection(&p, &PointS3::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)));
    assert_abs_diff_eq!(south, nalgebra::Vector3::new(0.0, 0.0, -r), epsilon = 1e-15);
    let north = hopf_projection(&p, &PointS3::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    assert_abs_diff_eq!(north, nalgebra::Vector3::new(0.0, 0.0, r), epsilon = 1e-15);
}

#[test]
fn hopf_projection_is_fiber_invariant_and_on_sphere() {
    let p = params(0.5, 0.8);
    let q = theta_cover(&p, &PointM::new(0.4, 0.1, -0.3)).unwrap();
    let base = hopf_projection(&p, &q);
    assert_abs_diff_eq!(base.norm(), 1.0 / p.kappa_b.sqrt(), epsilon = 1e-12);
    for k in 0..100 {
        let e = Complex64::from_polar(1.0, 0.0631 * k as f64);
        let image = hopf_projection(&p, &PointS3::new(q.z * e, q.w * e));
        assert_abs_diff_eq!(image, base, epsilon = 1e-12);
    }
}

#[test]
fn hopf_projection_is_a_submersion() {
    let p = params(1.0, 0.6);
    let x = PointM::new(0.2, 0.3, 0.4);
    let q = theta_cover(&p, &x).unwrap();
    let q4 = q.to_r4();
    let v = Vector4::new(-q4[1], q4[0], -q4[3], q4[2]);
    for dir in [Vector4::new(1.0, 0.0, 0.0, 0.0), Vector4::new(0.0, 0.3, -0.2, 1.0)] {
        // horizontal part of dir at q
        let t = dir - q4 * q4.dot(&dir) - v * v.dot(&dir);
        let h = 1e-6;
        let plus = PointS3::from_r4(&((q4 + t * h) / (q4 + t * h).norm()));
        let minus = PointS3::from_r4(&((q4 - t * h) / (q4 - t * h).norm()));
        let d = (hopf_projection(&p, &plus) - hopf_projection(&p, &minus)) / (2.0 * h);
        assert_abs_diff_eq!(d.norm_squared(), berger_sq(p.kappa_b, p.tau_b, &q4, &t), epsilon = 1e-6);
    }
}

#[test]
fn screw_motion_examples() {
    let p = params(1.0, 1.0);
    let x = PointM::new(0.3, -0.2, 0.5);
    assert_abs_diff_eq!(screw_motion(&p, 0.0, &x), x, epsilon = 0.0);
    let y = screw_motion(&p, 2.0 * PI, &x);
    assert_abs_diff_eq!(y, PointM::new(x.x, x.y, x.z + 4.0 * PI * p.h / p.kappa_b), epsilon = 1e-12);
    let h = 1e-6;
    let d = (screw_motion(&p, h, &x) - screw_motion(&p, -h, &x)) / (2.0 * h);
    assert_abs_diff_eq!(d, PointM::new(x.y, -x.x, 2.0 * p.h / p.kappa_b), epsilon = 1e-8);
    assert_abs_diff_eq!(p.killing(&x), d, epsilon = 1e-8);
}

#[test]
fn screw_motion_matches_berger_screw_motion() {
    let p = params(1.0, 0.7);
    for (k, x) in [PointM::new(0.3, -0.2, 0.5), PointM::new(-0.7, 0.1, -2.0)].iter().enumerate() {
        let t = 0.4 + k as f64;
        let a = theta_cover(&p, &screw_motion(&p, t, x)).unwrap();
        let b = berger_screw_motion(t, &theta_cover(&p, x).unwrap());
        assert_abs_diff_eq!((a.z - b.z).norm() + (a.w - b.w).norm(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn killing_submersion_examples() {
    let p = params(1.0, 1.0);
    let base = killing_submersion_base(&p, &PointM::new(0.3, 0.4, 0.0));
    assert_abs_diff_eq!(base, nalgebra::Vector2::new(0.3, 0.4), epsilon = 1e-15);
    // t₀ = κ_b z / 2H = π
    let z = 2.0 * p.h * PI / p.kappa_b;
    let base = killing_submersion_base(&p, &PointM::new(1.0, 0.0, z));
    assert_abs_diff_eq!(base, nalgebra::Vector2::new(-1.0, 0.0), epsilon = 1e-12);
    let x = PointM::new(0.2, -0.5, 0.9);
    for t in [-2.0, 0.3, 5.0] {
        assert_abs_diff_eq!(
            killing_submersion_base(&p, &screw_motion(&p, t, &x)),
            killing_submersion_base(&p, &x),
            epsilon = 1e-10
        );
    }
}

#[test]
fn barrier_examples() {
    let p = params(1.0, 1.0);
    let r = 2.0 / p.kappa_b.sqrt();
    assert_abs_diff_eq!(barrier_membership(&p, &PointM::new(r, 0.0, 0.0), Barrier::CylinderT).unwrap(), 0.0, epsilon = 1e-15);
    assert_eq!(barrier_membership(&p, &PointM::new(0.3, -0.1, 0.0), Barrier::Umbrella(0.0)).unwrap(), 0.0);
    assert_eq!(barrier_membership(&p, &PointM::new(1.0, 0.0, 0.0), Barrier::HelicoidS).unwrap(), 0.0);
    let c = 0.3;
    let z = 4.0 * p.tau_b * c / p.kappa_b;
    assert_abs_diff_eq!(barrier_membership(&p, &PointM::new(0.1, 0.2, z), Barrier::Umbrella(c)).unwrap(), 0.0, epsilon = 1e-15);
    assert_eq!(barrier_membership(&p, &PointM::new(2.0, -1.0, 0.7), Barrier::Clifford(1.0, 2.0)).unwrap(), 0.0);
}

#[test]
fn helicoid_pole_is_reported() {
    let p = params(1.0, 1.0);
    // κ_b z / 2H = π/2
    let z = PI * p.h / p.kappa_b;
    let err = barrier_membership(&p, &PointM::new(1.0, 0.0, z), Barrier::HelicoidS).unwrap_err();
    assert!(matches!(err, hdelaunay::Error::PoleAdjacent(_)));
}

#[test]
fn umbrella_at_origin_is_the_horizontal_plane() {
    let p = params(1.0, 1.0);
    for x in [PointM::new(0.2, -0.1, 0.0), PointM::new(-0.5, 0.3, 0.0)] {
        let r = barrier_membership(&p, &x, Barrier::UmbrellaAt(PointM::zeros())).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-15);
    }
    let off = barrier_membership(&p, &PointM::new(0.0, 0.0, 0.1), Barrier::UmbrellaAt(PointM::zeros())).unwrap();
    assert!(off.abs() > 1e-3);
}

#[test]
fn omega_examples() {
    let p = params(1.0, 1.0);
    assert!(omega_contains(&p, &PointM::zeros(), 0.0));
    assert!(!omega_contains(&p, &PointM::new(3.0 / p.kappa_b.sqrt(), 0.0, 0.0), 1e-9));
    assert!(!omega_contains(&p, &PointM::new(0.0, -0.3, 0.0), 1e-9));
}

fn point_strategy() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-1.0f64..2.0, 0.3f64..2.0, -0.6f64..0.6, -0.6f64..0.6, -3.0f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn theta_is_a_local_isometry((kappa, h, x, y, z) in point_strategy(), a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        prop_assume!(4.0 * h * h + kappa > 0.2);
        let p = params(kappa, h);
        let pt = PointM::new(x, y, z);
        let v = PointM::new(a, b, c);
        let g = metric_m(&p, &pt).unwrap();
        let lhs = v.dot(&(g * v));
        let q = theta_cover(&p, &pt).unwrap().to_r4();
        let rhs = berger_sq(p.kappa_b, p.tau_b, &q, &d_theta(&p, &pt, &v));
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + lhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn theta_image_is_unit((kappa, h, x, y, z) in point_strategy()) {
        prop_assume!(4.0 * h * h + kappa > 0.2);
        let q = theta_cover(&params(kappa, h), &PointM::new(x, y, z)).unwrap();
        prop_assert!((q.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_is_positive_definite((kappa, h, x, y, z) in point_strategy()) {
        prop_assume!(4.0 * h * h + kappa > 0.2);
        let g = metric_m(&params(kappa, h), &PointM::new(x, y, z)).unwrap();
        prop_assert!((g - g.transpose()).norm() < 1e-15);
        let eig = g.symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|e| *e > 0.0));
    }

    #[test]
    fn screw_motion_is_an_isometry((kappa, h, x, y, z) in point_strategy(), t in -4.0f64..4.0, a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        prop_assume!(4.0 * h * h + kappa > 0.2);
        let p = params(kappa, h);
        let pt = PointM::new(x, y, z);
        let v = PointM::new(a, b, c);
        let s = 1e-5;
        let dv = (screw_motion(&p, t, &(pt + v * s)) - screw_motion(&p, t, &(pt - v * s))) / (2.0 * s);
        let g0 = metric_m(&p, &pt).unwrap();
        let g1 = metric_m(&p, &screw_motion(&p, t, &pt)).unwrap();
        prop_assert!((v.dot(&(g0 * v)) - dv.dot(&(g1 * dv))).abs() < 1e-8);
    }

    #[test]
    fn fiber_period_is_exact((kappa, h, x, y, z) in point_strategy()) {
        prop_assume!(4.0 * h * h + kappa > 0.2);
        let p = params(kappa, h);
        let period = 8.0 * PI * p.tau_b / p.kappa_b;
        let a = theta_cover(&p, &PointM::new(x, y, z)).unwrap();
        let b = theta_cover(&p, &PointM::new(x, y, z + period)).unwrap();
        prop_assert!((a.z - b.z).norm() + (a.w - b.w).norm() < 1e-11);
    }
}
