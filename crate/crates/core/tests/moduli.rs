use hdelaunay::ambient::AmbientParams;
use hdelaunay::moduli::*;
use hdelaunay::plateau::SolverConfig;
use hdelaunay::sister::Observables;
use hdelaunay::Error;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn obs(ell0: f64) -> Observables {
    Observables { ell: [ell0, 0.1, 0.2], mu: [0.0, 0.1, 0.3], ell_err: [0.0; 3], mu_err: [0.0; 3] }
}

fn input(kappa: f64, h: f64, lambda: f64, ell0: f64, m: Option<u32>) -> ClassifyInput {
    ClassifyInput { kappa, h_mean: h, lambda, obs: obs(ell0), err_ell0: 1e-6, holonomy: None, m, q_max: 64 }
}

/// Smallest denominator, then smallest numerator, with p/q in [a, b].
fn brute_fraction(a: f64, b: f64, q_max: u64) -> Option<(u64, u64)> {
    (1..=q_max).find_map(|q| {
        let p = (a * q as f64).ceil() as u64;
        (p as f64 <= b * q as f64).then_some((p, q))
    })
}

#[test]
fn window_arithmetic() {
    let w2 = embedded_window(1.0, 2).unwrap();
    assert!((w2.lo - 0.5).abs() < 1e-15);
    assert!((w2.hi - 3f64.sqrt() / 2.0).abs() < 1e-15);
    let w3 = embedded_window(1.0, 3).unwrap();
    assert!((w3.lo - 3f64.sqrt() / 2.0).abs() < 1e-15);
    assert!((w3.hi - 2f64.sqrt()).abs() < 1e-15);
    // the window scales with √κ
    let w = embedded_window(4.0, 3).unwrap();
    assert!((w.lo - 2.0 * w3.lo).abs() < 1e-14 && (w.hi - 2.0 * w3.hi).abs() < 1e-14);
    assert!(!w2.contains(0.5) && w2.contains(0.51) && w2.contains(w2.hi) && !w2.contains(0.9));
    for m in [0, 1] {
        assert!(matches!(embedded_window(1.0, m), Err(Error::InvalidParameter(_))));
    }
    assert!(embedded_window(0.0, 2).is_err());
    assert!(embedded_window(-1.0, 2).is_err());
}

#[test]
fn closing_targets() {
    assert!((closing_target(1.0, 2) - FRAC_PI_2).abs() < 1e-15);
    assert!((closing_target(4.0, 3) - PI / 6.0).abs() < 1e-15);
}

#[test]
fn window_ends_are_the_closing_limits() {
    // ℓ₀(0) and ℓ₀(π/2) hit the target exactly at the window ends
    for m in 2..6 {
        let w = embedded_window(1.0, m).unwrap();
        let t = closing_target(1.0, m);
        assert!((ell0_cylinder(&AmbientParams::new(1.0, w.hi).unwrap()) - t).abs() < 1e-12);
        assert!((ell0_sphere(&AmbientParams::new(1.0, w.lo).unwrap()) - t).abs() < 1e-12);
    }
}

#[test]
fn closed_form_limits() {
    let p = AmbientParams::new(1.0, 1.0).unwrap();
    assert!((ell0_cylinder(&p) - 1.404962946208145).abs() < 1e-14);
    assert!((ell0_sphere(&p) - 0.927295218001612).abs() < 1e-14);
    let flat = AmbientParams::new(0.0, 2.0).unwrap();
    assert!((ell0_sphere(&flat) - 0.5).abs() < 1e-15);
    assert!((ell0_cylinder(&flat) - PI / 4.0).abs() < 1e-15);
}

#[test]
fn simplest_fraction_examples() {
    assert_eq!(simplest_fraction(0.24, 0.26, 64), Some((1, 4)));
    assert_eq!(simplest_fraction(0.3333, 0.3334, 64), Some((1, 3)));
    assert_eq!(simplest_fraction(0.5, 0.5, 64), Some((1, 2)));
    assert_eq!(simplest_fraction(2.0, 2.5, 64), Some((2, 1)));
    assert_eq!(simplest_fraction(0.1, 0.1000001, 8), None);
    assert_eq!(simplest_fraction(0.3, 0.2, 64), None);
    assert_eq!(simplest_fraction(-0.1, 0.2, 64), None);
}

#[test]
fn compactness_examples() {
    assert_eq!(compactness(1.0, FRAC_PI_2, 1e-6, 64), Compactness::Compact { p: 1, q: 4 });
    assert_eq!(compactness(4.0, PI / 3.0, 1e-6, 64), Compactness::Compact { p: 1, q: 3 });
    assert_eq!(compactness(1.0, 1.0, 1e-9, 64), Compactness::NonCompact);
    assert_eq!(compactness(1.0, 1.0, 0.5, 64), Compactness::Undetermined);
    assert_eq!(compactness(0.0, 1.0, 0.5, 64), Compactness::NonCompact);
    assert_eq!(compactness(-1.0, FRAC_PI_2, 1e-6, 64), Compactness::NonCompact);
    assert_eq!(Compactness::Compact { p: 1, q: 4 }.name(), "true(1/4)");
    assert_eq!(Compactness::Torus.name(), "true(torus)");
}

#[test]
fn classification() {
    let cyl = classify(&input(1.0, 1.0, 0.0, PI / 5f64.sqrt(), None));
    assert_eq!(cyl.family, Family::Cylinder);
    assert_eq!(cyl.compact, Compactness::Torus);
    assert!(cyl.embedded);

    let stack = classify(&input(1.0, 1.0, FRAC_PI_2, 0.93, None));
    assert_eq!(stack.family, Family::SphereStack);
    assert!(stack.embedded);

    let nod = classify(&input(1.0, 1.0, 2.5, 0.5, None));
    assert_eq!(nod.family, Family::Nodoid);
    assert!(!nod.embedded);

    let torus = classify(&input(1.0, 0.7, 1.2, FRAC_PI_2, Some(2)));
    assert_eq!(torus.family, Family::Unduloid);
    assert_eq!(torus.compact, Compactness::Compact { p: 1, q: 4 });
    assert!(torus.embedded);
    assert_eq!(torus.m, Some(2));

    // outside the window the root closes up but is not embedded
    let outside = classify(&input(1.0, 0.9, 0.1, FRAC_PI_2, Some(2)));
    assert!(!outside.embedded);
    let free = classify(&input(1.0, 0.7, 1.0, 1.3, None));
    assert!(!free.embedded);

    let hyperbolic = classify(&input(-1.0, 1.0, 1.0, 1.3, None));
    assert_eq!(hyperbolic.compact, Compactness::NonCompact);
    assert!(hyperbolic.embedded);
    let flat = classify(&input(0.0, 1.0, 0.0, 1.0, None));
    assert_eq!(flat.compact, Compactness::NonCompact);
}

#[test]
fn embedded_implies_compact_or_limit_for_positive_kappa() {
    for h in [0.55, 0.7, 0.85, 1.2, 2.0] {
        for lambda in [0.0, 0.4, 1.0, FRAC_PI_2, 2.0, 4.0] {
            for m in [None, Some(2), Some(3), Some(4)] {
                let r = classify(&input(1.0, h, lambda, 1.1, m));
                if r.embedded {
                    let compact = matches!(r.compact, Compactness::Compact { .. } | Compactness::Torus);
                    assert!(compact || r.family == Family::SphereStack, "{r:?}");
                }
            }
        }
    }
}

#[test]
fn no_embedded_unduloid_at_or_below_one_half() {
    for h in [0.3, 0.4, 0.45, 0.5] {
        for m in 2..=8 {
            let r = classify(&input(1.0, h, 1.0, closing_target(1.0, m), Some(m)));
            assert!(!r.embedded, "H = {h}, m = {m}");
            assert!(!embedded_window(1.0, m).unwrap().contains(h));
            let err = find_lambda_m(&AmbientParams::new(1.0, h).unwrap(), m, &SolverConfig::with_resolution(8), 1e-3);
            assert!(matches!(err, Err(Error::NoRoot(_))), "H = {h}, m = {m}");
        }
    }
}

#[test]
fn family_names() {
    assert_eq!(Family::of(0.0).name(), "cylinder");
    assert_eq!(Family::of(0.3).name(), "unduloid");
    assert_eq!(Family::of(FRAC_PI_2).name(), "sphere_stack");
    assert_eq!(Family::of(2.0).name(), "nodoid");
}

#[test]
fn find_lambda_low_resolution() {
    let cfg = SolverConfig::with_resolution(16);
    let p = AmbientParams::new(1.0, 0.7).unwrap();
    let root = find_lambda_m(&p, 2, &cfg, 1e-2).unwrap();
    assert!(root.bracket[1] - root.bracket[0] < 1e-2);
    assert!(root.bracket[0] <= root.lambda && root.lambda <= root.bracket[1]);
    assert!(root.lambda > 0.0 && root.lambda < FRAC_PI_2);
    // the fine-grid root is near 1.196
    assert!((root.lambda - 1.196).abs() < 0.1, "{}", root.lambda);
    assert!(root.residual.abs() < 0.05);
    assert!(root.evaluations >= 7);
    assert!(matches!(find_lambda_m(&AmbientParams::new(1.0, 0.9).unwrap(), 2, &cfg, 1e-2), Err(Error::NoRoot(_))));
    assert!(find_lambda_m(&AmbientParams::new(0.0, 0.7).unwrap(), 2, &cfg, 1e-2).is_err());
    assert!(find_lambda_m(&p, 0, &cfg, 1e-2).is_err());
    assert!(find_lambda_m(&p, 2, &cfg, 0.0).is_err());
}

#[test]
fn scan_is_deterministic_and_order_independent() {
    let cfg = SolverConfig::with_resolution(12);
    let grid = ScanGrid::Lambda { kappa: 1.0, h_over_sqrt_kappa: vec![0.7, 1.0], lambdas: vec![0.5, 2.0] };
    let a = scan(&grid, &cfg, 1e-2, true).unwrap();
    let b = scan(&grid, &cfg, 1e-2, false).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.cells.len(), 4);
    let coords: Vec<(f64, f64)> = a.cells.iter().map(|c| (c.h_over_sqrt_kappa, c.coordinate)).collect();
    assert_eq!(coords, vec![(0.7, 0.5), (0.7, 2.0), (1.0, 0.5), (1.0, 2.0)]);
    let families: Vec<Family> = a.records().map(|r| r.family).collect();
    assert_eq!(families, vec![Family::Unduloid, Family::Nodoid, Family::Unduloid, Family::Nodoid]);
    let csv = records_csv(a.records()).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn lobe_scan_records_failures() {
    let cfg = SolverConfig::with_resolution(8);
    let grid = ScanGrid::Lobes { kappa: 1.0, h_over_sqrt_kappa: vec![0.4, 0.45], ms: vec![2, 3] };
    let r = scan(&grid, &cfg, 1e-2, false).unwrap();
    assert_eq!(r.records().count(), 0);
    assert!(r.cells.iter().all(|c| c.failure.as_deref().is_some_and(|f| f.contains("lambda = pi/2 fails"))));
    assert!(scan(&ScanGrid::Lobes { kappa: 1.0, h_over_sqrt_kappa: vec![], ms: vec![2] }, &cfg, 1e-2, false).is_err());
    assert!(scan(&ScanGrid::Lobes { kappa: 1.0, h_over_sqrt_kappa: vec![-1.0], ms: vec![2] }, &cfg, 1e-2, false).is_err());
}

#[test]
fn svg_figure_fidelity() {
    let torus = classify(&input(1.0, 0.7, 1.2, FRAC_PI_2, Some(2)));
    let svg = moduli_svg(1.0, 6, 3.0, &[torus]).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 600"));
    assert_eq!(root.attribute("width"), Some("800"));
    let frame = FigureFrame { x_max: 3.0, m_max: 6 };
    let windows: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("window")).collect();
    assert_eq!(windows.len(), 5);
    for node in &windows {
        let m: u32 = node.attribute("data-m").unwrap().parse().unwrap();
        let lo: f64 = node.attribute("data-lo").unwrap().parse().unwrap();
        let hi: f64 = node.attribute("data-hi").unwrap().parse().unwrap();
        let mf = m as f64;
        assert!((lo - 0.5 / (PI / (2.0 * mf)).tan()).abs() < 1e-9, "m = {m}");
        assert!((hi - 0.5 * (mf * mf - 1.0).sqrt()).abs() < 1e-9, "m = {m}");
        let x1: f64 = node.attribute("x1").unwrap().parse().unwrap();
        assert!((frame.x_of(x1) - lo).abs() < 1e-3);
        let y: f64 = node.attribute("y1").unwrap().parse().unwrap();
        assert!((y - frame.py(mf)).abs() < 1e-3);
    }
    let threshold = doc.descendants().find(|n| n.attribute("class") == Some("threshold")).unwrap();
    let x: f64 = threshold.attribute("x1").unwrap().parse().unwrap();
    assert!((frame.x_of(x) - 0.5).abs() < 1e-3);
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("record")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("region")).count(), 1);
    assert!(moduli_svg(1.0, 1, 3.0, &[]).is_err());
    assert!(moduli_svg(1.0, 4, 0.4, &[]).is_err());
}

#[test]
fn figure_frame_round_trip() {
    let f = FigureFrame { x_max: 2.5, m_max: 5 };
    for x in [0.0, 0.3, 1.7, 2.5] {
        assert!((f.x_of(f.px(x)) - x).abs() < 1e-12);
    }
    assert!(f.py(1.0) > f.py(2.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplest_fraction_matches_brute_force(a in 0.0f64..3.0, w in 0.0f64..0.05) {
        let b = a + w;
        prop_assert_eq!(simplest_fraction(a, b, 64), brute_fraction(a, b, 64));
    }

    #[test]
    fn families_cover_the_line(lambda in 0.0f64..(2.0 * PI)) {
        let f = Family::of(lambda);
        let expected = if lambda == 0.0 {
            Family::Cylinder
        } else if lambda < FRAC_PI_2 {
            Family::Unduloid
        } else if lambda == FRAC_PI_2 {
            Family::SphereStack
        } else {
            Family::Nodoid
        };
        prop_assert_eq!(f, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn roots_exist_exactly_in_the_window(h in 0.3f64..1.6, m in 2u32..4) {
        let cfg = SolverConfig::with_resolution(10);
        let found = find_lambda_m(&AmbientParams::new(1.0, h).unwrap(), m, &cfg, 5e-2);
        prop_assert_eq!(found.is_ok(), embedded_window(1.0, m).unwrap().contains(h), "H = {}, m = {}", h, m);
    }
}
