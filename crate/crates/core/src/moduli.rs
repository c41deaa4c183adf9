//! Parameter space of the family: the ℓ₀(λ) pipeline, λ_m(H) root finding, the embeddedness window,
//! classification and the moduli figure.

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::io::{csv_string, num};
use crate::plateau::{solve_plateau, SolverConfig};
use crate::polygon::build_polygon;
use crate::sister::{boundary_observables, conjugate_mesh, Observables};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

const LAMBDA_EPS: f64 = 1e-12;

/// ℓ₀ at the requested resolution with the difference to half resolution as error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ell0 {
    pub value: f64,
    pub error: f64,
    pub coarse: Option<f64>,
}

impl Ell0 {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.error, self.value + self.error)
    }
}

/// Observables of one (κ, H, λ) with the ℓ₀ error bar.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: AmbientParams,
    pub lambda: f64,
    pub obs: Observables,
    pub ell0: Ell0,
    pub holonomy: Option<f64>,
}

type CacheKey = (u64, u64, u64, String);

fn cache() -> &'static Mutex<HashMap<CacheKey, Ell0>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Ell0>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_key(params: &AmbientParams, lambda: f64, config: &SolverConfig) -> CacheKey {
    let cfg = serde_json::to_string(config).expect("solver config serializes");
    (params.kappa.to_bits(), params.h.to_bits(), lambda.to_bits(), cfg)
}

fn coarse_config(config: &SolverConfig) -> Option<SolverConfig> {
    let n = config.resolution / 2;
    (n >= 8).then(|| SolverConfig { resolution: n, ..config.clone() })
}

fn observe(params: &AmbientParams, lambda: f64, config: &SolverConfig) -> Result<(Observables, crate::plateau::SurfaceMesh)> {
    let poly = build_polygon(params, lambda, config.resolution + 1)?;
    let sol = solve_plateau(&poly, config)?;
    let obs = boundary_observables(&sol.mesh)?;
    Ok((obs, sol.mesh))
}

fn error_bar(fine: &Observables, coarse: Option<&Observables>) -> (f64, Option<f64>) {
    match coarse {
        Some(c) => ((fine.ell[0] - c.ell[0]).abs(), Some(c.ell[0])),
        None => (fine.ell_err[0], None),
    }
}

/// ℓ₀(λ) through polygon → Plateau → boundary integral. Results are cached per (κ, H, λ, config).
pub fn ell0(params: &AmbientParams, lambda: f64, config: &SolverConfig) -> Result<Ell0> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    config.validate()?;
    let key = cache_key(params, lambda, config);
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(*hit);
    }
    let (fine, _) = observe(params, lambda, config)?;
    let coarse = match coarse_config(config) {
        Some(c) => Some(observe(params, lambda, &c)?.0),
        None => None,
    };
    let (error, coarse) = error_bar(&fine, coarse.as_ref());
    let out = Ell0 { value: fine.ell[0], error, coarse };
    cache().lock().expect("cache lock").insert(key, out);
    Ok(out)
}

/// Full observables, error bar and conjugation holonomy at one parameter point.
pub fn evaluate(params: &AmbientParams, lambda: f64, config: &SolverConfig) -> Result<Evaluation> {
    config.validate()?;
    let (obs, mesh) = observe(params, lambda, config)?;
    let coarse = match coarse_config(config) {
        Some(c) => Some(observe(params, lambda, &c)?.0),
        None => None,
    };
    let (error, coarse_value) = error_bar(&obs, coarse.as_ref());
    let ell0 = Ell0 { value: obs.ell[0], error, coarse: coarse_value };
    cache().lock().expect("cache lock").insert(cache_key(params, lambda, config), ell0);
    let holonomy = conjugate_mesh(&mesh).ok().map(|c| c.holonomy);
    Ok(Evaluation { params: *params, lambda, obs, ell0, holonomy })
}

/// ℓ₀(0) = π/√(4H²+κ), a quarter of the horizontal geodesic of the cylinder.
pub fn ell0_cylinder(params: &AmbientParams) -> f64 {
    PI / params.kappa_b.sqrt()
}

/// ℓ₀(π/2) = (2/√κ) arctan(√κ/2H), the radius of the H-sphere domain (κ > 0).
pub fn ell0_sphere(params: &AmbientParams) -> f64 {
    let k = params.kappa;
    if k > 0.0 {
        2.0 / k.sqrt() * (k.sqrt() / (2.0 * params.h)).atan()
    } else if k == 0.0 {
        1.0 / params.h
    } else {
        2.0 / (-k).sqrt() * ((-k).sqrt() / (2.0 * params.h)).atanh()
    }
}

/// Half-open window (lo, hi] of H for which an embedded m-lobed torus exists.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub m: u32,
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn contains(&self, h: f64) -> bool {
        h > self.lo && h <= self.hi
    }
}

pub fn embedded_window(kappa: f64, m: u32) -> Result<Window> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("window needs kappa > 0, got {kappa}")));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("no embedded window for m = {m}; m must be at least 2")));
    }
    let s = 0.5 * kappa.sqrt();
    let mf = m as f64;
    Ok(Window { m, lo: s / (PI / (2.0 * mf)).tan(), hi: s * (mf * mf - 1.0).sqrt() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRoot {
    pub m: u32,
    pub lambda: f64,
    pub bracket: [f64; 2],
    /// ℓ₀(λ) − π/(m√κ) at the returned λ.
    pub residual: f64,
    pub ell0: Ell0,
    /// Bisection steps whose sign was inside the ℓ₀ error bar.
    pub uncertain_steps: usize,
    /// Half-width of the bracket grown by the error bar over the local slope of ℓ₀.
    pub uncertainty: f64,
    pub evaluations: usize,
}

/// Target ℓ₀ = π/(m√κ) of a surface closing after 2m fundamental pieces.
pub fn closing_target(kappa: f64, m: u32) -> f64 {
    PI / (m as f64 * kappa.sqrt())
}

/// λ_m(H) by bisection of ℓ₀(λ) − π/(m√κ) on [0, π/2]. The bracket endpoints use the closed-form
/// values of the cylinder and the sphere stack.
pub fn find_lambda_m(params: &AmbientParams, m: u32, config: &SolverConfig, width: f64) -> Result<LambdaRoot> {
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("closing needs kappa > 0, got {}", params.kappa)));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    if !(width > 0.0) {
        return Err(Error::InvalidParameter("bracket width must be positive".into()));
    }
    let target = closing_target(params.kappa, m);
    let f0 = ell0_cylinder(params) - target;
    let f1 = ell0_sphere(params) - target;
    if f0 < 0.0 {
        return Err(Error::NoRoot(format!(
            "lambda = 0 fails: ell0(0) = {:.6} < pi/(m sqrt(kappa)) = {:.6} (2H/sqrt(kappa) above sqrt(m^2-1) for m = {m})",
            f0 + target,
            target
        )));
    }
    if f1 >= 0.0 {
        return Err(Error::NoRoot(format!(
            "lambda = pi/2 fails: ell0(pi/2) = {:.6} >= pi/(m sqrt(kappa)) = {:.6} (2H/sqrt(kappa) not above cot(pi/2m) for m = {m})",
            f1 + target,
            target
        )));
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    let mut evaluations = 0;
    let mut uncertain_steps = 0;
    let mut history: Vec<(f64, f64, f64)> = vec![(0.0, f0, 0.0), (FRAC_PI_2, f1, 0.0)];
    if f0 == 0.0 {
        hi = 0.0;
    }
    while hi - lo >= width {
        let mid = 0.5 * (lo + hi);
        let e = ell0(params, mid, config)?;
        evaluations += 1;
        let f = e.value - target;
        if f.abs() <= e.error {
            uncertain_steps += 1;
        }
        history.push((mid, f, e.error));
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let e = if lambda == 0.0 {
        Ell0 { value: ell0_cylinder(params), error: 0.0, coarse: None }
    } else {
        evaluations += 1;
        ell0(params, lambda, config)?
    };
    // secant slope over the widest pair of decisive evaluations
    let decisive: Vec<_> = history.iter().filter(|(_, f, err)| f.abs() > *err).collect();
    let slope = decisive
        .iter()
        .flat_map(|a| decisive.iter().map(move |b| (a, b)))
        .filter(|(a, b)| b.0 > a.0)
        .max_by(|x, y| (x.1 .0 - x.0 .0).total_cmp(&(y.1 .0 - y.0 .0)))
        .map(|(a, b)| ((b.1 - a.1) / (b.0 - a.0)).abs())
        .unwrap_or(f64::INFINITY);
    let max_err = history.iter().map(|h| h.2).fold(e.error, f64::max);
    Ok(LambdaRoot {
        m,
        lambda,
        bracket: [lo, hi],
        residual: e.value - target,
        ell0: e,
        uncertain_steps,
        uncertainty: 0.5 * (hi - lo) + max_err / slope,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cylinder,
    Unduloid,
    SphereStack,
    Nodoid,
}

impl Family {
    pub fn of(lambda: f64) -> Family {
        if lambda.abs() < LAMBDA_EPS {
            Family::Cylinder
        } else if (lambda - FRAC_PI_2).abs() < LAMBDA_EPS {
            Family::SphereStack
        } else if lambda < FRAC_PI_2 {
            Family::Unduloid
        } else {
            Family::Nodoid
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Cylinder => "cylinder",
            Family::Unduloid => "unduloid",
            Family::SphereStack => "sphere_stack",
            Family::Nodoid => "nodoid",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compactness {
    /// ℓ₀ / (2π/√κ) = p/q.
    Compact { p: u64, q: u64 },
    /// Invariant under the full rotation group about Γ (the cylinder for κ > 0).
    Torus,
    NonCompact,
    Undetermined,
}

impl Compactness {
    pub fn name(&self) -> String {
        match self {
            Compactness::Compact { p, q } => format!("true({p}/{q})"),
            Compactness::Torus => "true(torus)".into(),
            Compactness::NonCompact => "false".into(),
            Compactness::Undetermined => "undetermined".into(),
        }
    }
}

/// Simplest fraction in [a, b] (0 ≤ a ≤ b) by continued-fraction descent; None past `q_max`.
pub fn simplest_fraction(a: f64, b: f64, q_max: u64) -> Option<(u64, u64)> {
    fn go(a: f64, b: f64, q_max: u64, depth: usize) -> Option<(u64, u64)> {
        if depth > 40 {
            return None;
        }
        let fl = a.floor();
        if fl == a {
            return Some((a as u64, 1));
        }
        if fl + 1.0 <= b {
            return Some((fl as u64 + 1, 1));
        }
        let (p, q) = go(1.0 / (b - fl), 1.0 / (a - fl), q_max, depth + 1)?;
        let (num, den) = (fl as u64 * p + q, p);
        (den <= q_max).then_some((num, den))
    }
    if !(a >= 0.0) || !(b >= a) {
        return None;
    }
    go(a, b, q_max, 0)
}

fn count_fractions(a: f64, b: f64, q_max: u64) -> usize {
    let mut count = 0;
    for q in 1..=q_max {
        let (p_lo, p_hi) = ((a * q as f64).ceil() as u64, (b * q as f64).floor() as u64);
        count += (p_lo..=p_hi).filter(|&p| gcd(p, q) == 1).count();
    }
    count
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Compactness from ℓ₀ ± err: compact when exactly one fraction p/q with q ≤ q_max matches
/// ℓ₀√κ/2π, undetermined when several do.
pub fn compactness(kappa: f64, ell0: f64, err: f64, q_max: u64) -> Compactness {
    if !(kappa > 0.0) {
        return Compactness::NonCompact;
    }
    let scale = kappa.sqrt() / (2.0 * PI);
    let tol = err.max(1e-12) * scale;
    let x = ell0 * scale;
    let (a, b) = ((x - tol).max(0.0), x + tol);
    match count_fractions(a, b, q_max) {
        0 => Compactness::NonCompact,
        1 => simplest_fraction(a, b, q_max)
            .map(|(p, q)| Compactness::Compact { p, q })
            .unwrap_or(Compactness::Undetermined),
        _ => Compactness::Undetermined,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuliRecord {
    pub kappa: f64,
    pub h_mean: f64,
    pub lambda: f64,
    pub ell: [f64; 3],
    pub mu: [f64; 3],
    pub family: Family,
    pub compact: Compactness,
    pub embedded: bool,
    pub err_ell0: f64,
    pub holonomy: Option<f64>,
    /// Lobe count when λ is the root λ_m(H).
    pub m: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct ClassifyInput {
    pub kappa: f64,
    pub h_mean: f64,
    pub lambda: f64,
    pub obs: Observables,
    pub err_ell0: f64,
    pub holonomy: Option<f64>,
    pub m: Option<u32>,
    pub q_max: u64,
}

impl ClassifyInput {
    pub fn from_evaluation(eval: &Evaluation, m: Option<u32>) -> Self {
        Self {
            kappa: eval.params.kappa,
            h_mean: eval.params.h,
            lambda: eval.lambda,
            obs: eval.obs,
            err_ell0: eval.ell0.error,
            holonomy: eval.holonomy,
            m,
            q_max: 64,
        }
    }
}

pub fn classify(input: &ClassifyInput) -> ModuliRecord {
    let family = Family::of(input.lambda);
    let in_window = input
        .m
        .and_then(|m| embedded_window(input.kappa, m).ok())
        .is_some_and(|w| w.contains(input.h_mean));
    let compact = match (input.kappa > 0.0, input.m) {
        (false, _) => Compactness::NonCompact,
        (true, _) if family == Family::Cylinder => Compactness::Torus,
        (true, Some(m)) if in_window => Compactness::Compact { p: 1, q: 2 * m as u64 },
        (true, _) => compactness(input.kappa, input.obs.ell[0], input.err_ell0, input.q_max),
    };
    let embedded = match family {
        Family::Cylinder | Family::SphereStack => true,
        Family::Nodoid => false,
        Family::Unduloid => input.kappa <= 0.0 || in_window,
    };
    ModuliRecord {
        kappa: input.kappa,
        h_mean: input.h_mean,
        lambda: input.lambda,
        ell: input.obs.ell,
        mu: input.obs.mu,
        family,
        compact,
        embedded,
        err_ell0: input.err_ell0,
        holonomy: input.holonomy,
        m: input.m,
    }
}

/// Scan grid with H given as H/√κ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ScanGrid {
    Lambda { kappa: f64, h_over_sqrt_kappa: Vec<f64>, lambdas: Vec<f64> },
    Lobes { kappa: f64, h_over_sqrt_kappa: Vec<f64>, ms: Vec<u32> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanCell {
    pub h_over_sqrt_kappa: f64,
    /// λ or m, depending on the grid.
    pub coordinate: f64,
    pub record: Option<ModuliRecord>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub kappa: f64,
    pub cells: Vec<ScanCell>,
}

impl ScanResult {
    pub fn records(&self) -> impl Iterator<Item = &ModuliRecord> {
        self.cells.iter().filter_map(|c| c.record.as_ref())
    }
}

fn scan_cell(kappa: f64, x: f64, coord: f64, lobes: bool, config: &SolverConfig, width: f64) -> ScanCell {
    let h = if kappa > 0.0 { x * kappa.sqrt() } else { x };
    let run = || -> Result<ModuliRecord> {
        let params = AmbientParams::new(kappa, h)?;
        if lobes {
            let m = coord as u32;
            let root = find_lambda_m(&params, m, config, width)?;
            let eval = evaluate(&params, root.lambda, config)?;
            let mut input = ClassifyInput::from_evaluation(&eval, Some(m));
            input.err_ell0 = eval.ell0.error.max(root.residual.abs());
            Ok(classify(&input))
        } else {
            let eval = evaluate(&params, coord, config)?;
            Ok(classify(&ClassifyInput::from_evaluation(&eval, None)))
        }
    };
    match run() {
        Ok(r) => ScanCell { h_over_sqrt_kappa: x, coordinate: coord, record: Some(r), failure: None },
        Err(e) => ScanCell { h_over_sqrt_kappa: x, coordinate: coord, record: None, failure: Some(e.to_string()) },
    }
}

/// Evaluates every grid cell; failures are recorded per cell. Output order is grid order either way.
pub fn scan(grid: &ScanGrid, config: &SolverConfig, width: f64, parallel: bool) -> Result<ScanResult> {
    let (kappa, xs, coords, lobes) = match grid {
        ScanGrid::Lambda { kappa, h_over_sqrt_kappa, lambdas } => (*kappa, h_over_sqrt_kappa, lambdas.clone(), false),
        ScanGrid::Lobes { kappa, h_over_sqrt_kappa, ms } => {
            (*kappa, h_over_sqrt_kappa, ms.iter().map(|m| *m as f64).collect(), true)
        }
    };
    if xs.is_empty() || coords.is_empty() {
        return Err(Error::InvalidParameter("scan grid is empty".into()));
    }
    if xs.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("H/sqrt(kappa) values must be positive".into()));
    }
    let jobs: Vec<(f64, f64)> = xs.iter().flat_map(|x| coords.iter().map(move |c| (*x, *c))).collect();
    let cells = if parallel {
        jobs.par_iter().map(|(x, c)| scan_cell(kappa, *x, *c, lobes, config, width)).collect()
    } else {
        jobs.iter().map(|(x, c)| scan_cell(kappa, *x, *c, lobes, config, width)).collect()
    };
    Ok(ScanResult { kappa, cells })
}

pub const CSV_HEADER: [&str; 14] = [
    "kappa", "H", "lambda", "ell0", "ell1", "ell2", "mu0", "mu1", "mu2", "family", "compact", "embedded", "err_ell0",
    "holonomy",
];

pub fn record_row(r: &ModuliRecord) -> Vec<String> {
    let mut row = vec![num(r.kappa), num(r.h_mean), num(r.lambda)];
    row.extend(r.ell.iter().map(|v| num(*v)));
    row.extend(r.mu.iter().map(|v| num(*v)));
    row.push(r.family.name().into());
    row.push(r.compact.name());
    row.push(r.embedded.to_string());
    row.push(num(r.err_ell0));
    row.push(r.holonomy.map(num).unwrap_or_default());
    row
}

pub fn records_csv<'a>(records: impl IntoIterator<Item = &'a ModuliRecord>) -> Result<String> {
    let rows: Vec<Vec<String>> = records.into_iter().map(record_row).collect();
    csv_string(&CSV_HEADER, &rows)
}

/// Plot frame of the moduli figure: x = H/√κ, y = m.
#[derive(Clone, Copy, Debug)]
pub struct FigureFrame {
    pub x_max: f64,
    pub m_max: u32,
}

impl FigureFrame {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 30.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 60.0;

    pub fn px(&self, x: f64) -> f64 {
        Self::LEFT + x / self.x_max * (Self::W - Self::LEFT - Self::RIGHT)
    }

    pub fn py(&self, m: f64) -> f64 {
        let top = self.m_max as f64 + 0.5;
        Self::H - Self::BOTTOM - (m - 1.0) / (top - 1.0) * (Self::H - Self::TOP - Self::BOTTOM)
    }

    pub fn x_of(&self, px: f64) -> f64 {
        (px - Self::LEFT) / (Self::W - Self::LEFT - Self::RIGHT) * self.x_max
    }
}

/// SVG of the moduli space: shaded region of real m with λ_m ∈ [0, π/2], dotted window segments at
/// integer m, dashed line at H/√κ = 1/2 and the scan records.
pub fn moduli_svg(kappa: f64, m_max: u32, x_max: f64, records: &[ModuliRecord]) -> Result<String> {
    if m_max < 2 || !(x_max > 0.5) {
        return Err(Error::InvalidParameter("figure needs m_max >= 2 and x_max > 1/2".into()));
    }
    let f = FigureFrame { x_max, m_max };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);

    // region cot(π/2m)/2 < x ≤ √(m²−1)/2 for real m ∈ [1, m_max + 1/2]
    let top = m_max as f64 + 0.5;
    let steps = 200;
    let ms: Vec<f64> = (0..=steps).map(|k| 1.0 + (top - 1.0) * k as f64 / steps as f64).collect();
    let mut pts: Vec<(f64, f64)> = ms.iter().map(|&m| ((0.5 / (PI / (2.0 * m)).tan()).min(x_max), m)).collect();
    pts.extend(ms.iter().rev().map(|&m| ((0.5 * (m * m - 1.0).sqrt()).min(x_max), m)));
    let poly: Vec<String> = pts.iter().map(|(x, m)| format!("{:.2},{:.2}", f.px(*x), f.py(*m))).collect();
    let _ = writeln!(s, r##"<polygon class="region" points="{}" fill="#bbbbbb" stroke="none"/>"##, poly.join(" "));

    for m in 2..=m_max {
        // window in units of √κ
        let w = embedded_window(1.0, m)?;
        let (x0, x1) = (w.lo, w.hi.min(x_max));
        if x0 >= x_max {
            continue;
        }
        let y = f.py(m as f64);
        let _ = writeln!(
            s,
            r#"<line class="window" data-m="{m}" data-lo="{}" data-hi="{}" x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="black" stroke-width="2" stroke-dasharray="2,4"/>"#,
            num(w.lo),
            num(w.hi),
            f.px(x0),
            f.px(x1)
        );
    }
    let (xh, y0, y1) = (f.px(0.5), f.py(1.0), f.py(top));
    let _ = writeln!(
        s,
        r#"<line class="threshold" x1="{xh:.3}" y1="{y0:.3}" x2="{xh:.3}" y2="{y1:.3}" stroke="black" stroke-dasharray="8,6"/>"#
    );

    // axes
    let (ax0, ax1) = (f.px(0.0), f.px(x_max));
    let _ = writeln!(s, r#"<line x1="{ax0:.3}" y1="{y0:.3}" x2="{ax1:.3}" y2="{y0:.3}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{ax0:.3}" y1="{y0:.3}" x2="{ax0:.3}" y2="{y1:.3}" stroke="black"/>"#);
    let ticks = (x_max * 2.0).floor() as usize;
    for k in 0..=ticks {
        let x = 0.5 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">{x}</text>"#,
            f.px(x),
            y0 + 18.0
        );
    }
    for m in 1..=m_max {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="end">{m}</text>"#,
            ax0 - 8.0,
            f.py(m as f64) + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="590" font-size="14" text-anchor="middle">H/sqrt(kappa)</text>"#, f.px(0.5 * x_max));
    let _ = writeln!(s, r#"<text x="20" y="{:.3}" font-size="14" text-anchor="middle">m</text>"#, f.py(0.5 * (1.0 + top)));

    for r in records.iter().filter(|r| r.m.is_some()) {
        let x = r.h_mean / kappa.sqrt();
        let _ = writeln!(
            s,
            r##"<circle class="record" cx="{:.3}" cy="{:.3}" r="3" fill="{}"/>"##,
            f.px(x.min(x_max)),
            f.py(r.m.unwrap_or(1) as f64),
            if r.embedded { "#1f4e9a" } else { "#b22222" }
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
