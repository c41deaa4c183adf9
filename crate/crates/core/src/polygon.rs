//! The geodesic quadrilateral Γ̃_λ ⊂ M(κ_b, τ_b) with arcs h̃₀, h̃₁, h̃₂, ṽ.

use crate::ambient::{killing_submersion_base, omega_residual, AmbientParams, PointM};
use crate::error::{Error, Result};
use crate::geometry::Metric3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcTag {
    H0,
    H1,
    H2,
    V,
}

impl ArcTag {
    pub const ALL: [ArcTag; 4] = [ArcTag::H0, ArcTag::H1, ArcTag::H2, ArcTag::V];

    pub fn name(&self) -> &'static str {
        match self {
            ArcTag::H0 => "h0",
            ArcTag::H1 => "h1",
            ArcTag::H2 => "h2",
            ArcTag::V => "v",
        }
    }
}

/// One arc of Γ̃_λ with its closed-form parametrization on [s0, s1] (s1 < s0 allowed).
#[derive(Clone, Debug)]
pub struct Arc {
    pub tag: ArcTag,
    pub s0: f64,
    pub s1: f64,
    pub samples: Vec<(f64, PointM)>,
    params: AmbientParams,
    lambda: f64,
}

impl Arc {
    fn new(params: AmbientParams, lambda: f64, tag: ArcTag, s0: f64, s1: f64, n: usize) -> Self {
        let mut arc = Arc { tag, s0, s1, samples: Vec::with_capacity(n), params, lambda };
        for k in 0..n {
            let s = s0 + (s1 - s0) * k as f64 / (n - 1) as f64;
            arc.samples.push((s, arc.position(s)));
        }
        arc
    }

    pub fn span(&self) -> f64 {
        (self.s1 - self.s0).abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.span() < 1e-9
    }

    fn consts(&self) -> (f64, f64) {
        (self.params.radius(), 4.0 * self.params.h / self.params.kappa_b)
    }

    pub fn position(&self, s: f64) -> PointM {
        let (r, c) = self.consts();
        match self.tag {
            ArcTag::H0 => PointM::new(r * (FRAC_PI_4 - s).tan(), 0.0, 0.0),
            ArcTag::H1 => {
                let (sn, cs) = (2.0 * s).sin_cos();
                PointM::new(r * sn, r * cs, c * (s - FRAC_PI_4))
            }
            ArcTag::H2 => {
                let (sn, cs) = (2.0 * s).sin_cos();
                PointM::new(r * sn, r * cs, c * (s + FRAC_PI_4))
            }
            ArcTag::V => {
                let (sn, cs) = self.lambda.sin_cos();
                PointM::new(r * sn, r * cs, c * (s + 0.5 * self.lambda - FRAC_PI_4))
            }
        }
    }

    pub fn velocity(&self, s: f64) -> PointM {
        let (r, c) = self.consts();
        match self.tag {
            ArcTag::H0 => {
                let sec = 1.0 / (FRAC_PI_4 - s).cos();
                PointM::new(-r * sec * sec, 0.0, 0.0)
            }
            ArcTag::H1 | ArcTag::H2 => {
                let (sn, cs) = (2.0 * s).sin_cos();
                PointM::new(2.0 * r * cs, -2.0 * r * sn, c)
            }
            ArcTag::V => PointM::new(0.0, 0.0, c),
        }
    }

    pub fn acceleration(&self, s: f64) -> PointM {
        let (r, _) = self.consts();
        match self.tag {
            ArcTag::H0 => {
                let a = FRAC_PI_4 - s;
                let sec = 1.0 / a.cos();
                PointM::new(2.0 * r * sec * sec * a.tan(), 0.0, 0.0)
            }
            ArcTag::H1 | ArcTag::H2 => {
                let (sn, cs) = (2.0 * s).sin_cos();
                PointM::new(-4.0 * r * sn, -4.0 * r * cs, 0.0)
            }
            ArcTag::V => PointM::zeros(),
        }
    }

    /// Metric speed |γ'(s)|, constant along each arc.
    pub fn speed(&self) -> f64 {
        let (r, c) = self.consts();
        match self.tag {
            ArcTag::V => c,
            _ => r,
        }
    }

    /// Unsigned metric length.
    pub fn length(&self) -> f64 {
        self.speed() * self.span()
    }
}

/// Γ̃_λ with vertices 1̃ = h̃₀ ∩ h̃₂, 2̃ = h̃₀ ∩ h̃₁, 3̃ = h̃₁ ∩ ṽ, 4̃ = ṽ ∩ h̃₂.
#[derive(Clone, Debug)]
pub struct GeodesicPolygon {
    pub params: AmbientParams,
    pub lambda: f64,
    pub arcs: [Arc; 4],
    pub vertices: [PointM; 4],
}

impl GeodesicPolygon {
    pub fn arc(&self, tag: ArcTag) -> &Arc {
        &self.arcs[tag as usize]
    }
}

pub fn build_polygon(params: &AmbientParams, lambda: f64, n_per_arc: usize) -> Result<GeodesicPolygon> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if n_per_arc < 2 {
        return Err(Error::InvalidParameter("n_per_arc must be at least 2".into()));
    }
    let p = *params;
    let arcs = [
        Arc::new(p, lambda, ArcTag::H0, 0.0, FRAC_PI_2, n_per_arc),
        Arc::new(p, lambda, ArcTag::H1, FRAC_PI_4, 0.5 * lambda, n_per_arc),
        Arc::new(p, lambda, ArcTag::H2, -FRAC_PI_4, 0.5 * lambda, n_per_arc),
        Arc::new(p, lambda, ArcTag::V, 0.0, FRAC_PI_2, n_per_arc),
    ];
    let vertices = [
        arcs[0].position(FRAC_PI_2),
        arcs[0].position(0.0),
        arcs[1].position(0.5 * lambda),
        arcs[3].position(FRAC_PI_2),
    ];
    Ok(GeodesicPolygon { params: p, lambda, arcs, vertices })
}

#[derive(Clone, Debug, Serialize)]
pub struct PolygonReport {
    pub closure: [f64; 4],
    pub geodesic_residual: f64,
    pub corner_angles: [f64; 4],
    pub omega_residual: f64,
    pub h1_base_spread: f64,
    pub h2_base_spread: f64,
    pub h0_min_base_separation: f64,
    pub v_min_base_separation: f64,
    pub passed: bool,
}

fn metric_angle(g: &nalgebra::Matrix3<f64>, a: &PointM, b: &PointM) -> f64 {
    let c = a.dot(&(g * b)) / (a.dot(&(g * a)) * b.dot(&(g * b))).sqrt();
    c.clamp(-1.0, 1.0).acos()
}

/// Closure, geodesic, corner-angle, Ω-membership and Nitsche-graph diagnostics.
pub fn validate(poly: &GeodesicPolygon) -> PolygonReport {
    let params = &poly.params;
    let model = params.model();
    let lam = poly.lambda;
    let [h0, h1, h2, v] = &poly.arcs;
    let closure = [
        (h0.position(FRAC_PI_2) - h2.position(-FRAC_PI_4)).norm(),
        (h0.position(0.0) - h1.position(FRAC_PI_4)).norm(),
        (h1.position(0.5 * lam) - v.position(0.0)).norm(),
        (v.position(FRAC_PI_2) - h2.position(0.5 * lam)).norm(),
    ];

    let mut geo = 0.0f64;
    let mut omega = f64::NEG_INFINITY;
    for arc in &poly.arcs {
        let sp2 = arc.speed().powi(2);
        for (s, p) in &arc.samples {
            let vel = arc.velocity(*s);
            let r = arc.acceleration(*s) + model.gamma_apply(p, &vel, &vel);
            let g = model.metric(p);
            geo = geo.max(r.dot(&(g * r)).sqrt() / sp2);
            omega = omega.max(omega_residual(params, p));
        }
    }

    // interior angle at each vertex between the two outgoing arc directions
    let ends = |arc: &Arc, at_start: bool| {
        let s = if at_start { arc.s0 } else { arc.s1 };
        let dir = if arc.s1 >= arc.s0 { 1.0 } else { -1.0 };
        arc.velocity(s) * if at_start { dir } else { -dir }
    };
    let angle = |p: &PointM, a: PointM, b: PointM| metric_angle(&model.metric(p), &a, &b);
    let vx = &poly.vertices;
    let corner_angles = [
        angle(&vx[0], ends(h0, false), ends(h2, true)),
        angle(&vx[1], ends(h0, true), ends(h1, true)),
        angle(&vx[2], ends(h1, false), ends(v, true)),
        angle(&vx[3], ends(v, false), ends(h2, false)),
    ];

    let spread = |arc: &Arc| {
        let b0 = killing_submersion_base(params, &arc.samples[0].1);
        arc.samples
            .iter()
            .map(|(_, p)| (killing_submersion_base(params, p) - b0).norm())
            .fold(0.0, f64::max)
    };
    let min_sep = |arc: &Arc| {
        let b: Vec<_> = arc.samples.iter().map(|(_, p)| killing_submersion_base(params, p)).collect();
        let mut m = f64::INFINITY;
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                m = m.min((b[i] - b[j]).norm());
            }
        }
        m
    };
    let h1_base_spread = spread(h1);
    let h2_base_spread = spread(h2);
    let h0_min_base_separation = min_sep(h0);
    let v_min_base_separation = min_sep(v);
    // corners adjacent to a collapsed arc have no meaningful angle
    let angle_ok = corner_angles
        .iter()
        .enumerate()
        .all(|(i, a)| (a - FRAC_PI_2).abs() < 1e-6 || (h1.is_degenerate() && (i == 1 || i == 2)));
    let passed = closure.iter().all(|c| *c < 1e-12)
        && geo < 1e-6
        && angle_ok
        && omega <= 1e-9
        && h1_base_spread < 1e-9
        && h2_base_spread < 1e-9
        && h0_min_base_separation > 0.0
        && v_min_base_separation > 0.0;
    PolygonReport {
        closure,
        geodesic_residual: geo,
        corner_angles,
        omega_residual: omega,
        h1_base_spread,
        h2_base_spread,
        h0_min_base_separation,
        v_min_base_separation,
        passed,
    }
}
