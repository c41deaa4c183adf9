use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use serde::{Deserialize, Serialize};

/// Point of M²(κ)×ℝ: base in the quadric model, plus height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointProd {
    pub base: Vector3<f64>,
    pub height: f64,
}

impl PointProd {
    pub fn to_r4(&self) -> Vector4<f64> {
        Vector4::new(self.base.x, self.base.y, self.base.z, self.height)
    }
}

/// M²(κ)×ℝ with M²(κ) the sphere ⟨p,p⟩ = 1/κ (κ > 0), the plane p₃ = 0 (κ = 0) or the upper
/// sheet of ⟨p,p⟩_L = 1/κ in Minkowski space (κ < 0). Tangent vectors are (v_base, v_t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductSpace {
    pub kappa: f64,
    sigma: f64,
    root: f64,
}

/// Vertical plane γ×ℝ over the base geodesic {⟨n, p⟩_κ = c}; c is nonzero only for κ = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalPlane {
    pub n: Vector3<f64>,
    pub c: f64,
}

impl ProductSpace {
    pub fn new(kappa: f64) -> Self {
        let sigma = if kappa < 0.0 { -1.0 } else { 1.0 };
        Self { kappa, sigma, root: kappa.abs().sqrt() }
    }

    pub fn form(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        a.x * b.x + a.y * b.y + self.sigma * a.z * b.z
    }

    pub fn inner(&self, a: &Vector4<f64>, b: &Vector4<f64>) -> f64 {
        a[0] * b[0] + a[1] * b[1] + self.sigma * a[2] * b[2] + a[3] * b[3]
    }

    pub fn norm(&self, a: &Vector4<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Origin of Γ: the north pole, the hyperboloid vertex, or 0.
    pub fn origin(&self) -> PointProd {
        let z = if self.kappa == 0.0 { 0.0 } else { 1.0 / self.root };
        PointProd { base: Vector3::new(0.0, 0.0, z), height: 0.0 }
    }

    /// Unit normal of the quadric at a base point, ⟨n̂, n̂⟩ = σ.
    pub fn quadric_normal(&self, p: &Vector3<f64>) -> Vector3<f64> {
        if self.kappa == 0.0 {
            Vector3::z()
        } else {
            p * self.root
        }
    }

    pub fn constraint_residual(&self, p: &PointProd) -> f64 {
        if self.kappa == 0.0 {
            p.base.z
        } else {
            self.form(&p.base, &p.base) - 1.0 / self.kappa
        }
    }

    /// Nearest point of the base surface along the quadric normal (radial for κ ≠ 0).
    pub fn project_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        if self.kappa == 0.0 {
            Vector3::new(p.x, p.y, 0.0)
        } else {
            let q = self.form(p, p) * self.kappa;
            if q > 0.0 {
                p / q.sqrt()
            } else {
                *p
            }
        }
    }

    pub fn project_base_tangent(&self, p: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
        let n = self.quadric_normal(p);
        v - n * (self.sigma * self.form(v, &n))
    }

    pub fn project_tangent(&self, p: &PointProd, v: &Vector4<f64>) -> Vector4<f64> {
        let b = self.project_base_tangent(&p.base, &v.xyz());
        Vector4::new(b.x, b.y, b.z, v[3])
    }

    fn cs(&self, s: f64) -> (f64, f64) {
        if self.kappa > 0.0 {
            let a = self.root * s;
            (a.cos(), a.sin() / self.root)
        } else if self.kappa < 0.0 {
            let a = self.root * s;
            (a.cosh(), a.sinh() / self.root)
        } else {
            (1.0, s)
        }
    }

    /// Exponential map together with parallel transport of `frame` along the geodesic.
    pub fn exp_transport(&self, p: &PointProd, v: &Vector4<f64>, frame: &[Vector4<f64>]) -> (PointProd, Vec<Vector4<f64>>) {
        let vb = v.xyz();
        let len = self.form(&vb, &vb).max(0.0).sqrt();
        if len < 1e-300 {
            return (PointProd { base: p.base, height: p.height + v[3] }, frame.to_vec());
        }
        let dir = vb / len;
        let (c, s) = self.cs(len);
        let base = p.base * c + dir * s;
        let tangent_end = -p.base * (self.kappa * s) + dir * c;
        let out = frame
            .iter()
            .map(|w| {
                let wb = w.xyz();
                let a = self.form(&wb, &dir);
                let rest = wb - dir * a;
                let nb = rest + tangent_end * a;
                Vector4::new(nb.x, nb.y, nb.z, w[3])
            })
            .collect();
        (PointProd { base, height: p.height + v[3] }, out)
    }

    pub fn exp(&self, p: &PointProd, v: &Vector4<f64>) -> PointProd {
        self.exp_transport(p, v, &[]).0
    }

    pub fn base_distance(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        let d = a - b;
        let chord = self.form(&d, &d).max(0.0).sqrt();
        if self.kappa > 0.0 {
            2.0 / self.root * (0.5 * self.root * chord).min(1.0).asin()
        } else if self.kappa < 0.0 {
            2.0 / self.root * (0.5 * self.root * chord).asinh()
        } else {
            chord
        }
    }

    pub fn distance(&self, a: &PointProd, b: &PointProd) -> f64 {
        let d = self.base_distance(&a.base, &b.base);
        (d * d + (a.height - b.height).powi(2)).sqrt()
    }

    /// Oriented volume of three tangent vectors at p.
    pub fn volume(&self, p: &PointProd, a: &Vector4<f64>, b: &Vector4<f64>, c: &Vector4<f64>) -> f64 {
        let n = self.quadric_normal(&p.base);
        let m = Matrix4::from_columns(&[Vector4::new(n.x, n.y, n.z, 0.0), *a, *b, *c]);
        m.determinant()
    }

    /// Killing field of translations along Γ = {p₂ = 0, t = 0}, unit at the origin.
    pub fn gamma_killing(&self, p: &PointProd) -> Vector4<f64> {
        if self.kappa == 0.0 {
            Vector4::new(1.0, 0.0, 0.0, 0.0)
        } else {
            Vector4::new(self.root * p.base.z, 0.0, -self.sigma * self.root * p.base.x, 0.0)
        }
    }

    /// Signed arclength coordinate along Γ of the projection of a base point onto Γ.
    pub fn gamma_coordinate(&self, p: &Vector3<f64>) -> f64 {
        if self.kappa > 0.0 {
            p.x.atan2(p.z) / self.root
        } else if self.kappa < 0.0 {
            (p.x / p.z).atanh() / self.root
        } else {
            p.x
        }
    }

    /// Distance from a base point to Γ.
    pub fn gamma_distance(&self, p: &Vector3<f64>) -> f64 {
        self.plane_distance(&self.plane_p0(), p).abs()
    }

    /// The vertical plane P₀ = Γ×ℝ.
    pub fn plane_p0(&self) -> VerticalPlane {
        VerticalPlane { n: Vector3::y(), c: 0.0 }
    }

    pub fn plane_distance(&self, plane: &VerticalPlane, p: &Vector3<f64>) -> f64 {
        let s = self.form(&plane.n, p) - plane.c;
        if self.kappa > 0.0 {
            (self.root * s).clamp(-1.0, 1.0).asin() / self.root
        } else if self.kappa < 0.0 {
            (self.root * s).asinh() / self.root
        } else {
            s
        }
    }

    pub fn reflect(&self, plane: &VerticalPlane, p: &PointProd) -> PointProd {
        let s = self.form(&plane.n, &p.base) - plane.c;
        PointProd { base: p.base - plane.n * (2.0 * s), height: p.height }
    }

    pub fn reflect_vector(&self, plane: &VerticalPlane, v: &Vector4<f64>) -> Vector4<f64> {
        let vb = v.xyz();
        let r = vb - plane.n * (2.0 * self.form(&plane.n, &vb));
        Vector4::new(r.x, r.y, r.z, v[3])
    }

    /// Image of a vertical plane under the reflection in another one.
    pub fn reflect_plane(&self, mirror: &VerticalPlane, plane: &VerticalPlane) -> VerticalPlane {
        let n = plane.n - mirror.n * (2.0 * self.form(&mirror.n, &plane.n));
        let c = plane.c - 2.0 * mirror.c * self.form(&mirror.n, &plane.n);
        VerticalPlane { n, c }
    }

    /// Total-least-squares vertical plane through a set of base points.
    pub fn fit_plane(&self, pts: &[Vector3<f64>]) -> VerticalPlane {
        if self.kappa > 0.0 {
            let mut c = Matrix3::zeros();
            for p in pts {
                c += p * p.transpose();
            }
            let eig = SymmetricEigen::new(c);
            let i = eig.eigenvalues.imin();
            let n: Vector3<f64> = eig.eigenvectors.column(i).into_owned();
            VerticalPlane { n: n.normalize(), c: 0.0 }
        } else {
            // Straight-line fit in the plane (κ = 0) or in the Klein disk (κ < 0).
            let q: Vec<(f64, f64)> = pts
                .iter()
                .map(|p| if self.kappa < 0.0 { (p.x / p.z, p.y / p.z) } else { (p.x, p.y) })
                .collect();
            let m = q.len() as f64;
            let (mx, my) = q.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0 / m, a.1 + b.1 / m));
            let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
            for (x, y) in &q {
                sxx += (x - mx) * (x - mx);
                sxy += (x - mx) * (y - my);
                syy += (y - my) * (y - my);
            }
            let eig = SymmetricEigen::new(nalgebra::Matrix2::new(sxx, sxy, sxy, syy));
            let i = eig.eigenvalues.imin();
            let (a, b) = (eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)]);
            let c = a * mx + b * my;
            if self.kappa < 0.0 {
                let n = Vector3::new(a, b, c);
                let norm = self.form(&n, &n).sqrt();
                VerticalPlane { n: n / norm, c: 0.0 }
            } else {
                VerticalPlane { n: Vector3::new(a, b, 0.0), c }
            }
        }
    }

    /// Stereographic-type chart of the base around the origin: (x, y) ≈ geodesic coordinates
    /// near o, exact for κ = 0.
    pub fn chart(&self, p: &Vector3<f64>) -> (f64, f64) {
        if self.kappa == 0.0 {
            (p.x, p.y)
        } else {
            let s = 2.0 / (1.0 + self.root * p.z);
            (s * p.x, s * p.y)
        }
    }
}
