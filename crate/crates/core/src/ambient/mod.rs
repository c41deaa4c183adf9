//! Geometry of the model M(κ_b, τ_b), the Berger sphere and the product M²(κ)×ℝ.

mod barrier;
mod berger;
mod product;

pub use barrier::{barrier_membership, omega_contains, omega_residual, Barrier};
pub use berger::{
    berger_metric, berger_screw_motion, hopf_projection, killing_submersion_base, metric_m,
    screw_motion, theta_cover, theta_inverse, BergerModel, PointS3,
};
pub use product::{PointProd, ProductSpace, VerticalPlane};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point (x, y, z) of the model M(κ_b, τ_b).
pub type PointM = nalgebra::Vector3<f64>;

/// Base curvature κ and mean curvature H with the derived Berger parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientParams {
    pub kappa: f64,
    pub h: f64,
    pub kappa_b: f64,
    pub tau_b: f64,
}

impl AmbientParams {
    pub fn new(kappa: f64, h: f64) -> Result<Self> {
        if !kappa.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParameter("kappa and H must be finite".into()));
        }
        if h <= 0.0 {
            return Err(Error::InvalidParameter(format!("H must be positive, got {h}")));
        }
        let kappa_b = 4.0 * h * h + kappa;
        if kappa_b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "4H^2 + kappa must be positive, got {kappa_b}"
            )));
        }
        Ok(Self { kappa, h, kappa_b, tau_b: h })
    }

    pub fn model(&self) -> BergerModel {
        BergerModel::new(self.kappa_b, self.tau_b)
    }

    pub fn target(&self) -> ProductSpace {
        ProductSpace::new(self.kappa)
    }

    /// Radius 2/√κ_b of the Clifford cylinder T.
    pub fn radius(&self) -> f64 {
        2.0 / self.kappa_b.sqrt()
    }

    /// Screw-motion Killing field X̃ = y∂x − x∂y + (2H/κ_b)∂z.
    pub fn killing(&self, p: &PointM) -> PointM {
        PointM::new(p.y, -p.x, 2.0 * self.h / self.kappa_b)
    }
}
