//! Annulus geometry and the laminar Couette base flow.
//!
//! Lengths are scaled by the gap width `d = r2 - r1`, velocities by the inner
//! wall speed `r1 * Omega1`, so the inner wall sits at `r_i = eta / (1 - eta)`
//! and the outer wall at `r_o = r_i + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and Reynolds number of a Taylor-Couette cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Radius ratio `r1 / r2`.
    pub eta: f64,
    /// Angular speed ratio `Omega2 / Omega1`.
    pub mu: f64,
    /// `R = Omega1 r1 d / nu`.
    pub reynolds: f64,
}

impl FlowConfig {
    pub fn new(eta: f64, mu: f64, reynolds: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Config(alloc::format!(
                "radius ratio must lie in (0, 1), got {eta}"
            )));
        }
        if !mu.is_finite() || !reynolds.is_finite() || reynolds < 0.0 {
            return Err(Error::Config(alloc::format!(
                "invalid mu = {mu} or reynolds = {reynolds}"
            )));
        }
        Ok(Self { eta, mu, reynolds })
    }

    /// Same geometry at another Reynolds number.
    pub fn with_reynolds(&self, reynolds: f64) -> Self {
        Self { reynolds, ..*self }
    }

    pub fn r_inner(&self) -> f64 {
        self.eta / (1.0 - self.eta)
    }

    pub fn r_outer(&self) -> f64 {
        self.r_inner() + 1.0
    }

    /// Azimuthal velocity prescribed at the outer wall, `mu (1 + d / r1)`.
    pub fn outer_wall_speed(&self) -> f64 {
        self.mu * (1.0 + (1.0 - self.eta) / self.eta)
    }

    /// Couette constants obtained from the two wall conditions.
    pub fn base_flow(&self) -> BaseFlow {
        let (eta, mu) = (self.eta, self.mu);
        BaseFlow {
            a0: (mu - eta * eta) / (eta * (1.0 + eta)),
            b0: eta * (1.0 - mu) / ((1.0 + eta) * (1.0 - eta) * (1.0 - eta)),
        }
    }

    /// `V(r)`, checked against the annulus bounds.
    pub fn base_flow_profile(&self, r: f64) -> Result<f64> {
        let (ri, ro) = (self.r_inner(), self.r_outer());
        let slack = 1e-12 * ro;
        if !(r >= ri - slack && r <= ro + slack) {
            return Err(Error::Domain {
                r,
                r_inner: ri,
                r_outer: ro,
            });
        }
        Ok(self.base_flow().velocity(r))
    }

    /// Taylor number `T = 64/9 R^2`; the relation holds for `eta = 1/2` only.
    pub fn taylor_number(&self) -> Result<f64> {
        if (self.eta - 0.5).abs() > 1e-12 {
            return Err(Error::UnsupportedGeometry(alloc::format!(
                "Taylor number relation is only available for eta = 0.5 (got {})",
                self.eta
            )));
        }
        Ok(64.0 / 9.0 * self.reynolds * self.reynolds)
    }

    /// `1/2 int r V^2 dr` over the gap.
    pub fn couette_base_kinetic_energy(&self) -> f64 {
        self.base_flow()
            .kinetic_energy(self.r_inner(), self.r_outer())
    }
}

/// `V(r) = a0 r + b0 / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseFlow {
    pub a0: f64,
    pub b0: f64,
}

impl BaseFlow {
    pub fn velocity(&self, r: f64) -> f64 {
        self.a0 * r + self.b0 / r
    }

    /// `dV/dr`.
    pub fn shear(&self, r: f64) -> f64 {
        self.a0 - self.b0 / (r * r)
    }

    /// `1/2 int_{ri}^{ro} r V^2 dr` in closed form.
    pub fn kinetic_energy(&self, ri: f64, ro: f64) -> f64 {
        let (a, b) = (self.a0, self.b0);
        let quartic = a * a * (ro * ro * ro * ro - ri * ri * ri * ri) / 4.0;
        let cross = a * b * (ro * ro - ri * ri);
        let log = b * b * libm::log(ro / ri);
        0.5 * (quartic + cross + log)
    }
}
