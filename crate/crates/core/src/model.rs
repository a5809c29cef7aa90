//! Model parameters, gas-state samples and the two closed-form building
//! blocks shared by every solution family: the homogeneous cooling law and
//! the scalar `phi(t)` that slaves density to temperature.
//!
//! The gas constant is fixed to one, so the pressure is `p = rho * T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adiabatic index, dissipation constant and spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    gamma: f64,
    lambda: f64,
    dim: usize,
}

impl ModelParams {
    pub fn new(gamma: f64, lambda: f64, dim: usize) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(Self { gamma, lambda, dim })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same model with a different adiabatic index (used by negative controls).
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(gamma, self.lambda, self.dim)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.gamma, lambda, self.dim)
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.gamma, self.lambda, dim)
    }
}

/// Pointwise hydrodynamic state: density, velocity and temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSample {
    pub rho: f64,
    pub v: Vec<f64>,
    pub temperature: f64,
}

impl GasSample {
    pub fn new(rho: f64, v: Vec<f64>, temperature: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("density must be > 0, got {rho}")));
        }
        if !(temperature >= 0.0) {
            return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(Self { rho, v, temperature })
    }

    pub fn pressure(&self) -> f64 {
        self.rho * self.temperature
    }
}

/// Constant density and initial temperature of a homogeneous cooling state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaffParams {
    rho0: f64,
    temperature0: f64,
}

impl HaffParams {
    pub fn new(rho0: f64, temperature0: f64) -> Result<Self> {
        if !(rho0.is_finite() && rho0 > 0.0) {
            return Err(Error::InvalidParameter(format!("rho0 must be > 0, got {rho0}")));
        }
        if !(temperature0.is_finite() && temperature0 > 0.0) {
            return Err(Error::InvalidParameter(format!("T0 must be > 0, got {temperature0}")));
        }
        Ok(Self { rho0, temperature0 })
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn temperature0(&self) -> f64 {
        self.temperature0
    }
}

/// Temperature of the homogeneous cooling state,
/// `T(t) = (Lambda rho0 t / 2 + T0^{-1/2})^{-2}`.
pub fn haff_temperature(p: &ModelParams, h: &HaffParams, t: f64) -> f64 {
    let d = 0.5 * p.lambda() * h.rho0() * t + h.temperature0().powf(-0.5);
    1.0 / (d * d)
}

/// Solution of `phi' = -(Lambda/2) phi^2` with `phi(0) = phi0`.
pub fn phi_closed_form(p: &ModelParams, phi0: f64, t: f64) -> f64 {
    1.0 / (0.5 * p.lambda() * t + 1.0 / phi0)
}

/// Constraint variable `z = rho - phi T^{-1/2}`; zero on the constrained class.
pub fn constraint_z(phi: f64, s: &GasSample) -> Result<f64> {
    if s.temperature <= 0.0 {
        return Err(Error::Domain("constraint z needs T > 0 (T^{-1/2} undefined)".into()));
    }
    Ok(s.rho - phi / s.temperature.sqrt())
}

/// Homogeneous cooling state as space-time fields: constant density and
/// velocity, temperature following [`haff_temperature`].
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousCooling {
    pub params: ModelParams,
    pub haff: HaffParams,
    pub velocity: Vec<f64>,
}

impl crate::residual::FieldSet for HomogeneousCooling {
    fn dim(&self) -> usize {
        self.velocity.len()
    }

    fn contains(&self, t: f64, _x: &[f64]) -> bool {
        0.5 * self.params.lambda() * self.haff.rho0() * t + self.haff.temperature0().powf(-0.5) > 0.0
    }

    fn sample(&self, t: f64, _x: &[f64]) -> Result<GasSample> {
        GasSample::new(self.haff.rho0(), self.velocity.clone(), haff_temperature(&self.params, &self.haff, t))
    }
}

/// One row of the closed-form vs. integrated cooling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaffRow {
    pub t: f64,
    pub closed: f64,
    pub integrated: f64,
    pub abs_diff: f64,
}

impl HaffRow {
    pub fn rel_diff(&self) -> f64 {
        self.abs_diff / self.closed.abs()
    }
}

struct CoolingOde {
    lambda_rho: f64,
}

impl crate::ode::OdeSystem for CoolingOde {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -self.lambda_rho * y[0].max(0.0).powf(1.5);
    }
}

/// Tabulates the closed-form cooling law against adaptive integration of
/// `T' = -Lambda rho0 T^{3/2}` at `samples` equally spaced times in `[0, t_final]`.
pub fn haff_comparison(p: &ModelParams, h: &HaffParams, t_final: f64, samples: usize) -> Result<Vec<HaffRow>> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_final must be >= 0, got {t_final}")));
    }
    let times: Vec<f64> = if t_final == 0.0 || samples < 2 {
        vec![0.0]
    } else {
        (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect()
    };
    let sys = CoolingOde { lambda_rho: p.lambda() * h.rho0() };
    let opts = crate::ode::IntegrateOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let values = crate::ode::integrate_at(&sys, 0.0, &[h.temperature0()], &times, &opts)?;
    Ok(times
        .iter()
        .zip(values)
        .map(|(&t, y)| {
            let closed = haff_temperature(p, h, t);
            HaffRow { t, closed, integrated: y[0], abs_diff: (closed - y[0]).abs() }
        })
        .collect())
}
