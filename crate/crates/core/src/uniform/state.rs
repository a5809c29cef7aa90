use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GasSample, ModelParams};

/// Full uniform-deformation state: velocity `v = alpha x + beta`, temperature
/// `T = x^T A x + (B, x) + C` and the density scale `phi`, so that
/// `rho = phi / sqrt(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UDState {
    pub t: f64,
    pub alpha: DMatrix<f64>,
    pub beta: DVector<f64>,
    /// Quadratic temperature coefficient `A` (symmetric).
    pub quad: DMatrix<f64>,
    /// Linear temperature coefficient `B`.
    pub lin: DVector<f64>,
    /// Temperature offset `C`.
    pub offset: f64,
    pub phi: f64,
}

/// Isotropic reduction `alpha = alpha1 I`, `A = a I`, `beta = B = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotropicState {
    pub t: f64,
    pub alpha: f64,
    pub quad: f64,
    pub offset: f64,
    pub phi: f64,
}

impl IsotropicState {
    pub fn new(t: f64, phi: f64, alpha: f64, quad: f64, offset: f64) -> Self {
        Self { t, alpha, quad, offset, phi }
    }

    /// Components in balance order `(phi, alpha1, a, C)`.
    pub fn components(&self) -> [f64; 4] {
        [self.phi, self.alpha, self.quad, self.offset]
    }

    pub fn from_components(t: f64, x: [f64; 4]) -> Self {
        Self { t, phi: x[0], alpha: x[1], quad: x[2], offset: x[3] }
    }
}

impl UDState {
    pub fn new(
        t: f64,
        alpha: DMatrix<f64>,
        beta: DVector<f64>,
        quad: DMatrix<f64>,
        lin: DVector<f64>,
        offset: f64,
        phi: f64,
    ) -> Result<Self> {
        let n = alpha.nrows();
        if alpha.ncols() != n || quad.shape() != (n, n) || beta.len() != n || lin.len() != n {
            return Err(Error::InvalidParameter("inconsistent uniform-deformation shapes".into()));
        }
        if !(phi > 0.0) {
            return Err(Error::Domain(format!("phi must be > 0, got {phi}")));
        }
        let asym = (&quad - quad.transpose()).amax();
        if asym > 1e-12 * quad.amax().max(1.0) {
            return Err(Error::InvalidParameter(format!("temperature matrix is not symmetric (|A - A^T| = {asym:e})")));
        }
        let quad = 0.5 * (&quad + quad.transpose());
        Ok(Self { t, alpha, beta, quad, lin, offset, phi })
    }

    /// State with no deformation and uniform temperature `offset`.
    pub fn at_rest(n: usize, offset: f64, phi: f64) -> Result<Self> {
        Self::new(
            0.0,
            DMatrix::zeros(n, n),
            DVector::zeros(n),
            DMatrix::zeros(n, n),
            DVector::zeros(n),
            offset,
            phi,
        )
    }

    pub fn from_isotropic(n: usize, s: &IsotropicState) -> Self {
        Self {
            t: s.t,
            alpha: DMatrix::identity(n, n) * s.alpha,
            beta: DVector::zeros(n),
            quad: DMatrix::identity(n, n) * s.quad,
            lin: DVector::zeros(n),
            offset: s.offset,
            phi: s.phi,
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn temperature_at(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (x.transpose() * &self.quad * &x)[(0, 0)] + self.lin.dot(&x) + self.offset
    }

    /// Minimiser of the temperature when `A` is positive definite.
    pub fn temperature_minimiser(&self) -> Option<DVector<f64>> {
        let chol = self.quad.clone().cholesky()?;
        Some(-0.5 * chol.solve(&self.lin))
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("phi must be > 0, got {phi}")))
    }
}

/// Right-hand side of the full system on the flat layout
/// `[alpha (row-major), beta, A (row-major), B, C, phi]`.
pub(crate) fn full_rhs_flat(p: &ModelParams, n: usize, y: &[f64], dy: &mut [f64]) {
    let nn = n * n;
    let alpha = DMatrix::from_row_slice(n, n, &y[..nn]);
    let beta = DVector::from_column_slice(&y[nn..nn + n]);
    let quad = DMatrix::from_row_slice(n, n, &y[nn + n..2 * nn + n]);
    let lin = DVector::from_column_slice(&y[2 * nn + n..2 * nn + 2 * n]);
    let offset = y[2 * nn + 2 * n];
    let phi = y[2 * nn + 2 * n + 1];

    let gamma = p.gamma();
    let lambda = p.lambda();
    let tr = alpha.trace();
    let damp = (gamma - 1.0) * tr + lambda * phi;

    let d_alpha = -(&alpha * &alpha) - &quad;
    let d_beta = -(&alpha * &beta) - 0.5 * &lin;
    let d_quad = -(&quad * &alpha + alpha.transpose() * &quad) - damp * &quad;
    let d_lin = -2.0 * (&quad * &beta) - alpha.transpose() * &lin - damp * &lin;
    let d_offset = -lin.dot(&beta) - damp * offset;
    let d_phi = -0.5 * (gamma + 1.0) * phi * tr - 0.5 * lambda * phi * phi;

    for i in 0..n {
        for j in 0..n {
            dy[i * n + j] = d_alpha[(i, j)];
            dy[nn + n + i * n + j] = d_quad[(i, j)];
        }
        dy[nn + i] = d_beta[i];
        dy[2 * nn + n + i] = d_lin[i];
    }
    dy[2 * nn + 2 * n] = d_offset;
    dy[2 * nn + 2 * n + 1] = d_phi;
}

/// Right-hand side of the isotropic system on `[phi, alpha1, a, C]`.
pub(crate) fn isotropic_rhs_flat(p: &ModelParams, y: &[f64], dy: &mut [f64]) {
    let n = p.dim() as f64;
    let (gamma, lambda) = (p.gamma(), p.lambda());
    let (phi, a1, a, c) = (y[0], y[1], y[2], y[3]);
    dy[0] = -0.5 * n * (gamma + 1.0) * phi * a1 - 0.5 * lambda * phi * phi;
    dy[1] = -a1 * a1 - a;
    dy[2] = -((2.0 + n * (gamma - 1.0)) * a1 + lambda * phi) * a;
    dy[3] = -(n * (gamma - 1.0) * a1 + lambda * phi) * c;
}

/// Time derivative of a full state. The returned value carries the
/// derivatives in the state's fields (and the same `t`).
pub fn rhs_full(p: &ModelParams, s: &UDState) -> Result<UDState> {
    check_phi(s.phi)?;
    let n = s.dim();
    let y = s.to_flat();
    let mut dy = vec![0.0; y.len()];
    full_rhs_flat(p, n, &y, &mut dy);
    Ok(s.with_flat(s.t, &dy))
}

/// Time derivative of an isotropic state (fields hold the derivatives).
pub fn rhs_isotropic(p: &ModelParams, s: &IsotropicState) -> Result<IsotropicState> {
    check_phi(s.phi)?;
    let mut dy = [0.0; 4];
    isotropic_rhs_flat(p, &s.components(), &mut dy);
    Ok(IsotropicState::from_components(s.t, dy))
}

/// `(rho, v, T)` of a uniform-deformation state at `x`; `rho sqrt(T) = phi`.
pub fn reconstruct_fields(s: &UDState, x: &[f64]) -> Result<GasSample> {
    if x.len() != s.dim() {
        return Err(Error::InvalidParameter(format!("point has {} coordinates, state has dimension {}", x.len(), s.dim())));
    }
    let temperature = s.temperature_at(x);
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("T(x) = {temperature:e} <= 0 outside the physical support")));
    }
    let xv = DVector::from_column_slice(x);
    let v = &s.alpha * xv + &s.beta;
    Ok(GasSample { rho: s.phi / temperature.sqrt(), v: v.iter().copied().collect(), temperature })
}

/// States that can be advanced by the adaptive integrator.
pub trait DeformationState: Clone + Send + Sync {
    fn time(&self) -> f64;
    fn phi(&self) -> f64;
    fn to_flat(&self) -> Vec<f64>;
    /// Rebuilds a state of the same shape from flat components.
    fn with_flat(&self, t: f64, y: &[f64]) -> Self;
    fn flat_rhs(&self, p: &ModelParams, y: &[f64], dy: &mut [f64]);
    /// Index of `phi` in the flat layout.
    fn phi_index(&self) -> usize;
    /// Keeps `A` symmetric.
    fn project_flat(&self, _y: &mut [f64]) {}
    /// Maximum of the density over space, where it is attained at a finite
    /// point with positive temperature.
    fn peak_density(&self) -> Option<f64>;
}

impl DeformationState for UDState {
    fn time(&self) -> f64 {
        self.t
    }

    fn phi(&self) -> f64 {
        self.phi
    }

    fn to_flat(&self) -> Vec<f64> {
        let n = self.dim();
        let mut y = Vec::with_capacity(2 * n * n + 2 * n + 2);
        for i in 0..n {
            for j in 0..n {
                y.push(self.alpha[(i, j)]);
            }
        }
        y.extend(self.beta.iter());
        for i in 0..n {
            for j in 0..n {
                y.push(self.quad[(i, j)]);
            }
        }
        y.extend(self.lin.iter());
        y.push(self.offset);
        y.push(self.phi);
        y
    }

    fn with_flat(&self, t: f64, y: &[f64]) -> Self {
        let n = self.dim();
        let nn = n * n;
        Self {
            t,
            alpha: DMatrix::from_row_slice(n, n, &y[..nn]),
            beta: DVector::from_column_slice(&y[nn..nn + n]),
            quad: DMatrix::from_row_slice(n, n, &y[nn + n..2 * nn + n]),
            lin: DVector::from_column_slice(&y[2 * nn + n..2 * nn + 2 * n]),
            offset: y[2 * nn + 2 * n],
            phi: y[2 * nn + 2 * n + 1],
        }
    }

    fn flat_rhs(&self, p: &ModelParams, y: &[f64], dy: &mut [f64]) {
        full_rhs_flat(p, self.dim(), y, dy)
    }

    fn phi_index(&self) -> usize {
        let n = self.dim();
        2 * n * n + 2 * n + 1
    }

    fn project_flat(&self, y: &mut [f64]) {
        let n = self.dim();
        let base = n * n + n;
        for i in 0..n {
            for j in i + 1..n {
                let m = 0.5 * (y[base + i * n + j] + y[base + j * n + i]);
                y[base + i * n + j] = m;
                y[base + j * n + i] = m;
            }
        }
    }

    fn peak_density(&self) -> Option<f64> {
        let x = self.temperature_minimiser()?;
        let tmin = self.temperature_at(x.as_slice());
        (tmin > 0.0).then(|| self.phi / tmin.sqrt())
    }
}

impl DeformationState for IsotropicState {
    fn time(&self) -> f64 {
        self.t
    }

    fn phi(&self) -> f64 {
        self.phi
    }

    fn to_flat(&self) -> Vec<f64> {
        self.components().to_vec()
    }

    fn with_flat(&self, t: f64, y: &[f64]) -> Self {
        Self::from_components(t, [y[0], y[1], y[2], y[3]])
    }

    fn flat_rhs(&self, p: &ModelParams, y: &[f64], dy: &mut [f64]) {
        isotropic_rhs_flat(p, y, dy)
    }

    fn phi_index(&self) -> usize {
        0
    }

    fn peak_density(&self) -> Option<f64> {
        // with a >= 0 the minimum of T = a|x|^2 + C sits at the origin
        (self.quad >= 0.0 && self.offset > 0.0).then(|| self.phi / self.offset.sqrt())
    }
}
