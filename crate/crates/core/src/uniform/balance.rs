//! Dominant balances of the isotropic system near a movable singularity,
//! their resonances, and the exact one-dimensional blow-up family.
//!
//! Components are always ordered `(phi, alpha1, a, C)` and `tau = t* - t`.

use nalgebra::{Complex, DMatrix, Matrix4};
use serde::Serialize;

use super::state::{IsotropicState, UDState};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::residual::FieldSet;

/// Leading-order ansatz `x_i(t) = lambda_i (t* - t)^{s_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Balance {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub t_star: f64,
}

impl Balance {
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let tau = self.t_star - t;
        self.coefficients.iter().zip(&self.exponents).map(|(l, s)| l * tau.powf(*s)).collect()
    }

    /// Analytic time derivative of the ansatz, `-s lambda tau^{s-1}`.
    pub fn derivative_at(&self, t: f64) -> Vec<f64> {
        let tau = self.t_star - t;
        self.coefficients
            .iter()
            .zip(&self.exponents)
            .map(|(l, s)| if *s == 0.0 { 0.0 } else { -s * l * tau.powf(s - 1.0) })
            .collect()
    }

    /// Same balance with the sign of the `phi` coefficient flipped.
    pub fn with_negated_phi_coefficient(&self) -> Self {
        let mut b = self.clone();
        b.coefficients[0] = -b.coefficients[0];
        b
    }
}

fn leading_phi_coefficient(p: &ModelParams) -> Result<f64> {
    let n = p.dim() as f64;
    let k = n * (p.gamma() + 1.0) - 2.0;
    if k.abs() < 1e-14 {
        return Err(Error::DegenerateBalance);
    }
    Ok(k / p.lambda())
}

/// Blow-up balance of the truncated isotropic system:
/// `phi ~ ((n(gamma+1) - 2)/Lambda) tau^{-1}`, `alpha1 ~ -tau^{-1}`,
/// `a ~ a0 tau^{2(n-2)}`, `C ~ c0 tau^{2(n-1)}`.
pub fn blowup_balance_isotropic(p: &ModelParams, t_star: f64, a0: f64, c0: f64) -> Result<Balance> {
    let k = leading_phi_coefficient(p)?;
    let n = p.dim() as f64;
    Ok(Balance {
        exponents: vec![-1.0, -1.0, 2.0 * (n - 2.0), 2.0 * (n - 1.0)],
        coefficients: vec![k, -1.0, a0, c0],
        t_star,
    })
}

/// Negatively quasihomogeneous truncation of the isotropic system (the `+a`
/// forcing of `alpha1` is dropped).
pub fn truncated_field(p: &ModelParams, x: &[f64; 4]) -> [f64; 4] {
    let n = p.dim() as f64;
    let (g, l) = (p.gamma(), p.lambda());
    let [phi, a1, a, c] = *x;
    [
        -0.5 * n * (g + 1.0) * phi * a1 - 0.5 * l * phi * phi,
        -a1 * a1,
        -(2.0 + n * (g - 1.0)) * a1 * a - l * phi * a,
        -n * (g - 1.0) * a1 * c - l * phi * c,
    ]
}

/// Jacobian of [`truncated_field`].
pub fn truncated_jacobian(p: &ModelParams, x: &[f64; 4]) -> Matrix4<f64> {
    let n = p.dim() as f64;
    let (g, l) = (p.gamma(), p.lambda());
    let [phi, a1, a, c] = *x;
    Matrix4::new(
        -0.5 * n * (g + 1.0) * a1 - l * phi,
        -0.5 * n * (g + 1.0) * phi,
        0.0,
        0.0,
        0.0,
        -2.0 * a1,
        0.0,
        0.0,
        -l * a,
        -(2.0 + n * (g - 1.0)) * a,
        -(2.0 + n * (g - 1.0)) * a1 - l * phi,
        0.0,
        -l * c,
        -n * (g - 1.0) * c,
        0.0,
        -n * (g - 1.0) * a1 - l * phi,
    )
}

fn as4(v: &[f64]) -> Result<[f64; 4]> {
    v.try_into().map_err(|_| Error::InvalidParameter(format!("balance must have 4 components, got {}", v.len())))
}

/// Residual `x' - f_trunc(x)` of each truncated equation on the ansatz at `t`.
pub fn truncation_residual(p: &ModelParams, b: &Balance, t: f64) -> Result<[f64; 4]> {
    if !(t < b.t_star) {
        return Err(Error::Domain(format!("t = {t} must precede t* = {}", b.t_star)));
    }
    let x = as4(&b.value_at(t))?;
    let dx = as4(&b.derivative_at(t))?;
    let f = truncated_field(p, &x);
    Ok([dx[0] - f[0], dx[1] - f[1], dx[2] - f[2], dx[3] - f[3]])
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceReport {
    /// Eigenvalues of `matrix`, sorted by real part.
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalues: Vec<Complex<f64>>,
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: DMatrix<f64>,
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

/// Kovalevskaya matrix `R = -D f_trunc(lambda) - diag(s)` and its spectrum.
pub fn resonances(p: &ModelParams, b: &Balance) -> Result<ResonanceReport> {
    let lambda = as4(&b.coefficients)?;
    let s = as4(&b.exponents)?;
    let r = -truncated_jacobian(p, &lambda) - Matrix4::from_diagonal(&s.into());
    let mut eigenvalues: Vec<Complex<f64>> = r.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(ResonanceReport { eigenvalues, matrix: DMatrix::from_iterator(4, 4, r.iter().copied()) })
}

/// Closed-form resonances of the blow-up balance, sorted ascending:
/// `-1, 0, 0` and `(n(gamma+1) - 2)/2`.
///
/// The block-triangular structure of `R` puts its eigenvalues on the
/// diagonal; the `phi` entry is `n(gamma+1)/2 - 1`.
pub fn blowup_resonances(p: &ModelParams) -> [f64; 4] {
    let r = 0.5 * (p.dim() as f64 * (p.gamma() + 1.0) - 2.0);
    let mut v = [r, -1.0, 0.0, 0.0];
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Exact blow-up family of the one-dimensional isotropic system,
/// `(phi, alpha1, a, C) = (l1 tau^{-1}, alpha0 tau^{-1}, -alpha0(alpha0+1) tau^{-2}, C0 tau^{-2(alpha0+1)})`
/// with `l1 = -(2 + (gamma+1) alpha0)/Lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactFamily1d {
    params: ModelParams,
    pub alpha0: f64,
    pub c0: f64,
    pub t_star: f64,
}

impl ExactFamily1d {
    pub fn new(p: &ModelParams, alpha0: f64, c0: f64, t_star: f64) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::InvalidParameter(format!("exact family needs n = 1, got {}", p.dim())));
        }
        let g = p.gamma();
        if !(g > 1.0) {
            return Err(Error::InvalidParameter(format!("exact family needs gamma > 1, got {g}")));
        }
        let upper = -2.0 / (g + 1.0);
        if !(alpha0 > -1.0 && alpha0 < upper) {
            return Err(Error::InvalidParameter(format!("alpha0 = {alpha0} outside (-1, {upper})")));
        }
        if !(c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("C0 must be > 0, got {c0}")));
        }
        Ok(Self { params: *p, alpha0, c0, t_star })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn balance(&self) -> Balance {
        let a0 = self.alpha0;
        Balance {
            exponents: vec![-1.0, -1.0, -2.0, -2.0 * (a0 + 1.0)],
            coefficients: vec![
                -(2.0 + (self.params.gamma() + 1.0) * a0) / self.params.lambda(),
                a0,
                -a0 * (a0 + 1.0),
                self.c0,
            ],
            t_star: self.t_star,
        }
    }

    pub fn state_at(&self, t: f64) -> Result<IsotropicState> {
        if !(t < self.t_star) {
            return Err(Error::Domain(format!("t = {t} is not before t* = {}", self.t_star)));
        }
        let x = as4(&self.balance().value_at(t))?;
        Ok(IsotropicState::from_components(t, x))
    }

    pub fn derivative_at(&self, t: f64) -> Result<IsotropicState> {
        if !(t < self.t_star) {
            return Err(Error::Domain(format!("t = {t} is not before t* = {}", self.t_star)));
        }
        let x = as4(&self.balance().derivative_at(t))?;
        Ok(IsotropicState::from_components(t, x))
    }

    /// `rho(t, 0) = phi / sqrt(C)`, which scales as `tau^{alpha0}`.
    pub fn central_density(&self, t: f64) -> Result<f64> {
        let s = self.state_at(t)?;
        Ok(s.phi / s.offset.sqrt())
    }
}

/// Substitution residual of the full isotropic system along the family.
pub fn exact_family_residual(f: &ExactFamily1d, t: f64) -> Result<[f64; 4]> {
    let s = f.state_at(t)?;
    let ds = f.derivative_at(t)?.components();
    let rhs = super::state::rhs_isotropic(f.params(), &s)?.components();
    Ok([ds[0] - rhs[0], ds[1] - rhs[1], ds[2] - rhs[2], ds[3] - rhs[3]])
}

impl FieldSet for ExactFamily1d {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, t: f64, _x: &[f64]) -> bool {
        t < self.t_star
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<crate::model::GasSample> {
        super::state::reconstruct_fields(&UDState::from_isotropic(1, &self.state_at(t)?), x)
    }
}

/// Initial data at `t = 0` taken from the blow-up balance evaluated with a
/// singularity time in the past (`t_star < 0`).
///
/// There `alpha1 = 1/|t_star| > 0` describes an expanding flow. The balance
/// value of `phi` is negative for `t_star < 0`; its magnitude is used, which
/// keeps the state on the physical branch. The data are rejected unless the
/// dropped forcing `a` is dominated by `alpha1^2`, where the balance is a
/// meaningful approximation.
pub fn reversed_balance_initial_data(p: &ModelParams, t_star: f64, a0: f64, c0: f64) -> Result<IsotropicState> {
    if !(t_star < 0.0) {
        return Err(Error::InvalidParameter(format!("reversed balance needs t* < 0, got {t_star}")));
    }
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter(format!("C0 must be > 0, got {c0}")));
    }
    let b = blowup_balance_isotropic(p, t_star, a0, c0)?;
    let x = as4(&b.value_at(0.0))?;
    if !(x[2].abs() < x[1] * x[1]) {
        return Err(Error::InvalidParameter(format!(
            "a(0) = {} is not dominated by alpha1(0)^2 = {}",
            x[2],
            x[1] * x[1]
        )));
    }
    Ok(IsotropicState::from_components(0.0, [x[0].abs(), x[1], x[2], x[3]]))
}
