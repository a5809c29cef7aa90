//! Flows with affine velocity `v = alpha x + beta` and quadratic temperature,
//! for which the hydrodynamic equations reduce to ODEs for the coefficients.

mod balance;
mod diagnostics;
mod flow;
mod state;

pub use balance::{
    blowup_balance_isotropic, blowup_resonances, exact_family_residual, resonances, reversed_balance_initial_data,
    truncated_field, truncated_jacobian, truncation_residual, Balance, ExactFamily1d, ResonanceReport,
};
pub use diagnostics::{anisotropy_diagnostic, density_exponent_fit, AnisotropyPoint, ExponentFit};
pub use flow::{certification_options, integrate, scan_blowup, Trajectory, UniformFlow};
pub use state::{reconstruct_fields, rhs_full, rhs_isotropic, DeformationState, IsotropicState, UDState};

pub(crate) use diagnostics::linear_fit;
