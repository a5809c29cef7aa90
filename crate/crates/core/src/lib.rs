pub mod cli;
pub mod error;
pub mod export;
pub mod meerson;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod residual;
pub mod riemann;
pub mod scenarios;
pub mod uniform;

pub use error::{Error, Result};
