//! Compression along one axis only: the temperature matrix degenerates and
//! the mass concentrates on a line rather than a point.

use granular_lab::model::ModelParams;
use granular_lab::ode::IntegrateOptions;
use granular_lab::uniform::{anisotropy_diagnostic, integrate, UDState};
use nalgebra::{DMatrix, DVector};

fn main() -> granular_lab::Result<()> {
    let p = ModelParams::new(5.0 / 3.0, 1.0, 2)?;
    let s0 = UDState::new(
        0.0,
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]),
        DVector::zeros(2),
        DMatrix::identity(2, 2),
        DVector::zeros(2),
        1.0,
        1.0,
    )?;
    let traj = integrate(&p, &s0, 10.0, &IntegrateOptions::default())?;
    println!("termination: {:?}", traj.termination);
    let points = anisotropy_diagnostic(&traj)?;
    let stride = (points.len() / 12).max(1);
    for a in points.iter().step_by(stride).chain(points.last()) {
        println!("t={:10.6}  eig=[{:.3e}, {:.3e}]  ratio={:.3e}", a.t, a.eig_min, a.eig_max, a.ratio);
    }
    Ok(())
}
