//! Isotropic compression in two dimensions ends in finite-time blow-up;
//! the peak density grows like a power of the time remaining.

use granular_lab::model::ModelParams;
use granular_lab::ode::IntegrateOptions;
use granular_lab::uniform::{density_exponent_fit, integrate, IsotropicState};

fn main() -> granular_lab::Result<()> {
    let p = ModelParams::new(5.0 / 3.0, 1.0, 2)?;
    let s0 = IsotropicState::new(0.0, 1.0, -1.0, 0.1, 1.0);
    let traj = integrate(&p, &s0, 10.0, &IntegrateOptions::default())?;
    println!("termination: {:?}", traj.termination);
    println!("accepted steps: {}", traj.samples.len());
    let fit = density_exponent_fit(&traj, 0.3)?;
    println!("fitted exponent {:.6} from {} points (t* = {:.12})", fit.exponent, fit.points, fit.t_estimate);
    Ok(())
}
