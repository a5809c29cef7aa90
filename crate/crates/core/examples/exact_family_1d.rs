//! The exact one-dimensional collapse family: state, central density and
//! the residual of the ODE system along it.

use granular_lab::model::ModelParams;
use granular_lab::uniform::{exact_family_residual, ExactFamily1d};

fn main() -> granular_lab::Result<()> {
    let p = ModelParams::new(2.0, 1.0, 1)?;
    let family = ExactFamily1d::new(&p, -0.8, 0.5, 1.0)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>14} {:>10}", "t", "phi", "alpha", "C", "rho(0)", "residual");
    for k in 0..10 {
        let t = 0.1 * k as f64;
        let s = family.state_at(t)?;
        let r = exact_family_residual(&family, t)?;
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!(
            "{t:6.2} {:12.6} {:12.6} {:12.6} {:14.6e} {worst:10.1e}",
            s.phi,
            s.alpha,
            s.offset,
            family.central_density(t)?
        );
    }
    Ok(())
}
