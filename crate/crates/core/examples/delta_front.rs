//! A delta front: weight, position and speed over time, with the mass
//! budget of a control volume around it.

use granular_lab::riemann::{control_volume_mass, solve, RiemannData};

fn main() -> granular_lab::Result<()> {
    let d = RiemannData::new(2.0, 0.25, -1.0, 0.25, 2.0, 1.0)?;
    let sol = solve(&d)?;
    let front = sol.delta.expect("colliding data concentrate at once");
    println!("{:>8} {:>14} {:>14} {:>14}", "t", "theta", "x*", "speed");
    for t in [0.0, 0.1, 0.5, 1.0, 5.0, 50.0] {
        println!("{t:8.2} {:14.6e} {:14.6e} {:14.6e}", front.theta(t)?, front.x_star(t)?, front.speed(t)?);
    }
    for row in control_volume_mass(&sol, 40.0, &[0.5, 1.0, 2.0])? {
        println!("t={:.1} regular {:.10} point {:.10} inflow {:.10} defect {:.2e}", row.t, row.regular_mass, row.point_mass, row.inflow, row.defect);
    }
    Ok(())
}
