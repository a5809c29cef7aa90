//! Finite-difference residuals of every built-in scenario at three step
//! sizes, with the observed orders.

use granular_lab::scenarios::{Scenario, STANDARD_STEPS};

fn main() -> granular_lab::Result<()> {
    for s in Scenario::ALL {
        let study = s.run(&STANDARD_STEPS, None)?;
        println!("{}", s.name());
        for o in &study.orders {
            let floor = if o.floor_warning { " (at rounding floor)" } else { "" };
            println!("  {:<18} orders {:?}{floor}", o.equation, o.max_orders);
        }
    }
    Ok(())
}
