//! Blow-up time across a range of initial compression rates, integrated
//! in parallel.

use granular_lab::model::ModelParams;
use granular_lab::ode::IntegrateOptions;
use granular_lab::uniform::{scan_blowup, IsotropicState};

fn main() -> granular_lab::Result<()> {
    let p = ModelParams::new(1.4, 1.0, 3)?;
    let rates: Vec<f64> = (0..12).map(|k| 0.0 - 0.25 * k as f64).collect();
    let initial: Vec<IsotropicState> = rates.iter().map(|&a| IsotropicState::new(0.0, 1.0, a, 0.1, 1.0)).collect();
    for (a, result) in rates.iter().zip(scan_blowup(&p, &initial, 20.0, &IntegrateOptions::default())) {
        match result?.blowup_time() {
            Some(t) => println!("alpha0 = {a:6.2}  t* = {t:.10}"),
            None => println!("alpha0 = {a:6.2}  no blow-up before t = 20"),
        }
    }
    Ok(())
}
