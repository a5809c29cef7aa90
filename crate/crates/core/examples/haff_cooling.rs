//! Homogeneous cooling: the closed-form law against adaptive integration.

use granular_lab::model::{haff_comparison, HaffParams, ModelParams};

fn main() -> granular_lab::Result<()> {
    let p = ModelParams::new(5.0 / 3.0, 2.0, 1)?;
    let h = HaffParams::new(1.0, 1.0)?;
    println!("{:>8} {:>22} {:>22} {:>10}", "t", "T closed", "T integrated", "rel diff");
    for row in haff_comparison(&p, &h, 10.0, 11)? {
        println!("{:8.3} {:22.16e} {:22.16e} {:10.2e}", row.t, row.closed, row.integrated, row.rel_diff());
    }
    Ok(())
}
