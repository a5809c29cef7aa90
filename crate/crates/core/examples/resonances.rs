//! Resonances of the blow-up balance: numerical spectrum of the
//! Kovalevskaya matrix next to the closed form.

use granular_lab::model::ModelParams;
use granular_lab::uniform::{blowup_balance_isotropic, blowup_resonances, resonances};

fn main() -> granular_lab::Result<()> {
    for (n, gamma) in [(1, 2.0), (2, 1.0), (2, 5.0 / 3.0), (3, 1.4)] {
        let p = ModelParams::new(gamma, 1.0, n)?;
        let b = blowup_balance_isotropic(&p, 1.0, 0.2, 1.0)?;
        let report = resonances(&p, &b)?;
        let numeric: Vec<String> = report.eigenvalues.iter().map(|z| format!("{:+.6}", z.re)).collect();
        println!("n={n} gamma={gamma:.4}  numeric [{}]  closed {:?}", numeric.join(", "), blowup_resonances(&p));
    }
    Ok(())
}
