//! Lagrangian collapse with a cosine pressure profile: the earliest
//! blow-up point and density snapshots as it sharpens.

use granular_lab::meerson::{global_blowup, snapshot, MeersonParams};

fn main() -> granular_lab::Result<()> {
    let mp = MeersonParams::from_mu(1.0, 2.0, 1.0)?;
    let first = global_blowup(&mp);
    println!("first blow-up at m = {:.3e}, t = {:.12}", first.m, first.t_star);
    for t in [0.0, 0.5, 0.9, 0.99] {
        let rows = snapshot(&mp, t, 9)?;
        let peak = rows.iter().map(|r| r.rho).fold(0.0f64, f64::max);
        let extent = rows.last().unwrap().x - rows[0].x;
        println!("t={t:5.2}  peak rho {peak:12.4e}  extent {extent:.6}");
    }
    Ok(())
}
