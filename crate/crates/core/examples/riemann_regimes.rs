//! The three regimes of the pressure-balanced Riemann problem and the
//! contact positions of each.

use granular_lab::riemann::{classify, solve, RiemannData};

fn main() -> granular_lab::Result<()> {
    let cases = [("spreading", 0.0, 1.0, 1.0, 1.0), ("delayed", 1.0, 1.0, 0.0, 1.0), ("immediate", 3.0, 1.0, 0.0, 1.0)];
    for (label, vl, tl, vr, tr) in cases {
        let d = RiemannData::new(vl, tl, vr, tr, 2.0, 1.0)?;
        let regime = classify(&d)?;
        println!("{label}: {regime:?}");
        let sol = solve(&d)?;
        for t in [0.0, 0.5, 1.0, 2.0] {
            let masses = sol.point_masses(t)?;
            println!("  t={t:4.1} fronts {:?} point masses {:?}", sol.fronts(t), masses);
        }
    }
    Ok(())
}
