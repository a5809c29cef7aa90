//! One-dimensional Riemann problem for the constrained system with flux
//! `rho v^2 - phi^2 / rho`: regime classification, the two-contact solution,
//! the delta-front continuation and independent checks.

mod characteristics;
mod delta;
mod solution;
mod two_contact;

use serde::Serialize;

use crate::error::{Error, Result};

pub use characteristics::{characteristics_oracle, front_oracle, EvolvedInvariants, FrontOracleRow, InvariantProfile};
pub use delta::{concentration_onset, delta_position, delta_theta, DeltaFront, SideState};
pub use solution::{control_volume_mass, solve, MassBalanceRow, PiecewiseSolution, PointMass, PointValue};
pub use two_contact::{two_contact_solution, Region, RegionFields, TwoContactSolution};

/// Riemann invariants `s = v - sqrt(T)`, `r = v + sqrt(T)`.
pub fn riemann_invariants(v: f64, temperature: f64) -> Result<(f64, f64)> {
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    let w = temperature.sqrt();
    Ok((v - w, v + w))
}

/// Inverse of [`riemann_invariants`]: `(v, T)` from `(s, r)` with `r >= s`.
pub fn from_invariants(s: f64, r: f64) -> Result<(f64, f64)> {
    if !(r >= s) {
        return Err(Error::Domain(format!("need r >= s, got s = {s}, r = {r}")));
    }
    let w = 0.5 * (r - s);
    Ok((0.5 * (r + s), w * w))
}

/// Piecewise-constant initial data with jump at `x = 0`; `c = 1/phi(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannData {
    pub v_left: f64,
    pub temp_left: f64,
    pub v_right: f64,
    pub temp_right: f64,
    pub lambda: f64,
    pub c: f64,
}

impl RiemannData {
    pub fn new(v_left: f64, temp_left: f64, v_right: f64, temp_right: f64, lambda: f64, c: f64) -> Result<Self> {
        let checks = [
            (temp_left > 0.0, "left temperature must be > 0"),
            (temp_right > 0.0, "right temperature must be > 0"),
            (lambda > 0.0, "Lambda must be > 0"),
            (c > 0.0, "c must be > 0"),
            (v_left.is_finite() && v_right.is_finite(), "velocities must be finite"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "{msg} (data vL={v_left}, TL={temp_left}, vR={v_right}, TR={temp_right}, Lambda={lambda}, c={c})"
                )));
            }
        }
        Ok(Self { v_left, temp_left, v_right, temp_right, lambda, c })
    }

    /// `phi(t) = 1 / (Lambda t / 2 + c)`.
    pub fn phi(&self, t: f64) -> f64 {
        1.0 / (0.5 * self.lambda * t + self.c)
    }

    /// Cooling factor `c / (Lambda t / 2 + c)` applied to `sqrt(T)` of each side.
    pub fn cooling(&self, t: f64) -> f64 {
        self.c * self.phi(t)
    }

    /// The same data shifted by a constant velocity.
    pub fn galilean_shift(&self, w: f64) -> Self {
        Self { v_left: self.v_left + w, v_right: self.v_right + w, ..*self }
    }

    /// Mirror image `x -> -x`, `v -> -v` with the sides swapped.
    pub fn reflected(&self) -> Self {
        Self {
            v_left: -self.v_right,
            temp_left: self.temp_right,
            v_right: -self.v_left,
            temp_right: self.temp_left,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Regime {
    TwoContactsForever,
    /// The middle temperature vanishes at `t_doublestar` and the contacts
    /// would meet at `t_star`.
    DelayedConcentration { t_doublestar: f64, t_star: f64 },
    ImmediateConcentration,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::TwoContactsForever => "TwoContactsForever",
            Regime::DelayedConcentration { .. } => "DelayedConcentration",
            Regime::ImmediateConcentration => "ImmediateConcentration",
        }
    }
}

pub fn classify(d: &RiemannData) -> Result<Regime> {
    let (wl, wr) = (d.temp_left.sqrt(), d.temp_right.sqrt());
    if d.v_left <= d.v_right {
        return Ok(Regime::TwoContactsForever);
    }
    if d.v_left >= d.v_right + wl + wr {
        return Ok(Regime::ImmediateConcentration);
    }
    let t_doublestar = middle_temperature_root(d);
    let gap = |t: f64| two_contact::gap(d, t);
    // the gap grows until t** and decreases to -infinity afterwards
    let mut hi = 2.0 * t_doublestar.max(d.c / d.lambda);
    while gap(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::RootNotBracketed("contacts never meet".into()));
        }
    }
    let t_star = bracketed_root(gap, t_doublestar, hi, 1e-12)?;
    Ok(Regime::DelayedConcentration { t_doublestar, t_star })
}

/// Root of `T_M`: `c (sqrt(T_R) + sqrt(T_L)) / (v_L - v_R) = Lambda t / 2 + c`.
fn middle_temperature_root(d: &RiemannData) -> f64 {
    let sum = d.temp_left.sqrt() + d.temp_right.sqrt();
    2.0 / d.lambda * (d.c * sum / (d.v_left - d.v_right) - d.c)
}

/// Bisection with secant refinement on a sign-changing bracket.
pub(crate) fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed(format!("f({a}) = {fa:e} and f({b}) = {fb:e} share a sign")));
    }
    for _ in 0..200 {
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // take the secant point when it falls well inside the bracket
        let x = if secant > a.min(b) && secant < a.max(b) && (secant - mid).abs() < 0.25 * (b - a).abs() { secant } else { mid };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a).abs() <= tol * (1.0 + x.abs()) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(vl: f64, tl: f64, vr: f64, tr: f64) -> RiemannData {
        RiemannData::new(vl, tl, vr, tr, 2.0, 1.0).unwrap()
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(riemann_invariants(0.0, 1.0).unwrap(), (-1.0, 1.0));
        assert_eq!(riemann_invariants(2.0, 0.0).unwrap(), (2.0, 2.0));
        assert!(riemann_invariants(0.0, -1.0).is_err());
        let (s, r) = riemann_invariants(0.3, 2.7).unwrap();
        let (v, t) = from_invariants(s, r).unwrap();
        assert!((v - 0.3).abs() < 1e-15 && (t - 2.7).abs() < 1e-15);
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify(&data(0.0, 1.0, 1.0, 1.0)).unwrap(), Regime::TwoContactsForever);
        assert_eq!(classify(&data(3.0, 1.0, 0.0, 1.0)).unwrap(), Regime::ImmediateConcentration);
        match classify(&data(1.0, 1.0, 0.0, 1.0)).unwrap() {
            Regime::DelayedConcentration { t_doublestar, t_star } => {
                assert!((t_doublestar - 1.0).abs() < 1e-12);
                // t = 2 ln(t + 1)
                assert!((t_star - 2.0 * (t_star + 1.0).ln()).abs() < 1e-11);
                assert!(t_star > t_doublestar);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_data_is_rejected() {
        assert!(RiemannData::new(0.0, 0.0, 1.0, 1.0, 2.0, 1.0).is_err());
        assert!(RiemannData::new(0.0, 1.0, 1.0, 1.0, -2.0, 1.0).is_err());
        assert!(RiemannData::new(0.0, 1.0, 1.0, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn root_finder_handles_both_orientations() {
        let r = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        let r = bracketed_root(|x| 2.0 - x * x, 2.0, 0.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
