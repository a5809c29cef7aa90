use serde::Serialize;

use super::RiemannData;
use crate::error::{Error, Result};

/// Constant state on one side of the front. Only `rho` and `v` are needed:
/// the temperature follows from `sqrt(T) = phi(t) / rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideState {
    pub rho: f64,
    pub v: f64,
}

impl SideState {
    pub fn new(rho: f64, v: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("side density must be finite and > 0, got {rho}")));
        }
        Ok(Self { rho, v })
    }

    /// State of a cooled side with initial temperature `temp0`.
    pub fn from_initial(d: &RiemannData, v: f64, temp0: f64) -> Result<Self> {
        Self::new(1.0 / (d.c * temp0.sqrt()), v)
    }

    pub fn temperature(&self, phi: f64) -> f64 {
        (phi / self.rho).powi(2)
    }
}

/// Point mass `theta(t)` on the front `x_*(t)` between two constant states,
/// born at `(t0, x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaFront {
    pub t0: f64,
    pub x0: f64,
    pub left: SideState,
    pub right: SideState,
    pub lambda: f64,
    /// `phi(t0)`.
    pub phi0: f64,
}

/// `u - ln(1 + u)` without cancellation for small `u`.
fn u_minus_log1p(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        let mut term = u * u;
        let mut sum = 0.0;
        for k in 2..10 {
            sum += term / k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
            term *= u;
        }
        sum
    } else {
        u - u.ln_1p()
    }
}

impl DeltaFront {
    pub fn new(lambda: f64, phi0: f64, t0: f64, x0: f64, left: SideState, right: SideState) -> Result<Self> {
        if !(lambda > 0.0 && phi0 > 0.0) {
            return Err(Error::InvalidParameter(format!("need Lambda > 0 and phi(t0) > 0, got {lambda}, {phi0}")));
        }
        let f = Self { t0, x0, left, right, lambda, phi0 };
        let (dr, dm, _, _) = f.jumps();
        if dr == 0.0 && dm >= 0.0 {
            return Err(Error::DegenerateFront(format!(
                "equal side densities with momentum jump {dm} >= 0 leave the front position undetermined"
            )));
        }
        let a2 = f.leading_coefficient();
        let scale = dm * dm + (dr * f.jumps().2).abs() + (dr * f.jumps().3).abs() * phi0 * phi0;
        if a2 < -1e-12 * scale {
            return Err(Error::NegativeDiscriminant { value: a2 });
        }
        Ok(f)
    }

    /// Front between the cooled initial states, born at `(t0, x0)`.
    pub fn from_data(d: &RiemannData, t0: f64, x0: f64) -> Result<Self> {
        let left = SideState::from_initial(d, d.v_left, d.temp_left)?;
        let right = SideState::from_initial(d, d.v_right, d.temp_right)?;
        Self::new(d.lambda, d.phi(t0), t0, x0, left, right)
    }

    /// Jumps `[rho], [rho v], [rho v^2], [1/rho]` (right minus left).
    pub fn jumps(&self) -> (f64, f64, f64, f64) {
        let (l, r) = (&self.left, &self.right);
        (r.rho - l.rho, r.rho * r.v - l.rho * l.v, r.rho * r.v * r.v - l.rho * l.v * l.v, 1.0 / r.rho - 1.0 / l.rho)
    }

    pub fn phi(&self, t: f64) -> f64 {
        1.0 / (0.5 * self.lambda * (t - self.t0) + 1.0 / self.phi0)
    }

    /// `phi0 t1 - (2/Lambda) ln(Lambda phi0 t1 / 2 + 1)`.
    fn log_term(&self, t1: f64) -> f64 {
        2.0 / self.lambda * u_minus_log1p(0.5 * self.lambda * self.phi0 * t1)
    }

    fn log_term_rate(&self, t: f64) -> f64 {
        self.phi0 - self.phi(t)
    }

    /// Coefficient of `t1^2` in the expansion of `theta^2` at birth.
    pub fn leading_coefficient(&self) -> f64 {
        let (dr, dm, de, dt) = self.jumps();
        dm * dm - dr * de + dr * dt * self.phi0 * self.phi0
    }

    /// The same coefficient written as `rho_+ rho_- ([v]^2 - [sqrt T]^2)`.
    pub fn concentration_coefficient(&self) -> f64 {
        let (l, r) = (&self.left, &self.right);
        let dw = self.phi0 / r.rho - self.phi0 / l.rho;
        r.rho * l.rho * ((r.v - l.v).powi(2) - dw * dw)
    }

    fn t1(&self, t: f64) -> Result<f64> {
        let t1 = t - self.t0;
        if t1 < 0.0 {
            return Err(Error::Domain(format!("t = {t} precedes the front birth at {}", self.t0)));
        }
        Ok(t1)
    }

    pub fn theta_squared(&self, t: f64) -> Result<f64> {
        let t1 = self.t1(t)?;
        let (dr, dm, de, dt) = self.jumps();
        Ok((dm * dm - dr * de) * t1 * t1 + 4.0 / self.lambda * dr * dt * self.log_term(t1))
    }

    /// Mass carried by the front.
    pub fn theta(&self, t: f64) -> Result<f64> {
        let q = self.theta_squared(t)?;
        if q < 0.0 {
            let (_, dm, _, _) = self.jumps();
            let t1 = t - self.t0;
            if q < -1e-12 * (dm * dm * t1 * t1).max(f64::MIN_POSITIVE) {
                return Err(Error::NegativeDiscriminant { value: q });
            }
            return Ok(0.0);
        }
        Ok(q.sqrt())
    }

    fn theta_rate(&self, t: f64) -> Result<f64> {
        let t1 = self.t1(t)?;
        if t1 == 0.0 {
            return Ok(self.leading_coefficient().max(0.0).sqrt());
        }
        let (dr, dm, de, dt) = self.jumps();
        let dq = 2.0 * (dm * dm - dr * de) * t1 + 4.0 / self.lambda * dr * dt * self.log_term_rate(t);
        Ok(dq / (2.0 * self.theta(t)?))
    }

    fn rationalized(&self) -> bool {
        self.jumps().1 <= 0.0
    }

    /// Front position. With `[rho v] <= 0` the quotient is rewritten as
    /// `(-[rho v^2] t1^2 + (4/Lambda)[tau] g) / (theta - [rho v] t1)`, which
    /// equals `([rho v] t1 + theta)/[rho]` and stays finite when `[rho] = 0`.
    pub fn x_star(&self, t: f64) -> Result<f64> {
        let t1 = self.t1(t)?;
        if t1 == 0.0 {
            return Ok(self.x0);
        }
        let (dr, dm, de, dt) = self.jumps();
        let theta = self.theta(t)?;
        let offset = if self.rationalized() {
            (-de * t1 * t1 + 4.0 / self.lambda * dt * self.log_term(t1)) / (theta - dm * t1)
        } else {
            (dm * t1 + theta) / dr
        };
        Ok(self.x0 + offset)
    }

    /// Analytic front speed `dx_*/dt`.
    pub fn speed(&self, t: f64) -> Result<f64> {
        let t1 = self.t1(t)?;
        let (dr, dm, de, dt) = self.jumps();
        let theta_rate = self.theta_rate(t)?;
        if !self.rationalized() {
            return Ok((dm + theta_rate) / dr);
        }
        if t1 == 0.0 {
            return Ok((-de + dt * self.phi0 * self.phi0) / (theta_rate - dm));
        }
        let num = -de * t1 * t1 + 4.0 / self.lambda * dt * self.log_term(t1);
        let num_rate = -2.0 * de * t1 + 4.0 / self.lambda * dt * self.log_term_rate(t);
        let den = self.theta(t)? - dm * t1;
        let den_rate = theta_rate - dm;
        Ok((num_rate * den - num * den_rate) / (den * den))
    }

    /// Momentum carried by the front, `theta * dx_*/dt`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        Ok(self.theta(t)? * self.speed(t)?)
    }
}

/// `theta(t)` for a front born at `t0` between the given side states.
pub fn delta_theta(d: &RiemannData, left: SideState, right: SideState, t0: f64, t: f64) -> Result<f64> {
    DeltaFront::new(d.lambda, d.phi(t0), t0, 0.0, left, right)?.theta(t)
}

/// `x_*(t)` for a front born at `(t0, x0)` between the given side states.
pub fn delta_position(d: &RiemannData, left: SideState, right: SideState, t0: f64, x0: f64, t: f64) -> Result<f64> {
    DeltaFront::new(d.lambda, d.phi(t0), t0, x0, left, right)?.x_star(t)
}

/// Earliest birth time at which a front between the cooled initial states
/// satisfies the concentration condition `[v]^2 >= [sqrt T(t0)]^2`; `None`
/// when `v_L <= v_R`.
pub fn concentration_onset(d: &RiemannData) -> Option<f64> {
    let dv = d.v_left - d.v_right;
    if dv <= 0.0 {
        return None;
    }
    let dw0 = (d.temp_right.sqrt() - d.temp_left.sqrt()).abs();
    Some((2.0 / d.lambda * (d.c * dw0 / dv - d.c)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};

    fn data(vl: f64, tl: f64, vr: f64, tr: f64) -> RiemannData {
        RiemannData::new(vl, tl, vr, tr, 2.0, 1.0).unwrap()
    }

    /// `theta^2(t) = 2 int_0^{t1} (t1 - s) q(t0 + s) ds`, the solution of
    /// `(theta^2)''/2 = q` with zero data, `q = [rho v]^2 - [rho][rho v^2] + [rho][tau] phi^2`.
    fn theta_squared_by_quadrature(f: &DeltaFront, t: f64) -> f64 {
        let (dr, dm, de, dt) = f.jumps();
        let t1 = t - f.t0;
        let q = |s: f64| {
            let phi = 1.0 / (0.5 * f.lambda * s + 1.0 / f.phi0);
            dm * dm - dr * de + dr * dt * phi * phi
        };
        2.0 * integrate(|s| (t1 - s) * q(s), 0.0, t1, &QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_segments: 4000 })
            .unwrap()
    }

    #[test]
    fn theta_starts_at_zero_and_grows() {
        let f = DeltaFront::from_data(&data(3.0, 1.0, 0.0, 4.0), 0.0, 0.0).unwrap();
        assert_eq!(f.theta(0.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..50 {
            let th = f.theta(i as f64 * 0.2).unwrap();
            assert!(th >= prev);
            prev = th;
        }
    }

    #[test]
    fn theta_matches_double_quadrature() {
        for d in [data(3.0, 1.0, 0.0, 4.0), data(2.5, 0.3, -0.5, 2.0), data(1.0, 1.0, 0.0, 1.0)] {
            let f = DeltaFront::from_data(&d, 0.4, 0.1).unwrap();
            for t in [0.41, 0.5, 1.0, 3.0, 10.0] {
                let closed = f.theta_squared(t).unwrap();
                let oracle = theta_squared_by_quadrature(&f, t);
                assert!(((closed - oracle) / oracle).abs() < 1e-9, "{closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn weak_form_balances_hold() {
        let f = DeltaFront::from_data(&data(3.0, 1.0, 0.0, 4.0), 0.0, 0.0).unwrap();
        let (dr, dm, de, dt) = f.jumps();
        let h = 1e-5;
        for t in [0.3, 1.0, 5.0] {
            let dtheta = (f.theta(t + h).unwrap() - f.theta(t - h).unwrap()) / (2.0 * h);
            let speed = f.speed(t).unwrap();
            assert!((dtheta - (dr * speed - dm)).abs() < 1e-8);
            let dpsi = (f.psi(t + h).unwrap() - f.psi(t - h).unwrap()) / (2.0 * h);
            let phi = f.phi(t);
            assert!((dpsi - (dm * speed - de + phi * phi * dt)).abs() < 1e-7);
            let dx = (f.x_star(t + h).unwrap() - f.x_star(t - h).unwrap()) / (2.0 * h);
            assert!((dx - speed).abs() < 1e-8);
        }
    }

    #[test]
    fn both_position_forms_agree() {
        let d = data(3.0, 1.0, 0.0, 4.0);
        let f = DeltaFront::from_data(&d, 0.0, 0.0).unwrap();
        let (dr, dm, _, _) = f.jumps();
        assert!(dm < 0.0);
        for t in [0.5, 2.0, 7.0] {
            let printed = (dm * t + f.theta(t).unwrap()) / dr;
            assert!((f.x_star(t).unwrap() - printed).abs() < 1e-12 * (1.0 + printed.abs()));
        }
    }

    #[test]
    fn equal_densities_move_at_the_mean_velocity() {
        let f = DeltaFront::from_data(&data(3.0, 1.0, 0.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(f.jumps().0, 0.0);
        for t in [0.1, 1.0, 1000.0] {
            assert!((f.x_star(t).unwrap() - 1.5 * t).abs() < 1e-12 * t);
            assert!((f.speed(t).unwrap() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn undetermined_front_is_rejected() {
        let left = SideState::new(1.0, 0.0).unwrap();
        let right = SideState::new(1.0, 1.0).unwrap();
        assert!(matches!(DeltaFront::new(2.0, 1.0, 0.0, 0.0, left, right), Err(Error::DegenerateFront(_))));
    }

    #[test]
    fn concentration_coefficient_matches_jump_form() {
        for d in [data(3.0, 1.0, 0.0, 4.0), data(2.0, 1.0, 0.0, 9.0), data(1.0, 0.5, 0.2, 2.0)] {
            let f = DeltaFront::from_data(&d, 0.3, 0.0);
            let Ok(f) = f else { continue };
            let a = f.leading_coefficient();
            let b = f.concentration_coefficient();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn equality_case_has_vanishing_leading_coefficient() {
        let f = DeltaFront::from_data(&data(2.0, 1.0, 0.0, 9.0), 0.0, 0.0).unwrap();
        assert!(f.leading_coefficient().abs() < 1e-10);
    }

    #[test]
    fn failing_concentration_condition_is_reported() {
        // [v]^2 = 0.01 < [sqrt T]^2 = 4
        let r = DeltaFront::from_data(&data(0.1, 1.0, 0.0, 9.0), 0.0, 0.0);
        assert!(matches!(r, Err(Error::NegativeDiscriminant { .. })));
    }

    #[test]
    fn onset_is_the_first_admissible_birth_time() {
        let d = data(1.0, 1.0, 0.0, 9.0);
        let onset = concentration_onset(&d).unwrap();
        assert!(onset > 0.0);
        assert!(DeltaFront::from_data(&d, onset * 0.99, 0.0).is_err());
        assert!(DeltaFront::from_data(&d, onset * 1.01, 0.0).is_ok());
        assert_eq!(concentration_onset(&data(0.0, 1.0, 1.0, 1.0)), None);
        assert_eq!(concentration_onset(&data(1.0, 1.0, 0.0, 1.0)), Some(0.0));
    }
}
