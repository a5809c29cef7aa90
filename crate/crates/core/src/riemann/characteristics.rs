use serde::Serialize;

use super::RiemannData;
use crate::error::{Error, Result};
use crate::ode::{self, IntegrateOptions, OdeSystem, Termination};

/// Sampled invariants `s = v - sqrt(T)` and `r = v + sqrt(T)` on increasing
/// positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantProfile {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
}

impl InvariantProfile {
    pub fn new(x: Vec<f64>, s: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || s.len() != x.len() || r.len() != x.len() {
            return Err(Error::InvalidParameter("profile needs >= 2 points and matching lengths".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("profile positions must increase".into()));
        }
        if s.iter().zip(&r).any(|(s, r)| r < s) {
            return Err(Error::Domain("profile has r < s (negative sqrt(T))".into()));
        }
        Ok(Self { x, s, r })
    }

    /// Samples `(v(x), T(x))` at the given positions.
    pub fn from_fields<F: Fn(f64) -> (f64, f64)>(x: Vec<f64>, field: F) -> Result<Self> {
        let (s, r) = x
            .iter()
            .map(|&xi| {
                let (v, t) = field(xi);
                super::riemann_invariants(v, t)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Self::new(x, s, r)
    }
}

/// Piecewise-linear interpolation, constant beyond the ends.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&p| p <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Two particle families: `s`-particles move with speed `r` and carry `s`,
/// `r`-particles move with speed `s` and carry `r`. Each family reads the
/// other's field by linear interpolation. `phi` is integrated alongside.
///
/// Layout: `[x_s (n), s (n), x_r (n), r (n), phi]`.
struct ParticleSystem {
    n: usize,
    lambda: f64,
}

impl OdeSystem for ParticleSystem {
    fn dim(&self) -> usize {
        4 * self.n + 1
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        let (xs, s) = (&y[..n], &y[n..2 * n]);
        let (xr, r) = (&y[2 * n..3 * n], &y[3 * n..4 * n]);
        let phi = y[4 * n];
        let k = 0.25 * self.lambda * phi;
        for i in 0..n {
            let r_here = interp(xr, r, xs[i]);
            dy[i] = r_here;
            dy[n + i] = k * (r_here - s[i]);
            let s_here = interp(xs, s, xr[i]);
            dy[2 * n + i] = s_here;
            dy[3 * n + i] = -k * (r[i] - s_here);
        }
        dy[4 * n] = -0.5 * self.lambda * phi * phi;
    }

    fn admissible(&self, y: &[f64]) -> bool {
        let n = self.n;
        y[..n].windows(2).all(|w| w[1] > w[0]) && y[2 * n..3 * n].windows(2).all(|w| w[1] > w[0])
    }
}

/// Particle positions and carried invariants at the final time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolvedInvariants {
    pub t: f64,
    pub s_positions: Vec<f64>,
    pub s: Vec<f64>,
    pub r_positions: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: f64,
}

impl EvolvedInvariants {
    pub fn s_at(&self, x: f64) -> f64 {
        interp(&self.s_positions, &self.s, x)
    }

    pub fn r_at(&self, x: f64) -> f64 {
        interp(&self.r_positions, &self.r, x)
    }

    /// `(v, T)` at `x`.
    pub fn state_at(&self, x: f64) -> (f64, f64) {
        let (s, r) = (self.s_at(x), self.r_at(x));
        let w = 0.5 * (r - s);
        (0.5 * (r + s), w * w)
    }
}

fn oracle_options() -> IntegrateOptions {
    IntegrateOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() }
}

/// Method-of-characteristics evolution of smooth invariants from `t = 0`,
/// independent of any closed-form solution. Only `lambda` and `c` of the
/// data are used.
pub fn characteristics_oracle(d: &RiemannData, ic: &InvariantProfile, t_final: f64) -> Result<EvolvedInvariants> {
    let n = ic.x.len();
    let sys = ParticleSystem { n, lambda: d.lambda };
    let mut y0 = Vec::with_capacity(4 * n + 1);
    y0.extend(&ic.x);
    y0.extend(&ic.s);
    y0.extend(&ic.x);
    y0.extend(&ic.r);
    y0.push(1.0 / d.c);
    let traj = ode::integrate(&sys, 0.0, &y0, t_final, &oracle_options())?;
    match traj.termination {
        Termination::ReachedFinalTime => {}
        Termination::PhiNonPositive { t } => return Err(Error::CharacteristicCrossing { t }),
        other => return Err(Error::Integration(format!("characteristics stopped: {other:?}"))),
    }
    let y = traj.states.last().unwrap();
    Ok(EvolvedInvariants {
        t: t_final,
        s_positions: y[..n].to_vec(),
        s: y[n..2 * n].to_vec(),
        r_positions: y[2 * n..3 * n].to_vec(),
        r: y[3 * n..4 * n].to_vec(),
        phi: y[4 * n],
    })
}

/// Contact positions and side states from integrating the characteristic
/// equations of the two outer states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontOracleRow {
    pub t: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub v_left: f64,
    pub temp_left: f64,
    pub v_right: f64,
    pub temp_right: f64,
}

/// `x_-' = s_L`, `x_+' = r_R` with each side's uniform invariants evolving by
/// `s' = (Lambda phi / 4)(r - s)`, `r' = -(Lambda phi / 4)(r - s)`.
struct FrontSystem {
    lambda: f64,
}

impl OdeSystem for FrontSystem {
    fn dim(&self) -> usize {
        7
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let phi = y[6];
        let k = 0.25 * self.lambda * phi;
        let (sl, rl, sr, rr) = (y[1], y[2], y[4], y[5]);
        dy[0] = sl;
        dy[1] = k * (rl - sl);
        dy[2] = -k * (rl - sl);
        dy[3] = rr;
        dy[4] = k * (rr - sr);
        dy[5] = -k * (rr - sr);
        dy[6] = -0.5 * self.lambda * phi * phi;
    }
}

pub fn front_oracle(d: &RiemannData, times: &[f64]) -> Result<Vec<FrontOracleRow>> {
    let (sl, rl) = super::riemann_invariants(d.v_left, d.temp_left)?;
    let (sr, rr) = super::riemann_invariants(d.v_right, d.temp_right)?;
    let y0 = [0.0, sl, rl, 0.0, sr, rr, 1.0 / d.c];
    let states = ode::integrate_at(&FrontSystem { lambda: d.lambda }, 0.0, &y0, times, &oracle_options())?;
    Ok(times
        .iter()
        .zip(states)
        .map(|(&t, y)| FrontOracleRow {
            t,
            x_minus: y[0],
            x_plus: y[3],
            v_left: 0.5 * (y[1] + y[2]),
            temp_left: (0.5 * (y[2] - y[1])).powi(2),
            v_right: 0.5 * (y[4] + y[5]),
            temp_right: (0.5 * (y[5] - y[4])).powi(2),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{haff_temperature, HaffParams, ModelParams};
    use crate::riemann::two_contact_solution;

    fn data() -> RiemannData {
        RiemannData::new(0.0, 1.0, 1.0, 1.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn constant_state_cools_like_haff() {
        let d = data();
        let (v0, t0) = (0.4, 2.0);
        let x: Vec<f64> = (0..21).map(|i| -5.0 + 0.5 * i as f64).collect();
        let ic = InvariantProfile::from_fields(x, |_| (v0, t0)).unwrap();
        let out = characteristics_oracle(&d, &ic, 3.0).unwrap();
        let rho0 = (1.0 / d.c) / t0.sqrt();
        let p = ModelParams::new(1.4, d.lambda, 1).unwrap();
        let expected = haff_temperature(&p, &HaffParams::new(rho0, t0).unwrap(), 3.0);
        let (v, t) = out.state_at(0.3);
        assert!((v - v0).abs() < 1e-10);
        assert!((t - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn zero_temperature_is_pure_transport() {
        let d = data();
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let ic = InvariantProfile::from_fields(x.clone(), |x| (1.0 + 0.1 * x, 0.0)).unwrap();
        let out = characteristics_oracle(&d, &ic, 1.0).unwrap();
        for i in 0..x.len() {
            let v0 = 1.0 + 0.1 * x[i];
            assert!((out.s[i] - v0).abs() < 1e-12);
            assert!((out.s_positions[i] - (x[i] + v0)).abs() < 1e-10);
        }
    }

    #[test]
    fn crossing_characteristics_are_reported() {
        let d = data();
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        // compressive zero-temperature data: particles collide at t = 1
        let ic = InvariantProfile::from_fields(x, |x| (-x, 0.0)).unwrap();
        assert!(matches!(characteristics_oracle(&d, &ic, 2.0), Err(Error::CharacteristicCrossing { .. })));
    }

    #[test]
    fn fronts_match_closed_form() {
        let d = RiemannData::new(0.3, 2.0, 1.0, 0.5, 1.5, 0.8).unwrap();
        let tc = two_contact_solution(&d);
        let times: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
        for row in front_oracle(&d, &times).unwrap() {
            assert!((row.x_minus - tc.x_minus(row.t)).abs() < 1e-9);
            assert!((row.x_plus - tc.x_plus(row.t)).abs() < 1e-9);
            assert!((row.temp_right - tc.temp_right(row.t)).abs() < 1e-10);
        }
    }
}
