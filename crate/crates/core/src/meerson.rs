//! Lagrangian exact family with time-independent pressure `p = 2A cos(mu m)`
//! and density `rho(m, t) = rho0(m) / (1 - mu t sqrt(A rho0(m) cos(mu m)))^2`.
//!
//! The family solves the mass-coordinate system
//! `tau_t = v_m`, `v_t = -p_m`, `p_t = -gamma p rho v_m - Lambda p^{3/2} rho^{1/2}`
//! exactly when `mu = Lambda / (gamma sqrt 2)`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GasSample, ModelParams};
use crate::quadrature::{integrate, QuadOptions};
use crate::residual::{EquationSystem, FieldSet, ResidualReport};
use crate::uniform::linear_fit;

/// Shape-preserving (Fritsch-Carlson) cubic Hermite interpolant; constant
/// beyond the table ends.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidParameter("table needs >= 2 points and matching lengths".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table abscissae must increase".into()));
        }
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 { 0.0 } else { 0.5 * (secants[i - 1] + secants[i]) };
        }
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secants[i];
            let b = slopes[i + 1] / secants[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let k = 3.0 / r.sqrt();
                slopes[i] = k * a * secants[i];
                slopes[i + 1] = k * b * secants[i];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&p| p <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Initial density as a function of the mass coordinate.
#[derive(Clone)]
pub enum DensityProfile {
    Uniform(f64),
    Table(MonotoneCubic),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityProfile::Uniform(r) => write!(f, "Uniform({r})"),
            DensityProfile::Table(t) => write!(f, "Table({} points)", t.xs.len()),
            DensityProfile::Function(_) => write!(f, "Function"),
        }
    }
}

impl DensityProfile {
    pub fn eval(&self, m: f64) -> f64 {
        match self {
            DensityProfile::Uniform(r) => *r,
            DensityProfile::Table(t) => t.eval(m),
            DensityProfile::Function(f) => f(m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeersonParams {
    gamma: f64,
    lambda: f64,
    mu: f64,
    amplitude: f64,
    profile: DensityProfile,
}

impl MeersonParams {
    /// Family for given `gamma`, `Lambda` and pressure amplitude `A`, with
    /// `mu = Lambda / (gamma sqrt 2)` and unit initial density.
    pub fn new(gamma: f64, lambda: f64, amplitude: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("Lambda must be > 0, got {lambda}")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be > 0, got {amplitude}")));
        }
        Ok(Self { gamma, lambda, mu: lambda / (gamma * SQRT_2), amplitude, profile: DensityProfile::Uniform(1.0) })
    }

    /// Family with prescribed `mu`; `Lambda = mu gamma sqrt 2`.
    pub fn from_mu(mu: f64, gamma: f64, amplitude: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        Self::new(gamma, mu * gamma * SQRT_2, amplitude)
    }

    /// Replaces `mu` while keeping `gamma` and `Lambda`; the fields then no
    /// longer solve the energy equation (used as a negative control).
    pub fn with_mu_override(&self, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        Ok(Self { mu, ..self.clone() })
    }

    pub fn with_profile(&self, profile: DensityProfile) -> Result<Self> {
        let p = Self { profile, ..self.clone() };
        let half = p.half_width();
        let bad = (0..=200).map(|i| -half + 2.0 * half * i as f64 / 200.0).find(|&m| !(p.profile.eval(m) > 0.0));
        if let Some(m) = bad {
            return Err(Error::InvalidParameter(format!("initial density must be > 0, fails at m = {m}")));
        }
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn profile(&self) -> &DensityProfile {
        &self.profile
    }

    /// The mass domain is `(-half_width, half_width)` with `half_width = pi / (2 mu)`.
    pub fn half_width(&self) -> f64 {
        FRAC_PI_2 / self.mu
    }

    pub fn in_domain(&self, m: f64) -> bool {
        m.abs() < self.half_width()
    }

    fn check_domain(&self, m: f64) -> Result<()> {
        if self.in_domain(m) {
            Ok(())
        } else {
            Err(Error::Domain(format!("m = {m} outside the mass domain (-{h}, {h})", h = self.half_width())))
        }
    }

    fn rate(&self, m: f64) -> f64 {
        (self.amplitude * self.profile.eval(m) * (self.mu * m).cos()).sqrt()
    }

    /// `1 - mu t sqrt(A rho0 cos(mu m))`.
    fn collapse_factor(&self, m: f64, t: f64) -> f64 {
        1.0 - self.mu * t * self.rate(m)
    }
}

pub fn pressure(mp: &MeersonParams, m: f64) -> f64 {
    2.0 * mp.amplitude * (mp.mu * m).cos()
}

/// Blow-up time of the mass element `m`.
pub fn blowup_time(mp: &MeersonParams, m: f64) -> Result<f64> {
    mp.check_domain(m)?;
    Ok(1.0 / (mp.mu * mp.rate(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalBlowup {
    pub m: f64,
    pub t_star: f64,
}

/// Earliest blow-up over the domain: maximizes `rho0(m) cos(mu m)` by dense
/// sampling followed by golden-section refinement.
pub fn global_blowup(mp: &MeersonParams) -> GlobalBlowup {
    let half = mp.half_width();
    let g = |m: f64| mp.profile.eval(m) * (mp.mu * m).cos();
    let n = 4001;
    let grid: Vec<f64> = (1..n).map(|i| -half + 2.0 * half * i as f64 / n as f64).collect();
    let best = grid.iter().copied().fold((0.0, f64::NEG_INFINITY), |(bm, bg), m| {
        let v = g(m);
        if v > bg {
            (m, v)
        } else {
            (bm, bg)
        }
    });
    let dm = 2.0 * half / n as f64;
    let (mut a, mut b) = ((best.0 - dm).max(-half), (best.0 + dm).min(half));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    while (b - a).abs() > 1e-13 * (1.0 + best.0.abs()) {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    let m = if g(0.5 * (a + b)) >= best.1 { 0.5 * (a + b) } else { best.0 };
    GlobalBlowup { m, t_star: 1.0 / (mp.mu * mp.rate(m)) }
}

fn check_time(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    mp.check_domain(m)?;
    let d = mp.collapse_factor(m, t);
    if !(d > 0.0) {
        return Err(Error::BlowUpReached { m, t, t_star: 1.0 / (mp.mu * mp.rate(m)) });
    }
    Ok(d)
}

pub fn density_lagrangian(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    let d = check_time(mp, m, t)?;
    Ok(mp.profile.eval(m) / (d * d))
}

/// Specific volume `1 / rho`.
pub fn specific_volume(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    let d = check_time(mp, m, t)?;
    Ok(d * d / mp.profile.eval(m))
}

pub fn temperature_lagrangian(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    Ok(pressure(mp, m) * specific_volume(mp, m, t)?)
}

/// Analytic `d tau / dt`.
fn volume_rate(mp: &MeersonParams, m: f64, t: f64) -> f64 {
    -2.0 * mp.mu * mp.rate(m) * mp.collapse_factor(m, t) / mp.profile.eval(m)
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_segments: 4000 }
}

/// Velocity in the gauge `v(0, t) = 0`: the initial profile
/// `v0(m) = int_0^m tau_t(m', 0) dm'` plus the momentum-equation growth
/// `2 A mu sin(mu m) t`.
pub fn velocity_field(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    check_time(mp, m, t)?;
    let v0 = integrate(|s| volume_rate(mp, s, 0.0), 0.0, m, &quad_opts())?;
    Ok(v0 + 2.0 * mp.amplitude * mp.mu * (mp.mu * m).sin() * t)
}

/// Velocity from the mass equation alone, `int_0^m tau_t(m', t) dm'`.
pub fn velocity_from_mass_equation(mp: &MeersonParams, m: f64, t: f64) -> Result<f64> {
    check_time(mp, m, t)?;
    // every element between 0 and m must still be before its blow-up
    let path = if m >= 0.0 { (0.0, m) } else { (m, 0.0) };
    let worst = global_blowup_on(mp, path);
    if t >= worst {
        return Err(Error::BlowUpReached { m, t, t_star: worst });
    }
    integrate(|s| volume_rate(mp, s, t), 0.0, m, &quad_opts())
}

fn global_blowup_on(mp: &MeersonParams, (a, b): (f64, f64)) -> f64 {
    (0..=200).map(|i| a + (b - a) * i as f64 / 200.0).map(|m| 1.0 / (mp.mu * mp.rate(m))).fold(f64::INFINITY, f64::min)
}

/// Slope of `log rho(m, t)` against `log(t*(m) - t)` sampled at the given
/// distances `t*(m) - t` from the blow-up time of the element.
pub fn density_exponent(mp: &MeersonParams, m: f64, gaps: &[f64]) -> Result<f64> {
    let t_star = blowup_time(mp, m)?;
    if gaps.len() < 2 || gaps.iter().any(|&g| !(g > 0.0 && g <= t_star)) {
        return Err(Error::InvalidParameter("need >= 2 gaps in (0, t*]".into()));
    }
    let ys = gaps.iter().map(|&g| density_lagrangian(mp, m, t_star - g).map(f64::ln)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    Ok(linear_fit(&xs, &ys).0)
}

/// Lagrangian evaluator bundling the closed-form fields.
#[derive(Debug, Clone)]
pub struct LagrangianField {
    pub params: MeersonParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangianSample {
    pub m: f64,
    pub tau: f64,
    pub rho: f64,
    pub v: f64,
    pub p: f64,
    pub temperature: f64,
}

impl LagrangianField {
    pub fn new(params: MeersonParams) -> Self {
        Self { params }
    }

    pub fn sample(&self, m: f64, t: f64) -> Result<LagrangianSample> {
        let mp = &self.params;
        let tau = specific_volume(mp, m, t)?;
        let p = pressure(mp, m);
        Ok(LagrangianSample { m, tau, rho: 1.0 / tau, v: velocity_field(mp, m, t)?, p, temperature: p * tau })
    }
}

/// Map between the mass coordinate and position at a fixed time,
/// `x(m) = int_0^m tau(m', t) dm'`, tabulated on nodes and refined locally.
#[derive(Debug, Clone)]
pub struct EulerLagrangeMap {
    params: MeersonParams,
    pub t: f64,
    nodes_m: Vec<f64>,
    nodes_x: Vec<f64>,
}

const MAP_NODES: usize = 256;

pub fn euler_lagrange_maps(mp: &MeersonParams, t: f64) -> Result<EulerLagrangeMap> {
    let g = global_blowup(mp);
    if !(t < g.t_star) {
        return Err(Error::BlowUpReached { m: g.m, t, t_star: g.t_star });
    }
    let half = mp.half_width();
    let nodes_m: Vec<f64> = (0..=MAP_NODES).map(|i| -half + 2.0 * half * i as f64 / MAP_NODES as f64).collect();
    let tau = |m: f64| {
        let d = mp.collapse_factor(m, t);
        d * d / mp.profile.eval(m)
    };
    let pieces: Vec<f64> = nodes_m
        .windows(2)
        .map(|w| integrate(tau, w[0], w[1], &quad_opts()))
        .collect::<Result<Vec<_>>>()?;
    let mut nodes_x = Vec::with_capacity(nodes_m.len());
    nodes_x.push(0.0);
    for p in &pieces {
        nodes_x.push(nodes_x.last().unwrap() + p);
    }
    // shift so that x(0) = 0
    let mid = MAP_NODES / 2;
    let x_mid = nodes_x[mid];
    for x in &mut nodes_x {
        *x -= x_mid;
    }
    if nodes_x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InversionFailure(format!("x(m) is not strictly increasing at t = {t}")));
    }
    Ok(EulerLagrangeMap { params: mp.clone(), t, nodes_m, nodes_x })
}

impl EulerLagrangeMap {
    fn tau(&self, m: f64) -> f64 {
        let d = self.params.collapse_factor(m, self.t);
        d * d / self.params.profile.eval(m)
    }

    /// Position range covered by the mass domain.
    pub fn x_range(&self) -> (f64, f64) {
        (self.nodes_x[0], *self.nodes_x.last().unwrap())
    }

    pub fn x_of_m(&self, m: f64) -> Result<f64> {
        let half = self.params.half_width();
        if m.abs() > half {
            return Err(Error::Domain(format!("m = {m} outside the mass domain")));
        }
        let i = (self.nodes_m.partition_point(|&p| p <= m).max(1) - 1).min(self.nodes_m.len() - 2);
        let near = if m - self.nodes_m[i] <= self.nodes_m[i + 1] - m { i } else { i + 1 };
        Ok(self.nodes_x[near] + integrate(|s| self.tau(s), self.nodes_m[near], m, &quad_opts())?)
    }

    /// Inverse map by monotone interpolation of the node table, refined by
    /// safeguarded Newton iteration with `dx/dm = tau`.
    pub fn m_of_x(&self, x: f64) -> Result<f64> {
        let (x_lo, x_hi) = self.x_range();
        if !(x >= x_lo && x <= x_hi) {
            return Err(Error::Domain(format!("x = {x} outside [{x_lo}, {x_hi}]")));
        }
        let i = (self.nodes_x.partition_point(|&p| p <= x).max(1) - 1).min(self.nodes_x.len() - 2);
        let (mut a, mut b) = (self.nodes_m[i], self.nodes_m[i + 1]);
        let w = (x - self.nodes_x[i]) / (self.nodes_x[i + 1] - self.nodes_x[i]);
        let mut m = a + w * (b - a);
        for _ in 0..60 {
            let f = self.x_of_m(m)? - x;
            if f.abs() <= 1e-14 * (1.0 + x.abs()) {
                return Ok(m);
            }
            if f > 0.0 {
                b = m;
            } else {
                a = m;
            }
            let step = m - f / self.tau(m);
            m = if step > a && step < b { step } else { 0.5 * (a + b) };
            if b - a <= 1e-15 * (1.0 + m.abs()) {
                return Ok(m);
            }
        }
        Err(Error::InversionFailure(format!("Newton iteration for m(x = {x}) did not converge")))
    }

    /// `int rho dx` over the image of the mass domain, computed in the
    /// Eulerian frame through `m(x)`.
    pub fn eulerian_mass(&self) -> Result<f64> {
        let (a, b) = self.x_range();
        let err = std::cell::RefCell::new(None);
        let rho = |x: f64| match self.m_of_x(x) {
            Ok(m) => 1.0 / self.tau(m),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        // split at the node positions so each panel sees a smooth integrand
        let mut total = 0.0;
        for k in (0..self.nodes_x.len() - 1).step_by(8) {
            let hi = self.nodes_x[(k + 8).min(self.nodes_x.len() - 1)];
            let lo = self.nodes_x[k].max(a);
            total += integrate(rho, lo, hi.min(b), &QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_segments: 2000 })?;
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
        }
        Ok(total)
    }
}

/// Eulerian fields `(rho, v, T)(t, x)` of the family on a time interval.
pub struct MeersonEulerian {
    params: MeersonParams,
    t_max: f64,
    maps: std::sync::Mutex<std::collections::HashMap<u64, Arc<EulerLagrangeMap>>>,
}

impl MeersonEulerian {
    pub fn new(params: MeersonParams, t_max: f64) -> Result<Self> {
        let g = global_blowup(&params);
        if !(t_max < g.t_star) {
            return Err(Error::BlowUpReached { m: g.m, t: t_max, t_star: g.t_star });
        }
        Ok(Self { params, t_max, maps: Default::default() })
    }

    fn map(&self, t: f64) -> Result<Arc<EulerLagrangeMap>> {
        if let Some(m) = self.maps.lock().unwrap().get(&t.to_bits()) {
            return Ok(m.clone());
        }
        let m = Arc::new(euler_lagrange_maps(&self.params, t)?);
        self.maps.lock().unwrap().insert(t.to_bits(), m.clone());
        Ok(m)
    }
}

impl FieldSet for MeersonEulerian {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, t: f64, x: &[f64]) -> bool {
        if !(t >= 0.0 && t <= self.t_max) {
            return false;
        }
        match self.map(t) {
            Ok(map) => {
                let (a, b) = map.x_range();
                x[0] > a && x[0] < b
            }
            Err(_) => false,
        }
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample> {
        let m = self.map(t)?.m_of_x(x[0])?;
        let tau = specific_volume(&self.params, m, t)?;
        let v = velocity_field(&self.params, m, t)?;
        GasSample::new(1.0 / tau, vec![v], pressure(&self.params, m) * tau)
    }
}

impl MeersonEulerian {
    /// Model parameters of the equations the Eulerian fields should satisfy.
    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.params.gamma, self.params.lambda, 1)
    }
}

pub const LAGRANGIAN_EQUATIONS: [&str; 3] = ["mass", "momentum", "energy"];

/// Tensor grid in `(m, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassGrid {
    pub masses: Vec<f64>,
    pub times: Vec<f64>,
}

impl MassGrid {
    pub fn uniform(m: (f64, f64), nm: usize, t: (f64, f64), nt: usize) -> Self {
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        };
        Self { masses: lin(m.0, m.1, nm), times: lin(t.0, t.1, nt) }
    }
}

/// Centered-difference residuals of the three mass-coordinate equations, with
/// `gamma` and `Lambda` taken from the parameters and the fields built with
/// their `mu`.
pub fn lagrangian_residual(mp: &MeersonParams, grid: &MassGrid, h: f64) -> Result<ResidualReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h must be > 0, got {h}")));
    }
    let (gamma, lambda) = (mp.gamma, mp.lambda);
    let rows: Vec<Result<Vec<f64>>> = grid
        .times
        .par_iter()
        .flat_map_iter(|&t| grid.masses.iter().map(move |&m| (m, t)))
        .map(|(m, t)| {
            let tau = |m: f64, t: f64| specific_volume(mp, m, t);
            let v = |m: f64, t: f64| velocity_field(mp, m, t);
            let p = |m: f64, _t: f64| -> Result<f64> {
                mp.check_domain(m)?;
                Ok(pressure(mp, m))
            };
            let d_t = |f: &dyn Fn(f64, f64) -> Result<f64>| -> Result<f64> { Ok((f(m, t + h)? - f(m, t - h)?) / (2.0 * h)) };
            let d_m = |f: &dyn Fn(f64, f64) -> Result<f64>| -> Result<f64> { Ok((f(m + h, t)? - f(m - h, t)?) / (2.0 * h)) };
            let v_m = d_m(&v)?;
            let (p0, tau0) = (p(m, t)?, tau(m, t)?);
            let rho0 = 1.0 / tau0;
            Ok(vec![
                d_t(&tau)? - v_m,
                d_t(&v)? + d_m(&p)?,
                d_t(&p)? + gamma * p0 * rho0 * v_m + lambda * p0.powf(1.5) * rho0.sqrt(),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_points(EquationSystem::Lagrangian, h, &LAGRANGIAN_EQUATIONS, &rows, 0))
}

/// One row of a Lagrangian/Eulerian snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub m: f64,
    pub x: f64,
    pub rho: f64,
    pub v: f64,
    pub temperature: f64,
}

/// Fields at `points` equally spaced interior mass coordinates.
pub fn snapshot(mp: &MeersonParams, t: f64, points: usize) -> Result<Vec<SnapshotRow>> {
    let map = euler_lagrange_maps(mp, t)?;
    let half = mp.half_width();
    (1..=points)
        .map(|i| {
            let m = -half + 2.0 * half * i as f64 / (points + 1) as f64;
            let tau = specific_volume(mp, m, t)?;
            Ok(SnapshotRow {
                m,
                x: map.x_of_m(m)?,
                rho: 1.0 / tau,
                v: velocity_field(mp, m, t)?,
                temperature: pressure(mp, m) * tau,
            })
        })
        .collect()
}
