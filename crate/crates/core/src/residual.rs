//! Finite-difference substitution of candidate fields into the governing
//! equations, with per-equation residual norms and convergence orders.
//!
//! Derivatives are taken by centered differences of the sampled fields only;
//! nothing here looks at how a field set was constructed.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GasSample, ModelParams};

/// Space-time fields `rho, v, T` that can be sampled pointwise.
pub trait FieldSet: Sync {
    fn dim(&self) -> usize;

    /// Whether `(t, x)` lies in the open domain where the fields are smooth
    /// or, for piecewise fields, defined.
    fn contains(&self, t: f64, x: &[f64]) -> bool;

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample>;

    /// Positions of jumps at time `t` (one-dimensional fields only).
    fn discontinuities(&self, _t: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: FieldSet + ?Sized> FieldSet for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn contains(&self, t: f64, x: &[f64]) -> bool {
        (**self).contains(t, x)
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample> {
        (**self).sample(t, x)
    }

    fn discontinuities(&self, t: f64) -> Vec<f64> {
        (**self).discontinuities(t)
    }
}

/// Multiplies the temperature of another field set by a constant factor.
pub struct ScaledTemperature<F> {
    pub inner: F,
    pub factor: f64,
}

impl<F: FieldSet> FieldSet for ScaledTemperature<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn contains(&self, t: f64, x: &[f64]) -> bool {
        self.inner.contains(t, x)
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample> {
        let mut s = self.inner.sample(t, x)?;
        s.temperature *= self.factor;
        Ok(s)
    }

    fn discontinuities(&self, t: f64) -> Vec<f64> {
        self.inner.discontinuities(t)
    }
}

/// Tensor grid of sample times and spatial points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Grid {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || points.is_empty() {
            return Err(Error::InvalidParameter("residual grid needs at least one time and one point".into()));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidParameter("grid points must share a positive dimension".into()));
        }
        Ok(Self { times, points })
    }

    /// `nt` equally spaced times and `nx` equally spaced points on a segment.
    pub fn line(t: (f64, f64), nt: usize, x: (f64, f64), nx: usize) -> Result<Self> {
        Self::new(linspace(t.0, t.1, nt), linspace(x.0, x.1, nx).into_iter().map(|x| vec![x]).collect())
    }

    /// Points of the cube `[lo, hi]^dim` with `per_axis` points per axis.
    pub fn cube(t: (f64, f64), nt: usize, lo: f64, hi: f64, per_axis: usize, dim: usize) -> Result<Self> {
        let axis = linspace(lo, hi, per_axis);
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..dim {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        Self::new(linspace(t.0, t.1, nt), points)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquationSystem {
    /// Mass, momentum (conservative form) and temperature equations with the
    /// inelastic sink.
    EulerGranular,
    /// Velocity and `sqrt(T)` equations of the constrained one-dimensional system.
    ChaplyginConstrained,
    /// Mass and momentum conservation with flux `rho v^2 - phi^2 / rho`.
    ChaplyginConservative,
    /// Mass-coordinate system for `(1/rho, v, p)`.
    Lagrangian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationNorms {
    pub name: String,
    pub max: f64,
    /// Root mean square over the evaluated points.
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub system: EquationSystem,
    pub h: f64,
    pub equations: Vec<EquationNorms>,
    pub evaluated: usize,
    pub masked: usize,
}

impl ResidualReport {
    /// Builds norms from per-point residual vectors (one entry per equation).
    pub fn from_points(system: EquationSystem, h: f64, names: &[&str], rows: &[Vec<f64>], masked: usize) -> Self {
        let equations = names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let (mut max, mut sq) = (0.0f64, 0.0);
                for r in rows {
                    max = max.max(r[k].abs());
                    sq += r[k] * r[k];
                }
                let l2 = if rows.is_empty() { 0.0 } else { (sq / rows.len() as f64).sqrt() };
                EquationNorms { name: name.to_string(), max, l2 }
            })
            .collect();
        Self { system, h, equations, evaluated: rows.len(), masked }
    }

    pub fn max_norm(&self) -> f64 {
        self.equations.iter().map(|e| e.max).fold(0.0, f64::max)
    }

    pub fn equation(&self, name: &str) -> Option<&EquationNorms> {
        self.equations.iter().find(|e| e.name == name)
    }
}

/// Below this level residual norms are rounding noise.
pub const ROUNDING_FLOOR: f64 = 1e-13;

/// Observed orders of one equation between consecutive step sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub equation: String,
    /// `ln(r_k / r_{k+1}) / ln(h_k / h_{k+1})` on the max norm.
    pub max_orders: Vec<f64>,
    pub l2_orders: Vec<f64>,
    pub floor_warning: bool,
}

impl OrderEstimate {
    /// Order from the finest pair.
    pub fn order(&self) -> f64 {
        *self.max_orders.last().expect("at least one pair")
    }
}

pub fn convergence_order(reports: &[ResidualReport]) -> Result<Vec<OrderEstimate>> {
    if reports.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: reports.len() });
    }
    let names: Vec<&str> = reports[0].equations.iter().map(|e| e.name.as_str()).collect();
    if reports.iter().any(|r| r.equations.len() != names.len() || r.system != reports[0].system) {
        return Err(Error::InvalidParameter("reports come from different equation systems".into()));
    }
    let rate = |a: f64, b: f64, ha: f64, hb: f64| (a / b).ln() / (ha / hb).ln();
    Ok(names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let pairs = reports.windows(2);
            let max_orders = pairs.clone().map(|w| rate(w[0].equations[k].max, w[1].equations[k].max, w[0].h, w[1].h)).collect();
            let l2_orders = pairs.map(|w| rate(w[0].equations[k].l2, w[1].equations[k].l2, w[0].h, w[1].h)).collect();
            let floor_warning = reports.iter().any(|r| r.equations[k].max < ROUNDING_FLOOR);
            OrderEstimate { equation: name.to_string(), max_orders, l2_orders, floor_warning }
        })
        .collect())
}

/// Reports at several step sizes together with their observed orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub reports: Vec<ResidualReport>,
    pub orders: Vec<OrderEstimate>,
}

impl ConvergenceStudy {
    pub fn new(reports: Vec<ResidualReport>) -> Result<Self> {
        let orders = convergence_order(&reports)?;
        Ok(Self { reports, orders })
    }

    pub fn order_of(&self, equation: &str) -> Option<f64> {
        self.orders.iter().find(|o| o.equation == equation).map(|o| o.order())
    }

    /// Smallest finest-pair order over equations not at the rounding floor.
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().filter(|o| !o.floor_warning).map(|o| o.order()).reduce(f64::min)
    }

    /// Smallest finest-pair order over all equations.
    pub fn min_order_any(&self) -> f64 {
        self.orders.iter().map(|o| o.order()).fold(f64::INFINITY, f64::min)
    }
}

/// Stencil samples around one grid point: `t +- h` at `x` and `x +- h e_i` at `t`.
struct Stencil {
    center: GasSample,
    t_plus: GasSample,
    t_minus: GasSample,
    x_plus: Vec<GasSample>,
    x_minus: Vec<GasSample>,
}

fn gather<F: FieldSet + ?Sized>(f: &F, t: f64, x: &[f64], h: f64) -> Result<Stencil> {
    let at = |tt: f64, xx: &[f64]| -> Result<GasSample> {
        if !f.contains(tt, xx) {
            return Err(Error::EvaluationDomain { t: tt, x: xx.to_vec() });
        }
        f.sample(tt, xx)
    };
    let n = x.len();
    let mut x_plus = Vec::with_capacity(n);
    let mut x_minus = Vec::with_capacity(n);
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        x_plus.push(at(t, &xp)?);
        x_minus.push(at(t, &xm)?);
    }
    Ok(Stencil { center: at(t, x)?, t_plus: at(t + h, x)?, t_minus: at(t - h, x)?, x_plus, x_minus })
}

/// Whether the stencil at `(t, x)` comes within `3h` of a front.
fn near_front<F: FieldSet + ?Sized>(f: &F, t: f64, x: &[f64], h: f64) -> bool {
    x.len() == 1 && [t - h, t, t + h].iter().any(|&tt| f.discontinuities(tt).iter().any(|xf| (x[0] - xf).abs() <= 3.0 * h))
}

fn evaluate<F, E>(f: &F, grid: &Grid, h: f64, eval: E) -> Result<(Vec<Vec<f64>>, usize)>
where
    F: FieldSet + ?Sized,
    E: Fn(f64, &[f64], &Stencil) -> Vec<f64> + Sync,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h must be > 0, got {h}")));
    }
    if grid.dim() != f.dim() {
        return Err(Error::InvalidParameter(format!("grid dimension {} does not match fields ({})", grid.dim(), f.dim())));
    }
    let jobs: Vec<(f64, &[f64])> =
        grid.times.iter().flat_map(|&t| grid.points.iter().map(move |x| (t, x.as_slice()))).collect();
    let out: Vec<Result<Option<Vec<f64>>>> = jobs
        .par_iter()
        .map(|&(t, x)| {
            if near_front(f, t, x, h) {
                return Ok(None);
            }
            let s = gather(f, t, x, h)?;
            Ok(Some(eval(t, x, &s)))
        })
        .collect();
    let mut rows = Vec::with_capacity(out.len());
    let mut masked = 0;
    for r in out {
        match r? {
            Some(row) => rows.push(row),
            None => masked += 1,
        }
    }
    Ok((rows, masked))
}

pub const EULER_EQUATIONS: [&str; 3] = ["mass", "momentum", "energy"];

/// Residuals of the mass, momentum and temperature equations. The momentum
/// norm is the Euclidean norm of the vector residual.
pub fn residual_euler<F: FieldSet + ?Sized>(f: &F, p: &ModelParams, grid: &Grid, h: f64) -> Result<ResidualReport> {
    let (gamma, lambda) = (p.gamma(), p.lambda());
    let (rows, masked) = evaluate(f, grid, h, |_, _, s| {
        let n = s.center.v.len();
        let dt = |g: &dyn Fn(&GasSample) -> f64| (g(&s.t_plus) - g(&s.t_minus)) / (2.0 * h);
        let dx = |i: usize, g: &dyn Fn(&GasSample) -> f64| (g(&s.x_plus[i]) - g(&s.x_minus[i])) / (2.0 * h);

        let mut mass = dt(&|g| g.rho);
        for i in 0..n {
            mass += dx(i, &|g| g.rho * g.v[i]);
        }

        let mut momentum_sq = 0.0;
        for j in 0..n {
            let mut m = dt(&|g| g.rho * g.v[j]) + dx(j, &|g| g.rho * g.temperature);
            for i in 0..n {
                m += dx(i, &|g| g.rho * g.v[i] * g.v[j]);
            }
            momentum_sq += m * m;
        }

        let c = &s.center;
        let mut energy = dt(&|g| g.temperature);
        let mut div = 0.0;
        for i in 0..n {
            energy += c.v[i] * dx(i, &|g| g.temperature);
            div += dx(i, &|g| g.v[i]);
        }
        energy += (gamma - 1.0) * c.temperature * div + lambda * c.rho * c.temperature.powf(1.5);
        vec![mass, momentum_sq.sqrt(), energy]
    })?;
    Ok(ResidualReport::from_points(EquationSystem::EulerGranular, h, &EULER_EQUATIONS, &rows, masked))
}

pub const CHAPLYGIN_EQUATIONS: [&str; 2] = ["velocity", "sqrt_temperature"];
pub const CONSERVATIVE_EQUATIONS: [&str; 2] = ["mass", "momentum"];

/// Residuals of the constrained one-dimensional system
/// `v_t + v v_x - w w_x` and `w_t + v w_x - w v_x + (Lambda/2) phi w` with `w = sqrt(T)`.
pub fn residual_chaplygin<F, P>(f: &F, p: &ModelParams, grid: &Grid, h: f64, phi: P) -> Result<ResidualReport>
where
    F: FieldSet + ?Sized,
    P: Fn(f64) -> f64 + Sync,
{
    if f.dim() != 1 {
        return Err(Error::InvalidParameter("the constrained system is one-dimensional".into()));
    }
    let lambda = p.lambda();
    let (rows, masked) = evaluate(f, grid, h, |t, _, s| {
        let w = |g: &GasSample| g.temperature.sqrt();
        let (c, xp, xm) = (&s.center, &s.x_plus[0], &s.x_minus[0]);
        let v_t = (s.t_plus.v[0] - s.t_minus.v[0]) / (2.0 * h);
        let v_x = (xp.v[0] - xm.v[0]) / (2.0 * h);
        let w_t = (w(&s.t_plus) - w(&s.t_minus)) / (2.0 * h);
        let w_x = (w(xp) - w(xm)) / (2.0 * h);
        let (v, wc) = (c.v[0], w(c));
        vec![v_t + v * v_x - wc * w_x, w_t + v * w_x - wc * v_x + 0.5 * lambda * phi(t) * wc]
    })?;
    Ok(ResidualReport::from_points(EquationSystem::ChaplyginConstrained, h, &CHAPLYGIN_EQUATIONS, &rows, masked))
}

/// Conservative residuals `rho_t + (rho v)_x` and `(rho v)_t + (rho v^2 - phi^2/rho)_x`
/// with the density taken as `phi(t) / sqrt(T)`.
pub fn residual_chaplygin_conservative<F, P>(f: &F, grid: &Grid, h: f64, phi: P) -> Result<ResidualReport>
where
    F: FieldSet + ?Sized,
    P: Fn(f64) -> f64 + Sync,
{
    if f.dim() != 1 {
        return Err(Error::InvalidParameter("the constrained system is one-dimensional".into()));
    }
    let (rows, masked) = evaluate(f, grid, h, |t, _, s| {
        let rho = |tt: f64, g: &GasSample| phi(tt) / g.temperature.sqrt();
        let (xp, xm) = (&s.x_plus[0], &s.x_minus[0]);
        let (tp, tm) = (&s.t_plus, &s.t_minus);
        let mass = (rho(t + h, tp) - rho(t - h, tm)) / (2.0 * h) + (rho(t, xp) * xp.v[0] - rho(t, xm) * xm.v[0]) / (2.0 * h);
        let flux = |g: &GasSample| {
            let r = rho(t, g);
            r * g.v[0] * g.v[0] - phi(t) * phi(t) / r
        };
        let momentum = (rho(t + h, tp) * tp.v[0] - rho(t - h, tm) * tm.v[0]) / (2.0 * h) + (flux(xp) - flux(xm)) / (2.0 * h);
        vec![mass, momentum]
    })?;
    Ok(ResidualReport::from_points(EquationSystem::ChaplyginConservative, h, &CONSERVATIVE_EQUATIONS, &rows, masked))
}

/// Runs `report` at each step size and estimates the orders.
pub fn study<R>(steps: &[f64], report: R) -> Result<ConvergenceStudy>
where
    R: Fn(f64) -> Result<ResidualReport>,
{
    ConvergenceStudy::new(steps.iter().map(|&h| report(h)).collect::<Result<Vec<_>>>()?)
}
