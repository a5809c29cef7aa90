//! Named residual-certification runs shared by the `verify` subcommand, the
//! examples and the acceptance tests.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::Table;
use crate::meerson::{lagrangian_residual, MassGrid, MeersonEulerian, MeersonParams};
use crate::model::{GasSample, HaffParams, HomogeneousCooling, ModelParams};
use crate::ode::IntegrateOptions;
use crate::residual::{residual_chaplygin, residual_euler, study, ConvergenceStudy, FieldSet, Grid, ScaledTemperature};
use crate::riemann::{solve, RiemannData};
use crate::uniform::{integrate, ExactFamily1d, UDState, UniformFlow};

/// Step sizes of the standard h-halving study.
pub const STANDARD_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    Haff,
    ExactFamily1d,
    Uniform2d,
    RiemannTwoContact,
    Meerson,
    MeersonEulerian,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Haff,
        Scenario::ExactFamily1d,
        Scenario::Uniform2d,
        Scenario::RiemannTwoContact,
        Scenario::Meerson,
        Scenario::MeersonEulerian,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Haff => "haff",
            Scenario::ExactFamily1d => "exact-family-1d",
            Scenario::Uniform2d => "uniform-2d",
            Scenario::RiemannTwoContact => "riemann-two-contact",
            Scenario::Meerson => "meerson",
            Scenario::MeersonEulerian => "meerson-eulerian",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|s| s.name()).collect();
            Error::InvalidParameter(format!("unknown scenario {name:?}; known: {}", known.join(", ")))
        })
    }

    /// Runs the residual study at the given steps. With `perturbation = Some(f)`
    /// the fields are deliberately broken: temperatures are scaled by `f`, or
    /// for the Lagrangian family `mu` is scaled by `f`.
    pub fn run(&self, steps: &[f64], perturbation: Option<f64>) -> Result<ConvergenceStudy> {
        let factor = perturbation.unwrap_or(1.0);
        match self {
            Scenario::Haff => {
                let p = ModelParams::new(1.4, 2.0, 1)?;
                let f = HomogeneousCooling { params: p, haff: HaffParams::new(1.0, 1.0)?, velocity: vec![0.3] };
                let f = ScaledTemperature { inner: f, factor };
                let grid = Grid::line((0.1, 2.0), 5, (-1.0, 1.0), 5)?;
                study(steps, |h| residual_euler(&f, &p, &grid, h))
            }
            Scenario::ExactFamily1d => {
                let p = ModelParams::new(2.0, 1.0, 1)?;
                let f = ScaledTemperature { inner: ExactFamily1d::new(&p, -0.8, 1.0, 1.0)?, factor };
                let grid = Grid::line((0.1, 0.8), 8, (-1.0, 1.0), 9)?;
                study(steps, |h| residual_euler(&f, &p, &grid, h))
            }
            Scenario::Uniform2d => {
                let p = ModelParams::new(5.0 / 3.0, 1.0, 2)?;
                let flow = uniform_2d_flow(&p)?;
                let f = ScaledTemperature { inner: flow, factor };
                let grid = Grid::cube((0.1, 0.5), 5, -1.0, 1.0, 5, 2)?;
                study(steps, |h| residual_euler(&f, &p, &grid, h))
            }
            Scenario::RiemannTwoContact => {
                let d = RiemannData::new(0.0, 1.0, 1.0, 1.0, 2.0, 1.0)?;
                let p = ModelParams::new(2.0, d.lambda, 1)?;
                let f = ScaledTemperature { inner: solve(&d)?, factor };
                let grid = Grid::line((0.5, 3.0), 6, (-3.0, 4.0), 29)?;
                study(steps, |h| residual_chaplygin(&f, &p, &grid, h, |t| d.phi(t)))
            }
            Scenario::Meerson => {
                let base = MeersonParams::from_mu(1.0, 2.0, 1.0)?;
                let mp = base.with_mu_override(base.mu() * factor)?;
                let grid = MassGrid::uniform((-1.0, 1.0), 9, (0.1, 0.8), 5);
                study(steps, |h| lagrangian_residual(&mp, &grid, h))
            }
            Scenario::MeersonEulerian => {
                let mp = MeersonParams::from_mu(1.0, 2.0, 1.0)?;
                let fields = MeersonEulerian::new(mp, 0.6)?;
                let p = fields.model_params()?;
                let f = ScaledTemperature { inner: fields, factor };
                let grid = Grid::line((0.1, 0.5), 3, (-0.4, 0.4), 5)?;
                study(steps, |h| residual_euler(&f, &p, &grid, h))
            }
        }
    }
}

/// Two-dimensional run with rotation, shear, a linear temperature term and an
/// offset velocity, integrated to `t = 0.6`.
pub fn uniform_2d_flow(p: &ModelParams) -> Result<UniformFlow> {
    let s0 = UDState::new(
        0.0,
        DMatrix::from_row_slice(2, 2, &[-0.5, 0.2, -0.1, -0.3]),
        DVector::from_vec(vec![0.1, -0.2]),
        DMatrix::from_row_slice(2, 2, &[0.3, 0.05, 0.05, 0.2]),
        DVector::from_vec(vec![0.1, 0.0]),
        1.0,
        1.0,
    )?;
    let traj = integrate(p, &s0, 0.6, &IntegrateOptions::default())?;
    Ok(UniformFlow::new(*p, traj))
}

/// Field values tabulated on a uniform `(t, x)` lattice with equal spacing in
/// both directions. Sampling is exact lookup, so residual steps must be
/// multiples of the spacing.
#[derive(Debug, Clone)]
pub struct TabulatedFields {
    t0: f64,
    x0: f64,
    spacing: f64,
    nt: usize,
    nx: usize,
    values: Vec<Option<(f64, f64, f64)>>,
}

const LATTICE_TOL: f64 = 1e-6;

impl TabulatedFields {
    /// Builds the lattice from a table with columns `t, x, rho, v, T`.
    pub fn from_table(table: &Table) -> Result<Self> {
        let col = |name: &str| -> Result<Vec<Option<f64>>> {
            table.column(name).ok_or_else(|| Error::InvalidParameter(format!("field table lacks column {name:?}")))
        };
        let (ts, xs, rho, v, temp) = (col("t")?, col("x")?, col("rho")?, col("v")?, col("T")?);
        let distinct = |c: &[Option<f64>]| -> Result<Vec<f64>> {
            let mut u: Vec<f64> = c.iter().map(|v| v.ok_or_else(|| Error::InvalidParameter("empty coordinate cell".into()))).collect::<Result<_>>()?;
            u.sort_by(f64::total_cmp);
            u.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
            Ok(u)
        };
        let (ut, ux) = (distinct(&ts)?, distinct(&xs)?);
        if ut.len() < 3 || ux.len() < 3 {
            return Err(Error::InvalidParameter("field table needs at least 3 times and 3 positions".into()));
        }
        let spacing = ux[1] - ux[0];
        let uniform = |u: &[f64]| u.windows(2).all(|w| ((w[1] - w[0]) / spacing - 1.0).abs() < LATTICE_TOL);
        if !uniform(&ut) || !uniform(&ux) {
            return Err(Error::InvalidParameter("field table must be a uniform lattice with equal t and x spacing".into()));
        }
        let mut f = Self { t0: ut[0], x0: ux[0], spacing, nt: ut.len(), nx: ux.len(), values: vec![None; ut.len() * ux.len()] };
        for i in 0..ts.len() {
            let (it, ix) = (f.index(ts[i].unwrap(), f.t0, f.nt)?, f.index(xs[i].unwrap(), f.x0, f.nx)?);
            if let (Some(r), Some(u), Some(th)) = (rho[i], v[i], temp[i]) {
                f.values[it * f.nx + ix] = Some((r, u, th));
            }
        }
        Ok(f)
    }

    fn index(&self, c: f64, origin: f64, n: usize) -> Result<usize> {
        let k = (c - origin) / self.spacing;
        let r = k.round();
        if (k - r).abs() > LATTICE_TOL || r < 0.0 || r >= n as f64 {
            return Err(Error::Domain(format!("coordinate {c} is not a lattice node")));
        }
        Ok(r as usize)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Interior lattice nodes at least `margin` away from the table edges.
    pub fn interior_grid(&self, margin: f64) -> Result<Grid> {
        let k = (margin / self.spacing).round() as usize;
        if 2 * k >= self.nt || 2 * k >= self.nx {
            return Err(Error::InvalidParameter("field table too small for the requested steps".into()));
        }
        let times = (k..self.nt - k).map(|i| self.t0 + i as f64 * self.spacing).collect();
        let points = (k..self.nx - k).map(|i| vec![self.x0 + i as f64 * self.spacing]).collect();
        Grid::new(times, points)
    }
}

impl FieldSet for TabulatedFields {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, t: f64, x: &[f64]) -> bool {
        match (self.index(t, self.t0, self.nt), self.index(x[0], self.x0, self.nx)) {
            (Ok(i), Ok(j)) => self.values[i * self.nx + j].is_some(),
            _ => false,
        }
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample> {
        let (i, j) = (self.index(t, self.t0, self.nt)?, self.index(x[0], self.x0, self.nx)?);
        let (rho, v, temp) = self.values[i * self.nx + j].ok_or_else(|| Error::Domain(format!("no field value at t = {t}, x = {}", x[0])))?;
        GasSample::new(rho, vec![v], temp)
    }
}
