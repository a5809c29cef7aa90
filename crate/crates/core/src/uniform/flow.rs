use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use super::state::{reconstruct_fields, DeformationState, IsotropicState, UDState};
use crate::error::{Error, Result};
use crate::model::{GasSample, ModelParams};
use crate::ode::{self, FlatTrajectory, IntegrateOptions, OdeSystem, Termination};
use crate::residual::FieldSet;

struct DeformationOde<'a, S> {
    params: &'a ModelParams,
    template: &'a S,
    len: usize,
}

impl<S: DeformationState> OdeSystem for DeformationOde<'_, S> {
    fn dim(&self) -> usize {
        self.len
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        self.template.flat_rhs(self.params, y, dy)
    }

    fn project(&self, y: &mut [f64]) {
        self.template.project_flat(y)
    }

    fn admissible(&self, y: &[f64]) -> bool {
        y[self.template.phi_index()] > 0.0
    }
}

/// Accepted integration steps of a uniform-deformation run.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub samples: Vec<S>,
    pub termination: Termination,
    flat: FlatTrajectory,
}

impl<S: DeformationState> Trajectory<S> {
    pub fn times(&self) -> &[f64] {
        &self.flat.times
    }

    pub fn last(&self) -> &S {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    /// Dense output by cubic Hermite interpolation.
    pub fn state_at(&self, t: f64) -> Option<S> {
        let y = self.flat.interpolate(t)?;
        Some(self.samples[0].with_flat(t, &y))
    }

    /// Re-integrates from the closest earlier accepted step to land exactly on `t`.
    pub fn refined_state_at(&self, p: &ModelParams, t: f64, opts: &IntegrateOptions) -> Result<S> {
        let i = self
            .flat
            .index_at_or_before(t)
            .filter(|_| t <= *self.flat.times.last().unwrap())
            .ok_or_else(|| Error::Domain(format!("t = {t} outside the integrated interval")))?;
        let start = &self.samples[i];
        if start.time() == t {
            return Ok(start.clone());
        }
        let sys = DeformationOde { params: p, template: start, len: self.flat.states[i].len() };
        let y = ode::integrate_at(&sys, start.time(), &self.flat.states[i], &[t], opts)?;
        Ok(start.with_flat(t, &y[0]))
    }

    pub fn flat(&self) -> &FlatTrajectory {
        &self.flat
    }
}

/// Adaptive integration of a full or isotropic state to `t_final`.
pub fn integrate<S: DeformationState>(
    p: &ModelParams,
    s0: &S,
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory<S>> {
    if !(s0.phi() > 0.0) {
        return Err(Error::Domain(format!("initial phi must be > 0, got {}", s0.phi())));
    }
    if !(t_final > s0.time()) {
        return Err(Error::InvalidParameter(format!("t_final {t_final} must exceed the initial time {}", s0.time())));
    }
    let y0 = s0.to_flat();
    let sys = DeformationOde { params: p, template: s0, len: y0.len() };
    let flat = ode::integrate(&sys, s0.time(), &y0, t_final, opts)?;
    let samples = flat.times.iter().zip(&flat.states).map(|(&t, y)| s0.with_flat(t, y)).collect();
    Ok(Trajectory { samples, termination: flat.termination, flat })
}

/// Integrates every initial state independently (in parallel on the current
/// rayon pool) and returns the terminations in input order.
pub fn scan_blowup<S: DeformationState>(
    p: &ModelParams,
    initial: &[S],
    t_final: f64,
    opts: &IntegrateOptions,
) -> Vec<Result<Termination>> {
    initial
        .par_iter()
        .map(|s| integrate(p, s, t_final, opts).map(|tr| tr.termination))
        .collect()
}

/// Options used to re-integrate a stored trajectory onto arbitrary times.
pub fn certification_options() -> IntegrateOptions {
    IntegrateOptions { rtol: 1e-13, atol: 1e-15, ..Default::default() }
}

/// Hydrodynamic fields of an integrated uniform-deformation run, evaluated
/// at arbitrary times by re-integration from the nearest stored step.
pub struct UniformFlow {
    params: ModelParams,
    trajectory: Trajectory<UDState>,
    opts: IntegrateOptions,
    cache: Mutex<HashMap<u64, UDState>>,
}

impl UniformFlow {
    pub fn new(params: ModelParams, trajectory: Trajectory<UDState>) -> Self {
        Self { params, trajectory, opts: certification_options(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_isotropic(params: ModelParams, trajectory: &Trajectory<IsotropicState>) -> Self {
        let n = params.dim();
        let template = UDState::from_isotropic(n, &trajectory.samples[0]);
        let samples: Vec<UDState> = trajectory.samples.iter().map(|s| UDState::from_isotropic(n, s)).collect();
        let flat = FlatTrajectory {
            times: trajectory.flat.times.clone(),
            states: samples.iter().map(|s| s.to_flat()).collect(),
            derivatives: samples
                .iter()
                .map(|s| {
                    let y = s.to_flat();
                    let mut dy = vec![0.0; y.len()];
                    template.flat_rhs(&params, &y, &mut dy);
                    dy
                })
                .collect(),
            termination: trajectory.termination,
        };
        Self::new(params, Trajectory { samples, termination: trajectory.termination, flat })
    }

    pub fn trajectory(&self) -> &Trajectory<UDState> {
        &self.trajectory
    }

    pub fn time_range(&self) -> (f64, f64) {
        let times = self.trajectory.times();
        (times[0], *times.last().unwrap())
    }

    pub fn state_at(&self, t: f64) -> Result<UDState> {
        let key = t.to_bits();
        if let Some(s) = self.cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let s = self.trajectory.refined_state_at(&self.params, t, &self.opts)?;
        self.cache.lock().unwrap().insert(key, s.clone());
        Ok(s)
    }
}

impl FieldSet for UniformFlow {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn contains(&self, t: f64, _x: &[f64]) -> bool {
        let (a, b) = self.time_range();
        t >= a && t <= b
    }

    fn sample(&self, t: f64, x: &[f64]) -> Result<GasSample> {
        reconstruct_fields(&self.state_at(t)?, x)
    }
}
