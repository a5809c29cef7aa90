//! Adaptive Dormand-Prince 4(5) integration with cubic Hermite dense output
//! and finite-time blow-up detection.
//!
//! Blow-up is declared only when two things happen together: the state
//! max-norm exceeds [`IntegrateOptions::blowup_threshold`] and the accepted
//! step has collapsed below ten times the step floor. A collapsing step with
//! a bounded state is reported as [`Termination::StepUnderflow`] instead.

use serde::Serialize;

use crate::error::{Error, Result};

/// Autonomous or non-autonomous first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Projection applied to every accepted state (e.g. re-symmetrization).
    fn project(&self, _y: &mut [f64]) {}

    /// Whether an accepted state lies on the physical branch. An inadmissible
    /// state ends the run with [`Termination::PhiNonPositive`].
    fn admissible(&self, _y: &[f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    /// Absolute step floor. The effective floor also never drops below
    /// 16 ulp of the current time.
    pub min_step: f64,
    pub blowup_threshold: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            blowup_threshold: 1e12,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedFinalTime,
    /// `t_estimate` is the refined singularity time; `t_last` the last
    /// accepted time.
    BlowUpDetected { t_estimate: f64, t_last: f64 },
    PhiNonPositive { t: f64 },
    StepUnderflow { t: f64 },
}

impl Termination {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Termination::BlowUpDetected { .. })
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match *self {
            Termination::BlowUpDetected { t_estimate, .. } => Some(t_estimate),
            _ => None,
        }
    }
}

/// Accepted steps of an integration, with the vector field stored at each
/// sample for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct FlatTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl FlatTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Cubic Hermite interpolation between the bracketing accepted steps.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let first = *self.times.first()?;
        let last = *self.times.last()?;
        if t < first || t > last {
            return None;
        }
        let i = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => return Some(self.states[i].clone()),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (y0, y1) = (&self.states[i], &self.states[i + 1]);
        let (f0, f1) = (&self.derivatives[i], &self.derivatives[i + 1]);
        Some(
            (0..y0.len())
                .map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k])
                .collect(),
        )
    }

    /// Index of the last sample with time `<= t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    fn new(sys: &'a S) -> Self {
        let n = sys.dim();
        Self {
            sys,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }

    /// One trial step from `(t, y)` with `k[0] = f(t, y)` already filled.
    /// Leaves the fifth-order solution in `y_new`, the field there in `k[6]`,
    /// and returns the scaled RMS error norm.
    fn trial(&mut self, t: f64, y: &[f64], h: f64, opts: &IntegrateOptions) -> f64 {
        let n = y.len();
        let stage = |tmp: &mut Vec<f64>, k: &[Vec<f64>; 7], coeffs: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = 0.0;
                for &(j, a) in coeffs {
                    acc += a * k[j][i];
                }
                tmp[i] = y[i] + h * acc;
            }
        };
        stage(&mut self.tmp, &self.k, &[(0, A21)]);
        self.sys.rhs(t + C2 * h, &self.tmp, &mut self.k[1]);
        stage(&mut self.tmp, &self.k, &[(0, A31), (1, A32)]);
        self.sys.rhs(t + C3 * h, &self.tmp, &mut self.k[2]);
        stage(&mut self.tmp, &self.k, &[(0, A41), (1, A42), (2, A43)]);
        self.sys.rhs(t + C4 * h, &self.tmp, &mut self.k[3]);
        stage(&mut self.tmp, &self.k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.sys.rhs(t + C5 * h, &self.tmp, &mut self.k[4]);
        stage(&mut self.tmp, &self.k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.sys.rhs(t + h, &self.tmp, &mut self.k[5]);
        stage(&mut self.y_new, &self.k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        self.sys.rhs(t + h, &self.y_new, &mut self.k[6]);

        let mut sum = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(self.y_new[i].abs());
            let r = e / scale;
            sum += r * r;
        }
        let norm = (sum / n as f64).sqrt();
        if norm.is_finite() && self.y_new.iter().all(|v| v.is_finite()) {
            norm
        } else {
            f64::INFINITY
        }
    }
}

fn max_norm(y: &[f64]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn step_floor(t: f64, opts: &IntegrateOptions) -> f64 {
    opts.min_step.max(16.0 * f64::EPSILON * t.abs())
}

fn initial_step<S: OdeSystem + ?Sized>(sys: &S, t0: f64, y0: &[f64], f0: &[f64], opts: &IntegrateOptions) -> f64 {
    let n = y0.len() as f64;
    let scale = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let d0 = (y0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / scale(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    let h = (100.0 * h0).min(h1);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1e-6
    }
}

/// Refined singularity time from the last accepted samples.
///
/// For a power law `N ~ K (t* - t)^{-p}` the ratio `N / N'` equals
/// `(t* - t) / p`, which is linear in `t` for any exponent; a least-squares
/// line through the last samples is extrapolated to its root. For `p = 1`
/// this is the same as a linear fit of `1 / N`.
fn refine_blowup_time(times: &[f64], states: &[Vec<f64>], derivs: &[Vec<f64>]) -> f64 {
    let m = times.len().min(10);
    let t_last = *times.last().unwrap();
    if m < 3 {
        return t_last;
    }
    let lo = times.len() - m;
    let mut xs = Vec::with_capacity(m);
    let mut us = Vec::with_capacity(m);
    for i in lo..times.len() {
        let (j, n) = states[i]
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |(bj, bn), (j, v)| if v.abs() > bn { (j, v.abs()) } else { (bj, bn) });
        let dn = states[i][j].signum() * derivs[i][j];
        if dn <= 0.0 || !dn.is_finite() {
            return t_last;
        }
        xs.push(times[i] - t_last);
        us.push(n / dn);
    }
    let (mx, mu) = (xs.iter().sum::<f64>() / m as f64, us.iter().sum::<f64>() / m as f64);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxu: f64 = xs.iter().zip(&us).map(|(x, u)| (x - mx) * (u - mu)).sum();
    if sxx <= 0.0 {
        return t_last;
    }
    let slope = sxu / sxx;
    let intercept = mu - slope * mx;
    if slope >= 0.0 {
        return t_last;
    }
    let root = -intercept / slope;
    if root.is_finite() && root >= 0.0 {
        t_last + root
    } else {
        t_last
    }
}

/// Integrates from `(t0, y0)` towards `t_final`, recording every accepted step.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<FlatTrajectory> {
    run(sys, t0, y0, t_final, &[], opts, true)
}

/// Integrates and returns the state at each requested time, landing on the
/// requested times exactly instead of interpolating. `times` must be sorted
/// and `>= t0`.
pub fn integrate_at<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    opts: &IntegrateOptions,
) -> Result<Vec<Vec<f64>>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter("output times must be sorted and >= t0".into()));
    }
    let t_final = times.last().copied().unwrap_or(t0);
    let traj = run(sys, t0, y0, t_final, times, opts, false)?;
    if traj.termination != Termination::ReachedFinalTime {
        return Err(Error::Integration(format!("stopped early: {:?}", traj.termination)));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut j = 0;
    for &t in times {
        while traj.times[j] < t {
            j += 1;
        }
        out.push(traj.states[j].clone());
    }
    Ok(out)
}

fn run<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_final: f64,
    stops: &[f64],
    opts: &IntegrateOptions,
    keep_all: bool,
) -> Result<FlatTrajectory> {
    if y0.len() != sys.dim() {
        return Err(Error::InvalidParameter(format!(
            "state length {} does not match system dimension {}",
            y0.len(),
            sys.dim()
        )));
    }
    if !(t_final >= t0) {
        return Err(Error::InvalidParameter(format!("t_final {t_final} precedes t0 {t0}")));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let mut y = y0.to_vec();
    sys.project(&mut y);
    let mut f = vec![0.0; y.len()];
    sys.rhs(t0, &y, &mut f);

    let mut traj = FlatTrajectory {
        times: vec![t0],
        states: vec![y.clone()],
        derivatives: vec![f.clone()],
        termination: Termination::ReachedFinalTime,
    };
    if !sys.admissible(&y) {
        traj.termination = Termination::PhiNonPositive { t: t0 };
        return Ok(traj);
    }
    if t_final == t0 {
        return Ok(traj);
    }

    let mut stepper = Stepper::new(sys);
    let mut t = t0;
    let mut h = opts.initial_step.unwrap_or_else(|| initial_step(sys, t0, &y, &f, opts));
    let mut next_stop = stops.iter().position(|&s| s > t0);
    let mut rejected_last = false;
    let mut norm_history: Vec<f64> = vec![max_norm(&y)];

    for _ in 0..opts.max_steps {
        let target = match next_stop {
            Some(i) => stops[i].min(t_final),
            None => t_final,
        };
        h = h.min(opts.max_step);
        let mut t_new = t + h;
        if t_new >= target || target - t_new < 1e-3 * h {
            t_new = target;
        }
        let h_eff = t_new - t;

        stepper.k[0].copy_from_slice(&f);
        let err = stepper.trial(t, &y, h_eff, opts);
        let floor = step_floor(t, opts);

        if err <= 1.0 {
            let mut y_acc = stepper.y_new.clone();
            sys.project(&mut y_acc);
            if !sys.admissible(&y_acc) {
                traj.termination = Termination::PhiNonPositive { t };
                return Ok(traj);
            }
            t = t_new;
            y = y_acc;
            f.copy_from_slice(&stepper.k[6]);
            let keep = keep_all || next_stop.is_some_and(|i| stops[i] == t) || t == t_final;
            if keep {
                traj.times.push(t);
                traj.states.push(y.clone());
                traj.derivatives.push(f.clone());
            }
            if let Some(i) = next_stop {
                if stops[i] <= t {
                    next_stop = (i..stops.len()).find(|&k| stops[k] > t);
                }
            }
            if t >= t_final {
                return Ok(traj);
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let factor = if rejected_last { factor.min(1.0) } else { factor };
            rejected_last = false;
            let h_next = h_eff * factor;
            let norm = max_norm(&y);
            norm_history.push(norm);

            if norm > opts.blowup_threshold && h_next < 10.0 * step_floor(t, opts) {
                traj.termination = blowup(&traj, t);
                return Ok(traj);
            }
            // a step clipped to an output time says nothing about the attainable size
            h = if h_eff < h { h.max(h_next) } else { h_next };
        } else {
            rejected_last = true;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = h_eff * factor;
        }

        if h < floor {
            let norm = max_norm(&y);
            let growing = norm_history.len() >= 10 && {
                let tail = &norm_history[norm_history.len() - 10..];
                tail.windows(2).all(|w| w[1] > w[0]) && norm > opts.blowup_threshold.sqrt()
            };
            traj.termination = if norm > opts.blowup_threshold || growing {
                blowup(&traj, t)
            } else {
                Termination::StepUnderflow { t }
            };
            return Ok(traj);
        }
    }
    Err(Error::Integration(format!("exceeded {} steps at t = {t}", opts.max_steps)))
}

fn blowup(traj: &FlatTrajectory, t_last: f64) -> Termination {
    let t_estimate = refine_blowup_time(&traj.times, &traj.states, &traj.derivatives);
    Termination::BlowUpDetected { t_estimate, t_last }
}
