use serde::Serialize;

use super::flow::Trajectory;
use super::state::{DeformationState, UDState};
use crate::error::{Error, Result};

/// Least-squares fit of `log rho_peak` against `log(t_est - t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub points: usize,
    pub t_estimate: f64,
}

/// Samples this close to the estimated blow-up time (relative to the gap left
/// by the last accepted step) are dominated by the error in `t_estimate`.
const GAP_FACTOR: f64 = 1e3;

/// Fits the growth exponent of the peak density over the trailing `window`
/// fraction of the samples of a trajectory that ended in blow-up.
pub fn density_exponent_fit<S: DeformationState>(traj: &Trajectory<S>, window: f64) -> Result<ExponentFit> {
    let t_est = traj.termination.blowup_time().ok_or(Error::NoBlowUp)?;
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParameter(format!("window fraction must lie in (0, 1], got {window}")));
    }
    let n = traj.samples.len();
    let start = n - ((window * n as f64).ceil() as usize).min(n);
    let gap = (t_est - traj.last().time()).abs();
    let floor = GAP_FACTOR * gap.max(f64::EPSILON * t_est.abs());
    let (xs, ys): (Vec<f64>, Vec<f64>) = traj.samples[start..]
        .iter()
        .filter_map(|s| {
            let tau = t_est - s.time();
            let rho = s.peak_density()?;
            (tau > floor && rho > 0.0).then(|| (tau.ln(), rho.ln()))
        })
        .unzip();
    if xs.len() < 10 {
        return Err(Error::InsufficientSamples { needed: 10, got: xs.len() });
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(ExponentFit { exponent: slope, intercept, points: xs.len(), t_estimate: t_est })
}

pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnisotropyPoint {
    pub t: f64,
    pub eig_min: f64,
    pub eig_max: f64,
    pub ratio: f64,
}

/// Ratio of the extreme eigenvalues of the temperature matrix `A` along a
/// full-matrix trajectory. A ratio near 1 means point-like concentration,
/// a growing ratio means concentration along a line.
pub fn anisotropy_diagnostic(traj: &Trajectory<UDState>) -> Result<Vec<AnisotropyPoint>> {
    if traj.last().dim() < 2 {
        return Err(Error::InvalidParameter("anisotropy needs dimension >= 2".into()));
    }
    traj.samples
        .iter()
        .map(|s| {
            let eig = s.quad.clone().symmetric_eigen().eigenvalues;
            let (eig_min, eig_max) = (eig.min(), eig.max());
            if !(eig_min > 0.0) {
                return Err(Error::Domain(format!("temperature matrix lost definiteness at t = {} (eigenvalue {eig_min:e})", s.t)));
            }
            Ok(AnisotropyPoint { t: s.t, eig_min, eig_max, ratio: eig_max / eig_min })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::ode::IntegrateOptions;
    use crate::uniform::flow::integrate;
    use crate::uniform::state::IsotropicState;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn fit_recovers_a_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -1.7 * x + 0.4).collect();
        let (a, b) = linear_fit(&xs, &ys);
        assert!((a + 1.7).abs() < 1e-13 && (b - 0.4).abs() < 1e-13);
    }

    #[test]
    fn haff_run_has_no_exponent() {
        let p = ModelParams::new(1.4, 1.0, 1).unwrap();
        let s0 = IsotropicState::new(0.0, 1.0, 0.0, 0.0, 1.0);
        let traj = integrate(&p, &s0, 5.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(density_exponent_fit(&traj, 0.5), Err(Error::NoBlowUp));
    }

    #[test]
    fn at_rest_keeps_unit_ratio() {
        let p = ModelParams::new(1.4, 1.0, 2).unwrap();
        let s0 = UDState::new(
            0.0,
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            1.0,
            1.0,
        )
        .unwrap();
        let traj = integrate(&p, &s0, 2.0, &IntegrateOptions::default()).unwrap();
        for pt in anisotropy_diagnostic(&traj).unwrap() {
            assert!((pt.ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_a_domain_error() {
        let p = ModelParams::new(1.4, 1.0, 2).unwrap();
        let s0 = UDState::new(
            0.0,
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DVector::zeros(2),
            1.0,
            1.0,
        )
        .unwrap();
        let traj = integrate(&p, &s0, 0.1, &IntegrateOptions::default()).unwrap();
        assert!(matches!(anisotropy_diagnostic(&traj), Err(Error::Domain(_))));
    }
}
