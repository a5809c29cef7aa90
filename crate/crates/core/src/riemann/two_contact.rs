use serde::Serialize;

use super::RiemannData;
use crate::error::{Error, Result};
use crate::model::GasSample;
use crate::residual::FieldSet;

/// Two contact discontinuities `x_-(t) < x_+(t)` separating the cooled side
/// states from a spatially uniform middle state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoContactSolution {
    pub data: RiemannData,
}

pub fn two_contact_solution(d: &RiemannData) -> TwoContactSolution {
    TwoContactSolution { data: *d }
}

/// `x_+(t) - x_-(t)`.
pub(super) fn gap(d: &RiemannData, t: f64) -> f64 {
    let log = (0.5 * d.lambda * t / d.c + 1.0).ln();
    (d.v_right - d.v_left) * t + 2.0 * d.c * (d.temp_left.sqrt() + d.temp_right.sqrt()) / d.lambda * log
}

impl TwoContactSolution {
    pub fn temp_left(&self, t: f64) -> f64 {
        let k = self.data.cooling(t);
        k * k * self.data.temp_left
    }

    pub fn temp_right(&self, t: f64) -> f64 {
        let k = self.data.cooling(t);
        k * k * self.data.temp_right
    }

    pub fn x_minus(&self, t: f64) -> f64 {
        let d = &self.data;
        d.v_left * t - 2.0 * d.c * d.temp_left.sqrt() / d.lambda * (0.5 * d.lambda * t / d.c + 1.0).ln()
    }

    pub fn x_plus(&self, t: f64) -> f64 {
        let d = &self.data;
        d.v_right * t + 2.0 * d.c * d.temp_right.sqrt() / d.lambda * (0.5 * d.lambda * t / d.c + 1.0).ln()
    }

    pub fn v_middle(&self, t: f64) -> f64 {
        let d = &self.data;
        0.5 * (d.v_left + d.v_right + (d.temp_right.sqrt() - d.temp_left.sqrt()) * d.cooling(t))
    }

    /// `sqrt(T_M)`; negative after the middle temperature has vanished.
    pub fn sqrt_temp_middle(&self, t: f64) -> f64 {
        let d = &self.data;
        0.5 * (d.v_right - d.v_left + (d.temp_right.sqrt() + d.temp_left.sqrt()) * d.cooling(t))
    }

    pub fn temp_middle(&self, t: f64) -> f64 {
        self.sqrt_temp_middle(t).powi(2)
    }

    /// Region containing `x` at time `t` (boundaries belong to the middle).
    pub fn region(&self, t: f64, x: f64) -> Region {
        if x < self.x_minus(t) {
            Region::Left
        } else if x > self.x_plus(t) {
            Region::Right
        } else {
            Region::Middle
        }
    }

    /// `(v, T)` in a region.
    pub fn state(&self, t: f64, region: Region) -> (f64, f64) {
        match region {
            Region::Left => (self.data.v_left, self.temp_left(t)),
            Region::Middle => (self.v_middle(t), self.temp_middle(t)),
            Region::Right => (self.data.v_right, self.temp_right(t)),
        }
    }

    /// Constrained density `phi / sqrt(T)` of a region.
    pub fn density(&self, t: f64, region: Region) -> Result<f64> {
        let w = match region {
            Region::Middle => self.sqrt_temp_middle(t),
            _ => self.state(t, region).1.sqrt(),
        };
        if !(w > 0.0) {
            return Err(Error::InfiniteSideDensity { t });
        }
        Ok(self.data.phi(t) / w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Left,
    Middle,
    Right,
}

/// The formula of one region extended to the whole line, for residual
/// checks of that region in isolation.
#[derive(Debug, Clone, Copy)]
pub struct RegionFields {
    pub solution: TwoContactSolution,
    pub region: Region,
    pub t_max: f64,
}

impl FieldSet for RegionFields {
    fn dim(&self) -> usize {
        1
    }

    fn contains(&self, t: f64, _x: &[f64]) -> bool {
        t >= 0.0 && t <= self.t_max
    }

    fn sample(&self, t: f64, _x: &[f64]) -> Result<GasSample> {
        let (v, temperature) = self.solution.state(t, self.region);
        GasSample::new(self.solution.density(t, self.region)?, vec![v], temperature)
    }
}
