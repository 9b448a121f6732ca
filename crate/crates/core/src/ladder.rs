//! Geometric radius ladder discretizing the infimum over continuum scales.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use serde::{Deserialize, Serialize};

/// Geometric ladder of radii with ratio `2^(1/per_octave)`, refined by
/// `bisections` geometric bisections once a threshold crossing is bracketed.
/// The reported scale is the midpoint of the final bracket; the bracket
/// width enters every tolerance budget built on top of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub rho_min: f64,
    pub rho_max: f64,
    pub per_octave: u32,
    pub bisections: u32,
}

impl ScaleLadder {
    pub fn new(rho_min: f64, rho_max: f64, per_octave: u32, bisections: u32) -> Result<Self> {
        if !(rho_min > 0.0) || !(rho_max > rho_min) {
            return Err(Error::Parameter(format!(
                "ladder needs 0 < rho_min < rho_max, got [{rho_min}, {rho_max}]"
            )));
        }
        if per_octave == 0 {
            return Err(Error::Parameter("ladder needs at least 1 rung per octave".into()));
        }
        Ok(ScaleLadder {
            rho_min,
            rho_max,
            per_octave,
            bisections,
        })
    }

    /// Default for a grid: from one cell spacing up to half the extent,
    /// 8 rungs per octave, 6 bisections.
    pub fn default_for(grid: &GridSpec) -> Self {
        ScaleLadder {
            rho_min: grid.max_h(),
            rho_max: 0.5 * grid.min_extent(),
            per_octave: 8,
            bisections: 6,
        }
    }

    pub fn with_bisections(mut self, m: u32) -> Self {
        self.bisections = m;
        self
    }

    /// Ascending rungs `rho_min * 2^(i / per_octave)`; the last rung is the
    /// first one at or above `rho_max`.
    pub fn rungs(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let rho = self.rho_min * (i as f64 / self.per_octave as f64).exp2();
            out.push(rho);
            if rho >= self.rho_max {
                break;
            }
            i += 1;
            if i > 4000 {
                break;
            }
        }
        out
    }

    /// Ratio between consecutive rungs.
    pub fn step_ratio(&self) -> f64 {
        (1.0 / self.per_octave as f64).exp2()
    }

    /// Relative width of one ladder step (the discretization tolerance).
    pub fn rel_width(&self) -> f64 {
        self.step_ratio() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rungs_are_geometric_and_cover() {
        let l = ScaleLadder::new(0.01, 1.0, 8, 6).unwrap();
        let r = l.rungs();
        assert!(r[0] == 0.01);
        assert!(*r.last().unwrap() >= 1.0);
        for w in r.windows(2) {
            assert!((w[1] / w[0] - l.step_ratio()).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_ladder_hits_powers_of_two_exactly() {
        let l = ScaleLadder::new(2.0f64.powi(-15), 0.5, 1, 0).unwrap();
        let r = l.rungs();
        for (i, rho) in r.iter().enumerate() {
            assert_eq!(*rho, 2.0f64.powi(i as i32 - 15));
        }
    }
}
