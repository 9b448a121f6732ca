//! Cantor-style construction showing the averaging operator is unbounded
//! in L^1: a sequence of uniformly-L^1 indicator stacks whose averages at
//! exponent 1/2 develop unbounded Lorentz norms.
//!
//! The grid resolution is tied to 4^-depth, so every set in the
//! construction is a union of whole cells and all measures are exact
//! integer counts times 4^-depth. The superlevel bounds are verified in
//! integer arithmetic; floating point enters only in reported norms.

use crate::error::{Error, Result};
use crate::field::{Extension, ScalarField};
use crate::grid::GridSpec;
use crate::ladder::ScaleLadder;
use crate::multiscale::{self, AvgMode};
use crate::norms::{lorentz_norm, weak_norm, LorentzParams, MeasuredSample};
use serde::Serialize;

pub const MAX_DEPTH: u32 = 12;

/// One level of the construction: left endpoints of the 4^-k blocks, in
/// units of 4^-k (i.e. integers whose base-4 digits are 0 or 2).
#[derive(Debug, Clone, Serialize)]
pub struct CantorLevel {
    pub k: u32,
    pub endpoints: Vec<u64>,
    /// Amplitude of the indicator stack at this level: `2^(3/2) * 2^k`.
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct CantorConstruction {
    pub depth: u32,
    pub levels: Vec<CantorLevel>,
    /// Indicator mask of the deepest level on the 4^-depth grid.
    pub mask: Vec<bool>,
    /// The sampled stack `f_depth` with amplitude `2^(3/2) * 2^depth`.
    pub field: ScalarField,
}

fn amp(k: u32) -> f64 {
    // 2^(3/2) = sqrt(8); sqrt is correctly rounded, and the power-of-two
    // scaling below is exact.
    8.0f64.sqrt() * (k as f64).exp2()
}

/// Build levels 1..=depth and the deepest indicator field on the aligned
/// grid of 4^depth cells over [0, 1).
pub fn build_cantor(depth: u32) -> Result<CantorConstruction> {
    if depth < 1 || depth > MAX_DEPTH {
        return Err(Error::Resource(format!(
            "depth {depth} outside 1..={MAX_DEPTH}"
        )));
    }
    let mut levels: Vec<CantorLevel> = Vec::with_capacity(depth as usize);
    let mut prev: Vec<u64> = vec![0];
    for k in 1..=depth {
        let mut endpoints = Vec::with_capacity(1 << k);
        for &s in &prev {
            endpoints.push(4 * s);
            endpoints.push(4 * s + 2);
        }
        endpoints.sort_unstable();
        prev = endpoints.clone();
        levels.push(CantorLevel {
            k,
            endpoints,
            amplitude: amp(k),
        });
    }
    let ncell = 1usize << (2 * depth); // 4^depth
    let mut mask = vec![false; ncell];
    for &e in &levels[depth as usize - 1].endpoints {
        mask[e as usize] = true;
    }
    let h = (-(2.0 * depth as f64)).exp2(); // 4^-depth, exact
    let grid = GridSpec::new(&[ncell], &[h], &[false], &[0.0])?;
    let a = amp(depth);
    let data: Vec<f64> = mask.iter().map(|&m| if m { a } else { 0.0 }).collect();
    let field = ScalarField::new(grid, None, Extension::ZeroOutside, data)?;
    Ok(CantorConstruction {
        depth,
        levels,
        mask,
        field,
    })
}

impl CantorConstruction {
    /// `|A_k| = 2^-k`, exactly (endpoint count times cell size).
    pub fn level_measure(&self, k: u32) -> f64 {
        let lvl = &self.levels[k as usize - 1];
        lvl.endpoints.len() as f64 * (-(2.0 * k as f64)).exp2()
    }

    /// `||f_depth||_1 = 2^(3/2)`, exactly: amplitude times measure
    /// (cell count times cell size), both powers of two away from sqrt(8).
    /// Summing the grid values instead accumulates benign rounding.
    pub fn l1_norm(&self) -> f64 {
        amp(self.depth) * (-(self.depth as f64)).exp2()
    }

    /// Nesting `A_(k+1) subset A_k` in integer arithmetic.
    pub fn nesting_holds(&self) -> bool {
        for w in self.levels.windows(2) {
            let coarse: std::collections::BTreeSet<u64> =
                w[0].endpoints.iter().copied().collect();
            for &e in &w[1].endpoints {
                if !coarse.contains(&(e / 4)) {
                    return false;
                }
            }
        }
        true
    }
}

/// One row of the superlevel verification at level k.
#[derive(Debug, Clone, Serialize)]
pub struct CantorBoundRow {
    pub k: u32,
    /// Ball radius `2 * 4^-k`.
    pub rho: f64,
    /// Superlevel threshold `2^(-1/2) * 2^k` on the averaging operator.
    pub threshold: f64,
    /// Exact cell count of `{A_(1/2) f >= threshold}` from the dyadic scan.
    pub superlevel_cells: u64,
    /// Required count `4^depth * 2^-k`.
    pub required_cells: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CantorReport {
    pub depth: u32,
    pub l1_norm: f64,
    pub l1_exact: bool,
    pub nesting_ok: bool,
    pub rows: Vec<CantorBoundRow>,
    /// Weak-L1 norm of the averaging operator at exponent 1/2 (bounded
    /// uniformly in depth).
    pub weak_l1_of_avg: f64,
    /// Lorentz L^(1,q) norms of the averaging operator for q in {1, 2, 4}
    /// (these grow with depth: the unboundedness signature).
    pub lorentz_norms: Vec<(f64, f64)>,
}

/// Exact integer trigger test: does the ball of radius `2 * 4^-m` around
/// cell `i` carry average at least `(2 * 4^-m)^(-1/2)`?
///
/// With amplitude `2^(3/2) 2^depth` and continuum normalization `2 rho`,
/// the condition reduces to: at least `2^(depth - m)` mask cells within
/// integer offset `2 * 4^(depth - m)` of `i`.
fn trigger_counts(mask: &[bool], depth: u32) -> Vec<Vec<bool>> {
    let ncell = mask.len();
    // Integer prefix sums of the mask.
    let mut prefix = vec![0u64; ncell + 1];
    for (i, &m) in mask.iter().enumerate() {
        prefix[i + 1] = prefix[i] + m as u64;
    }
    let window_count = |i: usize, radius: usize| -> u64 {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(ncell - 1);
        prefix[hi + 1] - prefix[lo]
    };
    (1..=depth)
        .map(|m| {
            let radius = 2usize << (2 * (depth - m)); // 2 * 4^(depth-m)
            let need = 1u64 << (depth - m); // 2^(depth-m)
            (0..ncell).map(|i| window_count(i, radius) >= need).collect()
        })
        .collect()
}

/// Verify the superlevel bounds for every k <= depth in exact dyadic
/// arithmetic and estimate the Lorentz norms of the averaging operator.
pub fn cantor_lower_bound(depth: u32) -> Result<CantorReport> {
    let c = build_cantor(depth)?;
    let rows = superlevel_rows(&c);

    // Floating-point averaging operator for the norm estimates, on a
    // ladder whose rungs include every dyadic radius 2 * 4^-k.
    let h = (-(2.0 * depth as f64)).exp2();
    let ladder = ScaleLadder::new(h, 0.6, 2, 6)?;
    let sf = multiscale::scale_op(&c.field, 0.5, &ladder, AvgMode::Space)?;
    let sample = MeasuredSample::new(
        sf.a
            .iter()
            .filter(|a| **a > 0.0)
            .map(|&a| (a, h))
            .collect(),
    )?;
    let weak_l1_of_avg = weak_norm(&sample, 1.0);
    let lorentz_norms = [1.0, 2.0, 4.0]
        .iter()
        .map(|&q| {
            (
                q,
                lorentz_norm(&sample, LorentzParams::new(1.0, q).unwrap()),
            )
        })
        .collect();

    Ok(CantorReport {
        depth,
        l1_norm: c.l1_norm(),
        l1_exact: c.l1_norm() == 8.0f64.sqrt(),
        nesting_ok: c.nesting_holds(),
        rows,
        weak_l1_of_avg,
        lorentz_norms,
    })
}

/// The exact superlevel rows alone (no floating-point norms).
pub fn superlevel_rows(c: &CantorConstruction) -> Vec<CantorBoundRow> {
    let depth = c.depth;
    let triggers = trigger_counts(&c.mask, depth);
    let ncell = c.mask.len();
    // triggered_at_or_finer[i]: any rung 2*4^-m with m >= k triggers.
    let mut any = vec![false; ncell];
    let mut rows: Vec<CantorBoundRow> = Vec::with_capacity(depth as usize);
    for k in (1..=depth).rev() {
        let tk = &triggers[k as usize - 1];
        for (a, &t) in any.iter_mut().zip(tk) {
            *a = *a || t;
        }
        let count = any.iter().filter(|&&b| b).count() as u64;
        let required = 1u64 << (2 * depth - k); // 4^depth / 2^k
        rows.push(CantorBoundRow {
            k,
            rho: 2.0 * (-(2.0 * k as f64)).exp2(),
            threshold: (k as f64).exp2() / 2.0f64.sqrt(),
            superlevel_cells: count,
            required_cells: required,
            pass: count >= required,
        });
    }
    rows.reverse();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_one_structure() {
        let c = build_cantor(1).unwrap();
        // A_1 = [0, 1/4) u [1/2, 3/4): endpoints {0, 2} in units of 1/4.
        assert_eq!(c.levels[0].endpoints, vec![0, 2]);
        assert_eq!(c.level_measure(1), 0.5);
    }

    #[test]
    fn level_two_endpoints() {
        let c = build_cantor(2).unwrap();
        // S_2 = {0, 2, 8, 10} in units of 1/16: {0, .125, .5, .625}.
        assert_eq!(c.levels[1].endpoints, vec![0, 2, 8, 10]);
    }

    #[test]
    fn l1_norm_exact_at_every_depth() {
        for depth in 1..=8 {
            let c = build_cantor(depth).unwrap();
            assert_eq!(c.l1_norm(), 8.0f64.sqrt(), "depth {depth}");
            // The naive grid sum agrees to roundoff.
            let summed = c.field.l1_norm();
            assert!((summed - c.l1_norm()).abs() < 1e-12);
            assert!(c.nesting_holds());
        }
    }

    #[test]
    fn depth_limit_is_resource_error() {
        match build_cantor(13) {
            Err(Error::Resource(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn superlevel_bounds_small_depth() {
        let c = build_cantor(4).unwrap();
        let rows = superlevel_rows(&c);
        for r in &rows {
            assert!(
                r.pass,
                "k = {}: {} cells < required {}",
                r.k, r.superlevel_cells, r.required_cells
            );
        }
        // k = 1: measure of the superlevel set is at least 1/2.
        let r1 = &rows[0];
        let measure = r1.superlevel_cells as f64 / c.mask.len() as f64;
        assert!(measure >= 0.5);
    }

    #[test]
    fn scale_op_agrees_with_exact_triggers() {
        // The floating-point operator reproduces the dyadic trigger radii
        // within one ladder step at a sample of cells.
        let depth = 4;
        let c = build_cantor(depth).unwrap();
        let h = (-(2.0 * depth as f64)).exp2();
        let ladder = ScaleLadder::new(h, 0.6, 2, 6).unwrap();
        let sf = multiscale::scale_op(&c.field, 0.5, &ladder, AvgMode::Space).unwrap();
        // Cells in A_0 \ A_1 (gap block [1/4, 1/2)) trigger at rho = 1/2
        // but not much earlier; S should be <= 1/2 there.
        let ncell = c.mask.len();
        for i in (ncell / 4)..(ncell / 2) {
            assert!(sf.s[i] <= 0.5 + 1e-12, "cell {i}: S = {}", sf.s[i]);
        }
    }
}
