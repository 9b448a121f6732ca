//! The pair of counterexample profiles separating the nested weak norm
//! from the joint weak norm, and the interpolation inequality that still
//! connects them.
//!
//! On (0,1) x (0,1):
//!   u1(t, x) = e^(t/eps) * 1{x <= e^(-t/eps)}   (nested norm 1, joint <= eps)
//!   u2(t, x) = 1 / (t x)                        (nested norm 1, joint infinite)
//!
//! Sampling is chosen so the continuum values are attainable on a grid:
//! u1 is averaged exactly over each x-cell (mass-preserving; pointwise
//! cell-center sampling destroys the nested norm at any resolution), and
//! the singular profile u2 is sampled at right cell edges in both t and x,
//! which makes each sampled superlevel set carry exactly the measure of
//! the cells covering it. The divergence of u2's joint norm shows up as
//! logarithmic growth of the sampled norm under refinement.

use crate::error::{Error, Result};
use crate::field::{Extension, ScalarField};
use crate::grid::GridSpec;
use crate::grid::TimeSpec;
use crate::norms::{lorentz_norm, sup_norm, weak_norm, LorentzParams, MeasuredSample};

/// Pointwise value of the first profile.
pub fn u1_value(eps: f64, t: f64, x: f64) -> f64 {
    let support = (-t / eps).exp();
    if x <= support {
        (t / eps).exp()
    } else {
        0.0
    }
}

/// Pointwise value of the second profile.
pub fn u2_value(t: f64, x: f64) -> f64 {
    1.0 / (t * x)
}

#[derive(Debug, Clone)]
pub struct SeparationPair {
    pub epsilon: f64,
    pub n: usize,
    /// Exact x-cell averages of u1, slices at cell-center times.
    pub u1: ScalarField,
    /// Right-edge samples of u2 in both t and x (all values finite;
    /// the largest is the grid's maximal representable level).
    pub u2: ScalarField,
}

/// Sample both profiles on the n x n grid over (0,1) x (0,1).
pub fn separation_pair(epsilon: f64, n: usize) -> Result<SeparationPair> {
    if !(epsilon > 0.0) {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let h = 1.0 / n as f64;
    let grid = GridSpec::new(&[n], &[h], &[false], &[0.0])?;

    // u1: slice times at cell centers, values are exact cell averages.
    let ts1 = TimeSpec::new(n, h, 0.5 * h)?;
    let mut d1 = Vec::with_capacity(n * n);
    for j in 0..n {
        let t = ts1.time(j);
        let height = (t / epsilon).exp();
        let support = 1.0 / height;
        for i in 0..n {
            let lo = i as f64 * h;
            let hi = lo + h;
            let overlap = (support.min(hi) - lo).max(0.0);
            d1.push(height * overlap / h);
        }
    }
    let u1 = ScalarField::new(grid.clone(), Some(ts1), Extension::ZeroOutside, d1)?;

    // u2: right-edge samples; slice j is at time (j+1) h.
    let ts2 = TimeSpec::new(n, h, h)?;
    let mut d2 = Vec::with_capacity(n * n);
    for j in 0..n {
        let t = ts2.time(j);
        for i in 0..n {
            d2.push(u2_value(t, (i + 1) as f64 * h));
        }
    }
    let u2 = ScalarField::new(grid, Some(ts2), Extension::ZeroOutside, d2)?;

    Ok(SeparationPair {
        epsilon,
        n,
        u1,
        u2,
    })
}

impl SeparationPair {
    /// Exact per-slice sample of u1 at slice j: the full value on the
    /// covered cells, with the boundary cell carrying its exact sub-cell
    /// measure. The per-slice weak-L1 norm of this sample is exactly 1.
    pub fn u1_slice_sample(&self, j: usize) -> MeasuredSample {
        let ts = self.u1.time.as_ref().unwrap();
        let t = ts.time(j);
        let h = 1.0 / self.n as f64;
        let height = (t / self.epsilon).exp();
        let support = 1.0 / height;
        let mut s = MeasuredSample::empty();
        let full = (support / h).floor() as usize;
        if full > 0 {
            s.push(height, full.min(self.n) as f64 * h);
        }
        let rem = support - full as f64 * h;
        if rem > 0.0 && full < self.n {
            s.push(height, rem);
        }
        s
    }

    pub fn u1_slice_samples(&self) -> Vec<(MeasuredSample, f64)> {
        let ts = self.u1.time.as_ref().unwrap();
        (0..ts.nt)
            .map(|j| (self.u1_slice_sample(j), ts.dt))
            .collect()
    }

    /// Joint sample of u1 over (0,1)^2 built from the exact slice samples.
    pub fn u1_joint_sample(&self) -> MeasuredSample {
        let mut joint = MeasuredSample::empty();
        for (s, dt) in self.u1_slice_samples() {
            for &(v, w) in s.pairs() {
                joint.push(v, w * dt);
            }
        }
        joint
    }
}

/// Which endpoint pair the nested-vs-joint interpolation starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpBranch {
    /// Endpoints `L^inf_t L^(q0,w)_x` and joint weak-L1; exponents satisfy
    /// `(1 - q0)/p + q0/q = 1` with `q0 < q < 1 < p`.
    SupTime,
    /// Endpoints `L^(p0,w)_t L^inf_x` and joint weak-L1; exponents satisfy
    /// `p0/p + (1 - p0)/q = 1` with `p0 < p < 1 < q`.
    SupSpace,
}

#[derive(Debug, Clone)]
pub struct InterpResult {
    pub p: f64,
    pub q: f64,
    /// Measured nested weak norm at (p, q).
    pub measured: f64,
    /// Product of endpoint norms with the interpolation exponents.
    pub bound: f64,
    pub ratio: f64,
}

/// Measure the nested-vs-joint interpolation inequality on per-slice
/// samples: the nested weak norm at the interpolated exponents against
/// `C * joint^(1/p) * endpoint^(1 - 1/p)` (branch `SupTime`; the `SupSpace`
/// branch swaps the roles of p and q).
pub fn interpolate_nested(
    slices: &[(MeasuredSample, f64)],
    branch: InterpBranch,
    base: f64,
    target: f64,
) -> Result<InterpResult> {
    let joint = {
        let mut j = MeasuredSample::empty();
        for (s, dt) in slices {
            for &(v, w) in s.pairs() {
                if w * dt > 0.0 {
                    j.push(v, w * dt);
                }
            }
        }
        j
    };
    let joint_weak = weak_norm(&joint, 1.0);

    match branch {
        InterpBranch::SupTime => {
            let q0 = base;
            let q = target;
            if !(q0 > 0.0 && q0 < 1.0) {
                return Err(Error::Domain(format!("need q0 in (0,1), got {q0}")));
            }
            if !(q > q0 && q < 1.0) {
                return Err(Error::Domain(format!("need q in (q0, 1), got {q}")));
            }
            let p = (1.0 - q0) * q / (q - q0);
            let endpoint = slices
                .iter()
                .map(|(s, _)| weak_norm(s, q0))
                .fold(0.0f64, f64::max);
            let inner: Vec<(f64, f64)> = slices
                .iter()
                .map(|(s, dt)| (weak_norm(s, q), *dt))
                .collect();
            let measured = crate::norms::nested_from_slice_norms(&inner, LorentzParams::weak(p));
            let bound = joint_weak.powf(1.0 / p) * endpoint.powf(1.0 - 1.0 / p);
            Ok(InterpResult {
                p,
                q,
                measured,
                bound,
                ratio: if bound > 0.0 { measured / bound } else { f64::NAN },
            })
        }
        InterpBranch::SupSpace => {
            let p0 = base;
            let p = target;
            if !(p0 > 0.0 && p0 < 1.0) {
                return Err(Error::Domain(format!("need p0 in (0,1), got {p0}")));
            }
            if !(p > p0 && p < 1.0) {
                return Err(Error::Domain(format!("need p in (p0, 1), got {p}")));
            }
            let q = (1.0 - p0) * p / (p - p0);
            let endpoint_inner: Vec<(f64, f64)> = slices
                .iter()
                .map(|(s, dt)| (sup_norm(s), *dt))
                .collect();
            let endpoint =
                crate::norms::nested_from_slice_norms(&endpoint_inner, LorentzParams::weak(p0));
            let inner: Vec<(f64, f64)> = slices
                .iter()
                .map(|(s, dt)| (weak_norm(s, q), *dt))
                .collect();
            let measured = crate::norms::nested_from_slice_norms(&inner, LorentzParams::weak(p));
            let bound = joint_weak.powf(1.0 / q) * endpoint.powf(1.0 - 1.0 / q);
            Ok(InterpResult {
                p,
                q,
                measured,
                bound,
                ratio: if bound > 0.0 { measured / bound } else { f64::NAN },
            })
        }
    }
}

/// Joint Lorentz norm of a sampled spacetime field (weights dt * cell).
pub fn joint_norm(f: &ScalarField, params: LorentzParams) -> f64 {
    lorentz_norm(&MeasuredSample::from_spacetime(f), params)
}
