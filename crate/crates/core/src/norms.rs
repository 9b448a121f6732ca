//! Lorentz, weak, strong, and nested norms over weighted samples.
//!
//! All norms are computed from the exact sorted level sets of the sample:
//! the distribution function of a finite weighted sample is a step
//! function, so the weak norm is a finite sup and the Lorentz integral is
//! piecewise-polynomial in the level and integrates in closed form.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::graph::GraphFamily;

/// Lorentz exponents. `primary` is the Lebesgue-scale exponent, `secondary`
/// the fine index; `f64::INFINITY` selects the weak (or `L^inf`) branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzParams {
    pub primary: f64,
    pub secondary: f64,
}

impl LorentzParams {
    pub fn new(primary: f64, secondary: f64) -> Result<Self> {
        if !(primary > 0.0) {
            return Err(Error::Parameter(format!("primary exponent {primary} <= 0")));
        }
        if !(secondary > 0.0) {
            return Err(Error::Parameter(format!(
                "secondary exponent {secondary} <= 0"
            )));
        }
        Ok(LorentzParams { primary, secondary })
    }

    pub fn weak(primary: f64) -> Self {
        LorentzParams {
            primary,
            secondary: f64::INFINITY,
        }
    }

    pub fn strong(p: f64) -> Self {
        LorentzParams {
            primary: p,
            secondary: p,
        }
    }

    pub fn sup() -> Self {
        LorentzParams {
            primary: f64::INFINITY,
            secondary: f64::INFINITY,
        }
    }
}

/// A finite list of (value, weight) pairs. The weight is the measure of the
/// sample cell: Lebesgue cell volume, graph area element, or an exact
/// sub-cell measure when the caller knows it.
#[derive(Debug, Clone, Default)]
pub struct MeasuredSample {
    pairs: Vec<(f64, f64)>,
}

impl MeasuredSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(_, w) in &pairs {
            if !(w > 0.0) {
                return Err(Error::Parameter(format!("sample weight {w} must be > 0")));
            }
            total += w;
        }
        if !total.is_finite() {
            return Err(Error::Parameter("total sample weight must be finite".into()));
        }
        Ok(MeasuredSample { pairs })
    }

    pub fn empty() -> Self {
        MeasuredSample { pairs: Vec::new() }
    }

    pub fn push(&mut self, value: f64, weight: f64) {
        debug_assert!(weight > 0.0);
        self.pairs.push((value, weight));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn total_weight(&self) -> f64 {
        self.pairs.iter().map(|&(_, w)| w).sum()
    }

    /// Measure of the superlevel set `{|v| > lambda}`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        self.pairs
            .iter()
            .filter(|&&(v, _)| v.abs() > lambda)
            .map(|&(_, w)| w)
            .sum()
    }

    /// Sample of the whole grid of a spatial field (weights = cell volume).
    pub fn from_field(f: &ScalarField) -> Self {
        let w = f.grid.cell_vol();
        MeasuredSample {
            pairs: f.data().iter().map(|&v| (v, w)).collect(),
        }
    }

    /// Sample of a full spacetime field (weights = dt * cell volume).
    pub fn from_spacetime(f: &ScalarField) -> Self {
        let dt = f.time.as_ref().map_or(1.0, |t| t.dt);
        let w = f.grid.cell_vol() * dt;
        MeasuredSample {
            pairs: f.data().iter().map(|&v| (v, w)).collect(),
        }
    }

    /// Sample of one time slice over a graph: field values interpolated at
    /// the graph nodes, weights from the surface measure.
    pub fn from_graph_slice(f: &ScalarField, gamma: &GraphFamily, slice: usize) -> Self {
        let fslice = slice.min(f.nt() - 1);
        let weights = gamma.weights(slice);
        let pairs = (0..gamma.nodes())
            .map(|k| (f.interp(fslice, &gamma.point(slice, k)), weights[k]))
            .collect();
        MeasuredSample { pairs }
    }

    /// Sorted distinct absolute values (ascending) with tail weights
    /// `T_i = mu{|v| >= u_i}`. Zero values are dropped (they never
    /// contribute to a superlevel set).
    fn level_sets(&self) -> (Vec<f64>, Vec<f64>) {
        let mut vw: Vec<(f64, f64)> = self
            .pairs
            .iter()
            .map(|&(v, w)| (v.abs(), w))
            .filter(|&(v, _)| v > 0.0)
            .collect();
        vw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN sample value"));
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (v, w) in vw {
            if values.last() == Some(&v) {
                *weights.last_mut().unwrap() += w;
            } else {
                values.push(v);
                weights.push(w);
            }
        }
        // Suffix sums: tail[i] = sum of weights at values >= values[i].
        let mut tail = weights;
        for i in (0..tail.len().saturating_sub(1)).rev() {
            tail[i] += tail[i + 1];
        }
        (values, tail)
    }
}

/// Weak norm `sup_lambda lambda * mu{|f| > lambda}^(1/q1)`, computed exactly
/// from the sorted level sets. Empty samples give 0.
pub fn weak_norm(s: &MeasuredSample, q1: f64) -> f64 {
    assert!(q1 > 0.0 && q1.is_finite(), "weak norm needs q1 in (0, inf)");
    let (values, tail) = s.level_sets();
    let mut best = 0.0f64;
    for i in 0..values.len() {
        if values[i].is_infinite() {
            return f64::INFINITY;
        }
        // lambda just below values[i] captures everything >= values[i].
        best = best.max(values[i] * tail[i].powf(1.0 / q1));
    }
    best
}

/// `L^inf` norm: essential sup of `|f|` over positive-weight samples.
pub fn sup_norm(s: &MeasuredSample) -> f64 {
    s.pairs.iter().fold(0.0f64, |m, &(v, _)| m.max(v.abs()))
}

/// Direct `(sum w |v|^p)^(1/p)`; the independent route used to cross-check
/// the Lorentz integral at `q1 == q2`.
pub fn lp_norm(s: &MeasuredSample, p: f64) -> f64 {
    s.pairs
        .iter()
        .map(|&(v, w)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Lorentz norm with exponents `(q1, q2)`:
/// `(q1 * int_0^inf mu{|f| > lambda}^(q2/q1) lambda^(q2-1) dlambda)^(1/q2)`.
///
/// The distribution function is constant between consecutive sample values,
/// so each piece integrates in closed form. `q2 = inf` is the weak norm,
/// `q1 = inf` the sup norm.
pub fn lorentz_norm(s: &MeasuredSample, p: LorentzParams) -> f64 {
    let (q1, q2) = (p.primary, p.secondary);
    if q1.is_infinite() {
        return sup_norm(s);
    }
    if q2.is_infinite() {
        return weak_norm(s, q1);
    }
    let (values, tail) = s.level_sets();
    if values.is_empty() {
        return 0.0;
    }
    if values.last().unwrap().is_infinite() {
        return f64::INFINITY;
    }
    // mu{|f| > lambda} = tail[i] on [values[i-1], values[i]), with values[-1] = 0.
    let mut acc = 0.0;
    let mut prev_pow = 0.0;
    for i in 0..values.len() {
        let vi_pow = values[i].powf(q2);
        acc += tail[i].powf(q2 / q1) * (vi_pow - prev_pow);
        prev_pow = vi_pow;
    }
    (q1 / q2 * acc).powf(1.0 / q2)
}

/// Outer norm in time of precomputed per-slice inner norms. Each entry is
/// `(inner norm, time weight)`; the per-slice norm is treated as a step
/// function of t, which matches the nested-norm definition for sampled data.
pub fn nested_from_slice_norms(slice_norms: &[(f64, f64)], pt: LorentzParams) -> f64 {
    let s = MeasuredSample {
        pairs: slice_norms.iter().copied().filter(|&(_, w)| w > 0.0).collect(),
    };
    lorentz_norm(&s, pt)
}

/// Nested (anisotropic) norm of a spacetime field over a moving graph:
/// inner norm over `(Gamma_t, mu_t)` per slice, then the outer Lorentz
/// norm in t with weight dt. Slices are reduced in ascending t order.
pub fn mixed_norm(
    f: &ScalarField,
    gamma: &GraphFamily,
    pt: LorentzParams,
    px: LorentzParams,
) -> f64 {
    let nt = f.nt();
    let dt = f.time.as_ref().map_or(1.0, |t| t.dt);
    let inner: Vec<(f64, f64)> = (0..nt)
        .map(|j| {
            let gslice = j.min(gamma.nt() - 1);
            let sample = MeasuredSample::from_graph_slice(f, gamma, gslice);
            (lorentz_norm(&sample, px), dt)
        })
        .collect();
    nested_from_slice_norms(&inner, pt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn indicator(measure: f64) -> MeasuredSample {
        MeasuredSample::new(vec![(1.0, measure)]).unwrap()
    }

    #[test]
    fn weak_norm_of_indicator() {
        // f = 1 on [0, 1]: weak-L1 norm is 1.
        assert_eq!(weak_norm(&indicator(1.0), 1.0), 1.0);
    }

    #[test]
    fn lorentz_matches_lp_when_indices_equal() {
        // q1 = q2 = 2, f = 1 on a set of measure 4 -> L2 norm 2.
        let s = indicator(4.0);
        let v = lorentz_norm(&s, LorentzParams::strong(2.0));
        assert!((v - 2.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..40);
            let s = MeasuredSample::new(
                (0..n)
                    .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.01..2.0)))
                    .collect(),
            )
            .unwrap();
            for &p in &[0.5, 1.0, 1.7, 2.0, 3.0] {
                let a = lorentz_norm(&s, LorentzParams::strong(p));
                let b = lp_norm(&s, p);
                assert!(
                    (a - b).abs() <= 1e-12 * b.max(1.0),
                    "p={p}: integral {a} vs direct {b}"
                );
            }
        }
    }

    #[test]
    fn indicator_lorentz_normalization() {
        // Unit-measure indicator: the closed form is (q1/q2)^(1/q2).
        let s = indicator(1.0);
        for &(q1, q2) in &[(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)] {
            let v = lorentz_norm(&s, LorentzParams::new(q1, q2).unwrap());
            let expected = (q1 / q2_f(q2)).powf(1.0 / q2);
            assert!((v - expected).abs() < 1e-12, "({q1},{q2}): {v} vs {expected}");
        }
        fn q2_f(x: f64) -> f64 {
            x
        }
    }

    #[test]
    fn inv_sqrt_profile_weak_norm() {
        // f(x) = x^(-1/2) on (0,1): |{f > lambda}| = min(lambda^-2, 1),
        // so the weak-L2 norm is 1. A decreasing singular profile must be
        // sampled at the right cell edge: the superlevel set of the sampled
        // value then has exactly the measure of the cells covering it.
        // (Cell centers overestimate the norm by sqrt(2) at the first cell,
        // at any resolution.)
        let n = 4096;
        let h = 1.0 / n as f64;
        let s = MeasuredSample::new(
            (0..n)
                .map(|i| ((((i + 1) as f64) * h).powf(-0.5), h))
                .collect(),
        )
        .unwrap();
        let v = weak_norm(&s, 2.0);
        assert!((v - 1.0).abs() < 1e-12, "weak-L2 = {v}");
    }

    #[test]
    fn inv_sqrt_lorentz_vs_quadrature_oracle() {
        // (q1, q2) = (2, 1) against brute-force numeric quadrature of
        // q1 * int mu{f > lambda}^(q2/q1) lambda^(q2-1) dlambda on the
        // sampled distribution function.
        let n = 2048;
        let h = 1.0 / n as f64;
        let s = MeasuredSample::new(
            (0..n)
                .map(|i| (((i as f64 + 0.5) * h).powf(-0.5), h))
                .collect(),
        )
        .unwrap();
        let p = LorentzParams::new(2.0, 1.0).unwrap();
        let v = lorentz_norm(&s, p);

        // Oracle: trapezoid quadrature in lambda over the sampled mu.
        let lam_max = s.pairs().iter().map(|&(v, _)| v).fold(0.0f64, f64::max);
        let m = 400_000;
        let dl = lam_max / m as f64;
        let mut acc = 0.0;
        for k in 0..m {
            let lam = (k as f64 + 0.5) * dl;
            let mu = s.measure_above(lam);
            acc += mu.powf(0.5) * dl;
        }
        let oracle = 2.0 * acc; // q1 * int mu^(1/2) dlambda, exponent q2-1 = 0
        assert!(
            (v - oracle).abs() < 1e-6 * oracle,
            "closed form {v} vs quadrature {oracle}"
        );
    }

    #[test]
    fn weak_below_lorentz_for_small_secondary() {
        // Lorentz-scale monotonicity: weak <= Lorentz(q1, q2) for q2 <= q1.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = rng.gen_range(1..60);
            let s = MeasuredSample::new(
                (0..n)
                    .map(|_| (rng.gen_range(0.0..5.0), rng.gen_range(0.01..1.0)))
                    .collect(),
            )
            .unwrap();
            let q1 = rng.gen_range(0.5..3.0);
            let q2 = rng.gen_range(0.2..1.0) * q1;
            let w = weak_norm(&s, q1);
            let l = lorentz_norm(&s, LorentzParams::new(q1, q2).unwrap());
            assert!(w <= l + 1e-10 * l.max(1.0), "q1={q1} q2={q2}: {w} > {l}");
        }
    }

    #[test]
    fn homogeneity_exact_for_binary_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = MeasuredSample::new(
            (0..25)
                .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.1..1.0)))
                .collect(),
        )
        .unwrap();
        let c = 4.0; // power of two: scaling is exact in binary floating point
        let scaled = MeasuredSample::new(
            s.pairs().iter().map(|&(v, w)| (c * v, w)).collect(),
        )
        .unwrap();
        for &p in &[LorentzParams::weak(1.5), LorentzParams::strong(2.0)] {
            assert_eq!(lorentz_norm(&scaled, p), c * lorentz_norm(&s, p));
        }
    }

    #[test]
    fn infinite_values_give_infinite_norm() {
        let s = MeasuredSample::new(vec![(f64::INFINITY, 0.5), (1.0, 1.0)]).unwrap();
        assert_eq!(weak_norm(&s, 1.0), f64::INFINITY);
        assert_eq!(
            lorentz_norm(&s, LorentzParams::new(1.0, 2.0).unwrap()),
            f64::INFINITY
        );
    }

    #[test]
    fn empty_sample_is_zero() {
        assert_eq!(weak_norm(&MeasuredSample::empty(), 1.0), 0.0);
    }

    #[test]
    fn mixed_norm_of_constant_is_constant() {
        use crate::field::{Extension, ScalarField};
        use crate::graph::GraphFamily;
        use crate::grid::{GridSpec, TimeSpec};
        let g = GridSpec::torus(2, 16).unwrap();
        let ts = TimeSpec::new(8, 0.125, 0.0625).unwrap();
        let c = 2.5;
        let f = ScalarField::from_fn_spacetime(g.clone(), ts, Extension::Periodic, |_, _| c);
        let gamma = GraphFamily::full_domain(g, 8).unwrap();
        // Strong (2)_t (2)_x of a constant over the unit-measure domain.
        let v = mixed_norm(&f, &gamma, LorentzParams::strong(2.0), LorentzParams::strong(2.0));
        assert!((v - c).abs() < 1e-12 * c, "mixed norm {v}");
    }
}
