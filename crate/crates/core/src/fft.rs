//! Small N-d FFT layer over rustfft, plus periodic ball-indicator
//! convolution used by the all-points averaging passes.

use crate::grid::GridSpec;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place FFT along every axis of a row-major array (axis 0 slowest).
pub fn ndfft(dims: &[usize], data: &mut [Complex<f64>], inverse: bool) {
    let total: usize = dims.iter().product();
    debug_assert_eq!(total, data.len());
    let mut stride = 1usize;
    for axis in (0..dims.len()).rev() {
        let n = dims[axis];
        let fft = plan(n, inverse);
        let mut line = vec![Complex::default(); n];
        let block = stride * n;
        for base in 0..total / block {
            for off in 0..stride {
                let start = base * block + off;
                for k in 0..n {
                    line[k] = data[start + k * stride];
                }
                fft.process(&mut line);
                for k in 0..n {
                    data[start + k * stride] = line[k];
                }
            }
        }
        stride *= n;
    }
    if inverse {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward transform of a real array.
pub fn forward_real(dims: &[usize], data: &[f64]) -> Vec<Complex<f64>> {
    let mut c: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    ndfft(dims, &mut c, false);
    c
}

/// Spectral convolver for one periodic grid: holds the transform of the
/// field and convolves against ball indicators rung by rung.
pub struct SpectralConv {
    dims: Vec<usize>,
    grid: GridSpec,
    fhat: Vec<Complex<f64>>,
}

impl SpectralConv {
    pub fn new(grid: &GridSpec, slice: &[f64]) -> Self {
        let dims: Vec<usize> = (0..grid.rank()).map(|a| grid.n(a)).collect();
        let fhat = forward_real(&dims, slice);
        SpectralConv {
            dims,
            grid: grid.clone(),
            fhat,
        }
    }

    /// Indicator of the wrapped ball of radius `rho` centered at the origin
    /// cell, evaluated at cell-center offsets.
    fn ball_kernel(&self, rho: f64) -> Vec<f64> {
        let g = &self.grid;
        let total: usize = self.dims.iter().product();
        let mut k = vec![0.0f64; total];
        let rho2 = rho * rho;
        for lin in 0..total {
            let idx = g.unlinear(lin);
            let mut d2 = 0.0;
            for a in 0..g.rank() {
                let n = g.n(a);
                let jw = idx[a].min(n - idx[a]); // wrapped offset magnitude
                let d = jw as f64 * g.h(a);
                d2 += d * d;
            }
            if d2 <= rho2 {
                k[lin] = 1.0;
            }
        }
        k
    }

    /// For every cell center x, the plain sum of field values over cells
    /// whose center lies in the wrapped ball `B_rho(x)`.
    pub fn ball_sums(&self, rho: f64) -> Vec<f64> {
        self.convolve_grid(&self.ball_kernel(rho))
    }

    /// Cyclic convolution of the held field against an arbitrary kernel
    /// given as a grid function anchored at the origin cell.
    pub fn convolve_grid(&self, kernel: &[f64]) -> Vec<f64> {
        let khat = forward_real(&self.dims, kernel);
        let mut prod: Vec<Complex<f64>> = self
            .fhat
            .iter()
            .zip(&khat)
            .map(|(a, b)| a * b)
            .collect();
        ndfft(&self.dims, &mut prod, true);
        prod.into_iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip() {
        let dims = [4, 6];
        let data: Vec<f64> = (0..24).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut c: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        ndfft(&dims, &mut c, false);
        ndfft(&dims, &mut c, true);
        for (orig, out) in data.iter().zip(&c) {
            assert!((orig - out.re).abs() < 1e-12);
            assert!(out.im.abs() < 1e-12);
        }
    }

    #[test]
    fn ball_sums_match_direct_count() {
        let g = GridSpec::torus(2, 16).unwrap();
        let data: Vec<f64> = (0..256).map(|k| ((k * 7 % 13) as f64) * 0.1).collect();
        let conv = SpectralConv::new(&g, &data);
        let rho = 0.2;
        let sums = conv.ball_sums(rho);
        // Direct check at a few centers.
        for &center in &[0usize, 37, 255] {
            let c = g.point_of(g.unlinear(center));
            let mut expect = 0.0;
            for k in 0..256 {
                let p = g.point_of(g.unlinear(k));
                if g.distance(&c, &p) <= rho {
                    expect += data[k];
                }
            }
            assert!(
                (sums[center] - expect).abs() < 1e-9,
                "cell {center}: {} vs {}",
                sums[center],
                expect
            );
        }
    }
}
