//! Seeded random test data: nonnegative trigonometric fields, solenoidal
//! drifts, and Lipschitz graph families. Each generator draws a fixed set
//! of continuum coefficients, so the same trial evaluates the same
//! function at every grid resolution (refinement series compare constants
//! fitted to one underlying field, not to fresh noise).

use crate::field::{Extension, ScalarField, VectorField};
use crate::graph::GraphFamily;
use crate::grid::{GridSpec, Point, TimeSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: usize, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ salt)
}

#[derive(Debug, Clone)]
struct Mode {
    k: [f64; 3],
    om: f64,
    amp: f64,
    phase: f64,
}

/// A nonnegative continuum scalar: the square of a low-mode trig
/// polynomial, with optional slow temporal modulation.
#[derive(Debug, Clone)]
pub struct RandomScalar {
    offset: f64,
    modes: Vec<Mode>,
    /// Multiplier applied after squaring.
    pub scale: f64,
}

impl RandomScalar {
    pub fn draw(rng: &mut ChaCha8Rng, rank: usize, n_modes: usize, kmax: i32) -> Self {
        let tau = std::f64::consts::TAU;
        let modes = (0..n_modes)
            .map(|_| {
                let mut k = [0.0; 3];
                for ka in k.iter_mut().take(rank) {
                    *ka = rng.gen_range(-kmax..=kmax) as f64 * tau;
                }
                Mode {
                    k,
                    om: rng.gen_range(0..=2) as f64 * std::f64::consts::PI,
                    amp: rng.gen_range(-1.0..1.0),
                    phase: rng.gen_range(0.0..tau),
                }
            })
            .collect();
        RandomScalar {
            offset: rng.gen_range(0.1..0.6),
            modes,
            scale: 1.0,
        }
    }

    pub fn eval(&self, t: f64, x: &Point) -> f64 {
        let mut acc = self.offset;
        for m in &self.modes {
            let arg = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.om * t + m.phase;
            acc += m.amp * arg.cos();
        }
        self.scale * acc * acc
    }

    /// Rescale so the mean over the sampled grid is `target`.
    pub fn scaled_to_mean(mut self, grid: &GridSpec, time: Option<&TimeSpec>, target: f64) -> Self {
        let f = self.sample(grid, time.cloned());
        let mean = f.data().iter().sum::<f64>() / f.data().len() as f64;
        if mean > 0.0 {
            self.scale *= target / mean;
        }
        self
    }

    pub fn sample(&self, grid: &GridSpec, time: Option<TimeSpec>) -> ScalarField {
        match time {
            None => ScalarField::from_fn(grid.clone(), Extension::ZeroOutside, |x| {
                self.eval(0.0, x)
            }),
            Some(ts) => ScalarField::from_fn_spacetime(
                grid.clone(),
                ts,
                Extension::ZeroOutside,
                |t, x| self.eval(t, x),
            ),
        }
    }
}

/// A divergence-free planar drift from a random streamfunction, rescaled
/// so its gradient stays below `max_grad` (the admissibility radius of a
/// drift scales like the inverse square root of its gradient, so wild
/// gradients would push every cutoff below the grid).
#[derive(Debug, Clone)]
pub struct RandomDrift {
    modes: Vec<Mode>,
    pub scale: f64,
}

impl RandomDrift {
    pub fn draw(rng: &mut ChaCha8Rng, n_modes: usize, kmax: i32, max_grad: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let modes: Vec<Mode> = (0..n_modes)
            .map(|_| Mode {
                k: [
                    rng.gen_range(-kmax..=kmax) as f64 * tau,
                    rng.gen_range(-kmax..=kmax) as f64 * tau,
                    0.0,
                ],
                om: rng.gen_range(0..=1) as f64 * std::f64::consts::PI,
                amp: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..tau),
            })
            .collect();
        // Analytic Frobenius bound on the Jacobian of (psi_y, -psi_x).
        let grad_bound: f64 = modes
            .iter()
            .map(|m| {
                let k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1];
                m.amp.abs() * k2 * std::f64::consts::SQRT_2
            })
            .sum();
        let scale = max_grad / grad_bound.max(1e-12);
        RandomDrift { modes, scale }
    }

    fn stream_grad(&self, t: f64, x: &Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        for m in &self.modes {
            let arg = m.k[0] * x[0] + m.k[1] * x[1] + m.om * t + m.phase;
            let d = -m.amp * arg.sin();
            g[0] += m.k[0] * d;
            g[1] += m.k[1] * d;
        }
        g
    }

    /// `b = (d_y psi, -d_x psi)`, exactly divergence-free in the continuum.
    pub fn eval(&self, t: f64, x: &Point) -> [f64; 2] {
        let g = self.stream_grad(t, x);
        [self.scale * g[1], -self.scale * g[0]]
    }

    pub fn sample(&self, grid: &GridSpec, ts: &TimeSpec) -> VectorField {
        let bx = ScalarField::from_fn_spacetime(
            grid.clone(),
            ts.clone(),
            Extension::ZeroOutside,
            |t, x| self.eval(t, x)[0],
        );
        let by = ScalarField::from_fn_spacetime(
            grid.clone(),
            ts.clone(),
            Extension::ZeroOutside,
            |t, x| self.eval(t, x)[1],
        );
        VectorField::new(vec![bx, by]).expect("components")
    }
}

/// A moving Lipschitz curve `y = g(t, x)` inside the unit box, with an
/// analytic slope bound scaled to the requested constant.
#[derive(Debug, Clone)]
pub struct RandomGraph {
    modes: Vec<Mode>,
    pub lipschitz: f64,
    center: f64,
    amp: f64,
}

impl RandomGraph {
    pub fn draw(rng: &mut ChaCha8Rng, lipschitz: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let modes: Vec<Mode> = (0..3)
            .map(|_| Mode {
                k: [rng.gen_range(1..=3) as f64 * tau, 0.0, 0.0],
                om: rng.gen_range(0..=2) as f64 * std::f64::consts::PI,
                amp: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..tau),
            })
            .collect();
        // Analytic slope bound: sum |amp * k|.
        let slope: f64 = modes.iter().map(|m| (m.amp * m.k[0]).abs()).sum();
        let amp = 0.9 * lipschitz / slope.max(1e-12);
        RandomGraph {
            modes,
            lipschitz,
            center: rng.gen_range(0.35..0.65),
            amp,
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let mut g = self.center;
        for m in &self.modes {
            g += self.amp * m.amp * (m.k[0] * x + m.om * t + m.phase).cos();
        }
        // Keep the curve inside the unit box.
        g.clamp(0.02, 0.98)
    }

    pub fn family(&self, ambient: &GridSpec, ts: Option<&TimeSpec>) -> GraphFamily {
        let nt = ts.map_or(1, |t| t.nt);
        let times: Vec<f64> = match ts {
            Some(t) => t.times().collect(),
            None => vec![0.0],
        };
        GraphFamily::codim1(ambient.clone(), self.lipschitz, nt, |j, p| {
            self.eval(times[j], p[0])
        })
        .expect("graph within Lipschitz budget")
    }
}
