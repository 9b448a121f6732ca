//! Pseudo-spectral vorticity solver on the 2-pi-periodic square, with the
//! spectral differentiation and Poisson inversion used to build pressure,
//! gradient, and Hessian diagnostics.

use crate::error::{Error, Result};
use crate::fft::ndfft;
use rustfft::num_complex::Complex;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Spectral workspace for an n x n periodic grid over [0, 2 pi)^2.
pub struct Spectral2d {
    pub n: usize,
    dims: [usize; 2],
    /// Integer wavenumbers in FFT order.
    k: Vec<f64>,
    /// 2/3-rule dealiasing mask.
    dealias: Vec<bool>,
}

pub type Hat = Vec<Complex<f64>>;

impl Spectral2d {
    pub fn new(n: usize) -> Self {
        let k: Vec<f64> = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    i as f64
                } else {
                    i as f64 - n as f64
                }
            })
            .collect();
        let kmax = n as f64 / 3.0;
        let mut dealias = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                dealias[i * n + j] = k[i].abs() <= kmax && k[j].abs() <= kmax;
            }
        }
        Spectral2d {
            n,
            dims: [n, n],
            k,
            dealias,
        }
    }

    pub fn to_hat(&self, data: &[f64]) -> Hat {
        let mut c: Hat = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        ndfft(&self.dims, &mut c, false);
        c
    }

    pub fn from_hat(&self, hat: &Hat) -> Vec<f64> {
        let mut c = hat.clone();
        ndfft(&self.dims, &mut c, true);
        c.into_iter().map(|z| z.re).collect()
    }

    /// Spectral partial derivative along axis 0 (x) or 1 (y).
    pub fn deriv_hat(&self, hat: &Hat, axis: usize) -> Hat {
        let n = self.n;
        let mut out = hat.clone();
        for i in 0..n {
            for j in 0..n {
                let kk = if axis == 0 { self.k[i] } else { self.k[j] };
                out[i * n + j] *= Complex::new(0.0, kk);
            }
        }
        out
    }

    pub fn deriv(&self, data: &[f64], axis: usize) -> Vec<f64> {
        self.from_hat(&self.deriv_hat(&self.to_hat(data), axis))
    }

    fn k2(&self, i: usize, j: usize) -> f64 {
        self.k[i] * self.k[i] + self.k[j] * self.k[j]
    }

    /// Solve `-laplace p = rhs` with zero mean.
    pub fn poisson_hat(&self, rhs: &Hat) -> Hat {
        let n = self.n;
        let mut out = rhs.clone();
        for i in 0..n {
            for j in 0..n {
                let k2 = self.k2(i, j);
                out[i * n + j] = if k2 == 0.0 {
                    Complex::new(0.0, 0.0)
                } else {
                    rhs[i * n + j] / k2
                };
            }
        }
        out
    }

    pub fn apply_dealias(&self, hat: &mut Hat) {
        for (v, &keep) in hat.iter_mut().zip(&self.dealias) {
            if !keep {
                *v = Complex::new(0.0, 0.0);
            }
        }
    }

    /// Velocity from vorticity via the streamfunction:
    /// `laplace psi = -w`, `u = (d_y psi, -d_x psi)` (then `curl u = w`).
    pub fn velocity_from_vorticity(&self, what: &Hat) -> (Vec<f64>, Vec<f64>) {
        let psi = self.poisson_hat(what); // -lap psi = w  =>  psi = w / k^2
        let u = self.from_hat(&self.deriv_hat(&psi, 1));
        let v = {
            let mut d = self.deriv_hat(&psi, 0);
            for z in d.iter_mut() {
                *z = -*z;
            }
            self.from_hat(&d)
        };
        (u, v)
    }

    /// Nonlinear vorticity tendency `-(u . grad) w` with 2/3 dealiasing,
    /// in spectral space.
    fn nonlinear(&self, what: &Hat) -> Hat {
        let (u, v) = self.velocity_from_vorticity(what);
        let wx = self.from_hat(&self.deriv_hat(what, 0));
        let wy = self.from_hat(&self.deriv_hat(what, 1));
        let adv: Vec<f64> = (0..u.len())
            .map(|k| -(u[k] * wx[k] + v[k] * wy[k]))
            .collect();
        let mut hat = self.to_hat(&adv);
        self.apply_dealias(&mut hat);
        hat
    }

    fn rhs(&self, what: &Hat, nu: f64) -> Hat {
        let n = self.n;
        let mut out = self.nonlinear(what);
        for i in 0..n {
            for j in 0..n {
                let k2 = self.k2(i, j);
                out[i * n + j] -= nu * k2 * what[i * n + j];
            }
        }
        out
    }

    /// One classical RK4 step of the vorticity equation.
    pub fn step(&self, what: &Hat, nu: f64, dt: f64) -> Hat {
        let ax = |a: &Hat, b: &Hat, s: f64| -> Hat {
            a.iter().zip(b).map(|(x, y)| x + y * s).collect()
        };
        let k1 = self.rhs(what, nu);
        let k2 = self.rhs(&ax(what, &k1, 0.5 * dt), nu);
        let k3 = self.rhs(&ax(what, &k2, 0.5 * dt), nu);
        let k4 = self.rhs(&ax(what, &k3, dt), nu);
        let mut out = what.clone();
        for i in 0..out.len() {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    /// Pressure from `-laplace P = div(u . grad u)`, zero mean, computed as
    /// `P_hat = -(k_i k_j / k^2) (u_i u_j)_hat` (divergence-free u).
    pub fn pressure(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let uu = self.to_hat(&u.iter().map(|&a| a * a).collect::<Vec<_>>());
        let uv = self.to_hat(&u.iter().zip(v).map(|(&a, &b)| a * b).collect::<Vec<_>>());
        let vv = self.to_hat(&v.iter().map(|&a| a * a).collect::<Vec<_>>());
        let mut phat = vec![Complex::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let (kx, ky) = (self.k[i], self.k[j]);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    continue;
                }
                let idx = i * n + j;
                let ddot = kx * kx * uu[idx] + 2.0 * kx * ky * uv[idx] + ky * ky * vv[idx];
                phat[idx] = -ddot / k2;
            }
        }
        self.from_hat(&phat)
    }

    /// `|grad u|_F` for the planar velocity (all four partials).
    pub fn grad_norm(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let ux = self.deriv(u, 0);
        let uy = self.deriv(u, 1);
        let vx = self.deriv(v, 0);
        let vy = self.deriv(v, 1);
        (0..u.len())
            .map(|k| (ux[k] * ux[k] + uy[k] * uy[k] + vx[k] * vx[k] + vy[k] * vy[k]).sqrt())
            .collect()
    }

    /// `|grad^2 P|_F` (all four second partials).
    pub fn hessian_norm(&self, p: &[f64]) -> Vec<f64> {
        let phat = self.to_hat(p);
        let pxx = self.from_hat(&self.deriv_hat(&self.deriv_hat(&phat, 0), 0));
        let pxy = self.from_hat(&self.deriv_hat(&self.deriv_hat(&phat, 0), 1));
        let pyy = self.from_hat(&self.deriv_hat(&self.deriv_hat(&phat, 1), 1));
        (0..p.len())
            .map(|k| (pxx[k] * pxx[k] + 2.0 * pxy[k] * pxy[k] + pyy[k] * pyy[k]).sqrt())
            .collect()
    }

    /// Frobenius norm of the n-th spatial derivative tensor of a scalar.
    pub fn nth_deriv_norm(&self, f: &[f64], order: usize) -> Vec<f64> {
        let fhat = self.to_hat(f);
        let mut acc = vec![0.0f64; f.len()];
        // All multi-indices (a, b) with a + b = order, with multinomial
        // multiplicity counting each mixed partial once per ordering.
        for a in 0..=order {
            let b = order - a;
            let mut hat = fhat.clone();
            for _ in 0..a {
                hat = self.deriv_hat(&hat, 0);
            }
            for _ in 0..b {
                hat = self.deriv_hat(&hat, 1);
            }
            let d = self.from_hat(&hat);
            let mult = binomial(order, a) as f64;
            for (s, v) in acc.iter_mut().zip(&d) {
                *s += mult * v * v;
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// One 2-D snapshot of the flow on the [0, 2 pi)^2 grid.
#[derive(Debug, Clone)]
pub struct Snapshot2d {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub hess_norm: Vec<f64>,
}

impl Snapshot2d {
    pub fn from_vorticity(sp: &Spectral2d, t: f64, what: &Hat) -> Self {
        let (u, v) = sp.velocity_from_vorticity(what);
        let w = sp.from_hat(what);
        let p = sp.pressure(&u, &v);
        let grad_norm = sp.grad_norm(&u, &v);
        let hess_norm = sp.hessian_norm(&p);
        Snapshot2d {
            t,
            u,
            v,
            w,
            p,
            grad_norm,
            hess_norm,
        }
    }
}

/// Taylor-Green closed forms with amplitude `amp` and viscosity `nu`:
/// `u = amp (cos x sin y, -sin x cos y) e^(-2 nu t)`,
/// `P = -amp^2/4 (cos 2x + cos 2y) e^(-4 nu t)`, vorticity
/// `curl u = -2 amp cos x cos y e^(-2 nu t)`.
pub fn taylor_green_snapshot(n: usize, nu: f64, amp: f64, t: f64) -> Snapshot2d {
    let sp = Spectral2d::new(n);
    let h = TAU / n as f64;
    let decay = (-2.0 * nu * t).exp();
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * n];
    let mut w = vec![0.0; n * n];
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h;
            let idx = i * n + j;
            u[idx] = amp * x.cos() * y.sin() * decay;
            v[idx] = -amp * x.sin() * y.cos() * decay;
            w[idx] = -2.0 * amp * x.cos() * y.cos() * decay;
            p[idx] = -amp * amp / 4.0 * ((2.0 * x).cos() + (2.0 * y).cos()) * decay * decay;
        }
    }
    let grad_norm = sp.grad_norm(&u, &v);
    let hess_norm = sp.hessian_norm(&p);
    Snapshot2d {
        t,
        u,
        v,
        w,
        p,
        grad_norm,
        hess_norm,
    }
}

/// Sup-norm of the momentum-equation residual of a Taylor-Green sample:
/// spatial terms by spectral differentiation, the time derivative from the
/// closed form (`d_t u = -2 nu u`).
pub fn taylor_green_residual(n: usize, nu: f64, amp: f64, t: f64) -> f64 {
    let sp = Spectral2d::new(n);
    let s = taylor_green_snapshot(n, nu, amp, t);
    let ux = sp.deriv(&s.u, 0);
    let uy = sp.deriv(&s.u, 1);
    let vx = sp.deriv(&s.v, 0);
    let vy = sp.deriv(&s.v, 1);
    let px = sp.deriv(&s.p, 0);
    let py = sp.deriv(&s.p, 1);
    let lap = |f: &[f64]| -> Vec<f64> {
        let fh = sp.to_hat(f);
        let mut out = fh.clone();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] *= -sp.k2_pub(i, j);
            }
        }
        sp.from_hat(&out)
    };
    let lu = lap(&s.u);
    let lv = lap(&s.v);
    let mut worst = 0.0f64;
    for k in 0..n * n {
        let r1 = -2.0 * nu * s.u[k] + s.u[k] * ux[k] + s.v[k] * uy[k] + px[k] - nu * lu[k];
        let r2 = -2.0 * nu * s.v[k] + s.u[k] * vx[k] + s.v[k] * vy[k] + py[k] - nu * lv[k];
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    worst
}

impl Spectral2d {
    pub fn k2_pub(&self, i: usize, j: usize) -> f64 {
        self.k2(i, j)
    }

    /// Discrete divergence (spectral) of a velocity sample, sup-norm.
    pub fn divergence_sup(&self, u: &[f64], v: &[f64]) -> f64 {
        let ux = self.deriv(u, 0);
        let vy = self.deriv(v, 1);
        ux.iter()
            .zip(&vy)
            .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()))
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub nu: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Emit a snapshot every `snap_every` steps (and at t = 0).
    pub snap_every: usize,
}

/// Energy ledger entries accumulated during a solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyRow {
    pub t: f64,
    /// `||u(t)||_2^2` over the 2-D domain.
    pub kinetic: f64,
    /// `||grad u(t)||_2^2`.
    pub dissipation_rate: f64,
    /// `int_0^t ||grad u||_2^2 ds` (composite Simpson over the steps).
    pub dissipation_integral: f64,
}

pub struct SolveOutput {
    pub snapshots: Vec<Snapshot2d>,
    pub energy: Vec<EnergyRow>,
}

/// March the vorticity equation from an initial vorticity sample. Fails
/// with a configuration error if the CFL number `max|u| dt / h` exceeds
/// 0.5 at any step.
pub fn solve(sp: &Spectral2d, w0: &[f64], cfg: &SolveConfig) -> Result<SolveOutput> {
    let n = sp.n;
    let h = TAU / n as f64;
    let cellvol = h * h;
    let nsteps = (cfg.t_end / cfg.dt).round() as usize;
    let mut what = sp.to_hat(w0);
    sp.apply_dealias(&mut what);

    let mut snapshots = Vec::new();
    let mut energy = Vec::new();
    // Per-step dissipation rates for the Simpson ledger.
    let mut rates: Vec<f64> = Vec::with_capacity(nsteps + 1);

    let diag = |sp: &Spectral2d, what: &Hat| -> (f64, f64) {
        let (u, v) = sp.velocity_from_vorticity(what);
        let kin: f64 = u
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a * a + b * b) * cellvol)
            .sum();
        let g = sp.grad_norm(&u, &v);
        let dis: f64 = g.iter().map(|&d| d * d * cellvol).sum();
        (kin, dis)
    };

    let (kin0, dis0) = diag(sp, &what);
    rates.push(dis0);
    energy.push(EnergyRow {
        t: 0.0,
        kinetic: kin0,
        dissipation_rate: dis0,
        dissipation_integral: 0.0,
    });
    snapshots.push(Snapshot2d::from_vorticity(sp, 0.0, &what));

    for step in 1..=nsteps {
        // CFL guard on the pre-step velocity.
        let (u, v) = sp.velocity_from_vorticity(&what);
        let vmax = u
            .iter()
            .zip(&v)
            .fold(0.0f64, |m, (&a, &b)| m.max((a * a + b * b).sqrt()));
        if vmax * cfg.dt / h > 0.5 {
            return Err(Error::Config(format!(
                "CFL violation at step {step}: max|u| dt / h = {}",
                vmax * cfg.dt / h
            )));
        }
        what = sp.step(&what, cfg.nu, cfg.dt);
        let t = step as f64 * cfg.dt;
        let (kin, dis) = diag(sp, &what);
        rates.push(dis);
        let integral = simpson_integral(&rates, cfg.dt);
        energy.push(EnergyRow {
            t,
            kinetic: kin,
            dissipation_rate: dis,
            dissipation_integral: integral,
        });
        if step % cfg.snap_every == 0 || step == nsteps {
            snapshots.push(Snapshot2d::from_vorticity(sp, t, &what));
        }
    }
    Ok(SolveOutput { snapshots, energy })
}

/// Composite Simpson over uniformly spaced samples (trapezoid on a
/// trailing odd interval).
fn simpson_integral(samples: &[f64], dt: f64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let pairs = (n - 1) / 2;
    for p in 0..pairs {
        let i = 2 * p;
        acc += dt / 3.0 * (samples[i] + 4.0 * samples[i + 1] + samples[i + 2]);
    }
    if (n - 1) % 2 == 1 {
        acc += 0.5 * dt * (samples[n - 2] + samples[n - 1]);
    }
    acc
}
