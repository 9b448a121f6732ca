//! Drift-skewed (Lagrangian) machinery: mollified drifts, backward flow
//! maps, skewed parabolic cylinders, admissibility, the cutoff radii
//! r_adm / r_int / rbar, and the capped scale and averaging operators.

use crate::error::{Error, Result};
use crate::fft::SpectralConv;
use crate::field::{Extension, ScalarField, VectorField};
use crate::geom::boundary_distance;
use crate::grid::{GridSpec, Point, TimeSpec, MAX_RANK};
use crate::ladder::ScaleLadder;
use crate::multiscale::{self, refine};
use crate::summer::FieldSummer;
use rayon::prelude::*;
use std::collections::HashMap;

/// The standard radial bump `c * exp(1/(|x|^2 - 1))` on the unit ball,
/// normalized to unit mass in dimension `dim`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub dim: usize,
    /// Continuum normalization constant `c`.
    pub normalization: f64,
    /// `sup phi = c / e`, recorded for the trajectory-separation bounds.
    pub sup: f64,
}

fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 / (r * r - 1.0)).exp()
    }
}

impl Mollifier {
    pub fn standard(dim: usize) -> Self {
        // Radial quadrature of the bump over the unit ball (Simpson).
        let surface = match dim {
            1 => 2.0,
            2 => 2.0 * std::f64::consts::PI,
            3 => 4.0 * std::f64::consts::PI,
            _ => panic!("unsupported dimension {dim}"),
        };
        let m = 20_000usize;
        let dr = 1.0 / m as f64;
        let mut acc = 0.0;
        for k in 0..m {
            let a = k as f64 * dr;
            let mid = a + 0.5 * dr;
            let b = a + dr;
            let f = |r: f64| r.powi(dim as i32 - 1) * bump(r);
            acc += dr / 6.0 * (f(a) + 4.0 * f(mid) + f(b));
        }
        let mass = surface * acc;
        let normalization = 1.0 / mass;
        Mollifier {
            dim,
            normalization,
            sup: normalization * (-1.0f64).exp(),
        }
    }

    /// Pointwise value of `phi_rho(y) = rho^-D c * bump(|y| / rho)`.
    pub fn scaled(&self, rho: f64, dist: f64) -> f64 {
        self.normalization * bump(dist / rho) / rho.powi(self.dim as i32)
    }
}

/// Admissibility threshold. The default keeps the (c1, c2) = (1, 2)
/// trajectory-separation bound in force with a 10% margin:
/// `eta0 = 0.9 log(2) / (sup(phi) 4^D)`.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityParams {
    pub eta0: f64,
}

impl AdmissibilityParams {
    pub fn default_for(dim: usize) -> Self {
        let phi = Mollifier::standard(dim);
        AdmissibilityParams {
            eta0: 0.9 * std::f64::consts::LN_2 / (phi.sup * 4.0f64.powi(dim as i32)),
        }
    }
}

/// Discrete mollification kernel: the bump sampled at cell offsets within
/// `rho`, normalized to unit discrete mass.
fn kernel_offsets(grid: &GridSpec, moll: &Mollifier, rho: f64) -> Vec<(Vec<i64>, f64)> {
    let r = grid.rank();
    let radii: Vec<i64> = (0..r).map(|a| (rho / grid.h(a)).floor() as i64).collect();
    let mut out = Vec::new();
    let mut idx = vec![0i64; r];
    fn walk(
        a: usize,
        radii: &[i64],
        idx: &mut Vec<i64>,
        grid: &GridSpec,
        moll: &Mollifier,
        rho: f64,
        out: &mut Vec<(Vec<i64>, f64)>,
    ) {
        if a == radii.len() {
            let mut d2 = 0.0;
            for (ax, &i) in idx.iter().enumerate() {
                let d = i as f64 * grid.h(ax);
                d2 += d * d;
            }
            let v = moll.scaled(rho, d2.sqrt());
            if v > 0.0 {
                out.push((idx.clone(), v));
            }
            return;
        }
        for i in -radii[a]..=radii[a] {
            idx[a] = i;
            walk(a + 1, radii, idx, grid, moll, rho, out);
        }
    }
    walk(0, &radii, &mut idx, grid, moll, rho, &mut out);
    if out.is_empty() {
        // Radius below the grid: degenerate to the identity kernel.
        out.push((vec![0i64; r], 1.0));
    }
    let total: f64 = out.iter().map(|(_, v)| v).sum();
    for (_, v) in out.iter_mut() {
        *v /= total;
    }
    out
}

/// Spatially mollify a drift slice by slice: convolution against the
/// normalized bump of radius `rho`. Constants are preserved exactly on the
/// torus (the discrete kernel has unit mass); outside the box the drift is
/// zero-extended.
pub fn mollify_drift(b: &VectorField, rho: f64) -> VectorField {
    let g = b.grid().clone();
    let moll = Mollifier::standard(g.rank());
    let offsets = kernel_offsets(&g, &moll, rho);
    let nt = b.comp(0).nt();
    let ncell = g.len();

    let mut comps = Vec::with_capacity(b.dim());
    if g.fully_periodic() {
        // Kernel as a grid function, convolved spectrally per slice.
        let mut kern = vec![0.0; ncell];
        for (off, v) in &offsets {
            let mut idx = [0usize; MAX_RANK];
            for (a, &o) in off.iter().enumerate() {
                idx[a] = o.rem_euclid(g.n(a) as i64) as usize;
            }
            kern[g.linear(idx)] += v;
        }
        for c in 0..b.dim() {
            let src = b.comp(c);
            let mut data = Vec::with_capacity(nt * ncell);
            for j in 0..nt {
                let conv = SpectralConv::new(&g, src.slice(j));
                data.extend_from_slice(&conv.convolve_grid(&kern));
            }
            comps.push(
                ScalarField::new(g.clone(), src.time.clone(), src.extension, data)
                    .expect("layout"),
            );
        }
    } else {
        for c in 0..b.dim() {
            let src = b.comp(c);
            let mut data = vec![0.0; nt * ncell];
            for j in 0..nt {
                let slice = src.slice(j);
                let vals: Vec<f64> = (0..ncell)
                    .into_par_iter()
                    .map(|k| {
                        let idx = g.unlinear(k);
                        let mut acc = 0.0;
                        'off: for (off, w) in &offsets {
                            let mut src_idx = [0usize; MAX_RANK];
                            for a in 0..g.rank() {
                                let i = idx[a] as i64 - off[a];
                                if i < 0 || i >= g.n(a) as i64 {
                                    if g.is_periodic(a) {
                                        src_idx[a] = i.rem_euclid(g.n(a) as i64) as usize;
                                    } else {
                                        continue 'off; // zero extension
                                    }
                                } else {
                                    src_idx[a] = i as usize;
                                }
                            }
                            acc += w * slice[g.linear(src_idx)];
                        }
                        acc
                    })
                    .collect();
                data[j * ncell..(j + 1) * ncell].copy_from_slice(&vals);
            }
            comps.push(
                ScalarField::new(g.clone(), src.time.clone(), src.extension, data)
                    .expect("layout"),
            );
        }
    }
    VectorField::new(comps).expect("components")
}

fn rk4_step(b: &VectorField, t: f64, x: &Point, h: f64) -> Point {
    let rank = b.grid().rank();
    let k1 = b.eval(t, x);
    let mut p2 = *x;
    for a in 0..rank {
        p2[a] += 0.5 * h * k1[a];
    }
    let k2 = b.eval(t + 0.5 * h, &p2);
    let mut p3 = *x;
    for a in 0..rank {
        p3[a] += 0.5 * h * k2[a];
    }
    let k3 = b.eval(t + 0.5 * h, &p3);
    let mut p4 = *x;
    for a in 0..rank {
        p4[a] += h * k3[a];
    }
    let k4 = b.eval(t + h, &p4);
    let mut out = *x;
    for a in 0..rank {
        out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
    out
}

fn integrate_to(b: &VectorField, rho: f64, from: f64, pos: &mut Point, to: f64) {
    let span = (from - to).abs();
    if span == 0.0 {
        return;
    }
    let max_h = (rho * rho / 16.0).min(span);
    let nsub = (span / max_h).ceil() as usize;
    let h = (to - from) / nsub as f64;
    let mut t = from;
    for _ in 0..nsub {
        *pos = rk4_step(b, t, pos, h);
        t += h;
    }
}

/// Backward flow of the mollified drift: solves `dX/ds = b_rho(s, X)` from
/// `X(t) = x` down to `s` with classical 4th-order steps of size at most
/// `rho^2 / 16`.
pub fn flow_map_mollified(b_rho: &VectorField, rho: f64, t: f64, x: &Point, s: f64) -> Point {
    let mut pos = *x;
    integrate_to(b_rho, rho, t, &mut pos, s);
    pos
}

/// One-shot variant that mollifies internally.
pub fn flow_map(b: &VectorField, rho: f64, t: f64, x: &Point, s: f64) -> Point {
    let b_rho = mollify_drift(b, rho);
    flow_map_mollified(&b_rho, rho, t, x, s)
}

/// Trajectory positions at the given times, starting from `X(t) = x` and
/// integrating monotonically backward through them.
pub fn backbone(
    b_rho: &VectorField,
    rho: f64,
    t: f64,
    x: &Point,
    times: &[f64],
) -> Vec<(f64, Point)> {
    let mut order: Vec<f64> = times.to_vec();
    order.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut out = Vec::with_capacity(order.len());
    let mut pos = *x;
    let mut cur = t;
    for s in order {
        let s_eff = s.min(t);
        integrate_to(b_rho, rho, cur, &mut pos, s_eff);
        cur = s_eff;
        out.push((s, pos));
    }
    out
}

/// A skewed parabolic cylinder with its trajectory backbone.
#[derive(Debug, Clone)]
pub struct SkewedCylinder {
    pub t: f64,
    pub x: Point,
    pub rho: f64,
    /// `(s, X_rho(s; t, x))` samples, descending in s, at least 16 substeps.
    pub backbone: Vec<(f64, Point)>,
    pub admissible: bool,
    pub contained: bool,
}

/// Precomputed drift machinery shared across anchors: the per-slice
/// maximal function of the drift-gradient norm and the mollified drift for
/// every ladder rung.
pub struct DriftContext {
    pub b: VectorField,
    pub params: AdmissibilityParams,
    /// Per-slice spatial maximal function of the Frobenius norm of the
    /// finite-difference Jacobian of the drift.
    pub m_grad: ScalarField,
    m_grad_summer: FieldSummer,
    mollified: HashMap<u64, VectorField>,
    pub is_zero: bool,
    t_lo: f64,
}

impl DriftContext {
    pub fn prepare(b: &VectorField, ladder: &ScaleLadder, params: AdmissibilityParams) -> Self {
        let is_zero = b.comps().iter().all(|c| c.data().iter().all(|&v| v == 0.0));
        let nt = b.comp(0).nt();
        let g = b.grid().clone();
        let mgrad_ladder = ScaleLadder::default_for(&g);
        let mut mdata = Vec::with_capacity(nt * g.len());
        for j in 0..nt {
            let jac = b.jacobian_frobenius(j);
            let m = multiscale::maximal_function(&jac, &mgrad_ladder);
            mdata.extend_from_slice(m.slice(0));
        }
        let m_grad =
            ScalarField::new(g.clone(), b.time().cloned(), Extension::ZeroOutside, mdata)
                .expect("layout");
        let m_grad_summer = FieldSummer::new(&m_grad);
        let mut mollified = HashMap::new();
        if !is_zero {
            let rungs = ladder.rungs();
            let molls: Vec<(u64, VectorField)> = rungs
                .par_iter()
                .map(|&rho| (rho.to_bits(), mollify_drift(b, rho)))
                .collect();
            mollified.extend(molls);
        }
        let t_lo = b
            .time()
            .map(|ts| (ts.t0 - 0.5 * ts.dt).max(0.0))
            .unwrap_or(0.0);
        DriftContext {
            b: b.clone(),
            params,
            m_grad,
            m_grad_summer,
            mollified,
            is_zero,
            t_lo,
        }
    }

    pub fn zero(grid: &GridSpec, time: Option<TimeSpec>, params: AdmissibilityParams) -> Self {
        let b = VectorField::zeros(grid.clone(), time, Extension::ZeroOutside);
        let ladder = ScaleLadder::default_for(grid);
        Self::prepare(&b, &ladder, params)
    }

    /// Mollified drift for radius `rho`: exact rung hit, or the cached rung
    /// nearest in log scale (bisection radii reuse the bracketing rung;
    /// mollification varies slowly within one ladder step).
    pub fn mollified(&self, rho: f64) -> Option<&VectorField> {
        if self.is_zero {
            return None;
        }
        if let Some(v) = self.mollified.get(&rho.to_bits()) {
            return Some(v);
        }
        let mut best: Option<(f64, &VectorField)> = None;
        for (k, v) in &self.mollified {
            let r = f64::from_bits(*k);
            let d = (r / rho).ln().abs();
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, v));
            }
        }
        best.map(|(_, v)| v)
    }

    /// Backbone positions at the given times (identity when the drift is 0).
    fn traj(&self, rho: f64, t: f64, x: &Point, times: &[f64]) -> Vec<(f64, Point)> {
        match self.mollified(rho) {
            None => times.iter().map(|&s| (s, *x)).collect(),
            Some(b_rho) => backbone(b_rho, rho, t, x, times),
        }
    }
}

/// Average of `f` over the skewed cylinder `union_s B_rho(X_rho(s; t, x))`,
/// normalized by `rho^2 |B_rho|`. With zero drift this is exactly the
/// straight-cylinder average.
pub fn skewed_cyl_average(
    fs: &FieldSummer,
    ctx: &DriftContext,
    t: f64,
    x: &Point,
    rho: f64,
) -> f64 {
    if ctx.is_zero {
        return fs.cyl_average(t, x, rho);
    }
    let window = fs.window(t, rho);
    let times: Vec<f64> = window.iter().map(|&(j, _)| fs.time(j)).collect();
    let traj = ctx.traj(rho, t, x, &times);
    let lookup: HashMap<u64, Point> = traj.iter().map(|&(s, p)| (s.to_bits(), p)).collect();
    let mut acc = 0.0;
    for &(j, w) in &window {
        let s = fs.time(j);
        let c = lookup[&s.to_bits()];
        acc += w * fs.slice(j).ball_average(&c, rho);
    }
    acc / (rho * rho)
}

/// Admissibility of the skewed cylinder: the average of `M(grad b)` over it
/// is at most `eta0 rho^-2`. Returns the verdict and the measured average.
pub fn admissible(ctx: &DriftContext, t: f64, x: &Point, rho: f64) -> (bool, f64) {
    let avg = skewed_cyl_average(&ctx.m_grad_summer, ctx, t, x, rho);
    (avg <= ctx.params.eta0 / (rho * rho), avg)
}

/// Whether the skewed cylinder stays inside `(0, T) x Omega`.
fn contained(ctx: &DriftContext, grid: &GridSpec, t: f64, x: &Point, rho: f64) -> bool {
    if t - rho * rho < ctx.t_lo {
        return false;
    }
    if grid.fully_periodic() {
        return true;
    }
    let window = ctx.m_grad_summer.window(t, rho);
    let times: Vec<f64> = window
        .iter()
        .map(|&(j, _)| ctx.m_grad_summer.time(j))
        .collect();
    let traj = ctx.traj(rho, t, x, &times);
    traj.iter().all(|(_, p)| boundary_distance(grid, p) >= rho)
}

/// Build a skewed cylinder with backbone samples and verdicts.
pub fn skewed_cylinder(
    ctx: &DriftContext,
    grid: &GridSpec,
    t: f64,
    x: &Point,
    rho: f64,
) -> SkewedCylinder {
    let nsub = 16usize.max((rho * rho / ctx.m_grad_summer.dt * 4.0).ceil() as usize);
    let times: Vec<f64> = (0..=nsub)
        .map(|k| t - rho * rho * k as f64 / nsub as f64)
        .collect();
    let bb = ctx.traj(rho, t, x, &times);
    let (adm, _) = admissible(ctx, t, x, rho);
    SkewedCylinder {
        t,
        x: *x,
        rho,
        backbone: bb,
        admissible: adm,
        contained: contained(ctx, grid, t, x, rho),
    }
}

/// Largest-scale cutoffs at one anchor. `truncated` marks values that never
/// failed within the ladder and are reported as `+inf`.
#[derive(Debug, Clone, Copy)]
pub struct CutoffRadii {
    pub r_int: f64,
    pub r_int_truncated: bool,
    pub r_adm: f64,
    pub r_adm_truncated: bool,
    pub r_bar: f64,
}

/// Smallest ladder radius at which the cylinder exits the domain (`r_int`)
/// or fails admissibility (`r_adm`), each refined by bisection; `r_bar` is
/// their minimum. On boxes the result satisfies
/// `min(r_int, r_adm) >= min(r_star, r_adm)` up to one ladder step.
pub fn cutoff_radii(
    ctx: &DriftContext,
    grid: &GridSpec,
    ladder: &ScaleLadder,
    t: f64,
    x: &Point,
) -> CutoffRadii {
    let rungs = ladder.rungs();
    let scan = |fail: &dyn Fn(f64) -> bool| -> (f64, bool) {
        let mut prev: Option<f64> = None;
        for &rho in &rungs {
            if fail(rho) {
                return match prev {
                    None => (rho, false),
                    Some(lo0) => {
                        let (mut a, mut b) = (lo0, rho);
                        for _ in 0..ladder.bisections {
                            let mid = (a * b).sqrt();
                            if fail(mid) {
                                b = mid;
                            } else {
                                a = mid;
                            }
                        }
                        ((a * b).sqrt(), false)
                    }
                };
            }
            prev = Some(rho);
        }
        (f64::INFINITY, true)
    };

    let (r_int, r_int_truncated) = scan(&|rho| !contained(ctx, grid, t, x, rho));
    let (r_adm, r_adm_truncated) = if ctx.is_zero {
        (f64::INFINITY, true)
    } else {
        scan(&|rho| !admissible(ctx, t, x, rho).0)
    };

    // On boxes the interior cutoff dominates the normalized parabolic
    // boundary distance wherever admissibility allows:
    // min(r_int, r_adm) >= min(r_star, r_adm), up to one ladder step and
    // one cell of exit-detection resolution.
    #[cfg(debug_assertions)]
    if !grid.fully_periodic() && t > ctx.t_lo {
        if let Ok(rs) = crate::geom::r_star(
            t - ctx.t_lo,
            x,
            grid,
            0.0,
            grid.min_extent(),
        ) {
            let lhs = r_int.min(r_adm) * ladder.step_ratio() + grid.max_h();
            debug_assert!(
                lhs >= rs.min(r_adm),
                "cutoff below the boundary distance: min({r_int}, {r_adm}) < min({rs}, {r_adm})"
            );
        }
    }

    CutoffRadii {
        r_int,
        r_int_truncated,
        r_adm,
        r_adm_truncated,
        r_bar: r_int.min(r_adm),
    }
}

/// Partition label of a capped scan: whether the capped scale hit the
/// cutoff (`Eq`) or the threshold fired strictly below it (`Lt`), at
/// singular-candidate or regular scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CappedLabel {
    SingEq,
    SingLt,
    RegEq,
    RegLt,
}

#[derive(Debug, Clone, Copy)]
pub struct CappedSample {
    /// Capped scale `min(S_alpha f, rbar)`.
    pub s: f64,
    /// Below-cutoff average `s^-alpha` (zero in the equality case).
    pub a_lt: f64,
    /// At-cutoff average `f_rbar` (zero in the strict case).
    pub a_eq: f64,
    pub label: CappedLabel,
    pub radii: CutoffRadii,
    /// True when the cap exceeded the ladder; `s` is then the raw cap.
    pub cap_truncated: bool,
}

impl CappedSample {
    /// The capped averaging operator: `a_lt + a_eq` by construction.
    pub fn a_wedge(&self) -> f64 {
        self.a_lt + self.a_eq
    }
}

/// Capped scale operator at one anchor: scans the ladder up to `rbar`,
/// bisects threshold crossings, and reads equality with the cutoff within
/// one ladder step (exact equality is measure-zero numerically).
pub fn capped_scale_at_one(
    fs: &FieldSummer,
    ctx: &DriftContext,
    grid: &GridSpec,
    alpha: f64,
    ladder: &ScaleLadder,
    t: f64,
    x: &Point,
) -> CappedSample {
    let radii = cutoff_radii(ctx, grid, ladder, t, x);
    capped_scale_with_radii(fs, ctx, alpha, ladder, t, x, radii)
}

/// Same scan with precomputed cutoff radii (they depend only on the drift,
/// so several pivots sharing a drift reuse them).
pub fn capped_scale_with_radii(
    fs: &FieldSummer,
    ctx: &DriftContext,
    alpha: f64,
    ladder: &ScaleLadder,
    t: f64,
    x: &Point,
    radii: CutoffRadii,
) -> CappedSample {
    let cap = radii.r_bar;
    let rungs = ladder.rungs();
    let mut avg = |rho: f64| skewed_cyl_average(fs, ctx, t, x, rho);

    if cap <= rungs[0] {
        // The cutoff sits at or below the resolution floor.
        let a_eq = if cap > 0.0 && cap.is_finite() {
            avg(cap)
        } else {
            f64::INFINITY
        };
        return CappedSample {
            s: cap,
            a_lt: 0.0,
            a_eq,
            label: CappedLabel::SingEq,
            radii,
            cap_truncated: false,
        };
    }

    let eq_tol = ladder.step_ratio();
    let mut prev: Option<f64> = None;
    for &rho in &rungs {
        if rho > cap {
            break;
        }
        if avg(rho) >= rho.powf(-alpha) {
            if prev.is_none() {
                // Triggered at the resolution floor: singular candidate.
                return CappedSample {
                    s: rungs[0],
                    a_lt: rungs[0].powf(-alpha),
                    a_eq: 0.0,
                    label: CappedLabel::SingLt,
                    radii,
                    cap_truncated: false,
                };
            }
            let (lo, hi) = refine(&mut avg, alpha, prev.unwrap(), rho, ladder.bisections);
            let s = (lo * hi).sqrt();
            return finish_capped(s, cap, alpha, &mut avg, radii, eq_tol);
        }
        prev = Some(rho);
    }

    // No rung below the cap triggered. If the cap is within the ladder,
    // check for a crossing between the last checked rung and the cap.
    if cap.is_finite() && cap <= *rungs.last().unwrap() {
        if let Some(lo0) = prev {
            if avg(cap) >= cap.powf(-alpha) {
                let (lo, hi) = refine(&mut avg, alpha, lo0, cap, ladder.bisections);
                let s = (lo * hi).sqrt();
                return finish_capped(s, cap, alpha, &mut avg, radii, eq_tol);
            }
        }
        let a_eq = avg(cap);
        return CappedSample {
            s: cap,
            a_lt: 0.0,
            a_eq,
            label: CappedLabel::RegEq,
            radii,
            cap_truncated: false,
        };
    }

    // Cap beyond the ladder: report it with a truncation flag.
    let a_eq = if cap.is_finite() { avg(cap) } else { 0.0 };
    CappedSample {
        s: cap,
        a_lt: 0.0,
        a_eq,
        label: CappedLabel::RegEq,
        radii,
        cap_truncated: true,
    }
}

fn finish_capped(
    s: f64,
    cap: f64,
    alpha: f64,
    avg: &mut impl FnMut(f64) -> f64,
    radii: CutoffRadii,
    eq_tol: f64,
) -> CappedSample {
    if cap.is_finite() && s * eq_tol >= cap {
        // Within one ladder step of the cutoff: equality case.
        CappedSample {
            s: cap,
            a_lt: 0.0,
            a_eq: avg(cap),
            label: CappedLabel::RegEq,
            radii,
            cap_truncated: false,
        }
    } else {
        CappedSample {
            s,
            a_lt: s.powf(-alpha),
            a_eq: 0.0,
            label: CappedLabel::RegLt,
            radii,
            cap_truncated: false,
        }
    }
}

/// Cutoff radii at a list of anchors (parallel, deterministic).
pub fn cutoff_radii_batch(
    ctx: &DriftContext,
    grid: &GridSpec,
    ladder: &ScaleLadder,
    anchors: &[(f64, Point)],
) -> Vec<CutoffRadii> {
    anchors
        .par_iter()
        .map(|(t, x)| cutoff_radii(ctx, grid, ladder, *t, x))
        .collect()
}

/// Capped scale operator at anchors with shared precomputed radii.
pub fn capped_scale_at_shared(
    f: &ScalarField,
    ctx: &DriftContext,
    alpha: f64,
    ladder: &ScaleLadder,
    anchors: &[(f64, Point)],
    radii: &[CutoffRadii],
) -> Result<Vec<CappedSample>> {
    if !(alpha > 0.0) {
        return Err(Error::Parameter("alpha must be positive".into()));
    }
    if f.time.is_none() {
        return Err(Error::Domain("capped operator needs a spacetime field".into()));
    }
    let fs = FieldSummer::new(f);
    Ok(anchors
        .par_iter()
        .zip(radii)
        .map(|((t, x), r)| capped_scale_with_radii(&fs, ctx, alpha, ladder, *t, x, *r))
        .collect())
}

/// Capped scale operator at a list of anchors (parallel, deterministic).
pub fn capped_scale_at(
    f: &ScalarField,
    ctx: &DriftContext,
    alpha: f64,
    ladder: &ScaleLadder,
    anchors: &[(f64, Point)],
) -> Result<Vec<CappedSample>> {
    if !(alpha > 0.0) {
        return Err(Error::Parameter("alpha must be positive".into()));
    }
    if f.time.is_none() {
        return Err(Error::Domain("capped operator needs a spacetime field".into()));
    }
    let fs = FieldSummer::new(f);
    let grid = f.grid.clone();
    Ok(anchors
        .par_iter()
        .map(|(t, x)| capped_scale_at_one(&fs, ctx, &grid, alpha, ladder, *t, x))
        .collect())
}

/// Capped scale operator over the full spacetime grid.
pub struct CappedScaleField {
    pub alpha: f64,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub samples: Vec<CappedSample>,
}

pub fn capped_scale_op(
    f: &ScalarField,
    ctx: &DriftContext,
    alpha: f64,
    ladder: &ScaleLadder,
) -> Result<CappedScaleField> {
    let ts = f
        .time
        .clone()
        .ok_or_else(|| Error::Domain("capped operator needs a spacetime field".into()))?;
    let g = f.grid.clone();
    let ncell = g.len();
    let anchors: Vec<(f64, Point)> = (0..ts.nt * ncell)
        .map(|p| {
            let (j, k) = (p / ncell, p % ncell);
            (ts.time(j), g.point_of(g.unlinear(k)))
        })
        .collect();
    let samples = capped_scale_at(f, ctx, alpha, ladder, &anchors)?;
    Ok(CappedScaleField {
        alpha,
        grid: g,
        time: ts,
        samples,
    })
}

/// Trajectory-separation check: companion trajectories seeded within
/// `c1 rho` of the backbone stay within `c2 rho` over the cylinder span.
/// Returns the maximum separation ratio `max_s |X_*(s) - X(s)| / rho`
/// over the random trials.
pub fn trajectory_separation_check(
    ctx: &DriftContext,
    cyl: &SkewedCylinder,
    c1: f64,
    c2: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    if !(c2 > c1 && c1 > 0.0) {
        return Err(Error::Parameter("need c2 > c1 > 0".into()));
    }
    let dim = ctx.b.grid().rank();
    let phi = Mollifier::standard(dim);
    let lhs = phi.sup * (c2 + 2.0).powi(dim as i32) * ctx.params.eta0;
    if lhs >= (c2 / c1).ln() {
        return Err(Error::Parameter(format!(
            "separation precondition violated: {lhs} >= log({c2}/{c1})"
        )));
    }
    if !cyl.admissible {
        return Err(Error::Parameter("cylinder is not admissible".into()));
    }

    let rho = cyl.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let g = ctx.b.grid().clone();
    for _ in 0..trials {
        // Random interior time and offset strictly inside c1 rho.
        let frac = rng.gen_range(0.05..0.95);
        let t_star = cyl.t - frac * rho * rho;
        let r = rng.gen_range(0.0..c1 * rho * 0.999);
        let mut offset = [0.0f64; MAX_RANK];
        let mut norm = 0.0;
        for v in offset.iter_mut().take(dim) {
            *v = rng.gen_range(-1.0..1.0);
            norm += *v * *v;
        }
        let norm = norm.sqrt().max(1e-300);
        for v in offset.iter_mut().take(dim) {
            *v *= r / norm;
        }
        let base_at = ctx.traj(rho, cyl.t, &cyl.x, &[t_star])[0].1;
        let mut x_star = base_at;
        for a in 0..dim {
            x_star[a] += offset[a];
        }
        // Compare both trajectories on a shared sampling of the span.
        let nsamp = 32;
        let times: Vec<f64> = (0..=nsamp)
            .map(|k| cyl.t - rho * rho * k as f64 / nsamp as f64)
            .collect();
        let main = ctx.traj(rho, cyl.t, &cyl.x, &times);
        let companion = ctx.traj(rho, t_star, &x_star, &times);
        for (m, c) in main.iter().zip(&companion) {
            if c.0 > t_star {
                continue; // companion only exists backward from t_star
            }
            let d = g.distance(&m.1, &c.1);
            worst = worst.max(d / rho);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiscale::AvgMode;

    fn torus_drift(n: usize, nt: usize, f: impl Fn(f64, &Point) -> [f64; 2]) -> VectorField {
        let g = GridSpec::torus(2, n).unwrap();
        let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64).unwrap();
        let cx =
            ScalarField::from_fn_spacetime(g.clone(), ts.clone(), Extension::ZeroOutside, |t, p| {
                f(t, p)[0]
            });
        let cy = ScalarField::from_fn_spacetime(g, ts, Extension::ZeroOutside, |t, p| f(t, p)[1]);
        VectorField::new(vec![cx, cy]).unwrap()
    }

    #[test]
    fn mollifier_unit_mass_on_grid() {
        let g = GridSpec::torus(2, 64).unwrap();
        let moll = Mollifier::standard(2);
        let offs = kernel_offsets(&g, &moll, 0.2);
        let total: f64 = offs.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Unnormalized discrete mass is already close to 1.
        let raw: f64 = offs
            .iter()
            .map(|(off, _)| {
                let d2: f64 = off.iter().map(|&i| (i as f64 / 64.0).powi(2)).sum();
                moll.scaled(0.2, d2.sqrt()) * g.cell_vol()
            })
            .sum();
        assert!((raw - 1.0).abs() < 0.05, "raw mass {raw}");
    }

    #[test]
    fn mollify_constant_preserved() {
        let b = torus_drift(32, 4, |_, _| [2.5, -1.0]);
        let m = mollify_drift(&b, 0.2);
        for c in 0..2 {
            let target = if c == 0 { 2.5 } else { -1.0 };
            for &v in m.comp(c).data() {
                assert!((v - target).abs() < 1e-10, "got {v}");
            }
        }
    }

    #[test]
    fn mollify_sine_spectral_oracle() {
        // b(x) = sin(2 pi x) on the 1-D torus: convolution with the radial
        // kernel multiplies the mode by sum_k w_k cos(2 pi y_k).
        let n = 256;
        let g = GridSpec::torus(1, n).unwrap();
        let ts = TimeSpec::new(1, 1.0, 0.0).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let c = ScalarField::from_fn_spacetime(g.clone(), ts, Extension::ZeroOutside, |_, p| {
            (tau * p[0]).sin()
        });
        let b = VectorField::new(vec![c]).unwrap();
        let rho = 0.25;
        let m = mollify_drift(&b, rho);
        let moll = Mollifier::standard(1);
        let offs = kernel_offsets(&g, &moll, rho);
        let damp: f64 = offs
            .iter()
            .map(|(off, w)| w * (tau * off[0] as f64 / n as f64).cos())
            .sum();
        for k in 0..n {
            let x = g.center(0, k);
            let expect = damp * (tau * x).sin();
            let got = m.comp(0).data()[k];
            assert!((got - expect).abs() < 1e-6, "x={x}: {got} vs {expect}");
        }
    }

    #[test]
    fn flow_zero_and_constant_drift() {
        let b0 = torus_drift(16, 8, |_, _| [0.0, 0.0]);
        let x = [0.3, 0.7, 0.0];
        let p = flow_map(&b0, 0.2, 0.5, &x, 0.46);
        assert_eq!(p[0], x[0]);
        assert_eq!(p[1], x[1]);

        let bc = torus_drift(16, 8, |_, _| [0.25, -0.5]);
        let t = 0.5;
        let s = 0.46;
        let p = flow_map(&bc, 0.2, t, &x, s);
        assert!((p[0] - (x[0] + 0.25 * (s - t))).abs() < 1e-10);
        assert!((p[1] - (x[1] - 0.5 * (s - t))).abs() < 1e-10);
    }

    #[test]
    fn flow_rigid_rotation_oracle() {
        // b = omega * (-(y - c), x - c) about the domain center: circles.
        let omega = 1.5;
        let cx = 0.5;
        let b = torus_drift(64, 32, move |_, p| {
            [-omega * (p[1] - cx), omega * (p[0] - cx)]
        });
        let rho = 0.25;
        let b_rho = mollify_drift(&b, rho);
        // Start near the center where the torus wrap does not distort the
        // linear field within the mollification radius.
        let x = [0.56, 0.52, 0.0];
        let t = 0.6;
        let s = t - rho * rho;
        let got = flow_map_mollified(&b_rho, rho, t, &x, s);
        let ang = omega * (s - t);
        let (dx, dy) = (x[0] - cx, x[1] - cx);
        let expect = [
            cx + ang.cos() * dx - ang.sin() * dy,
            cx + ang.sin() * dx + ang.cos() * dy,
        ];
        let err = ((got[0] - expect[0]).powi(2) + (got[1] - expect[1]).powi(2)).sqrt();
        assert!(err < 1e-4, "rotation error {err}");
    }

    #[test]
    fn skewed_reduces_to_straight_with_zero_drift() {
        let g = GridSpec::torus(2, 24).unwrap();
        let ts = TimeSpec::new(24, 1.0 / 24.0, 0.5 / 24.0).unwrap();
        let f =
            ScalarField::from_fn_spacetime(g.clone(), ts.clone(), Extension::ZeroOutside, |t, p| {
                (20.0 * t + 11.0 * p[0] + 5.0 * p[1]).sin().abs() + 0.2
            });
        let ladder = ScaleLadder::new(1.0 / 24.0, 0.49, 8, 4).unwrap();
        let params = AdmissibilityParams::default_for(2);
        let ctx = DriftContext::zero(&g, Some(ts), params);
        let fs = FieldSummer::new(&f);
        for &(t, x0, x1, rho) in &[(0.7, 0.3, 0.4, 0.2), (0.9, 0.81, 0.13, 0.3)] {
            let x = [x0, x1, 0.0];
            let a = skewed_cyl_average(&fs, &ctx, t, &x, rho);
            let b = fs.cyl_average(t, &x, rho);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        // Capped operator with zero drift = plain scale op capped at r_int.
        let anchors = [(0.7, [0.3, 0.4, 0.0]), (0.95, [0.1, 0.9, 0.0])];
        let capped = capped_scale_at(&f, &ctx, 2.0, &ladder, &anchors).unwrap();
        let plain = multiscale::scale_at(&f, 2.0, &ladder, AvgMode::Spacetime, &anchors).unwrap();
        for (c, p) in capped.iter().zip(&plain) {
            let r_int = c.radii.r_int;
            if p.s < r_int / ladder.step_ratio() {
                assert!(
                    (c.s - p.s).abs() <= 1e-12 * p.s,
                    "capped {} vs plain {}",
                    c.s,
                    p.s
                );
            }
        }
    }

    #[test]
    fn admissibility_constant_gradient_closed_form() {
        // Linear shear on a box: |grad b| = kappa in the interior, so the
        // verdict flips near rho = sqrt(eta0 / kappa).
        let n = 48;
        let g = GridSpec::boxed(&[n, n], &[1.0, 1.0]).unwrap();
        let ts = TimeSpec::new(16, 1.0 / 16.0, 0.5 / 16.0).unwrap();
        let kappa = 0.6;
        let cx =
            ScalarField::from_fn_spacetime(g.clone(), ts.clone(), Extension::ZeroOutside, |_, p| {
                kappa * (p[1] - 0.5)
            });
        let cy = ScalarField::from_fn_spacetime(g.clone(), ts, Extension::ZeroOutside, |_, _| 0.0);
        let b = VectorField::new(vec![cx, cy]).unwrap();
        let params = AdmissibilityParams::default_for(2);
        let ladder = ScaleLadder::new(1.0 / 48.0, 0.4, 8, 4).unwrap();
        let ctx = DriftContext::prepare(&b, &ladder, params);
        let rho_crit = (params.eta0 / kappa).sqrt();
        let t = 0.8;
        let x = [0.5, 0.5, 0.0];
        let (ok_small, avg_small) = admissible(&ctx, t, &x, rho_crit * 0.7);
        let (ok_big, _) = admissible(&ctx, t, &x, rho_crit * 1.4);
        assert!(ok_small, "small rho should be admissible, avg {avg_small}");
        assert!(!ok_big, "large rho should fail");
        assert!((avg_small - kappa).abs() < kappa * 0.25, "avg {avg_small}");
    }

    #[test]
    fn cutoff_radii_time_and_space_exit() {
        let n = 32;
        let params = AdmissibilityParams::default_for(2);
        // Torus: r_int = sqrt(t) (time exit only), r_adm infinite for b = 0.
        let g = GridSpec::torus(2, n).unwrap();
        let ts = TimeSpec::new(64, 1.0 / 64.0, 0.5 / 64.0).unwrap();
        let ctx = DriftContext::zero(&g, Some(ts.clone()), params);
        let ladder = ScaleLadder::new(1.0 / 32.0, 2.0, 8, 6).unwrap();
        let t = 0.64;
        let r = cutoff_radii(&ctx, &g, &ladder, t, &[0.5, 0.5, 0.0]);
        assert!(r.r_adm_truncated && r.r_adm.is_infinite());
        let tol = ladder.step_ratio();
        assert!(
            r.r_int / t.sqrt() < tol && t.sqrt() / r.r_int < tol,
            "r_int = {}, sqrt(t) = {}",
            r.r_int,
            t.sqrt()
        );

        // Box: spatial exit at the wall distance.
        let gb = GridSpec::boxed(&[n, n], &[1.0, 1.0]).unwrap();
        let ctxb = DriftContext::zero(&gb, Some(ts), params);
        let delta = 0.23;
        let rb = cutoff_radii(&ctxb, &gb, &ladder, 0.9, &[delta, 0.5, 0.0]);
        assert!(
            (rb.r_int - delta).abs() <= 1.0 / n as f64 + delta * (tol - 1.0) * 2.0,
            "r_int = {}, delta = {delta}",
            rb.r_int
        );
    }

    #[test]
    fn separation_zero_and_shear() {
        let n = 32;
        let g = GridSpec::boxed(&[n, n], &[1.0, 1.0]).unwrap();
        let ts = TimeSpec::new(32, 1.0 / 32.0, 0.5 / 32.0).unwrap();
        let params = AdmissibilityParams::default_for(2);
        let ctx0 = DriftContext::zero(&g, Some(ts.clone()), params);
        let cyl = skewed_cylinder(&ctx0, &g, 0.9, &[0.5, 0.5, 0.0], 0.15);
        assert!(cyl.admissible && cyl.contained);
        let worst = trajectory_separation_check(&ctx0, &cyl, 1.0, 2.0, 10, 99).unwrap();
        assert!(worst < 1.0, "zero drift keeps the initial offset: {worst}");

        // Admissible shear cylinder.
        let kappa = 0.4;
        let cxf =
            ScalarField::from_fn_spacetime(g.clone(), ts.clone(), Extension::ZeroOutside, |_, p| {
                kappa * (p[1] - 0.5)
            });
        let cyf = ScalarField::from_fn_spacetime(g.clone(), ts, Extension::ZeroOutside, |_, _| 0.0);
        let b = VectorField::new(vec![cxf, cyf]).unwrap();
        let ladder = ScaleLadder::new(1.0 / 32.0, 0.4, 8, 4).unwrap();
        let ctx = DriftContext::prepare(&b, &ladder, params);
        let rho = 0.8 * (params.eta0 / kappa).sqrt();
        let cyl = skewed_cylinder(&ctx, &g, 0.9, &[0.5, 0.5, 0.0], rho);
        assert!(cyl.admissible);
        let worst = trajectory_separation_check(&ctx, &cyl, 1.0, 2.0, 25, 7).unwrap();
        assert!(worst < 2.0, "separation ratio {worst}");
    }
}
