//! The verification suites: each one measures a family of inequalities on
//! seeded synthetic data and reduces them to pass/fail reports.

use super::randfields::{trial_rng, RandomDrift, RandomGraph, RandomScalar};
use super::{SuiteConfig, TrialRow, VerificationReport};
use crate::cantor;
use crate::error::Result;
use crate::field::{Extension, ScalarField};
use crate::graph::GraphFamily;
use crate::grid::{GridSpec, Point, TimeSpec};
use crate::ladder::ScaleLadder;
use crate::lagrangian::{
    self, capped_scale_at, skewed_cylinder, trajectory_separation_check, AdmissibilityParams,
    DriftContext,
};
use crate::multiscale::{self, AvgMode, ScaleLabel};
use crate::norms::{
    lorentz_norm, lp_norm, nested_from_slice_norms, weak_norm, LorentzParams, MeasuredSample,
};
use crate::ns;
use crate::separation::{self, InterpBranch};
use crate::summer::FieldSummer;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

fn params(list: &[(&str, f64)]) -> BTreeMap<String, f64> {
    list.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn torus_ladder(n: usize) -> ScaleLadder {
    ScaleLadder::new(2.0 / n as f64, 0.45, 8, 6).expect("ladder")
}

fn box_ladder(n: usize) -> ScaleLadder {
    ScaleLadder::new(2.0 / n as f64, 0.45, 8, 6).expect("ladder")
}

// ---------------------------------------------------------------------
// lemmas-space: quasiconvexity, Jensen scaling, monotonicity, average
// identity, and domination by the maximal function, pointwise on random
// fields.
// ---------------------------------------------------------------------

pub fn lemmas_space(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let alpha = 1.5;
    struct Worst {
        quasi: f64,
        jensen: f64,
        mono: f64,
        avg_identity: f64,
        max_dom: f64,
    }
    let mut rows_quasi = Vec::new();
    let mut rows_jensen = Vec::new();
    let mut rows_mono = Vec::new();
    let mut rows_avg = Vec::new();
    let mut rows_dom = Vec::new();

    for &n in &cfg.grids {
        let grid = GridSpec::torus(2, n)?;
        let ladder = torus_ladder(n);
        // Stated ladder tolerance: two steps (each side of a comparison
        // carries its own bisection bracket, and the continuum-volume
        // normalization fluctuates within a step near small radii).
        let slack_s = ladder.step_ratio().powi(2);
        let slack_a = ladder.step_ratio().powf(2.0 * alpha) * 1.001;

        let per_trial: Vec<Worst> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(cfg.seed, trial, 0xa11);
                let f = RandomScalar::draw(&mut rng, 2, 5, 3)
                    .scaled_to_mean(&grid, None, 6.0)
                    .sample(&grid, None);
                let g = RandomScalar::draw(&mut rng, 2, 5, 3)
                    .scaled_to_mean(&grid, None, 6.0)
                    .sample(&grid, None);
                let lam: f64 = rng.gen_range(0.0..1.0);
                let h = f.zip(&g, |a, b| (1.0 - lam) * a + lam * b);

                let sf = multiscale::scale_op(&f, alpha, &ladder, AvgMode::Space).unwrap();
                let sg = multiscale::scale_op(&g, alpha, &ladder, AvgMode::Space).unwrap();
                let sh = multiscale::scale_op(&h, alpha, &ladder, AvgMode::Space).unwrap();

                // Quasiconvexity: A(h) <= max(A(f), A(g)), up to the gap
                // between two independent bisections.
                let mut quasi = 0.0f64;
                for k in 0..sf.a.len() {
                    let bound = sf.a[k].max(sg.a[k]);
                    if sh.a[k] > 0.0 && bound > 0.0 {
                        quasi = quasi.max(sh.a[k] / (bound * slack_a));
                    } else if sh.a[k] > 0.0 && bound == 0.0 {
                        quasi = f64::INFINITY;
                    }
                }

                // Jensen scaling: S_alpha(f) >= S_{p alpha}(f^p).
                let mut jensen = 0.0f64;
                for &p in &[1.5, 2.0, 3.0] {
                    let fp = f.map(|v| v.powf(p));
                    let sp = multiscale::scale_op(&fp, p * alpha, &ladder, AvgMode::Space)
                        .unwrap();
                    for k in 0..sf.s.len() {
                        if sp.s[k].is_finite() && sf.s[k].is_finite() {
                            jensen = jensen.max(sp.s[k] / (sf.s[k] * slack_s));
                        } else if sf.s[k].is_finite() && sp.s[k].is_infinite() {
                            jensen = f64::INFINITY;
                        }
                    }
                }

                // Monotonicity: f <= f + g pointwise forces S(f+g) <= S(f).
                let sum = f.zip(&g, |a, b| a + b);
                let ss = multiscale::scale_op(&sum, alpha, &ladder, AvgMode::Space).unwrap();
                let mut mono = 0.0f64;
                for k in 0..sf.s.len() {
                    if ss.s[k].is_finite() && sf.s[k].is_finite() {
                        mono = mono.max(ss.s[k] / (sf.s[k] * slack_s));
                    }
                }

                // Average identity certificate: per-point deviation over
                // the budget 2 * ladder width + 2 h / s (see scale_op).
                let avg_identity = sf.cert_budget_factor;

                // Domination by the maximal function.
                let m = multiscale::maximal_function(&f, &ladder);
                let mut dom = 0.0f64;
                for k in 0..sf.a.len() {
                    if sf.s[k].is_finite() && sf.label[k] == ScaleLabel::Reg {
                        dom = dom.max(sf.a[k] / (m.data()[k] * slack_a));
                    }
                }

                Worst {
                    quasi,
                    jensen,
                    mono,
                    avg_identity,
                    max_dom: dom,
                }
            })
            .collect();

        for (trial, w) in per_trial.into_iter().enumerate() {
            let mk = |lhs: f64| TrialRow {
                trial,
                grid: n,
                lhs,
                rhs: 1.0,
                ratio: lhs,
            };
            rows_quasi.push(mk(w.quasi));
            rows_jensen.push(mk(w.jensen));
            rows_mono.push(mk(w.mono));
            rows_avg.push(mk(w.avg_identity));
            rows_dom.push(mk(w.max_dom));
        }
    }

    let p = params(&[("alpha", alpha)]);
    Ok(vec![
        VerificationReport::threshold("avg-quasiconvex", "quasiconvexity of the averaging operator", p.clone(), rows_quasi),
        VerificationReport::threshold("scale-jensen", "power scaling of the scale operator", p.clone(), rows_jensen),
        VerificationReport::threshold("scale-monotone", "antitone dependence on the field", p.clone(), rows_mono),
        VerificationReport::threshold("avg-identity", "average attained at the critical scale", p.clone(), rows_avg),
        VerificationReport::threshold("avg-below-maximal", "averaging operator below the maximal function", p, rows_dom),
    ])
}

// ---------------------------------------------------------------------
// trace-space: weak-(b) and strong-(c) trace bounds for the spatial
// averaging operator on a static Lipschitz curve.
// ---------------------------------------------------------------------

struct SpaceCase {
    name: &'static str,
    alpha: f64,
    p: f64,
    mean: f64,
}

pub fn trace_space(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let big_d = 2usize;
    let d = 1usize;
    let lipschitz = 0.5;
    let cases = [
        SpaceCase { name: "trace-space-weak", alpha: 1.5, p: 1.0, mean: 12.0 },
        SpaceCase { name: "trace-space-strong", alpha: 1.0, p: 2.0, mean: 5.0 },
    ];
    let mut out = Vec::new();
    for case in &cases {
        let exponent = 1.0 - (big_d - d) as f64 / (case.p * case.alpha);
        let mut rows = Vec::new();
        for &n in &cfg.grids {
            let grid = GridSpec::boxed(&[n, n], &[1.0, 1.0])?;
            let ladder = box_ladder(n);
            let trial_rows: Vec<TrialRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, trial, 0x7ace);
                    let f = RandomScalar::draw(&mut rng, 2, 5, 3)
                        .scaled_to_mean(&grid, None, case.mean)
                        .sample(&grid, None);
                    let graph = RandomGraph::draw(&mut rng, lipschitz).family(&grid, None);
                    let anchors: Vec<(f64, Point)> =
                        (0..graph.nodes()).map(|k| (0.0, graph.point(0, k))).collect();
                    let samples =
                        multiscale::scale_at(&f, case.alpha, &ladder, AvgMode::Space, &anchors)
                            .unwrap();
                    let weights = graph.weights(0);
                    let pairs: Vec<(f64, f64)> = samples
                        .iter()
                        .zip(&weights)
                        .filter(|(s, _)| s.a > 0.0)
                        .map(|(s, &w)| (s.a.powf(exponent), w))
                        .collect();
                    let lhs = if pairs.is_empty() {
                        0.0
                    } else {
                        let sample = MeasuredSample::new(pairs).unwrap();
                        if case.p == 1.0 {
                            weak_norm(&sample, 1.0)
                        } else {
                            lp_norm(&sample, case.p)
                        }
                    };
                    let rhs = if case.p == 1.0 {
                        f.l1_norm()
                    } else {
                        f.lp_pow(case.p).powf(1.0 / case.p)
                    };
                    TrialRow {
                        trial,
                        grid: n,
                        lhs,
                        rhs,
                        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
                    }
                })
                .collect();
            rows.extend(trial_rows);
        }
        out.push(VerificationReport::ratio_bounded(
            case.name,
            "trace of the spatial averaging operator on a Lipschitz curve",
            params(&[("alpha", case.alpha), ("p", case.p), ("L", lipschitz)]),
            rows,
            &cfg.grids,
            cfg.band,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Shared helpers for spacetime suites.
// ---------------------------------------------------------------------

fn spacetime_setup(n: usize) -> (GridSpec, TimeSpec) {
    let grid = GridSpec::boxed(&[n, n], &[1.0, 1.0]).expect("grid");
    let nt = (n / 2).max(8);
    let dt = 1.0 / nt as f64;
    let ts = TimeSpec::new(nt, dt, 0.5 * dt).expect("time");
    (grid, ts)
}

/// Anchors at every graph node of every slice, slice-major, with the
/// corresponding mu_t weights.
fn graph_anchors(graph: &GraphFamily, ts: &TimeSpec) -> (Vec<(f64, Point)>, Vec<f64>) {
    let mut anchors = Vec::new();
    let mut weights = Vec::new();
    for j in 0..ts.nt {
        let w = graph.weights(j.min(graph.nt() - 1));
        let t = ts.time(j);
        for k in 0..graph.nodes() {
            anchors.push((t, graph.point(j.min(graph.nt() - 1), k)));
            weights.push(w[k]);
        }
    }
    (anchors, weights)
}

/// Mixed Lorentz norm of a field over its own grid (the domain, not a
/// graph): per-slice norm with cell-volume weights, then the outer norm
/// over t with weight dt.
fn domain_mixed_norm(f: &ScalarField, pt: LorentzParams, px: LorentzParams) -> f64 {
    let w = f.grid.cell_vol();
    let dt = f.time.as_ref().map_or(1.0, |t| t.dt);
    let inner: Vec<(f64, f64)> = (0..f.nt())
        .map(|j| {
            let sample =
                MeasuredSample::new(f.slice(j).iter().map(|&v| (v, w)).collect()).unwrap();
            (lorentz_norm(&sample, px), dt)
        })
        .collect();
    nested_from_slice_norms(&inner, pt)
}

// ---------------------------------------------------------------------
// trace-spacetime: joint weak/strong bounds over the moving graph and the
// fixed-time variants.
// ---------------------------------------------------------------------

pub fn trace_spacetime(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let big_d = 2usize;
    let d = 1usize;
    let lipschitz = 0.5;
    let fixed_times = [0.3, 0.4, 0.5, 0.6, 0.7];

    struct Case {
        name: &'static str,
        alpha: f64,
        p: f64,
        fixed_t: bool,
        mean: f64,
    }
    let cases = [
        Case { name: "trace-spacetime-weak", alpha: 1.5, p: 1.0, fixed_t: false, mean: 11.0 },
        Case { name: "trace-spacetime-strong", alpha: 1.0, p: 2.0, fixed_t: false, mean: 5.0 },
        Case { name: "trace-fixedt-weak", alpha: 3.5, p: 1.0, fixed_t: true, mean: 280.0 },
        Case { name: "trace-fixedt-strong", alpha: 2.0, p: 2.0, fixed_t: true, mean: 25.0 },
    ];

    let mut out = Vec::new();
    for case in &cases {
        let codim = (big_d - d) as f64 + if case.fixed_t { 2.0 } else { 0.0 };
        let exponent = 1.0 - codim / (case.p * case.alpha);
        let mut rows = Vec::new();
        for &n in &cfg.grids {
            let (grid, ts) = spacetime_setup(n);
            let ladder = box_ladder(n);
            let trial_rows: Vec<TrialRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, trial, 0x57ace);
                    let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                        .scaled_to_mean(&grid, Some(&ts), case.mean)
                        .sample(&grid, Some(ts.clone()));
                    let graph = RandomGraph::draw(&mut rng, lipschitz).family(&grid, Some(&ts));
                    let rhs = if case.p == 1.0 {
                        f.l1_norm()
                    } else {
                        f.lp_pow(case.p).powf(1.0 / case.p)
                    };
                    let lhs = if case.fixed_t {
                        // Worst fixed-time norm over the sampled times.
                        let mut worst = 0.0f64;
                        for &t in &fixed_times {
                            let j = ((t - ts.t0) / ts.dt).round() as usize;
                            let j = j.min(ts.nt - 1);
                            let tj = ts.time(j);
                            let w = graph.weights(j);
                            let anchors: Vec<(f64, Point)> = (0..graph.nodes())
                                .map(|k| (tj, graph.point(j, k)))
                                .collect();
                            let samples = multiscale::scale_at(
                                &f,
                                case.alpha,
                                &ladder,
                                AvgMode::Spacetime,
                                &anchors,
                            )
                            .unwrap();
                            let pairs: Vec<(f64, f64)> = samples
                                .iter()
                                .zip(&w)
                                .filter(|(s, _)| s.a > 0.0)
                                .map(|(s, &wt)| (s.a.powf(exponent), wt))
                                .collect();
                            if pairs.is_empty() {
                                continue;
                            }
                            let sample = MeasuredSample::new(pairs).unwrap();
                            let v = if case.p == 1.0 {
                                weak_norm(&sample, 1.0)
                            } else {
                                lp_norm(&sample, case.p)
                            };
                            worst = worst.max(v);
                        }
                        worst
                    } else {
                        let (anchors, weights) = graph_anchors(&graph, &ts);
                        let samples = multiscale::scale_at(
                            &f,
                            case.alpha,
                            &ladder,
                            AvgMode::Spacetime,
                            &anchors,
                        )
                        .unwrap();
                        let pairs: Vec<(f64, f64)> = samples
                            .iter()
                            .zip(&weights)
                            .filter(|(s, _)| s.a > 0.0)
                            .map(|(s, &wt)| (s.a.powf(exponent), wt * ts.dt))
                            .collect();
                        if pairs.is_empty() {
                            0.0
                        } else {
                            let sample = MeasuredSample::new(pairs).unwrap();
                            if case.p == 1.0 {
                                weak_norm(&sample, 1.0)
                            } else {
                                lp_norm(&sample, case.p)
                            }
                        }
                    };
                    TrialRow {
                        trial,
                        grid: n,
                        lhs,
                        rhs,
                        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
                    }
                })
                .collect();
            rows.extend(trial_rows);
        }
        out.push(VerificationReport::ratio_bounded(
            case.name,
            "trace of the cylinder averaging operator over a moving graph",
            params(&[("alpha", case.alpha), ("p", case.p)]),
            rows,
            &cfg.grids,
            cfg.band,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// anisotropic: selected admissible exponent tuples of the unified
// mixed-norm trace bound.
// ---------------------------------------------------------------------

enum AnisoNorm {
    /// Joint weak norm over Gamma_T at exponent `q`.
    JointWeak(f64),
    /// Nested strong norms (pt, px).
    Nested(f64, f64),
    /// Sup over slices of the weak-q norm.
    SupWeak(f64),
}

struct AnisoCase {
    name: &'static str,
    alpha: f64,
    lambda: f64,
    norm: AnisoNorm,
    /// Right-hand side: (pt, px) mixed strong norm of f over the domain.
    rhs: (f64, f64),
    mean: f64,
}

pub fn anisotropic(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let lipschitz = 0.5;
    let cases = [
        AnisoCase {
            name: "aniso-joint-weak",
            alpha: 2.0,
            lambda: 0.5,
            norm: AnisoNorm::JointWeak(0.5),
            rhs: (1.0, 1.0),
            mean: 25.0,
        },
        AnisoCase {
            name: "aniso-nested-strong",
            alpha: 3.0,
            lambda: 0.5,
            norm: AnisoNorm::Nested(1.2, 1.2),
            rhs: (2.0, 2.0),
            mean: 125.0,
        },
        AnisoCase {
            name: "aniso-mixed-f",
            alpha: 4.0,
            lambda: 0.5,
            norm: AnisoNorm::Nested(4.0 / 3.0, 0.5),
            rhs: (2.0, 1.0),
            mean: 400.0,
        },
        AnisoCase {
            name: "aniso-sup-weak",
            alpha: 1.5,
            lambda: 0.4,
            norm: AnisoNorm::SupWeak(0.4),
            rhs: (1.0, 1.0),
            mean: 11.0,
        },
    ];

    let mut out = Vec::new();
    for case in &cases {
        let mut rows = Vec::new();
        for &n in &cfg.grids {
            let (grid, ts) = spacetime_setup(n);
            let ladder = box_ladder(n);
            let trial_rows: Vec<TrialRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, trial, 0xa215);
                    let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                        .scaled_to_mean(&grid, Some(&ts), case.mean)
                        .sample(&grid, Some(ts.clone()));
                    let graph = RandomGraph::draw(&mut rng, lipschitz).family(&grid, Some(&ts));
                    let (anchors, weights) = graph_anchors(&graph, &ts);
                    let samples = multiscale::scale_at(
                        &f,
                        case.alpha,
                        &ladder,
                        AvgMode::Spacetime,
                        &anchors,
                    )
                    .unwrap();
                    let nodes = graph.nodes();
                    let lhs_norm = match case.norm {
                        AnisoNorm::JointWeak(q) => {
                            let pairs: Vec<(f64, f64)> = samples
                                .iter()
                                .zip(&weights)
                                .filter(|(s, _)| s.a > 0.0)
                                .map(|(s, &w)| (s.a, w * ts.dt))
                                .collect();
                            if pairs.is_empty() {
                                0.0
                            } else {
                                weak_norm(&MeasuredSample::new(pairs).unwrap(), q)
                            }
                        }
                        AnisoNorm::Nested(pt, px) => {
                            let inner: Vec<(f64, f64)> = (0..ts.nt)
                                .map(|j| {
                                    let pairs: Vec<(f64, f64)> = (0..nodes)
                                        .filter(|k| samples[j * nodes + k].a > 0.0)
                                        .map(|k| {
                                            (samples[j * nodes + k].a, weights[j * nodes + k])
                                        })
                                        .collect();
                                    let v = if pairs.is_empty() {
                                        0.0
                                    } else {
                                        lorentz_norm(
                                            &MeasuredSample::new(pairs).unwrap(),
                                            LorentzParams::strong(px),
                                        )
                                    };
                                    (v, ts.dt)
                                })
                                .collect();
                            nested_from_slice_norms(&inner, LorentzParams::strong(pt))
                        }
                        AnisoNorm::SupWeak(q) => (0..ts.nt)
                            .map(|j| {
                                let pairs: Vec<(f64, f64)> = (0..nodes)
                                    .filter(|k| samples[j * nodes + k].a > 0.0)
                                    .map(|k| (samples[j * nodes + k].a, weights[j * nodes + k]))
                                    .collect();
                                if pairs.is_empty() {
                                    0.0
                                } else {
                                    weak_norm(&MeasuredSample::new(pairs).unwrap(), q)
                                }
                            })
                            .fold(0.0f64, f64::max),
                    };
                    let lhs = lhs_norm.powf(case.lambda);
                    let rhs = domain_mixed_norm(
                        &f,
                        LorentzParams::strong(case.rhs.0),
                        LorentzParams::strong(case.rhs.1),
                    );
                    TrialRow {
                        trial,
                        grid: n,
                        lhs,
                        rhs,
                        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
                    }
                })
                .collect();
            rows.extend(trial_rows);
        }
        out.push(VerificationReport::ratio_bounded(
            case.name,
            "anisotropic mixed-norm trace bound at one admissible exponent tuple",
            params(&[("alpha", case.alpha), ("lambda", case.lambda)]),
            rows,
            &cfg.grids,
            cfg.band,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// lagrangian: zero-drift reduction, trajectory separation, capped-operator
// quasiconvexity and boundedness, and the drift-trace cases.
// ---------------------------------------------------------------------

pub fn lagrangian_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let dparams = AdmissibilityParams::default_for(2);

    // Zero-drift reduction: skewed averages equal straight averages.
    {
        let n = 32;
        let grid = GridSpec::torus(2, n)?;
        let nt = 32;
        let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64)?;
        let ctx = DriftContext::zero(&grid, Some(ts.clone()), dparams);
        let rows: Vec<TrialRow> = (0..10)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(cfg.seed, trial, 0xed0);
                let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                    .sample(&grid, Some(ts.clone()));
                let fs = FieldSummer::new(&f);
                let mut worst = 0.0f64;
                for _ in 0..20 {
                    let t = rng.gen_range(0.3..0.95);
                    let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.0];
                    let rho = rng.gen_range(0.08..0.4);
                    let a = lagrangian::skewed_cyl_average(&fs, &ctx, t, &x, rho);
                    let b = fs.cyl_average(t, &x, rho);
                    worst = worst.max((a - b).abs() / b.abs().max(1.0));
                }
                TrialRow {
                    trial,
                    grid: n,
                    lhs: worst,
                    rhs: 1e-12,
                    ratio: worst / 1e-12,
                }
            })
            .collect();
        out.push(VerificationReport::threshold(
            "drift-zero-reduction",
            "zero drift reduces skewed cylinders to straight ones",
            params(&[]),
            rows,
        ));
    }

    // Trajectory separation on admissible shear cylinders, (c1, c2) = (1, 2).
    {
        let n = 32;
        let grid = GridSpec::boxed(&[n, n], &[1.0, 1.0])?;
        let nt = 32;
        let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64)?;
        let ladder = box_ladder(n);
        let trials = 100;
        let rows: Vec<TrialRow> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(cfg.seed, trial, 0xc1c2);
                let kappa: f64 = rng.gen_range(0.2..0.8);
                let bx = ScalarField::from_fn_spacetime(
                    grid.clone(),
                    ts.clone(),
                    Extension::ZeroOutside,
                    |_, p| kappa * (p[1] - 0.5),
                );
                let by = ScalarField::from_fn_spacetime(
                    grid.clone(),
                    ts.clone(),
                    Extension::ZeroOutside,
                    |_, _| 0.0,
                );
                let b = crate::field::VectorField::new(vec![bx, by]).unwrap();
                let ctx = DriftContext::prepare(&b, &ladder, dparams);
                let rho = (0.75 * (dparams.eta0 / kappa).sqrt()).min(0.28);
                let t = rng.gen_range(0.6..0.95);
                let x = [rng.gen_range(0.4..0.6), rng.gen_range(0.4..0.6), 0.0];
                let cyl = skewed_cylinder(&ctx, &grid, t, &x, rho);
                let worst = if cyl.admissible {
                    trajectory_separation_check(&ctx, &cyl, 1.0, 2.0, 10, cfg.seed + trial as u64)
                        .unwrap()
                } else {
                    // Shrink once if the boundary layer spoiled admissibility.
                    let cyl2 = skewed_cylinder(&ctx, &grid, t, &x, rho * 0.8);
                    trajectory_separation_check(&ctx, &cyl2, 1.0, 2.0, 10, cfg.seed + trial as u64)
                        .unwrap()
                };
                TrialRow {
                    trial,
                    grid: n,
                    lhs: worst,
                    rhs: 2.0,
                    ratio: worst / 2.0,
                }
            })
            .collect();
        out.push(VerificationReport::threshold(
            "trajectory-separation",
            "companion trajectories in admissible cylinders stay within c2 rho",
            params(&[("c1", 1.0), ("c2", 2.0), ("eta0", dparams.eta0)]),
            rows,
        ));
    }

    // Quasiconvexity of the capped operator with a shared drift.
    {
        let n = 32;
        let grid = GridSpec::torus(2, n)?;
        let nt = 32;
        let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64)?;
        let ladder = torus_ladder(n);
        let alpha = 2.0;
        let slack = ladder.step_ratio().powf(alpha) * 1.02;
        let rows: Vec<TrialRow> = (0..20)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(cfg.seed, trial, 0x9ca5);
                let drift = RandomDrift::draw(&mut rng, 3, 2, 0.8).sample(&grid, &ts);
                let ctx = DriftContext::prepare(&drift, &ladder, dparams);
                let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                    .scaled_to_mean(&grid, Some(&ts), 12.0)
                    .sample(&grid, Some(ts.clone()));
                let g = RandomScalar::draw(&mut rng, 2, 4, 3)
                    .scaled_to_mean(&grid, Some(&ts), 12.0)
                    .sample(&grid, Some(ts.clone()));
                let lam: f64 = rng.gen_range(0.0..1.0);
                let h = f.zip(&g, |a, b| (1.0 - lam) * a + lam * b);
                let anchors: Vec<(f64, Point)> = (0..40)
                    .map(|_| {
                        (
                            rng.gen_range(0.3..0.95),
                            [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.0],
                        )
                    })
                    .collect();
                let sf = capped_scale_at(&f, &ctx, alpha, &ladder, &anchors).unwrap();
                let sg = capped_scale_at(&g, &ctx, alpha, &ladder, &anchors).unwrap();
                let sh = capped_scale_at(&h, &ctx, alpha, &ladder, &anchors).unwrap();
                let mut worst = 0.0f64;
                for k in 0..anchors.len() {
                    let bound = sf[k].a_wedge().max(sg[k].a_wedge());
                    let v = sh[k].a_wedge();
                    if v > 0.0 && bound > 0.0 {
                        worst = worst.max(v / (bound * slack));
                    }
                }
                TrialRow {
                    trial,
                    grid: n,
                    lhs: worst,
                    rhs: 1.0,
                    ratio: worst,
                }
            })
            .collect();
        out.push(VerificationReport::threshold(
            "capped-quasiconvex",
            "quasiconvexity of the capped averaging operator",
            params(&[("alpha", alpha)]),
            rows,
        ));
    }

    // Weak (1,1) and strong (p,p) boundedness of the capped operator.
    {
        let alpha = 2.0;
        let grids = [32usize, 48];
        let mut rows_weak = Vec::new();
        let mut rows_strong = Vec::new();
        for &n in &grids {
            let grid = GridSpec::torus(2, n)?;
            let nt = n / 2;
            let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64)?;
            let ladder = torus_ladder(n).with_bisections(3);
            let bounded_trials = cfg.trials.min(6);
            let trial_rows: Vec<(TrialRow, TrialRow)> = (0..bounded_trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, trial, 0xb0b);
                    let drift = RandomDrift::draw(&mut rng, 3, 2, 0.8).sample(&grid, &ts);
                    let ctx = DriftContext::prepare(&drift, &ladder, dparams);
                    let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                        .scaled_to_mean(&grid, Some(&ts), 12.0)
                        .sample(&grid, Some(ts.clone()));
                    let capped = lagrangian::capped_scale_op(&f, &ctx, alpha, &ladder).unwrap();
                    let w = grid.cell_vol() * ts.dt;
                    let pairs: Vec<(f64, f64)> = capped
                        .samples
                        .iter()
                        .filter(|s| s.a_wedge() > 0.0 && s.a_wedge().is_finite())
                        .map(|s| (s.a_wedge(), w))
                        .collect();
                    let sample = MeasuredSample::new(pairs).unwrap();
                    let weak = weak_norm(&sample, 1.0);
                    let strong = lp_norm(&sample, 2.0);
                    let l1 = f.l1_norm();
                    let l2 = f.lp_pow(2.0).sqrt();
                    (
                        TrialRow { trial, grid: n, lhs: weak, rhs: l1, ratio: weak / l1 },
                        TrialRow { trial, grid: n, lhs: strong, rhs: l2, ratio: strong / l2 },
                    )
                })
                .collect();
            for (w, s) in trial_rows {
                rows_weak.push(w);
                rows_strong.push(s);
            }
        }
        out.push(VerificationReport::ratio_bounded(
            "capped-weak-11",
            "weak (1,1) boundedness of the capped averaging operator",
            params(&[("alpha", alpha)]),
            rows_weak,
            &grids,
            cfg.band,
        ));
        out.push(VerificationReport::ratio_bounded(
            "capped-strong-pp",
            "strong (p,p) boundedness of the capped averaging operator",
            params(&[("alpha", alpha), ("p", 2.0)]),
            rows_strong,
            &grids,
            cfg.band,
        ));
    }

    // Drift-trace cases (A)(a) and (B)(b): below-cutoff averages on a
    // moving graph, with a shared random drift.
    {
        let lipschitz = 0.5;
        struct DriftCase {
            name: &'static str,
            alpha: f64,
            lambda: f64,
            joint_weak: Option<f64>,
            nested: Option<(f64, f64)>,
            rhs: (f64, f64),
            mean: f64,
        }
        let cases = [
            DriftCase {
                name: "drift-trace-joint-weak",
                alpha: 2.0,
                lambda: 0.5,
                joint_weak: Some(0.5),
                nested: None,
                rhs: (1.0, 1.0),
                mean: 44.0,
            },
            DriftCase {
                name: "drift-trace-nested",
                alpha: 4.0,
                lambda: 0.5,
                joint_weak: None,
                nested: Some((4.0 / 3.0, 0.5)),
                rhs: (2.0, 1.0),
                mean: 1975.0,
            },
        ];
        for case in &cases {
            let mut rows = Vec::new();
            for &n in &cfg.grids {
                let grid = GridSpec::torus(2, n)?;
                let nt = (n / 2).max(8);
                let ts = TimeSpec::new(nt, 1.0 / nt as f64, 0.5 / nt as f64)?;
                let ladder = torus_ladder(n).with_bisections(4);
                let trial_rows: Vec<TrialRow> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng = trial_rng(cfg.seed, trial, 0xd217);
                        let drift = RandomDrift::draw(&mut rng, 3, 2, 0.8).sample(&grid, &ts);
                        let ctx = DriftContext::prepare(&drift, &ladder, dparams);
                        let f = RandomScalar::draw(&mut rng, 2, 4, 3)
                            .scaled_to_mean(&grid, Some(&ts), case.mean)
                            .sample(&grid, Some(ts.clone()));
                        let graph =
                            RandomGraph::draw(&mut rng, lipschitz).family(&grid, Some(&ts));
                        let (anchors, weights) = graph_anchors(&graph, &ts);
                        let samples =
                            capped_scale_at(&f, &ctx, case.alpha, &ladder, &anchors).unwrap();
                        let nodes = graph.nodes();
                        let lhs_norm = if let Some(q) = case.joint_weak {
                            let pairs: Vec<(f64, f64)> = samples
                                .iter()
                                .zip(&weights)
                                .filter(|(s, _)| s.a_lt > 0.0)
                                .map(|(s, &w)| (s.a_lt, w * ts.dt))
                                .collect();
                            if pairs.is_empty() {
                                0.0
                            } else {
                                weak_norm(&MeasuredSample::new(pairs).unwrap(), q)
                            }
                        } else {
                            let (pt, px) = case.nested.unwrap();
                            let inner: Vec<(f64, f64)> = (0..ts.nt)
                                .map(|j| {
                                    let pairs: Vec<(f64, f64)> = (0..nodes)
                                        .filter(|k| samples[j * nodes + k].a_lt > 0.0)
                                        .map(|k| {
                                            (samples[j * nodes + k].a_lt, weights[j * nodes + k])
                                        })
                                        .collect();
                                    let v = if pairs.is_empty() {
                                        0.0
                                    } else {
                                        lorentz_norm(
                                            &MeasuredSample::new(pairs).unwrap(),
                                            LorentzParams::strong(px),
                                        )
                                    };
                                    (v, ts.dt)
                                })
                                .collect();
                            nested_from_slice_norms(&inner, LorentzParams::strong(pt))
                        };
                        let lhs = lhs_norm.powf(case.lambda);
                        let rhs = domain_mixed_norm(
                            &f,
                            LorentzParams::strong(case.rhs.0),
                            LorentzParams::strong(case.rhs.1),
                        );
                        TrialRow {
                            trial,
                            grid: n,
                            lhs,
                            rhs,
                            ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
                        }
                    })
                    .collect();
                rows.extend(trial_rows);
            }
            out.push(VerificationReport::ratio_bounded(
                case.name,
                "trace of the below-cutoff drift averaging operator",
                params(&[("alpha", case.alpha), ("lambda", case.lambda)]),
                rows,
                &cfg.grids,
                cfg.band,
            ));
        }
    }

    Ok(out)
}

// ---------------------------------------------------------------------
// cantor: exact superlevel bounds and the Lorentz-norm growth signature.
// ---------------------------------------------------------------------

pub fn cantor_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let report = cantor::cantor_lower_bound(cfg.depth)?;

    let rows: Vec<TrialRow> = report
        .rows
        .iter()
        .map(|r| TrialRow {
            trial: r.k as usize,
            grid: cfg.depth as usize,
            lhs: r.required_cells as f64,
            rhs: r.superlevel_cells as f64,
            ratio: r.required_cells as f64 / (r.superlevel_cells.max(1)) as f64,
        })
        .collect();
    out.push(VerificationReport::threshold(
        "cantor-superlevel",
        "superlevel sets of the averaging operator on the dyadic stack",
        params(&[("depth", cfg.depth as f64)]),
        rows,
    ));
    out.push(VerificationReport::value_in(
        "cantor-l1-exact",
        "exact unit mass of the indicator stack",
        if report.l1_exact { report.l1_norm } else { f64::NAN },
        8.0f64.sqrt(),
        8.0f64.sqrt(),
    ));
    out.push(VerificationReport::value_in(
        "cantor-nesting",
        "levels are nested",
        if report.nesting_ok { 1.0 } else { 0.0 },
        1.0,
        1.0,
    ));

    // Growth of the L^(1,1) norm with depth against the uniform weak-L1
    // bound: the unboundedness signature.
    let depths: Vec<u32> = vec![cfg.depth.saturating_sub(4).max(2), cfg.depth.saturating_sub(2), cfg.depth];
    let mut weak_rows = Vec::new();
    let mut growth_rows = Vec::new();
    let mut prev_l11: Option<f64> = None;
    for (i, &d) in depths.iter().enumerate() {
        let r = cantor::cantor_lower_bound(d)?;
        weak_rows.push(TrialRow {
            trial: i,
            grid: d as usize,
            lhs: r.weak_l1_of_avg,
            rhs: r.l1_norm,
            ratio: r.weak_l1_of_avg / r.l1_norm,
        });
        let l11 = r.lorentz_norms[0].1;
        if let Some(prev) = prev_l11 {
            growth_rows.push(TrialRow {
                trial: i,
                grid: d as usize,
                lhs: prev + 0.3,
                rhs: l11,
                ratio: (prev + 0.3) / l11,
            });
        }
        prev_l11 = Some(l11);
    }
    let grids: Vec<usize> = depths.iter().map(|&d| d as usize).collect();
    out.push(VerificationReport::ratio_bounded(
        "cantor-weak-l1-uniform",
        "uniform weak-L1 bound on the averaging operator",
        params(&[("alpha", 0.5)]),
        weak_rows,
        &grids,
        cfg.band,
    ));
    out.push(VerificationReport::threshold(
        "cantor-l11-growth",
        "L(1,1) norm of the averaging operator grows with depth",
        params(&[("min_step", 0.3)]),
        growth_rows,
    ));
    Ok(out)
}

// ---------------------------------------------------------------------
// lorentz: the nested-vs-joint counterexample pair and the interpolation
// inequality connecting the scales.
// ---------------------------------------------------------------------

pub fn lorentz_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let n = *cfg.grids.last().unwrap_or(&512);
    let eps = cfg.epsilon;
    let pair = separation::separation_pair(eps, n)?;
    let mut out = Vec::new();

    // Nested weak norm of the first profile is 1.
    let inner: Vec<(f64, f64)> = pair
        .u1_slice_samples()
        .iter()
        .map(|(s, dt)| (weak_norm(s, 1.0), *dt))
        .collect();
    let nested = nested_from_slice_norms(&inner, LorentzParams::weak(1.0));
    out.push(VerificationReport::value_in(
        "pair-nested-weak",
        "nested weak norm of the concentrating profile",
        nested,
        0.98,
        1.02,
    ));

    // Joint weak norm of the first profile is below epsilon.
    let joint = weak_norm(&pair.u1_joint_sample(), 1.0);
    out.push(VerificationReport::value_in(
        "pair-joint-weak",
        "joint weak norm of the concentrating profile",
        joint,
        0.0,
        eps * 1.05,
    ));

    // Superlevel measures of the singular profile match the closed form.
    let joint2 = MeasuredSample::from_spacetime(&pair.u2);
    for (i, &alpha) in [1.0f64.exp(), 2.0f64.exp(), 3.0f64.exp()].iter().enumerate() {
        let measured = joint2.measure_above(alpha);
        let expect = (1.0 + alpha.ln()) / alpha;
        out.push(VerificationReport::value_in(
            &format!("pair-superlevel-e{}", i + 1),
            "superlevel measure of the singular profile",
            measured,
            expect * 0.99,
            expect * 1.01,
        ));
    }

    // Per-slice weak norms of the singular profile equal 1/t.
    let ts2 = pair.u2.time.as_ref().unwrap().clone();
    let h = 1.0 / n as f64;
    let mut worst = 0.0f64;
    let mut inner2 = Vec::new();
    for j in 0..n {
        let sample =
            MeasuredSample::new(pair.u2.slice(j).iter().map(|&v| (v, h)).collect()).unwrap();
        let w = weak_norm(&sample, 1.0);
        let t = ts2.time(j);
        worst = worst.max((w * t - 1.0).abs());
        inner2.push((w, ts2.dt));
    }
    out.push(VerificationReport::value_in(
        "pair-slice-weak",
        "per-slice weak norms of the singular profile",
        worst,
        0.0,
        0.02,
    ));

    // Nested weak norm of the singular profile is 1.
    let nested2 = nested_from_slice_norms(&inner2, LorentzParams::weak(1.0));
    out.push(VerificationReport::value_in(
        "pair-nested-weak-singular",
        "nested weak norm of the singular profile",
        nested2,
        0.98,
        1.02,
    ));

    // Interpolated nested norm of the concentrating profile: ratio to the
    // endpoint product is refinement-stable.
    {
        let mut rows = Vec::new();
        for (i, &m) in cfg.grids.iter().enumerate() {
            let p = separation::separation_pair(eps, m)?;
            let r = separation::interpolate_nested(
                &p.u1_slice_samples(),
                InterpBranch::SupTime,
                0.5,
                0.75,
            )?;
            rows.push(TrialRow {
                trial: i,
                grid: m,
                lhs: r.measured,
                rhs: r.bound,
                ratio: r.ratio,
            });
        }
        out.push(VerificationReport::ratio_bounded(
            "interp-nested-profile",
            "nested-vs-joint interpolation on the concentrating profile",
            params(&[("q0", 0.5), ("q", 0.75)]),
            rows,
            &cfg.grids,
            cfg.band,
        ));
    }

    // Random positive step fields: one fitted constant covers the
    // interpolation inequality.
    {
        let rows: Vec<TrialRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(cfg.seed, trial, 0x10e2);
                let nslices = 24;
                let slices: Vec<(MeasuredSample, f64)> = (0..nslices)
                    .map(|_| {
                        let m = rng.gen_range(2..8);
                        let sample = MeasuredSample::new(
                            (0..m)
                                .map(|_| {
                                    (rng.gen_range(0.1..8.0), rng.gen_range(0.01..0.4))
                                })
                                .collect(),
                        )
                        .unwrap();
                        (sample, 1.0 / nslices as f64)
                    })
                    .collect();
                let r = separation::interpolate_nested(
                    &slices,
                    InterpBranch::SupTime,
                    0.5,
                    0.75,
                )
                .unwrap();
                TrialRow {
                    trial,
                    grid: 0,
                    lhs: r.measured,
                    rhs: r.bound,
                    ratio: r.ratio,
                }
            })
            .collect();
        // The interpolation constant for these exponents is modest; a cap
        // of 4 leaves a wide margin over the measured ratios while still
        // catching a broken inequality.
        let cap = 4.0;
        let fitted = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
        let mut rep = VerificationReport::threshold(
            "interp-nested-random",
            "nested-vs-joint interpolation on random step fields",
            params(&[("q0", 0.5), ("q", 0.75), ("cap", cap)]),
            rows.iter()
                .map(|r| TrialRow {
                    trial: r.trial,
                    grid: r.grid,
                    lhs: r.ratio,
                    rhs: cap,
                    ratio: r.ratio / cap,
                })
                .collect(),
        );
        rep.fitted_constant = fitted;
        out.push(rep);
    }

    Ok(out)
}

// ---------------------------------------------------------------------
// ns-theorems: residuals, solver accuracy, energy, pressure-Hessian
// control, trace ratios of the flow scale fields, and the pointwise
// comparison bound.
// ---------------------------------------------------------------------

pub fn ns_theorems(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let aparams = AdmissibilityParams::default_for(3);
    let pconfig = ns::PivotConfig::default_for(&aparams);

    // Momentum residual of the closed-form family (spectral differentiation).
    let residual = ns::spectral::taylor_green_residual(64, 1.0, 1.0, 0.1);
    out.push(VerificationReport::value_in(
        "flow-residual",
        "momentum residual of the closed-form vortex",
        residual,
        0.0,
        1e-6,
    ));

    // Solver accuracy against the closed form at T = 1.
    {
        let n = 64;
        let sp = ns::spectral::Spectral2d::new(n);
        let s0 = ns::spectral::taylor_green_snapshot(n, 1.0, 1.0, 0.0);
        let cfg_solve = ns::spectral::SolveConfig {
            nu: 1.0,
            t_end: 1.0,
            dt: 1e-3,
            snap_every: 250,
        };
        let run = ns::spectral::solve(&sp, &s0.w, &cfg_solve)?;
        let last = run.snapshots.last().unwrap();
        let exact = ns::spectral::taylor_green_snapshot(n, 1.0, 1.0, last.t);
        let h = ns::spectral::TAU / n as f64;
        let err2: f64 = last
            .u
            .iter()
            .zip(&exact.u)
            .chain(last.v.iter().zip(&exact.v))
            .map(|(a, b)| (a - b) * (a - b) * h * h)
            .sum();
        out.push(VerificationReport::value_in(
            "solver-vs-analytic",
            "solver L2 error against the closed form at T = 1",
            err2.sqrt(),
            0.0,
            1e-4,
        ));
        let e0 = run.energy.first().unwrap().kinetic;
        let viol = run
            .energy
            .iter()
            .map(|r| 0.5 * r.kinetic + r.dissipation_integral - 0.5 * e0)
            .fold(0.0f64, f64::max);
        out.push(VerificationReport::value_in(
            "solver-energy-inequality",
            "energy inequality along the solve",
            viol,
            0.0,
            1e-6,
        ));
    }

    // Pressure-Hessian control: ||hess P||_L1 <= C ||grad u||_L2^2 on
    // random solver runs, stable under refinement.
    {
        let grids = [24usize, 32];
        let mut rows = Vec::new();
        for &n in &grids {
            let trial_rows: Vec<TrialRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(cfg.seed, trial, 0x4e55);
                    let sp = ns::spectral::Spectral2d::new(n);
                    let h = ns::spectral::TAU / n as f64;
                    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
                        .map(|_| {
                            (
                                rng.gen_range(1..4) as f64,
                                rng.gen_range(1..4) as f64,
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(0.0..ns::spectral::TAU),
                            )
                        })
                        .collect();
                    let mut w0 = vec![0.0; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                            w0[i * n + j] = modes
                                .iter()
                                .map(|&(kx, ky, a, ph)| a * (kx * x + ky * y + ph).sin())
                                .sum();
                        }
                    }
                    let run = ns::spectral::solve(
                        &sp,
                        &w0,
                        &ns::spectral::SolveConfig {
                            nu: 1.0,
                            t_end: 0.1,
                            dt: 5e-4,
                            snap_every: 40,
                        },
                    )
                    .unwrap();
                    // L1 of the Hessian norm and L2^2 of the gradient over
                    // the snapshots (midpoint rule in t).
                    let cell = h * h;
                    let nsnap = run.snapshots.len() as f64;
                    let mut hess_l1 = 0.0;
                    let mut grad_l2 = 0.0;
                    for s in &run.snapshots {
                        hess_l1 += s.hess_norm.iter().sum::<f64>() * cell / nsnap;
                        grad_l2 += s.grad_norm.iter().map(|g| g * g).sum::<f64>() * cell / nsnap;
                    }
                    TrialRow {
                        trial,
                        grid: n,
                        lhs: hess_l1,
                        rhs: grad_l2,
                        ratio: if grad_l2 > 0.0 { hess_l1 / grad_l2 } else { 0.0 },
                    }
                })
                .collect();
            rows.extend(trial_rows);
        }
        out.push(VerificationReport::ratio_bounded(
            "pressure-hessian-l1",
            "L1 pressure Hessian controlled by the squared gradient norm",
            params(&[]),
            rows,
            &grids,
            cfg.band,
        ));
    }

    // Scale-field machinery on the closed-form vortex across refinements.
    // Slow decay and a small amplitude place the scale field between two
    // cells of the coarsest grid and r_star, where every label resolves.
    {
        let amp = 0.22;
        let nu = 0.25;
        let t_end = 4.0;
        let nt = 21;
        let mut rows_d3 = Vec::new();
        let mut rows_d2 = Vec::new();
        let mut rows_vg = Vec::new();
        let mut rows_mixed = Vec::new();
        let mut c0_series = Vec::new();
        let mut c1_series = Vec::new();
        let mut pointwise_worst = 0.0f64;
        let fixed_times = [2.0, 2.4, 2.8, 3.2, 3.6];
        for &n in cfg.grids.iter() {
            let series = ns::taylor_green(n, nu, amp, t_end, nt);
            let ladder = ScaleLadder::new(
                ns::spectral::TAU / n as f64,
                0.5 * ns::Z_EXTENT,
                8,
                4,
            )?;
            let bundle = ns::scale_fields(&series, &pconfig, &ladder, aparams)?;
            for r in ns::theorem_ratios(&series, &bundle, 1, 3, &[])? {
                rows_d3.push(TrialRow {
                    trial: 0,
                    grid: n,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    ratio: r.ratio,
                });
            }
            for (ti, r) in ns::theorem_ratios(&series, &bundle, 1, 2, &fixed_times)?
                .into_iter()
                .enumerate()
            {
                rows_d2.push(TrialRow {
                    trial: ti,
                    grid: n,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    ratio: r.ratio,
                });
            }
            let consts = ns::fitted_regularity_constants(&series, &bundle, 1, true);
            c0_series.push((n, consts[0]));
            c1_series.push((n, consts[1]));
            for which in 1..=3 {
                let (w, _) = ns::pointwise_bound_violation(&series, &bundle, which, 0.0);
                pointwise_worst = pointwise_worst.max(w);
            }
            let r = ns::vorticity_gradient_ratio(&series, &bundle, consts[1])?;
            rows_vg.push(TrialRow {
                trial: 0,
                grid: n,
                lhs: r.lhs,
                rhs: r.rhs,
                ratio: r.ratio,
            });
            for (ti, r) in ns::mixed_bound_ratios(&series, 1.0).into_iter().enumerate() {
                rows_mixed.push(TrialRow {
                    trial: ti,
                    grid: n,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    ratio: r.ratio,
                });
            }
        }
        out.push(VerificationReport::ratio_bounded(
            "flow-trace-spacetime",
            "spacetime trace bound of the flow scale field (full domain)",
            params(&[("alpha", 4.0), ("d", 3.0)]),
            rows_d3,
            &cfg.grids,
            cfg.band,
        ));
        out.push(VerificationReport::ratio_bounded(
            "flow-trace-fixedt",
            "fixed-time trace bound of the flow scale field (plane graph)",
            params(&[("alpha", 4.0), ("d", 2.0)]),
            rows_d2,
            &cfg.grids,
            cfg.band,
        ));
        out.push(VerificationReport::ratio_bounded(
            "flow-vorticity-gradient",
            "superlevel vorticity-gradient bound with the fitted constant",
            params(&[("exponent", 4.0 / 3.0)]),
            rows_vg,
            &cfg.grids,
            cfg.band,
        ));
        out.push(VerificationReport::ratio_bounded(
            "flow-mixed-bounds",
            "representative mixed-norm bounds on the velocity gradient",
            params(&[("order", 1.0)]),
            rows_mixed,
            &cfg.grids,
            cfg.band,
        ));

        // Pointwise comparison bound, with one ladder step of slack.
        let slack = ScaleLadder::new(1.0, 2.0, 8, 4)?.step_ratio() * 1.001;
        out.push(VerificationReport::value_in(
            "flow-pointwise-bound",
            "inverse scale below the below-cutoff average or inverse r_star",
            pointwise_worst,
            0.0,
            slack,
        ));
        // Fitted regularity constants stable under refinement.
        for (name, series_vals) in [("flow-c0-stability", &c0_series), ("flow-c1-stability", &c1_series)] {
            let rows: Vec<TrialRow> = series_vals
                .iter()
                .map(|&(g, c)| TrialRow {
                    trial: 0,
                    grid: g,
                    lhs: c,
                    rhs: 1.0,
                    ratio: c,
                })
                .collect();
            out.push(VerificationReport::ratio_bounded(
                name,
                "fitted derivative constant stability under refinement",
                params(&[]),
                rows,
                &cfg.grids,
                cfg.band,
            ));
        }
    }

    Ok(out)
}
