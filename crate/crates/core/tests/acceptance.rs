//! Acceptance suite: every exit criterion, at its stated tolerance, with
//! one pass/fail line per criterion. Each test prints its verdict and
//! asserts it; `cargo test` green means the whole gate is green.

use msa_core::field::{Extension, ScalarField};
use msa_core::geom::ball_volume;
use msa_core::grid::GridSpec;
use msa_core::ladder::ScaleLadder;
use msa_core::multiscale::{self, AvgMode};
use msa_core::norms::{weak_norm, LorentzParams, MeasuredSample};
use msa_core::separation;
use msa_core::verify::{self, SuiteConfig, SuiteKind, Verdict};
use msa_core::{cantor, lagrangian};
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

/// The heavy criteria saturate the worker pool; running them one at a
/// time keeps each within its own runtime budget.
fn gate() -> MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    match GATE.get_or_init(|| Mutex::new(())).lock() {
        Ok(g) => g,
        Err(poisoned) => poisoned.into_inner(),
    }
}

fn banner(id: u32, name: &str, pass: bool, t: Instant, budget_s: f64) {
    let elapsed = t.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE {id} ({name}): {} in {elapsed:.1}s (budget {budget_s:.0}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed");
    assert!(
        elapsed < budget_s,
        "criterion {id} exceeded its runtime budget: {elapsed:.1}s >= {budget_s}s"
    );
}

fn report_lines(reports: &[verify::VerificationReport]) {
    for r in reports {
        println!(
            "    {:<32} fitted {:>12.5e}  {:?}  {}",
            r.name, r.fitted_constant, r.verdict, r.notes
        );
    }
}

/// Criterion 1: dyadic-stack suite at depth 8 — every superlevel bound in
/// exact integer arithmetic, exact unit mass, under 30 seconds.
#[test]
fn acceptance_1_cantor_exact() {
    let _gate = gate();
    let t = Instant::now();
    let rep = cantor::cantor_lower_bound(8).unwrap();
    let mut pass = rep.l1_exact && rep.nesting_ok;
    for row in &rep.rows {
        println!(
            "    k = {}: cells {} >= {} ({})",
            row.k,
            row.superlevel_cells,
            row.required_cells,
            if row.pass { "ok" } else { "VIOLATED" }
        );
        pass &= row.pass;
    }
    println!(
        "    mass = {} exact = {}, weak-L1 of average = {:.4}",
        rep.l1_norm, rep.l1_exact, rep.weak_l1_of_avg
    );
    pass &= rep.l1_norm == 8.0f64.sqrt();
    banner(1, "cantor exact superlevel bounds", pass, t, 30.0);
}

/// Criterion 2: norm-separation pair at eps = 0.1 on the 512^2 sampling.
#[test]
fn acceptance_2_lorentz_pair() {
    let _gate = gate();
    let t = Instant::now();
    let eps = 0.1;
    let n = 512;
    let pair = separation::separation_pair(eps, n).unwrap();

    let inner: Vec<(f64, f64)> = pair
        .u1_slice_samples()
        .iter()
        .map(|(s, dt)| (weak_norm(s, 1.0), *dt))
        .collect();
    let nested = msa_core::norms::nested_from_slice_norms(&inner, LorentzParams::weak(1.0));
    let joint = weak_norm(&pair.u1_joint_sample(), 1.0);
    println!("    nested weak norm = {nested:.6} (want 1 +- 0.02)");
    println!("    joint weak norm  = {joint:.6} (want <= {:.4})", eps * 1.05);
    let mut pass = (nested - 1.0).abs() <= 0.02 && joint <= eps * 1.05;

    let joint2 = MeasuredSample::from_spacetime(&pair.u2);
    for k in 1..=3 {
        let alpha = (k as f64).exp();
        let measured = joint2.measure_above(alpha);
        let expect = (1.0 + alpha.ln()) / alpha;
        let rel = (measured - expect).abs() / expect;
        println!("    |{{u2 > e^{k}}}| = {measured:.6} vs {expect:.6} (rel {rel:.4})");
        pass &= rel <= 0.01;
    }

    let ts2 = pair.u2.time.as_ref().unwrap().clone();
    let h = 1.0 / n as f64;
    let mut worst_slice = 0.0f64;
    for j in 0..n {
        let sample =
            MeasuredSample::new(pair.u2.slice(j).iter().map(|&v| (v, h)).collect()).unwrap();
        let w = weak_norm(&sample, 1.0);
        worst_slice = worst_slice.max((w * ts2.time(j) - 1.0).abs());
    }
    println!("    worst per-slice deviation of t * ||u2(t)|| from 1: {worst_slice:.2e}");
    pass &= worst_slice <= 0.02;
    banner(2, "lorentz separation pair", pass, t, 60.0);
}

/// Criterion 3: scale-operator oracles — constant field within one ladder
/// step everywhere; the near-Dirac scale is the distance to the spike.
#[test]
fn acceptance_3_scale_oracles() {
    let _gate = gate();
    let t = Instant::now();
    let mut pass = true;

    // Constant field at 256^2.
    {
        let n = 256;
        let g = GridSpec::torus(2, n).unwrap();
        let c = 10.0;
        let alpha = 1.5;
        let f = ScalarField::constant(g, c);
        let ladder = ScaleLadder::new(2.0 / n as f64, 0.45, 8, 6).unwrap();
        let sf = multiscale::scale_op(&f, alpha, &ladder, AvgMode::Space).unwrap();
        let expect = c.powf(-1.0 / alpha);
        let tol = ladder.step_ratio();
        let mut worst = 0.0f64;
        for &s in &sf.s {
            worst = worst.max(s / expect).max(expect / s);
        }
        println!("    constant field: worst step factor {worst:.4} (allowed {tol:.4})");
        pass &= worst <= tol;
    }

    // Near-Dirac in 2-D (256^2) and 3-D (64^3).
    for (rank, n) in [(2usize, 256usize), (3, 64)] {
        let g = GridSpec::new(
            &vec![n; rank],
            &vec![2.0 / n as f64; rank],
            &vec![true; rank],
            &vec![-1.0; rank],
        )
        .unwrap();
        let mut f = ScalarField::zeros(g.clone(), None, Extension::Periodic);
        let idx = g.nearest(&[0.0; 3]);
        let k0 = g.linear(idx);
        f.data_mut()[k0] = ball_volume(rank, 1.0) / g.cell_vol();
        let spike = g.point_of(idx);
        let alpha = rank as f64 / 2.0;
        let h = g.h(0);
        let ladder = ScaleLadder::new(2.0 / n as f64, 0.95, 8, 2).unwrap();
        let sf = multiscale::scale_op(&f, alpha, &ladder, AvgMode::Space).unwrap();
        let allowed = ladder.step_ratio().powi(2);
        let mut worst = 0.0f64;
        for k in 0..g.len() {
            let r = g.distance(&spike, &g.point_of(g.unlinear(k)));
            if !(0.1..=0.9).contains(&r) {
                continue;
            }
            let s = sf.s[k];
            let factor = ((s / r).max(r / s) - 1.0) - 2.0 * h / r;
            worst = worst.max(factor / (allowed - 1.0));
        }
        println!("    near-Dirac {rank}-D: worst tolerance fraction {worst:.3}");
        pass &= worst <= 1.0;
    }
    banner(3, "scale-operator oracles", pass, t, 60.0);
}

/// Criterion 4: lemma property suites — 30 random fields at grids 32, 64,
/// zero pointwise violations beyond the stated ladder tolerance.
#[test]
fn acceptance_4_lemma_properties() {
    let _gate = gate();
    let t = Instant::now();
    let cfg = SuiteConfig::new(SuiteKind::LemmasSpace);
    let reports = verify::run_suite(&cfg).unwrap();
    report_lines(&reports);
    banner(4, "lemma property suites", verify::all_pass(&reports), t, 300.0);
}

/// Criterion 5: trace-estimate ratio stability across grids 32/64/128 for
/// the spatial, spacetime, anisotropic, and drift-trace bounds.
#[test]
fn acceptance_5_trace_ratio_stability() {
    let _gate = gate();
    let t = Instant::now();
    let mut pass = true;
    for kind in [
        SuiteKind::TraceSpace,
        SuiteKind::TraceSpacetime,
        SuiteKind::Anisotropic,
        SuiteKind::Lagrangian,
    ] {
        let cfg = SuiteConfig::new(kind);
        let reports = verify::run_suite(&cfg).unwrap();
        println!("  suite {kind}:");
        report_lines(&reports);
        pass &= verify::all_pass(&reports);
    }
    banner(5, "trace-estimate ratio stability", pass, t, 1200.0);
}

/// Criterion 6: zero-drift reduction at 1e-12 on 10 random fields, and the
/// trajectory-separation bound on 100 admissible shear cylinders.
#[test]
fn acceptance_6_lagrangian_reduction() {
    let _gate = gate();
    let t = Instant::now();
    let mut pass = true;

    // Reduction: skewed == straight with zero drift.
    {
        use msa_core::summer::FieldSummer;
        use rand::Rng;
        let n = 32;
        let grid = GridSpec::torus(2, n).unwrap();
        let ts = msa_core::grid::TimeSpec::new(32, 1.0 / 32.0, 0.5 / 32.0).unwrap();
        let params = lagrangian::AdmissibilityParams::default_for(2);
        let ctx = lagrangian::DriftContext::zero(&grid, Some(ts.clone()), params);
        let mut worst = 0.0f64;
        for trial in 0..10 {
            let mut rng = verify::randfields::trial_rng(1234, trial, 0xacc6);
            let f = verify::randfields::RandomScalar::draw(&mut rng, 2, 4, 3)
                .sample(&grid, Some(ts.clone()));
            let fs = FieldSummer::new(&f);
            for _ in 0..20 {
                let tt = rng.gen_range(0.3..0.95);
                let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.0];
                let rho = rng.gen_range(0.08..0.4);
                let a = lagrangian::skewed_cyl_average(&fs, &ctx, tt, &x, rho);
                let b = fs.cyl_average(tt, &x, rho);
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        println!("    zero-drift reduction: worst relative gap {worst:.2e}");
        pass &= worst <= 1e-12;
    }

    // Separation assertion on 100 admissible shear cylinders.
    {
        use msa_core::field::VectorField;
        use rand::Rng;
        let n = 32;
        let grid = GridSpec::boxed(&[n, n], &[1.0, 1.0]).unwrap();
        let ts = msa_core::grid::TimeSpec::new(32, 1.0 / 32.0, 0.5 / 32.0).unwrap();
        let params = lagrangian::AdmissibilityParams::default_for(2);
        let ladder = ScaleLadder::new(2.0 / n as f64, 0.4, 8, 3).unwrap();
        let mut checked = 0;
        let mut worst = 0.0f64;
        let mut trial = 0u64;
        while checked < 100 {
            trial += 1;
            let mut rng = verify::randfields::trial_rng(99, trial as usize, 0xc1c2acc);
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
            let b = VectorField::new(vec![bx, by]).unwrap();
            let ctx = lagrangian::DriftContext::prepare(&b, &ladder, params);
            let rho = (0.75 * (params.eta0 / kappa).sqrt()).min(0.28);
            let tt = rng.gen_range(0.6..0.95);
            let x = [rng.gen_range(0.4..0.6), rng.gen_range(0.4..0.6), 0.0];
            let cyl = lagrangian::skewed_cylinder(&ctx, &grid, tt, &x, rho);
            if !cyl.admissible {
                continue;
            }
            let sep =
                lagrangian::trajectory_separation_check(&ctx, &cyl, 1.0, 2.0, 10, 7 + trial)
                    .unwrap();
            worst = worst.max(sep);
            checked += 1;
        }
        println!("    separation over {checked} admissible cylinders: worst ratio {worst:.3}");
        pass &= worst < 2.0;
    }
    banner(6, "lagrangian reduction and separation", pass, t, 300.0);
}

/// Criterion 7: flow suite — residual, solver accuracy, energy inequality,
/// trace-ratio stability of the scale fields, the pointwise comparison,
/// and fitted-constant stability.
#[test]
fn acceptance_7_flow_suite() {
    let _gate = gate();
    let t = Instant::now();
    let cfg = SuiteConfig::new(SuiteKind::NsTheorems);
    let reports = verify::run_suite(&cfg).unwrap();
    report_lines(&reports);
    banner(7, "flow verification suite", verify::all_pass(&reports), t, 900.0);
}

/// Criterion 8: bit-exact determinism of suite reports across thread counts.
#[test]
fn acceptance_8_determinism() {
    let _gate = gate();
    let t = Instant::now();
    let mut cfg = SuiteConfig::new(SuiteKind::LemmasSpace);
    cfg.grids = vec![24, 32];
    cfg.trials = 5;
    let run_in_pool = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| verify::reports_to_json(&verify::run_suite(&cfg).unwrap()))
    };
    let one = run_in_pool(1);
    let four = run_in_pool(4);
    let again = run_in_pool(4);
    println!(
        "    report bytes: {} (1 thread) vs {} (4 threads)",
        one.len(),
        four.len()
    );
    let pass = one == four && four == again;
    banner(8, "bit-exact determinism", pass, t, 120.0);
}
