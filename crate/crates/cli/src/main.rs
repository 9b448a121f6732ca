//! `msa`: generate synthetic flow data, run scale operators, and drive the
//! verification suites.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 resource
//! limit. `MSA_THREADS` caps the worker pool.

use clap::{Parser, Subcommand, ValueEnum};
use msa_core::error::Error as CoreError;
use msa_core::field::{Extension, Field, ScalarField};
use msa_core::ladder::ScaleLadder;
use msa_core::lagrangian::{self, AdmissibilityParams, DriftContext};
use msa_core::msf;
use msa_core::multiscale::{self, AvgMode};
use msa_core::ns;
use msa_core::verify::{self, lattice, SuiteConfig, SuiteKind};
use msa_core::cantor;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "msa", version, about = "multiscale averaging operators and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    TaylorGreen,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Space,
    Spacetime,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic flow series (MSF files plus an energy CSV).
    Gen {
        #[arg(long, value_enum, default_value = "taylor-green")]
        field: FieldKind,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 21)]
        snapshots: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scale and averaging operator of a sampled field.
    Scale {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "space")]
        mode: Mode,
        /// Ladder as `rungs_per_octave,bisections`.
        #[arg(long, default_value = "8,6")]
        ladder: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Capped (drift-skewed) scale operator of a spacetime field.
    LagrangianScale {
        #[arg(long)]
        alpha: f64,
        /// Admissibility threshold; defaults to the universal value.
        #[arg(long)]
        eta0: Option<f64>,
        #[arg(long)]
        drift: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dump one skewed cylinder backbone as JSON: "t,x0,x1[,x2],rho".
        #[arg(long)]
        dump_cylinder: Option<String>,
    },
    /// Dyadic-stack construction: exact superlevel table.
    Cantor {
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated grid sizes.
        #[arg(long)]
        grids: Option<String>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Mixed-norm lattice of higher derivatives on a vortex series (CSV).
    Lattice {
        #[arg(long, default_value_t = 48)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.5)]
        tmax: f64,
        #[arg(long, default_value_t = 11)]
        snapshots: usize,
        #[arg(long, default_value_t = 0.05)]
        t0: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Resource(_)) => 3,
        Some(CoreError::UnknownSuite(_)) => 2,
        Some(CoreError::Parameter(_)) | Some(CoreError::Config(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("MSA_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn parse_grids(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Gen {
            field,
            nu,
            grid,
            tmax,
            dt,
            amplitude,
            snapshots,
            seed,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let series = match field {
                FieldKind::TaylorGreen => ns::taylor_green(grid, nu, amplitude, tmax, snapshots),
                FieldKind::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let h = ns::spectral::TAU / grid as f64;
                    let mut w0 = vec![0.0; grid * grid];
                    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
                        .map(|_| {
                            (
                                rng.gen_range(1..4) as f64,
                                rng.gen_range(1..4) as f64,
                                amplitude * rng.gen_range(-1.0..1.0),
                                rng.gen_range(0.0..ns::spectral::TAU),
                            )
                        })
                        .collect();
                    for i in 0..grid {
                        for j in 0..grid {
                            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                            w0[i * grid + j] = modes
                                .iter()
                                .map(|&(kx, ky, a, ph)| a * (kx * x + ky * y + ph).sin())
                                .sum();
                        }
                    }
                    let snap_every =
                        ((tmax / dt) as usize / snapshots.max(1).saturating_sub(1).max(1)).max(1);
                    ns::spectral_solve(
                        grid,
                        &w0,
                        &ns::spectral::SolveConfig {
                            nu,
                            t_end: tmax,
                            dt,
                            snap_every,
                        },
                    )?
                }
            };
            msf::save_vector(&series.u, &out.join("u.msf"), "velocity")?;
            msf::save_vector(&series.omega, &out.join("omega.msf"), "vorticity")?;
            msf::save_scalar(&series.pressure, &out.join("pressure.msf"), "pressure")?;
            msf::save_scalar(&series.grad_u_norm, &out.join("grad_u.msf"), "grad-norm")?;
            msf::save_scalar(&series.hess_p_norm, &out.join("hess_p.msf"), "hessian-norm")?;
            let mut csv = String::from("t,kinetic,dissipation_rate,dissipation_integral\n");
            for r in &series.energy {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.t, r.kinetic, r.dissipation_rate, r.dissipation_integral
                ));
            }
            std::fs::write(out.join("energy.csv"), csv)?;
            println!(
                "wrote series ({} snapshots, grid {}x{}x{}) to {}",
                series.time.nt,
                grid,
                grid,
                ns::Z_CELLS,
                out.display()
            );
            Ok(true)
        }

        Command::Scale {
            alpha,
            mode,
            ladder,
            input,
            out,
        } => {
            let (per_octave, bisections) = {
                let parts: Vec<&str> = ladder.split(',').collect();
                if parts.len() != 2 {
                    anyhow::bail!(CoreError::Parameter(format!(
                        "--ladder expects k,m, got {ladder}"
                    )));
                }
                (parts[0].trim().parse::<u32>()?, parts[1].trim().parse::<u32>()?)
            };
            let f = msf::load_scalar(&input)?;
            let ladder = ScaleLadder::new(
                f.grid.max_h(),
                0.5 * f.grid.min_extent(),
                per_octave,
                bisections,
            )?;
            let mode = match mode {
                Mode::Space => AvgMode::Space,
                Mode::Spacetime => AvgMode::Spacetime,
            };
            let sf = multiscale::scale_op(&f, alpha, &ladder, mode)?;
            save_with_suffix(&sf.s_field(), &out, "s", "scale")?;
            save_with_suffix(&sf.a_field(), &out, "a", "average")?;
            std::fs::write(path_with_suffix(&out, "labels", "bin"), sf.label_bytes())?;
            println!(
                "scale field written; average-identity deviation {:.3e}",
                sf.cert_max_rel_dev
            );
            Ok(true)
        }

        Command::LagrangianScale {
            alpha,
            eta0,
            drift,
            input,
            out,
            dump_cylinder,
        } => {
            let b = msf::load_vector(&drift)?;
            let f = msf::load_scalar(&input)?;
            let mut params = AdmissibilityParams::default_for(b.grid().rank());
            if let Some(e) = eta0 {
                params.eta0 = e;
            }
            let ladder = ScaleLadder::new(
                f.grid.max_h(),
                0.5 * f.grid.min_extent(),
                8,
                4,
            )?;
            let ctx = DriftContext::prepare(&b, &ladder, params);
            if let Some(spec) = dump_cylinder {
                let vals: Vec<f64> = spec
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()?;
                if vals.len() != f.grid.rank() + 2 {
                    anyhow::bail!(CoreError::Parameter(
                        "--dump-cylinder expects t,coords...,rho".into()
                    ));
                }
                let t = vals[0];
                let mut x = [0.0; 3];
                x[..f.grid.rank()].copy_from_slice(&vals[1..vals.len() - 1]);
                let rho = *vals.last().unwrap();
                let cyl = lagrangian::skewed_cylinder(&ctx, &f.grid, t, &x, rho);
                let poly: Vec<serde_json::Value> = cyl
                    .backbone
                    .iter()
                    .map(|(s, p)| {
                        serde_json::json!({"t": s, "x": p[..f.grid.rank()].to_vec()})
                    })
                    .collect();
                let dump = serde_json::json!({
                    "anchor_t": cyl.t,
                    "rho": cyl.rho,
                    "admissible": cyl.admissible,
                    "contained": cyl.contained,
                    "backbone": poly,
                });
                std::fs::write(
                    path_with_suffix(&out, "cylinder", "json"),
                    serde_json::to_string_pretty(&dump)?,
                )?;
            }
            let capped = lagrangian::capped_scale_op(&f, &ctx, alpha, &ladder)?;
            let time = f.time.clone();
            let mk = |vals: Vec<f64>| {
                ScalarField::new(f.grid.clone(), time.clone(), Extension::ZeroOutside, vals)
            };
            let s_field = mk(capped.samples.iter().map(|s| s.s).collect())?;
            let a_field = mk(capped.samples.iter().map(|s| s.a_wedge()).collect())?;
            save_with_suffix(&s_field, &out, "s", "capped-scale")?;
            save_with_suffix(&a_field, &out, "a", "capped-average")?;
            let labels: Vec<u8> = capped
                .samples
                .iter()
                .map(|s| match s.label {
                    lagrangian::CappedLabel::SingEq => 0,
                    lagrangian::CappedLabel::SingLt => 1,
                    lagrangian::CappedLabel::RegEq => 2,
                    lagrangian::CappedLabel::RegLt => 3,
                })
                .collect();
            std::fs::write(path_with_suffix(&out, "labels", "bin"), labels)?;
            println!("capped scale field written ({} anchors)", capped.samples.len());
            Ok(true)
        }

        Command::Cantor { depth, report } => {
            let rep = cantor::cantor_lower_bound(depth)?;
            let pass = rep.rows.iter().all(|r| r.pass) && rep.l1_exact && rep.nesting_ok;
            for r in &rep.rows {
                println!(
                    "k = {:>2}: superlevel cells {:>12} >= required {:>12}  {}",
                    r.k,
                    r.superlevel_cells,
                    r.required_cells,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            println!(
                "mass = {} (exact: {}), nesting: {}, weak-L1 of average = {:.4}",
                rep.l1_norm, rep.l1_exact, rep.nesting_ok, rep.weak_l1_of_avg
            );
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
            }
            Ok(pass)
        }

        Command::Verify {
            suite,
            trials,
            grids,
            seed,
            depth,
            epsilon,
            report,
            csv,
        } => {
            let kind = SuiteKind::from_str(&suite)?;
            let mut cfg = SuiteConfig::new(kind);
            cfg.seed = seed;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(g) = grids {
                cfg.grids = parse_grids(&g)?;
            }
            if let Some(d) = depth {
                cfg.depth = d;
            }
            if let Some(e) = epsilon {
                cfg.epsilon = e;
            }
            let reports = verify::run_suite(&cfg)?;
            for r in &reports {
                println!(
                    "{:<32} fitted {:>12.5e}  {:?}  {}",
                    r.name, r.fitted_constant, r.verdict, r.notes
                );
            }
            if let Some(path) = report {
                std::fs::write(&path, verify::reports_to_json(&reports))?;
            }
            if let Some(path) = csv {
                let mut out = String::from("name,trial,grid,lhs,rhs,ratio\n");
                for r in &reports {
                    for t in &r.trials {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.name, t.trial, t.grid, t.lhs, t.rhs, t.ratio
                        ));
                    }
                }
                std::fs::write(&path, out)?;
            }
            Ok(verify::all_pass(&reports))
        }

        Command::Lattice {
            grid,
            nu,
            amplitude,
            tmax,
            snapshots,
            t0,
            csv,
        } => {
            let series = ns::taylor_green(grid, nu, amplitude, tmax, snapshots);
            let rows = lattice::figure_lattice(&series, t0);
            let text = lattice::lattice_csv(&rows);
            match csv {
                Some(path) => std::fs::write(&path, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn path_with_suffix(prefix: &PathBuf, suffix: &str, ext: &str) -> PathBuf {
    let mut s = prefix.clone().into_os_string();
    s.push(format!("_{suffix}.{ext}"));
    PathBuf::from(s)
}

fn save_with_suffix(
    f: &ScalarField,
    prefix: &PathBuf,
    suffix: &str,
    role: &str,
) -> anyhow::Result<()> {
    msf::save_field(
        &Field::Scalar(f.clone()),
        &path_with_suffix(prefix, suffix, "msf"),
        role,
    )?;
    Ok(())
}
