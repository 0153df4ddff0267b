//! `cmin`: batch driver. Exit status 0 when every requested target passes,
//! 1 when a target fails, 2 on errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use complete_minimal::config::{parse_config, RunConfig};
use complete_minimal::domain::{make_annulus, sample_grid, Region};
use complete_minimal::driver::{
    completeness_stage, default_basepoint, run_exhaustion, run_nonvanishing, StageReport, StageState,
};
use complete_minimal::export::{export_mesh, export_reports, export_scalar_csv, parse_reports};
use complete_minimal::labyrinth::{build_labyrinth, compute_mu, verify_metric_bound, DeformParams};
use complete_minimal::metric::metric_graph;
use complete_minimal::weierstrass::{
    check_real_periods, flux, induced_metric, integrate_immersion, isotropy_residual, WeierstrassTriple,
};
use complete_minimal::Error;

#[derive(Parser)]
#[command(name = "cmin", version, about = "Complete minimal surfaces with a prescribed harmonic coordinate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustion run with schedule 1/n² and distance targets n².
    Construct {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recursion keeping phi3 nonvanishing, optionally followed by an
    /// exhaustion run on the resulting third coordinate.
    Nonvanishing {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        compose: bool,
    },
    /// A single completeness stage from V_k to V_{k+1} of the tower.
    Stage {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        from: usize,
        /// Overrides `solver.epsilon`.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isotropy, real periods, flux and metric checks on a serialized triple.
    Verify {
        #[arg(long)]
        triple: PathBuf,
        #[arg(long, num_args = 2, default_values_t = [64, 256])]
        grid: Vec<usize>,
        /// Expected flux over the generator circle of an annular carrier.
        #[arg(long, num_args = 3, allow_negative_numbers = true)]
        flux: Option<Vec<f64>>,
        /// Check the labyrinth metric bound on the annulus r < |z| < R with parameter N.
        #[arg(long, num_args = 3, value_names = ["r", "R", "N"])]
        labyrinth: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Labyrinth description and node membership table.
    Labyrinth {
        #[arg(long)]
        inner: f64,
        #[arg(long)]
        outer: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, num_args = 2, default_values_t = [0, 1024])]
        grid: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Intrinsic distance from a point to the carrier boundary or to another point.
    Distance {
        #[arg(long)]
        triple: PathBuf,
        #[arg(long, num_args = 2, allow_negative_numbers = true)]
        from: Vec<f64>,
        #[arg(long, num_args = 2, allow_negative_numbers = true)]
        to: Option<Vec<f64>>,
        #[arg(long, num_args = 2, default_values_t = [128, 512])]
        grid: Vec<usize>,
        /// Distance field CSV.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// OBJ mesh of a serialized triple, or a CSV table from JSON-lines reports.
    Export {
        #[arg(long, conflicts_with = "reports")]
        triple: Option<PathBuf>,
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long, num_args = 2, default_values_t = [64, 256])]
        grid: Vec<usize>,
        #[arg(long, num_args = 2, allow_negative_numbers = true)]
        basepoint: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_config(&text)?)
}

fn read_triple(path: &Path) -> Result<WeierstrassTriple> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(WeierstrassTriple::from_json(&text)?)
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_reports(dir: &Path, reports: &[StageReport]) -> Result<()> {
    let (csv, jsonl) = export_reports(reports)?;
    write(&dir.join("reports.csv"), &csv)?;
    write(&dir.join("reports.jsonl"), &jsonl)
}

fn point(v: &[f64]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn print_reports(reports: &[StageReport]) {
    for r in reports {
        println!(
            "stage {}: change {:.3e} (< {:.3e} {}), distance {:.4} (> {:.4} {}), N = {}",
            r.stage,
            r.sup_change,
            r.sup_change_target,
            if r.sup_change_pass() { "ok" } else { "FAIL" },
            r.distance,
            r.distance_target,
            if r.distance_pass() { "ok" } else { "FAIL" },
            r.n
        );
    }
}

/// Ok(true) when all targets pass.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Construct { config, out } => {
            let cfg = read_config(&config)?;
            let dir = out_dir(&cfg, out)?;
            let p = cfg.prescription()?;
            match run_exhaustion(&p, &cfg.tower()?, cfg.domain.stages, &cfg.stage_settings()) {
                Ok(run) => {
                    print_reports(&run.reports);
                    write_reports(&dir, &run.reports)?;
                    write(&dir.join("triple.json"), &run.triple.to_json()?)?;
                    if cfg.output.mesh {
                        write(&dir.join("mesh.obj"), &export_mesh(&run.field)?)?;
                    }
                    Ok(run.all_passed())
                }
                Err(Error::StageFailure { stage, reason, report, mut partial }) => {
                    partial.push(*report);
                    print_reports(&partial);
                    write_reports(&dir, &partial)?;
                    eprintln!("stage {stage} failed: {reason}");
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Nonvanishing { config, out, compose } => {
            let cfg = read_config(&config)?;
            let dir = out_dir(&cfg, out)?;
            let p = cfg.prescription()?;
            let Some(psi) = p.phi3.as_laurent() else {
                bail!("the seed phi3 must be a Laurent polynomial");
            };
            let tower = cfg.tower()?;
            let settings = cfg.stage_settings();
            let run = match run_nonvanishing(&p.gauss, &psi, cfg.flux, &tower, cfg.domain.stages, cfg.solver.epsilon, &settings) {
                Ok(run) => run,
                Err(Error::StageFailure { stage, reason, report, mut partial }) => {
                    partial.push(*report);
                    write_reports(&dir, &partial)?;
                    eprintln!("stage {stage} failed: {reason}");
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            };
            write_reports(&dir, &run.reports)?;
            write(&dir.join("triple.json"), &run.triple.to_json()?)?;
            let summary = json!({
                "gauss_map": run.gauss.summary(),
                "drift_total": run.drift_total,
                "drift_bound": run.drift_bound,
                "initial_oscillation": run.initial_oscillation,
                "nonconstant": run.nonconstant(),
                "min_phi3": run.reports.iter().map(|r| r.min_phi3).fold(f64::INFINITY, f64::min),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            let mut ok = run.drift_within_bound() && run.gauss.omits_zero_and_infinity() && run.nonconstant();
            if compose {
                let composed = run.prescription(cfg.flux)?;
                let sub = dir.join("composed");
                fs::create_dir_all(&sub)?;
                match run_exhaustion(&composed, &tower, cfg.domain.stages, &settings) {
                    Ok(r) => {
                        print_reports(&r.reports);
                        write_reports(&sub, &r.reports)?;
                        ok &= r.all_passed();
                    }
                    Err(Error::StageFailure { stage, reason, report, mut partial }) => {
                        partial.push(*report);
                        print_reports(&partial);
                        write_reports(&sub, &partial)?;
                        eprintln!("composed stage {stage} failed: {reason}");
                        ok = false;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(ok)
        }
        Command::Stage { config, from, epsilon, out } => {
            let cfg = read_config(&config)?;
            let tower = cfg.tower()?;
            if from == 0 || from >= tower.len() {
                bail!("--from must be in 1..{}", tower.len());
            }
            let p = cfg.prescription()?;
            let u = *tower.stage(from);
            let prev = StageState {
                region: u,
                triple: p.initial_triple(u)?,
                basepoint: default_basepoint(&u),
            };
            let eps = epsilon.unwrap_or(cfg.solver.epsilon);
            let (report, ok) = match completeness_stage(from + 1, &prev, tower.stage(from + 1), &p, eps, &cfg.stage_settings()) {
                Ok(o) => {
                    if let Some(dir) = &out {
                        fs::create_dir_all(dir)?;
                        write(&dir.join("triple.json"), &o.state.triple.to_json()?)?;
                        write(&dir.join("mesh.obj"), &export_mesh(&o.field)?)?;
                    }
                    let ok = o.report.passed();
                    (o.report, ok)
                }
                Err(Error::StageFailure { reason, report, .. }) => {
                    eprintln!("stage failed: {reason}");
                    (*report, false)
                }
                Err(e) => return Err(e.into()),
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ok)
        }
        Command::Verify { triple, grid, flux: want, labyrinth, tol } => {
            let t = read_triple(&triple)?;
            let g = sample_grid(&t.carrier, grid[0], grid[1])?;
            let iso = isotropy_residual(&t, &g);
            let metric = induced_metric(&t, &g);
            let mut ok = iso < tol && metric.is_ok();
            let mut summary = json!({
                "isotropy": iso,
                "metric_min": metric.as_ref().map(|m| m.min()).ok(),
                "metric_error": metric.as_ref().err().map(|e| e.to_string()),
            });
            if let Region::Annulus(a) = t.carrier {
                let periods = check_real_periods(&t, &t.carrier, 1e-9);
                ok &= periods.is_ok();
                let f = flux(&t, &complete_minimal::domain::generator_cycle(&a));
                summary["flux"] = json!(f);
                summary["real_periods_ok"] = json!(periods.is_ok());
                if let Some(w) = &want {
                    let err = (0..3).map(|j| (f[j] - w[j]).abs()).fold(0.0, f64::max);
                    summary["flux_err"] = json!(err);
                    ok &= err <= 1e-6;
                }
            }
            if let Some(l) = &labyrinth {
                let n = l[2] as usize;
                let c = make_annulus(l[0], l[1])?;
                let spec = build_labyrinth(&c, n)?;
                let lg = complete_minimal::metric::crossing_grid(&c, n, 3, 1024)?;
                let mu = compute_mu(t.phi3(), &c, &lg)?;
                let m = t
                    .gauss
                    .as_ref()
                    .and_then(|p| p.numer.as_monomial().filter(|(k, _)| *k == 0).map(|(_, v)| v.norm()))
                    .unwrap_or_else(|| DeformParams::default_m(n));
                match verify_metric_bound(&t, &spec, &DeformParams { mu, m }, &lg) {
                    Ok(r) => summary["metric_bound"] = serde_json::to_value(&r)?,
                    Err(e) => {
                        summary["metric_bound_error"] = json!(e.to_string());
                        ok = false;
                    }
                }
            }
            summary["pass"] = json!(ok);
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ok)
        }
        Command::Labyrinth { inner, outer, n, grid, out } => {
            let c = make_annulus(inner, outer)?;
            let spec = build_labyrinth(&c, n)?;
            let radial = if grid[0] == 0 {
                complete_minimal::labyrinth::radial_count_for(&c, n, 3)
            } else {
                grid[0]
            };
            let g = sample_grid(&Region::Annulus(c), radial, grid[1])?;
            fs::create_dir_all(&out)?;
            write(&out.join("labyrinth.json"), &spec.to_json()?)?;
            write(&out.join("membership.csv"), &spec.membership_csv(&g))?;
            println!("{} bands, thickness {:.6e}", spec.bands.len(), spec.thickness());
            Ok(true)
        }
        Command::Distance { triple, from, to, grid, field } => {
            let t = read_triple(&triple)?;
            let g = sample_grid(&t.carrier, grid[0], grid[1])?;
            let graph = metric_graph(&g, &induced_metric(&t, &g)?)?;
            let src = g.nearest_node(point(&from));
            let targets = match &to {
                Some(p) => vec![g.nearest_node(point(p))],
                None => g.boundary(),
            };
            let d = graph.set_distance(&[src], &targets)?;
            if let Some(path) = field {
                let all = graph.distances_from(&[src]);
                let f = integrate_immersion(&t, g.z(src), &g, None)?;
                write(&path, &export_scalar_csv(&f, &all, "distance")?)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "distance": d,
                    "source": [g.z(src).re, g.z(src).im],
                    "max_lambda_ratio": graph.max_lambda_ratio(),
                }))?
            );
            Ok(true)
        }
        Command::Export { triple, reports, grid, basepoint, out } => {
            if let Some(path) = reports {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let (csv, _) = export_reports(&parse_reports(&text)?)?;
                write(&out, &csv)?;
                return Ok(true);
            }
            let Some(path) = triple else {
                bail!("pass --triple or --reports");
            };
            let t = read_triple(&path)?;
            let g = sample_grid(&t.carrier, grid[0], grid[1])?;
            let p0 = basepoint.map(|b| point(&b)).unwrap_or_else(|| default_basepoint(&t.carrier));
            let f = integrate_immersion(&t, p0, &g, None)?;
            write(&out, &export_mesh(&f)?)?;
            Ok(true)
        }
    }
}
