//! The `vfsim` command-line driver.
//!
//! Subcommands:
//! * `run` — evolve the configured filament and write frames, manifest and
//!   diagnostics;
//! * `validate` — run the verification suite, one pass/fail line per
//!   experiment, nonzero exit on any failure;
//! * `energy-report` — modified-energy report of the initial filament;
//! * `convergence` — regularization-limit and step-size studies.
//!
//! Exit codes: 0 success, 1 experiment or run failure, 2 usage or
//! configuration error.

use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::energy::{energy_rate_monitor, modified_energy};
use crate::error::{Error, Result};
use crate::filament::{nls_residual_series, Filament, GeometryReport};
use crate::io::{
    build_initial, parse_config, write_diagnostics, write_trajectory, DiagnosticsTable, RunConfig,
};
use crate::solver::{evolve, Termination, Trajectory};
use crate::validation::{
    random_band_limited_filament, run_continuous_dependence, run_convergence_dt,
    run_convergence_epsilon, run_stretch_dichotomy, traveling_ring_oracle, ExperimentResult,
};
use rand::SeedableRng;

#[derive(Parser)]
#[command(
    name = "vfsim",
    about = "Pseudo-spectral closed vortex filament simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides outputs.directory from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial filament and write the trajectory.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full verification suite.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the randomized ensemble checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the modified-energy report of the initial filament.
    EnergyReport {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the regularization-limit and step-size studies.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    let outcome = match &cli.command {
        Command::Run { common } => with_config(common, cmd_run),
        Command::Validate { common, seed } => {
            let seed = *seed;
            with_config(common, move |ctx| cmd_validate(ctx, seed))
        }
        Command::EnergyReport { common } => with_config(common, cmd_energy_report),
        Command::Convergence { common } => with_config(common, cmd_convergence),
    };
    match outcome {
        Ok(code) => code,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(other) => {
            eprintln!("error: {other}");
            1
        }
    }
}

struct Context {
    config: RunConfig,
    out_dir: PathBuf,
    quiet: bool,
}

impl Context {
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }
}

fn with_config(common: &CommonArgs, f: impl FnOnce(Context) -> Result<i32>) -> Result<i32> {
    let text = fs::read_to_string(&common.config).map_err(|e| Error::io(&common.config, e))?;
    let config = parse_config(&text)?;
    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| config.outputs.directory.clone());
    f(Context {
        config,
        out_dir,
        quiet: common.quiet,
    })
}

fn geometry_or_none(f: &Filament, with_hasimoto: bool) -> Option<GeometryReport> {
    match f.geometry_report(with_hasimoto) {
        Ok(rep) => Some(rep),
        Err(Error::HasimotoUndefined { report, .. }) => Some(*report),
        Err(_) => None,
    }
}

fn diagnostics_for(config: &RunConfig, traj: &Trajectory) -> Result<DiagnosticsTable> {
    let diag = &config.outputs.diagnostics;
    let times = traj.times();
    let mut table = DiagnosticsTable::new(times.clone());

    let reports: Vec<Option<GeometryReport>> = traj
        .frames
        .iter()
        .map(|(_, f)| geometry_or_none(f, diag.hasimoto))
        .collect();

    if diag.geometry {
        let pick = |g: fn(&GeometryReport) -> f64| -> Vec<f64> {
            reports
                .iter()
                .map(|r| r.as_ref().map(g).unwrap_or(f64::NAN))
                .collect()
        };
        table.push("arc_length", pick(|r| r.arc_length));
        table.push("min_speed", pick(|r| r.min_speed));
        table.push(
            "kappa_max",
            pick(|r| r.curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        );
    }

    for &k in &diag.energy_orders {
        let mut energy = Vec::with_capacity(traj.frames.len());
        let mut ratio = Vec::with_capacity(traj.frames.len());
        for (_, f) in &traj.frames {
            let report = modified_energy(f, k, diag.energy_variant)?;
            energy.push(report.e_k);
            ratio.push(report.ratio);
        }
        table.push(&format!("e_{k}"), energy);
        table.push(&format!("ratio_{k}"), ratio);
    }

    if diag.hasimoto {
        let mut column = vec![f64::NAN; times.len()];
        let all_present = reports.iter().all(|r| {
            r.as_ref()
                .map(|rep| rep.hasimoto.is_some())
                .unwrap_or(false)
        });
        if all_present && times.len() >= 3 {
            let owned: Vec<GeometryReport> =
                reports.iter().map(|r| r.clone().unwrap()).collect();
            if let Ok(series) = nls_residual_series(&times, &owned) {
                for (i, v) in series.into_iter().enumerate() {
                    column[i + 1] = v;
                }
            }
        }
        table.push("nls_residual", column);
    }
    Ok(table)
}

fn cmd_run(ctx: Context) -> Result<i32> {
    let solver_cfg = ctx.config.solver_config();
    let f0 = build_initial(&ctx.config)?;
    let traj = evolve(&f0, &ctx.config.flow, &solver_cfg)?;
    let manifest = write_trajectory(&traj, Some(&ctx.config), &ctx.out_dir)?;
    let table = diagnostics_for(&ctx.config, &traj)?;
    let diag_path = write_diagnostics(&table, &ctx.out_dir, "diagnostics.csv")?;
    ctx.say(&format!(
        "run complete: {} frames -> {}",
        manifest.frame_count,
        ctx.out_dir.display()
    ));
    ctx.say(&format!("diagnostics: {}", diag_path.display()));
    match &traj.termination {
        Termination::Completed => {}
        other => ctx.say(&format!("terminated early: {other:?}")),
    }
    Ok(0)
}

fn report_experiment(result: &ExperimentResult) -> bool {
    let status = if result.verdict { "PASS" } else { "FAIL" };
    let mut line = format!("{status}  {}", result.name);
    for key in ["sup_distance", "drift_rotation", "drift_strain", "sup_h3_difference", "ratios"] {
        if let Some(values) = result.observations.get(key) {
            let rendered: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
            line.push_str(&format!("  {key} = [{}]", rendered.join(", ")));
        }
    }
    // always print verdict lines, even under --quiet
    println!("{line}");
    result.verdict
}

fn cmd_validate(ctx: Context, seed: u64) -> Result<i32> {
    let mut all_pass = true;
    let out = Some(ctx.out_dir.as_path());
    let thresholds = ctx.config.thresholds.clone();

    // exact traveling-ring oracle at the configured resolution
    {
        let mut cfg = ctx.config.solver_config();
        cfg.epsilon = 0.0;
        cfg.integrator = crate::solver::Integrator::Rk4Dealiased;
        let radius = 1.0 / (2.0 * std::f64::consts::PI);
        let f0 = Filament::circle(radius, cfg.grid)?;
        let traj = evolve(&f0, &crate::flows::FlowField::Zero, &cfg)?;
        let mut worst: f64 = 0.0;
        for (t, f) in &traj.frames {
            let oracle = traveling_ring_oracle(radius, *t, cfg.grid)?;
            let err = f
                .positions()
                .iter()
                .zip(oracle.positions())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
        let pass = matches!(traj.termination, Termination::Completed) && worst <= 1e-10;
        println!(
            "{}  traveling_ring  sup_error = {worst:.3e}",
            if pass { "PASS" } else { "FAIL" }
        );
        all_pass &= pass;
    }

    // stretching dichotomy on its benchmark ellipse (first-order stretching
    // under the strain, unlike a centered circle)
    {
        let mut cfg = ctx.config.solver_config();
        cfg.epsilon = 0.0;
        cfg.integrator = crate::solver::Integrator::Rk4Dealiased;
        cfg.horizon = 0.05;
        let radius = 1.0 / (2.0 * std::f64::consts::PI);
        let f0 = Filament::ellipse(1.2 * radius, 0.8 * radius, cfg.grid)?;
        let result = run_stretch_dichotomy(&cfg, &f0, &thresholds, out)?;
        all_pass &= report_experiment(&result);
    }

    // regularization limit
    {
        let mut cfg = ctx.config.solver_config();
        cfg.horizon = 0.02;
        let f0 = build_initial(&ctx.config)?;
        let result = run_convergence_epsilon(
            &cfg,
            &[1e-3, 5e-4, 2.5e-4],
            &ctx.config.flow,
            &f0,
            out,
        )?;
        all_pass &= report_experiment(&result);
    }

    // step-size order
    {
        let mut cfg = ctx.config.solver_config();
        cfg.horizon = 0.1;
        let result = run_convergence_dt(&cfg, out)?;
        all_pass &= report_experiment(&result);
    }

    // continuous dependence
    {
        let mut cfg = ctx.config.solver_config();
        cfg.epsilon = 0.0;
        cfg.integrator = crate::solver::Integrator::Rk4Dealiased;
        cfg.horizon = 0.02;
        let f0 = build_initial(&ctx.config)?;
        let result = run_continuous_dependence(&cfg, &f0, 1e-4, &thresholds, out)?;
        all_pass &= report_experiment(&result);
    }

    // energy identities over a seeded ensemble
    {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst_gauge: f64 = 0.0;
        let mut worst_lagrange: f64 = 0.0;
        for _ in 0..20 {
            let f = random_band_limited_filament(&mut rng, 128)?;
            let v = f.derivative_values(1)?;
            for k in 3..=5usize {
                let (h, z) = crate::energy::compute_hk_zk(&f, k)?;
                let vk = f.derivative_values(k as u32 + 1)?;
                for j in 0..v.len() {
                    let lhs = v[j].norm_squared() * vk[j].norm_squared();
                    let rhs = h[j] * h[j] + z[j].norm_squared();
                    worst_lagrange = worst_lagrange.max((lhs - rhs).abs() / lhs.max(1.0));
                }
                let speeds: Vec<f64> = v.iter().map(|t| t.norm()).collect();
                let f_grid: Vec<f64> = speeds.iter().map(|s| s.powi(-3)).collect();
                let a_grid: Vec<f64> =
                    speeds.iter().map(|s| s.powf(k as f64 + 2.5)).collect();
                let f_xi = crate::spectral::scalar_derivative(&f_grid, 1)?;
                let a_xi = crate::spectral::scalar_derivative(&a_grid, 1)?;
                let coef = (2 * k + 5) as f64 / 3.0;
                for j in 0..speeds.len() {
                    let r = 2.0 * f_grid[j] * a_xi[j] + coef * f_xi[j] * a_grid[j];
                    worst_gauge = worst_gauge.max(r.abs());
                }
            }
        }
        let pass = worst_gauge <= 1e-10 && worst_lagrange <= 1e-10;
        println!(
            "{}  energy_identities  gauge_residual = {worst_gauge:.3e}  lagrange = {worst_lagrange:.3e}",
            if pass { "PASS" } else { "FAIL" }
        );
        all_pass &= pass;
    }

    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_energy_report(ctx: Context) -> Result<i32> {
    let f0 = build_initial(&ctx.config)?;
    let diag = &ctx.config.outputs.diagnostics;
    let mut reports = Vec::new();
    for &k in &diag.energy_orders {
        let report = modified_energy(&f0, k, diag.energy_variant)?;
        ctx.say(&format!(
            "k = {k}: E = {:.6e}, ||x||_{{k+2}}^2 = {:.6e}, ratio = {:.6e}",
            report.e_k, report.sobolev_sq, report.ratio
        ));
        reports.push(report);
    }
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| Error::Input(format!("report serialization: {e}")))?;
    let path = ctx.out_dir.join("energy_report.json");
    fs::create_dir_all(&ctx.out_dir).map_err(|e| Error::io(&ctx.out_dir, e))?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    ctx.say(&format!("energy report: {}", path.display()));
    Ok(0)
}

fn cmd_convergence(ctx: Context) -> Result<i32> {
    let out = Some(ctx.out_dir.as_path());
    let f0 = build_initial(&ctx.config)?;
    let mut all_pass = true;

    let mut eps_cfg = ctx.config.solver_config();
    eps_cfg.horizon = eps_cfg.horizon.min(0.02);
    let eps_result =
        run_convergence_epsilon(&eps_cfg, &[1e-3, 5e-4, 2.5e-4], &ctx.config.flow, &f0, out)?;
    all_pass &= report_experiment(&eps_result);

    let dt_result = run_convergence_dt(&ctx.config.solver_config(), out)?;
    all_pass &= report_experiment(&dt_result);

    // monitor the energy growth margin along the configured run
    let traj = evolve(&f0, &ctx.config.flow, &ctx.config.solver_config())?;
    if traj.frames.len() >= 3 {
        if let Some(&k) = ctx.config.outputs.diagnostics.energy_orders.first() {
            let series = energy_rate_monitor(&traj, k)?;
            let mut table = DiagnosticsTable::new(series.times[1..series.times.len() - 1].to_vec());
            table.push("energy_rate", series.rate.clone());
            table.push("bound_margin", series.bound_margin.clone());
            let path = write_diagnostics(&table, &ctx.out_dir, "energy_rate.csv")?;
            ctx.say(&format!(
                "energy growth: empirical C1 = {:.4e} -> {}",
                series.c1_empirical,
                path.display()
            ));
        }
    }

    Ok(if all_pass { 0 } else { 1 })
}
