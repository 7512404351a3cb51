//! Subcommand dispatch and artifact writers for the `nlqw` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::coins::{perturbation_exponent_check, CoinFamily};
use crate::config::{parse_config, RunConfig};
use crate::dynamics::evolve_with;
use crate::error::{Error, Result};
use crate::io::sig17;
use crate::lattice::LatticeState;
use crate::scattering::{extract_asymptotic, ScatteringResult};
use crate::spectral::{limit_density, DensitySummary};
use crate::wlt::{verify, ConvergenceReport};

#[derive(Debug, Parser)]
#[command(name = "nlqw", version, about = "Nonlinear quantum walk simulator and weak-limit toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the walk and write the position distribution.
    Evolve(CommonArgs),
    /// Extract the asymptotic state u+.
    Scatter(CommonArgs),
    /// Sample the weak-limit velocity density of u+.
    Density(CommonArgs),
    /// Compare X_t / t with the weak-limit density at each checkpoint.
    Verify(CommonArgs),
    /// Run `verify` over a grid of (family, m, g).
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep`.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Scattering tolerance (overrides the config).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest scattering time, a power of two (overrides the config).
    #[arg(long = "t-max")]
    pub t_max: Option<u64>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Evolve(a)
            | Command::Scatter(a)
            | Command::Density(a)
            | Command::Verify(a)
            | Command::Sweep(a) => a,
        }
    }
}

/// Parses `argv`, runs the subcommand and maps failures to exit codes:
/// 0 ok, 1 runtime error, 2 usage or validation error.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Parse(_) | Error::Validation(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Loads the config named by `args` and applies command-line overrides.
pub fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = parse_config(&text)?;
    if let Some(tol) = args.tol {
        config.tol = tol;
    }
    if let Some(t_max) = args.t_max {
        config.t_max = t_max;
    }
    if args.jobs == 0 {
        return Err(Error::Validation(vec!["--jobs must be >= 1".into()]));
    }
    config.validate()?;
    Ok(config)
}

pub fn run(command: &Command) -> Result<()> {
    let args = command.args();
    let config = load_config(args)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    match command {
        Command::Evolve(_) => run_evolve(&config, &out),
        Command::Scatter(_) => run_scatter(&config, &out),
        Command::Density(_) => run_density(&config, &out),
        Command::Verify(_) => run_verify(&config, &out).map(|_| ()),
        Command::Sweep(a) => run_sweep(&config, &out, a.jobs),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn run_evolve(config: &RunConfig, out: &Path) -> Result<()> {
    let walk = config.walk_config()?;
    let norm0 = walk.initial.norm_l2();
    let steps_dir = out.join("steps");
    if config.per_step {
        fs::create_dir_all(&steps_dir)?;
    }
    let mut io_error = None;
    let final_state = evolve_with(&walk, |t, u| {
        if config.per_step && io_error.is_none() {
            let res = u
                .position_distribution()
                .map(|p| p.to_csv())
                .and_then(|csv| Ok(fs::write(steps_dir.join(format!("p_t{t:06}.csv")), csv)?));
            if let Err(e) = res {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    fs::write(
        out.join("distribution.csv"),
        final_state.position_distribution()?.to_csv(),
    )?;
    let support = final_state.support();
    write_json(
        &out.join("summary.json"),
        &json!({
            "T": walk.horizon,
            "norm_drift": (final_state.norm_l2() - norm0).abs(),
            "support": support.map(|(lo, hi)| vec![lo, hi]),
        }),
    )
}

/// CSV `x,re_up,im_up,re_down,im_down`.
pub fn state_csv(u: &LatticeState) -> String {
    let mut out = String::from("x,re_up,im_up,re_down,im_down\n");
    for (x, s) in u.iter() {
        let _ = writeln!(
            out,
            "{x},{},{},{},{}",
            sig17(s.up.re),
            sig17(s.up.im),
            sig17(s.down.re),
            sig17(s.down.im)
        );
    }
    out
}

fn scatter_json(r: &ScatteringResult) -> serde_json::Value {
    json!({
        "converged": r.converged,
        "final_T": r.final_t,
        "defects": r.trace.iter().map(|s| s.defect).collect::<Vec<_>>(),
        "trace": r.trace,
        "tail_mass": r.tail_mass,
        "u_plus_norm": r.u_plus.norm_l2(),
    })
}

pub fn run_scatter(config: &RunConfig, out: &Path) -> Result<()> {
    let model = config.model()?;
    let r = extract_asymptotic(&config.initial_state(), &model, config.tol, config.t_max)?;
    fs::write(out.join("u_plus.csv"), state_csv(&r.u_plus))?;
    let mut summary = scatter_json(&r);
    summary["hypotheses"] = serde_json::to_value(perturbation_exponent_check(&model, 1.0, 21))?;
    write_json(&out.join("scatter.json"), &summary)
}

/// `u+` for a config: `u0` for linear models, otherwise the scattering limit.
pub fn asymptotic_state(config: &RunConfig) -> Result<(LatticeState, Option<ScatteringResult>)> {
    let model = config.model()?;
    let u0 = config.initial_state();
    if model.is_linear() {
        Ok((u0, None))
    } else {
        let r = extract_asymptotic(&u0, &model, config.tol, config.t_max)?;
        Ok((r.u_plus.clone(), Some(r)))
    }
}

pub fn run_density(config: &RunConfig, out: &Path) -> Result<()> {
    let (u_plus, scattering) = asymptotic_state(config)?;
    let density = limit_density(&u_plus, &config.base_coin()?, config.n_nodes)?;
    fs::write(out.join("density.csv"), density.to_csv())?;
    let summary = if density.total_mass() > 0.0 {
        serde_json::to_value(DensitySummary::of(&density)?)?
    } else {
        json!({ "total_mass": 0.0, "moments": null, "n_nodes": density.n_nodes() })
    };
    let mut summary = summary;
    if let Some(r) = scattering {
        summary["scattering"] = scatter_json(&r);
    }
    write_json(&out.join("density.json"), &summary)
}

pub fn verify_manifest(config: &RunConfig, report: &ConvergenceReport) -> serde_json::Value {
    json!({
        "config": config,
        "report": report,
    })
}

/// Runs `verify` and writes `report.csv` and `manifest.json`. Missing the
/// convergence targets is not an error.
pub fn run_verify(config: &RunConfig, out: &Path) -> Result<ConvergenceReport> {
    let report = verify(&config.walk_config()?, &config.verify_options())?;
    fs::write(out.join("report.csv"), report.to_csv())?;
    write_json(&out.join("manifest.json"), &verify_manifest(config, &report))?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
struct SweepCell {
    index: usize,
    family: CoinFamily,
    m: u32,
    g: f64,
    dir: String,
    ks_last: Option<f64>,
    charfn_sup_err_last: Option<f64>,
    converged: Option<bool>,
    error: Option<String>,
}

pub fn run_sweep(config: &RunConfig, out: &Path, jobs: usize) -> Result<()> {
    let Some(sweep) = &config.sweep else {
        return Err(Error::Validation(vec!["sweep requires a `sweep` block in the config".into()]));
    };
    let mut grid = Vec::new();
    for &family in &sweep.family {
        for &m in &sweep.m {
            for &g in &sweep.g {
                grid.push((family, m, g));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let cells: Vec<SweepCell> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(index, &(family, m, g))| {
                let dir = format!("cell_{index:03}");
                let mut cell_config = config.clone();
                cell_config.coin.family = family;
                cell_config.coin.m = m;
                cell_config.coin.g = g;
                cell_config.sweep = None;
                let path = out.join(&dir);
                let result = fs::create_dir_all(&path)
                    .map_err(Error::from)
                    .and_then(|_| run_verify(&cell_config, &path));
                let mut cell = SweepCell {
                    index,
                    family,
                    m,
                    g,
                    dir,
                    ks_last: None,
                    charfn_sup_err_last: None,
                    converged: None,
                    error: None,
                };
                match result {
                    Ok(report) => {
                        cell.ks_last = report.last().map(|r| r.ks);
                        cell.charfn_sup_err_last = report.last().map(|r| r.charfn_sup_err);
                        cell.converged = match report.source {
                            crate::wlt::AsymptoticSource::Initial => Some(true),
                            crate::wlt::AsymptoticSource::Scattering { converged, .. } => Some(converged),
                        };
                    }
                    Err(e) => cell.error = Some(e.to_string()),
                }
                cell
            })
            .collect()
    });
    write_json(&out.join("index.json"), &json!({ "cells": cells }))
}
