//! `smavg` subcommands: `noise`, `solve`, `rate`, `verify`.
//!
//! Exit codes: 0 when every diagnostic passes, 1 on numerical failure or a
//! failed diagnostic, 2 on bad flags or an invalid configuration.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::averaging::{A4Report, Verdict};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::experiment::{
    boundedness_diagnostic, ito_crosscheck_experiment, run_averaging_experiment, BoundednessReport,
    ItoCrosscheckReport, RateFit,
};
use crate::flow::FlowMap;
use crate::noise::{DriverSpec, NoiseGrid};
use crate::output::{rates_svg, write_json, RunManifest};
use crate::solver::{solve_averaged, solve_scaled, sup_distance};
use crate::symint::residual;
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "smavg",
    version,
    about = "Averaging experiments for SDEs driven by stochastic measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one noise path and write it as CSV.
    Noise(CommonArgs),
    /// Solve the scaled and averaged systems on one path.
    Solve(CommonArgs),
    /// Monte Carlo rate experiment with diagnostics.
    Rate(CommonArgs),
    /// Run the flow and symmetric-integral invariant suites.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Repeatable; replaces the configured epsilon ladder.
    #[arg(long = "epsilon")]
    pub epsilons: Vec<f64>,
    #[arg(long)]
    pub driver: Option<String>,
    #[arg(long)]
    pub hurst: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub svg: bool,
}

const DEFAULT_CONFIG: &str = "[model]\nsigma = \"sin+2\"\ndrift = \"sin_x_cos_s\"\n";

impl CommonArgs {
    fn config(&self, required: bool) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None if required => {
                return Err(Error::Config("this command needs --config".into()));
            }
            None => Config::from_toml(DEFAULT_CONFIG)?,
        };
        if let Some(s) = self.seed {
            cfg.run.base_seed = s;
        }
        if let Some(j) = self.jobs {
            cfg.run.jobs = Some(j);
        }
        if !self.epsilons.is_empty() {
            cfg.rate.epsilons = self.epsilons.clone();
        }
        if let Some(d) = &self.driver {
            cfg.driver.kind = d.clone();
        }
        if let Some(h) = self.hurst {
            cfg.driver.hurst = Some(h);
        }
        if let Some(n) = self.n {
            cfg.run.finest_n = n;
        }
        if self.svg {
            cfg.rate.svg = true;
        }
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Noise(a) => cmd_noise(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn a4_report(cfg: &Config) -> Result<A4Report> {
    cfg.model()?
        .drift
        .check_a4(&cfg.a4.probes, cfg.a4.r_max, cfg.a4.threshold)
}

pub fn cmd_noise(args: &CommonArgs) -> Result<bool> {
    let start = Instant::now();
    let cfg = args.config(false)?;
    let grid = NoiseGrid::new(cfg.run.horizon, cfg.run.finest_n)?;
    let path = cfg.driver()?.generate(&grid, cfg.run.base_seed)?;
    prepare_out(&args.out)?;
    let mut buf = Vec::new();
    path.write_csv(&mut buf)?;
    fs::write(args.out.join("noise.csv"), buf)?;
    RunManifest::new(
        "noise",
        args.config.as_deref(),
        cfg.hash(),
        &args.out,
        start.elapsed(),
    )
    .write(&args.out)?;
    println!(
        "wrote {} ({} points)",
        args.out.join("noise.csv").display(),
        path.values.len()
    );
    Ok(true)
}

pub fn cmd_solve(args: &CommonArgs) -> Result<bool> {
    let start = Instant::now();
    let cfg = args.config(true)?;
    let model = cfg.model()?;
    if !model.drift.has_average() {
        return Err(Error::UnsupportedDrift);
    }
    let fm = FlowMap::new(model.diffusion.clone());
    let grid = NoiseGrid::new(cfg.run.horizon, cfg.run.finest_n)?;
    let path = cfg.driver()?.generate(&grid, cfg.run.base_seed)?;
    prepare_out(&args.out)?;

    let mut buf = Vec::new();
    path.write_csv(&mut buf)?;
    fs::write(args.out.join("path.csv"), buf)?;

    let averaged = solve_averaged(&model, &fm, &path, cfg.run.substeps)?;
    let mut report = format!(
        "[solve]\ndriver = {}\nseed = {}\nn_steps = {}\nconfig_hash = {}\n\n[averaged]\nfile = averaged.csv\nresidual = {}\n",
        path.driver,
        path.seed,
        grid.n_steps(),
        cfg.hash(),
        residual(&model, &averaged, &path)?
    );
    let mut buf = Vec::new();
    averaged.write_csv(&mut buf)?;
    fs::write(args.out.join("averaged.csv"), buf)?;

    for &eps in &cfg.rate.epsilons {
        let scaled = solve_scaled(&model, &fm, &path, eps, cfg.run.substeps)?;
        let file = format!("scaled_eps_{eps}.csv");
        let mut buf = Vec::new();
        scaled.write_csv(&mut buf)?;
        fs::write(args.out.join(&file), buf)?;
        report.push_str(&format!(
            "\n[scaled]\nepsilon = {eps}\nfile = {file}\npath_seed = {}\nresidual = {}\nsup_distance_to_averaged = {}\n",
            scaled.path_ref.seed,
            residual(&model, &scaled, &path)?,
            sup_distance(&scaled, &averaged)?
        ));
    }

    let a4 = a4_report(&cfg)?;
    report.push('\n');
    report.push_str(&a4.to_text());
    fs::write(args.out.join("report.txt"), &report)?;
    RunManifest::new(
        "solve",
        args.config.as_deref(),
        cfg.hash(),
        &args.out,
        start.elapsed(),
    )
    .write(&args.out)?;
    print!("{report}");
    Ok(a4.verdict.passed())
}

/// Contents of `ratefit.json`.
#[derive(Debug, Serialize)]
pub struct RateSummary<'a> {
    pub config_hash: String,
    pub base_seed: u64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub fit: &'a RateFit,
    pub boundedness: Option<BoundednessReport>,
    pub bounded_g: A4Report,
    pub ito_crosscheck: Option<ItoCrosscheckReport>,
    pub config: &'a Config,
}

pub fn cmd_rate(args: &CommonArgs) -> Result<bool> {
    let start = Instant::now();
    let cfg = args.config(true)?;
    let exp = cfg.experiment()?;
    let fit = match cfg.rate.synthetic_exponent {
        Some(p) => {
            exp.validate()?;
            let row: Vec<f64> = exp.epsilons.iter().map(|e| e.powf(p)).collect();
            RateFit::from_errors(
                exp.rate_exponent_hypothesis,
                &exp.epsilons,
                &vec![row; exp.replicates],
            )?
        }
        None => run_averaging_experiment(&exp)?,
    };
    let boundedness = if fit.per_epsilon.len() >= 4 {
        Some(boundedness_diagnostic(&fit)?)
    } else {
        None
    };
    let ito = if cfg.rate.ito_crosscheck && matches!(exp.driver, DriverSpec::Wiener) {
        Some(ito_crosscheck_experiment(&exp, cfg.rate.ito_epsilon)?)
    } else {
        None
    };
    let a4 = a4_report(&cfg)?;

    prepare_out(&args.out)?;
    fs::write(args.out.join("rates.csv"), fit.rates_csv())?;
    if cfg.rate.svg {
        fs::write(args.out.join("rates.svg"), rates_svg(&fit))?;
    }
    let passed = boundedness
        .as_ref()
        .is_none_or(|b| b.verdict == Verdict::Pass)
        && ito.as_ref().is_none_or(|r| r.verdict == Verdict::Pass)
        && a4.verdict.passed();
    let summary = RateSummary {
        config_hash: cfg.hash(),
        base_seed: cfg.run.base_seed,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        fit: &fit,
        boundedness,
        bounded_g: a4,
        ito_crosscheck: ito,
        config: &cfg,
    };
    write_json(&args.out.join("ratefit.json"), &summary)?;
    RunManifest::new(
        "rate",
        args.config.as_deref(),
        cfg.hash(),
        &args.out,
        start.elapsed(),
    )
    .write(&args.out)?;

    println!(
        "slope = {:.4} +/- {:.4} (hypothesis {})",
        fit.slope, fit.slope_stderr, fit.hypothesis
    );
    for s in &fit.per_epsilon {
        println!(
            "eps = {:<12} mean = {:.4e}  q99/eps^h = {:.4}",
            s.epsilon, s.mean_error, s.normalized_quantiles[2]
        );
    }
    if let Some(b) = &summary.boundedness {
        println!(
            "boundedness: {} (tail/median {:.3})",
            b.verdict, b.tail_over_median
        );
    }
    if let Some(r) = &summary.ito_crosscheck {
        println!("ito cross-check: {}", r.verdict);
    }
    println!("bounded G: {}", summary.bounded_g.verdict);
    Ok(passed)
}

pub fn cmd_verify(args: &CommonArgs) -> Result<bool> {
    let checks = verify::run_all()?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!(
            "{} {} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    prepare_out(&args.out)?;
    fs::write(args.out.join("verify.txt"), &text)?;
    print!("{text}");
    Ok(checks.iter().all(|c| c.passed))
}
