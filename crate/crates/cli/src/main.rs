//! `chiral-susy`: Monte Carlo and superspace evaluations of chiral random
//! matrix partition functions, verification runs and SVG plots.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numeric failure.

mod commands;
mod complex;
mod config;
mod error;
mod plot;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use chiral_susy::ordinary_mc::SpectrumKind;
use chiral_susy::Complex64;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::complex::{parse_complex, Cx};
use crate::config::{Estimator, Method, RunConfig, Sweep};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "chiral-susy", version, about = "Chiral random matrix partition functions: Monte Carlo vs superspace")]
struct Cli {
    /// Worker threads; 1 gives byte-identical output for a fixed seed.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw matrices and write the eigenvalues of WW†.
    Sample(Common),
    /// Monte Carlo estimate of Z in ordinary matrix space.
    ZOrdinary(Common),
    /// Z from its superspace representation (β = 2).
    ZSuper(Common),
    /// Microscopic limit; --kappa1/--kappa2 are read as rescaled sources ξ.
    ZMicro(MicroArgs),
    /// Partially quenched Z with massive flavors (Gaussian weight).
    ZUnquenched(UnquenchedArgs),
    /// Eigenvalue histogram, with the microscopic Bessel density when it applies.
    Density(DensityArgs),
    /// Identity suite or comparison scenarios.
    Verify(VerifyArgs),
    /// Render result CSV files as an SVG figure.
    Plot(PlotArgs),
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s)
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<u8>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nu: Option<usize>,
    /// Number of bosonic sources; checked against --kappa1.
    #[arg(long)]
    k1: Option<usize>,
    /// Number of fermionic sources; checked against --kappa2.
    #[arg(long)]
    k2: Option<usize>,
    /// Bosonic source "a+bi" (repeatable); κ² unless --chiral-sources.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    kappa1: Vec<Complex64>,
    /// Fermionic source "a+bi" (repeatable); κ² unless --chiral-sources.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    kappa2: Vec<Complex64>,
    /// Read source values as κ instead of κ².
    #[arg(long)]
    chiral_sources: bool,
    /// Sweep of the first source, FROM:TO:POINTS, e.g. "0+1i:0+3i:11".
    #[arg(long, value_parser = Sweep::parse, allow_hyphen_values = true)]
    sweep: Option<Sweep>,
    /// Ensemble as JSON, e.g. '{"kind":"lorentz","gamma":1,"mu":6}', or a bare "gaussian".
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples.
    #[arg(long)]
    samples: Option<u64>,
    /// Relative tolerance of the superspace quadrature.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Output directory; default from the config, then $CHIRAL_SUSY_OUT_DIR, then ".".
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output file stem; defaults to the subcommand name.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct MicroArgs {
    #[command(flatten)]
    common: Common,
    /// Microscopic weight as JSON, e.g. '{"kind":"heavy_tail_lorentz","gamma":1,"mu_tilde":2}'.
    #[arg(long)]
    micro_weight: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimatorArg {
    Super,
    MonteCarlo,
    Both,
}

#[derive(Args, Debug)]
struct UnquenchedArgs {
    #[command(flatten)]
    common: Common,
    /// Flavor mass (repeatable; the quadrature path takes exactly one).
    #[arg(long = "mass")]
    masses: Vec<f64>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Wishart,
    Chiral,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    bins: Option<usize>,
    /// Histogram range LO:HI.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Rescale eigenvalues by n (chiral) or n² (Wishart).
    #[arg(long)]
    microscopic: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// "identities" or "all" (every scenario).
    #[arg(long)]
    suite: Option<String>,
    /// Scenario name (repeatable); see --list.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    /// Samples per Markov-chain estimate in scenarios.
    #[arg(long)]
    mcmc_samples: Option<u64>,
    /// List the scenarios and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Result CSV (repeatable); series are overlaid.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// SVG path; defaults to <out-dir>/plot.svg.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Column for the horizontal axis; by default the source column that varies.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn parse_json_arg<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        format!(r#"{{"kind":"{}"}}"#, s.trim())
    };
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("--{what}: {e}")))
}

/// Loads the config file (if any) and applies the flags on top.
fn resolve(c: &Common, method: Method) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = c.beta {
        cfg.beta = v;
    }
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if let Some(v) = c.nu {
        cfg.nu = v;
    }
    if !c.kappa1.is_empty() {
        cfg.kappa1 = c.kappa1.iter().copied().map(Cx).collect();
    }
    if !c.kappa2.is_empty() {
        cfg.kappa2 = c.kappa2.iter().copied().map(Cx).collect();
    }
    if c.chiral_sources {
        cfg.chiral_sources = true;
    }
    if let Some(s) = &c.sweep {
        cfg.sweep = Some(s.clone());
    }
    if let Some(e) = &c.ensemble {
        cfg.ensemble = parse_json_arg("ensemble", e)?;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.samples {
        cfg.mc.n_samples = v;
    }
    if let Some(v) = c.rel_tol {
        cfg.quad.rel_tol = v;
    }
    if let Some(d) = &c.out_dir {
        cfg.output.dir = Some(d.clone());
    }
    if let Some(n) = &c.name {
        cfg.output.name = Some(n.clone());
    }
    cfg.claim(method)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::config(format!("--range {s:?} is not LO:HI"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sample(c) => commands::sample(&resolve(&c, Method::Sample)?),
        Command::ZOrdinary(c) => commands::z_ordinary(&resolve(&c, Method::Ordinary)?, c.k1, c.k2),
        Command::ZSuper(c) => commands::z_super(&resolve(&c, Method::Super)?, c.k1, c.k2),
        Command::ZMicro(a) => {
            let mut cfg = resolve(&a.common, Method::Micro)?;
            if let Some(w) = &a.micro_weight {
                cfg.micro_weight = parse_json_arg("micro-weight", w)?;
            }
            commands::z_micro(&cfg, a.common.k1, a.common.k2)
        }
        Command::ZUnquenched(a) => {
            let mut cfg = resolve(&a.common, Method::Unquenched)?;
            if !a.masses.is_empty() {
                cfg.masses = a.masses.clone();
            }
            if let Some(e) = a.estimator {
                cfg.estimator = match e {
                    EstimatorArg::Super => Estimator::Super,
                    EstimatorArg::MonteCarlo => Estimator::MonteCarlo,
                    EstimatorArg::Both => Estimator::Both,
                };
            }
            cfg.validate()?;
            commands::z_unquenched(&cfg, a.common.k1, a.common.k2)
        }
        Command::Density(a) => {
            let mut cfg = resolve(&a.common, Method::Density)?;
            if let Some(b) = a.bins {
                cfg.histogram.bins = b;
            }
            if let Some(r) = &a.range {
                cfg.histogram.range = Some(parse_range(r)?);
            }
            if let Some(k) = a.kind {
                cfg.histogram.kind = match k {
                    KindArg::Wishart => SpectrumKind::Wishart,
                    KindArg::Chiral => SpectrumKind::Chiral,
                };
            }
            if a.microscopic {
                cfg.histogram.microscopic = true;
            }
            cfg.validate()?;
            commands::density(&cfg)
        }
        Command::Verify(a) => {
            if a.list {
                commands::list_scenarios();
                return Ok(());
            }
            let mut cfg = resolve(&a.common, Method::Verify)?;
            if a.suite.is_some() {
                cfg.verify.suite = a.suite.clone();
            }
            if !a.scenarios.is_empty() {
                cfg.verify.scenarios = a.scenarios.clone();
            }
            if let Some(s) = a.common.samples {
                cfg.verify.samples = Some(s);
            }
            if let Some(s) = a.mcmc_samples {
                cfg.verify.mcmc_samples = Some(s);
            }
            commands::verify(&cfg)
        }
        Command::Plot(a) => plot::run(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
