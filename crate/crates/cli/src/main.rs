//! `rotwave`: command-line driver.
//!
//! Exit status: 0 on success, 1 for configuration or I/O errors, 2 for
//! numerical failures. Failures print `{"error": name, "message": text}` on
//! stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Numerical(rotwave::Error),
    Verification(String),
}

impl From<rotwave::Error> for Failure {
    fn from(e: rotwave::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) | Failure::Verification(_) => 2,
        }
    }

    fn report(&self) -> serde_json::Value {
        let (name, message) = match self {
            Failure::Config(m) => ("ConfigError".to_string(), m.clone()),
            Failure::Io(m) => ("IoError".to_string(), m.clone()),
            Failure::Numerical(e) => (e.name().to_string(), e.to_string()),
            Failure::Verification(m) => ("VerificationFailed".to_string(), m.clone()),
        };
        serde_json::json!({ "error": name, "message": message })
    }
}

/// Laminar flows, dispersion relations and small-amplitude rotational
/// capillary-gravity waves.
///
/// Settings come from an optional JSON file (`--config`); the flags below
/// override it. Defaults: p0 = -1, g = 9.8, sigma = 0.07, r = 2, zero
/// vorticity, M = 16, K = 257, output directory `out`.
#[derive(Debug, Parser)]
#[command(name = "rotwave", version)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative mass flux, negative [default: -1].
    #[arg(long, global = true, allow_hyphen_values = true)]
    p0: Option<f64>,
    /// Gravitational constant [default: 9.8].
    #[arg(long, global = true)]
    g: Option<f64>,
    /// Surface tension coefficient [default: 0.07].
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Integrability exponent of the vorticity [default: 2].
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Vorticity model as JSON, e.g. '{"type":"constant","c":-1}' [default: zero].
    #[arg(long, global = true)]
    vorticity: Option<String>,
    /// Cosine modes in q [default: 16].
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Chebyshev nodes in p [default: 257].
    #[arg(long, global = true)]
    k: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Laminar flow for one lambda: a(p), H(p), Q and d.
    Laminar {
        /// [default: 2*Gamma_M + 1]
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Number of Chebyshev nodes [default: 257].
        #[arg(long)]
        points: Option<usize>,
    },
    /// Threshold lambda0, minimal wavenumber N and the curve mu(lambda).
    Dispersion {
        /// [default: lambda0 + 0.01*max(1, lambda0)]
        #[arg(long)]
        lambda_min: Option<f64>,
        /// [default: lambda0 + 10*max(1, lambda0)]
        #[arg(long)]
        lambda_max: Option<f64>,
        /// [default: 40]
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Bifurcation points lambda_n for n = N..=n_max.
    Bifurcate {
        /// [default: N + 4]
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Waves on the n-th branch for a list of amplitudes.
    Branch {
        /// [default: N]
        #[arg(long)]
        n: Option<u32>,
        /// Comma-separated amplitudes [default: 0.001,0.01].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
    },
    /// Velocity, pressure and residuals for one wave.
    Fields {
        /// [default: N]
        #[arg(long)]
        n: Option<u32>,
        /// Amplitude [default: 0.01].
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// Wave speed c, added to u - c in the CSV output [default: 0].
        #[arg(long, allow_hyphen_values = true)]
        wave_speed: Option<f64>,
    },
    /// Run the invariant checks and print a pass/fail table.
    Verify,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        cfg.output = v.clone();
    }
    if let Some(v) = cli.p0 {
        cfg.params.p0 = v;
    }
    if let Some(v) = cli.g {
        cfg.params.g = v;
    }
    if let Some(v) = cli.sigma {
        cfg.params.sigma = v;
    }
    if let Some(v) = cli.r {
        cfg.params.r = v;
    }
    if let Some(v) = &cli.vorticity {
        cfg.vorticity = serde_json::from_str(v).map_err(|e| Failure::Config(format!("--vorticity: {e}")))?;
    }
    if let Some(v) = cli.m {
        cfg.disc.m = v;
    }
    if let Some(v) = cli.k {
        cfg.disc.k = v;
    }
    match &cli.command {
        Command::Laminar { lambda, points } => {
            cfg.laminar.lambda = lambda.or(cfg.laminar.lambda);
            cfg.laminar.points = points.unwrap_or(cfg.laminar.points);
        }
        Command::Dispersion { lambda_min, lambda_max, samples } => {
            cfg.dispersion.lambda_min = lambda_min.or(cfg.dispersion.lambda_min);
            cfg.dispersion.lambda_max = lambda_max.or(cfg.dispersion.lambda_max);
            cfg.dispersion.samples = samples.unwrap_or(cfg.dispersion.samples);
        }
        Command::Bifurcate { n_max } => cfg.bifurcate.n_max = n_max.or(cfg.bifurcate.n_max),
        Command::Branch { n, s } => {
            cfg.branch.n = n.or(cfg.branch.n);
            if let Some(s) = s {
                cfg.branch.s = s.clone();
            }
        }
        Command::Fields { n, s, wave_speed } => {
            cfg.fields.n = n.or(cfg.fields.n);
            cfg.fields.s = s.unwrap_or(cfg.fields.s);
            cfg.fields.wave_speed = wave_speed.unwrap_or(cfg.fields.wave_speed);
        }
        Command::Verify => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let cfg = build_config(cli)?;
    let problem = cfg.problem().map_err(|e| Failure::Config(e.to_string()))?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| Failure::Io(format!("{}: {e}", cfg.output.display())))?;
    let out = cfg.output.as_path();
    match cli.command {
        Command::Laminar { .. } => commands::laminar(&cfg, &problem, out),
        Command::Dispersion { .. } => commands::dispersion(&cfg, &problem, out),
        Command::Bifurcate { .. } => commands::bifurcate(&cfg, &problem, out),
        Command::Branch { .. } => commands::branch(&cfg, &problem, out),
        Command::Fields { .. } => commands::fields(&cfg, &problem, out),
        Command::Verify => commands::verify(&cfg, &problem, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            log::debug!("{f:?}");
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
