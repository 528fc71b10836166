use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "d2alf", version, about = "Nahm data, D2 ALF moduli spaces and their invariants")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set n=48`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyName {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
    Vii,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpecialName {
    Diagonal,
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SphereName {
    Difference,
    Sum,
}

/// Family representative and FI parameters `ξ = (ξ^ℝ, Re ξ^ℂ, Im ξ^ℂ)` at each end.
#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum, default_value = "i")]
    pub family: FamilyName,
    #[arg(long, default_value = "0.4,0.2", allow_hyphen_values = true)]
    pub alpha0: String,
    #[arg(long, default_value = "0.5,0", allow_hyphen_values = true)]
    pub beta_x: String,
    /// Parameter of families ii to v.
    #[arg(long, default_value = "0.3,0.1", allow_hyphen_values = true)]
    pub c: String,
    /// Subcase of families vi and vii.
    #[arg(long, value_enum, default_value = "diagonal")]
    pub special: SpecialName,
    /// Corner entry of the `lower` subcase.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub lower_c: String,
    #[arg(long, default_value = "0.8,0.3,-0.2", allow_hyphen_values = true)]
    pub xi0: String,
    #[arg(long, default_value = "-0.5,0.1,0.4", allow_hyphen_values = true)]
    pub xil: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the complex-to-real equation for a family representative.
    Solve(FamilyArgs),
    /// Stability verdict and sublines of a family representative.
    Classify(FamilyArgs),
    /// Harmonic frame at a family-(i) point, or a chart table with `--chart`.
    Metric {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        chart: bool,
    },
    /// Transport family-(i) data along a CSV path of FI parameters.
    Transport {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        path: PathBuf,
    },
    /// Curvature of the connection at `A = (0, icσ_x, 0, 0)` against its closed form.
    Curvature {
        #[arg(long, default_value_t = 0.7)]
        c: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
    },
    /// Periods of the Kähler forms over an exceptional sphere.
    Periods {
        #[arg(long, default_value = "0.42,0,0", allow_hyphen_values = true)]
        xi0: String,
        #[arg(long, default_value = "-0.28,0,0", allow_hyphen_values = true)]
        xil: String,
        #[arg(long, value_enum, default_value = "difference")]
        sphere: SphereName,
        /// Report only `ω^k`, `k ∈ {1, 2, 3}`.
        #[arg(long)]
        form: Option<usize>,
    },
    /// Kronheimer data of a constant-`α` representative.
    Rg(FamilyArgs),
    /// Spectral check of constant diagonal data on the flat orbifold.
    OrbifoldCheck {
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value = "0.2,-0.1,0.4", allow_hyphen_values = true)]
        phi: String,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        circumference: f64,
        #[arg(long)]
        gauge_seed: Option<u64>,
    },
    /// Group-theory report for a finite subgroup of SU(2).
    Fi {
        /// `Zn`, `BDn`, `2T`, `2O` or `2I`.
        #[arg(long)]
        group: String,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or(config::ConfigError::Syntax { line: 0 })?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let run = match cli.command {
        Command::Solve(f) => commands::solve(&cfg, &f),
        Command::Classify(f) => commands::classify(&cfg, &f),
        Command::Metric { family, chart } => commands::metric(&cfg, &family, chart),
        Command::Transport { family, path } => commands::transport(&cfg, &family, &path),
        Command::Curvature { c, l } => commands::curvature(&cfg, c, l),
        Command::Periods { xi0, xil, sphere, form } => commands::periods(&cfg, &xi0, &xil, sphere, form),
        Command::Rg(f) => commands::rg(&cfg, &f),
        Command::OrbifoldCheck {
            a,
            phi,
            circumference,
            gauge_seed,
        } => commands::orbifold_check(&cfg, a, &phi, circumference, gauge_seed),
        Command::Fi { group } => commands::fi(&cfg, &group),
        Command::Verify { quick, only } => commands::verify(&cfg, quick, &only),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
