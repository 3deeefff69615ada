//! `maxtree`: window graphs, sphere checks, maximal functions, Lorentz norms and experiment runners.

mod commands;
mod overrides;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use maxtree_core::{Error, ExperimentReport};

#[derive(Parser, Debug)]
#[command(name = "maxtree", version, about = "Exact maximal operators on trees and graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Master seed for randomised runners.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest number of vertices any enumeration may touch.
    #[arg(long, env = "MAXTREE_GUARD", default_value_t = maxtree_core::DEFAULT_GUARD, global = true)]
    pub guard: u64,
    /// Width below which irrational outputs are printed as enclosures.
    #[arg(long, default_value_t = 1e-12, global = true)]
    pub tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyName {
    Homogeneous,
    Stromberg,
    Striped,
    SemiHomogeneous,
    Flower,
    Escalator,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long, default_value_t = 2)]
    pub a: u32,
    #[arg(long, default_value_t = 3)]
    pub b: u32,
    /// Stripe widths of the striped family.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindName {
    Centred,
    Uncentred,
    Modified,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the window graph B_radius(o) as JSON (or an edge list in CSV).
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 4)]
        radius: u32,
    },
    /// Compare closed-form sphere sizes with walked counts.
    SphereCheck {
        #[command(flatten)]
        family: FamilyArgs,
        /// Centres range over B_x_max(o).
        #[arg(long, default_value_t = 5)]
        x_max: u32,
        #[arg(long, default_value_t = 8)]
        r_max: u32,
    },
    /// Evaluate a maximal function of the function in --input on B_radius(o).
    Maximal {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = KindName::Centred)]
        kind: KindName,
        /// σ for the modified operator: a rational, "tau" or "2tau".
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: u32,
    },
    /// Lorentz quasi-norm ‖f‖_{p,r} of the function in --input.
    Norm {
        #[arg(long)]
        p: String,
        /// Second index, or "inf".
        #[arg(long, default_value = "inf")]
        r: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run one experiment; flags override its default configuration.
    Experiment(commands::ExperimentArgs),
    /// Check that a map between two graph files is a rough isometry.
    ValidateRi {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// JSON array: the image of each source vertex.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        beta: u32,
    },
}

/// What a command produced.
pub enum Output {
    Report(ExperimentReport),
    Raw(String),
}

fn emit(global: &Global, out: &Output) -> Result<()> {
    let text = match out {
        Output::Raw(s) => s.clone(),
        Output::Report(r) => match global.format {
            Format::Csv => r.to_csv()?,
            Format::Json => serde_json::to_string_pretty(&r.to_json())? + "\n",
        },
    };
    match &global.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Output> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Gen { family, radius } => commands::gen(g, &family, radius),
        Command::SphereCheck { family, x_max, r_max } => commands::sphere_check(g, &family, x_max, r_max),
        Command::Maximal { family, kind, sigma, input, radius } => {
            commands::maximal(g, &family, kind, sigma.as_deref(), &input, radius)
        }
        Command::Norm { p, r, input } => commands::norm(g, &p, &r, &input),
        Command::Experiment(args) => commands::experiment(g, &args),
        Command::ValidateRi { source, target, map, beta } => commands::validate_ri(g, &source, &target, &map, beta),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = cli.global.clone();
    match run(cli).and_then(|out| {
        emit(&global, &out)?;
        Ok(out)
    }) {
        Ok(Output::Report(r)) if !r.passed() => {
            for f in r.failures() {
                eprintln!("violation: {f}");
            }
            ExitCode::from(1)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let violation = e.downcast_ref::<Error>().is_some_and(Error::is_violation)
                || e.to_string().contains("not a rough isometry");
            ExitCode::from(if violation { 1 } else { 2 })
        }
    }
}
