//! `kpzlab`: sample fields, build measures, estimate scaling exponents and
//! run the verification suite. Every run writes its outputs and a
//! `manifest.json` with checksums into `--out` (default `out/`).
//!
//! Configuration precedence: built-in defaults < `--config` JSON < flags.

mod commands;
mod config;
mod error;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use kpzlab::kpz::{FractalSet, RootMode};

use crate::config::{parse_root_mode, parse_scales, parse_set, Command, FieldKind, RunConfig};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "kpzlab", version, about = "Gaussian free field, Liouville measure and KPZ experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Subcommand, Debug)]
enum Sub {
    /// Sample a spectral or discrete free field; writes field.bin/.json/.png.
    SampleField(Flags),
    /// Build the regularized measure at eps = 1/resolution; writes measure.*.
    BuildMeasure(Flags),
    /// Euclidean scaling exponent of a set; writes fit.csv and fit.json.
    EuclidExponent(Flags),
    /// Quantum scaling exponent of a set; writes fit.csv and fit.json.
    QuantumExponent(Flags),
    /// Run named verification checks; exit code 2 if any row fails.
    Verify(Flags),
    /// Tabulate the KPZ relation.
    KpzTable(Flags),
    /// Exact quadrangulation counts.
    CountQuads(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid side (cells per unit length, or N for the discrete field).
    #[arg(long)]
    resolution: Option<usize>,
    /// Series cutoff M.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Scales: `2^-7..2^-11` or a comma list like `0.01,2^-8`.
    #[arg(long, value_parser = parse_scales)]
    scales: Option<::std::vec::Vec<f64>>, // full path: one value, not a list of them
    #[arg(long)]
    replicates: Option<usize>,
    /// segment | point | full-square | cantor-dust:DEPTH | JSON object
    #[arg(long, value_parser = parse_set)]
    set: Option<FractalSet>,
    /// sample-from-measure | rooted-density
    #[arg(long, value_parser = parse_root_mode)]
    root_mode: Option<RootMode>,
    #[arg(long)]
    roots_per_field: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated check names, or `all`.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long, value_enum)]
    field: Option<FieldKind>,
    /// Also write the equal-mass square decomposition (build-measure).
    #[arg(long)]
    overlay: bool,
    /// Largest face count (count-quads).
    #[arg(long)]
    max_faces: Option<u32>,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, f) = match cli.command {
        Sub::SampleField(f) => (Command::SampleField, f),
        Sub::BuildMeasure(f) => (Command::BuildMeasure, f),
        Sub::EuclidExponent(f) => (Command::EuclidExponent, f),
        Sub::QuantumExponent(f) => (Command::QuantumExponent, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::KpzTable(f) => (Command::KpzTable, f),
        Sub::CountQuads(f) => (Command::CountQuads, f),
    };
    let base = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = base.command {
        if c != command {
            return Err(CliError::Config(format!("config is for {c:?}, not {command:?}")));
        }
    }
    let flags = RunConfig {
        command: Some(command),
        gamma: f.gamma,
        seed: f.seed,
        resolution: f.resolution,
        cutoff: f.cutoff,
        scales: f.scales,
        replicates: f.replicates,
        set: f.set,
        root_mode: f.root_mode,
        roots_per_field: f.roots_per_field,
        margin: f.margin,
        out: f.out,
        checks: f.checks,
        field: f.field,
        overlay: f.overlay.then_some(true),
        max_faces: f.max_faces,
    };
    Ok(base.merge(flags))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match resolve(cli).and_then(|cfg| commands::run(&cfg)) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
