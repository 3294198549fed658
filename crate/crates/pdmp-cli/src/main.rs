use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdmp_cli::config::{
    BasisChoice, BpsVelocities, ExperimentConfig, HorizonChoice, KernelChoice, SamplerChoice,
};
use pdmp_cli::{runner, CliError};

/// Event-driven PDMP samplers on piecewise-smooth targets.
#[derive(Parser)]
#[command(name = "pdmp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate chains on the two-sided Gaussian hypercube target and write
    /// trajectory CSVs, a summary JSON and an optional SVG plot.
    Run(RunArgs),
    /// Recompute and pool summaries from previously written trajectory CSVs.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sigma_in: Option<f64>,
    #[arg(long)]
    sigma_out: Option<f64>,
    #[arg(long)]
    alpha_in: Option<f64>,
    #[arg(long)]
    alpha_out: Option<f64>,
    /// bps | zigzag | cs
    #[arg(long)]
    sampler: Option<SamplerChoice>,
    #[arg(long)]
    refresh_rate: Option<f64>,
    /// flip | mh:<iters> | limit
    #[arg(long)]
    kernel: Option<KernelChoice>,
    /// canonical | rotated:<seed>
    #[arg(long)]
    basis: Option<BasisChoice>,
    /// time:<T> | events:<N>
    #[arg(long)]
    horizon: Option<HorizonChoice>,
    #[arg(long)]
    chains: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// sphere | gaussian (velocity law of the bouncy particle sampler)
    #[arg(long)]
    bps_velocities: Option<BpsVelocities>,
    /// Trajectory CSV path (chain index inserted for multi-chain runs).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary JSON path; written to stdout when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
    /// SVG plot of the first chain's first two coordinates.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Trajectory CSVs, one per chain.
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    /// Pooled summary JSON path; written to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(value) = self.$field { config.$field = Some(value); })*
            };
        }
        macro_rules! apply_plain {
            ($($field:ident),*) => {
                $(if let Some(value) = self.$field { config.$field = value; })*
            };
        }
        apply_plain!(
            dim,
            sigma_in,
            sigma_out,
            alpha_in,
            alpha_out,
            sampler,
            refresh_rate,
            kernel,
            basis,
            horizon,
            chains,
            seed,
            bps_velocities
        );
        apply!(csv, json, svg);
        Ok(config)
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.into_config()?;
            let artifacts = runner::run(&config)?;
            if artifacts.json_path.is_none() {
                print!("{}", runner::render_summary_json(&artifacts.summary)?);
            }
            Ok(())
        }
        Command::Summarize(args) => {
            let output = runner::summarize(&args.csv)?;
            let text = runner::render_summary_json(&output)?;
            match &args.out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}
