//! Experiment CLI: simulate | sweep | verify-cover | conductance | replay.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use congest_sim::config::ExperimentConfig;
use congest_sim::graph::{conductance_estimate, generate};
use congest_sim::harness;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "congest-sim", version, about = "Broadcast simulation in the adversarial CONGEST model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (JSON). Defaults apply for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field by dot path, e.g. `--set protocol.t=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let pairs = self
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .with_context(|| format!("--set needs KEY=VALUE, got `{kv}`"))
            })
            .collect::<Result<Vec<_>>>()?;
        cfg.apply_overrides(&pairs)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run trials and write per-trial reports plus an aggregate CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for reports.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the simulation per value of a swept parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Dot path of the parameter to vary, e.g. `graph.n`.
        #[arg(long)]
        param: String,
        /// Comma-separated values (JSON scalars).
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build the configured covering family and run the verification
    /// oracle.
    VerifyCover {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Exact conductance for small fixtures, flagged estimate otherwise.
    Conductance {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Re-execute a configuration and compare against a recorded
    /// transcript.
    Replay {
        #[command(flatten)]
        config: ConfigArgs,
        /// Transcript dump (JSON lines) to compare against.
        #[arg(long)]
        transcript: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = config.load()?;
            let batch = harness::run_batch(&cfg)?;
            harness::write_outputs(&batch, &out)?;
            let pass = batch.all_safe && batch.all_live;
            println!(
                "simulate: {} records, safety {}, liveness {} -> {}",
                batch.records.len(),
                batch.all_safe,
                batch.all_live,
                out.display()
            );
            Ok(pass)
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let cfg = config.load()?;
            if values.is_empty() {
                println!("sweep: empty value list");
                return Ok(true);
            }
            let report = harness::run_sweep(&cfg, &param, &values)?;
            std::fs::create_dir_all(&out)?;
            let csv = harness::sweep_csv(&report);
            std::fs::write(out.join("sweep.csv"), &csv)?;
            print!("{csv}");
            Ok(report.all_pass)
        }
        Command::VerifyCover { config } => {
            let cfg = config.load()?;
            let report = harness::verify_cover(&cfg)?;
            println!(
                "verify-cover ({:?}, L = {}, k = {}): {}/{} seeds pass",
                report.mode, report.l, report.k, report.passes, report.seeds
            );
            if let Some(cx) = &report.first_failure {
                println!("counterexample: {cx}");
            }
            Ok(report.passes == report.seeds)
        }
        Command::Conductance { config } => {
            let cfg = config.load()?;
            let g = generate(&cfg.graph)?;
            let report = conductance_estimate(&g)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
        Command::Replay { config, transcript } => {
            let cfg = config.load()?;
            let recorded = std::fs::read_to_string(&transcript)
                .with_context(|| format!("reading {}", transcript.display()))?;
            let ok = harness::run_replay(&cfg, &recorded)?;
            if ok {
                println!("replay: transcripts identical");
            } else {
                bail!("replay: transcript mismatch");
            }
            Ok(ok)
        }
    }
}
