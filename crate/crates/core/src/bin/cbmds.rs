use std::path::PathBuf;
use std::process::ExitCode;

use cbmds::harness::{self, validate, DemoConfig, ExperimentConfig};
use cbmds::topology::{Placement, Shape};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cbmds",
    version,
    about = "Cluster-based MDS localization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write raw.csv and summary.csv.
    Sweep {
        /// JSON experiment config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run both algorithms once on a single network.
    Demo {
        #[arg(long, default_value = "c")]
        shape: Shape,
        #[arg(long, default_value = "random")]
        placement: Placement,
        #[arg(long, default_value_t = 161)]
        nodes: usize,
        #[arg(long, default_value_t = 2.0)]
        radio: f64,
        #[arg(long, default_value_t = 15)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        anchors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write node_id,true_x,true_y,est_x,est_y for CB-MDS.
        #[arg(long)]
        positions: Option<PathBuf>,
    },
    /// Run the deterministic fixture checks.
    Validate,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::from_file(&path)?,
                None => ExperimentConfig::default(),
            };
            let results = harness::sweep_to_dir(&cfg, &out)?;
            let ok = results.iter().filter(|r| r.status.is_ok()).count();
            println!(
                "{} rows ({ok} ok) written to {}",
                results.len(),
                out.display()
            );
        }
        Command::Demo {
            shape,
            placement,
            nodes,
            radio,
            k,
            anchors,
            seed,
            noise,
            svg,
            positions,
        } => {
            let outcome = harness::run_demo(&DemoConfig {
                shape,
                placement,
                nodes,
                radio_range: radio,
                k,
                anchors,
                seed,
                measurement_noise_sigma: noise,
            })?;
            println!(
                "nodes {}  connectivity {:.2}  k {}",
                outcome.network.len(),
                outcome.connectivity,
                outcome.k_used
            );
            println!("MDS-MAP mean error / R: {:.4}", outcome.mds_map_error);
            println!("CB-MDS  mean error / R: {:.4}", outcome.cb_mds_error);
            if let Some(path) = svg {
                std::fs::write(&path, &outcome.svg)?;
                println!("figure written to {}", path.display());
            }
            if let Some(path) = positions {
                let file = std::fs::File::create(&path)?;
                cbmds::localization::write_positions_csv(
                    file,
                    &outcome.truth,
                    &outcome.cb.positions,
                )?;
            }
        }
        Command::Validate => {
            let outcomes = validate::run_fixtures();
            let mut failed = 0;
            for f in &outcomes {
                println!(
                    "[{}] {} ({})",
                    if f.passed { "PASS" } else { "FAIL" },
                    f.name,
                    f.detail
                );
                failed += usize::from(!f.passed);
            }
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
