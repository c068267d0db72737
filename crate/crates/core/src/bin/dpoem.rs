use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use dpoem::experiment::{self, fetch, ExperimentConfig, ExperimentContext};

/// Decentralized zeroth-order optimization experiments.
#[derive(Parser)]
#[command(name = "dpoem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm listed in the config and write traces and a summary.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Grid-tune the DSF baseline and print the results.
    TuneDsf { config: PathBuf },
    /// Download a LIBSVM dataset into the cache.
    FetchData {
        name: String,
        /// Cache directory (default: $DPOEM_DATA_DIR or ./data).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base URL (default: $DPOEM_DATA_URL or the LIBSVM binary page).
        #[arg(long)]
        base_url: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let messages = match &e {
                dpoem::Error::Config(c) => c.messages(),
                other => vec![other.to_string()],
            };
            eprintln!("{}", json!({ "error": e.kind(), "messages": messages }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> dpoem::Result<serde_json::Value> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = experiment::run_experiment(&cfg, out.as_deref())?;
            Ok(json!({
                "files": outcome.files,
                "fingerprint": outcome.summary.fingerprint,
                "algorithms": outcome.summary.algorithms.iter().map(|a| json!({
                    "algorithm": a.algorithm,
                    "final_f_xbar": a.final_f_xbar,
                    "f_xtilde_tau": a.f_xtilde_tau,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::Validate { config } => {
            let cfg = experiment::validate_config(&config)?;
            Ok(json!({ "valid": true, "name": cfg.name }))
        }
        Command::TuneDsf { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let ctx = ExperimentContext::build(&cfg)?;
            let (best, results) = ctx.tune()?;
            Ok(json!({ "best": best, "results": results }))
        }
        Command::FetchData { name, out, base_url } => {
            let dir = out.unwrap_or_else(experiment::data_dir);
            let url = base_url.unwrap_or_else(fetch::base_url);
            Ok(serde_json::to_value(fetch::fetch_dataset(&name, &dir, &url)?).expect("json"))
        }
    }
}
