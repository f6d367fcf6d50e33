use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weierstrass_lab::scenario::run_config_file;

#[derive(Parser)]
#[command(version, about = "Run a scenario document and write its report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// error, warn, info, debug or trace
        #[arg(long, default_value = "info")]
        log: log::LevelFilter,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, out, log } = Cli::parse().command;
    env_logger::Builder::new().filter_level(log).init();
    match run_config_file(&config, &out) {
        Ok(true) => {
            log::info!("all checks passed; report in {}", out.display());
            ExitCode::SUCCESS
        }
        Ok(false) => {
            log::error!("some checks failed; see {}", out.join("summary.json").display());
            ExitCode::from(1)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}
