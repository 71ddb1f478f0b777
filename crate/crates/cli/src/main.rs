use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mflin::{run, RunOptions};

#[derive(Parser)]
#[command(
    name = "mflin",
    version,
    about = "Run linearized McKean-Vlasov experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Use the published experiment sizes for unset fields.
        #[arg(long)]
        paper_scale: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        paper_scale,
        seed,
        out,
        threads,
    } = Cli::parse().command;
    let opts = RunOptions {
        paper_scale,
        seed,
        out,
        threads,
    };
    match run(&config, &opts) {
        Ok((dir, manifest)) => {
            println!(
                "{}: wrote {} files to {}",
                manifest.experiment,
                manifest.files.len() + 1,
                dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
