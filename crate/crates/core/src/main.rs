use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use commutant_lab::cli::{run, Command, RunConfig, RunOptions};

/// Verification driver for commuting convolution/differential operator pairs.
#[derive(Parser, Debug)]
#[command(name = "commutant-lab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `output_path`, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write K.csv and L.csv.
    #[arg(long)]
    dump: bool,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = RunConfig::load(&args.config).and_then(|cfg| {
        let opts = RunOptions {
            out_dir: args.out.clone(),
            dump: args.dump,
            quiet: args.quiet,
        };
        run(&cfg, args.command, &opts)
    });
    match result {
        Ok(outcome) if outcome.passed() => ExitCode::SUCCESS,
        Ok(outcome) => {
            let failed: Vec<_> = outcome
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            eprintln!(
                "commutant-lab: {} check(s) failed: {}",
                failed.len(),
                failed.join(", ")
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("commutant-lab: error: {e}");
            ExitCode::from(2)
        }
    }
}
