use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use frachs_cli::{run_config, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "frachs", version, about = "Fractional Hardy-Sobolev numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for parallel levels and sweeps.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, seed, threads } = cli.command;
    let result = (|| {
        if let Some(t) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot set up {t} threads: {e}")))?;
        }
        let cfg = ExperimentConfig::load(&config)?;
        run_config(&cfg, seed, out.as_deref())
    })();
    match result {
        Ok(outcome) => {
            let r = &outcome.report;
            for c in &r.checks {
                println!(
                    "{} {}: {:e} {} {:e}",
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.relation,
                    c.limit
                );
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("{}: {}", r.experiment, if r.passed { "passed" } else { "failed" });
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("frachs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
