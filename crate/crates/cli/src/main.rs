use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fibermem_cli::{load_config, run, CliError};

#[derive(Parser)]
#[command(
    name = "fibermem",
    version,
    about = "Optimal fibre layouts for reinforced membrane shells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the problem described by a TOML configuration.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on OC sizing updates.
        #[arg(long)]
        max_oc: Option<usize>,
        /// Cap on fibre orientation updates.
        #[arg(long)]
        max_rot: Option<usize>,
        /// OC damping exponent.
        #[arg(long)]
        eta: Option<f64>,
        /// Only report errors.
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        max_oc,
        max_rot,
        eta,
        quiet,
    } = Cli::parse().command;
    let level = if quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = load_config(&config).and_then(|mut cfg| {
        if let Some(dir) = out {
            cfg.output.directory = dir;
        }
        if let Some(n) = max_oc {
            cfg.settings.max_oc_iters = n;
        }
        if let Some(n) = max_rot {
            cfg.settings.max_rotation_updates = n;
        }
        if let Some(x) = eta {
            cfg.settings.eta = x;
        }
        cfg.validate()?;
        let outcome = run(&cfg)?;
        Ok::<_, CliError>((cfg, outcome))
    });
    match result {
        Ok((cfg, outcome)) => {
            if !quiet {
                let s = &outcome.summary;
                println!(
                    "{}: compliance {:e}, {} OC updates, {} orientation updates, results in {}",
                    if s.converged {
                        "converged"
                    } else {
                        "NOT converged"
                    },
                    s.compliance,
                    s.oc_updates,
                    s.rotation_updates,
                    cfg.output.directory.display()
                );
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
