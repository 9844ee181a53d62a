use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use carleman_lab::harness::{parse_config, run, Command, RunOptions};
use carleman_lab::LabError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    VerifyIdentities,
    Simulate,
    VerifyCarleman,
    InverseSource,
    Cauchy,
}

impl Cmd {
    fn command(self) -> Command {
        match self {
            Cmd::VerifyIdentities => Command::VerifyIdentities,
            Cmd::Simulate => Command::Simulate,
            Cmd::VerifyCarleman => Command::VerifyCarleman,
            Cmd::InverseSource => Command::InverseSource,
            Cmd::Cauchy => Command::Cauchy,
        }
    }
}

/// Runs one experiment described by a TOML config and writes a CSV of
/// results plus a run manifest.
#[derive(Debug, Parser)]
#[command(name = "carleman-lab", version)]
struct Cli {
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `ensemble.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "CARLEMAN_LAB_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), LabError> {
    let text = std::fs::read_to_string(&cli.config)?;
    let mut cfg = parse_config(&text)?;
    let wanted = cli.command.command();
    if cfg.command != wanted {
        return Err(LabError::Config(vec![format!(
            "command: config is for {}, but {} was requested",
            cfg.command.name(),
            wanted.name()
        )]));
    }
    if let Some(seed) = cli.seed {
        if seed > i64::MAX as u64 {
            return Err(LabError::Config(vec![format!("--seed: must not exceed {}", i64::MAX)]));
        }
        cfg.ensemble.master_seed = seed;
    }
    let out = run(
        &cfg,
        &RunOptions {
            out_dir: cli.out.clone(),
            threads: cli.threads,
        },
    )?;
    println!("{}", out.csv.display());
    println!("{}", out.manifest.display());
    Ok(())
}
