use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use sendov_lab::experiment::{self, Command, DegreeSpec, ExperimentConfig, Format};

#[derive(Parser)]
#[command(version, about = "Batch experiments on zeros and critical points of polynomials")]
struct Cli {
    /// check, identities, balayage, winding, family, fourier or sweep.
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Degrees, comma separated; replaces `n` in the config.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Replaces the random ensemble seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> sendov_lab::Result<bool> {
        let mut cfg = ExperimentConfig::load(&cli.config)?;
        match cli.n.len() {
            0 => {}
            1 => cfg.n = Some(DegreeSpec::One(cli.n[0])),
            _ => cfg.n = Some(DegreeSpec::Many(cli.n.clone())),
        }
        if let Some(seed) = cli.seed {
            match cfg.random.as_mut() {
                Some(r) => r.seed = seed,
                None => return Err(sendov_lab::LabError::Config("--seed needs a `random` source".into())),
            }
        }
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        if let Some(f) = cli.format {
            cfg.format = f;
        }
        let record = experiment::run_and_write(&cfg, Some(cli.command))?;
        eprintln!(
            "{}: {} cases, {} failed, {:.3} s",
            record.command,
            record.cases.len(),
            record.failed,
            record.wall_time_s
        );
        Ok(record.all_passed)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
