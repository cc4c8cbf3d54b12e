//! Run a JSON experiment config and print the CSV record.
//!
//! `cargo run --example run_config -- configs/sweep_miller.json`

use std::path::PathBuf;

use sendov_lab::experiment::{self, ExperimentConfig, Format};

fn main() -> sendov_lab::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sweep_miller.json")));
    let cfg = ExperimentConfig::load(&path)?;
    let record = experiment::run(&cfg, None)?;
    experiment::write_record(&record, Format::Csv, std::io::stdout().lock())?;
    eprintln!("all passed: {}", record.all_passed);
    Ok(())
}
