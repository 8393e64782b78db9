//! Write a seeded synthetic survey export and the mapping that reads it.
//!
//! cargo run -p attache-core --example generate_fixture -- --rows 43000 --out-dir fixture

use std::path::PathBuf;

use clap::Parser;

use attache_core::fixture::{generate_csv, FixtureSpec};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 2013)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    /// Share of deliberately corrupted rows.
    #[arg(long, default_value_t = 0.05)]
    malformed: f64,
    #[arg(long, default_value_t = 0.06)]
    missing: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let spec = FixtureSpec {
        seed: args.seed,
        rows: args.rows,
        malformed_fraction: args.malformed,
        missing_rate: args.missing,
        communities: None,
    };
    let survey = generate_csv(&spec);
    std::fs::create_dir_all(&args.out_dir)?;
    let data = args.out_dir.join("survey.csv");
    let mapping = args.out_dir.join("mapping.toml");
    std::fs::write(&data, &survey.csv)?;
    std::fs::write(&mapping, survey.mapping.to_toml_string())?;
    println!(
        "{} ({} rows, {} corrupted) and {}",
        data.display(),
        spec.rows,
        survey.malformed_rows,
        mapping.display()
    );
    Ok(())
}
