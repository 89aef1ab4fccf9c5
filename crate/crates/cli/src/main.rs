//! `patrol`: generate patrol schedules, analyze attacker responses against
//! them and print the strategy comparison table.

mod analyze;
mod artifact;
mod config;
mod error;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use patrol_core::verifier::ratio_table;

use crate::artifact::Artifact;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "patrol",
    version,
    about = "Patrol schedules against a timing attacker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a schedule artifact from a JSON config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Artifact path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Compute best responses against a schedule artifact.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Analysis JSON path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gap histogram CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Print worst-case ratios of each strategy as text and CSV.
    Table,
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let result = match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| CliError::Internal(format!("write failed: {e}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn generate(config: &Path, out: Option<&Path>, seed: Option<u64>, quiet: bool) -> CliResult<()> {
    let config = config::load(config)?;
    let seed = seed
        .or(config.seed)
        .ok_or_else(|| CliError::Input("no seed in config and no --seed given".into()))?;
    let artifact = artifact::generate(&config, seed)?;
    write_output(out, &to_json(&artifact)?)?;
    if !quiet {
        eprintln!(
            "{:?} schedule over {} targets, seed {}, K = {}",
            artifact.strategy,
            artifact.values.len(),
            seed,
            artifact.quasi_regularity.exact
        );
    }
    Ok(())
}

fn analyze(
    input: &Path,
    out: Option<&Path>,
    csv_path: Option<&Path>,
    quiet: bool,
) -> CliResult<()> {
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let artifact: Artifact = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("malformed artifact {}: {e}", input.display())))?;
    let analysis = analyze::analyze(&artifact)?;
    write_output(out, &to_json(&analysis)?)?;
    if let Some(p) = csv_path {
        let file = fs::File::create(p)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", p.display())))?;
        analyze::write_csv(&analysis, io::BufWriter::new(file))
            .map_err(|e| CliError::Internal(format!("write failed: {e}")))?;
    }
    if !quiet {
        eprintln!(
            "max ratio to 1/4: {:.6}, K = {}",
            analysis.max_ratio, analysis.quasi_regularity.exact
        );
    }
    Ok(())
}

fn table() -> CliResult<()> {
    let rows = ratio_table().map_err(|e| CliError::Internal(e.to_string()))?;
    let width = rows
        .iter()
        .map(|r| r.strategy.len())
        .max()
        .unwrap_or(0)
        .max("strategy".len());
    let mut text = format!("{:<width$}  ratio\n", "strategy");
    for r in &rows {
        text += &format!("{:<width$}  {:.4}\n", r.strategy, r.ratio);
    }
    text.push('\n');
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["strategy", "ratio"]).map_err(csv_err)?;
    for r in &rows {
        w.write_record([r.strategy.to_string(), format!("{:.6}", r.ratio)])
            .map_err(csv_err)?;
    }
    let csv_bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let mut bytes = text.into_bytes();
    bytes.extend(csv_bytes);
    write_output(None, &bytes)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate {
            config,
            out,
            seed,
            quiet,
        } => generate(config, out.as_deref(), *seed, *quiet),
        Command::Analyze {
            input,
            out,
            csv,
            quiet,
        } => analyze(input, out.as_deref(), csv.as_deref(), *quiet),
        Command::Table => table(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
