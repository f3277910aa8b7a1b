//! `bench run` measures a workload under each mode; `bench table` prints
//! speedups from a CSV written by `bench run`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nominal_bench::{
    emit_csv, mode_mismatches, parse_csv, parse_positions, run_bench_with, script, speedup_table, violation_rows, BenchOptions, Demand, EditKind, Program,
    Workload,
};
use nominal_core::Mode;

#[derive(Parser)]
#[command(name = "bench", about = "Measure incremental workloads under each naming mode")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a workload and an edit script.
    Run(RunArgs),
    /// Print the speedup table for a CSV of measurements.
    Table { csv: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    /// eager-map (or map), eager-filter (or filter), min, sum, reverse,
    /// median, mergesort, lazy-map, lazy-filter, or imp:NAME.
    #[arg(long)]
    program: Program,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Comma-separated edit kinds; each is applied at every position.
    #[arg(long, value_delimiter = ',', default_value = "insert,delete")]
    edits: Vec<EditKind>,
    /// `even10` or comma-separated indices.
    #[arg(long, default_value = "even10")]
    positions: String,
    #[arg(long, value_delimiter = ',', default_value = "nominal,structural,fromscratch")]
    modes: Vec<Mode>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value = "all")]
    demand: Demand,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the CSV; standard output if absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Check graph well-formedness after every demand.
    #[arg(long)]
    validate: bool,
    /// Run the modes on separate threads.
    #[arg(long)]
    parallel: bool,
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let w = Workload { program: args.program, n: args.n, seed: args.seed, demand: args.demand };
    let positions = parse_positions(&args.positions, args.n)?;
    let edits = script(&args.edits, &positions);
    let opts = BenchOptions { modes: args.modes, trials: args.trials, validate: args.validate, parallel: args.parallel };
    let ms = run_bench_with(&w, &edits, &opts);
    let text = emit_csv(&ms);
    match &args.csv {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    for m in ms.iter().filter(|m| m.failed()) {
        eprintln!("{} {} step {}: {}", m.program, m.mode, m.step, m.error.as_deref().unwrap_or(""));
    }
    for m in violation_rows(&ms) {
        eprintln!("{} {} step {}: {} well-formedness violations", m.program, m.mode, m.step, m.violations);
    }
    let mismatches = mode_mismatches(&ms);
    for line in &mismatches {
        eprintln!("{line}");
    }
    Ok(if mismatches.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Command::Run(args) => run(args),
        Command::Table { csv } => {
            let text = std::fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            print!("{}", speedup_table(&parse_csv(&text)?)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
