use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use nominal_core::{with_big_stack, Mode};
use nominal_imp::{edit_program, interpret, parse, Edit, Final, Interp};

#[derive(Parser)]
#[command(name = "imp", about = "Run imperative programs incrementally")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program directly and print its final state.
    Run { file: PathBuf },
    /// Run a program, apply edits one at a time and re-run after each.
    Incr {
        file: PathBuf,
        /// Edit spec such as `repl@3.1=42`, `swap@2` or `ext@loop1=+500`; repeatable.
        #[arg(long = "edit", required = true)]
        edits: Vec<Edit>,
        #[arg(long, default_value = "nominal")]
        mode: Mode,
        /// Write per-run counters as CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
}

fn print_final(f: &Final) {
    for (x, v) in &f.env {
        println!("{x} = {v}");
    }
    if !f.store.is_empty() {
        let cells: Vec<String> = f.store.iter().map(|(a, v)| format!("{a}:{v}")).collect();
        println!("store {}", cells.join(" "));
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    with_big_stack(move || match cli.command {
        Command::Run { file } => {
            let src = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let program = parse(&src)?;
            print_final(&interpret(&program)?);
            Ok(())
        }
        Command::Incr { file, edits, mode, stats } => {
            let src = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let mut program = parse(&src)?;
            let mut interp = Interp::new(mode)?;
            let mut rows = vec!["step,edit,wall_ns,eval_runs,reexec,alloc,hits,dirtied".to_owned()];
            for step in 0..=edits.len() {
                let label = if step == 0 { "initial".to_owned() } else { edits[step - 1].to_string() };
                if step > 0 {
                    program = edit_program(&program, &edits[step - 1])?;
                }
                let start = Instant::now();
                let (out, s) = interp.run(&program)?;
                let wall = start.elapsed().as_nanos();
                if out != interpret(&program)? {
                    bail!("incremental result after `{label}` differs from direct interpretation");
                }
                let e = s.engine;
                rows.push(format!("{step},{label},{wall},{},{},{},{},{}", s.eval_runs, e.reexec, e.allocations, e.hits, e.dirtied));
                println!("{label}: {} command evaluations, {wall} ns", s.eval_runs);
                if step == edits.len() {
                    print_final(&out);
                }
            }
            if let Some(path) = stats {
                std::fs::write(&path, rows.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
    })
}
