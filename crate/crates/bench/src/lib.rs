//! Benchmark harness for the incremental engine: list and interpreter
//! workloads, edit scripts, runs under each naming mode, and CSV and
//! speedup-table reports.
//!
//! Every run checks its demanded output against a direct computation, and
//! every mode runs in its own engine on a large stack.

pub mod report;
pub mod run;
pub mod workload;

pub use report::{emit_csv, mode_mismatches, parse_csv, speedup_table, violation_rows, ReportError, CSV_HEADER};
pub use run::{filter_fn, initial_values, list_oracle, map_fn, run_bench, run_bench_with, BenchOptions, Measurement, Output};
pub use workload::{even10, parse_positions, script, validate, Demand, EditKind, EditScript, Program, ScriptEdit, Workload, WorkloadError};
