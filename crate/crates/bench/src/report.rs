//! CSV output, speedup tables and cross-mode comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nominal_core::{Counters, Mode};
use thiserror::Error;

use crate::run::Measurement;
use crate::workload::Demand;

/// Column order of [`emit_csv`].
pub const CSV_HEADER: [&str; 12] = ["program", "n", "seed", "demand", "mode", "edit_kind", "edit_pos", "wall_ns", "reexec", "alloc", "hits", "dirtied"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no from-scratch rows for {program} / {edit}")]
    MissingBaseline { program: String, edit: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad {column} `{value}`")]
    BadField { row: usize, column: &'static str, value: String },
}

/// One row per measurement, in the order given. Failed rows leave the
/// numeric columns empty.
pub fn emit_csv(ms: &[Measurement]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
    for m in ms {
        let c = m.counts.filter(|_| !m.failed());
        let wall = if m.failed() { String::new() } else { m.wall_ns.to_string() };
        w.write_record([
            m.program.clone(),
            m.n.to_string(),
            m.seed.to_string(),
            m.demand.to_string(),
            m.mode.label().to_owned(),
            m.edit_kind.clone(),
            m.edit_pos.map(|p| p.to_string()).unwrap_or_default(),
            wall,
            opt(c.map(|c| c.reexec)),
            opt(c.map(|c| c.allocations)),
            opt(c.map(|c| c.hits)),
            opt(c.map(|c| c.dirtied)),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Read back [`emit_csv`] output. Outputs and errors are not part of the
/// text; a row with empty counts reads as failed.
pub fn parse_csv(text: &str) -> Result<Vec<Measurement>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut steps: BTreeMap<(String, usize, u64, String, String), usize> = BTreeMap::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |column: &'static str, value: &str| ReportError::BadField { row: row + 1, column, value: value.to_owned() };
        let num = |i: usize, column: &'static str| -> Result<Option<u64>, ReportError> {
            match field(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(column, s)),
            }
        };
        let n: usize = field(1).parse().map_err(|_| bad("n", field(1)))?;
        let seed: u64 = field(2).parse().map_err(|_| bad("seed", field(2)))?;
        let demand: Demand = field(3).parse().map_err(|_| bad("demand", field(3)))?;
        let mode: Mode = field(4).parse().map_err(|_| bad("mode", field(4)))?;
        let edit_pos = num(6, "edit_pos")?.map(|p| p as usize);
        let wall = num(7, "wall_ns")?;
        let counts = match (num(8, "reexec")?, num(9, "alloc")?, num(10, "hits")?, num(11, "dirtied")?) {
            (Some(reexec), Some(allocations), Some(hits), Some(dirtied)) => Some(Counters { reexec, allocations, hits, dirtied }),
            _ => None,
        };
        let key = (field(0).to_owned(), n, seed, field(3).to_owned(), field(4).to_owned());
        let step = steps.entry(key).or_insert(0);
        out.push(Measurement {
            program: field(0).to_owned(),
            n,
            seed,
            demand,
            mode,
            edit_kind: field(5).to_owned(),
            edit_pos,
            step: *step,
            wall_ns: wall.unwrap_or(0),
            counts,
            output: None,
            violations: 0,
            error: if counts.is_none() || wall.is_none() { Some("failed".to_owned()) } else { None },
        });
        *step += 1;
    }
    Ok(out)
}

fn median(mut xs: Vec<u64>) -> Option<u64> {
    xs.sort_unstable();
    xs.get(xs.len() / 2).copied()
}

/// Per (program, n, edit kind): median from-scratch time in milliseconds and
/// the speedups FS/structural and FS/nominal. Initial runs are not edits and
/// are left out; failed rows are ignored.
pub fn speedup_table(ms: &[Measurement]) -> Result<String, ReportError> {
    type Key = (String, usize, String);
    let mut cells: BTreeMap<Key, BTreeMap<&'static str, Vec<u64>>> = BTreeMap::new();
    for m in ms.iter().filter(|m| !m.failed() && m.edit_kind != "initial") {
        let key = (m.program.clone(), m.n, m.edit_kind.clone());
        cells.entry(key).or_default().entry(m.mode.label()).or_default().push(m.wall_ns);
    }
    let mut out = String::new();
    writeln!(out, "{:<16} {:>8} {:<8} {:>12} {:>12} {:>12}", "program", "n", "edit", "FS (ms)", "S (x)", "N (x)").expect("write to string");
    for ((program, n, edit), by_mode) in cells {
        let fs = by_mode.get(Mode::FromScratch.label()).cloned().and_then(median).ok_or_else(|| ReportError::MissingBaseline {
            program: program.clone(),
            edit: edit.clone(),
        })?;
        let ratio = |mode: Mode| match by_mode.get(mode.label()).cloned().and_then(median) {
            Some(t) => format!("{:.2}", fs as f64 / t.max(1) as f64),
            None => "-".to_owned(),
        };
        writeln!(
            out,
            "{:<16} {:>8} {:<8} {:>12.3} {:>12} {:>12}",
            program,
            n,
            edit,
            fs as f64 / 1e6,
            ratio(Mode::Structural),
            ratio(Mode::Nominal)
        )
        .expect("write to string");
    }
    Ok(out)
}

/// Steps whose demanded outputs differ between modes, or that failed in
/// some mode, described one per line.
pub fn mode_mismatches(ms: &[Measurement]) -> Vec<String> {
    type Key = (String, usize, u64, Demand, usize);
    let mut groups: BTreeMap<Key, Vec<&Measurement>> = BTreeMap::new();
    for m in ms {
        groups.entry((m.program.clone(), m.n, m.seed, m.demand, m.step)).or_default().push(m);
    }
    let mut out = Vec::new();
    for ((program, n, seed, demand, step), rows) in groups {
        let at = format!("{program} n={n} seed={seed} demand={demand} step {step}");
        for m in rows.iter().filter(|m| m.failed()) {
            out.push(format!("{at}: {} failed: {}", m.mode, m.error.as_deref().unwrap_or("")));
        }
        let outputs: Vec<_> = rows.iter().filter(|m| !m.failed()).map(|m| (m.mode, m.output)).collect();
        if let Some(&(m0, o0)) = outputs.first() {
            for &(m, o) in &outputs[1..] {
                if o != o0 {
                    out.push(format!("{at}: {m} output differs from {m0}"));
                }
            }
        }
    }
    out
}

/// Rows whose well-formedness check found violations.
pub fn violation_rows(ms: &[Measurement]) -> impl Iterator<Item = &Measurement> {
    ms.iter().filter(|m| m.violations > 0)
}
