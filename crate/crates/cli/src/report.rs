//! CSV emission and parsing.
//!
//! Per-miner rows use the fixed column order
//! `[swept_value,] miner_id, alpha, beta, hash_rate, share, utility, foc_residual`.
//! Per-scenario totals follow as summary rows whose first field starts with `#`.

use std::io::{self, Write};

use pouw_core::{EquilibriumSolution64, Scenario64};

use crate::numfmt::full;
use crate::sweep::{SweepParam, SweepRow};

pub const MINER_COLUMNS: [&str; 7] = [
    "miner_id",
    "alpha",
    "beta",
    "hash_rate",
    "share",
    "utility",
    "foc_residual",
];

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).from_writer(out)
}

fn miner_fields(scenario: &Scenario64, solution: &EquilibriumSolution64) -> Vec<[String; 7]> {
    let shares = solution.shares();
    scenario
        .miners()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            [
                m.id().to_owned(),
                full(m.alpha()),
                full(m.beta()),
                full(solution.hash_rates[i]),
                full(shares[i]),
                full(solution.utilities[i]),
                full(solution.residuals[i]),
            ]
        })
        .collect()
}

fn io_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_solution_csv<W: Write>(
    out: W,
    scenario: &Scenario64,
    solution: &EquilibriumSolution64,
    decentralization: f64,
) -> io::Result<()> {
    let mut w = writer(out);
    w.write_record(MINER_COLUMNS).map_err(io_err)?;
    for row in miner_fields(scenario, solution) {
        w.write_record(&row).map_err(io_err)?;
    }
    let summary = [
        ("# total_hash", full(solution.total_hash)),
        ("# decentralization", full(decentralization)),
        ("# method", solution.solver.method.as_str().to_owned()),
        ("# iterations", solution.solver.iterations.to_string()),
    ];
    for (key, value) in summary {
        w.write_record([key, value.as_str()]).map_err(io_err)?;
    }
    w.flush()
}

/// Sweep CSV: a leading `swept_value` column and a trailing `error` column.
/// Values that failed to solve get a single row carrying the error message.
pub fn write_sweep_csv<W: Write>(
    out: W,
    parameter: &SweepParam,
    rows: &[SweepRow],
) -> io::Result<()> {
    let mut w = writer(out);
    let mut header = vec!["swept_value"];
    header.extend(MINER_COLUMNS);
    header.push("error");
    w.write_record(&header).map_err(io_err)?;
    w.write_record(["# parameter".to_string(), parameter.to_string()])
        .map_err(io_err)?;

    for row in rows {
        let value = full(row.value);
        match &row.outcome {
            Ok(solved) => {
                for fields in miner_fields(&solved.scenario, &solved.solution) {
                    let mut record = vec![value.clone()];
                    record.extend(fields);
                    record.push(String::new());
                    w.write_record(&record).map_err(io_err)?;
                }
                let tag = format!("# {value}");
                w.write_record([
                    tag.as_str(),
                    "total_hash",
                    &full(solved.solution.total_hash),
                ])
                .map_err(io_err)?;
                w.write_record([
                    tag.as_str(),
                    "decentralization",
                    &full(solved.decentralization),
                ])
                .map_err(io_err)?;
            }
            Err(message) => {
                let mut record = vec![value];
                record.extend(std::iter::repeat_n(String::new(), MINER_COLUMNS.len()));
                record.push(message.clone());
                w.write_record(&record).map_err(io_err)?;
            }
        }
    }
    w.flush()
}

/// One per-miner record read back from a solve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct MinerRecord {
    pub miner_id: String,
    pub alpha: f64,
    pub beta: f64,
    pub hash_rate: f64,
    pub share: f64,
    pub utility: f64,
    pub foc_residual: f64,
}

/// Parses the per-miner rows of a solve CSV, skipping `#` summary rows.
pub fn read_solution_csv(text: &str) -> Result<Vec<MinerRecord>, String> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().collect::<Vec<_>>() != MINER_COLUMNS {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<f64, String> {
            rec.get(i)
                .ok_or_else(|| format!("missing column {}", MINER_COLUMNS[i]))?
                .parse::<f64>()
                .map_err(|e| format!("{}: {e}", MINER_COLUMNS[i]))
        };
        out.push(MinerRecord {
            miner_id: rec.get(0).unwrap_or_default().to_owned(),
            alpha: num(1)?,
            beta: num(2)?,
            hash_rate: num(3)?,
            share: num(4)?,
            utility: num(5)?,
            foc_residual: num(6)?,
        });
    }
    Ok(out)
}
