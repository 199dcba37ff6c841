//! CSV and JSON output with values rounded to six significant digits.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::runner::{Failure, ResultRow, ResultTable, RowMode};
use crate::CliError;

pub const HEADER: [&str; 10] = ["protocol", "mode", "rho", "p_th_offset_db", "p_th_a_offset_db", "z_db", "p_c", "p_t", "stderr", "seed"];

/// Rounds to six significant digits; the shortest representation of the
/// result is what gets printed.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().expect("float formatting round-trips")
}

fn num(x: f64) -> String {
    round6(x).to_string()
}

pub fn round_row(r: &ResultRow) -> ResultRow {
    ResultRow {
        rho: round6(r.rho),
        p_th_offset_db: round6(r.p_th_offset_db),
        p_th_a_offset_db: round6(r.p_th_a_offset_db),
        z_db: round6(r.z_db),
        p_c: round6(r.p_c),
        p_t: round6(r.p_t),
        stderr: r.stderr.map(round6),
        ..r.clone()
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.write_record([
            r.protocol.name().to_string(),
            r.mode.name().to_string(),
            num(r.rho),
            num(r.p_th_offset_db),
            num(r.p_th_a_offset_db),
            num(r.z_db),
            num(r.p_c),
            num(r.p_t),
            r.stderr.map(num).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    Ok(())
}

fn parse_f64(field: &str, s: &str) -> Result<f64, CliError> {
    s.parse().map_err(|_| CliError::Parse(format!("{field}: `{s}` is not a number")))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRow>, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    if rd.headers()?.iter().ne(HEADER) {
        return Err(CliError::Parse("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| parse_f64(HEADER[i], &rec[i]);
        rows.push(ResultRow {
            protocol: rec[0].parse()?,
            mode: match &rec[1] {
                "analysis" => RowMode::Analysis,
                "sim" => RowMode::Sim,
                m => return Err(CliError::Parse(format!("mode: `{m}`"))),
            },
            rho: f(2)?,
            p_th_offset_db: f(3)?,
            p_th_a_offset_db: f(4)?,
            z_db: f(5)?,
            p_c: f(6)?,
            p_t: f(7)?,
            stderr: if rec[8].is_empty() { None } else { Some(f(8)?) },
            seed: if rec[9].is_empty() {
                None
            } else {
                Some(rec[9].parse().map_err(|_| CliError::Parse(format!("seed: `{}`", &rec[9])))?)
            },
        });
    }
    Ok(rows)
}

pub fn write_failures_csv<W: Write>(failures: &[Failure], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["protocol", "mode", "rho", "p_th_offset_db", "p_th_a_offset_db", "error"])?;
    for f in failures {
        out.write_record([
            f.protocol.name().to_string(),
            f.mode.name().to_string(),
            num(f.rho),
            num(f.p_th_offset_db),
            num(f.p_th_a_offset_db),
            f.error.clone(),
        ])?;
    }
    out.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    rows: Vec<ResultRow>,
    failures: Vec<Failure>,
}

pub fn write_json<W: Write>(table: &ResultTable, w: W) -> Result<(), CliError> {
    let doc = JsonTable { rows: table.rows.iter().map(round_row).collect(), failures: table.failures.clone() };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn read_json<R: Read>(r: R) -> Result<ResultTable, CliError> {
    let doc: JsonTable = serde_json::from_reader(r).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(ResultTable { rows: doc.rows, failures: doc.failures })
}
