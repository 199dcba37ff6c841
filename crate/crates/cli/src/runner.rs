//! Executes the Cartesian product of protocols, sweep points and modes.

use std::path::PathBuf;

use mmshare::analysis::{coverage_curve, AnalysisContext};
use mmshare::simulator::{coverage_outcomes, estimate_transmission_probability, summarize, IterationOutcome, Scenario};
use mmshare::{NetworkParams, Protocol};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowMode {
    Analysis,
    Sim,
}

impl RowMode {
    pub fn name(self) -> &'static str {
        match self {
            RowMode::Analysis => "analysis",
            RowMode::Sim => "sim",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub protocol: Protocol,
    pub mode: RowMode,
    pub rho: f64,
    pub p_th_offset_db: f64,
    pub p_th_a_offset_db: f64,
    pub z_db: f64,
    pub p_c: f64,
    pub p_t: f64,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
}

/// A sweep point that produced no rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub protocol: Protocol,
    pub mode: RowMode,
    pub rho: f64,
    pub p_th_offset_db: f64,
    pub p_th_a_offset_db: f64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<Failure>,
}

/// Per-iteration outcomes of one simulated sweep point.
#[derive(Debug, Clone)]
pub struct Trace {
    pub name: String,
    pub outcomes: Vec<IterationOutcome>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    protocol: Protocol,
    mode: RowMode,
    rho: f64,
    p_th: f64,
    p_th_a: f64,
}

fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    let modes: &[RowMode] = match cfg.mode {
        Mode::Analysis => &[RowMode::Analysis],
        Mode::Sim => &[RowMode::Sim],
        Mode::Both => &[RowMode::Analysis, RowMode::Sim],
    };
    let mut out = Vec::new();
    for &protocol in &cfg.protocols {
        for &rho in &cfg.rho {
            for &p_th in &cfg.p_th_offset_db {
                for &p_th_a in &cfg.p_th_a_offset_db {
                    for &mode in modes {
                        out.push(Point { protocol, mode, rho, p_th, p_th_a });
                    }
                }
            }
        }
    }
    out
}

fn run_point(cfg: &ExperimentConfig, pt: Point) -> mmshare::Result<(Vec<ResultRow>, Option<Trace>)> {
    let mut params: NetworkParams = cfg.params;
    params.sharing.rho = pt.rho;
    params.p_th_offset_db = pt.p_th;
    params.p_th_a_offset_db = pt.p_th_a;
    let row = |z_db: f64, p_c: f64, p_t: f64, stderr: Option<f64>, seed: Option<u64>| ResultRow {
        protocol: pt.protocol,
        mode: pt.mode,
        rho: pt.rho,
        p_th_offset_db: pt.p_th,
        p_th_a_offset_db: pt.p_th_a,
        z_db,
        p_c,
        p_t,
        stderr,
        seed,
    };
    match pt.mode {
        RowMode::Analysis => {
            let res = coverage_curve(&cfg.sim.z_grid_db, &AnalysisContext::new(params, pt.protocol)?)?;
            Ok((res.z_db.iter().zip(&res.p_c).map(|(&z, &p)| row(z, p, res.p_t, None, None)).collect(), None))
        }
        RowMode::Sim => {
            let sc = Scenario::new(params, pt.protocol)?;
            let est = estimate_transmission_probability(&cfg.sim, &sc)?;
            let outcomes = coverage_outcomes(&cfg.sim, &sc, est.p_t)?;
            let res = summarize(&cfg.sim, pt.protocol, est.p_t, &outcomes);
            let seed = Some(cfg.sim.master_seed);
            let rows = (0..res.z_db.len()).map(|i| row(res.z_db[i], res.p_c[i], res.p_t, Some(res.stderr[i]), seed)).collect();
            let trace = cfg.trace.then(|| Trace {
                name: format!("trace_{}_rho{}_pth{}_ptha{}.jsonl", pt.protocol, pt.rho, pt.p_th, pt.p_th_a),
                outcomes,
            });
            Ok((rows, trace))
        }
    }
}

/// Runs every sweep point. Failures are collected, never fatal.
pub fn run_experiment(cfg: &ExperimentConfig) -> (ResultTable, Vec<Trace>) {
    let results: Vec<_> = points(cfg).into_par_iter().map(|pt| (pt, run_point(cfg, pt))).collect();
    let mut table = ResultTable::default();
    let mut traces = Vec::new();
    for (pt, res) in results {
        match res {
            Ok((rows, trace)) => {
                table.rows.extend(rows);
                traces.extend(trace);
            }
            Err(e) => table.failures.push(Failure {
                protocol: pt.protocol,
                mode: pt.mode,
                rho: pt.rho,
                p_th_offset_db: pt.p_th,
                p_th_a_offset_db: pt.p_th_a,
                error: e.to_string(),
            }),
        }
    }
    (table, traces)
}

pub fn trace_path(dir: &std::path::Path, t: &Trace) -> PathBuf {
    dir.join(&t.name)
}
