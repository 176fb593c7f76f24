//! λ sweeps of the variational minimum, with refinement around transitions.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dissipative_heisenberg, AnsatzKind, LatticeSpec};
use crate::variational::{minimize_norm, order_parameters, MinimizeOptions, ORDER_THRESHOLD};

/// Largest coarse grid a sweep accepts.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;

pub const CSV_HEADER: [&str; 12] =
    ["lambda", "ax_A", "ay_A", "az_A", "ax_B", "ay_B", "az_B", "m", "ms", "norm", "converged", "restarts"];

/// Variational minimum at one λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub alpha_a: [f64; 3],
    pub alpha_b: [f64; 3],
    pub m: f64,
    pub ms: f64,
    pub norm: f64,
    pub converged: bool,
    pub restarts: usize,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub step: f64,
    pub lattice: LatticeSpec,
    pub kind: AnsatzKind,
    pub seed: u64,
    /// Worker threads; 0 picks the rayon default.
    pub jobs: usize,
    pub restarts: usize,
    /// Add a 0.001 grid within `refine_halfwidth` of each threshold
    /// crossing, then bisect the crossing down to `bisect_tol`.
    pub refine: bool,
    pub refine_step: f64,
    pub refine_halfwidth: f64,
    pub bisect_tol: f64,
}

impl SweepConfig {
    pub fn new(lambda_min: f64, lambda_max: f64, step: f64, lattice: LatticeSpec, kind: AnsatzKind) -> Self {
        Self {
            lambda_min,
            lambda_max,
            step,
            lattice,
            kind,
            seed: 0,
            jobs: 0,
            restarts: 8,
            refine: true,
            refine_step: 1e-3,
            refine_halfwidth: 0.05,
            bisect_tol: 1e-4,
        }
    }
}

/// Rounds λ to 1e-10 so grids built by repeated addition compare equal.
pub fn round_lambda(l: f64) -> f64 {
    (l * 1e10).round() / 1e10
}

fn point_seed(seed: u64, lambda: f64) -> u64 {
    let key = (lambda * 1e10).round() as i64 as u64;
    seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Evaluates the variational minimum at a single λ.
pub fn sweep_point(cfg: &SweepConfig, lambda: f64) -> Result<SweepRecord> {
    let model = dissipative_heisenberg(lambda, cfg.lattice)?;
    let opts = MinimizeOptions { restarts: cfg.restarts, seed: point_seed(cfg.seed, lambda), ..Default::default() };
    let min = minimize_norm(&model, cfg.kind, &opts)?;
    let (m, ms) = order_parameters(&min.ansatz);
    Ok(SweepRecord {
        lambda,
        alpha_a: min.ansatz.a.alpha,
        alpha_b: min.ansatz.b.alpha,
        m,
        ms,
        norm: min.norm,
        converged: min.converged,
        restarts: min.restarts_used,
    })
}

fn evaluate(cfg: &SweepConfig, lambdas: &[f64]) -> Result<Vec<SweepRecord>> {
    lambdas.par_iter().map(|&l| sweep_point(cfg, l)).collect()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let l = round_lambda(lo + step * i as f64);
        if l > hi + 1e-10 {
            break;
        }
        out.push(l);
        i += 1;
    }
    out
}

fn is_ordered(r: &SweepRecord) -> (bool, bool) {
    (r.m >= ORDER_THRESHOLD, r.ms >= ORDER_THRESHOLD)
}

/// Adjacent λ pairs whose order flags differ.
fn crossings(records: &[SweepRecord]) -> Vec<(f64, f64)> {
    records
        .windows(2)
        .filter(|w| w[0].converged && w[1].converged && is_ordered(&w[0]) != is_ordered(&w[1]))
        .map(|w| (w[0].lambda, w[1].lambda))
        .collect()
}

fn merge(records: &mut Vec<SweepRecord>, new: Vec<SweepRecord>) {
    records.extend(new);
    records.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    records.dedup_by(|a, b| a.lambda == b.lambda);
}

/// Runs the sweep and returns records sorted by λ.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if !(cfg.step > 0.0) || !cfg.step.is_finite() {
        return Err(Error::Config(format!("step must be positive, got {}", cfg.step)));
    }
    if !cfg.lambda_min.is_finite() || !cfg.lambda_max.is_finite() || cfg.lambda_min < 0.0 {
        return Err(Error::Config(format!("invalid λ range [{}, {}]", cfg.lambda_min, cfg.lambda_max)));
    }
    if cfg.lambda_max < cfg.lambda_min {
        return Ok(Vec::new());
    }
    let points = ((cfg.lambda_max - cfg.lambda_min) / cfg.step).floor() + 1.0;
    if points > MAX_SWEEP_POINTS as f64 {
        return Err(Error::ResourceCap(format!("{points} grid points exceed {MAX_SWEEP_POINTS}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let mut records = evaluate(cfg, &grid(cfg.lambda_min, cfg.lambda_max, cfg.step))?;
    if !cfg.refine {
        return Ok(records);
    }

    let coarse = crossings(&records);
    let mut fine = Vec::new();
    for &(lo, hi) in &coarse {
        let mid = 0.5 * (lo + hi);
        let from = (mid - cfg.refine_halfwidth).max(cfg.lambda_min);
        let to = (mid + cfg.refine_halfwidth).min(cfg.lambda_max);
        let start = (from / cfg.refine_step).ceil() * cfg.refine_step;
        fine.extend(grid(start, to, cfg.refine_step));
    }
    fine.retain(|l| !records.iter().any(|r| r.lambda == *l));
    fine.sort_by(f64::total_cmp);
    fine.dedup();
    let new = evaluate(cfg, &fine)?;
    merge(&mut records, new);

    // bisect every remaining bracket in lockstep
    let mut brackets = crossings(&records);
    while brackets.iter().any(|(lo, hi)| hi - lo > cfg.bisect_tol * (1.0 + 1e-9)) {
        let mids: Vec<f64> = brackets
            .iter()
            .filter(|(lo, hi)| hi - lo > cfg.bisect_tol * (1.0 + 1e-9))
            .map(|(lo, hi)| round_lambda(0.5 * (lo + hi)))
            .filter(|l| !records.iter().any(|r| r.lambda == *l))
            .collect();
        if mids.is_empty() {
            break;
        }
        let new = evaluate(cfg, &mids)?;
        merge(&mut records, new);
        brackets = crossings(&records);
    }
    Ok(records)
}

/// Formats with 12 significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if (1e-4..1e12).contains(&r.abs()) { format!("{r}") } else { format!("{r:e}") }
}

pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let mut row: Vec<String> = vec![fmt_sig(r.lambda)];
        row.extend(r.alpha_a.iter().chain(&r.alpha_b).map(|v| fmt_sig(*v)));
        row.extend([fmt_sig(r.m), fmt_sig(r.ms), fmt_sig(r.norm), r.converged.to_string(), r.restarts.to_string()]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(",")) });
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(csv_err)?;
        let num = |k: usize| -> Result<f64> {
            row.get(k)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| Error::Parse { line, msg: format!("column {}: {e}", CSV_HEADER[k]) })
        };
        let converged = match row.get(10).map(str::trim) {
            Some("true") => true,
            Some("false") => false,
            other => return Err(Error::Parse { line, msg: format!("converged: expected true/false, got {other:?}") }),
        };
        let restarts = row
            .get(11)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| Error::Parse { line, msg: format!("restarts: {e}") })?;
        out.push(SweepRecord {
            lambda: num(0)?,
            alpha_a: [num(1)?, num(2)?, num(3)?],
            alpha_b: [num(4)?, num(5)?, num(6)?],
            m: num(7)?,
            ms: num(8)?,
            norm: num(9)?,
            converged,
            restarts,
        });
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, msg: e.to_string() }
}
