//! Error of a summability mean against the function it sums.

use rayon::prelude::*;

use super::report::{float_cell, Column, ExperimentReport, Verdict};
use crate::error::{DslabError, Result};
use crate::means::{apply_mean, MeanId};
use crate::transforms::SampledFunction;

/// Required drop of the L1 error between the first and last grid point.
pub const REQUIRED_DROP: f64 = 10.0;

/// One grid point of a convergence run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub l1_error: f64,
    pub max_error: f64,
}

/// `(n, ‖mean_n f - f‖_1, max |mean_n f - f|)` for each `n`, in float mode.
pub fn convergence_rows(m: &MeanId, f: &SampledFunction<f64>, n_list: &[u64]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = n_list
        .par_iter()
        .map(|&n| {
            let t = apply_mean(m, n, f)?;
            let diff = t.sub(f)?;
            let abs: Vec<f64> = diff.values().iter().map(|v| v.abs()).collect();
            let l1 = abs.iter().sum::<f64>() / abs.len() as f64;
            let max = abs.iter().cloned().fold(0.0, f64::max);
            Ok(ConvergenceRow { n, l1_error: l1, max_error: max })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// Runs `mean_n f` over `n_list` and reports the errors.
///
/// `f` must be constant on the rank `N-2` intervals of its own resolution
/// `N`, so that partial sums reach `f` well before the top index. Passes
/// iff the L1 error at the largest `n` is at most a tenth of the error at
/// the smallest `n`.
pub fn convergence_experiment(m: &MeanId, f: &SampledFunction<f64>, n_list: &[u64]) -> Result<ExperimentReport> {
    let resolution = f.resolution();
    if resolution < 2 {
        return Err(DslabError::domain("convergence runs need resolution ≥ 2"));
    }
    let coarse = f.block_average(resolution - 2)?;
    if !coarse.mode_eq(f) {
        return Err(DslabError::domain(
            "f must be sampled at resolution N-2 or coarser before embedding",
        ));
    }
    let mut grid = n_list.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 2 {
        return Err(DslabError::domain("a convergence run needs at least two values of n"));
    }
    if grid[0] < m.kind.min_index() {
        return Err(DslabError::domain(format!("{} needs n ≥ {}", m.kind, m.kind.min_index())));
    }
    let rows = convergence_rows(m, f, &grid)?;
    let mut report = ExperimentReport::new(
        "converge",
        vec![Column::exact("n"), Column::float("l1_error"), Column::float("max_error")],
    )
    .param("mean", &m.kind)
    .param("system", m.system)
    .param("resolution", resolution);
    for r in &rows {
        report.push_row(vec![r.n.to_string(), float_cell(r.l1_error), float_cell(r.max_error)]);
    }
    let first = rows.first().unwrap().l1_error;
    let last = rows.last().unwrap().l1_error;
    let drop = if last > 0.0 { first / last } else { f64::INFINITY };
    report.stat("first_l1_error", first);
    report.stat("last_l1_error", last);
    if drop.is_finite() {
        report.stat("drop_factor", drop);
    } else {
        report.stat("drop_factor", "inf");
    }
    report.verdict = Verdict::from_bool(last * REQUIRED_DROP <= first);
    Ok(report)
}
