//! Empirical constant in the majorant
//! `|F_n^w| ≤ c(α) n^{-α} Σ_{j=0}^{|n|} 2^{jα} K_{2^j}^w`.

use num_rational::BigRational;
use rayon::prelude::*;

use super::report::{float_cell, Column, ExperimentReport, Verdict};
use crate::dyadic::bit_length;
use crate::error::{DslabError, Result};
use crate::kernels::{fejer_kernel, norlund_kernel};
use crate::scalar::{format_rational, rational_to_f64};
use crate::systems::SystemId;
use crate::weights::{check_condition, Condition, ConditionVerdict, WeightSequence};

/// Relative growth of the running maximum over the top half of the grid
/// below which it counts as stabilised.
pub const STABILITY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantRow {
    pub n: u64,
    pub ratio: f64,
    pub running_max: f64,
    pub zero_denominator_cells: u64,
}

/// `max_x |F_n(x)| / (n^{-α} Σ_j 2^{jα} K_{2^j}(x))` for `n = 1..=n_max`.
pub fn majorant_ratios(
    q: &WeightSequence,
    alpha: f64,
    n_max: u64,
    resolution: u32,
) -> Result<Vec<MajorantRow>> {
    if n_max == 0 || n_max > 1u64 << resolution {
        return Err(DslabError::resolution(
            "majorant sweep",
            bit_length(n_max.max(1))? + 1,
            resolution,
        ));
    }
    let top = bit_length(n_max)?;
    let fejer: Vec<Vec<f64>> = (0..=top)
        .map(|j| fejer_kernel::<f64>(1 << j, SystemId::WalshPaley, resolution).map(|k| k.data.into_values()))
        .collect::<Result<_>>()?;
    // partial majorants Σ_{j ≤ J} 2^{jα} K_{2^j}
    let mut majorants: Vec<Vec<f64>> = vec![];
    let mut acc = vec![0.0f64; 1usize << resolution];
    for (j, k) in fejer.iter().enumerate() {
        let scale = (j as f64 * alpha).exp2();
        for (a, v) in acc.iter_mut().zip(k) {
            *a += scale * v;
        }
        majorants.push(acc.clone());
    }
    let mut rows: Vec<MajorantRow> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let f = norlund_kernel::<f64>(n, q, SystemId::WalshPaley, resolution)?;
            let major = &majorants[bit_length(n)? as usize];
            let norm = (n as f64).powf(-alpha);
            let mut ratio = 0.0f64;
            let mut zero = 0u64;
            for (v, m) in f.values().iter().zip(major) {
                let den = norm * m;
                if den <= 0.0 {
                    zero += 1;
                    continue;
                }
                ratio = ratio.max(v.abs() / den);
            }
            Ok(MajorantRow {
                n,
                ratio,
                running_max: 0.0,
                zero_denominator_cells: zero,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0.0f64;
    for r in &mut rows {
        best = best.max(r.ratio);
        r.running_max = best;
    }
    Ok(rows)
}

/// Running maximum at the midpoint and at the end of the grid.
pub fn stabilisation(rows: &[MajorantRow]) -> (f64, f64) {
    let mid = rows[(rows.len() / 2).saturating_sub(1)].running_max;
    let end = rows.last().expect("non-empty").running_max;
    (mid, end)
}

/// Sweeps `n ≤ n_max` and reports the empirical constant `c_emp(α)`.
///
/// Passes iff the running maximum changes by less than
/// [`STABILITY_TOLERANCE`] (relative) over the top half of the grid. When
/// the weights fail the non-increasing or power-type preconditions the
/// verdict is inconclusive.
pub fn verify_majorant(
    q: &WeightSequence,
    alpha: &BigRational,
    n_max: u64,
    resolution: u32,
) -> Result<ExperimentReport> {
    let a = rational_to_f64(alpha);
    if !(a > 0.0 && a < 1.0) {
        return Err(DslabError::domain("the majorant needs 0 < α < 1"));
    }
    let rows = majorant_ratios(q, a, n_max, resolution)?;
    let mut report = ExperimentReport::new(
        "lemma3",
        vec![
            Column::exact("n"),
            Column::float("ratio"),
            Column::float("running_max"),
            Column::exact("zero_denominator_cells"),
        ],
    )
    .param("weights", q.label())
    .param("alpha", format_rational(alpha))
    .param("n_max", n_max)
    .param("resolution", resolution)
    .param("system", SystemId::WalshPaley);
    for r in &rows {
        report.push_row(vec![
            r.n.to_string(),
            float_cell(r.ratio),
            float_cell(r.running_max),
            r.zero_denominator_cells.to_string(),
        ]);
    }
    let (mid, end) = stabilisation(&rows);
    let change = if mid > 0.0 { (end - mid) / mid } else { f64::INFINITY };
    let zeros: u64 = rows.iter().map(|r| r.zero_denominator_cells).sum();
    report.stat("c_emp", end);
    report.stat("running_max_mid", mid);
    report.stat("relative_change_top_half", change);
    report.stat("zero_denominator_cells", zeros);
    report.note("boundedness is judged empirically by stabilisation of the running maximum");

    let mut preconditions = q.monotonicity().non_increasing;
    if !preconditions {
        report.note("weights are not declared non-increasing");
    }
    let grid = n_max.max(8).next_power_of_two();
    for cond in [
        Condition::PowerMass { alpha: alpha.clone() },
        Condition::PowerDecrement { alpha: alpha.clone() },
    ] {
        let c = check_condition(q, &cond, grid)?;
        if c.verdict != ConditionVerdict::HoldsEmpirically {
            preconditions = false;
            report.note(format!("precondition {} is {}", cond.id(), c.verdict));
        }
    }
    report.verdict = if !preconditions {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(change < STABILITY_TOLERANCE)
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    #[test]
    fn small_sweep_is_finite_and_monotone() {
        let q = WeightSequence::preset("cesaro:1/2").unwrap();
        let rows = majorant_ratios(&q, 0.5, 64, 8).unwrap();
        assert_eq!(rows.len(), 64);
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        assert!(rows.windows(2).all(|w| w[1].running_max >= w[0].running_max));
        assert!(rows.iter().all(|r| r.zero_denominator_cells == 0));
    }

    #[test]
    fn dyadic_indices_have_finite_ratio() {
        let q = WeightSequence::preset("cesaro:1/2").unwrap();
        let rows = majorant_ratios(&q, 0.5, 32, 7).unwrap();
        for j in 0..=5 {
            let r = rows[(1usize << j) - 1];
            assert!(r.ratio.is_finite());
        }
    }

    #[test]
    fn smaller_grids_give_smaller_constants() {
        let q = WeightSequence::preset("cesaro:1/2").unwrap();
        let big = majorant_ratios(&q, 0.5, 64, 8).unwrap();
        let small = majorant_ratios(&q, 0.5, 32, 8).unwrap();
        assert!(small.last().unwrap().running_max <= big.last().unwrap().running_max);
        for (a, b) in small.iter().zip(&big) {
            assert_eq!(a.ratio, b.ratio);
        }
    }

    #[test]
    fn increasing_weights_are_inconclusive() {
        let q = WeightSequence::preset("cesaro:3/2").unwrap();
        let r = verify_majorant(&q, &half(), 32, 7).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn bad_parameters() {
        let q = WeightSequence::constant();
        assert!(verify_majorant(&q, &BigRational::from_integer(1.into()), 16, 6).is_err());
        assert!(verify_majorant(&q, &half(), 128, 6).is_err());
    }
}
