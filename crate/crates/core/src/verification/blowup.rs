//! Blow-up ratios `‖mean f_n‖_{L_{p,∞}} / ‖f_n‖_{H_p}` for the family
//! `f_n = D_{2^{n+1}}^κ - D_{2^n}^κ`, computed in closed form and through
//! the full pipeline.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use super::report::{float_cell, Column, ExperimentReport, Verdict};
use crate::analysis::{hardy_norm, weak_lp_norm, NormValue};
use crate::error::{DslabError, Result};
use crate::kernels::dirichlet_kernel;
use crate::means::{apply_mean, MeanId, MeanKind};
use crate::scalar::{approx_eq, NumericMode, format_rational, rational_to_f64, Radical, Scalar};
use crate::systems::SystemId;
use crate::transforms::SampledFunction;
use crate::weights::{check_condition, Condition, ConditionVerdict, WeightRepr, WeightSequence};

/// Largest `n` for which the pipeline runs in exact mode (resolution `n+2`).
pub const EXACT_PIPELINE_MAX_N: u32 = 10;
/// Largest `n` for which the pipeline runs in float mode.
pub const FLOAT_PIPELINE_MAX_N: u32 = 16;

/// `f_n = D_{2^{n+1}}^κ - D_{2^n}^κ` at resolution `n + 2`.
pub fn dirichlet_difference<S: Scalar>(n: u32) -> Result<SampledFunction<S>> {
    let resolution = n + 2;
    let big = dirichlet_kernel::<S>(1 << (n + 1), SystemId::WalshKaczmarz, resolution)?;
    let small = dirichlet_kernel::<S>(1 << n, SystemId::WalshKaczmarz, resolution)?;
    big.data.sub(&small.data)
}

/// `‖f_n‖_{H_p} = 2^{n(1-1/p)}`.
pub fn hardy_closed_form(n: u32, p: &BigRational) -> Radical {
    Radical::pow2(&(BigRational::from_integer(BigInt::from(n)) * (BigRational::one() - p.recip())))
}

/// `H_m = Σ_{k=1}^m 1/k` in floats; asymptotic expansion for large `m`.
pub fn harmonic_f64(m: u64) -> f64 {
    if m <= 1 << 20 {
        return (1..=m).rev().map(|k| 1.0 / k as f64).sum();
    }
    let x = m as f64;
    x.ln() + 0.577_215_664_901_532_9 + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
}

/// One counterexample family: which mean, at which index, and the closed
/// form of `‖mean f_n‖_{L_{p,∞}}`.
struct Family<'a> {
    mean: MeanKind,
    index: fn(u32) -> u64,
    weak: Box<dyn Fn(u32) -> Result<NormValue> + Sync + 'a>,
    exact: bool,
}

fn norlund_family(q: &WeightSequence, mode: NumericMode) -> Result<Family<'_>> {
    let exact = match mode {
        NumericMode::Float => false,
        NumericMode::Exact if q.repr() == WeightRepr::Rational => true,
        NumericMode::Exact => {
            return Err(DslabError::mode(format!(
                "weights {} have no exact rational partial sums; use float mode",
                q.label()
            )))
        }
    };
    Ok(Family {
        mean: MeanKind::norlund(q.clone()),
        index: |n| (1u64 << n) + 1,
        weak: Box::new(move |n| {
            let idx = (1usize << n) + 1;
            if exact {
                let v = q.q_rational(0)? / q.big_q_rational(idx)?;
                Ok(NormValue::Exact(Radical::from_rational(v)?))
            } else {
                Ok(NormValue::Float(q.q_f64(0)? / q.big_q_f64(idx)?))
            }
        }),
        exact,
    })
}

fn norlund_log_family<'a>() -> Family<'a> {
    Family {
        mean: MeanKind::NorlundLog,
        // L_{2^n+1} f_n vanishes: the first nonzero partial sum meets q_0 = 0
        index: |n| (1u64 << n) + 2,
        weak: Box::new(|n| Ok(NormValue::Float(1.0 / harmonic_f64((1u64 << n) + 1)))),
        exact: false,
    }
}

#[derive(Debug, Clone)]
struct Row {
    n: u32,
    index: u64,
    weak: NormValue,
    hardy: NormValue,
    ratio: NormValue,
    pipeline: Option<Pipeline>,
}

#[derive(Debug, Clone)]
struct Pipeline {
    weak: NormValue,
    hardy: NormValue,
    constant_modulus: bool,
    agrees: bool,
}

fn norm_close(a: &NormValue, b: &NormValue) -> bool {
    match (a, b) {
        (NormValue::Exact(x), NormValue::Exact(y)) => x == y,
        _ => approx_eq(a.to_f64(), b.to_f64(), 1e-9),
    }
}

fn run_pipeline<S: Scalar>(
    mean: &MeanKind,
    index: u64,
    n: u32,
    p: &BigRational,
) -> Result<(NormValue, NormValue, bool)> {
    let f = dirichlet_difference::<S>(n)?;
    let t = apply_mean(&MeanId::new(mean.clone(), SystemId::WalshKaczmarz), index, &f)?;
    let first = t.values()[0].magnitude();
    let constant = t.values().iter().all(|v| v.magnitude().mode_eq(&first));
    Ok((weak_lp_norm(&t, p)?, hardy_norm(&f, p)?, constant))
}

fn compute_rows(family: &Family<'_>, p: &BigRational, n_list: &[u32]) -> Result<Vec<Row>> {
    let mut rows: Vec<Row> = n_list
        .par_iter()
        .map(|&n| {
            let index = (family.index)(n);
            let weak = (family.weak)(n)?;
            let hardy = if family.exact {
                NormValue::Exact(hardy_closed_form(n, p))
            } else {
                NormValue::Float(hardy_closed_form(n, p).to_f64())
            };
            let ratio = weak.ratio(&hardy)?;
            let cap = if family.exact { EXACT_PIPELINE_MAX_N } else { FLOAT_PIPELINE_MAX_N };
            let pipeline = if n <= cap {
                let (pw, ph, constant) = if family.exact {
                    run_pipeline::<BigRational>(&family.mean, index, n, p)?
                } else {
                    run_pipeline::<f64>(&family.mean, index, n, p)?
                };
                let agrees = norm_close(&pw, &weak) && norm_close(&ph, &hardy);
                Some(Pipeline {
                    weak: pw,
                    hardy: ph,
                    constant_modulus: constant,
                    agrees,
                })
            } else {
                None
            };
            Ok(Row {
                n,
                index,
                weak,
                hardy,
                ratio,
                pipeline,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

fn cell(v: &NormValue) -> String {
    match v {
        NormValue::Exact(r) => r.to_string(),
        NormValue::Float(f) => float_cell(*f),
    }
}

fn build_report(name: &str, exact: bool, rows: &[Row]) -> ExperimentReport {
    let col = |c: &str| if exact { Column::exact(c) } else { Column::float(c) };
    let mut report = ExperimentReport::new(
        name,
        vec![
            Column::exact("n"),
            Column::exact("index"),
            col("weak_norm"),
            col("hardy_norm"),
            col("ratio"),
            col("pipeline_weak_norm"),
            col("pipeline_hardy_norm"),
            Column::exact("constant_modulus"),
            Column::exact("pipeline_agrees"),
        ],
    );
    for r in rows {
        let (pw, ph, cm, ag) = match &r.pipeline {
            Some(p) => (cell(&p.weak), cell(&p.hardy), p.constant_modulus.to_string(), p.agrees.to_string()),
            None => (String::new(), String::new(), "skipped".into(), "skipped".into()),
        };
        report.push_row(vec![
            r.n.to_string(),
            r.index.to_string(),
            cell(&r.weak),
            cell(&r.hardy),
            cell(&r.ratio),
            pw,
            ph,
            cm,
            ag,
        ]);
    }
    if let Some(last) = rows.last() {
        report.stat("last_ratio", last.ratio.to_f64());
    }
    if let Some(first) = rows.first() {
        report.stat("first_ratio", first.ratio.to_f64());
    }
    report
}

fn strictly_increasing(rows: &[Row]) -> bool {
    rows.windows(2).all(|w| w[1].ratio > w[0].ratio)
}

fn pipeline_ok(rows: &[Row]) -> bool {
    rows.iter()
        .filter_map(|r| r.pipeline.as_ref())
        .all(|p| p.agrees && p.constant_modulus)
}

fn check_n_list(n_list: &[u32]) -> Result<Vec<u32>> {
    if n_list.len() < 2 {
        return Err(DslabError::domain("a blow-up run needs at least two values of n"));
    }
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted[0] == 0 || *sorted.last().unwrap() > 60 {
        return Err(DslabError::domain("blow-up runs take 1 ≤ n ≤ 60"));
    }
    Ok(sorted)
}

fn condition_grid(q: &WeightSequence) -> u64 {
    let cap = 1u64 << 12;
    match q.available() {
        Some(len) if (len as u64) < cap + 2 => {
            let usable = (len as u64).saturating_sub(2).max(1);
            1u64 << (63 - usable.leading_zeros())
        }
        _ => cap,
    }
}

fn note_condition(report: &mut ExperimentReport, q: &WeightSequence, cond: Condition) -> Result<()> {
    let grid = condition_grid(q);
    if grid < 8 {
        report.note(format!("{} not checked: too few weights", cond.id()));
        return Ok(());
    }
    let c = check_condition(q, &cond, grid)?;
    if c.verdict != ConditionVerdict::HoldsEmpirically {
        report.note(format!("hypothesis {} is {} on the grid up to {grid}", cond.id(), c.verdict));
    }
    report.stat(&format!("hypothesis.{}", cond.id()), c.verdict.to_string());
    Ok(())
}

/// Monotone-weight family: `t_{2^n+1}^κ f_n` with `‖·‖_{L_{p,∞}} = q_0/Q_{2^n+1}`
/// and `‖f_n‖_{H_p} = 2^{n(1-1/p)}`. Passes iff the ratio is strictly
/// increasing and every pipeline row matches the closed form.
///
/// Exact mode needs rational weights; float mode evaluates everything in
/// floating point.
pub fn monotone_blowup(
    q: &WeightSequence,
    p: &BigRational,
    n_list: &[u32],
    mode: NumericMode,
) -> Result<ExperimentReport> {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    if !p.is_positive() || *p >= half {
        return Err(DslabError::domain(format!(
            "p = {} must lie in (0, 1/2)",
            format_rational(p)
        )));
    }
    let n_list = check_n_list(n_list)?;
    let family = norlund_family(q, mode)?;
    let rows = compute_rows(&family, p, &n_list)?;
    let mut report = build_report("blowup2", family.exact, &rows)
        .param("weights", q.label())
        .param("p", format_rational(p))
        .param("n", join(&n_list))
        .param("system", SystemId::WalshKaczmarz)
        .param("mode", mode_label(family.exact));
    let mono = q.monotonicity();
    report.stat("monotonicity", mono.label());
    if !(mono.non_increasing || mono.non_decreasing) {
        report.note("weights are neither non-increasing nor non-decreasing");
    }
    let increasing = strictly_increasing(&rows);
    let pipeline = pipeline_ok(&rows);
    report.stat("strictly_increasing", increasing);
    report.stat("pipeline_agrees", pipeline);
    report.verdict = Verdict::from_bool(increasing && pipeline);
    Ok(report)
}

/// Whether `p` lies below or at the critical exponent `1/(1+α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerBlowupPart {
    /// `0 < p < 1/(1+α)` under a power-type lower bound on `q_0/Q_n`
    /// (`part_b` on the command line).
    BelowCritical,
    /// `p = 1/(1+α)` under `limsup q_0 n^α / Q_n = ∞` (`part_c`).
    AtCritical,
}

impl std::str::FromStr for PowerBlowupPart {
    type Err = DslabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "part_b" | "b" => Ok(PowerBlowupPart::BelowCritical),
            "part_c" | "c" => Ok(PowerBlowupPart::AtCritical),
            other => Err(DslabError::parse(format!("unknown part {other:?}"))),
        }
    }
}

impl std::fmt::Display for PowerBlowupPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PowerBlowupPart::BelowCritical => "part_b",
            PowerBlowupPart::AtCritical => "part_c",
        })
    }
}

/// Growth without saturation: strictly increasing, and the mean
/// log-increment over the later half is at least half that of the
/// earlier half.
pub fn grows_without_saturation(values: &[f64]) -> bool {
    if values.len() < 3 || values.iter().any(|v| v.is_nan() || *v <= 0.0) {
        return false;
    }
    if !values.windows(2).all(|w| w[1] > w[0]) {
        return false;
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    let mid = inc.len() / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (early, late) = (mean(&inc[..mid.max(1)]), mean(&inc[mid..]));
    late >= 0.5 * early
}

/// Power-type family: ratio `q_0 2^{n(1/p-1)} / Q_{2^n+1}`; at the critical exponent,
/// `p = 1/(1+α)` so the ratio is `q_0 2^{nα} / Q_{2^n+1}`.
pub fn power_blowup(
    q: &WeightSequence,
    alpha: &BigRational,
    p: Option<&BigRational>,
    n_list: &[u32],
    part: PowerBlowupPart,
    mode: NumericMode,
) -> Result<ExperimentReport> {
    if !alpha.is_positive() || *alpha > BigRational::one() {
        return Err(DslabError::domain("α must lie in (0, 1]"));
    }
    let critical = (BigRational::one() + alpha).recip();
    let p = match part {
        PowerBlowupPart::BelowCritical => {
            let p = p.ok_or_else(|| DslabError::domain("part b needs p"))?.clone();
            if !p.is_positive() || p >= critical {
                return Err(DslabError::domain(format!(
                    "part b needs 0 < p < {}",
                    format_rational(&critical)
                )));
            }
            p
        }
        PowerBlowupPart::AtCritical => {
            if let Some(given) = p {
                if *given != critical {
                    return Err(DslabError::domain(format!(
                        "part c runs at p = {}",
                        format_rational(&critical)
                    )));
                }
            }
            critical.clone()
        }
    };
    let n_list = check_n_list(n_list)?;
    let family = norlund_family(q, mode)?;
    let rows = compute_rows(&family, &p, &n_list)?;
    let mut report = build_report("blowup3", family.exact, &rows)
        .param("weights", q.label())
        .param("alpha", format_rational(alpha))
        .param("p", format_rational(&p))
        .param("part", part)
        .param("n", join(&n_list))
        .param("system", SystemId::WalshKaczmarz)
        .param("mode", mode_label(family.exact));
    let exponent = p.recip() - BigRational::one() - alpha;
    report.stat("exponent_1/p-1-alpha", format_rational(&exponent));
    match part {
        PowerBlowupPart::BelowCritical => note_condition(&mut report, q, Condition::PowerMassLower { alpha: alpha.clone() })?,
        PowerBlowupPart::AtCritical => {
            note_condition(&mut report, q, Condition::PowerMassUnbounded { alpha: alpha.clone() })?
        }
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.to_f64()).collect();
    let grows = strictly_increasing(&rows) && grows_without_saturation(&ratios);
    let pipeline = pipeline_ok(&rows);
    report.stat("grows_without_saturation", grows);
    report.stat("pipeline_agrees", pipeline);
    report.verdict = Verdict::from_bool(grows && pipeline);
    Ok(report)
}

/// Nörlund logarithmic family. `L_{2^n+1} f_n = 0` because `q_0 = 0`, so the
/// index `M = 2^n + 2` is used, where `|L_M f_n| ≡ 1/l_M`; the ratio is
/// `2^{n(1/p-1)} / l_{2^n+2}`.
///
/// Passes iff the ratio is strictly increasing over the later half of the
/// grid and ends above where it started.
pub fn norlund_log_blowup(p: &BigRational, n_list: &[u32]) -> Result<ExperimentReport> {
    if !p.is_positive() || *p >= BigRational::one() {
        return Err(DslabError::domain("p must lie in (0, 1)"));
    }
    let n_list = check_n_list(n_list)?;
    let family = norlund_log_family();
    let rows = compute_rows(&family, p, &n_list)?;
    let mut report = build_report("blowup_norlund_log", false, &rows)
        .param("mean", "norlund_log")
        .param("p", format_rational(p))
        .param("n", join(&n_list))
        .param("system", SystemId::WalshKaczmarz);
    report.note("q_0 = 0 for logarithmic weights: the mean is taken at index 2^n+2, where L f_n = κ_{2^n}/l");
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.to_f64()).collect();
    let late = &ratios[ratios.len() / 2..];
    let eventually = late.windows(2).all(|w| w[1] > w[0]);
    let net = ratios.last().unwrap() > ratios.first().unwrap();
    let pipeline = pipeline_ok(&rows);
    report.stat("eventually_increasing", eventually);
    report.stat("ends_above_start", net);
    report.stat("pipeline_agrees", pipeline);
    report.verdict = Verdict::from_bool(eventually && net && pipeline);
    Ok(report)
}

fn mode_label(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "float"
    }
}

fn join(n_list: &[u32]) -> String {
    n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

/// `q_k = 2^{-k}` for `k < len`: a sequence with bounded `Q_n`.
pub fn geometric_weights(len: usize) -> Result<WeightSequence> {
    let values = (0..len)
        .map(|k| BigRational::new(BigInt::one(), BigInt::one() << k))
        .collect();
    WeightSequence::custom(format!("geometric:{len}"), values)
}

/// Exact ratio for rational weights, for callers that need the number
/// rather than a report.
pub fn monotone_ratio_exact(q: &WeightSequence, p: &BigRational, n: u32) -> Result<Radical> {
    let idx = (1usize << n) + 1;
    let weak = Radical::from_rational(q.q_rational(0)? / q.big_q_rational(idx)?)?;
    weak.div(&hardy_closed_form(n, p))
}

/// `q_0 2^{n(1/p-1)} / Q_{2^n+1}` in floats, for any weights.
pub fn monotone_ratio_f64(q: &WeightSequence, p: &BigRational, n: u32) -> Result<f64> {
    let idx = (1usize << n) + 1;
    let e = rational_to_f64(&(p.recip() - BigRational::one())) * n as f64;
    Ok(q.q_f64(0)? * e.exp2() / q.big_q_f64(idx)?)
}
