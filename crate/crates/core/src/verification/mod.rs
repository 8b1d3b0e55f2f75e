//! Experiments that check kernel identities and reproduce the
//! counterexample arithmetic, reported as CSV/JSON tables.

pub mod blowup;
pub mod convergence;
pub mod decomposition;
pub mod majorant;
pub mod preset_suite;
pub mod report;

pub use blowup::{monotone_blowup, norlund_log_blowup, power_blowup, PowerBlowupPart};
pub use convergence::convergence_experiment;
pub use decomposition::verify_decomposition;
pub use majorant::verify_majorant;
pub use preset_suite::preset_blowup_suite;
pub use report::{bundle, Column, ExperimentReport, Verdict};

use crate::weights::{ConditionReport, ConditionVerdict};

impl From<ConditionVerdict> for Verdict {
    fn from(v: ConditionVerdict) -> Self {
        match v {
            ConditionVerdict::HoldsEmpirically => Verdict::Pass,
            ConditionVerdict::FailsAt(_) => Verdict::Fail,
            ConditionVerdict::Inconclusive => Verdict::Inconclusive,
        }
    }
}

/// Tabulates a condition check: one row per grid point.
pub fn condition_report(c: &ConditionReport) -> ExperimentReport {
    let mut columns = vec![Column::exact("n"), Column::float("witness")];
    if !c.secondary.is_empty() {
        columns.push(Column::float("secondary_witness"));
    }
    let mut report = ExperimentReport::new("conditions", columns)
        .param("condition", c.condition.id())
        .param("weights", &c.weights);
    if let Some(alpha) = c.condition.alpha() {
        report = report.param("alpha", crate::scalar::format_rational(alpha));
    }
    for (i, (n, w)) in c.witnesses.iter().enumerate() {
        let mut row = vec![n.to_string(), report::float_cell(*w)];
        if !c.secondary.is_empty() {
            row.push(c.secondary.get(i).map(|s| report::float_cell(s.1)).unwrap_or_default());
        }
        report.push_row(row);
    }
    report.stat("condition_verdict", c.verdict.to_string());
    if let Some(inf) = c.infimum {
        report.stat("infimum", inf);
    }
    for n in &c.notes {
        report.note(n.clone());
    }
    report.verdict = c.verdict.into();
    report
}
