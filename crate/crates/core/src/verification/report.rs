//! Tabular experiment reports with CSV and JSON serialisation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Outcome of an experiment. Verdicts on finite data are empirical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Worst of two verdicts: any failure fails, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }

    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Process exit status: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    /// Float columns are tagged `name[float]` in the CSV header.
    pub float: bool,
}

impl Column {
    pub fn exact(name: &str) -> Self {
        Column {
            name: name.to_string(),
            float: false,
        }
    }

    pub fn float(name: &str) -> Self {
        Column {
            name: name.to_string(),
            float: true,
        }
    }
}

/// Formats a float for CSV: shortest round-trip representation.
pub fn float_cell(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
    pub verdict: Verdict,
    pub summary: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    experiment: &'a str,
    params: &'a BTreeMap<String, String>,
    verdict: Verdict,
    summary_stats: &'a BTreeMap<String, Value>,
    notes: &'a [String],
}

impl ExperimentReport {
    pub fn new(experiment: &str, columns: Vec<Column>) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            columns,
            rows: vec![],
            verdict: Verdict::Inconclusive,
            summary: BTreeMap::new(),
            notes: vec![],
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn stat(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Cells of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// CSV with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| {
                if c.float {
                    format!("{}[float]", c.name)
                } else {
                    c.name.clone()
                }
            })
            .collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// `{experiment, params, verdict, summary_stats, notes}`.
    pub fn to_json(&self) -> String {
        let summary = JsonSummary {
            experiment: &self.experiment,
            params: &self.params,
            verdict: self.verdict,
            summary_stats: &self.summary,
            notes: &self.notes,
        };
        let mut s = serde_json::to_string_pretty(&summary).expect("report serialises");
        s.push('\n');
        s
    }

    /// Writes the CSV to `path` and the JSON summary next to it with a
    /// `.json` extension. Returns the JSON path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, self.to_csv())?;
        let json = path.with_extension("json");
        std::fs::write(&json, self.to_json())?;
        Ok(json)
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Concatenates reports of the same shape under a new name, prefixing each
/// row with its source experiment.
pub fn bundle(experiment: &str, parts: &[ExperimentReport]) -> ExperimentReport {
    let mut columns = vec![Column::exact("part")];
    let mut names: Vec<Column> = vec![];
    for p in parts {
        for c in &p.columns {
            match names.iter_mut().find(|n| n.name == c.name) {
                Some(existing) => existing.float |= c.float,
                None => names.push(c.clone()),
            }
        }
    }
    columns.extend(names.iter().cloned());
    let mut out = ExperimentReport::new(experiment, columns);
    let mut verdict = Verdict::Pass;
    for p in parts {
        for row in &p.rows {
            let mut cells = vec![p.experiment.clone()];
            for c in &names {
                cells.push(match p.column_index(&c.name) {
                    Some(i) => row[i].clone(),
                    None => String::new(),
                });
            }
            out.push_row(cells);
        }
        verdict = verdict.and(p.verdict);
        out.summary.insert(format!("{}.verdict", p.experiment), Value::from(p.verdict.to_string()));
        for (k, v) in &p.summary {
            out.summary.insert(format!("{}.{k}", p.experiment), v.clone());
        }
        for (k, v) in &p.params {
            out.params.insert(format!("{}.{k}", p.experiment), v.clone());
        }
        for n in &p.notes {
            out.notes.push(format!("{}: {n}", p.experiment));
        }
    }
    out.verdict = verdict;
    out
}
