use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::experiment::AggregateReport;
use super::HarnessError;
use crate::fitness::{format_percent, round_half_up};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub optimizer: String,
    pub runs: usize,
    pub mean_true_diagnosis: f64,
    pub mean_false_diagnosis: f64,
    pub mean_accuracy: f64,
    pub best_true_diagnosis: bool,
    pub best_false_diagnosis: bool,
    pub best_accuracy: bool,
}

/// Mean TD, FD and accuracy per optimizer on one dataset. A column's best
/// value (highest TD and accuracy, lowest FD, compared at two decimals) is
/// marked on every row that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub dataset: String,
    pub rows: Vec<ComparisonRow>,
}

pub fn compare(reports: &[AggregateReport]) -> Result<Comparison, HarnessError> {
    if reports.len() < 2 {
        return Err(HarnessError::Compare(format!(
            "need at least two reports, got {}",
            reports.len()
        )));
    }
    let first = &reports[0];
    for r in &reports[1..] {
        if r.dataset != first.dataset {
            return Err(HarnessError::Compare(format!(
                "datasets differ: {} vs {}",
                first.dataset, r.dataset
            )));
        }
        if r.records.len() != first.records.len() {
            return Err(HarnessError::Compare(format!(
                "run counts differ: {} vs {}",
                first.records.len(),
                r.records.len()
            )));
        }
    }
    let shown = |v: f64| round_half_up(v, 2);
    let best_td = reports
        .iter()
        .map(|r| shown(r.mean_true_diagnosis))
        .fold(f64::NEG_INFINITY, f64::max);
    let best_fd = reports
        .iter()
        .map(|r| shown(r.mean_false_diagnosis))
        .fold(f64::INFINITY, f64::min);
    let best_acc = reports
        .iter()
        .map(|r| shown(r.mean_accuracy))
        .fold(f64::NEG_INFINITY, f64::max);
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            optimizer: r.optimizer.name().to_string(),
            runs: r.records.len(),
            mean_true_diagnosis: r.mean_true_diagnosis,
            mean_false_diagnosis: r.mean_false_diagnosis,
            mean_accuracy: r.mean_accuracy,
            best_true_diagnosis: shown(r.mean_true_diagnosis) == best_td,
            best_false_diagnosis: shown(r.mean_false_diagnosis) == best_fd,
            best_accuracy: shown(r.mean_accuracy) == best_acc,
        })
        .collect();
    Ok(Comparison {
        dataset: first.dataset.clone(),
        rows,
    })
}

fn mark(v: String, best: bool) -> String {
    if best {
        format!("{v}*")
    } else {
        v
    }
}

impl Comparison {
    /// Fixed-width table; `*` marks the best value of each column.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset {}", self.dataset);
        let _ = writeln!(
            s,
            "{:<10} {:>5} {:>10} {:>10} {:>10}",
            "optimizer", "runs", "TD", "FD", "accuracy"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<10} {:>5} {:>10} {:>10} {:>10}",
                r.optimizer,
                r.runs,
                mark(
                    format!("{:.2}", round_half_up(r.mean_true_diagnosis, 2)),
                    r.best_true_diagnosis
                ),
                mark(
                    format!("{:.2}", round_half_up(r.mean_false_diagnosis, 2)),
                    r.best_false_diagnosis
                ),
                mark(format_percent(r.mean_accuracy), r.best_accuracy),
            );
        }
        let _ = writeln!(s, "* best value in column");
        s
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let err = |e: &dyn std::fmt::Display| HarnessError::Output {
            path: "comparison.csv".into(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "dataset",
            "optimizer",
            "runs",
            "mean_true_diagnosis",
            "mean_false_diagnosis",
            "mean_accuracy",
            "best_true_diagnosis",
            "best_false_diagnosis",
            "best_accuracy",
        ])
        .map_err(|e| err(&e))?;
        for r in &self.rows {
            w.write_record([
                self.dataset.clone(),
                r.optimizer.clone(),
                r.runs.to_string(),
                r.mean_true_diagnosis.to_string(),
                r.mean_false_diagnosis.to_string(),
                r.mean_accuracy.to_string(),
                r.best_true_diagnosis.to_string(),
                r.best_false_diagnosis.to_string(),
                r.best_accuracy.to_string(),
            ])
            .map_err(|e| err(&e))?;
        }
        let bytes = w.into_inner().map_err(|e| err(&e))?;
        String::from_utf8(bytes).map_err(|e| err(&e))
    }
}
