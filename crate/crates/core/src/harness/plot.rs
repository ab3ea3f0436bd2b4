use serde::{Deserialize, Serialize};

use super::experiment::AggregateReport;
use super::HarnessError;
use crate::fitness::format_percent;

/// One bar of the accuracy chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub dataset: String,
    pub optimizer: String,
    /// Two-decimal fixed format, rounded half-up.
    pub mean_accuracy: String,
}

pub fn plot_rows(reports: &[AggregateReport]) -> Vec<PlotRow> {
    reports
        .iter()
        .map(|r| PlotRow {
            dataset: r.dataset.clone(),
            optimizer: r.optimizer.name().to_string(),
            mean_accuracy: format_percent(r.mean_accuracy),
        })
        .collect()
}

/// CSV with header `dataset,optimizer,mean_accuracy`.
pub fn write_plot_data(reports: &[AggregateReport]) -> Result<String, HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::Output {
        path: "plot data".into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in plot_rows(reports) {
        w.serialize(row).map_err(|e| err(&e))?;
    }
    if reports.is_empty() {
        w.write_record(["dataset", "optimizer", "mean_accuracy"])
            .map_err(|e| err(&e))?;
    }
    let bytes = w.into_inner().map_err(|e| err(&e))?;
    String::from_utf8(bytes).map_err(|e| err(&e))
}

pub fn parse_plot_data(text: &str) -> Result<Vec<PlotRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| {
            row.map_err(|e| HarnessError::Output {
                path: "plot data".into(),
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::compare::tests::report;
    use crate::harness::OptimizerKind;

    #[test]
    fn table_counts_become_rows() {
        let reports = vec![
            report("thyroid", OptimizerKind::Codoa, &[(939, 33)]),
            report("hepatitis", OptimizerKind::Codoa, &[(49, 6)]),
            report("ckd", OptimizerKind::Codoa, &[(91, 14)]),
        ];
        let text = write_plot_data(&reports).unwrap();
        assert_eq!(
            text,
            "dataset,optimizer,mean_accuracy\nthyroid,codoa,96.60\nhepatitis,codoa,89.09\nckd,codoa,86.67\n"
        );
        let back = parse_plot_data(&text).unwrap();
        assert_eq!(back, plot_rows(&reports));
        for (row, r) in back.iter().zip(&reports) {
            assert_eq!(row.mean_accuracy, format_percent(r.mean_accuracy));
            let v: f64 = row.mean_accuracy.parse().unwrap();
            assert!((v - r.mean_accuracy).abs() <= 0.005 + 1e-9);
        }
    }

    #[test]
    fn one_report_one_row() {
        let text = write_plot_data(&[report("x", OptimizerKind::Pso, &[(3, 1)])]).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_plot_data(&text).unwrap()[0].mean_accuracy, "75.00");
    }
}
