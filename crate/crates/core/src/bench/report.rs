use std::fmt::Write as _;
use std::str::FromStr;

use super::config::ModelKind;
use super::run::{ExperimentReport, ModelStats};
use crate::error::{Error, Result};

/// Column header of the CSV report.
pub const CSV_HEADER: &str = "model,mean_test_mse,std_test_mse,train_mse,storage_scalars,mean_query_us";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "table" | "text" => Ok(ReportFormat::Table),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => csv(report),
        ReportFormat::Table => table(report),
    }
}

fn query_us(m: &ModelStats) -> String {
    m.mean_query_us.map_or_else(|| "nan".to_string(), |us| format!("{us:.3}"))
}

fn csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for m in &report.models {
        let _ = writeln!(
            out,
            "{},{:.6e},{:.6e},{:.6e},{},{}",
            m.model,
            m.mean_test_mse,
            m.std_test_mse,
            m.mean_train_mse,
            m.storage_scalars,
            query_us(m)
        );
    }
    out
}

fn parameters(report: &ExperimentReport, m: &ModelStats) -> String {
    let cfg = &report.config;
    let kernel = format!("sigma={}, eta={}", cfg.kernel.sigma, cfg.kernel.eta);
    let eps = m.mean_epsilon.map(|e| format!("eps={e:.4}")).unwrap_or_default();
    match m.model {
        ModelKind::Ls => format!("delta={}", cfg.delta),
        ModelKind::Knn | ModelKind::Aslm => "K=1".to_string(),
        ModelKind::Qaslm => format!("K=1, {eps}"),
        ModelKind::Klms => kernel,
        ModelKind::KlmsAm => format!("{kernel}, K=1"),
        ModelKind::Qklms => format!("{kernel}, {eps}"),
        ModelKind::KlmsQam => format!("{kernel}, K=1, {eps}"),
    }
}

fn table(report: &ExperimentReport) -> String {
    let header = [
        "Algorithm",
        "Testing MSE (mean ± std)",
        "Training MSE",
        "Storage",
        "Table",
        "Query (us)",
        "Parameter",
    ];
    let rows: Vec<[String; 7]> = report
        .models
        .iter()
        .map(|m| {
            [
                m.model.to_string(),
                format!("{:.2e} ± {:.2e}", m.mean_test_mse, m.std_test_mse),
                format!("{:.2e}", m.mean_train_mse),
                m.storage_scalars.to_string(),
                m.mean_table_size.map_or_else(|| "-".to_string(), |n| format!("{n:.0}")),
                query_us(m),
                parameters(report, m),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            let pad = w - cell.chars().count();
            s.push_str(cell);
            s.extend(std::iter::repeat(' ').take(pad));
        }
        s.trim_end().to_string()
    };
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    out.push_str(&line(&head));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&line(&rule).replace(" | ", "-+-"));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    let _ = writeln!(out, "runs: {}, ± is the sample std-dev across runs", report.run_count);
    out
}
