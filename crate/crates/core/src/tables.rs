//! Consistency audit of published results tables: does each reported macro-F1
//! equal the mean of the two class F1s it is printed next to?

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{check_row_consistency, fmt2, Consistency};

pub const BUNDLED_TABLES: &str = include_str!("../fixtures/reported_tables.toml");

pub const ORIGINAL_TRAIN: &str = "original-train";
pub const AUGMENTED_TRAIN: &str = "augmented-train";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedRow {
    pub table: String,
    pub model: String,
    pub dataset: String,
    pub split: String,
    pub f1_obj: f64,
    pub f1_subj: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    rows: Vec<ReportedRow>,
}

#[derive(Debug, Error)]
#[error("results table fixture: {0}")]
pub struct TableError(String);

pub fn parse_tables(text: &str) -> Result<Vec<ReportedRow>, TableError> {
    let file: TableFile = toml::from_str(text).map_err(|e| TableError(e.to_string()))?;
    for row in &file.rows {
        for v in [row.f1_obj, row.f1_subj, row.macro_f1] {
            if !(0.0..=1.0).contains(&v) {
                return Err(TableError(format!("{} / {}: value {v} outside [0, 1]", row.model, row.dataset)));
            }
        }
    }
    Ok(file.rows)
}

pub fn bundled_rows() -> Vec<ReportedRow> {
    parse_tables(BUNDLED_TABLES).expect("bundled results tables parse")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub row: ReportedRow,
    pub result: Consistency,
}

pub fn audit(rows: &[ReportedRow], tol: f64) -> Vec<AuditEntry> {
    rows.iter()
        .map(|row| AuditEntry {
            result: check_row_consistency(row.f1_obj, row.f1_subj, row.macro_f1, tol),
            row: row.clone(),
        })
        .collect()
}

pub fn render_audit(entries: &[AuditEntry], tol: f64) -> String {
    let mut out = String::new();
    let mut current = "";
    for entry in entries {
        if entry.row.table != current {
            current = &entry.row.table;
            let _ = writeln!(out, "[{current}]");
        }
        let verdict = match entry.result {
            Consistency::Consistent => "consistent".to_string(),
            Consistency::Inconsistent { expected } => format!("INCONSISTENT (expected {expected:.3})"),
        };
        let _ = writeln!(
            out,
            "  {:<36} {:<20} {:<10} obj {} subj {} macro {}  {}",
            entry.row.model,
            entry.row.dataset,
            entry.row.split,
            fmt2(entry.row.f1_obj),
            fmt2(entry.row.f1_subj),
            fmt2(entry.row.macro_f1),
            verdict
        );
    }
    let flagged = entries.iter().filter(|e| !e.result.is_consistent()).count();
    let _ = writeln!(out, "{flagged} of {} rows inconsistent at tolerance {tol}", entries.len());
    out
}
