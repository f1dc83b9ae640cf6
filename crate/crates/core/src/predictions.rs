//! Predictions TSV (`sentence_id`, `pred_label`, `score`) shared with the
//! external trainer, and alignment of predictions to a gold split by id.

use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::{Label, LabeledSentence};

pub const PREDICTIONS_HEADER: &str = "sentence_id\tpred_label\tscore";

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub sentence_id: String,
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictionsError {
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    UnknownLabel { line: usize, source: crate::corpus::UnknownLabel },
    #[error("line {line}: score {raw:?} is not a number in [0, 1]")]
    BadScore { line: usize, raw: String },
    #[error("line {line}: duplicate sentence id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("no prediction for gold sentence {0:?}")]
    MissingPrediction(String),
    #[error("prediction for unknown sentence {0:?}")]
    UnknownSentence(String),
}

pub fn write_predictions(rows: &[PredictionRow]) -> String {
    let mut out = String::from(PREDICTIONS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{}\t{}\t{}\n", row.sentence_id, row.label, row.score));
    }
    out
}

/// Header line is optional.
pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRow>, PredictionsError> {
    let mut rows = Vec::new();
    let mut seen = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || (line == 1 && raw == PREDICTIONS_HEADER) {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 {
            return Err(PredictionsError::ColumnCount { line, found: cols.len() });
        }
        let label = cols[1].trim().parse::<Label>().map_err(|source| PredictionsError::UnknownLabel { line, source })?;
        let score = cols[2]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|s| (0.0..=1.0).contains(s))
            .ok_or_else(|| PredictionsError::BadScore { line, raw: cols[2].to_string() })?;
        let id = cols[0].trim().to_string();
        if seen.insert(id.clone(), line).is_some() {
            return Err(PredictionsError::DuplicateId { line, id });
        }
        rows.push(PredictionRow { sentence_id: id, label, score });
    }
    Ok(rows)
}

/// Returns (preds, golds) in gold order. Every gold id needs exactly one
/// prediction and no prediction may name an id outside the gold split.
pub fn align_to_gold(
    predictions: &[PredictionRow],
    gold: &[LabeledSentence],
) -> Result<(Vec<Label>, Vec<Label>), PredictionsError> {
    let by_id: HashMap<&str, Label> = predictions.iter().map(|p| (p.sentence_id.as_str(), p.label)).collect();
    let mut preds = Vec::with_capacity(gold.len());
    let mut golds = Vec::with_capacity(gold.len());
    for row in gold {
        let label = by_id
            .get(row.sentence_id.as_str())
            .ok_or_else(|| PredictionsError::MissingPrediction(row.sentence_id.clone()))?;
        preds.push(*label);
        golds.push(row.label);
    }
    if predictions.len() != gold.len() {
        let gold_ids: std::collections::HashSet<&str> = gold.iter().map(|g| g.sentence_id.as_str()).collect();
        if let Some(extra) = predictions.iter().find(|p| !gold_ids.contains(p.sentence_id.as_str())) {
            return Err(PredictionsError::UnknownSentence(extra.sentence_id.clone()));
        }
    }
    Ok((preds, golds))
}
