//! Second-stage self-correction of generated paraphrases.
//!
//! Every generated record is sent back to the model with its intended label
//! and style. The model either returns the sentence unchanged or rewrites it.
//! Rewrites longer than [`MAX_WORDS`] tokens get one terse-rewrite retry and
//! are flagged if still too long.

use futures::StreamExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{style_slot, ParaphraseRecord, Stage};
use crate::gateway::{normalize_text, ChatRequest, Gateway, GatewayError};
use crate::template;

pub const CORRECTION_TEMPLATE: &str = include_str!("../templates/correction.txt");

pub const MAX_WORDS: usize = 25;

/// Appended to the correction prompt for the single length retry.
pub const LENGTH_RETRY_SUFFIX: &str =
    "\n\nYour previous response was longer than 25 words. Rewrite the sentence in under 25 words.\n\nResponse:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    TooLong,
    EmptyOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionOutcome {
    pub record: ParaphraseRecord,
    pub changed: bool,
    pub violation: Option<Violation>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionStats {
    pub total: usize,
    pub changed_count: usize,
    pub flagged_count: usize,
    pub failed_count: usize,
}

#[derive(Debug, Clone)]
pub struct CorrectionSettings {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for CorrectionSettings {
    fn default() -> Self {
        Self {
            model_name: "gpt-4o".into(),
            temperature: 0.0,
            max_output_tokens: 96,
        }
    }
}

#[derive(Debug, Error)]
pub enum CorrectError {
    #[error("record {synthetic_id} is not at the generated stage")]
    NotGenerated { synthetic_id: String },
    #[error("correction of {synthetic_id} failed: {source}")]
    Gateway {
        synthetic_id: String,
        #[source]
        source: GatewayError,
    },
}

/// Whitespace-delimited token count of the normalized text. Punctuation
/// stays attached to its word.
pub fn word_count(text: &str) -> usize {
    let normalized = normalize_text(text);
    if normalized.is_empty() {
        0
    } else {
        normalized.split(' ').count()
    }
}

pub fn build_correction_prompt(record: &ParaphraseRecord) -> String {
    template::render(
        CORRECTION_TEMPLATE,
        &[
            ("label", record.label.as_str()),
            ("style", style_slot(record.style)),
            ("sentence", record.text.as_str()),
        ],
    )
}

pub async fn correct_record(
    record: &ParaphraseRecord,
    gateway: &Gateway,
    settings: &CorrectionSettings,
) -> Result<CorrectionOutcome, CorrectError> {
    if record.stage != Stage::Generated {
        return Err(CorrectError::NotGenerated {
            synthetic_id: record.synthetic_id.clone(),
        });
    }
    let wrap = |source| CorrectError::Gateway {
        synthetic_id: record.synthetic_id.clone(),
        source,
    };
    let prompt = build_correction_prompt(record);
    let ask = |user_text: String| {
        let request = ChatRequest {
            model_name: settings.model_name.clone(),
            system_text: None,
            user_text,
            temperature: settings.temperature,
            max_output_tokens: settings.max_output_tokens,
        };
        async move { gateway.complete(&request).await.map(|r| r.text) }
    };

    let first = match ask(prompt.clone()).await {
        Err(GatewayError::EmptyCompletion) => match ask(prompt.clone()).await {
            Err(GatewayError::EmptyCompletion) => {
                return Ok(finish(record, record.text.clone(), Some(Violation::EmptyOutput)));
            }
            other => other.map_err(wrap)?,
        },
        other => other.map_err(wrap)?,
    };
    if word_count(&first) <= MAX_WORDS {
        return Ok(finish(record, first, None));
    }

    let retry = match ask(format!("{prompt}{LENGTH_RETRY_SUFFIX}")).await {
        Ok(text) => Some(text),
        Err(GatewayError::EmptyCompletion) => None,
        Err(other) => return Err(wrap(other)),
    };
    Ok(match retry {
        Some(second) if word_count(&second) <= MAX_WORDS => finish(record, second, None),
        Some(second) if word_count(&second) < word_count(&first) => {
            finish(record, second, Some(Violation::TooLong))
        }
        _ => finish(record, first, Some(Violation::TooLong)),
    })
}

fn finish(record: &ParaphraseRecord, text: String, violation: Option<Violation>) -> CorrectionOutcome {
    let text = normalize_text(&text);
    let changed = text != normalize_text(&record.text);
    CorrectionOutcome {
        record: ParaphraseRecord {
            text,
            stage: Stage::Corrected,
            changed_by_correction: changed,
            ..record.clone()
        },
        changed,
        violation,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFailure {
    pub synthetic_id: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct CorrectionRun {
    /// Same ids and order as the input. Records whose correction failed are
    /// passed through unchanged at the generated stage.
    pub records: Vec<ParaphraseRecord>,
    pub stats: CorrectionStats,
    pub flagged: Vec<(String, Violation)>,
    pub failures: Vec<RecordFailure>,
}

/// Corrects every record, continuing past individual failures.
pub async fn correct_dataset(
    records: &[ParaphraseRecord],
    gateway: &Gateway,
    settings: &CorrectionSettings,
) -> Result<CorrectionRun, CorrectError> {
    if let Some(bad) = records.iter().find(|r| r.stage != Stage::Generated) {
        return Err(CorrectError::NotGenerated {
            synthetic_id: bad.synthetic_id.clone(),
        });
    }
    let results: Vec<_> = futures::stream::iter(records)
        .map(|record| correct_record(record, gateway, settings))
        .buffered(gateway.max_in_flight())
        .collect()
        .await;

    let mut run = CorrectionRun {
        records: Vec::with_capacity(records.len()),
        stats: CorrectionStats {
            total: records.len(),
            ..CorrectionStats::default()
        },
        flagged: Vec::new(),
        failures: Vec::new(),
    };
    for (original, result) in records.iter().zip(results) {
        match result {
            Ok(outcome) => {
                if outcome.changed {
                    run.stats.changed_count += 1;
                }
                if let Some(violation) = outcome.violation {
                    run.stats.flagged_count += 1;
                    run.flagged.push((outcome.record.synthetic_id.clone(), violation));
                }
                run.records.push(outcome.record);
            }
            Err(err) => {
                run.stats.failed_count += 1;
                run.failures.push(RecordFailure {
                    synthetic_id: original.synthetic_id.clone(),
                    error: err.to_string(),
                });
                run.records.push(original.clone());
            }
        }
    }
    Ok(run)
}
