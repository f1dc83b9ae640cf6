//! augment → (correct) → build, and the JSONL record files passed between
//! stages.

use thiserror::Error;

use crate::augment::{generate_paraphrases, AugmentError, GenerationSettings, ParaphraseRecord};
use crate::corpus::LabeledSentence;
use crate::correct::{correct_dataset, CorrectError, CorrectionRun, CorrectionSettings, CORRECTION_TEMPLATE};
use crate::dataset::{build_dataset, AugmentedDataset, DatasetError};
use crate::gateway::Gateway;
use crate::template::sha256_hex;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Correct(#[from] CorrectError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("records line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

pub fn write_records_jsonl(records: &[ParaphraseRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_records_jsonl(text: &str) -> Result<Vec<ParaphraseRecord>, PipelineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| PipelineError::Json { line: i + 1, source }))
        .collect()
}

/// Hash over every prompt template that shaped the synthetic rows.
pub fn template_hash(generation: &GenerationSettings, corrected: bool) -> String {
    if corrected {
        sha256_hex(&format!("{}\n\n{}", generation.template.as_str(), CORRECTION_TEMPLATE))
    } else {
        sha256_hex(generation.template.as_str())
    }
}

/// Generation and correction may run against different backends, e.g. two
/// mocks with different fallbacks.
#[derive(Debug, Clone, Copy)]
pub struct StageGateways<'a> {
    pub generation: &'a Gateway,
    pub correction: &'a Gateway,
}

impl<'a> StageGateways<'a> {
    pub fn single(gateway: &'a Gateway) -> Self {
        Self {
            generation: gateway,
            correction: gateway,
        }
    }

    /// `gen + corr` when the two stages used different backends.
    pub fn fingerprint(&self, corrected: bool) -> String {
        let g = self.generation.fingerprint();
        let c = self.correction.fingerprint();
        if !corrected || g == c {
            g
        } else {
            format!("{g} + {c}")
        }
    }
}

/// Fills the run-dependent manifest fields.
pub fn stamp_manifest(
    dataset: &mut AugmentedDataset,
    gateways: StageGateways<'_>,
    generation: &GenerationSettings,
    correction: Option<&CorrectionRun>,
) {
    let corrected = dataset.corrected;
    let m = &mut dataset.manifest;
    m.gateway_fingerprint = Some(gateways.fingerprint(corrected));
    m.template_hash = Some(template_hash(generation, corrected));
    m.max_in_flight = Some(gateways.generation.max_in_flight());
    m.correction_stats = correction.map(|c| c.stats);
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub generated: Vec<ParaphraseRecord>,
    pub correction: Option<CorrectionRun>,
    pub dataset: AugmentedDataset,
}

pub async fn run_pipeline(
    originals: &[LabeledSentence],
    k: usize,
    corrected: bool,
    gateways: StageGateways<'_>,
    generation: &GenerationSettings,
    correction: &CorrectionSettings,
) -> Result<PipelineOutput, PipelineError> {
    let generated = generate_paraphrases(originals, k, gateways.generation, generation).await?;
    let correction_run = if corrected {
        Some(correct_dataset(&generated, gateways.correction, correction).await?)
    } else {
        None
    };
    let synthetics = correction_run.as_ref().map_or(&generated, |run| &run.records);
    let mut dataset = build_dataset(originals, synthetics, k, corrected)?;
    stamp_manifest(&mut dataset, gateways, generation, correction_run.as_ref());
    Ok(PipelineOutput {
        generated,
        correction: correction_run,
        dataset,
    })
}
