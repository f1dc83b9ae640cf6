//! Style-controlled paraphrase generation into the opposite subjectivity class.
//!
//! Each source sentence yields `k` paraphrases carrying the opposite label.
//! Paraphrases into SUBJ carry one of six style tags; paraphrases into OBJ
//! carry none.

use std::fmt;
use std::str::FromStr;

use futures::{StreamExt, TryStreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, LabeledSentence};
use crate::gateway::{ChatRequest, Gateway, GatewayError};
use crate::template;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleTag {
    Propaganda,
    Exaggerated,
    Emotional,
    Derogatory,
    Partisan,
    Prejudiced,
}

impl StyleTag {
    /// Canonical order; style assignment indexes into this array.
    pub const ALL: [StyleTag; 6] = [
        StyleTag::Propaganda,
        StyleTag::Exaggerated,
        StyleTag::Emotional,
        StyleTag::Derogatory,
        StyleTag::Partisan,
        StyleTag::Prejudiced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StyleTag::Propaganda => "propaganda",
            StyleTag::Exaggerated => "exaggerated",
            StyleTag::Emotional => "emotional",
            StyleTag::Derogatory => "derogatory",
            StyleTag::Partisan => "partisan",
            StyleTag::Prejudiced => "prejudiced",
        }
    }
}

impl fmt::Display for StyleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StyleTag {
    type Err = AugmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StyleTag::ALL
            .into_iter()
            .find(|tag| tag.as_str() == s)
            .ok_or_else(|| AugmentError::UnknownStyle(s.to_string()))
    }
}

/// Rendering of an absent style in prompt slots.
pub fn style_slot(style: Option<StyleTag>) -> &'static str {
    style.map_or("none", StyleTag::as_str)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Generated,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseRecord {
    pub synthetic_id: String,
    pub source_id: String,
    pub text: String,
    pub label: Label,
    pub style: Option<StyleTag>,
    pub stage: Stage,
    /// Only meaningful once `stage` is `Corrected`.
    pub changed_by_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationTask {
    pub source: LabeledSentence,
    pub target_label: Label,
    pub style: Option<StyleTag>,
    pub variant_index: usize,
}

impl GenerationTask {
    pub fn new(source: LabeledSentence, style: Option<StyleTag>, variant_index: usize) -> Result<Self, AugmentError> {
        let target_label = source.label.opposite();
        if style.is_some() != (target_label == Label::Subj) {
            return Err(AugmentError::StyleMismatch {
                source_id: source.sentence_id,
                target: target_label,
            });
        }
        Ok(Self {
            source,
            target_label,
            style,
            variant_index,
        })
    }

    pub fn synthetic_id(&self) -> String {
        synthetic_id(&self.source.sentence_id, self.variant_index)
    }

    pub fn direction(&self) -> String {
        direction_text(self.source.label)
    }
}

pub fn synthetic_id(source_id: &str, variant_index: usize) -> String {
    format!("{source_id}.g{variant_index}")
}

fn direction_text(source_label: Label) -> String {
    format!("{} to {}", source_label, source_label.opposite())
}

/// A worked (source, paraphrase) pair shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub source_label: Label,
    pub source: String,
    pub paraphrase: String,
}

/// One pair per direction.
pub fn default_exemplars() -> Vec<Exemplar> {
    vec![
        Exemplar {
            source_label: Label::Subj,
            source: "Gone are the days when they led the world in recession-busting.".into(),
            paraphrase: "The era in which they were at the forefront of overcoming economic downturns has ended."
                .into(),
        },
        Exemplar {
            source_label: Label::Obj,
            source: "The trend is expected to reverse as soon as next month.".into(),
            paraphrase: "A promising turnaround is on the horizon, with expectations for change as early as next month."
                .into(),
        },
    ]
}

pub const GENERATION_PLACEHOLDERS: [&str; 4] = ["direction", "style", "exemplars", "sentence"];

pub const DEFAULT_GENERATION_TEMPLATE: &str = include_str!("../templates/generation.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationTemplate(String);

impl Default for GenerationTemplate {
    fn default() -> Self {
        Self(DEFAULT_GENERATION_TEMPLATE.to_string())
    }
}

impl GenerationTemplate {
    /// Accepts templates using only the four known placeholders and
    /// containing at least `{sentence}`.
    pub fn new(text: impl Into<String>) -> Result<Self, AugmentError> {
        let text = text.into();
        let names = template::placeholders(&text);
        if let Some(unknown) = names.iter().find(|n| !GENERATION_PLACEHOLDERS.contains(n)) {
            return Err(AugmentError::Template(format!("unknown placeholder {{{unknown}}}")));
        }
        if !names.contains(&"sentence") {
            return Err(AugmentError::Template("template lacks {sentence}".into()));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn render(&self, task: &GenerationTask, exemplars: &[Exemplar]) -> Result<String, AugmentError> {
        if exemplars.is_empty() {
            return Err(AugmentError::NoExemplars {
                direction: task.direction(),
            });
        }
        if let Some(index) = exemplars.iter().position(|e| e.source_label != task.source.label) {
            return Err(AugmentError::ExemplarMismatch {
                index,
                expected: task.direction(),
            });
        }
        let rendered_exemplars = exemplars
            .iter()
            .map(|e| {
                format!(
                    "Input ({}): \"{}\"\nOutput ({}): \"{}\"",
                    e.source_label,
                    e.source,
                    e.source_label.opposite(),
                    e.paraphrase
                )
            })
            .collect::<Vec<_>>()
            .join("\n\n");
        let direction = task.direction();
        Ok(template::render(
            &self.0,
            &[
                ("direction", direction.as_str()),
                ("style", style_slot(task.style)),
                ("exemplars", rendered_exemplars.as_str()),
                ("sentence", task.source.text.as_str()),
            ],
        ))
    }
}

/// Renders the default generation prompt.
pub fn build_generation_prompt(task: &GenerationTask, exemplars: &[Exemplar]) -> Result<String, AugmentError> {
    GenerationTemplate::default().render(task, exemplars)
}

#[derive(Debug, Clone)]
pub struct GenerationSettings {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub template: GenerationTemplate,
    pub exemplars: Vec<Exemplar>,
}

impl Default for GenerationSettings {
    fn default() -> Self {
        Self {
            model_name: "gpt-4o".into(),
            temperature: 0.7,
            max_output_tokens: 96,
            template: GenerationTemplate::default(),
            exemplars: default_exemplars(),
        }
    }
}

impl GenerationSettings {
    fn exemplars_for(&self, source_label: Label) -> Vec<Exemplar> {
        self.exemplars
            .iter()
            .filter(|e| e.source_label == source_label)
            .cloned()
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("unknown style {0:?}")]
    UnknownStyle(String),
    #[error("source {source_id}: style must be present exactly when the target label is SUBJ (target {target})")]
    StyleMismatch { source_id: String, target: Label },
    #[error("no exemplars for direction {direction}")]
    NoExemplars { direction: String },
    #[error("exemplar {index} does not match the task direction {expected}")]
    ExemplarMismatch { index: usize, expected: String },
    #[error("generation template: {0}")]
    Template(String),
    #[error("generation for source {source_id} failed: {source}")]
    Gateway {
        source_id: String,
        #[source]
        source: GatewayError,
    },
}

/// Styles for the `k` paraphrases of one source sentence.
///
/// OBJ sources get SUBJ paraphrases with styles taken round-robin from the
/// canonical order, starting at `source_index mod 6`; when `k` is a multiple
/// of six the start is fixed at 0 so every style appears in canonical order.
/// SUBJ sources get `k` absent styles.
pub fn assign_styles(k: usize, source_index: usize, source_label: Label) -> Result<Vec<Option<StyleTag>>, AugmentError> {
    if k == 0 {
        return Err(AugmentError::InvalidK);
    }
    if source_label == Label::Subj {
        return Ok(vec![None; k]);
    }
    let n = StyleTag::ALL.len();
    let offset = if k.is_multiple_of(n) { 0 } else { source_index % n };
    Ok((0..k).map(|j| Some(StyleTag::ALL[(offset + j) % n])).collect())
}

/// Expands rows into generation tasks ordered by (row, variant_index).
pub fn plan_tasks(rows: &[LabeledSentence], k: usize) -> Result<Vec<GenerationTask>, AugmentError> {
    let mut tasks = Vec::with_capacity(rows.len() * k);
    for (index, row) in rows.iter().enumerate() {
        for (variant, style) in assign_styles(k, index, row.label)?.into_iter().enumerate() {
            tasks.push(GenerationTask::new(row.clone(), style, variant)?);
        }
    }
    Ok(tasks)
}

/// Generates `rows.len() * k` paraphrases. Calls fan out under the gateway
/// cap; output order is (row order, variant_index) regardless of completion
/// order. An empty completion is retried once before failing.
pub async fn generate_paraphrases(
    rows: &[LabeledSentence],
    k: usize,
    gateway: &Gateway,
    settings: &GenerationSettings,
) -> Result<Vec<ParaphraseRecord>, AugmentError> {
    if k == 0 {
        return Err(AugmentError::InvalidK);
    }
    let tasks = plan_tasks(rows, k)?;
    let mut prompts = Vec::with_capacity(tasks.len());
    for task in &tasks {
        let exemplars = settings.exemplars_for(task.source.label);
        prompts.push(settings.template.render(task, &exemplars)?);
    }

    futures::stream::iter(tasks.into_iter().zip(prompts))
        .map(|(task, prompt)| async move {
            let request = ChatRequest {
                model_name: settings.model_name.clone(),
                system_text: None,
                user_text: prompt,
                temperature: settings.temperature,
                max_output_tokens: settings.max_output_tokens,
            };
            let text = complete_non_empty(gateway, &request)
                .await
                .map_err(|source| AugmentError::Gateway {
                    source_id: task.source.sentence_id.clone(),
                    source,
                })?;
            Ok(ParaphraseRecord {
                synthetic_id: task.synthetic_id(),
                source_id: task.source.sentence_id,
                text,
                label: task.target_label,
                style: task.style,
                stage: Stage::Generated,
                changed_by_correction: false,
            })
        })
        .buffered(gateway.max_in_flight())
        .try_collect()
        .await
}

async fn complete_non_empty(gateway: &Gateway, request: &ChatRequest) -> Result<String, GatewayError> {
    match gateway.complete(request).await {
        Err(GatewayError::EmptyCompletion) => gateway.complete(request).await.map(|r| r.text),
        other => other.map(|r| r.text),
    }
}
