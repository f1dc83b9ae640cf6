//! Fine-tuning presets for the external encoder trainer, and the command line
//! used to hand a dataset over to it.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub model_name: &'static str,
    pub epochs: u32,
    pub learning_rate: f64,
}

/// MiniLM-L12-v2 and MiniLM-L6-v2 share one slot; both names appear for the
/// same model in the results.
pub const PRESETS: [Preset; 7] = [
    Preset { model_name: "RoBERTa-base", epochs: 3, learning_rate: 1e-4 },
    Preset { model_name: "MiniLM-L12-v2", epochs: 3, learning_rate: 1e-4 },
    Preset { model_name: "MiniLM-L6-v2", epochs: 3, learning_rate: 1e-4 },
    Preset { model_name: "ModernBERT-large", epochs: 2, learning_rate: 2e-5 },
    Preset { model_name: "Sentiment-Analysis-BERT", epochs: 4, learning_rate: 2e-5 },
    Preset { model_name: "Emotion-English-DistilRoBERTa-base", epochs: 6, learning_rate: 2e-4 },
    Preset { model_name: "Emotion-English-RoBERTa-large", epochs: 7, learning_rate: 2e-5 },
];

pub const DEFAULT_TRAINER_SEED: u64 = 42;

pub const DATASET_VARIANTS: [&str; 5] =
    ["original", "balanced2", "balanced6", "balanced2_corrected", "balanced6_corrected"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrainerError {
    #[error("unknown model {0:?}; known: {known}", known = PRESETS.iter().map(|p| p.model_name).collect::<Vec<_>>().join(", "))]
    UnknownModel(String),
    #[error("unknown dataset variant {0:?}")]
    UnknownVariant(String),
}

/// Case-insensitive lookup.
pub fn preset(model_name: &str) -> Result<Preset, TrainerError> {
    PRESETS
        .iter()
        .find(|p| p.model_name.eq_ignore_ascii_case(model_name.trim()))
        .copied()
        .ok_or_else(|| TrainerError::UnknownModel(model_name.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelegateJob {
    pub preset: Preset,
    pub dataset_variant: String,
    pub train: PathBuf,
    pub dev: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl DelegateJob {
    pub fn new(
        model_name: &str,
        dataset_variant: &str,
        train: &Path,
        dev: &Path,
        out_dir: &Path,
        seed: u64,
    ) -> Result<Self, TrainerError> {
        if !DATASET_VARIANTS.contains(&dataset_variant) {
            return Err(TrainerError::UnknownVariant(dataset_variant.to_string()));
        }
        Ok(DelegateJob {
            preset: preset(model_name)?,
            dataset_variant: dataset_variant.to_string(),
            train: train.to_path_buf(),
            dev: dev.to_path_buf(),
            out_dir: out_dir.to_path_buf(),
            seed,
        })
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.out_dir.join("dev.predictions.tsv")
    }

    /// Arguments appended after the trainer program.
    pub fn args(&self) -> Vec<String> {
        vec![
            "fine-tune".into(),
            "--model".into(),
            self.preset.model_name.into(),
            "--epochs".into(),
            self.preset.epochs.to_string(),
            "--learning-rate".into(),
            format!("{:e}", self.preset.learning_rate),
            "--seed".into(),
            self.seed.to_string(),
            "--dataset-variant".into(),
            self.dataset_variant.clone(),
            "--train".into(),
            self.train.display().to_string(),
            "--dev".into(),
            self.dev.display().to_string(),
            "--out-dir".into(),
            self.out_dir.display().to_string(),
            "--predictions".into(),
            self.predictions_path().display().to_string(),
        ]
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (epochs {}, lr {:e})", self.model_name, self.epochs, self.learning_rate)
    }
}
