//! Assembly and serialization of augmented training sets.
//!
//! Each original row is immediately followed by its `k` paraphrases. With
//! `OBJ`/`SUBJ` original counts the result holds `OBJ + k·SUBJ` objective and
//! `SUBJ + k·OBJ` subjective rows. Despite the "balanced" variant names the
//! output is generally not class-balanced.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{ParaphraseRecord, Stage, StyleTag};
use crate::corpus::{self, class_distribution, CorpusError, LabeledSentence, SplitStats};
use crate::correct::CorrectionStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub synthetic_id: String,
    pub source_id: String,
    pub style: Option<StyleTag>,
    pub stage: Stage,
    pub changed_by_correction: bool,
}

impl From<&ParaphraseRecord> for ProvenanceEntry {
    fn from(r: &ParaphraseRecord) -> Self {
        Self {
            synthetic_id: r.synthetic_id.clone(),
            source_id: r.source_id.clone(),
            style: r.style,
            stage: r.stage,
            changed_by_correction: r.changed_by_correction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub sentence: LabeledSentence,
    pub provenance: Provenance,
    /// Present for synthetic rows.
    pub origin: Option<ProvenanceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub variant: String,
    pub k: usize,
    pub corrected: bool,
    pub source_split: String,
    pub original_rows: usize,
    pub total_rows: usize,
    pub class_counts: SplitStats,
    pub gateway_fingerprint: Option<String>,
    pub template_hash: Option<String>,
    /// Recorded for provenance only; outputs do not depend on it.
    pub max_in_flight: Option<usize>,
    pub correction_stats: Option<CorrectionStats>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedDataset {
    pub rows: Vec<DatasetRow>,
    pub k: usize,
    pub corrected: bool,
    pub manifest: DatasetManifest,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("source {source_id}: expected {expected} synthetic records, found {found}")]
    WrongSyntheticCount {
        source_id: String,
        expected: usize,
        found: usize,
    },
    #[error("synthetic record {synthetic_id} refers to unknown source {source_id}")]
    UnknownSource { synthetic_id: String, source_id: String },
    #[error("synthetic record {synthetic_id} has label {label} but its source has the same label")]
    SameLabel { synthetic_id: String, label: String },
    #[error("synthetic id {0} collides with an existing sentence id")]
    IdCollision(String),
    #[error("synthetic record {synthetic_id} is at stage {found:?}, dataset expects {expected:?}")]
    StageMismatch {
        synthetic_id: String,
        expected: Stage,
        found: Stage,
    },
    #[error("dataset files are inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// `balanced{k}` with a `_corrected` suffix for corrected sets.
pub fn variant_name(k: usize, corrected: bool) -> String {
    if corrected {
        format!("balanced{k}_corrected")
    } else {
        format!("balanced{k}")
    }
}

pub fn build_dataset(
    originals: &[LabeledSentence],
    synthetics: &[ParaphraseRecord],
    k: usize,
    corrected: bool,
) -> Result<AugmentedDataset, DatasetError> {
    if k == 0 {
        return Err(DatasetError::InvalidK);
    }
    let expected_stage = if corrected { Stage::Corrected } else { Stage::Generated };
    let by_id: HashMap<&str, &LabeledSentence> =
        originals.iter().map(|o| (o.sentence_id.as_str(), o)).collect();
    let mut grouped: HashMap<&str, Vec<&ParaphraseRecord>> = HashMap::new();
    let mut synthetic_ids = HashSet::new();
    for rec in synthetics {
        let source = by_id.get(rec.source_id.as_str()).ok_or_else(|| DatasetError::UnknownSource {
            synthetic_id: rec.synthetic_id.clone(),
            source_id: rec.source_id.clone(),
        })?;
        if rec.label == source.label {
            return Err(DatasetError::SameLabel {
                synthetic_id: rec.synthetic_id.clone(),
                label: rec.label.to_string(),
            });
        }
        if rec.stage != expected_stage {
            return Err(DatasetError::StageMismatch {
                synthetic_id: rec.synthetic_id.clone(),
                expected: expected_stage,
                found: rec.stage,
            });
        }
        if by_id.contains_key(rec.synthetic_id.as_str()) || !synthetic_ids.insert(rec.synthetic_id.as_str()) {
            return Err(DatasetError::IdCollision(rec.synthetic_id.clone()));
        }
        grouped.entry(rec.source_id.as_str()).or_default().push(rec);
    }

    let mut rows = Vec::with_capacity(originals.len() * (1 + k));
    for original in originals {
        let group = grouped.remove(original.sentence_id.as_str()).unwrap_or_default();
        if group.len() != k {
            return Err(DatasetError::WrongSyntheticCount {
                source_id: original.sentence_id.clone(),
                expected: k,
                found: group.len(),
            });
        }
        rows.push(DatasetRow {
            sentence: original.clone(),
            provenance: Provenance::Original,
            origin: None,
        });
        rows.extend(group.into_iter().map(|rec| DatasetRow {
            sentence: LabeledSentence::new(rec.synthetic_id.clone(), rec.text.clone(), rec.label),
            provenance: Provenance::Synthetic,
            origin: Some(ProvenanceEntry::from(rec)),
        }));
    }

    let sentences: Vec<LabeledSentence> = rows.iter().map(|r| r.sentence.clone()).collect();
    let manifest = DatasetManifest {
        variant: variant_name(k, corrected),
        k,
        corrected,
        source_split: "train".into(),
        original_rows: originals.len(),
        total_rows: rows.len(),
        class_counts: class_distribution(&sentences),
        gateway_fingerprint: None,
        template_hash: None,
        max_in_flight: None,
        correction_stats: None,
    };
    Ok(AugmentedDataset {
        rows,
        k,
        corrected,
        manifest,
    })
}

impl AugmentedDataset {
    pub fn sentences(&self) -> Vec<LabeledSentence> {
        self.rows.iter().map(|r| r.sentence.clone()).collect()
    }

    pub fn class_counts(&self) -> SplitStats {
        class_distribution(&self.sentences())
    }

    pub fn synthetic_count(&self) -> usize {
        self.rows.iter().filter(|r| r.provenance == Provenance::Synthetic).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub tsv: PathBuf,
    pub provenance: PathBuf,
    pub manifest: PathBuf,
}

impl DatasetFiles {
    pub fn in_dir(dir: &Path, variant: &str) -> Self {
        Self {
            tsv: dir.join(format!("train.{variant}.tsv")),
            provenance: dir.join(format!("train.{variant}.provenance.jsonl")),
            manifest: dir.join(format!("train.{variant}.manifest.json")),
        }
    }
}

/// Writes `train.<variant>.tsv`, the provenance sidecar and the manifest.
pub fn write_dataset(ds: &AugmentedDataset, dir: &Path) -> Result<DatasetFiles, DatasetError> {
    let files = DatasetFiles::in_dir(dir, &ds.manifest.variant);
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DatasetError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let tsv = corpus::write_tsv(&ds.sentences())?;
    fs::write(&files.tsv, tsv).map_err(io_err(&files.tsv))?;

    let mut sidecar = String::new();
    for entry in ds.rows.iter().filter_map(|r| r.origin.as_ref()) {
        sidecar.push_str(&serde_json::to_string(entry).expect("provenance entry serializes"));
        sidecar.push('\n');
    }
    fs::write(&files.provenance, sidecar).map_err(io_err(&files.provenance))?;

    let mut manifest = serde_json::to_string_pretty(&ds.manifest).expect("manifest serializes");
    manifest.push('\n');
    fs::write(&files.manifest, manifest).map_err(io_err(&files.manifest))?;
    Ok(files)
}

/// Reads back a dataset written by [`write_dataset`].
pub fn read_dataset(files: &DatasetFiles) -> Result<AugmentedDataset, DatasetError> {
    let read = |path: &Path| fs::read(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source });
    let sentences = corpus::parse_tsv(&read(&files.tsv)?)?;
    let manifest: DatasetManifest =
        serde_json::from_slice(&read(&files.manifest)?).map_err(|source| DatasetError::Json {
            path: files.manifest.clone(),
            source,
        })?;
    let sidecar = read(&files.provenance)?;
    let mut origins = HashMap::new();
    for line in sidecar.split(|&b| b == b'\n').filter(|l| !l.is_empty()) {
        let entry: ProvenanceEntry = serde_json::from_slice(line).map_err(|source| DatasetError::Json {
            path: files.provenance.clone(),
            source,
        })?;
        origins.insert(entry.synthetic_id.clone(), entry);
    }
    let rows: Vec<DatasetRow> = sentences
        .into_iter()
        .map(|sentence| {
            let origin = origins.remove(&sentence.sentence_id);
            DatasetRow {
                provenance: if origin.is_some() { Provenance::Synthetic } else { Provenance::Original },
                sentence,
                origin,
            }
        })
        .collect();
    if !origins.is_empty() {
        return Err(DatasetError::Inconsistent(format!(
            "{} provenance entries have no matching TSV row",
            origins.len()
        )));
    }
    if rows.len() != manifest.total_rows {
        return Err(DatasetError::Inconsistent(format!(
            "manifest lists {} rows, TSV has {}",
            manifest.total_rows,
            rows.len()
        )));
    }
    Ok(AugmentedDataset {
        rows,
        k: manifest.k,
        corrected: manifest.corrected,
        manifest,
    })
}
