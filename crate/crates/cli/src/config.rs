//! Run configuration: TOML file with one table per stage, then command-line
//! overrides on top.
//!
//! ```toml
//! [data]
//! split = "data/train_en.tsv"
//!
//! [gateway]
//! mock = true
//! max_in_flight = 4
//!
//! [augment]
//! k = 6
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use subjaug::augment::{GenerationSettings, GenerationTemplate};
use subjaug::baseline::{HashDim, Hyperparams, DEFAULT_DIM_BITS};
use subjaug::correct::CorrectionSettings;
use subjaug::gateway::{GatewayConfig, MockFallback, DEFAULT_API_KEY_ENV, DEFAULT_BASE_URL};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub gateway: GatewaySection,
    pub augment: AugmentSection,
    pub correct: CorrectSection,
    pub classifier: ClassifierSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub split: Option<PathBuf>,
    pub dev: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewaySection {
    pub base_url: String,
    pub api_key_env: String,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub request_timeout_secs: u64,
    pub mock: bool,
    /// Unset: generation answers with request fingerprints, correction
    /// echoes the sentence back.
    pub mock_fallback: Option<MockFallback>,
}

impl Default for GatewaySection {
    fn default() -> Self {
        let d = GatewayConfig::default();
        Self {
            base_url: DEFAULT_BASE_URL.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            max_in_flight: d.max_in_flight,
            max_retries: d.max_retries,
            initial_backoff_ms: d.initial_backoff_ms,
            request_timeout_secs: d.request_timeout_secs,
            mock: false,
            mock_fallback: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub k: usize,
    pub allow_any_k: bool,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub template: Option<PathBuf>,
}

impl Default for AugmentSection {
    fn default() -> Self {
        let d = GenerationSettings::default();
        Self {
            k: 2,
            allow_any_k: false,
            model: d.model_name,
            temperature: d.temperature,
            max_output_tokens: d.max_output_tokens,
            template: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectSection {
    pub corrected: bool,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for CorrectSection {
    fn default() -> Self {
        let d = CorrectionSettings::default();
        Self {
            corrected: false,
            model: d.model_name,
            temperature: d.temperature,
            max_output_tokens: d.max_output_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub seed: u64,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub epochs: usize,
    pub dim_bits: u32,
    pub endpoint: Option<String>,
    pub model: Option<PathBuf>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        Self {
            seed: 0,
            learning_rate: h.learning_rate,
            l2_penalty: h.l2_penalty,
            epochs: h.epochs,
            dim_bits: DEFAULT_DIM_BITS,
            endpoint: None,
            model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: PathBuf,
    pub manifest: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            manifest: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.augment.k;
        if k == 0 {
            bail!("k must be at least 1");
        }
        if !self.augment.allow_any_k && k != 2 && k != 6 {
            bail!("k = {k} is not one of the studied settings (2, 6); pass --allow-any-k to use it");
        }
        self.gateway_config().validate()?;
        HashDim::from_bits(self.classifier.dim_bits)?;
        self.hyperparams().validate()?;
        Ok(())
    }

    pub fn gateway_config(&self) -> GatewayConfig {
        GatewayConfig {
            base_url: self.gateway.base_url.clone(),
            api_key_env_name: self.gateway.api_key_env.clone(),
            max_in_flight: self.gateway.max_in_flight,
            max_retries: self.gateway.max_retries,
            initial_backoff_ms: self.gateway.initial_backoff_ms,
            request_timeout_secs: self.gateway.request_timeout_secs,
        }
    }

    pub fn generation_settings(&self) -> Result<GenerationSettings> {
        let mut settings = GenerationSettings {
            model_name: self.augment.model.clone(),
            temperature: self.augment.temperature,
            max_output_tokens: self.augment.max_output_tokens,
            ..GenerationSettings::default()
        };
        if let Some(path) = &self.augment.template {
            let text = fs::read_to_string(path).with_context(|| format!("reading template {}", path.display()))?;
            settings.template = GenerationTemplate::new(text)?;
        }
        Ok(settings)
    }

    pub fn correction_settings(&self) -> CorrectionSettings {
        CorrectionSettings {
            model_name: self.correct.model.clone(),
            temperature: self.correct.temperature,
            max_output_tokens: self.correct.max_output_tokens,
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            learning_rate: self.classifier.learning_rate,
            l2_penalty: self.classifier.l2_penalty,
            epochs: self.classifier.epochs,
        }
    }

    pub fn dim(&self) -> Result<HashDim> {
        Ok(HashDim::from_bits(self.classifier.dim_bits)?)
    }
}
