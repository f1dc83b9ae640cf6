//! Desk-scale subjectivity classifier: hashed unigram/bigram features and
//! binary logistic regression fitted by full-batch gradient descent.
//!
//! Feature hashing uses 64-bit FNV-1a over the UTF-8 bytes of `u:<token>` for
//! unigrams and `b:<token> <token>` for bigrams, masked to `D = 2^bits`
//! buckets. Bucket values are `ln(1 + tf)`.
//!
//! [`ClassifierHandle::Remote`] delegates to an HTTP inference service:
//! `POST <endpoint>/predict` with `{"sentences": [...]}` returning
//! `{"labels": [...], "scores": [...]}`, plus `GET <endpoint>/health`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use futures::{StreamExt, TryStreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::corpus::{Label, LabeledSentence};

pub const DEFAULT_DIM_BITS: u32 = 18;
/// Scores at or above this are SUBJ; an exact tie goes to SUBJ.
pub const DECISION_THRESHOLD: f64 = 0.5;
const REMOTE_BATCH: usize = 32;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Power-of-two feature space size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashDim {
    bits: u32,
}

impl HashDim {
    pub fn from_bits(bits: u32) -> Result<Self, FitError> {
        if !(1..=26).contains(&bits) {
            return Err(FitError::Hyperparams(format!("dimension bits {bits} outside 1..=26")));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn size(self) -> usize {
        1usize << self.bits
    }

    fn bucket(self, key: &str) -> u32 {
        (fnv1a64(key.as_bytes()) & (self.size() as u64 - 1)) as u32
    }
}

impl Default for HashDim {
    fn default() -> Self {
        Self { bits: DEFAULT_DIM_BITS }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: BTreeMap<u32, f64>,
}

impl FeatureVector {
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn get(&self, index: u32) -> Option<f64> {
        self.entries.get(&index).copied()
    }

    fn dot(&self, weights: &[f64]) -> f64 {
        self.entries.iter().map(|(&i, &v)| weights[i as usize] * v).sum()
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn featurize(text: &str, dim: HashDim) -> FeatureVector {
    let tokens = tokenize(text);
    let mut tf: BTreeMap<u32, u32> = BTreeMap::new();
    for token in &tokens {
        *tf.entry(dim.bucket(&format!("u:{token}"))).or_default() += 1;
    }
    for pair in tokens.windows(2) {
        *tf.entry(dim.bucket(&format!("b:{} {}", pair[0], pair[1]))).or_default() += 1;
    }
    FeatureVector {
        entries: tf.into_iter().map(|(i, n)| (i, f64::from(n).ln_1p())).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            l2_penalty: 1e-4,
            epochs: 200,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(FitError::Hyperparams("learning_rate must be positive".into()));
        }
        if !(self.l2_penalty.is_finite() && self.l2_penalty >= 0.0) {
            return Err(FitError::Hyperparams("l2_penalty must be non-negative".into()));
        }
        if self.epochs == 0 {
            return Err(FitError::Hyperparams("epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("training data must contain both OBJ and SUBJ rows")]
    SingleClass,
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("training diverged (non-finite loss at epoch {0})")]
    Diverged(usize),
    #[error("model file: {0}")]
    ModelFile(String),
}

/// One weighted training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub features: FeatureVector,
    /// 1.0 for SUBJ, 0.0 for OBJ.
    pub target: f64,
    pub weight: f64,
}

impl TrainingExample {
    pub fn from_sentence(row: &LabeledSentence, dim: HashDim) -> Self {
        Self {
            features: featurize(&row.text, dim),
            target: if row.label == Label::Subj { 1.0 } else { 0.0 },
            weight: 1.0,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Weighted mean logistic loss plus `l2/2 · ‖w‖²` (bias unpenalized), and its
/// gradient.
pub fn loss_and_gradient(weights: &[f64], bias: f64, examples: &[TrainingExample], l2_penalty: f64) -> LossGradient {
    let total_weight: f64 = examples.iter().map(|e| e.weight).sum();
    let mut grad = vec![0.0; weights.len()];
    let mut grad_bias = 0.0;
    let mut data_loss = 0.0;
    for ex in examples {
        let z = ex.features.dot(weights) + bias;
        data_loss += ex.weight * (softplus(z) - ex.target * z);
        let residual = sigmoid(z) - ex.target;
        for (i, v) in ex.features.iter() {
            grad[i as usize] += ex.weight * (residual * v);
        }
        grad_bias += ex.weight * residual;
    }
    let scale = if total_weight > 0.0 { 1.0 / total_weight } else { 0.0 };
    let mut penalty = 0.0;
    for (g, &w) in grad.iter_mut().zip(weights) {
        *g = *g * scale + l2_penalty * w;
        penalty += w * w;
    }
    LossGradient {
        loss: data_loss * scale + 0.5 * l2_penalty * penalty,
        weights: grad,
        bias: grad_bias * scale,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub dim: HashDim,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub seed: u64,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

pub fn label_for_score(score: f64) -> Label {
    if score >= DECISION_THRESHOLD {
        Label::Subj
    } else {
        Label::Obj
    }
}

impl LinearModel {
    pub fn zeros(dim: HashDim) -> Self {
        Self {
            dim,
            weights: vec![0.0; dim.size()],
            bias: 0.0,
            seed: 0,
            hyperparams: Hyperparams::default(),
        }
    }

    /// SUBJ probability.
    pub fn score(&self, text: &str) -> f64 {
        self.score_features(&featurize(text, self.dim))
    }

    pub fn score_features(&self, features: &FeatureVector) -> f64 {
        sigmoid(features.dot(&self.weights) + self.bias)
    }

    pub fn predict<S: AsRef<str>>(&self, texts: &[S]) -> Vec<Prediction> {
        texts
            .iter()
            .map(|t| {
                let score = self.score(t.as_ref());
                Prediction {
                    label: label_for_score(score),
                    score,
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            dim_bits: self.dim.bits(),
            bias: self.bias,
            seed: self.seed,
            hyperparams: self.hyperparams,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (i as u32, w))
                .collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FitError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| FitError::ModelFile(e.to_string()))?;
        let dim = HashDim::from_bits(file.dim_bits)?;
        let mut weights = vec![0.0; dim.size()];
        for (i, w) in file.weights {
            let slot = weights
                .get_mut(i as usize)
                .ok_or_else(|| FitError::ModelFile(format!("weight index {i} out of range")))?;
            if !w.is_finite() {
                return Err(FitError::ModelFile(format!("non-finite weight at {i}")));
            }
            *slot = w;
        }
        Ok(Self {
            dim,
            weights,
            bias: file.bias,
            seed: file.seed,
            hyperparams: file.hyperparams,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    dim_bits: u32,
    bias: f64,
    seed: u64,
    hyperparams: Hyperparams,
    /// Sparse (index, weight) pairs; absent indices are zero.
    weights: Vec<(u32, f64)>,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: LinearModel,
    /// Objective value before each epoch's update, then after the last one.
    pub loss_history: Vec<f64>,
}

/// Fits on labeled rows, each with unit weight.
pub fn fit(rows: &[LabeledSentence], dim: HashDim, hyperparams: Hyperparams, seed: u64) -> Result<FitReport, FitError> {
    let has = |label| rows.iter().any(|r| r.label == label);
    if !(has(Label::Obj) && has(Label::Subj)) {
        return Err(FitError::SingleClass);
    }
    let examples: Vec<_> = rows.iter().map(|r| TrainingExample::from_sentence(r, dim)).collect();
    fit_examples(&examples, dim, hyperparams, seed)
}

/// Full-batch gradient descent from zero weights. The descent itself is
/// deterministic; `seed` is carried on the model for provenance.
pub fn fit_examples(
    examples: &[TrainingExample],
    dim: HashDim,
    hyperparams: Hyperparams,
    seed: u64,
) -> Result<FitReport, FitError> {
    hyperparams.validate()?;
    let mut model = LinearModel {
        seed,
        hyperparams,
        ..LinearModel::zeros(dim)
    };
    let mut history = Vec::with_capacity(hyperparams.epochs + 1);
    for epoch in 0..hyperparams.epochs {
        let step = loss_and_gradient(&model.weights, model.bias, examples, hyperparams.l2_penalty);
        if !step.loss.is_finite() {
            return Err(FitError::Diverged(epoch));
        }
        history.push(step.loss);
        for (w, g) in model.weights.iter_mut().zip(&step.weights) {
            *w -= hyperparams.learning_rate * g;
        }
        model.bias -= hyperparams.learning_rate * step.bias;
    }
    let last = loss_and_gradient(&model.weights, model.bias, examples, hyperparams.l2_penalty);
    if !last.loss.is_finite() {
        return Err(FitError::Diverged(hyperparams.epochs));
    }
    history.push(last.loss);
    Ok(FitReport {
        model,
        loss_history: history,
    })
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("remote transport failure: {0}")]
    Transport(String),
    #[error("remote endpoint {endpoint} is unhealthy (status {status})")]
    Unhealthy { endpoint: String, status: u16 },
    #[error("remote protocol error: {0}")]
    Protocol(String),
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    sentences: &'a [String],
}

#[derive(Deserialize)]
struct PredictResponse {
    labels: Vec<String>,
    scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RemoteClassifier {
    endpoint: String,
    client: reqwest::Client,
    limiter: Arc<Semaphore>,
    max_in_flight: usize,
}

impl RemoteClassifier {
    /// Connects and probes `GET <endpoint>/health`.
    pub async fn connect(endpoint: &str, max_in_flight: usize, timeout: Duration) -> Result<Self, ClassifierError> {
        let endpoint = endpoint.trim_end_matches('/').to_string();
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClassifierError::Transport(e.to_string()))?;
        let status = client
            .get(format!("{endpoint}/health"))
            .send()
            .await
            .map_err(|e| ClassifierError::Transport(e.to_string()))?
            .status()
            .as_u16();
        if status != 200 {
            return Err(ClassifierError::Unhealthy { endpoint, status });
        }
        let max_in_flight = max_in_flight.max(1);
        Ok(Self {
            endpoint,
            client,
            limiter: Arc::new(Semaphore::new(max_in_flight)),
            max_in_flight,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    async fn predict_batch(&self, batch: &[String]) -> Result<Vec<Prediction>, ClassifierError> {
        let _permit = self.limiter.acquire().await.expect("limiter is never closed");
        let resp = self
            .client
            .post(format!("{}/predict", self.endpoint))
            .json(&PredictRequest { sentences: batch })
            .send()
            .await
            .map_err(|e| ClassifierError::Transport(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().await.map_err(|e| ClassifierError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ClassifierError::Transport(format!("HTTP {}: {body}", status.as_u16())));
        }
        let parsed: PredictResponse =
            serde_json::from_str(&body).map_err(|e| ClassifierError::Protocol(e.to_string()))?;
        if parsed.labels.len() != batch.len() || parsed.scores.len() != batch.len() {
            return Err(ClassifierError::Protocol(format!(
                "sent {} sentences, got {} labels and {} scores",
                batch.len(),
                parsed.labels.len(),
                parsed.scores.len()
            )));
        }
        parsed
            .labels
            .iter()
            .zip(parsed.scores)
            .map(|(label, score)| {
                label
                    .parse::<Label>()
                    .map_err(|e| ClassifierError::Protocol(e.to_string()))?;
                if !(0.0..=1.0).contains(&score) {
                    return Err(ClassifierError::Protocol(format!("score {score} outside [0, 1]")));
                }
                // the local threshold rule decides, so ties resolve the same way everywhere
                Ok(Prediction {
                    label: label_for_score(score),
                    score,
                })
            })
            .collect()
    }

    pub async fn predict(&self, texts: &[String]) -> Result<Vec<Prediction>, ClassifierError> {
        let batches: Vec<Vec<Prediction>> = futures::stream::iter(texts.chunks(REMOTE_BATCH))
            .map(|batch| self.predict_batch(batch))
            .buffered(self.max_in_flight)
            .try_collect()
            .await?;
        Ok(batches.into_iter().flatten().collect())
    }
}

#[derive(Debug, Clone)]
pub enum ClassifierHandle {
    Local(LinearModel),
    Remote(RemoteClassifier),
}

impl ClassifierHandle {
    pub async fn remote(endpoint: &str, max_in_flight: usize) -> Result<Self, ClassifierError> {
        RemoteClassifier::connect(endpoint, max_in_flight, Duration::from_secs(60))
            .await
            .map(ClassifierHandle::Remote)
    }

    pub async fn predict(&self, texts: &[String]) -> Result<Vec<Prediction>, ClassifierError> {
        match self {
            ClassifierHandle::Local(model) => Ok(model.predict(texts)),
            ClassifierHandle::Remote(remote) => remote.predict(texts).await,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 64 test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn empty_text_has_no_features() {
        assert!(featurize("", HashDim::default()).is_empty());
        assert!(featurize("  ,;!  ", HashDim::default()).is_empty());
    }

    #[test]
    fn case_folding() {
        let dim = HashDim::default();
        assert_eq!(featurize("Gone are the days", dim), featurize("gone ARE the days", dim));
    }

    #[test]
    fn tokenizer_splits_on_non_alphanumerics() {
        assert_eq!(tokenize("Recession-busting, it's 2024!"), ["recession", "busting", "it", "s", "2024"]);
    }

    #[test]
    fn repeated_tokens_use_log_tf() {
        let fv = featurize("spam spam", HashDim::default());
        let u = HashDim::default().bucket("u:spam");
        assert_eq!(fv.get(u), Some(2f64.ln_1p()));
        assert_eq!(fv.len(), 2);
    }

    #[test]
    fn pinned_feature_indices() {
        // Frozen from an independent FNV-1a implementation (Python) for D = 2^18.
        let fv = featurize("Gone are the days when they led the world in recession-busting.", HashDim::default());
        let got: Vec<u32> = fv.indices().collect();
        assert_eq!(got, PINNED_INDICES.to_vec());
        // "the" occurs twice and owns bucket 148773
        for (i, v) in fv.iter() {
            let tf: f64 = if i == 148_773 { 2.0 } else { 1.0 };
            assert_eq!(v, tf.ln_1p(), "bucket {i}");
        }
    }

    const PINNED_INDICES: [u32; 22] = [
        7218, 42570, 62913, 78566, 97181, 108249, 130601, 131740, 134397, 148773, 157325, 163516, 177784, 214927,
        225206, 227726, 228794, 234968, 235826, 236557, 252756, 253527,
    ];

    #[test]
    fn zero_model_scores_half_and_ties_go_subj() {
        let model = LinearModel::zeros(HashDim::from_bits(4).unwrap());
        let preds = model.predict(&["anything at all"]);
        assert_eq!(preds[0].score, 0.5);
        assert_eq!(preds[0].label, Label::Subj);
        assert_eq!(label_for_score(0.5), Label::Subj);
        assert_eq!(label_for_score(0.4999), Label::Obj);
    }

    fn random_example(rng: &mut StdRng, dim: HashDim) -> TrainingExample {
        let n = rng.random_range(1..6);
        let features = FeatureVector::from_entries(
            (0..n).map(|_| (rng.random_range(0..dim.size() as u32), rng.random_range(-1.0..1.0))),
        );
        TrainingExample {
            features,
            target: if rng.random_bool(0.5) { 1.0 } else { 0.0 },
            weight: rng.random_range(0.5..2.0),
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let dim = HashDim::from_bits(4).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let h = 1e-5;
        for config in 0..20 {
            let weights: Vec<f64> = (0..dim.size()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let bias = rng.random_range(-1.0..1.0);
            let batch: Vec<_> = (0..rng.random_range(1..8)).map(|_| random_example(&mut rng, dim)).collect();
            let l2 = rng.random_range(0.0..0.1);
            let analytic = loss_and_gradient(&weights, bias, &batch, l2);

            let loss_at = |w: &[f64], b: f64| loss_and_gradient(w, b, &batch, l2).loss;
            let mut numeric = Vec::with_capacity(dim.size() + 1);
            for i in 0..dim.size() {
                let mut plus = weights.clone();
                let mut minus = weights.clone();
                plus[i] += h;
                minus[i] -= h;
                numeric.push((loss_at(&plus, bias) - loss_at(&minus, bias)) / (2.0 * h));
            }
            numeric.push((loss_at(&weights, bias + h) - loss_at(&weights, bias - h)) / (2.0 * h));
            let mut exact = analytic.weights.clone();
            exact.push(analytic.bias);

            let diff = exact.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = exact.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
            assert!(diff / scale < 1e-6, "config {config}: relative error {}", diff / scale);
        }
    }

    fn separable() -> Vec<LabeledSentence> {
        vec![
            LabeledSentence::new("a", "What a glorious outrage this is", Label::Subj),
            LabeledSentence::new("b", "Such glorious outrage from the council", Label::Subj),
            LabeledSentence::new("c", "The ministry published reported figures on Monday", Label::Obj),
            LabeledSentence::new("d", "Reported figures show a two percent rise", Label::Obj),
        ]
    }

    #[test]
    fn separable_data_is_fitted_exactly() {
        let rows = separable();
        let report = fit(&rows, HashDim::default(), Hyperparams::default(), 42).unwrap();
        let texts: Vec<_> = rows.iter().map(|r| r.text.clone()).collect();
        let preds = report.model.predict(&texts);
        for (p, r) in preds.iter().zip(&rows) {
            assert_eq!(p.label, r.label, "{}", r.text);
        }
        assert!(report
            .loss_history
            .windows(2)
            .all(|w| w[1] <= w[0]), "loss increased");
    }

    #[test]
    fn fit_is_deterministic() {
        let a = fit(&separable(), HashDim::default(), Hyperparams::default(), 3).unwrap().model;
        let b = fit(&separable(), HashDim::default(), Hyperparams::default(), 3).unwrap().model;
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
        assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn duplicate_equals_double_weight() {
        let dim = HashDim::from_bits(10).unwrap();
        let a = LabeledSentence::new("a", "glorious outrage everywhere", Label::Subj);
        let b = LabeledSentence::new("b", "reported figures released", Label::Obj);
        let hp = Hyperparams { epochs: 25, ..Hyperparams::default() };
        let dup = fit(&[a.clone(), a.clone(), b.clone()], dim, hp, 1).unwrap().model;
        let mut heavy = TrainingExample::from_sentence(&a, dim);
        heavy.weight = 2.0;
        let weighted = fit_examples(&[heavy, TrainingExample::from_sentence(&b, dim)], dim, hp, 1).unwrap().model;
        assert_eq!(dup.bias.to_bits(), weighted.bias.to_bits());
        assert!(dup.weights.iter().zip(&weighted.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn fit_errors() {
        let rows = vec![LabeledSentence::new("a", "x", Label::Obj)];
        assert!(matches!(fit(&rows, HashDim::default(), Hyperparams::default(), 0), Err(FitError::SingleClass)));
        assert!(matches!(fit(&[], HashDim::default(), Hyperparams::default(), 0), Err(FitError::SingleClass)));
        let bad = Hyperparams { epochs: 0, ..Hyperparams::default() };
        assert!(matches!(fit(&separable(), HashDim::default(), bad, 0), Err(FitError::Hyperparams(_))));
        assert!(HashDim::from_bits(0).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let model = fit(&separable(), HashDim::from_bits(12).unwrap(), Hyperparams::default(), 9).unwrap().model;
        let back = LinearModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
        assert!(LinearModel::from_json("{\"dim_bits\":2,\"bias\":0,\"seed\":0,\"hyperparams\":{\"learning_rate\":0.5,\"l2_penalty\":0,\"epochs\":1},\"weights\":[[9,1.0]]}").is_err());
    }
}
