//! Corrective LLM data augmentation for sentence subjectivity detection:
//! corpus I/O, a rate-limited chat gateway, style-controlled paraphrasing,
//! self-correction, augmented dataset assembly, macro-F1 evaluation and a
//! hashed-feature logistic regression baseline.

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod correct;
pub mod dataset;
pub mod eval;
pub mod gateway;
pub mod pipeline;
pub mod predictions;
pub mod tables;
pub mod template;
pub mod trainer;

pub use corpus::{Label, LabeledSentence, SplitStats};
pub use eval::{evaluate, EvalReport};
pub use gateway::{ChatRequest, ChatResponse, Gateway, GatewayConfig};
