//! A deterministic, desk-scale decoder-only transformer over raw bytes.
//!
//! The model is intentionally small (well under a million parameters at the
//! default dimensions) and runs in pure Rust with `f64` arithmetic, so greedy
//! decoding, activation capture, and LoRA fine-tuning are exactly reproducible
//! run to run. It exists to back evaluation harnesses that need a real
//! generate/capture/finetune backend without GPU infrastructure.
//!
//! Tokens are bytes: the vocabulary is fixed at 256 and "n tokens" means
//! "n bytes". Completions are decoded with lossy UTF-8.

mod adamw;
mod dims;
mod error;
mod lora;
mod model;
mod params;
mod train;

pub use dims::ModelDims;
pub use error::TinyLmError;
pub use lora::LoraAdapters;
pub use model::{PositionSelector, TinyLm};
pub use train::{LoraTrainConfig, StepLoss, TrainReport};

pub type Result<T> = std::result::Result<T, TinyLmError>;
