use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum TinyLmError {
    #[error("empty prompt: the model needs at least one input byte")]
    EmptyPrompt,

    #[error("empty corpus: nothing to train on")]
    EmptyCorpus,

    #[error("layer index {layer} out of range for a {layer_count}-layer model")]
    LayerOutOfRange { layer: usize, layer_count: usize },

    #[error("position {position} out of range for a {len}-token prompt")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("non-finite training loss at step {step}")]
    NonFiniteLoss { step: usize },

    #[error("checkpoint at {path}: {reason}")]
    BadCheckpoint { path: PathBuf, reason: String },

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
