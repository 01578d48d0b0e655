use serde::{Deserialize, Serialize};

/// Architecture dimensions. Byte-level models keep `vocab = 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub vocab: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_seq: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            vocab: 256,
            d_model: 64,
            n_heads: 4,
            n_layers: 4,
            d_ff: 256,
            max_seq: 128,
        }
    }
}

impl ModelDims {
    pub fn head_dim(&self) -> usize {
        debug_assert_eq!(self.d_model % self.n_heads, 0);
        self.d_model / self.n_heads
    }

    /// A smaller configuration for fast unit tests.
    pub fn tiny_test() -> Self {
        Self {
            vocab: 256,
            d_model: 16,
            n_heads: 2,
            n_layers: 2,
            d_ff: 32,
            max_seq: 32,
        }
    }
}
