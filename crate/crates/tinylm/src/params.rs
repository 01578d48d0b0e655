use crate::dims::ModelDims;
use crate::error::TinyLmError;
use crate::Result;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

const CHECKPOINT_MAGIC: &[u8; 8] = b"TINYLM01";
const WEIGHTS_FILE: &str = "weights.bin";
const META_FILE: &str = "model.json";

/// Per-layer weights. Bias-free, RMSNorm gains, SiLU MLP.
#[derive(Debug, Clone)]
pub struct LayerParams {
    pub attn_norm_g: Array1<f64>,
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wv: Array2<f64>,
    pub wo: Array2<f64>,
    pub mlp_norm_g: Array1<f64>,
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Params {
    pub tok_emb: Array2<f64>,
    pub pos_emb: Array2<f64>,
    pub layers: Vec<LayerParams>,
    pub final_norm_g: Array1<f64>,
    pub head: Array2<f64>,
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Array2<f64> {
    // Box-Muller from uniform draws keeps us independent of rand_distr.
    let mut out = Array2::zeros((rows, cols));
    for v in out.iter_mut() {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen::<f64>();
        *v = std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
    out
}

impl Params {
    pub fn init(dims: &ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = 0.02;
        let layers = (0..dims.n_layers)
            .map(|_| LayerParams {
                attn_norm_g: Array1::ones(dims.d_model),
                wq: normal_matrix(&mut rng, dims.d_model, dims.d_model, std),
                wk: normal_matrix(&mut rng, dims.d_model, dims.d_model, std),
                wv: normal_matrix(&mut rng, dims.d_model, dims.d_model, std),
                wo: normal_matrix(&mut rng, dims.d_model, dims.d_model, std),
                mlp_norm_g: Array1::ones(dims.d_model),
                w1: normal_matrix(&mut rng, dims.d_model, dims.d_ff, std),
                w2: normal_matrix(&mut rng, dims.d_ff, dims.d_model, std),
            })
            .collect();
        Self {
            tok_emb: normal_matrix(&mut rng, dims.vocab, dims.d_model, std),
            pos_emb: normal_matrix(&mut rng, dims.max_seq, dims.d_model, std),
            layers,
            final_norm_g: Array1::ones(dims.d_model),
            head: normal_matrix(&mut rng, dims.d_model, dims.vocab, std),
        }
    }

    /// Flat little-endian f64 view in a fixed declared order.
    fn tensors(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        let push2 = |out: &mut Vec<(String, Vec<usize>, Vec<f64>)>, name: String, a: &Array2<f64>| {
            out.push((name, a.shape().to_vec(), a.iter().copied().collect()));
        };
        let push1 = |out: &mut Vec<(String, Vec<usize>, Vec<f64>)>, name: String, a: &Array1<f64>| {
            out.push((name, a.shape().to_vec(), a.iter().copied().collect()));
        };
        push2(&mut out, "tok_emb".into(), &self.tok_emb);
        push2(&mut out, "pos_emb".into(), &self.pos_emb);
        for (i, l) in self.layers.iter().enumerate() {
            push1(&mut out, format!("layers.{i}.attn_norm_g"), &l.attn_norm_g);
            push2(&mut out, format!("layers.{i}.wq"), &l.wq);
            push2(&mut out, format!("layers.{i}.wk"), &l.wk);
            push2(&mut out, format!("layers.{i}.wv"), &l.wv);
            push2(&mut out, format!("layers.{i}.wo"), &l.wo);
            push1(&mut out, format!("layers.{i}.mlp_norm_g"), &l.mlp_norm_g);
            push2(&mut out, format!("layers.{i}.w1"), &l.w1);
            push2(&mut out, format!("layers.{i}.w2"), &l.w2);
        }
        push1(&mut out, "final_norm_g".into(), &self.final_norm_g);
        push2(&mut out, "head".into(), &self.head);
        out
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointMeta {
    format: String,
    dims: ModelDims,
    tensors: Vec<TensorMeta>,
}

#[derive(Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    shape: Vec<usize>,
}

fn io_err(path: &Path, source: std::io::Error) -> TinyLmError {
    TinyLmError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `model.json` (dims + tensor manifest) and `weights.bin`
/// (magic header followed by contiguous little-endian f64 data).
pub fn save_checkpoint(dir: &Path, dims: &ModelDims, params: &Params) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tensors = params.tensors();
    let meta = CheckpointMeta {
        format: "tinylm-v1".to_string(),
        dims: *dims,
        tensors: tensors
            .iter()
            .map(|(name, shape, _)| TensorMeta {
                name: name.clone(),
                shape: shape.clone(),
            })
            .collect(),
    };
    let meta_path = dir.join(META_FILE);
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )
    .map_err(|e| io_err(&meta_path, e))?;

    let weights_path = dir.join(WEIGHTS_FILE);
    let mut f = fs::File::create(&weights_path).map_err(|e| io_err(&weights_path, e))?;
    f.write_all(CHECKPOINT_MAGIC)
        .map_err(|e| io_err(&weights_path, e))?;
    for (_, _, data) in &tensors {
        for v in data {
            f.write_all(&v.to_le_bytes())
                .map_err(|e| io_err(&weights_path, e))?;
        }
    }
    Ok(())
}

pub fn load_checkpoint(dir: &Path) -> Result<(ModelDims, Params)> {
    let bad = |reason: &str| TinyLmError::BadCheckpoint {
        path: dir.to_path_buf(),
        reason: reason.to_string(),
    };
    let meta_path = dir.join(META_FILE);
    let meta_raw = fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: CheckpointMeta =
        serde_json::from_str(&meta_raw).map_err(|e| bad(&format!("invalid {META_FILE}: {e}")))?;
    if meta.format != "tinylm-v1" {
        return Err(bad(&format!("unsupported format '{}'", meta.format)));
    }

    let weights_path = dir.join(WEIGHTS_FILE);
    let mut f = fs::File::open(&weights_path).map_err(|e| io_err(&weights_path, e))?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic).map_err(|e| io_err(&weights_path, e))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("bad magic in weights.bin"));
    }
    let mut raw = Vec::new();
    f.read_to_end(&mut raw).map_err(|e| io_err(&weights_path, e))?;

    let total: usize = meta.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
    if raw.len() != total * 8 {
        return Err(bad(&format!(
            "weights.bin holds {} bytes, manifest expects {}",
            raw.len(),
            total * 8
        )));
    }

    let mut values = Vec::with_capacity(total);
    for chunk in raw.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")));
    }

    let mut cursor = 0usize;
    let mut take1 = |shape: &[usize]| -> Array1<f64> {
        let n = shape[0];
        let a = Array1::from_vec(values[cursor..cursor + n].to_vec());
        cursor += n;
        a
    };
    // Order must match Params::tensors. The manifest names are validated below.
    let expected = expected_tensor_names(&meta.dims);
    let actual: Vec<&str> = meta.tensors.iter().map(|t| t.name.as_str()).collect();
    if expected != actual {
        return Err(bad("tensor manifest does not match the declared dimensions"));
    }

    let d = &meta.dims;
    let mut take2 = |rows: usize, cols: usize| -> Array2<f64> {
        let n = rows * cols;
        let a = Array2::from_shape_vec((rows, cols), values[cursor..cursor + n].to_vec())
            .expect("shape matches length");
        cursor += n;
        a
    };
    let tok_emb = take2(d.vocab, d.d_model);
    let pos_emb = take2(d.max_seq, d.d_model);
    let mut layers = Vec::with_capacity(d.n_layers);
    for _ in 0..d.n_layers {
        let attn_norm_g = take1(&[d.d_model]);
        let wq = take2(d.d_model, d.d_model);
        let wk = take2(d.d_model, d.d_model);
        let wv = take2(d.d_model, d.d_model);
        let wo = take2(d.d_model, d.d_model);
        let mlp_norm_g = take1(&[d.d_model]);
        let w1 = take2(d.d_model, d.d_ff);
        let w2 = take2(d.d_ff, d.d_model);
        layers.push(LayerParams {
            attn_norm_g,
            wq,
            wk,
            wv,
            wo,
            mlp_norm_g,
            w1,
            w2,
        });
    }
    let final_norm_g = take1(&[d.d_model]);
    let head = take2(d.d_model, d.vocab);
    debug_assert_eq!(cursor, total);

    Ok((
        meta.dims,
        Params {
            tok_emb,
            pos_emb,
            layers,
            final_norm_g,
            head,
        },
    ))
}

fn expected_tensor_names(dims: &ModelDims) -> Vec<&'static str> {
    // Leaked once per call is fine at the scale of a checkpoint load.
    let mut names: Vec<&'static str> = vec!["tok_emb", "pos_emb"];
    for i in 0..dims.n_layers {
        for field in [
            "attn_norm_g",
            "wq",
            "wk",
            "wv",
            "wo",
            "mlp_norm_g",
            "w1",
            "w2",
        ] {
            names.push(Box::leak(format!("layers.{i}.{field}").into_boxed_str()));
        }
    }
    names.push("final_norm_g");
    names.push("head");
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let dims = ModelDims::tiny_test();
        let a = Params::init(&dims, 7);
        let b = Params::init(&dims, 7);
        assert_eq!(a.tok_emb, b.tok_emb);
        assert_eq!(a.layers[0].wq, b.layers[0].wq);
        let c = Params::init(&dims, 8);
        assert_ne!(a.tok_emb, c.tok_emb);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dims = ModelDims::tiny_test();
        let params = Params::init(&dims, 3);
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &dims, &params).unwrap();
        let (dims2, params2) = load_checkpoint(dir.path()).unwrap();
        assert_eq!(dims, dims2);
        assert_eq!(params.tok_emb, params2.tok_emb);
        assert_eq!(params.head, params2.head);
        assert_eq!(params.layers[1].w2, params2.layers[1].w2);
    }

    #[test]
    fn load_rejects_truncated_weights() {
        let dims = ModelDims::tiny_test();
        let params = Params::init(&dims, 3);
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(dir.path(), &dims, &params).unwrap();
        let weights = dir.path().join("weights.bin");
        let raw = fs::read(&weights).unwrap();
        fs::write(&weights, &raw[..raw.len() - 9]).unwrap();
        assert!(matches!(
            load_checkpoint(dir.path()),
            Err(TinyLmError::BadCheckpoint { .. })
        ));
    }
}
