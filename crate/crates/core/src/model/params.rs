//! Model dimensions and seeded parameter initialization.

use crate::error::{Error, Result};
use crate::rng::stream;
use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dimension record for the full encoder/adapter/decoder stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Patch side in pixels.
    pub patch: usize,
    /// Image channels.
    pub channels: usize,
    /// Encoder width.
    pub d_enc: usize,
    /// Encoder layers.
    pub enc_layers: usize,
    /// Encoder attention heads.
    pub enc_heads: usize,
    /// Decoder width.
    pub d_lm: usize,
    /// Decoder layers.
    pub lm_layers: usize,
    /// Query heads.
    pub h_q: usize,
    /// Key-value heads.
    pub h_k: usize,
    /// Head dimension.
    pub d_k: usize,
    /// Gated-MLP hidden width.
    pub d_ff: usize,
    /// Vocabulary size.
    pub vocab: usize,
    /// Norm epsilon.
    pub eps: f64,
    /// Apply rotary embeddings to decoder Q/K (contiguous positions over
    /// the joint RF+text sequence).
    pub rope: bool,
}

impl ModelDims {
    /// Toy dimensions used by the property suite.
    pub fn toy() -> Self {
        ModelDims {
            patch: 2,
            channels: 1,
            d_enc: 16,
            enc_layers: 2,
            enc_heads: 2,
            d_lm: 24,
            lm_layers: 2,
            h_q: 4,
            h_k: 2,
            d_k: 6,
            vocab: 256,
            d_ff: 48,
            eps: 1e-8,
            rope: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_q < self.h_k {
            return Err(Error::Input("h_q must be >= h_k".into()));
        }
        if self.h_k == 0 || self.h_q % self.h_k != 0 {
            return Err(Error::Input("h_q must be a positive multiple of h_k".into()));
        }
        if self.enc_heads == 0 || self.d_enc % self.enc_heads != 0 {
            return Err(Error::Input("d_enc must split evenly over enc_heads".into()));
        }
        if self.eps <= 0.0 {
            return Err(Error::Input("eps must be positive".into()));
        }
        Ok(())
    }

    /// Key-value group index of a query head (1-based heads):
    /// `g(h) = floor((h-1)/r) + 1` with `r = h_q / h_k`.
    pub fn kv_group(&self, query_head: usize) -> usize {
        let r = self.h_q / self.h_k;
        (query_head - 1) / r + 1
    }
}

#[derive(Debug, Clone)]
pub struct EncoderLayerParams {
    // Per-head projections stored fused: d_enc x d_enc.
    pub w_q: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
    pub w_o: Array2<f64>,
    pub ln1_gamma: Array1<f64>,
    pub ln1_beta: Array1<f64>,
    pub ln2_gamma: Array1<f64>,
    pub ln2_beta: Array1<f64>,
    pub mlp_w1: Array2<f64>,
    pub mlp_b1: Array1<f64>,
    pub mlp_w2: Array2<f64>,
    pub mlp_b2: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct GatedMlpParams {
    pub w_up: Array2<f64>,
    pub b_up: Array1<f64>,
    pub w_gate: Array2<f64>,
    pub b_gate: Array1<f64>,
    pub w_down: Array2<f64>,
    pub b_down: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct DecoderLayerParams {
    /// d_lm x (h_q * d_k)
    pub w_q: Array2<f64>,
    /// d_lm x (h_k * d_k)
    pub w_k: Array2<f64>,
    /// d_lm x (h_k * d_k)
    pub w_v: Array2<f64>,
    /// (h_q * d_k) x d_lm
    pub w_o: Array2<f64>,
    pub norm1_gamma: Array1<f64>,
    pub norm2_gamma: Array1<f64>,
    pub mlp: GatedMlpParams,
}

/// All trainable tensors, deterministically initialized from a seed:
/// projection weights uniform in [-0.02, 0.02], biases zero, norm scales
/// one.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub dims: ModelDims,
    /// Patch projection: (P*P*C) x d_enc (row-vector convention).
    pub patch_proj: Array2<f64>,
    /// Learned absolute position table for `max_tokens` patch positions.
    pub pos_table: Array2<f64>,
    pub encoder: Vec<EncoderLayerParams>,
    /// Adapter: d_enc x d_lm plus bias.
    pub w_proj: Array2<f64>,
    pub b_proj: Array1<f64>,
    /// Token embedding table: vocab x d_lm.
    pub tok_table: Array2<f64>,
    pub decoder: Vec<DecoderLayerParams>,
    /// Output head: d_lm x vocab.
    pub head: Array2<f64>,
}

pub const INIT_SCALE: f64 = 0.02;

fn uniform(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-INIT_SCALE..=INIT_SCALE))
}

impl ModelParams {
    /// Seeded initialization for images carrying up to `max_tokens` patches.
    pub fn init(dims: ModelDims, max_tokens: usize, seed: u64) -> Result<Self> {
        dims.validate()?;
        let mut rng = stream(seed, "model-init", 0);
        let rng = &mut rng;
        let patch_dim = dims.patch * dims.patch * dims.channels;
        let d_head_enc = dims.d_enc / dims.enc_heads;
        let encoder = (0..dims.enc_layers)
            .map(|_| EncoderLayerParams {
                w_q: uniform(rng, dims.d_enc, dims.enc_heads * d_head_enc),
                w_k: uniform(rng, dims.d_enc, dims.enc_heads * d_head_enc),
                w_v: uniform(rng, dims.d_enc, dims.enc_heads * d_head_enc),
                w_o: uniform(rng, dims.enc_heads * d_head_enc, dims.d_enc),
                ln1_gamma: Array1::ones(dims.d_enc),
                ln1_beta: Array1::zeros(dims.d_enc),
                ln2_gamma: Array1::ones(dims.d_enc),
                ln2_beta: Array1::zeros(dims.d_enc),
                mlp_w1: uniform(rng, dims.d_enc, 4 * dims.d_enc),
                mlp_b1: Array1::zeros(4 * dims.d_enc),
                mlp_w2: uniform(rng, 4 * dims.d_enc, dims.d_enc),
                mlp_b2: Array1::zeros(dims.d_enc),
            })
            .collect();
        let decoder = (0..dims.lm_layers)
            .map(|_| DecoderLayerParams {
                w_q: uniform(rng, dims.d_lm, dims.h_q * dims.d_k),
                w_k: uniform(rng, dims.d_lm, dims.h_k * dims.d_k),
                w_v: uniform(rng, dims.d_lm, dims.h_k * dims.d_k),
                w_o: uniform(rng, dims.h_q * dims.d_k, dims.d_lm),
                norm1_gamma: Array1::ones(dims.d_lm),
                norm2_gamma: Array1::ones(dims.d_lm),
                mlp: GatedMlpParams {
                    w_up: uniform(rng, dims.d_lm, dims.d_ff),
                    b_up: Array1::zeros(dims.d_ff),
                    w_gate: uniform(rng, dims.d_lm, dims.d_ff),
                    b_gate: Array1::zeros(dims.d_ff),
                    w_down: uniform(rng, dims.d_ff, dims.d_lm),
                    b_down: Array1::zeros(dims.d_lm),
                },
            })
            .collect();
        Ok(ModelParams {
            dims,
            patch_proj: uniform(rng, patch_dim, dims.d_enc),
            pos_table: uniform(rng, max_tokens, dims.d_enc),
            encoder,
            w_proj: uniform(rng, dims.d_enc, dims.d_lm),
            b_proj: Array1::zeros(dims.d_lm),
            tok_table: uniform(rng, dims.vocab, dims.d_lm),
            decoder,
            head: uniform(rng, dims.d_lm, dims.vocab),
        })
    }
}
