//! Forward-only reference implementation of the spectrogram-conditioned
//! transformer: patch tokenization, ViT encoder, linear adapter, causal GQA
//! decoder with RMSNorm and a gated MLP, the conditional next-token
//! distribution, and the answer-masked SFT loss.
//!
//! Everything runs in `f64` so tests can compare against dense oracles at
//! 1e-9. No backpropagation; the loss is computed for evaluation only.

mod decoder;
mod encoder;
mod ops;
mod params;

pub use decoder::{decoder_forward, gqa_causal, greedy_decode, sft_loss};
pub use encoder::{adapter, patchify, vit_forward};
pub use ops::{gated_mlp, gelu, layer_norm, rmsnorm, rope_rotate, silu, softmax_rows};
pub use params::{
    DecoderLayerParams, EncoderLayerParams, GatedMlpParams, ModelDims, ModelParams,
};

use crate::error::{Error, Result};

/// Byte-level toy vocabulary: token id = byte value, |V| = 256.
pub const BYTE_VOCAB_SIZE: usize = 256;

/// Encode text as byte token ids.
pub fn byte_tokenize(text: &str) -> Vec<usize> {
    text.bytes().map(|b| b as usize).collect()
}

/// Number of patch tokens for an image with the given sides.
pub fn token_count(height: usize, width: usize, patch: usize) -> Result<usize> {
    if patch == 0 || height % patch != 0 || width % patch != 0 {
        return Err(Error::Input(format!(
            "image {height}x{width} not divisible by patch {patch}"
        )));
    }
    Ok((height / patch) * (width / patch))
}
