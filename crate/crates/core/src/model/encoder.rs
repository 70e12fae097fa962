//! Patch tokenization, ViT encoder blocks, and the linear adapter.

use super::ops::{gelu, layer_norm, softmax_rows};
use super::params::{EncoderLayerParams, ModelParams};
use crate::error::{Error, Result};
use ndarray::{s, Array2};

/// Split a channels-last image into non-overlapping `patch x patch` tiles,
/// flattened row-major (row, column, channel), in row-major patch order.
/// Returns an `M x (patch*patch*channels)` matrix.
pub fn patchify(
    pixels: &[f64],
    height: usize,
    width: usize,
    channels: usize,
    patch: usize,
) -> Result<Array2<f64>> {
    if patch == 0 || height % patch != 0 || width % patch != 0 {
        return Err(Error::Input(format!(
            "image {height}x{width} not divisible by patch {patch}"
        )));
    }
    if pixels.len() != height * width * channels {
        return Err(Error::Input("pixel buffer does not match dimensions".into()));
    }
    let rows = height / patch;
    let cols = width / patch;
    let dim = patch * patch * channels;
    let mut out = Array2::zeros((rows * cols, dim));
    for pr in 0..rows {
        for pc in 0..cols {
            let m = pr * cols + pc;
            for dy in 0..patch {
                for dx in 0..patch {
                    for ch in 0..channels {
                        let src = ((pr * patch + dy) * width + (pc * patch + dx)) * channels + ch;
                        let dst = (dy * patch + dx) * channels + ch;
                        out[(m, dst)] = pixels[src];
                    }
                }
            }
        }
    }
    Ok(out)
}

fn layer_norm_rows(
    x: &Array2<f64>,
    gamma: &ndarray::Array1<f64>,
    beta: &ndarray::Array1<f64>,
    eps: f64,
) -> Array2<f64> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let normed = layer_norm(row.view(), gamma.view(), beta.view(), eps);
        row.assign(&normed);
    }
    out
}

/// Bidirectional multi-head self-attention over fused head projections.
fn mha(u: &Array2<f64>, layer: &EncoderLayerParams, heads: usize) -> Array2<f64> {
    let d_head = layer.w_q.ncols() / heads;
    let q = u.dot(&layer.w_q);
    let k = u.dot(&layer.w_k);
    let v = u.dot(&layer.w_v);
    let m = u.nrows();
    let mut concat = Array2::zeros((m, heads * d_head));
    let scale = 1.0 / (d_head as f64).sqrt();
    for h in 0..heads {
        let cols = s![.., h * d_head..(h + 1) * d_head];
        let qh = q.slice(cols);
        let kh = k.slice(cols);
        let vh = v.slice(cols);
        let scores = qh.dot(&kh.t()) * scale;
        let attn = softmax_rows(&scores);
        let out = attn.dot(&vh);
        concat.slice_mut(cols).assign(&out);
    }
    concat.dot(&layer.w_o)
}

fn mlp(x: &Array2<f64>, layer: &EncoderLayerParams) -> Array2<f64> {
    let hidden = (x.dot(&layer.mlp_w1) + &layer.mlp_b1).mapv(gelu);
    hidden.dot(&layer.mlp_w2) + &layer.mlp_b2
}

/// ViT encoder: patch projection, learned absolute positions, then
/// pre-norm blocks (attention, MLP, each residual). No class token; all
/// `M` patch tokens come out as the latent sequence.
pub fn vit_forward(patches: &Array2<f64>, params: &ModelParams) -> Result<Array2<f64>> {
    let m = patches.nrows();
    if m > params.pos_table.nrows() {
        return Err(Error::Input(format!(
            "{m} patches exceed the positional table ({})",
            params.pos_table.nrows()
        )));
    }
    if patches.ncols() != params.patch_proj.nrows() {
        return Err(Error::Input("patch vector length mismatch".into()));
    }
    let eps = params.dims.eps;
    let embedded = patches.dot(&params.patch_proj);
    let mut z = embedded + params.pos_table.slice(s![..m, ..]);
    for layer in &params.encoder {
        let normed = layer_norm_rows(&z, &layer.ln1_gamma, &layer.ln1_beta, eps);
        z = z + mha(&normed, layer, params.dims.enc_heads);
        let normed = layer_norm_rows(&z, &layer.ln2_gamma, &layer.ln2_beta, eps);
        z = z + mlp(&normed, layer);
    }
    Ok(z)
}

/// Linear adapter into the decoder embedding space.
pub fn adapter(h: &Array2<f64>, params: &ModelParams) -> Array2<f64> {
    h.dot(&params.w_proj) + &params.b_proj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelDims, ModelParams};
    use approx::assert_relative_eq;
    use ndarray::Array1;

    fn toy_params(m: usize) -> ModelParams {
        ModelParams::init(ModelDims::toy(), m, 42).unwrap()
    }

    #[test]
    fn patchify_whole_image_single_patch() {
        let pixels: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let p = patchify(&pixels, 4, 4, 1, 4).unwrap();
        assert_eq!(p.nrows(), 1);
        assert_eq!(p.row(0).to_vec(), pixels);
    }

    #[test]
    fn patchify_matches_hand_indexed_oracle_2x2() {
        // 4x4 single-channel image, patch 2 -> 4 patches.
        let pixels: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let p = patchify(&pixels, 4, 4, 1, 2).unwrap();
        assert_eq!(p.nrows(), 4);
        // Patch (0,0): rows 0-1, cols 0-1.
        assert_eq!(p.row(0).to_vec(), vec![0.0, 1.0, 4.0, 5.0]);
        // Patch (0,1): rows 0-1, cols 2-3.
        assert_eq!(p.row(1).to_vec(), vec![2.0, 3.0, 6.0, 7.0]);
        // Patch (1,0): rows 2-3, cols 0-1.
        assert_eq!(p.row(2).to_vec(), vec![8.0, 9.0, 12.0, 13.0]);
        assert_eq!(p.row(3).to_vec(), vec![10.0, 11.0, 14.0, 15.0]);
    }

    #[test]
    fn patchify_rejects_indivisible_sides() {
        let pixels = vec![0.0; 15 * 14];
        assert!(patchify(&pixels, 15, 14, 1, 14).is_err());
    }

    #[test]
    fn zero_layers_output_is_embedding_plus_positions() {
        let dims = ModelDims {
            enc_layers: 0,
            ..ModelDims::toy()
        };
        let params = ModelParams::init(dims, 4, 7).unwrap();
        let patches = Array2::from_shape_fn((4, 4), |(i, j)| (i + j) as f64 * 0.1);
        let out = vit_forward(&patches, &params).unwrap();
        let want = patches.dot(&params.patch_proj) + params.pos_table.slice(s![..4, ..]);
        for (a, b) in out.iter().zip(want.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_token_attention_is_value_projection() {
        // Softmax over a singleton is 1, so MHA reduces to V * W_O.
        let params = toy_params(1);
        let layer = &params.encoder[0];
        let u = Array2::from_shape_fn((1, 16), |(_, j)| 0.3 - j as f64 * 0.01);
        let got = mha(&u, layer, params.dims.enc_heads);
        let want = u.dot(&layer.w_v).dot(&layer.w_o);
        for (a, b) in got.iter().zip(want.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn mha_matches_dense_einsum_oracle() {
        // M=3, d=4, H=1 against an explicit-loop oracle.
        let m = 3;
        let d = 4;
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let layer = EncoderLayerParams {
            w_q: Array2::from_shape_fn((d, d), |_| next()),
            w_k: Array2::from_shape_fn((d, d), |_| next()),
            w_v: Array2::from_shape_fn((d, d), |_| next()),
            w_o: Array2::from_shape_fn((d, d), |_| next()),
            ln1_gamma: Array1::ones(d),
            ln1_beta: Array1::zeros(d),
            ln2_gamma: Array1::ones(d),
            ln2_beta: Array1::zeros(d),
            mlp_w1: Array2::zeros((d, 4 * d)),
            mlp_b1: Array1::zeros(4 * d),
            mlp_w2: Array2::zeros((4 * d, d)),
            mlp_b2: Array1::zeros(d),
        };
        let u = Array2::from_shape_fn((m, d), |_| next());
        let got = mha(&u, &layer, 1);

        // Oracle: naive loops.
        let q = u.dot(&layer.w_q);
        let k = u.dot(&layer.w_k);
        let v = u.dot(&layer.w_v);
        let mut attn = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                let mut dot = 0.0;
                for c in 0..d {
                    dot += q[(i, c)] * k[(j, c)];
                }
                attn[(i, j)] = dot / (d as f64).sqrt();
            }
        }
        for i in 0..m {
            let mx = (0..m).map(|j| attn[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for j in 0..m {
                attn[(i, j)] = (attn[(i, j)] - mx).exp();
                total += attn[(i, j)];
            }
            for j in 0..m {
                attn[(i, j)] /= total;
            }
        }
        let want = attn.dot(&v).dot(&layer.w_o);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn adapter_is_affine_and_linear_without_bias() {
        let mut params = toy_params(4);
        params.b_proj.fill(0.0);
        let h1 = Array2::from_shape_fn((2, 16), |(i, j)| (i * 16 + j) as f64 * 0.01);
        let h2 = Array2::from_shape_fn((2, 16), |(i, j)| ((i + j) % 3) as f64 * 0.1);
        let lhs = adapter(&(2.0 * &h1 + 3.0 * &h2), &params);
        let rhs = 2.0 * adapter(&h1, &params) + 3.0 * adapter(&h2, &params);
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn adapter_identity_padding_copies_embedding() {
        let mut params = toy_params(4);
        params.w_proj.fill(0.0);
        for i in 0..16 {
            params.w_proj[(i, i)] = 1.0;
        }
        params.b_proj.fill(0.0);
        let h = Array2::from_shape_fn((3, 16), |(i, j)| (i as f64) - (j as f64) * 0.5);
        let r = adapter(&h, &params);
        assert_eq!(r.ncols(), 24);
        for i in 0..3 {
            for j in 0..16 {
                assert_eq!(r[(i, j)], h[(i, j)]);
            }
            for j in 16..24 {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn adapter_matches_matmul_oracle() {
        let params = toy_params(4);
        let h = Array2::from_shape_fn((2, 16), |(i, j)| ((i * 31 + j * 7) % 13) as f64 * 0.05);
        let r = adapter(&h, &params);
        for i in 0..2 {
            for c in 0..24 {
                let mut acc = params.b_proj[c];
                for j in 0..16 {
                    acc += h[(i, j)] * params.w_proj[(j, c)];
                }
                assert!((r[(i, c)] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permuting_tokens_with_positions_permutes_outputs() {
        let params = toy_params(4);
        let patches = Array2::from_shape_fn((4, 4), |(i, j)| (i * 4 + j) as f64 * 0.07);
        let base = vit_forward(&patches, &params).unwrap();

        let perm = [2usize, 0, 3, 1];
        let mut permuted_patches = Array2::zeros((4, 4));
        let mut permuted_params = params.clone();
        for (dst, &src) in perm.iter().enumerate() {
            permuted_patches.row_mut(dst).assign(&patches.row(src));
            permuted_params
                .pos_table
                .row_mut(dst)
                .assign(&params.pos_table.row(src));
        }
        let permuted_out = vit_forward(&permuted_patches, &permuted_params).unwrap();
        for (dst, &src) in perm.iter().enumerate() {
            for c in 0..base.ncols() {
                let d = (permuted_out[(dst, c)] - base[(src, c)]).abs();
                assert!(d < 1e-9, "row {dst} col {c}: {d}");
            }
        }
    }
}
