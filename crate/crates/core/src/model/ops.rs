//! Shared tensor primitives: norms, activations, softmax, rotary rotation.

use ndarray::{Array1, Array2, ArrayView1};

/// Tanh-form GELU.
pub fn gelu(x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    0.5 * x * (1.0 + (c * (x + 0.044715 * x * x * x)).tanh())
}

/// SiLU (sigmoid-weighted linear unit).
pub fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

/// Row-wise softmax with max-subtraction; `-inf` entries get weight zero.
pub fn softmax_rows(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            row.fill(0.0);
            continue;
        }
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// RMS normalization: `gamma .* x / sqrt(mean(x^2) + eps)`.
pub fn rmsnorm(x: ArrayView1<f64>, gamma: ArrayView1<f64>, eps: f64) -> Array1<f64> {
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let denom = (mean_sq + eps).sqrt();
    Array1::from_iter(x.iter().zip(gamma.iter()).map(|(v, g)| g * v / denom))
}

/// Standard LayerNorm with learned scale and shift.
pub fn layer_norm(
    x: ArrayView1<f64>,
    gamma: ArrayView1<f64>,
    beta: ArrayView1<f64>,
    eps: f64,
) -> Array1<f64> {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let denom = (var + eps).sqrt();
    Array1::from_iter(
        x.iter()
            .zip(gamma.iter())
            .zip(beta.iter())
            .map(|((v, g), b)| g * (v - mean) / denom + b),
    )
}

/// Gated Up/Down MLP: `(silu(X W_gate + b_gate) .* (X W_up + b_up)) W_down + b_down`.
pub fn gated_mlp(x: &Array2<f64>, p: &super::GatedMlpParams) -> Array2<f64> {
    let up = x.dot(&p.w_up) + &p.b_up;
    let gate = (x.dot(&p.w_gate) + &p.b_gate).mapv(silu);
    (gate * up).dot(&p.w_down) + &p.b_down
}

/// Rotary rotation of one head-dimension row in place. Pairs `(2i, 2i+1)`
/// rotate by `pos * base^(-2i/d)`.
pub fn rope_rotate(row: &mut [f64], pos: usize, base: f64) {
    let d = row.len();
    for i in 0..d / 2 {
        let theta = pos as f64 * base.powf(-2.0 * i as f64 / d as f64);
        let (sin, cos) = theta.sin_cos();
        let a = row[2 * i];
        let b = row[2 * i + 1];
        row[2 * i] = a * cos - b * sin;
        row[2 * i + 1] = a * sin + b * cos;
    }
}

pub const ROPE_BASE: f64 = 10_000.0;
