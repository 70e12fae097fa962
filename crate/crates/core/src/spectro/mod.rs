//! Spectrogram engine: windowed STFT, dB compression, image rendering.
//!
//! Default configuration mirrors the experiment constants: Blackman window,
//! FFT size 512, window length 512, hop 512 (disjoint frames), no centering,
//! FFT shift along the frequency axis.

mod render;

pub use render::{render_image, RenderConfig, RenderedImage, VIRIDIS_LUT};

use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Blackman,
    Hann,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub fft_size: usize,
    pub win_len: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub centered: bool,
    pub fft_shift: bool,
    pub epsilon: f64,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            fft_size: 512,
            win_len: 512,
            hop: 512,
            window: WindowKind::Blackman,
            centered: false,
            fft_shift: true,
            epsilon: 1e-12,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.win_len > self.fft_size {
            return Err(Error::Input("win_len must be <= fft_size".into()));
        }
        if self.hop == 0 {
            return Err(Error::Input("hop must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Input("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Window coefficients. Blackman and Hann are the symmetric (textbook)
/// forms.
pub fn window_coeffs(kind: WindowKind, len: usize) -> Vec<f64> {
    let denom = (len - 1).max(1) as f64;
    (0..len)
        .map(|n| {
            let x = n as f64 / denom;
            match kind {
                WindowKind::Blackman => {
                    0.42 - 0.5 * (2.0 * PI * x).cos() + 0.08 * (4.0 * PI * x).cos()
                }
                WindowKind::Hann => 0.5 * (1.0 - (2.0 * PI * x).cos()),
                WindowKind::Rect => 1.0,
            }
        })
        .collect()
}

/// Complex STFT grid: `fft_size` frequency rows by `T` frame columns.
#[derive(Debug, Clone)]
pub struct ComplexStft {
    pub values: Array2<Complex64>,
    pub fs: f64,
    /// Frame center times in seconds.
    pub frame_times: Vec<f64>,
    /// Row frequencies in Hz (negative first when shifted).
    pub bin_freqs: Vec<f64>,
    pub shifted: bool,
}

/// dB magnitude grid with the same geometry.
#[derive(Debug, Clone)]
pub struct SpectrogramGrid {
    pub values: Array2<f64>,
    pub fs: f64,
    pub frame_times: Vec<f64>,
    pub bin_freqs: Vec<f64>,
}

/// Row frequencies for an FFT of size `f` at rate `fs`.
fn bin_freqs(f: usize, fs: f64, shifted: bool) -> Vec<f64> {
    (0..f)
        .map(|row| {
            let k = if shifted {
                row as i64 - (f / 2) as i64
            } else if row < f.div_ceil(2) {
                row as i64
            } else {
                row as i64 - f as i64
            };
            k as f64 * fs / f as f64
        })
        .collect()
}

/// Windowed short-time Fourier transform.
///
/// Frame `t` covers samples `[t*hop, t*hop + win_len)`; the frame count is
/// `floor((len - win_len)/hop) + 1` (with `centered`, the buffer is first
/// zero-padded by `win_len/2` on both sides). Windows shorter than
/// `fft_size` are zero-padded. With `fft_shift`, rows are reordered so
/// negative frequencies come first.
pub fn stft(iq: &[Complex64], fs: f64, cfg: &StftConfig) -> Result<ComplexStft> {
    cfg.validate()?;
    let padded;
    let buffer: &[Complex64] = if cfg.centered {
        let pad = cfg.win_len / 2;
        let mut v = vec![Complex64::new(0.0, 0.0); iq.len() + 2 * pad];
        v[pad..pad + iq.len()].copy_from_slice(iq);
        padded = v;
        &padded
    } else {
        iq
    };
    if buffer.len() < cfg.win_len {
        return Err(Error::Input(format!(
            "buffer of {} samples shorter than one window ({})",
            buffer.len(),
            cfg.win_len
        )));
    }
    let frames = (buffer.len() - cfg.win_len) / cfg.hop + 1;
    let f = cfg.fft_size;
    let win = window_coeffs(cfg.window, cfg.win_len);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(f);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let mut values = Array2::from_elem((f, frames), Complex64::new(0.0, 0.0));
    let mut work = vec![Complex64::new(0.0, 0.0); f];
    for t in 0..frames {
        let start = t * cfg.hop;
        for (n, w) in win.iter().enumerate() {
            work[n] = buffer[start + n] * w;
        }
        for slot in work.iter_mut().skip(cfg.win_len) {
            *slot = Complex64::new(0.0, 0.0);
        }
        fft.process_with_scratch(&mut work, &mut scratch);
        for (k, &v) in work.iter().enumerate() {
            let row = if cfg.fft_shift { (k + f / 2) % f } else { k };
            // shifted[row] = X[(row + f/2) mod f]  <=>  X[k] lands on
            // row (k - f/2) mod f == (k + f/2) mod f for even f.
            values[(row, t)] = v;
        }
    }

    let frame_times = (0..frames)
        .map(|t| {
            let start = t as f64 * cfg.hop as f64;
            let center = start + cfg.win_len as f64 / 2.0;
            let offset = if cfg.centered { cfg.win_len as f64 / 2.0 } else { 0.0 };
            (center - offset) / fs
        })
        .collect();

    Ok(ComplexStft {
        values,
        fs,
        frame_times,
        bin_freqs: bin_freqs(f, fs, cfg.fft_shift),
        shifted: cfg.fft_shift,
    })
}

/// Log compression: `A_dB = 10*log10(|S|^2 + epsilon)`.
pub fn to_db(s: &ComplexStft, epsilon: f64) -> SpectrogramGrid {
    SpectrogramGrid {
        values: s.values.mapv(|v| 10.0 * (v.norm_sqr() + epsilon).log10()),
        fs: s.fs,
        frame_times: s.frame_times.clone(),
        bin_freqs: s.bin_freqs.clone(),
    }
}

/// Full pipeline: STFT then dB compression with the config's epsilon.
pub fn spectrogram(iq: &[Complex64], fs: f64, cfg: &StftConfig) -> Result<SpectrogramGrid> {
    Ok(to_db(&stft(iq, fs, cfg)?, cfg.epsilon))
}

/// Shifted row index a tone at frequency `f` should peak at.
pub fn expected_tone_row(f: f64, fs: f64, fft_size: usize) -> usize {
    let k = (f / fs * fft_size as f64).round() as i64;
    (k + fft_size as i64 / 2).rem_euclid(fft_size as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(fs: f64, f: f64, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / fs))
            .collect()
    }

    /// Naive DFT oracle (independent of rustfft).
    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &v) in x.iter().enumerate() {
                    acc += v
                        * Complex64::from_polar(
                            1.0,
                            -2.0 * PI * (k * i) as f64 / n as f64,
                        );
                }
                acc
            })
            .collect()
    }

    #[test]
    fn all_zero_input_gives_zero_grid() {
        let cfg = StftConfig::default();
        let x = vec![Complex64::new(0.0, 0.0); 1024];
        let s = stft(&x, 1e6, &cfg).unwrap();
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn quarter_rate_tone_lands_on_row_384() {
        let fs = 1e6;
        let cfg = StftConfig {
            window: WindowKind::Rect,
            ..StftConfig::default()
        };
        let x = tone(fs, fs / 4.0, 512);
        let s = stft(&x, fs, &cfg).unwrap();
        let col = s.values.column(0);
        let peak = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 384);
        assert_eq!(expected_tone_row(fs / 4.0, fs, 512), 384);
        // Pre-shift the same tone sits on bin 128.
        let cfg_noshift = StftConfig {
            fft_shift: false,
            ..cfg
        };
        let s2 = stft(&x, fs, &cfg_noshift).unwrap();
        let peak2 = s2
            .values
            .column(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak2, 128);
    }

    #[test]
    fn default_frames_are_disjoint() {
        let cfg = StftConfig::default();
        assert_eq!(cfg.hop, 512);
        assert_eq!(cfg.win_len, 512);
        let x = tone(1e6, 1000.0, 512 * 3 + 100);
        let s = stft(&x, 1e6, &cfg).unwrap();
        assert_eq!(s.values.ncols(), 3);
    }

    #[test]
    fn frame_count_formula() {
        let cfg = StftConfig {
            fft_size: 64,
            win_len: 64,
            hop: 16,
            ..StftConfig::default()
        };
        let x = tone(1e6, 0.0, 256);
        let s = stft(&x, 1e6, &cfg).unwrap();
        assert_eq!(s.values.ncols(), (256 - 64) / 16 + 1);
    }

    #[test]
    fn too_short_buffer_is_input_error() {
        let cfg = StftConfig::default();
        let x = tone(1e6, 0.0, 100);
        assert!(matches!(stft(&x, 1e6, &cfg), Err(Error::Input(_))));
    }

    #[test]
    fn matches_naive_dft_oracle_small_fft() {
        let fs = 48_000.0;
        let cfg = StftConfig {
            fft_size: 32,
            win_len: 32,
            hop: 32,
            window: WindowKind::Blackman,
            centered: false,
            fft_shift: false,
            epsilon: 1e-12,
        };
        let x: Vec<Complex64> = (0..64)
            .map(|i| {
                Complex64::new(
                    (0.13 * i as f64).sin() + 0.2,
                    (0.29 * i as f64).cos() - 0.1,
                )
            })
            .collect();
        let s = stft(&x, fs, &cfg).unwrap();
        let win = window_coeffs(WindowKind::Blackman, 32);
        for t in 0..2 {
            let frame: Vec<Complex64> = (0..32).map(|n| x[t * 32 + n] * win[n]).collect();
            let oracle = naive_dft(&frame);
            for k in 0..32 {
                let d = (s.values[(k, t)] - oracle[k]).norm();
                assert!(d < 1e-9, "frame {t} bin {k}: {d}");
            }
        }
    }

    #[test]
    fn frame_parseval_vs_windowed_energy() {
        let fs = 48_000.0;
        for f in [16usize, 32, 64] {
            let cfg = StftConfig {
                fft_size: f,
                win_len: f,
                hop: f,
                window: WindowKind::Blackman,
                centered: false,
                fft_shift: true,
                epsilon: 1e-12,
            };
            let x: Vec<Complex64> = (0..f * 2)
                .map(|i| Complex64::new((0.7 * i as f64).sin(), (0.11 * i as f64).cos()))
                .collect();
            let s = stft(&x, fs, &cfg).unwrap();
            let win = window_coeffs(WindowKind::Blackman, f);
            for t in 0..2 {
                let lhs: f64 = s.values.column(t).iter().map(|v| v.norm_sqr()).sum();
                let rhs: f64 = (0..f)
                    .map(|n| (x[t * f + n] * win[n]).norm_sqr())
                    .sum::<f64>()
                    * f as f64;
                assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn shift_is_an_involution_on_rows() {
        let f = 16;
        let rows: Vec<usize> = (0..f).map(|k| (k + f / 2) % f).collect();
        let twice: Vec<usize> = rows.iter().map(|&k| (k + f / 2) % f).collect();
        assert_eq!(twice, (0..f).collect::<Vec<_>>());
    }

    #[test]
    fn db_of_zero_grid_is_log_epsilon() {
        let cfg = StftConfig::default();
        let x = vec![Complex64::new(0.0, 0.0); 512];
        let g = spectrogram(&x, 1e6, &cfg).unwrap();
        let want = 10.0 * 1e-12f64.log10();
        assert!(g.values.iter().all(|&v| (v - want).abs() < 1e-12));
    }

    #[test]
    fn db_of_unit_magnitude_is_zero() {
        let s = ComplexStft {
            values: Array2::from_elem((2, 2), Complex64::new(1.0, 0.0)),
            fs: 1.0,
            frame_times: vec![0.0, 1.0],
            bin_freqs: vec![0.0, 0.5],
            shifted: false,
        };
        let g = to_db(&s, 1e-12);
        assert!(g.values.iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn scaling_by_ten_raises_db_by_twenty() {
        let mk = |scale: f64| ComplexStft {
            values: Array2::from_shape_fn((4, 3), |(k, t)| {
                Complex64::new(scale * (1.0 + k as f64), scale * t as f64)
            }),
            fs: 1.0,
            frame_times: vec![0.0; 3],
            bin_freqs: vec![0.0; 4],
            shifted: false,
        };
        let a = to_db(&mk(1.0), 1e-12);
        let b = to_db(&mk(10.0), 1e-12);
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert_relative_eq!(y - x, 20.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn db_is_monotone_in_magnitude() {
        let small = ComplexStft {
            values: Array2::from_elem((3, 3), Complex64::new(0.5, 0.0)),
            fs: 1.0,
            frame_times: vec![0.0; 3],
            bin_freqs: vec![0.0; 3],
            shifted: false,
        };
        let large = ComplexStft {
            values: Array2::from_elem((3, 3), Complex64::new(0.7, 0.0)),
            ..small.clone()
        };
        let a = to_db(&small, 1e-12);
        let b = to_db(&large, 1e-12);
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!(x <= y);
        }
    }

    #[test]
    fn centered_mode_pads_half_window() {
        let cfg = StftConfig {
            fft_size: 64,
            win_len: 64,
            hop: 64,
            centered: true,
            ..StftConfig::default()
        };
        let x = tone(1e6, 0.0, 128);
        let s = stft(&x, 1e6, &cfg).unwrap();
        assert_eq!(s.values.ncols(), (128 + 64 - 64) / 64 + 1);
    }
}
