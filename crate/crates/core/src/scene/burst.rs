//! Per-class baseband burst synthesis.
//!
//! Linear classes (PSK/QAM) map random symbols onto the constellation and
//! shape them with a root-raised-cosine pulse; FSK classes accumulate
//! continuous phase over tone offsets; OFDM builds per-symbol IFFT grids
//! with a cyclic prefix; AM/FM modulate a seeded multitone message. Every
//! burst is frequency-shifted to its center and edge-ramped to limit
//! spectral splatter.

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::scene::records::BurstConfig;
use crate::scene::registry::{ModParams, RRC_ROLL_OFF};
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Root-raised-cosine tap at symbol-time offset `t` (in symbols).
fn rrc_tap(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let quarter = 1.0 / (4.0 * beta);
    if (t.abs() - quarter).abs() < 1e-9 {
        let a = (1.0 + 2.0 / PI) * (PI / (4.0 * beta)).sin();
        let b = (1.0 - 2.0 / PI) * (PI / (4.0 * beta)).cos();
        return beta / 2f64.sqrt() * (a + b);
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// RRC taps spanning `span` symbols each side at `sps` samples per symbol.
pub fn rrc_taps(sps: usize, beta: f64, span: usize) -> Vec<f64> {
    let half = span * sps;
    (0..=2 * half)
        .map(|i| rrc_tap((i as f64 - half as f64) / sps as f64, beta))
        .collect()
}

const RRC_SPAN_SYMBOLS: usize = 6;
/// Raised-cosine on/off ramp applied at burst edges.
const EDGE_RAMP_MAX: usize = 64;

fn apply_edge_ramp(samples: &mut [Complex64]) {
    let ramp = (samples.len() / 20).min(EDGE_RAMP_MAX);
    for i in 0..ramp {
        let w = 0.5 * (1.0 - (PI * (i as f64 + 0.5) / ramp as f64).cos());
        samples[i] *= w;
        let j = samples.len() - 1 - i;
        samples[j] *= w;
    }
}

fn shift_to_center(samples: &mut [Complex64], fs: f64, f_center: f64) {
    if f_center == 0.0 {
        return;
    }
    let w = 2.0 * PI * f_center / fs;
    for (n, s) in samples.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, w * n as f64);
    }
}

/// Unit-average-power constellation points for a PSK/QAM order.
pub fn constellation(params: &ModParams) -> Result<Vec<Complex64>> {
    match params {
        ModParams::Psk { order } => {
            let offset = if *order == 4 { PI / 4.0 } else { 0.0 };
            Ok((0..*order)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / *order as f64 + offset))
                .collect())
        }
        ModParams::Qam { order } => {
            let side = (*order as f64).sqrt().round() as u32;
            if side * side != *order {
                return Err(Error::Config(format!("QAM order {order} is not square")));
            }
            let mut points = Vec::with_capacity(*order as usize);
            for i in 0..side {
                for q in 0..side {
                    let re = 2.0 * i as f64 - (side as f64 - 1.0);
                    let im = 2.0 * q as f64 - (side as f64 - 1.0);
                    points.push(Complex64::new(re, im));
                }
            }
            let power =
                points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
            let scale = 1.0 / power.sqrt();
            Ok(points.into_iter().map(|p| p * scale).collect())
        }
        other => Err(Error::Config(format!(
            "no constellation for {other:?}"
        ))),
    }
}

/// Pulse-shape a symbol stream: `y[n] = sum_k s_k * h[n - k*sps]`, trimmed
/// to `n_out` samples, shifted to `f_center`.
pub fn shaped_linear_burst(
    symbols: &[Complex64],
    sps: usize,
    beta: f64,
    n_out: usize,
    fs: f64,
    f_center: f64,
) -> Vec<Complex64> {
    let taps = rrc_taps(sps, beta, RRC_SPAN_SYMBOLS);
    let half = RRC_SPAN_SYMBOLS * sps;
    let mut out = vec![Complex64::new(0.0, 0.0); n_out];
    // Unit average output power for unit-power symbols.
    let norm = (sps as f64 / taps.iter().map(|t| t * t).sum::<f64>()).sqrt();
    for (k, &sym) in symbols.iter().enumerate() {
        let center = k * sps;
        for (i, &tap) in taps.iter().enumerate() {
            let n = center as i64 + i as i64 - half as i64;
            if n >= 0 && (n as usize) < n_out {
                out[n as usize] += sym * tap * norm;
            }
        }
    }
    shift_to_center(&mut out, fs, f_center);
    out
}

fn linear_burst(
    params: &ModParams,
    n_out: usize,
    sps: usize,
    fs: f64,
    f_center: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let points = constellation(params)?;
    let n_symbols = n_out / sps + 2 * RRC_SPAN_SYMBOLS + 1;
    let mut rng = stream(seed, "burst-symbols", 0);
    let symbols: Vec<Complex64> = (0..n_symbols)
        .map(|_| points[rng.gen_range(0..points.len())])
        .collect();
    Ok(shaped_linear_burst(&symbols, sps, RRC_ROLL_OFF, n_out, fs, f_center))
}

/// Continuous-phase FSK. Tone offsets `(2k - M + 1) * Rs/2` for plain FSK
/// (h = 1), `±Rs/4` for MSK (h = 0.5). Gaussian variants smooth the
/// per-sample frequency track.
fn cpfsk_burst(
    tones: u32,
    gaussian: bool,
    msk: bool,
    n_out: usize,
    sps: usize,
    symbol_rate: f64,
    fs: f64,
    f_center: f64,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = stream(seed, "burst-symbols", 0);
    let n_symbols = n_out / sps + 2;
    // Per-sample instantaneous frequency.
    let mut freq = Vec::with_capacity(n_symbols * sps);
    for _ in 0..n_symbols {
        let level = rng.gen_range(0..tones) as f64;
        let offset = if msk {
            (2.0 * level - 1.0) * symbol_rate / 4.0
        } else {
            (2.0 * level - (tones as f64 - 1.0)) * symbol_rate / 2.0
        };
        for _ in 0..sps {
            freq.push(offset);
        }
    }
    if gaussian {
        // BT = 0.5 Gaussian frequency pulse.
        let sigma = (2f64.ln()).sqrt() / (2.0 * PI * 0.5) * sps as f64;
        let half = (3.0 * sigma).ceil() as i64;
        let kernel: Vec<f64> = (-half..=half)
            .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        let smoothed: Vec<f64> = (0..freq.len())
            .map(|n| {
                let mut acc = 0.0;
                for (i, k) in kernel.iter().enumerate() {
                    let idx = n as i64 + i as i64 - half;
                    let idx = idx.clamp(0, freq.len() as i64 - 1) as usize;
                    acc += k * freq[idx];
                }
                acc / total
            })
            .collect();
        freq = smoothed;
    }
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(n_out);
    for &f in freq.iter().take(n_out) {
        out.push(Complex64::from_polar(1.0, phase));
        phase += 2.0 * PI * f / fs;
    }
    out.resize(n_out, Complex64::new(0.0, 0.0));
    shift_to_center(&mut out, fs, f_center);
    out
}

/// Per-symbol IFFT OFDM with cyclic prefix `n_fft/8`. `scs` is the
/// subcarrier spacing; the active block of `subcarriers` bins is centered
/// on DC, each carrying a random symbol from `points`. Returns the burst
/// plus the symbol layout `(cp_len, n_fft)` so oracles can index symbol
/// boundaries.
pub fn ofdm_burst(
    subcarriers: u32,
    scs: f64,
    n_out: usize,
    fs: f64,
    f_center: f64,
    seed: u64,
    points: &[Complex64],
) -> Result<(Vec<Complex64>, (usize, usize))> {
    let n_fft = (fs / scs).round() as usize;
    if n_fft < subcarriers as usize {
        return Err(Error::Config(format!(
            "OFDM needs fs/scs >= subcarriers ({n_fft} < {subcarriers})"
        )));
    }
    let cp = n_fft / 8;
    let sym_len = n_fft + cp;
    let n_symbols = n_out.div_ceil(sym_len);
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n_fft);
    let mut scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
    let mut rng = stream(seed, "burst-symbols", 0);
    let scale = 1.0 / (subcarriers as f64).sqrt();
    let mut out = Vec::with_capacity(n_symbols * sym_len);
    let mut grid = vec![Complex64::new(0.0, 0.0); n_fft];
    let half = subcarriers as i64 / 2;
    for _ in 0..n_symbols {
        grid.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        for k in -half..(subcarriers as i64 - half) {
            let bin = k.rem_euclid(n_fft as i64) as usize;
            grid[bin] = points[rng.gen_range(0..points.len())] * scale;
        }
        ifft.process_with_scratch(&mut grid, &mut scratch);
        // Cyclic prefix then body.
        out.extend_from_slice(&grid[n_fft - cp..]);
        out.extend_from_slice(&grid);
    }
    out.truncate(n_out);
    shift_to_center(&mut out, fs, f_center);
    Ok((out, (cp, n_fft)))
}

/// Seeded multitone message, analytic by construction (positive
/// frequencies in `(0.05*bw, 0.95*bw)` only).
fn multitone_message(bw: f64, n_out: usize, fs: f64, seed: u64) -> Vec<Complex64> {
    const TONES: usize = 8;
    let mut rng = stream(seed, "burst-message", 0);
    let comps: Vec<(f64, f64, f64)> = (0..TONES)
        .map(|_| {
            (
                rng.gen_range(0.05..0.95) * bw,
                rng.gen_range(0.3..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let norm = 1.0 / comps.iter().map(|c| c.1).sum::<f64>();
    (0..n_out)
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(f, a, phi) in &comps {
                acc += a * Complex64::from_polar(1.0, 2.0 * PI * f * n as f64 / fs + phi);
            }
            acc * norm
        })
        .collect()
}

/// Synthesize one burst at the scene sample rate. Output length is
/// `round(duration * fs)`.
pub fn synthesize_burst(cfg: &BurstConfig, fs: f64, seed: u64) -> Result<Vec<Complex64>> {
    let n_out = (cfg.duration * fs).round() as usize;
    if n_out == 0 {
        return Err(Error::Input("burst rounds to zero samples".into()));
    }
    let f_center = cfg.f_center;
    let mut samples = match &cfg.mod_class.params {
        p @ (ModParams::Psk { .. } | ModParams::Qam { .. }) => {
            let sps = (fs / cfg.symbol_rate).round().max(2.0) as usize;
            linear_burst(p, n_out, sps, fs, f_center, seed)?
        }
        ModParams::Fsk { tones, gaussian } => {
            let sps = (fs / cfg.symbol_rate).round().max(2.0) as usize;
            cpfsk_burst(
                *tones, *gaussian, false, n_out, sps, cfg.symbol_rate, fs, f_center, seed,
            )
        }
        ModParams::Msk => {
            let sps = (fs / cfg.symbol_rate).round().max(2.0) as usize;
            cpfsk_burst(2, false, true, n_out, sps, cfg.symbol_rate, fs, f_center, seed)
        }
        ModParams::Ofdm { subcarriers } => {
            let qpsk = constellation(&ModParams::Psk { order: 4 })?;
            ofdm_burst(*subcarriers, cfg.symbol_rate, n_out, fs, f_center, seed, &qpsk)?.0
        }
        ModParams::Am { ssb } => {
            let bw = cfg.symbol_rate; // message bandwidth
            let m = multitone_message(bw, n_out, fs, seed);
            let mut s: Vec<Complex64> = if *ssb {
                // Analytic message shifted down by bw/2 centers the band.
                m.iter()
                    .enumerate()
                    .map(|(n, &c)| {
                        c * Complex64::from_polar(1.0, -PI * bw * n as f64 / fs)
                    })
                    .collect()
            } else {
                m.iter()
                    .map(|c| Complex64::new(1.0 + 0.8 * c.re / 0.5, 0.0))
                    .collect()
            };
            shift_to_center(&mut s, fs, f_center);
            s
        }
        ModParams::Fm { wide } => {
            let bw_msg = cfg.symbol_rate;
            let dev = if *wide { 4.0 * bw_msg } else { 0.5 * bw_msg };
            let m = multitone_message(bw_msg, n_out, fs, seed);
            let peak = m.iter().map(|c| c.re.abs()).fold(0.0f64, f64::max).max(1e-12);
            let mut phase = 0.0;
            let mut s = Vec::with_capacity(n_out);
            for c in &m {
                s.push(Complex64::from_polar(1.0, phase));
                phase += 2.0 * PI * dev * (c.re / peak) / fs;
            }
            shift_to_center(&mut s, fs, f_center);
            s
        }
    };
    apply_edge_ramp(&mut samples);
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::registry::Registry;

    fn cfg_for(name: &str, symbol_rate: f64, f_center: f64, bw: f64) -> BurstConfig {
        BurstConfig {
            mod_class: Registry::builtin().get(name).unwrap().clone(),
            t_start: 0.0,
            duration: 0.01,
            f_center,
            bandwidth: bw,
            snr_db: 30.0,
            symbol_rate,
        }
    }

    /// Periodogram oracle: mean power per DFT bin (naive windowless FFT).
    fn periodogram(x: &[Complex64]) -> Vec<f64> {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(x.len());
        let mut buf = x.to_vec();
        fft.process(&mut buf);
        buf.iter().map(|c| c.norm_sqr() / x.len() as f64).collect()
    }

    fn bin_to_freq(bin: usize, n: usize, fs: f64) -> f64 {
        let k = if bin < n / 2 {
            bin as i64
        } else {
            bin as i64 - n as i64
        };
        k as f64 * fs / n as f64
    }

    /// 99%-occupied bandwidth of a burst via the periodogram oracle.
    fn occupied_bw_99(x: &[Complex64], fs: f64) -> f64 {
        let p = periodogram(x);
        let total: f64 = p.iter().sum();
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap());
        let mut acc = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &bin in &order {
            acc += p[bin];
            let f = bin_to_freq(bin, p.len(), fs);
            lo = lo.min(f);
            hi = hi.max(f);
            if acc >= 0.99 * total {
                break;
            }
        }
        hi - lo
    }

    #[test]
    fn length_is_rounded_duration_times_fs() {
        let fs = 1_000_000.0;
        for name in [
            "bpsk", "qpsk", "8psk", "16qam", "64qam", "256qam", "2fsk", "4fsk", "gfsk", "msk",
            "am-dsb", "am-ssb", "fm-nb", "fm-wb",
        ] {
            let cfg = cfg_for(name, 50_000.0, 0.0, 100_000.0);
            let burst = synthesize_burst(&cfg, fs, 3).unwrap();
            assert_eq!(burst.len(), 10_000, "class {name}");
        }
        let cfg = cfg_for("ofdm-64", 2_000.0, 0.0, 128_000.0);
        assert_eq!(synthesize_burst(&cfg, fs, 3).unwrap().len(), 10_000);
    }

    #[test]
    fn constant_bpsk_symbols_form_tone_at_center() {
        let fs = 1_000_000.0;
        let f_center = 125_000.0;
        let symbols = vec![Complex64::new(1.0, 0.0); 300];
        let burst = shaped_linear_burst(&symbols, 8, RRC_ROLL_OFF, 2048, fs, f_center);
        // Constant envelope away from edges.
        let mags: Vec<f64> = burst[256..1792].iter().map(|c| c.norm()).collect();
        let mean = mags.iter().sum::<f64>() / mags.len() as f64;
        let var =
            mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / mags.len() as f64;
        assert!(var.sqrt() / mean < 0.05, "envelope ripple too large");
        // Spectral peak at f_center.
        let p = periodogram(&burst);
        let peak = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let f_peak = bin_to_freq(peak, p.len(), fs);
        assert!((f_peak - f_center).abs() < fs / 2048.0 * 2.0);
    }

    #[test]
    fn qpsk_occupied_bandwidth_matches_declared() {
        let fs = 1_000_000.0;
        let rs = 80_000.0;
        let declared = rs * (1.0 + RRC_ROLL_OFF);
        let cfg = cfg_for("qpsk", rs, -100_000.0, declared);
        let burst = synthesize_burst(&cfg, fs, 17).unwrap();
        let occ = occupied_bw_99(&burst, fs);
        assert!(
            (occ - declared).abs() / declared < 0.25,
            "occupied {occ}, declared {declared}"
        );
    }

    #[test]
    fn ofdm64_has_exactly_64_active_bins_per_symbol() {
        let fs = 1_024_000.0;
        let scs = 4_000.0; // n_fft = 256
        let qpsk = constellation(&ModParams::Psk { order: 4 }).unwrap();
        let (burst, (cp, n_fft)) = ofdm_burst(64, scs, 8_000, fs, 0.0, 5, &qpsk).unwrap();
        assert_eq!((cp, n_fft), (32, 256));
        // Oracle DFT over one symbol body (skip the CP).
        let sym = &burst[cp..cp + n_fft];
        let p = periodogram(sym);
        let peak = p.iter().cloned().fold(0.0f64, f64::max);
        let active = p.iter().filter(|&&v| v > peak * 1e-9).count();
        assert_eq!(active, 64);
    }

    #[test]
    fn fsk_is_constant_envelope() {
        let fs = 1_000_000.0;
        let cfg = cfg_for("4fsk", 25_000.0, 50_000.0, 100_000.0);
        let burst = synthesize_burst(&cfg, fs, 11).unwrap();
        for c in &burst[128..burst.len() - 128] {
            assert!((c.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_qam_order_is_config_error() {
        let err = constellation(&ModParams::Qam { order: 24 });
        assert!(err.is_err());
    }

    #[test]
    fn bursts_are_deterministic_per_seed() {
        let fs = 1_000_000.0;
        let cfg = cfg_for("16qam", 50_000.0, 10_000.0, 67_500.0);
        let a = synthesize_burst(&cfg, fs, 9).unwrap();
        let b = synthesize_burst(&cfg, fs, 9).unwrap();
        let c = synthesize_burst(&cfg, fs, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
