//! Scene composition: per-burst SNR scaling against a unit AWGN floor.
//!
//! The noise floor is complex white Gaussian with unit per-sample power, so
//! its density is `1/fs` and the in-band noise power for a burst of
//! bandwidth `B` is `B/fs`. Each burst is rescaled so its in-band mean
//! power during its own support hits `10^(snr/10) * B/fs`. SNR is therefore
//! in-band signal power over in-band noise power during the burst.

use crate::error::Result;
use crate::impair::impair;
use crate::iq::IqBuffer;
use crate::rng::stream;
use crate::scene::burst::synthesize_burst;
use crate::scene::records::{BurstConfig, SceneRecord, SignalRecord, Technology};
use crate::scene::registry::symbol_rate_for_bandwidth;
use crate::scene::tech;
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Unit-variance complex Gaussian noise (Box-Muller over a seeded stream).
pub fn awgn(seed: u64, label: &str, len: usize) -> Vec<Complex64> {
    let mut rng = stream(seed, label, 0);
    (0..len)
        .map(|_| {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            let r = (-2.0 * u1.ln()).sqrt() * 0.5f64.sqrt();
            Complex64::from_polar(r, 2.0 * PI * u2)
        })
        .collect()
}

/// Mean per-sample power of `x` restricted to `[f_low, f_high]`.
pub fn inband_mean_power(x: &[Complex64], fs: f64, f_low: f64, f_high: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let mut acc = 0.0;
    for (bin, v) in buf.iter().enumerate() {
        let k = if bin < n.div_ceil(2) {
            bin as i64
        } else {
            bin as i64 - n as i64
        };
        let f = k as f64 * fs / n as f64;
        if f >= f_low && f <= f_high {
            acc += v.norm_sqr();
        }
    }
    acc / (n as f64 * n as f64)
}

/// Rebuild the waveform of one signal record, deterministically from the
/// scene seed and the record itself.
fn burst_for_signal(rec: &SceneRecord, sig: &SignalRecord) -> Result<Vec<Complex64>> {
    let seed = crate::rng::derive_seed(rec.seed, "signal", sig.id as u64);
    match sig.technology {
        Technology::Generic | Technology::Dvbs2 | Technology::Umts | Technology::Bt => {
            let cfg = BurstConfig {
                mod_class: sig.mod_class.clone(),
                t_start: sig.t_start(),
                duration: sig.duration(),
                f_center: sig.f_center(),
                bandwidth: sig.bandwidth(),
                snr_db: sig.snr_db,
                symbol_rate: symbol_rate_for_bandwidth(&sig.mod_class.params, sig.bandwidth()),
            };
            synthesize_burst(&cfg, rec.fs, seed)
        }
        Technology::Nr | Technology::Lte | Technology::Wlan => {
            tech::ofdm_tile_burst(rec, sig, seed)
        }
    }
}

/// Compose the scene: AWGN floor plus every signal burst (and any
/// technology overlay bursts) scaled to its target in-band SNR, then the
/// scene's impairment chain.
pub fn compose_scene(rec: &SceneRecord, seed: u64) -> Result<IqBuffer> {
    let n = rec.num_samples();
    let mut samples = awgn(seed, "awgn", n);

    let mut add_burst =
        |burst: &[Complex64], t_start: f64, f_low: f64, f_high: f64, snr_db: f64| {
            if burst.is_empty() {
                return;
            }
            let p_in = inband_mean_power(burst, rec.fs, f_low, f_high);
            if p_in <= 0.0 {
                return;
            }
            let bw = f_high - f_low;
            let target = 10f64.powf(snr_db / 10.0) * bw / rec.fs;
            let alpha = (target / p_in).sqrt();
            let offset = (t_start * rec.fs).round() as usize;
            for (i, &b) in burst.iter().enumerate() {
                if offset + i >= n {
                    break;
                }
                samples[offset + i] += alpha * b;
            }
        };

    for sig in &rec.signals {
        let burst = burst_for_signal(rec, sig)?;
        add_burst(&burst, sig.t_start(), sig.f_low(), sig.f_high(), sig.snr_db);
    }
    for overlay in tech::overlay_bursts(rec)? {
        add_burst(
            &overlay.samples,
            overlay.t_start,
            overlay.f_low,
            overlay.f_high,
            overlay.snr_db,
        );
    }

    for spec in &rec.impairments {
        samples = impair(&samples, rec.fs, spec)?;
    }
    Ok(IqBuffer::new(rec.fs, samples))
}

/// Periodogram SNR estimate for an isolated burst: in-band power during the
/// burst minus the out-of-band noise-density estimate scaled to the band,
/// over that same in-band noise estimate. This is the test oracle for the
/// SNR calibration contract.
pub fn measure_inband_snr_db(
    scene_iq: &IqBuffer,
    t_interval: [f64; 2],
    f_interval: [f64; 2],
) -> f64 {
    let fs = scene_iq.fs;
    let a = (t_interval[0] * fs).round() as usize;
    let b = ((t_interval[1] * fs).round() as usize).min(scene_iq.len());
    let segment = &scene_iq.samples[a..b];
    let n = segment.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = segment.to_vec();
    fft.process(&mut buf);
    let mut inband = 0.0;
    let mut outband = 0.0;
    let mut out_bins = 0usize;
    let guard = 0.1 * (f_interval[1] - f_interval[0]);
    for (bin, v) in buf.iter().enumerate() {
        let k = if bin < n.div_ceil(2) {
            bin as i64
        } else {
            bin as i64 - n as i64
        };
        let f = k as f64 * fs / n as f64;
        let p = v.norm_sqr() / (n as f64 * n as f64);
        if f >= f_interval[0] && f <= f_interval[1] {
            inband += p;
        } else if f < f_interval[0] - guard || f > f_interval[1] + guard {
            outband += p;
            out_bins += 1;
        }
    }
    let bins_inband = (f_interval[1] - f_interval[0]) / fs * n as f64;
    let noise_in_band = outband / out_bins.max(1) as f64 * bins_inband;
    let signal = (inband - noise_in_band).max(1e-300);
    10.0 * (signal / noise_in_band).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::records::{LinkDir, TechAttrs, SCENE_SCHEMA};
    use crate::scene::registry::Registry;

    fn scene_with(signals: Vec<SignalRecord>, seed: u64) -> SceneRecord {
        SceneRecord {
            schema: SCENE_SCHEMA.into(),
            scene_id: "test".into(),
            fs: 1_024_000.0,
            duration: 0.02,
            signals,
            overlap_prob: 0.0,
            seed,
            rejections: 0,
            impairments: vec![],
            iq_path: None,
        }
    }

    fn generic_signal(id: u32, name: &str, snr_db: f64) -> SignalRecord {
        let class = Registry::builtin().get(name).unwrap().clone();
        SignalRecord {
            id,
            technology: Technology::Generic,
            link: LinkDir::Na,
            mod_class: class,
            t_interval: [0.002, 0.018],
            f_interval: [50_000.0, 150_000.0],
            snr_db,
            tech_attrs: TechAttrs::none(),
        }
    }

    #[test]
    fn empty_scene_is_pure_awgn() {
        let rec = scene_with(vec![], 5);
        let iq = compose_scene(&rec, rec.seed).unwrap();
        assert_eq!(iq.len(), rec.num_samples());
        // Unit per-sample power within a few percent.
        let p = iq.mean_power();
        assert!((p - 1.0).abs() < 0.05, "noise power {p}");
        // And identical to the raw noise stream.
        let noise = awgn(rec.seed, "awgn", rec.num_samples());
        assert_eq!(iq.samples, noise);
    }

    #[test]
    fn tone_burst_snr_within_one_db() {
        // A pure-tone-ish burst (BPSK at low symbol rate) at 50 dB.
        let mut sig = generic_signal(0, "qpsk", 50.0);
        sig.f_interval = [-67_500.0, 67_500.0];
        let rec = scene_with(vec![sig.clone()], 11);
        let iq = compose_scene(&rec, rec.seed).unwrap();
        let est = measure_inband_snr_db(&iq, sig.t_interval, sig.f_interval);
        assert!((est - 50.0).abs() < 1.0, "estimated {est} dB");
    }

    #[test]
    fn low_snr_burst_calibrates_too() {
        let sig = generic_signal(0, "16qam", 3.0);
        let rec = scene_with(vec![sig.clone()], 13);
        let iq = compose_scene(&rec, rec.seed).unwrap();
        let est = measure_inband_snr_db(&iq, sig.t_interval, sig.f_interval);
        assert!((est - 3.0).abs() < 1.0, "estimated {est} dB");
    }

    #[test]
    fn composition_is_deterministic() {
        let rec = scene_with(vec![generic_signal(0, "8psk", 20.0)], 17);
        let a = compose_scene(&rec, rec.seed).unwrap();
        let b = compose_scene(&rec, rec.seed).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn total_length_is_rounded_duration() {
        let rec = scene_with(vec![generic_signal(0, "fm-nb", 15.0)], 3);
        let iq = compose_scene(&rec, rec.seed).unwrap();
        assert_eq!(iq.len(), (0.02f64 * 1_024_000.0).round() as usize);
    }
}
