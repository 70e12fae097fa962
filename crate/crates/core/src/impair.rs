//! Channel impairments under a single normalized severity `lambda`.
//!
//! Four families: IQ imbalance, Rapp power-amplifier nonlinearity, carrier
//! frequency offset, and a time-varying tapped-delay-line channel. Severity
//! `lambda` in [0, 1] maps linearly onto each family's parameter endpoints;
//! `lambda = 0` is the identity for every family.

use crate::error::{Error, Result};
use crate::rng::stream;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Severity endpoints, reached at `lambda = 1`.
pub const IQ_GAIN_DB_MAX: f64 = 8.0;
pub const IQ_PHASE_DEG_MAX: f64 = 15.0;
pub const CFO_HZ_MAX: f64 = 1200.0;
pub const TDL_DELAY_SPREAD_S_MAX: f64 = 500e-6;
pub const TDL_DOPPLER_HZ_MAX: f64 = 200.0;
/// Rapp saturation (relative to input RMS) moves 4.0 -> 1.0, knee 3.0 -> 1.0.
pub const PA_SAT_REL_RANGE: (f64, f64) = (4.0, 1.0);
pub const PA_KNEE_RANGE: (f64, f64) = (3.0, 1.0);

/// Scenes impaired at `lambda <= 0.3` are train-eligible; harsher ones are
/// held out for evaluation.
pub const TRAIN_LAMBDA_MAX: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ImpairmentKind {
    Iq,
    Pa,
    Cfo,
    Tdl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdlProfile {
    /// Exponential power-delay profile (all taps NLOS-like).
    CLike,
    /// Dominant first tap followed by an exponential tail.
    DLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentSpec {
    pub kind: ImpairmentKind,
    pub lambda: f64,
    /// Tap/fading realization seed (TDL only, but always recorded).
    pub seed: u64,
}

impl ImpairmentSpec {
    pub fn new(kind: ImpairmentKind, lambda: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Config(format!("lambda {lambda} outside [0,1]")));
        }
        Ok(ImpairmentSpec { kind, lambda, seed })
    }

    pub fn train_eligible(&self) -> bool {
        self.lambda <= TRAIN_LAMBDA_MAX
    }
}

/// Concrete parameters an `ImpairmentSpec` resolves to; echoed into scene
/// metadata so ground truth includes the exact applied values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum ResolvedImpairment {
    Iq {
        gain_db: f64,
        phase_deg: f64,
    },
    Pa {
        /// Saturation level relative to the input RMS.
        a_sat_rel: f64,
        knee: f64,
    },
    Cfo {
        freq_offset_hz: f64,
    },
    Tdl {
        delay_spread_s: f64,
        doppler_hz: f64,
        profile: TdlProfile,
    },
}

/// Linear-in-lambda parameter mapping between the sweep endpoints.
pub fn resolve(spec: &ImpairmentSpec) -> ResolvedImpairment {
    let l = spec.lambda;
    match spec.kind {
        ImpairmentKind::Iq => ResolvedImpairment::Iq {
            gain_db: IQ_GAIN_DB_MAX * l,
            phase_deg: IQ_PHASE_DEG_MAX * l,
        },
        ImpairmentKind::Pa => ResolvedImpairment::Pa {
            a_sat_rel: PA_SAT_REL_RANGE.0 + (PA_SAT_REL_RANGE.1 - PA_SAT_REL_RANGE.0) * l,
            knee: PA_KNEE_RANGE.0 + (PA_KNEE_RANGE.1 - PA_KNEE_RANGE.0) * l,
        },
        ImpairmentKind::Cfo => ResolvedImpairment::Cfo {
            freq_offset_hz: CFO_HZ_MAX * l,
        },
        ImpairmentKind::Tdl => {
            let mut rng = stream(spec.seed, "tdl-profile", 0);
            let profile = if rng.gen::<bool>() {
                TdlProfile::CLike
            } else {
                TdlProfile::DLike
            };
            ResolvedImpairment::Tdl {
                delay_spread_s: TDL_DELAY_SPREAD_S_MAX * l,
                doppler_hz: TDL_DOPPLER_HZ_MAX * l,
                profile,
            }
        }
    }
}

/// Apply one impairment. Length-preserving; `lambda = 0` returns the input
/// bitwise unchanged.
pub fn impair(iq: &[Complex64], fs: f64, spec: &ImpairmentSpec) -> Result<Vec<Complex64>> {
    if spec.lambda == 0.0 {
        return Ok(iq.to_vec());
    }
    match resolve(spec) {
        ResolvedImpairment::Iq { gain_db, phase_deg } => Ok(iq_imbalance(iq, gain_db, phase_deg)),
        ResolvedImpairment::Pa { a_sat_rel, knee } => {
            let rms = rms(iq);
            let a_sat = if rms > 0.0 { a_sat_rel * rms } else { a_sat_rel };
            Ok(rapp_pa(iq, a_sat, knee))
        }
        ResolvedImpairment::Cfo { freq_offset_hz } => Ok(cfo(iq, fs, freq_offset_hz)),
        ResolvedImpairment::Tdl {
            delay_spread_s,
            doppler_hz,
            profile,
        } => tdl_channel(iq, fs, delay_spread_s, doppler_hz, profile, spec.seed),
    }
}

fn rms(iq: &[Complex64]) -> f64 {
    if iq.is_empty() {
        return 0.0;
    }
    (iq.iter().map(|c| c.norm_sqr()).sum::<f64>() / iq.len() as f64).sqrt()
}

/// Gain/phase mismatch between I and Q branches:
/// `y = mu*x + nu*conj(x)` with `mu = (1 + g e^{j phi})/2`,
/// `nu = (1 - g e^{j phi})/2`, `g = 10^{gain_db/20}`.
pub fn iq_imbalance(iq: &[Complex64], gain_db: f64, phase_deg: f64) -> Vec<Complex64> {
    let (mu, nu) = iq_imbalance_coeffs(gain_db, phase_deg);
    iq.iter().map(|&x| mu * x + nu * x.conj()).collect()
}

/// The `(mu, nu)` pair of the conjugate imbalance model.
pub fn iq_imbalance_coeffs(gain_db: f64, phase_deg: f64) -> (Complex64, Complex64) {
    let g = 10f64.powf(gain_db / 20.0);
    let phi = phase_deg.to_radians();
    let ge = Complex64::from_polar(g, phi);
    let one = Complex64::new(1.0, 0.0);
    ((one + ge) / 2.0, (one - ge) / 2.0)
}

/// Image-rejection ratio `|nu/mu|^2` (linear, not dB).
pub fn image_rejection_ratio(gain_db: f64, phase_deg: f64) -> f64 {
    let (mu, nu) = iq_imbalance_coeffs(gain_db, phase_deg);
    nu.norm_sqr() / mu.norm_sqr()
}

/// Rapp AM/AM nonlinearity, phase preserved:
/// `y = x / (1 + (|x|/a_sat)^{2p})^{1/(2p)}`.
pub fn rapp_pa(iq: &[Complex64], a_sat: f64, p: f64) -> Vec<Complex64> {
    iq.iter()
        .map(|&x| {
            let r = x.norm();
            if r == 0.0 {
                return x;
            }
            x / (1.0 + (r / a_sat).powf(2.0 * p)).powf(1.0 / (2.0 * p))
        })
        .collect()
}

/// Carrier frequency offset: multiply by `e^{j 2 pi df n / fs}`.
pub fn cfo(iq: &[Complex64], fs: f64, freq_offset_hz: f64) -> Vec<Complex64> {
    let w = 2.0 * PI * freq_offset_hz / fs;
    iq.iter()
        .enumerate()
        .map(|(n, &x)| x * Complex64::from_polar(1.0, w * n as f64))
        .collect()
}

/// Number of taps in the simplified delay-line profiles.
pub const TDL_TAPS: usize = 7;

/// Normalized tap power weights (amplitudes squared sum to 1) and tap delays
/// in seconds for a profile with maximum excess delay `delay_spread_s`.
pub fn tdl_taps(delay_spread_s: f64, profile: TdlProfile) -> (Vec<f64>, Vec<f64>) {
    if delay_spread_s <= 0.0 {
        return (vec![1.0], vec![0.0]);
    }
    let delays: Vec<f64> = (0..TDL_TAPS)
        .map(|i| delay_spread_s * i as f64 / (TDL_TAPS - 1) as f64)
        .collect();
    let mut powers: Vec<f64> = match profile {
        // Exponential decay, ~13 dB down at the maximum excess delay.
        TdlProfile::CLike => delays
            .iter()
            .map(|d| (-3.0 * d / delay_spread_s).exp())
            .collect(),
        // LOS-like: dominant first tap over the same exponential tail.
        TdlProfile::DLike => delays
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i == 0 {
                    5.0
                } else {
                    (-3.0 * d / delay_spread_s).exp()
                }
            })
            .collect(),
    };
    normalize_powers(&mut powers);
    (powers, delays)
}

fn normalize_powers(powers: &mut [f64]) {
    let total: f64 = powers.iter().sum();
    for p in powers.iter_mut() {
        *p /= total;
    }
}

/// Time-varying FIR channel with a sum-of-sinusoids fading process per tap.
///
/// `doppler_hz = 0` collapses each tap to a constant unit-magnitude phasor,
/// making the channel linear time-invariant.
pub fn tdl_channel(
    iq: &[Complex64],
    fs: f64,
    delay_spread_s: f64,
    doppler_hz: f64,
    profile: TdlProfile,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if delay_spread_s < 0.0 || doppler_hz < 0.0 {
        return Err(Error::Config("negative delay spread or Doppler".into()));
    }
    let duration = iq.len() as f64 / fs;
    if delay_spread_s > duration {
        return Err(Error::Config(format!(
            "delay spread {delay_spread_s} s exceeds buffer duration {duration} s"
        )));
    }
    let (powers, delays) = tdl_taps(delay_spread_s, profile);
    let amps: Vec<f64> = powers.iter().map(|p| p.sqrt()).collect();
    let offsets: Vec<usize> = delays.iter().map(|d| (d * fs).round() as usize).collect();

    // Per-tap fading processes.
    const N_SINUSOIDS: usize = 8;
    struct Fader {
        // (angular frequency per sample, phase)
        comps: Vec<(f64, f64)>,
        fixed: Complex64,
    }
    let faders: Vec<Fader> = (0..amps.len())
        .map(|i| {
            let mut rng = stream(seed, "tdl-fading", i as u64);
            if doppler_hz == 0.0 {
                let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
                Fader {
                    comps: Vec::new(),
                    fixed: Complex64::from_polar(1.0, theta),
                }
            } else {
                let comps = (0..N_SINUSOIDS)
                    .map(|_| {
                        let alpha: f64 = rng.gen::<f64>() * 2.0 * PI;
                        let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
                        (2.0 * PI * doppler_hz * alpha.cos() / fs, theta)
                    })
                    .collect();
                Fader {
                    comps,
                    fixed: Complex64::new(0.0, 0.0),
                }
            }
        })
        .collect();
    let scale = 1.0 / (N_SINUSOIDS as f64).sqrt();

    let mut out = vec![Complex64::new(0.0, 0.0); iq.len()];
    for (tap, (&amp, &off)) in amps.iter().zip(offsets.iter()).enumerate() {
        let fader = &faders[tap];
        for n in off..iq.len() {
            let gain = if fader.comps.is_empty() {
                fader.fixed
            } else {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(w, theta) in &fader.comps {
                    acc += Complex64::from_polar(1.0, w * n as f64 + theta);
                }
                acc * scale
            };
            out[n] += amp * gain * iq[n - off];
        }
    }
    Ok(out)
}
