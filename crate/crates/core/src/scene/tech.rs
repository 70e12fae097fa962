//! Structural technology emulation.
//!
//! Emulations reproduce the time-frequency occupancy patterns and latent
//! attributes of each technology (OFDM grids with SCS-dependent symbol
//! timing, SSB/CSI-RS/SRS bursts, per-UE PRB allocations, OFDMA RU tiles,
//! FHSS hops, single wideband carriers), not bit-level PHY waveforms. All
//! latent attributes land in `TechAttrs` so downstream stages get exact
//! ground truth.

use crate::error::{Error, Result};
use crate::iq::IqBuffer;
use crate::rng::{derive_seed, stream};
use crate::scene::burst::{constellation, ofdm_burst};
use crate::scene::compose::compose_scene;
use crate::scene::records::{
    LinkDir, RuTile, SceneRecord, SignalRecord, SsbPattern, TechAttrs, TechChoice, Technology,
    WlanStandard, SCENE_SCHEMA,
};
use crate::scene::registry::{ModClass, Registry};
use num_complex::Complex64;
use rand::Rng;
use serde_json::json;
use std::collections::BTreeMap;

/// Tone spacing used by the WLAN OFDMA emulation (structural stand-in).
pub const WLAN_SCS_HZ: f64 = 15_000.0;
/// Fixed LTE subcarrier spacing.
pub const LTE_SCS_HZ: f64 = 15_000.0;
/// Fraction of the scene band a cellular carrier occupies.
const NR_BAND_FRAC: f64 = 0.8;
const LTE_BAND_FRAC: f64 = 0.7;
const WLAN_BAND_FRAC: f64 = 0.78;
/// Normal cyclic-prefix overhead (1/8 of the FFT body).
const CP_FRAC: f64 = 0.125;
/// Bluetooth hop dwell time and channel spacing.
const BT_HOP_S: f64 = 625e-6;
const BT_CHANNEL_HZ: f64 = 1_000_000.0;

fn slot_duration(scs_hz: f64) -> f64 {
    14.0 * (1.0 + CP_FRAC) / scs_hz
}

fn symbol_duration(scs_hz: f64) -> f64 {
    (1.0 + CP_FRAC) / scs_hz
}

fn qam_class(registry: &Registry, rng: &mut impl Rng, names: &[&str]) -> ModClass {
    registry.get(names[rng.gen_range(0..names.len())]).unwrap().clone()
}

/// One technology overlay burst (SSB, CSI-RS, SRS) that is painted into the
/// scene IQ but is not itself a `SignalRecord`.
pub struct OverlayBurst {
    pub samples: Vec<Complex64>,
    pub t_start: f64,
    pub f_low: f64,
    pub f_high: f64,
    pub snr_db: f64,
}

/// Time-frequency placement of one overlay burst.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub t_start: f64,
    pub duration: f64,
    pub f_low: f64,
    pub f_high: f64,
}

/// Deterministic overlay layout of an NR carrier.
#[derive(Debug, Clone, Default)]
pub struct NrOverlayLayout {
    pub ssb: Vec<Placement>,
    pub csirs: Vec<Placement>,
    pub srs: Vec<Placement>,
}

/// SSB time positions (symbol indices within one burst-set period) per
/// pattern. Structural reading of the case tables: four candidate blocks
/// for A-C, eight for D.
fn ssb_pattern_symbols(pattern: SsbPattern) -> &'static [usize] {
    match pattern {
        SsbPattern::A | SsbPattern::C => &[2, 8, 16, 22],
        SsbPattern::B => &[4, 8, 16, 20],
        SsbPattern::D => &[4, 8, 16, 20, 32, 36, 44, 48],
        SsbPattern::Na => &[],
    }
}

const SSB_PERIOD_S: f64 = 0.01;
const OVERLAY_PERIOD_S: f64 = 0.01;

/// Rebuild the deterministic overlay layout from `(seed, attrs)` alone, so
/// composition can re-derive exactly what the builder placed.
pub fn nr_overlay_layout(
    seed: u64,
    fs: f64,
    duration: f64,
    scs_khz: u32,
    ssb_pattern: SsbPattern,
    csirs_count: u32,
    srs_count: u32,
) -> NrOverlayLayout {
    let scs = scs_khz as f64 * 1000.0;
    let usable = NR_BAND_FRAC * fs;
    let sym = symbol_duration(scs);
    let slot = slot_duration(scs);
    let total_slots = (duration / slot).floor().max(1.0) as usize;
    let mut layout = NrOverlayLayout::default();

    // SSB: pattern-dependent symbol positions, repeated every period.
    if ssb_pattern != SsbPattern::Na {
        let mut rng = stream(seed, "nr-ssb", 0);
        let bw = (240.0 * scs).min(0.5 * usable);
        let max_off = (usable - bw) / 2.0 * 0.5;
        let f_center = rng.gen_range(-max_off..=max_off);
        let mut period_start = 0.0;
        while period_start < duration {
            for &s in ssb_pattern_symbols(ssb_pattern) {
                let t0 = period_start + s as f64 * sym;
                let dur = 4.0 * sym;
                if t0 + dur <= duration {
                    layout.ssb.push(Placement {
                        t_start: t0,
                        duration: dur,
                        f_low: f_center - bw / 2.0,
                        f_high: f_center + bw / 2.0,
                    });
                }
            }
            period_start += SSB_PERIOD_S;
        }
    }

    // CSI-RS: one-symbol wideband-ish resources, periodic.
    for i in 0..csirs_count {
        let mut rng = stream(seed, "nr-csirs", i as u64);
        let span = rng.gen_range(0.3..0.8) * usable;
        let f_center = rng.gen_range(-(usable - span) / 2.0..=(usable - span) / 2.0);
        let slot_idx = rng.gen_range(0..total_slots);
        let sym_idx = rng.gen_range(0..13usize);
        let mut period_start = 0.0;
        while period_start < duration {
            let t0 = period_start + slot_idx as f64 * slot + sym_idx as f64 * sym;
            if t0 + sym <= duration {
                layout.csirs.push(Placement {
                    t_start: t0,
                    duration: sym,
                    f_low: f_center - span / 2.0,
                    f_high: f_center + span / 2.0,
                });
            }
            period_start += OVERLAY_PERIOD_S;
        }
    }

    // SRS: last-symbol sounding, periodic, wide span.
    for i in 0..srs_count {
        let mut rng = stream(seed, "nr-srs", i as u64);
        let span = rng.gen_range(0.5..0.95) * usable;
        let f_center = rng.gen_range(-(usable - span) / 2.0..=(usable - span) / 2.0);
        let slot_idx = rng.gen_range(0..total_slots);
        let mut period_start = 0.0;
        while period_start < duration {
            let t0 = period_start + slot_idx as f64 * slot + 13.0 * sym;
            if t0 + sym <= duration {
                layout.srs.push(Placement {
                    t_start: t0,
                    duration: sym,
                    f_low: f_center - span / 2.0,
                    f_high: f_center + span / 2.0,
                });
            }
            period_start += OVERLAY_PERIOD_S;
        }
    }
    layout
}

/// OFDM tile waveform for an NR/LTE/WLAN signal record: subcarrier spacing
/// from the technology, active bins from the record bandwidth, symbols from
/// the record's constellation.
pub(crate) fn ofdm_tile_burst(
    rec: &SceneRecord,
    sig: &SignalRecord,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let scs = match (&sig.technology, &sig.tech_attrs) {
        (Technology::Nr, TechAttrs::Nr { scs_khz, .. }) => *scs_khz as f64 * 1000.0,
        (Technology::Lte, _) => LTE_SCS_HZ,
        (Technology::Wlan, _) => WLAN_SCS_HZ,
        (t, _) => {
            return Err(Error::Config(format!(
                "ofdm tile burst for non-OFDM technology {t:?}"
            )))
        }
    };
    let active = (sig.bandwidth() / scs).round().max(1.0) as u32;
    let points = constellation(&sig.mod_class.params)?;
    let n_out = (sig.duration() * rec.fs).round() as usize;
    let (samples, _) = ofdm_burst(active, scs, n_out, rec.fs, sig.f_center(), seed, &points)?;
    Ok(samples)
}

/// Overlay bursts of a scene (empty unless the scene carries NR records).
pub(crate) fn overlay_bursts(rec: &SceneRecord) -> Result<Vec<OverlayBurst>> {
    let Some(nr) = rec
        .signals
        .iter()
        .find(|s| s.technology == Technology::Nr)
    else {
        return Ok(Vec::new());
    };
    let TechAttrs::Nr {
        scs_khz,
        ssb_pattern,
        csirs_count,
        srs_count,
        ..
    } = &nr.tech_attrs
    else {
        return Ok(Vec::new());
    };
    let snr_db = rec
        .signals
        .iter()
        .filter(|s| s.technology == Technology::Nr)
        .map(|s| s.snr_db)
        .sum::<f64>()
        / rec.signals.len().max(1) as f64;
    let layout = nr_overlay_layout(
        rec.seed,
        rec.fs,
        rec.duration,
        *scs_khz,
        *ssb_pattern,
        *csirs_count,
        *srs_count,
    );
    let scs = *scs_khz as f64 * 1000.0;
    let qpsk = constellation(&crate::scene::registry::ModParams::Psk { order: 4 })?;
    let mut out = Vec::new();
    for (idx, p) in layout
        .ssb
        .iter()
        .chain(layout.csirs.iter())
        .chain(layout.srs.iter())
        .enumerate()
    {
        let active = ((p.f_high - p.f_low) / scs).round().max(1.0) as u32;
        let n_out = (p.duration * rec.fs).round() as usize;
        if n_out == 0 {
            continue;
        }
        let seed = derive_seed(rec.seed, "overlay", idx as u64);
        let f_center = 0.5 * (p.f_low + p.f_high);
        let (samples, _) = ofdm_burst(active, scs, n_out, rec.fs, f_center, seed, &qpsk)?;
        out.push(OverlayBurst {
            samples,
            t_start: p.t_start,
            f_low: p.f_low,
            f_high: p.f_high,
            snr_db,
        });
    }
    Ok(out)
}

fn other_attrs(pairs: &[(&str, serde_json::Value)]) -> TechAttrs {
    TechAttrs::Other {
        attrs: pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
    }
}

/// NR carrier: per-UE PRB-contiguous allocations plus overlay features.
fn build_nr(
    link: LinkDir,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let mut rng = stream(seed, "nr-config", 0);
    let scs_khz = *[15u32, 30, 30, 60, 120]
        .get(rng.gen_range(0..5))
        .unwrap();
    let scs = scs_khz as f64 * 1000.0;
    let usable = NR_BAND_FRAC * fs;
    let prb_bw = 12.0 * scs;
    let n_prb = (usable / prb_bw).floor().max(1.0) as u32;
    let ue_count = rng.gen_range(1..=5u32);
    let ssb_pattern = if link != LinkDir::Dl {
        SsbPattern::Na
    } else if rng.gen_bool(0.15) {
        SsbPattern::Na
    } else {
        match scs_khz {
            15 => SsbPattern::A,
            30 => {
                if rng.gen_bool(0.5) {
                    SsbPattern::B
                } else {
                    SsbPattern::C
                }
            }
            120 => SsbPattern::D,
            _ => SsbPattern::Na,
        }
    };
    let csirs_count = if link == LinkDir::Dl {
        rng.gen_range(0..=3u32)
    } else {
        0
    };
    let srs_count = if link == LinkDir::Ul {
        rng.gen_range(1..=3u32)
    } else {
        0
    };
    let attrs = TechAttrs::Nr {
        scs_khz,
        ssb_pattern,
        csirs_count,
        srs_count,
        ue_count,
    };

    let slot = slot_duration(scs);
    let total_slots = (duration / slot).floor().max(1.0) as usize;
    let band_low = -(n_prb as f64) * prb_bw / 2.0;
    let mut records = Vec::new();
    for ue in 0..ue_count {
        let mut ue_rng = stream(seed, "nr-ue", ue as u64);
        let prb_len = ue_rng.gen_range(1..=(n_prb / 2).max(1));
        let prb_start = ue_rng.gen_range(0..=(n_prb - prb_len));
        let max_len = total_slots.min(8).max(1);
        let len_slots = ue_rng.gen_range(1..=max_len);
        let start_slot = ue_rng.gen_range(0..=(total_slots - len_slots));
        let t0 = start_slot as f64 * slot;
        let t1 = (t0 + len_slots as f64 * slot).min(duration);
        let f_low = band_low + prb_start as f64 * prb_bw;
        let f_high = f_low + prb_len as f64 * prb_bw;
        let class = qam_class(&registry, &mut ue_rng, &["qpsk", "16qam", "64qam", "256qam"]);
        records.push(SignalRecord {
            id: ue,
            technology: Technology::Nr,
            link,
            mod_class: class,
            t_interval: [t0, t1],
            f_interval: [f_low, f_high],
            snr_db: ue_rng.gen_range(snr_range.0..=snr_range.1),
            tech_attrs: attrs.clone(),
        });
    }
    records
}

/// LTE carrier: fixed 15 kHz grid, per-UE allocations.
fn build_lte(
    link: LinkDir,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let mut rng = stream(seed, "lte-config", 0);
    let usable = LTE_BAND_FRAC * fs;
    let prb_bw = 12.0 * LTE_SCS_HZ;
    let n_prb = (usable / prb_bw).floor().max(1.0) as u32;
    let slot = slot_duration(LTE_SCS_HZ);
    let total_slots = (duration / slot).floor().max(1.0) as usize;
    let band_low = -(n_prb as f64) * prb_bw / 2.0;
    let ue_count = rng.gen_range(1..=4u32);
    let attrs = other_attrs(&[
        ("standard", json!("lte")),
        ("prb_count", json!(n_prb)),
        ("ue_count", json!(ue_count)),
    ]);
    let mut records = Vec::new();
    for ue in 0..ue_count {
        let mut ue_rng = stream(seed, "lte-ue", ue as u64);
        let prb_len = ue_rng.gen_range((n_prb / 4).max(1)..=(n_prb * 3 / 4).max(1));
        let prb_start = ue_rng.gen_range(0..=(n_prb - prb_len));
        let max_len = total_slots.min(10).max(1);
        let len_slots = ue_rng.gen_range(1..=max_len);
        let start_slot = ue_rng.gen_range(0..=(total_slots - len_slots));
        let t0 = start_slot as f64 * slot;
        let t1 = (t0 + len_slots as f64 * slot).min(duration);
        let f_low = band_low + prb_start as f64 * prb_bw;
        records.push(SignalRecord {
            id: ue,
            technology: Technology::Lte,
            link,
            mod_class: qam_class(&registry, &mut ue_rng, &["qpsk", "16qam", "64qam"]),
            t_interval: [t0, t1],
            f_interval: [f_low, f_low + prb_len as f64 * prb_bw],
            snr_db: ue_rng.gen_range(snr_range.0..=snr_range.1),
            tech_attrs: attrs.clone(),
        });
    }
    records
}

/// WLAN OFDMA PPDU with an explicit RU layout.
pub(crate) fn build_wlan_with_users(
    standard: WlanStandard,
    users: u32,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let mut rng = stream(seed, "wlan-config", 0);
    let band = WLAN_BAND_FRAC * fs;
    // 11be: one user per RU. 11ax: RUs may host MU-MIMO groups.
    let mut tiles_users: Vec<Vec<u32>> = Vec::new();
    let mut next_user = 0u32;
    while next_user < users {
        let group = match standard {
            WlanStandard::Be => 1,
            WlanStandard::Ax => rng.gen_range(1..=4u32).min(users - next_user),
        };
        tiles_users.push((next_user..next_user + group).collect());
        next_user += group;
    }
    let n_tiles = tiles_users.len();
    let tile_bw = band / n_tiles as f64;
    let t0 = 0.03 * duration;
    let t1 = 0.97 * duration;
    let ru_layout: Vec<RuTile> = tiles_users
        .iter()
        .enumerate()
        .map(|(i, user_ids)| {
            let center = -band / 2.0 + (i as f64 + 0.5) * tile_bw;
            let active = ((tile_bw * 0.85) / WLAN_SCS_HZ).floor().max(1.0);
            let span = active * WLAN_SCS_HZ;
            RuTile {
                index: i as u32,
                f_low: center - span / 2.0,
                f_high: center + span / 2.0,
                user_ids: user_ids.clone(),
            }
        })
        .collect();
    let attrs = TechAttrs::Wlan {
        standard,
        user_count: users,
        ru_layout: ru_layout.clone(),
    };
    ru_layout
        .iter()
        .map(|tile| {
            let mut tile_rng = stream(seed, "wlan-tile", tile.index as u64);
            SignalRecord {
                id: tile.index,
                technology: Technology::Wlan,
                link: LinkDir::Dl,
                mod_class: qam_class(
                    &registry,
                    &mut tile_rng,
                    &["qpsk", "16qam", "64qam", "256qam"],
                ),
                t_interval: [t0, t1],
                f_interval: [tile.f_low, tile.f_high],
                snr_db: tile_rng.gen_range(snr_range.0..=snr_range.1),
                tech_attrs: attrs.clone(),
            }
        })
        .collect()
}

fn build_wlan(
    standard: WlanStandard,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Vec<SignalRecord> {
    let mut rng = stream(seed, "wlan-users", 0);
    let users = rng.gen_range(1..=60u32);
    build_wlan_with_users(standard, users, seed, fs, duration, snr_range)
}

/// Bluetooth FHSS: one GFSK hop per dwell on a seeded 1 MHz channel grid.
fn build_bt(seed: u64, fs: f64, duration: f64, snr_range: (f64, f64)) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let gfsk = registry.get("gfsk").unwrap().clone();
    let mut rng = stream(seed, "bt-hops", 0);
    let channels = ((0.8 * fs) / BT_CHANNEL_HZ).floor().max(1.0) as i64;
    let n_hops = ((duration / BT_HOP_S).floor() as usize).max(1);
    let snr_db = rng.gen_range(snr_range.0..=snr_range.1);
    let attrs = other_attrs(&[
        ("hop_count", json!(n_hops)),
        ("channel_count", json!(channels)),
    ]);
    (0..n_hops)
        .map(|i| {
            let ch = rng.gen_range(0..channels);
            let f_center = (ch as f64 - (channels as f64 - 1.0) / 2.0) * BT_CHANNEL_HZ;
            let t0 = i as f64 * BT_HOP_S;
            let t1 = (t0 + BT_HOP_S * 0.9).min(duration);
            SignalRecord {
                id: i as u32,
                technology: Technology::Bt,
                link: LinkDir::Na,
                mod_class: gfsk.clone(),
                t_interval: [t0, t1],
                f_interval: [f_center - BT_CHANNEL_HZ / 2.0, f_center + BT_CHANNEL_HZ / 2.0],
                snr_db,
                tech_attrs: attrs.clone(),
            }
        })
        .collect()
}

/// DVB-S2: one wideband PSK/APSK-family carrier spanning the recording.
fn build_dvbs2(seed: u64, fs: f64, duration: f64, snr_range: (f64, f64)) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let mut rng = stream(seed, "dvbs2-config", 0);
    let class = if rng.gen_bool(0.5) { "qpsk" } else { "8psk" };
    let mod_class = registry.get(class).unwrap().clone();
    let symbol_rate = fs / 3.0;
    let bw = symbol_rate * (1.0 + crate::scene::registry::RRC_ROLL_OFF);
    let f_center = rng.gen_range(-0.05 * fs..0.05 * fs);
    let attrs = other_attrs(&[
        ("modcod", json!(class)),
        ("symbol_rate_hz", json!(symbol_rate)),
    ]);
    vec![SignalRecord {
        id: 0,
        technology: Technology::Dvbs2,
        link: LinkDir::Na,
        mod_class,
        t_interval: [0.0, duration],
        f_interval: [f_center - bw / 2.0, f_center + bw / 2.0],
        snr_db: rng.gen_range(snr_range.0..=snr_range.1),
        tech_attrs: attrs,
    }]
}

/// UMTS: one continuous WCDMA-like QPSK carrier.
fn build_umts(
    link: LinkDir,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Vec<SignalRecord> {
    let registry = Registry::builtin();
    let mut rng = stream(seed, "umts-config", 0);
    let chip_rate = fs / 4.0;
    let bw = chip_rate * (1.0 + crate::scene::registry::RRC_ROLL_OFF);
    let f_center = rng.gen_range(-0.08 * fs..0.08 * fs);
    let attrs = other_attrs(&[("chip_rate_hz", json!(chip_rate))]);
    vec![SignalRecord {
        id: 0,
        technology: Technology::Umts,
        link,
        mod_class: registry.get("qpsk").unwrap().clone(),
        t_interval: [0.0, duration],
        f_interval: [f_center - bw / 2.0, f_center + bw / 2.0],
        snr_db: rng.gen_range(snr_range.0..=snr_range.1),
        tech_attrs: attrs,
    }]
}

/// Build the signal records for one technology choice.
pub(crate) fn build_tech_records(
    choice: TechChoice,
    seed: u64,
    fs: f64,
    duration: f64,
    snr_range: (f64, f64),
) -> Result<Vec<SignalRecord>> {
    Ok(match choice {
        TechChoice::Generic => {
            return Err(Error::Config("generic scenes use the burst sampler".into()))
        }
        TechChoice::NrDl => build_nr(LinkDir::Dl, seed, fs, duration, snr_range),
        TechChoice::NrUl => build_nr(LinkDir::Ul, seed, fs, duration, snr_range),
        TechChoice::LteDl => build_lte(LinkDir::Dl, seed, fs, duration, snr_range),
        TechChoice::LteUl => build_lte(LinkDir::Ul, seed, fs, duration, snr_range),
        TechChoice::Umts => build_umts(LinkDir::Dl, seed, fs, duration, snr_range),
        TechChoice::WlanAx => build_wlan(WlanStandard::Ax, seed, fs, duration, snr_range),
        TechChoice::WlanBe => build_wlan(WlanStandard::Be, seed, fs, duration, snr_range),
        TechChoice::Dvbs2 => build_dvbs2(seed, fs, duration, snr_range),
        TechChoice::Bt => build_bt(seed, fs, duration, snr_range),
    })
}

const DEFAULT_SNR_RANGE: (f64, f64) = (10.0, 50.0);

/// Emulate one technology recording: structural occupancy plus exact
/// metadata. Unsupported (technology, link) pairs are configuration errors.
pub fn emulate_technology(
    tech: Technology,
    link: LinkDir,
    seed: u64,
    fs: f64,
    duration: f64,
) -> Result<(IqBuffer, Vec<SignalRecord>)> {
    let choice = match (tech, link) {
        (Technology::Nr, LinkDir::Dl) => TechChoice::NrDl,
        (Technology::Nr, LinkDir::Ul) => TechChoice::NrUl,
        (Technology::Lte, LinkDir::Dl) => TechChoice::LteDl,
        (Technology::Lte, LinkDir::Ul) => TechChoice::LteUl,
        (Technology::Umts, LinkDir::Dl | LinkDir::Ul) => TechChoice::Umts,
        (Technology::Wlan, LinkDir::Dl) => {
            if stream(seed, "wlan-standard", 0).gen_bool(0.5) {
                TechChoice::WlanAx
            } else {
                TechChoice::WlanBe
            }
        }
        (Technology::Dvbs2, LinkDir::Na) => TechChoice::Dvbs2,
        (Technology::Bt, LinkDir::Na) => TechChoice::Bt,
        (tech, link) => {
            return Err(Error::Config(format!(
                "unsupported technology/link combination {tech:?}/{link:?}"
            )))
        }
    };
    let records = build_tech_records(choice, seed, fs, duration, DEFAULT_SNR_RANGE)?;
    let rec = SceneRecord {
        schema: SCENE_SCHEMA.into(),
        scene_id: format!("emu-{seed:016x}"),
        fs,
        duration,
        signals: records.clone(),
        overlap_prob: 0.0,
        seed,
        rejections: 0,
        impairments: vec![],
        iq_path: None,
    };
    let iq = compose_scene(&rec, seed)?;
    Ok((iq, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 7_680_000.0;
    const DUR: f64 = 0.02;

    #[test]
    fn ssb_disabled_means_zero_ssb_bursts() {
        let layout = nr_overlay_layout(9, FS, DUR, 30, SsbPattern::Na, 2, 0, );
        assert!(layout.ssb.is_empty());
        assert!(!layout.csirs.is_empty());
    }

    #[test]
    fn ssb_pattern_d_has_more_candidates_than_a() {
        let a = nr_overlay_layout(9, FS, DUR, 15, SsbPattern::A, 0, 0);
        let d = nr_overlay_layout(9, FS, DUR, 120, SsbPattern::D, 0, 0);
        assert!(!a.ssb.is_empty());
        assert!(d.ssb.len() > a.ssb.len());
    }

    #[test]
    fn csirs_zero_means_no_csirs_placements() {
        let layout = nr_overlay_layout(4, FS, DUR, 15, SsbPattern::A, 0, 0);
        assert!(layout.csirs.is_empty());
    }

    #[test]
    fn wlan_be_assigns_one_user_per_disjoint_tile() {
        let records = build_wlan_with_users(WlanStandard::Be, 9, 5, FS, DUR, (10.0, 50.0));
        assert_eq!(records.len(), 9);
        let TechAttrs::Wlan {
            user_count,
            ru_layout,
            ..
        } = &records[0].tech_attrs
        else {
            panic!("wlan attrs expected")
        };
        assert_eq!(*user_count, 9);
        assert_eq!(ru_layout.len(), 9);
        for tile in ru_layout {
            assert_eq!(tile.user_ids.len(), 1);
        }
        // Tile-disjointness oracle: every pair of tiles has empty overlap.
        for i in 0..ru_layout.len() {
            for j in (i + 1)..ru_layout.len() {
                let a = &ru_layout[i];
                let b = &ru_layout[j];
                let inter = a.f_high.min(b.f_high) - a.f_low.max(b.f_low);
                assert!(inter <= 0.0, "tiles {i} and {j} overlap by {inter}");
            }
        }
    }

    #[test]
    fn wlan_ax_can_share_tiles() {
        let records = build_wlan_with_users(WlanStandard::Ax, 24, 5, FS, DUR, (10.0, 50.0));
        let TechAttrs::Wlan {
            user_count,
            ru_layout,
            ..
        } = &records[0].tech_attrs
        else {
            panic!("wlan attrs expected")
        };
        assert_eq!(*user_count, 24);
        // Distinct users in the layout equal the declared count.
        let mut seen: Vec<u32> = ru_layout.iter().flat_map(|t| t.user_ids.clone()).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 24);
        // MU-MIMO: fewer tiles than users.
        assert!(ru_layout.len() < 24);
    }

    #[test]
    fn dvbs2_uplink_is_config_error() {
        let err = emulate_technology(Technology::Dvbs2, LinkDir::Ul, 3, FS, DUR);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn bt_hops_sit_on_channel_grid() {
        let records = build_bt(11, FS, DUR, (10.0, 50.0));
        assert_eq!(records.len(), 32); // 20 ms / 625 us
        for rec in &records {
            let center = 0.5 * (rec.f_interval[0] + rec.f_interval[1]);
            let steps = center / BT_CHANNEL_HZ;
            assert!((steps - steps.round()).abs() < 1e-9 || (steps.fract().abs() - 0.5).abs() < 1e-9);
            assert!((rec.bandwidth() - BT_CHANNEL_HZ).abs() < 1e-6);
        }
    }

    #[test]
    fn nr_records_share_attrs_and_fit_band() {
        for link in [LinkDir::Dl, LinkDir::Ul] {
            for seed in 0..8u64 {
                let records = build_nr(link, seed, FS, DUR, (10.0, 50.0));
                let TechAttrs::Nr {
                    ue_count,
                    srs_count,
                    csirs_count,
                    ssb_pattern,
                    ..
                } = &records[0].tech_attrs
                else {
                    panic!("nr attrs expected")
                };
                assert_eq!(records.len(), *ue_count as usize);
                if link == LinkDir::Ul {
                    assert_eq!(*ssb_pattern, SsbPattern::Na);
                    assert_eq!(*csirs_count, 0);
                    assert!(*srs_count >= 1);
                } else {
                    assert_eq!(*srs_count, 0);
                }
                for rec in &records {
                    rec.validate(FS, DUR).unwrap();
                }
            }
        }
    }

    #[test]
    fn emulation_returns_full_length_iq() {
        let (iq, records) = emulate_technology(Technology::Umts, LinkDir::Dl, 7, FS, 0.005).unwrap();
        assert_eq!(iq.len(), (0.005 * FS).round() as usize);
        assert_eq!(records.len(), 1);
    }
}
