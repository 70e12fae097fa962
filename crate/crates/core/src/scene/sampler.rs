//! Rejection-sampled scene configurations.
//!
//! Generic scenes draw a burst count and then candidate bursts one at a
//! time; a candidate that violates a constraint (band containment, time
//! containment, the co-channel overlap rule) is rejected and redrawn until
//! the budget runs out. Technology scenes delegate to the structural
//! emulators and are valid by construction.

use crate::bench::{overlap_type, OverlapType};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::scene::records::{
    LinkDir, SceneRecord, SceneSpec, SignalRecord, TechAttrs, TechChoice, Technology,
    SCENE_SCHEMA,
};
use crate::scene::registry::{bandwidth_factor, Registry};
use crate::scene::tech::build_tech_records;
use rand::Rng;

fn weighted_choice(rng: &mut impl Rng, mix: &[(TechChoice, f64)]) -> Result<TechChoice> {
    let total: f64 = mix.iter().map(|(_, w)| w.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::Config("technology mix has no positive weight".into()));
    }
    let mut draw = rng.gen_range(0.0..total);
    for (choice, w) in mix {
        let w = w.max(0.0);
        if draw < w {
            return Ok(*choice);
        }
        draw -= w;
    }
    Ok(mix.last().unwrap().0)
}

/// Draw one generic burst candidate; returns the record and the name of the
/// violated constraint if it is invalid against the accepted set.
#[allow(clippy::too_many_arguments)]
fn draw_candidate(
    rng: &mut impl Rng,
    registry: &Registry,
    spec: &SceneSpec,
    classes: &[&str],
    accepted: &[SignalRecord],
    allow_overlap: bool,
    id: u32,
) -> std::result::Result<SignalRecord, &'static str> {
    let class = registry
        .get(classes[rng.gen_range(0..classes.len())])
        .expect("sampler classes are registry names")
        .clone();
    // Bandwidth between 2% and 20% of the scene band, log-uniform.
    let lo = (0.02 * spec.fs).ln();
    let hi = (0.20 * spec.fs).ln();
    let bandwidth = rng.gen_range(lo..hi).exp();
    let symbol_rate = bandwidth / bandwidth_factor(&class.params);
    let duration = rng.gen_range(0.2..0.9) * spec.duration;
    let t_start;
    let f_center;
    if allow_overlap && !accepted.is_empty() {
        // Deliberately co-channel: land on a partner's support.
        let partner = &accepted[rng.gen_range(0..accepted.len())];
        let pf = partner.f_center();
        let jitter_f = rng.gen_range(-0.25..0.25) * partner.bandwidth();
        f_center = (pf + jitter_f)
            .clamp(-(spec.fs / 2.0) + bandwidth / 2.0, spec.fs / 2.0 - bandwidth / 2.0);
        let pt = partner.t_start();
        let max_start = (spec.duration - duration).max(0.0);
        t_start = (pt + rng.gen_range(-0.2..0.2) * partner.duration()).clamp(0.0, max_start);
    } else {
        let max_off = spec.fs / 2.0 - bandwidth / 2.0;
        f_center = rng.gen_range(-max_off..max_off);
        t_start = rng.gen_range(0.0..(spec.duration - duration).max(f64::MIN_POSITIVE));
    }
    let snr_db = rng.gen_range(spec.snr_db_range.0..=spec.snr_db_range.1);
    let record = SignalRecord {
        id,
        technology: Technology::Generic,
        link: LinkDir::Na,
        mod_class: class,
        t_interval: [t_start, t_start + duration],
        f_interval: [f_center - bandwidth / 2.0, f_center + bandwidth / 2.0],
        snr_db,
        tech_attrs: TechAttrs::none(),
    };
    // Effective symbol rate sanity: at least 2 samples per symbol.
    if spec.fs / symbol_rate < 2.0 {
        return Err("symbol rate above fs/2");
    }
    if record.t_interval[1] > spec.duration + 1e-12 || record.t_interval[0] < 0.0 {
        return Err("time interval outside scene");
    }
    if record.f_interval[0] < -spec.fs / 2.0 || record.f_interval[1] > spec.fs / 2.0 {
        return Err("frequency interval outside band");
    }
    if !allow_overlap {
        for prev in accepted {
            if overlap_type(prev, &record) == OverlapType::Both {
                return Err("co-channel overlap");
            }
        }
    }
    Ok(record)
}

/// Sample one scene configuration (no IQ) by rejection sampling.
/// Deterministic for a fixed `(seed, spec)`; the rejection count is
/// recorded in the scene. Exhausting the budget names the last violated
/// constraint.
pub fn sample_scene_config(seed: u64, spec: &SceneSpec) -> Result<SceneRecord> {
    let mut rng = stream(seed, "scene-config", 0);
    let choice = weighted_choice(&mut rng, &spec.technology_mix)?;
    let mut rejections = 0u32;

    let signals = if choice == TechChoice::Generic {
        let registry = Registry::builtin();
        let all_names = registry.names();
        let classes: Vec<&str> = if spec.classes.is_empty() {
            all_names
        } else {
            // Validate requested names up front.
            for name in &spec.classes {
                registry.get(name)?;
            }
            spec.classes.iter().map(|s| s.as_str()).collect()
        };
        let count = rng.gen_range(spec.signal_count.0..=spec.signal_count.1) as usize;
        let mut accepted: Vec<SignalRecord> = Vec::with_capacity(count);
        let mut last_violation = "none";
        while accepted.len() < count {
            let allow_overlap = rng.gen_bool(spec.overlap_prob.clamp(0.0, 1.0));
            match draw_candidate(
                &mut rng,
                &registry,
                spec,
                &classes,
                &accepted,
                allow_overlap,
                accepted.len() as u32,
            ) {
                Ok(rec) => accepted.push(rec),
                Err(constraint) => {
                    last_violation = constraint;
                    rejections += 1;
                    if rejections >= spec.max_rejections {
                        return Err(Error::RejectionBudget {
                            attempts: rejections,
                            constraint: last_violation.to_string(),
                        });
                    }
                }
            }
        }
        accepted
    } else {
        let tech_seed = derive_seed(seed, "tech-scene", 0);
        build_tech_records(choice, tech_seed, spec.fs, spec.duration, spec.snr_db_range)?
    };

    let rec = SceneRecord {
        schema: SCENE_SCHEMA.into(),
        scene_id: format!("s{:016x}", derive_seed(seed, "scene-id", 0)),
        fs: spec.fs,
        duration: spec.duration,
        signals,
        overlap_prob: spec.overlap_prob,
        seed,
        rejections,
        impairments: vec![],
        iq_path: None,
    };
    rec.validate()?;
    Ok(rec)
}
