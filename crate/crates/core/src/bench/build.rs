//! Benchmark item construction from scene metadata.
//!
//! Ground truth is recomputed from the records at build time and can always
//! be re-derived; `render_ground_truth` turns it back into text, which is
//! what the oracle predictor feeds the scorer.

use super::{
    adjacent_pairs, global_overlap_label, overlap_strength, overlap_type, wnuc_bucket,
    wnuc_hard_target, BenchTask, Difficulty, OverlapLevel, OverlapType,
};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::scene::registry::Registry;
use crate::scene::{LinkDir, SceneRecord, SsbPattern, TechAttrs, Technology, WlanStandard};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NrieAttribute {
    UeCount,
    Scs,
    SsbPattern,
    CsirsCount,
    SrsCount,
}

impl NrieAttribute {
    pub fn name(&self) -> &'static str {
        match self {
            NrieAttribute::UeCount => "ue_count",
            NrieAttribute::Scs => "scs",
            NrieAttribute::SsbPattern => "ssb_pattern",
            NrieAttribute::CsirsCount => "csirs_count",
            NrieAttribute::SrsCount => "srs_count",
        }
    }

    /// Attributes admissible for a link direction; SSB/CSI-RS are DL-only,
    /// SRS is UL-only.
    pub fn for_link(link: LinkDir) -> &'static [NrieAttribute] {
        match link {
            LinkDir::Dl => &[
                NrieAttribute::UeCount,
                NrieAttribute::Scs,
                NrieAttribute::SsbPattern,
                NrieAttribute::CsirsCount,
            ],
            _ => &[
                NrieAttribute::UeCount,
                NrieAttribute::Scs,
                NrieAttribute::SrsCount,
            ],
        }
    }
}

/// Structured, recomputable answer for one benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundTruth {
    /// Ordered class (or family) labels by signal start time.
    ModList { labels: Vec<String> },
    GlobalOverlap {
        label: OverlapType,
    },
    PairOverlap {
        sig_a: u32,
        sig_b: u32,
        label: OverlapType,
    },
    PairStrength {
        sig_a: u32,
        sig_b: u32,
        time_level: OverlapLevel,
        freq_level: OverlapLevel,
    },
    Tech {
        label: String,
    },
    UserBucket {
        start: u32,
        end: u32,
    },
    UserCount {
        target: u32,
    },
    NrAttribute {
        attribute: NrieAttribute,
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub item_id: String,
    pub scene_id: String,
    pub image_path: String,
    pub task: BenchTask,
    pub difficulty: Difficulty,
    pub question: String,
    pub ground_truth: GroundTruth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_list: Option<Vec<String>>,
}

/// Render the structured ground truth as answer text. A predictor that
/// emits this must score exactly 1.0 on every task.
pub fn render_ground_truth(item: &BenchmarkItem) -> String {
    match &item.ground_truth {
        GroundTruth::ModList { labels } => labels.join(", "),
        GroundTruth::GlobalOverlap { label } => label.label().to_string(),
        GroundTruth::PairOverlap { label, .. } => label.label().to_string(),
        GroundTruth::PairStrength {
            time_level,
            freq_level,
            ..
        } => format!(
            "time: {}, frequency: {}",
            time_level.label(),
            freq_level.label()
        ),
        GroundTruth::Tech { label } => label.clone(),
        GroundTruth::UserBucket { start, end } => format!("[{start}, {end}]"),
        GroundTruth::UserCount { target } => target.to_string(),
        GroundTruth::NrAttribute { value, .. } => value.clone(),
    }
}

/// WTR label of a single-technology scene.
pub fn wtr_label(scene: &SceneRecord) -> Option<String> {
    let first = scene.signals.first()?;
    let label = match first.technology {
        Technology::Dvbs2 => "dvb-s2".to_string(),
        Technology::Bt => "bt".to_string(),
        Technology::Umts => "umts".to_string(),
        Technology::Lte => "lte".to_string(),
        Technology::Nr => match first.link {
            LinkDir::Dl => "nr-dl".to_string(),
            LinkDir::Ul => "nr-ul".to_string(),
            LinkDir::Na => return None,
        },
        Technology::Wlan => match &first.tech_attrs {
            TechAttrs::Wlan { standard, .. } => match standard {
                WlanStandard::Ax => "wlan-ax".to_string(),
                WlanStandard::Be => "wlan-be".to_string(),
            },
            _ => return None,
        },
        Technology::Generic => return None,
    };
    Some(label)
}

fn nr_attrs(scene: &SceneRecord) -> Option<(LinkDir, u32, SsbPattern, u32, u32, u32)> {
    let sig = scene
        .signals
        .iter()
        .find(|s| s.technology == Technology::Nr)?;
    match &sig.tech_attrs {
        TechAttrs::Nr {
            scs_khz,
            ssb_pattern,
            csirs_count,
            srs_count,
            ue_count,
        } => Some((
            sig.link,
            *scs_khz,
            *ssb_pattern,
            *csirs_count,
            *srs_count,
            *ue_count,
        )),
        _ => None,
    }
}

fn wlan_attrs(scene: &SceneRecord) -> Option<(WlanStandard, u32)> {
    let sig = scene
        .signals
        .iter()
        .find(|s| s.technology == Technology::Wlan)?;
    match &sig.tech_attrs {
        TechAttrs::Wlan {
            standard,
            user_count,
            ..
        } => Some((*standard, *user_count)),
        _ => None,
    }
}

/// Signals ordered by start time (stable on id).
fn signals_by_start_time(scene: &SceneRecord) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scene.signals.len()).collect();
    order.sort_by(|&a, &b| {
        scene.signals[a]
            .t_start()
            .partial_cmp(&scene.signals[b].t_start())
            .unwrap()
            .then(scene.signals[a].id.cmp(&scene.signals[b].id))
    });
    order
}

fn image_path_for(scene: &SceneRecord, image_prefix: &str) -> String {
    format!("{image_prefix}{}.png", scene.scene_id)
}

fn nrie_truth_value(
    attribute: NrieAttribute,
    scs: u32,
    ssb: SsbPattern,
    csirs: u32,
    srs: u32,
    ue: u32,
) -> String {
    match attribute {
        NrieAttribute::UeCount => ue.to_string(),
        NrieAttribute::Scs => scs.to_string(),
        NrieAttribute::SsbPattern => match ssb {
            SsbPattern::Na => "n/a".to_string(),
            other => other.label().to_ascii_lowercase(),
        },
        NrieAttribute::CsirsCount => csirs.to_string(),
        NrieAttribute::SrsCount => srs.to_string(),
    }
}

fn nrie_question(attribute: NrieAttribute) -> &'static str {
    match attribute {
        NrieAttribute::UeCount => "How many distinct UE transmissions are present in this NR spectrogram? Answer with a single integer.",
        NrieAttribute::Scs => "What is the subcarrier spacing of this NR carrier in kHz? Answer with one of 15, 30, 60, 120.",
        NrieAttribute::SsbPattern => "Which SSB pattern does this NR downlink use? Answer with a letter (A-D) or N/A if no SSB is present.",
        NrieAttribute::CsirsCount => "How many distinct CSI-RS resources are configured in this downlink? Answer with a single integer.",
        NrieAttribute::SrsCount => "How many distinct SRS resources are present in this uplink? Answer with a single integer.",
    }
}

/// Build `n` benchmark items for a task/difficulty cell.
///
/// Scenes are reused round-robin when `n` exceeds the eligible scene count;
/// ground truth stays recomputable either way. WBMC-medium items carry a
/// candidate list of the true classes plus two seeded distractors per true
/// class.
pub fn build_benchmark(
    scenes: &[SceneRecord],
    task: BenchTask,
    difficulty: Difficulty,
    n: usize,
    seed: u64,
    image_prefix: &str,
) -> Result<Vec<BenchmarkItem>> {
    let mut items = Vec::with_capacity(n);
    let mut push = |idx: usize,
                    scene: &SceneRecord,
                    question: String,
                    truth: GroundTruth,
                    cands: Option<Vec<String>>| {
        items.push(BenchmarkItem {
            item_id: format!("{}-{}-{idx:05}", task.name().to_ascii_lowercase(), difficulty.name()),
            scene_id: scene.scene_id.clone(),
            image_path: image_path_for(scene, image_prefix),
            task,
            difficulty,
            question,
            ground_truth: truth,
            candidate_list: cands,
        });
    };

    match task {
        BenchTask::Wbmc => {
            let eligible: Vec<&SceneRecord> = scenes
                .iter()
                .filter(|s| s.signals.iter().all(|x| x.technology == Technology::Generic))
                .collect();
            if eligible.is_empty() {
                return Err(Error::BenchBuild(format!(
                    "WBMC needs generic scenes; 0 of {} eligible",
                    scenes.len()
                )));
            }
            let registry = Registry::builtin();
            for idx in 0..n {
                let scene = eligible[idx % eligible.len()];
                let order = signals_by_start_time(scene);
                let classes: Vec<String> = order
                    .iter()
                    .map(|&i| scene.signals[i].mod_class.name.clone())
                    .collect();
                match difficulty {
                    Difficulty::Easy => {
                        let families: Vec<String> = order
                            .iter()
                            .map(|&i| scene.signals[i].mod_class.family.name().to_string())
                            .collect();
                        push(
                            idx,
                            scene,
                            "List the modulation family of each signal in this spectrogram, ordered by start time.".into(),
                            GroundTruth::ModList { labels: families },
                            None,
                        );
                    }
                    Difficulty::Medium => {
                        let mut rng = stream(seed, "wbmc-distractors", idx as u64);
                        let mut cands: Vec<String> = classes.clone();
                        cands.sort();
                        cands.dedup();
                        let truth_count = cands.len();
                        let pool: Vec<&str> = registry
                            .names()
                            .into_iter()
                            .filter(|name| !cands.iter().any(|c| c == name))
                            .collect();
                        let mut extra: Vec<&str> = pool.clone();
                        extra.shuffle(&mut rng);
                        for d in extra.into_iter().take(2 * truth_count) {
                            cands.push(d.to_string());
                        }
                        cands.shuffle(&mut rng);
                        push(
                            idx,
                            scene,
                            format!(
                                "Identify the exact modulation class of each signal, ordered by start time, choosing from: {}.",
                                cands.join(", ")
                            ),
                            GroundTruth::ModList { labels: classes },
                            Some(cands),
                        );
                    }
                    Difficulty::Hard => {
                        push(
                            idx,
                            scene,
                            "Identify the exact modulation class of each signal in this spectrogram, ordered by start time.".into(),
                            GroundTruth::ModList { labels: classes },
                            None,
                        );
                    }
                }
            }
        }
        BenchTask::Wbod => {
            let eligible: Vec<&SceneRecord> =
                scenes.iter().filter(|s| s.signals.len() >= 2).collect();
            if eligible.is_empty() {
                return Err(Error::BenchBuild(format!(
                    "WBOD needs scenes with >=2 signals; 0 of {} eligible",
                    scenes.len()
                )));
            }
            for idx in 0..n {
                let scene = eligible[idx % eligible.len()];
                match difficulty {
                    Difficulty::Easy => {
                        let label = global_overlap_label(scene)?;
                        push(
                            idx,
                            scene,
                            "Describe whether any signals in this spectrogram overlap in time and/or frequency. Answer with one of: neither, time-only, frequency-only, both.".into(),
                            GroundTruth::GlobalOverlap { label },
                            None,
                        );
                    }
                    Difficulty::Medium | Difficulty::Hard => {
                        let pairs = adjacent_pairs(scene);
                        let mut rng = stream(seed, "wbod-pair", idx as u64);
                        let &(a, b) = &pairs[rng.gen_range(0..pairs.len())];
                        let (sa, sb) = (&scene.signals[a], &scene.signals[b]);
                        if difficulty == Difficulty::Medium {
                            let label = overlap_type(sa, sb);
                            push(
                                idx,
                                scene,
                                format!(
                                    "Consider signal {} and signal {}. Do they overlap in time and/or frequency? Answer with one of: neither, time-only, frequency-only, both.",
                                    sa.id, sb.id
                                ),
                                GroundTruth::PairOverlap {
                                    sig_a: sa.id,
                                    sig_b: sb.id,
                                    label,
                                },
                                None,
                            );
                        } else {
                            let s = overlap_strength(sa, sb);
                            push(
                                idx,
                                scene,
                                format!(
                                    "How strongly do signal {} and signal {} overlap along each axis? Answer as 'time: <level>, frequency: <level>' with levels none, slightly, considerably, almost fully.",
                                    sa.id, sb.id
                                ),
                                GroundTruth::PairStrength {
                                    sig_a: sa.id,
                                    sig_b: sb.id,
                                    time_level: s.time_level,
                                    freq_level: s.freq_level,
                                },
                                None,
                            );
                        }
                    }
                }
            }
        }
        BenchTask::Wtr => {
            let labelled: Vec<(&SceneRecord, String)> = scenes
                .iter()
                .filter_map(|s| wtr_label(s).map(|l| (s, l)))
                .collect();
            if labelled.is_empty() {
                return Err(Error::BenchBuild(format!(
                    "WTR needs single-technology scenes; 0 of {} eligible",
                    scenes.len()
                )));
            }
            for idx in 0..n {
                let (scene, label) = &labelled[idx % labelled.len()];
                push(
                    idx,
                    scene,
                    "Which wireless technology (and link direction, when applicable) is shown in this spectrogram? Answer with one of: dvb-s2, bt, umts, lte, nr-dl, nr-ul, wlan-ax, wlan-be.".into(),
                    GroundTruth::Tech {
                        label: label.clone(),
                    },
                    None,
                );
            }
        }
        BenchTask::Wnuc => {
            let eligible: Vec<(&SceneRecord, u32)> = scenes
                .iter()
                .filter_map(|s| wlan_attrs(s).map(|(_, u)| (s, u)))
                .collect();
            if eligible.is_empty() {
                return Err(Error::BenchBuild(format!(
                    "WNUC needs WLAN scenes; 0 of {} eligible",
                    scenes.len()
                )));
            }
            for idx in 0..n {
                let (scene, users) = eligible[idx % eligible.len()];
                match difficulty {
                    Difficulty::Easy | Difficulty::Medium => {
                        let b = if difficulty == Difficulty::Easy { 15 } else { 10 };
                        let (s, e) = wnuc_bucket(users, b);
                        push(
                            idx,
                            scene,
                            format!(
                                "How many distinct WLAN users are active in this spectrogram? Answer with the {b}-user bucket interval [s, e] containing the count."
                            ),
                            GroundTruth::UserBucket { start: s, end: e },
                            None,
                        );
                    }
                    Difficulty::Hard => {
                        let target = wnuc_hard_target(users);
                        push(
                            idx,
                            scene,
                            "How many distinct WLAN users are active in this spectrogram? Answer with a single integer (exact below 10, else rounded to the nearest multiple of 10).".into(),
                            GroundTruth::UserCount { target },
                            None,
                        );
                    }
                }
            }
        }
        BenchTask::Nrie => {
            let dl: Vec<_> = scenes
                .iter()
                .filter_map(|s| nr_attrs(s).filter(|a| a.0 == LinkDir::Dl).map(|a| (s, a)))
                .collect();
            let ul: Vec<_> = scenes
                .iter()
                .filter_map(|s| nr_attrs(s).filter(|a| a.0 == LinkDir::Ul).map(|a| (s, a)))
                .collect();
            if dl.is_empty() || ul.is_empty() {
                return Err(Error::BenchBuild(format!(
                    "NRIE needs NR scenes on both links; have {} DL and {} UL",
                    dl.len(),
                    ul.len()
                )));
            }
            for idx in 0..n {
                // Alternate DL/UL halves to keep the split balanced.
                let (scene, (link, scs, ssb, csirs, srs, ue)) = if idx % 2 == 0 {
                    dl[(idx / 2) % dl.len()]
                } else {
                    ul[(idx / 2) % ul.len()]
                };
                let attrs = NrieAttribute::for_link(link);
                let attribute = attrs[(idx / 2) % attrs.len()];
                let value = nrie_truth_value(attribute, scs, ssb, csirs, srs, ue);
                push(
                    idx,
                    scene,
                    nrie_question(attribute).into(),
                    GroundTruth::NrAttribute { attribute, value },
                    None,
                );
            }
        }
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse::{parse_answer, ParsedAnswer};
    use crate::scene::registry::Registry;
    use crate::scene::SignalRecord;

    fn generic_scene(id: &str, class_names: &[&str]) -> SceneRecord {
        let registry = Registry::builtin();
        let signals = class_names
            .iter()
            .enumerate()
            .map(|(i, name)| SignalRecord {
                id: i as u32,
                technology: Technology::Generic,
                link: LinkDir::Na,
                mod_class: registry.get(name).unwrap().clone(),
                t_interval: [i as f64, i as f64 + 0.5],
                f_interval: [i as f64 * 1000.0, i as f64 * 1000.0 + 500.0],
                snr_db: 20.0,
                tech_attrs: TechAttrs::none(),
            })
            .collect();
        SceneRecord {
            schema: crate::scene::SCENE_SCHEMA.into(),
            scene_id: id.into(),
            fs: 1e6,
            duration: 10.0,
            signals,
            overlap_prob: 0.0,
            seed: 1,
            rejections: 0,
            impairments: vec![],
            iq_path: None,
        }
    }

    #[test]
    fn wbmc_truth_is_start_time_ordered() {
        let mut scene = generic_scene("s0", &["qpsk", "16qam"]);
        // Make signal 1 start first.
        scene.signals[1].t_interval = [0.0, 0.4];
        scene.signals[0].t_interval = [1.0, 1.5];
        let items =
            build_benchmark(&[scene], BenchTask::Wbmc, Difficulty::Hard, 1, 7, "img/").unwrap();
        assert_eq!(
            items[0].ground_truth,
            GroundTruth::ModList {
                labels: vec!["16qam".into(), "qpsk".into()]
            }
        );
    }

    #[test]
    fn wbmc_medium_candidates_cover_truth_plus_distractors() {
        let scene = generic_scene("s0", &["qpsk", "16qam", "qpsk"]);
        let items =
            build_benchmark(&[scene], BenchTask::Wbmc, Difficulty::Medium, 1, 7, "").unwrap();
        let cands = items[0].candidate_list.as_ref().unwrap();
        assert!(cands.contains(&"qpsk".to_string()));
        assert!(cands.contains(&"16qam".to_string()));
        // 2 unique true classes + 2 distractors each.
        assert_eq!(cands.len(), 2 + 4);
    }

    #[test]
    fn oracle_answers_parse_and_match() {
        let scene = generic_scene("s0", &["qpsk", "16qam"]);
        for difficulty in Difficulty::ALL {
            let items = build_benchmark(
                &[scene.clone()],
                BenchTask::Wbmc,
                difficulty,
                2,
                3,
                "",
            )
            .unwrap();
            for item in &items {
                let rendered = render_ground_truth(item);
                let parsed = parse_answer(
                    &rendered,
                    item.task,
                    item.difficulty,
                    item.candidate_list.as_deref(),
                )
                .unwrap();
                match (&item.ground_truth, &parsed) {
                    (GroundTruth::ModList { labels }, ParsedAnswer::Labels(got)) => {
                        assert_eq!(labels, got)
                    }
                    other => panic!("unexpected pairing {other:?}"),
                }
            }
        }
    }

    #[test]
    fn build_fails_with_named_deficit() {
        let err = build_benchmark(&[], BenchTask::Wnuc, Difficulty::Easy, 4, 0, "");
        match err {
            Err(Error::BenchBuild(msg)) => assert!(msg.contains("WNUC")),
            other => panic!("expected build error, got {other:?}"),
        }
    }
}
