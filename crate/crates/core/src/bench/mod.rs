//! Benchmark construction and scoring.
//!
//! Five tasks: wideband modulation classification (WBMC), wideband overlap
//! detection (WBOD), wireless technology recognition (WTR), WLAN user
//! counting (WNUC), and NR information extraction (NRIE). Ground truth is
//! recomputable from scene metadata; predictions are free text run through
//! the task parsers in [`parse`].

mod build;
mod parse;
mod score;

pub use build::{build_benchmark, render_ground_truth, BenchmarkItem, GroundTruth};
pub use parse::{parse_answer, ParsedAnswer};
pub use score::{score_items, score_prediction, Prediction, ScoreCell, ScoreReport};

use crate::scene::{SceneRecord, SignalRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BenchTask {
    Wbmc,
    Wbod,
    Wtr,
    Wnuc,
    Nrie,
}

impl BenchTask {
    pub const ALL: [BenchTask; 5] = [
        BenchTask::Wbmc,
        BenchTask::Wbod,
        BenchTask::Wtr,
        BenchTask::Wnuc,
        BenchTask::Nrie,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchTask::Wbmc => "WBMC",
            BenchTask::Wbod => "WBOD",
            BenchTask::Wtr => "WTR",
            BenchTask::Wnuc => "WNUC",
            BenchTask::Nrie => "NRIE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

/// Pairwise overlap category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapType {
    Neither,
    TimeOnly,
    FrequencyOnly,
    Both,
}

impl OverlapType {
    pub const ALL: [OverlapType; 4] = [
        OverlapType::Neither,
        OverlapType::TimeOnly,
        OverlapType::FrequencyOnly,
        OverlapType::Both,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            OverlapType::Neither => "neither",
            OverlapType::TimeOnly => "time-only",
            OverlapType::FrequencyOnly => "frequency-only",
            OverlapType::Both => "both",
        }
    }
}

/// Quantized overlap-strength level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapLevel {
    None,
    Slightly,
    Considerably,
    AlmostFully,
}

impl OverlapLevel {
    pub fn label(&self) -> &'static str {
        match self {
            OverlapLevel::None => "none",
            OverlapLevel::Slightly => "slightly",
            OverlapLevel::Considerably => "considerably",
            OverlapLevel::AlmostFully => "almost fully",
        }
    }
}

/// Time- and frequency-overlap strength of a signal pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapStrength {
    pub time_level: OverlapLevel,
    pub freq_level: OverlapLevel,
}

fn intersection_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[1].min(b[1]) - a[0].max(b[0])).max(0.0)
}

fn union_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[1] - a[0]) + (b[1] - b[0]) - intersection_len(a, b)
}

/// Pairwise overlap type from strict positive-measure intersection predicates
/// per axis. Endpoint-touching intervals do not overlap.
pub fn overlap_type(a: &SignalRecord, b: &SignalRecord) -> OverlapType {
    let o_t = intersection_len(a.t_interval, b.t_interval) > 0.0;
    let o_f = intersection_len(a.f_interval, b.f_interval) > 0.0;
    match (o_t, o_f) {
        (false, false) => OverlapType::Neither,
        (true, false) => OverlapType::TimeOnly,
        (false, true) => OverlapType::FrequencyOnly,
        (true, true) => OverlapType::Both,
    }
}

/// Per-axis intersection-over-union ratios `(r_t, r_f)`.
pub fn overlap_ratios(a: &SignalRecord, b: &SignalRecord) -> (f64, f64) {
    let ratio = |x: [f64; 2], y: [f64; 2]| {
        let u = union_len(x, y);
        if u <= 0.0 {
            0.0
        } else {
            intersection_len(x, y) / u
        }
    };
    (
        ratio(a.t_interval, b.t_interval),
        ratio(a.f_interval, b.f_interval),
    )
}

/// Quantize an overlap ratio into one of the four strength levels.
pub fn quantize_ratio(r: f64) -> OverlapLevel {
    if r < 0.01 {
        OverlapLevel::None
    } else if r < 0.3 {
        OverlapLevel::Slightly
    } else if r < 0.6 {
        OverlapLevel::Considerably
    } else {
        OverlapLevel::AlmostFully
    }
}

/// Quantized overlap strength for a pair.
pub fn overlap_strength(a: &SignalRecord, b: &SignalRecord) -> OverlapStrength {
    let (r_t, r_f) = overlap_ratios(a, b);
    OverlapStrength {
        time_level: quantize_ratio(r_t),
        freq_level: quantize_ratio(r_f),
    }
}

/// Aggregate pairwise types into a single scene label:
/// any `both` pair, or a `time-only` pair coexisting with a
/// `frequency-only` pair, makes the scene `both`; otherwise the strongest
/// single-axis category present wins; otherwise `neither`.
pub fn global_label_from_types(types: &[OverlapType]) -> OverlapType {
    let has = |t: OverlapType| types.iter().any(|&x| x == t);
    if has(OverlapType::Both) {
        OverlapType::Both
    } else if has(OverlapType::TimeOnly) && has(OverlapType::FrequencyOnly) {
        OverlapType::Both
    } else if has(OverlapType::TimeOnly) {
        OverlapType::TimeOnly
    } else if has(OverlapType::FrequencyOnly) {
        OverlapType::FrequencyOnly
    } else {
        OverlapType::Neither
    }
}

/// Scene-level overlap label over all unordered signal pairs.
pub fn global_overlap_label(scene: &SceneRecord) -> crate::Result<OverlapType> {
    if scene.signals.len() < 2 {
        return Err(crate::Error::Input(
            "global overlap label needs at least 2 signals".into(),
        ));
    }
    let mut types = Vec::new();
    for i in 0..scene.signals.len() {
        for j in (i + 1)..scene.signals.len() {
            types.push(overlap_type(&scene.signals[i], &scene.signals[j]));
        }
    }
    Ok(global_label_from_types(&types))
}

/// Pairs adjacent in the start-time order or in the low-edge frequency
/// order, deduplicated, as `(low_id, high_id)` index pairs into
/// `scene.signals`.
pub fn adjacent_pairs(scene: &SceneRecord) -> Vec<(usize, usize)> {
    let n = scene.signals.len();
    if n < 2 {
        return Vec::new();
    }
    let mut by_time: Vec<usize> = (0..n).collect();
    by_time.sort_by(|&a, &b| {
        scene.signals[a]
            .t_start()
            .partial_cmp(&scene.signals[b].t_start())
            .unwrap()
            .then(scene.signals[a].id.cmp(&scene.signals[b].id))
    });
    let mut by_freq: Vec<usize> = (0..n).collect();
    by_freq.sort_by(|&a, &b| {
        scene.signals[a]
            .f_low()
            .partial_cmp(&scene.signals[b].f_low())
            .unwrap()
            .then(scene.signals[a].id.cmp(&scene.signals[b].id))
    });
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for order in [&by_time, &by_freq] {
        for w in order.windows(2) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            if !pairs.contains(&(a, b)) {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// WLAN user-count bucket `[s, e]` of width `bucket_size` containing `users`.
pub fn wnuc_bucket(users: u32, bucket_size: u32) -> (u32, u32) {
    let s = (users - 1) / bucket_size * bucket_size + 1;
    (s, s + bucket_size - 1)
}

/// Hard-level WNUC target: exact below 10, else the nearest multiple of 10
/// with the .5 tie resolved away from zero.
pub fn wnuc_hard_target(users: u32) -> u32 {
    wnuc_hard_target_with(users, TieRule::HalfAwayFromZero)
}

/// Tie rule for the WNUC hard-level rounding; the paper's "standard
/// rounding" does not pin the .5 case down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    HalfAwayFromZero,
    HalfToEven,
}

pub fn wnuc_hard_target_with(users: u32, tie: TieRule) -> u32 {
    if users < 10 {
        return users;
    }
    let x = users as f64 / 10.0;
    let rounded = match tie {
        TieRule::HalfAwayFromZero => x.round(),
        TieRule::HalfToEven => {
            let r = x.round();
            if (x - x.trunc() - 0.5).abs() < f64::EPSILON && (r as i64) % 2 != 0 {
                r - 1.0
            } else {
                r
            }
        }
    };
    10 * rounded as u32
}

/// Strict time-order classification score: zero on count mismatch, else the
/// fraction of positionwise label matches.
pub fn score_wbmc(truth: &[String], pred: &[String]) -> f64 {
    if truth.len() != pred.len() || truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    hits as f64 / truth.len() as f64
}
