//! Free-text answer parsing.
//!
//! Each task has its own grammar. Parsing is case- and
//! whitespace-insensitive. If the text carries explicit answer markers
//! ("answer:", "final answer:"), only the segment after the last marker is
//! parsed; within the parsed segment the first well-formed match wins.
//! Failure is a value, never an error: unparseable predictions score 0.

use super::{BenchTask, Difficulty, OverlapLevel, OverlapStrength, OverlapType};
use crate::scene::registry::{ModFamily, Registry};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParsedAnswer {
    /// Ordered modulation class or family labels (WBMC).
    Labels(Vec<String>),
    /// Four-way overlap category (WBOD easy/medium).
    Overlap(OverlapType),
    /// Per-axis overlap strength (WBOD hard).
    Strength(OverlapStrength),
    /// Canonical technology-direction label (WTR).
    TechLabel(String),
    /// User-count bucket `[s, e]` (WNUC easy/medium).
    Interval(u32, u32),
    /// Integer count (WNUC hard).
    Count(u32),
    /// Canonicalized attribute value (NRIE).
    Attribute(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub reason: String,
}

impl ParseFailure {
    fn new(reason: impl Into<String>) -> Self {
        ParseFailure {
            reason: reason.into(),
        }
    }
}

/// The eight WTR technology-direction labels.
pub const WTR_LABELS: [&str; 8] = [
    "dvb-s2", "bt", "umts", "lte", "nr-dl", "nr-ul", "wlan-ax", "wlan-be",
];

/// Strip any chain-of-thought preamble: keep only the text after the last
/// explicit answer marker, if one is present.
fn answer_segment(raw: &str) -> &str {
    let lower = raw.to_ascii_lowercase();
    let mut best: Option<usize> = None;
    for marker in ["final answer:", "answer:"] {
        if let Some(pos) = lower.rfind(marker) {
            let end = pos + marker.len();
            best = Some(best.map_or(end, |b: usize| b.max(end)));
        }
    }
    match best {
        Some(end) => &raw[end..],
        None => raw,
    }
}

fn normalize(text: &str) -> String {
    let mut s = text.to_ascii_lowercase();
    s = s.replace(['\n', '\t'], " ");
    let mut out = String::with_capacity(s.len());
    let mut last_space = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(ch);
            last_space = false;
        }
    }
    out.trim().to_string()
}

const WORD_NUMBERS: [(&str, u32); 29] = [
    ("zero", 0),
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
    ("hundred", 100),
];

/// First integer in the text: digits preferred, spelled-out numbers accepted.
fn first_integer(text: &str) -> Option<u32> {
    static DIGITS: OnceLock<Regex> = OnceLock::new();
    let re = DIGITS.get_or_init(|| Regex::new(r"\d+").unwrap());
    if let Some(m) = re.find(text) {
        return m.as_str().parse().ok();
    }
    for word in text.split(|c: char| !c.is_ascii_alphabetic()) {
        if let Some(&(_, v)) = WORD_NUMBERS.iter().find(|(w, _)| *w == word) {
            return Some(v);
        }
    }
    None
}

/// Alias table entry: (surface form, canonical label). Longest surface forms
/// must be tried first so alternation prefers them.
fn alias_regex(aliases: &[(&str, &str)]) -> Regex {
    let mut forms: Vec<&(&str, &str)> = aliases.iter().collect();
    forms.sort_by_key(|(a, _)| std::cmp::Reverse(a.len()));
    let alternation = forms
        .iter()
        .map(|(a, _)| regex::escape(a))
        .collect::<Vec<_>>()
        .join("|");
    Regex::new(&format!(r"(?:^|[^a-z0-9])({alternation})(?:$|[^a-z0-9])")).unwrap()
}

fn class_aliases(registry: &Registry) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for class in registry.classes() {
        let name = class.name.clone();
        out.push((name.clone(), name.clone()));
        if name.contains('-') {
            out.push((name.replace('-', ""), name.clone()));
            out.push((name.replace('-', " "), name.clone()));
        }
        // "16 qam" / "16-qam" style splits between order and scheme.
        if let Some(pos) = name.find(|c: char| c.is_ascii_alphabetic()) {
            if pos > 0 {
                let (digits, scheme) = name.split_at(pos);
                out.push((format!("{digits} {scheme}"), name.clone()));
                out.push((format!("{digits}-{scheme}"), name.clone()));
            }
        }
    }
    out
}

/// Ordered label scan: find all vocabulary hits left to right.
fn scan_labels(text: &str, aliases: &[(String, String)]) -> Vec<String> {
    let mut forms: Vec<&(String, String)> = aliases.iter().collect();
    forms.sort_by_key(|(a, _)| std::cmp::Reverse(a.len()));
    let mut found: Vec<(usize, usize, String)> = Vec::new();
    for (surface, canonical) in forms {
        let mut start = 0;
        while let Some(pos) = text[start..].find(surface.as_str()) {
            let at = start + pos;
            let end = at + surface.len();
            let left_ok = at == 0
                || !text.as_bytes()[at - 1].is_ascii_alphanumeric();
            let right_ok = end == text.len()
                || !text.as_bytes()[end].is_ascii_alphanumeric();
            let overlaps = found.iter().any(|&(s, e, _)| at < e && s < end);
            if left_ok && right_ok && !overlaps {
                found.push((at, end, canonical.clone()));
            }
            start = end;
        }
    }
    found.sort_by_key(|&(s, _, _)| s);
    found.into_iter().map(|(_, _, c)| c).collect()
}

fn parse_overlap_category(text: &str) -> Option<OverlapType> {
    let aliases: [(&str, OverlapType); 10] = [
        ("time-only", OverlapType::TimeOnly),
        ("time only", OverlapType::TimeOnly),
        ("time_only", OverlapType::TimeOnly),
        ("frequency-only", OverlapType::FrequencyOnly),
        ("frequency only", OverlapType::FrequencyOnly),
        ("frequency_only", OverlapType::FrequencyOnly),
        ("freq-only", OverlapType::FrequencyOnly),
        ("freq only", OverlapType::FrequencyOnly),
        ("neither", OverlapType::Neither),
        ("both", OverlapType::Both),
    ];
    let mut best: Option<(usize, OverlapType)> = None;
    for (surface, label) in aliases {
        if let Some(pos) = text.find(surface) {
            if best.map_or(true, |(p, _)| pos < p) {
                best = Some((pos, label));
            }
        }
    }
    best.map(|(_, l)| l)
}

fn level_pattern() -> &'static str {
    r"(none|slightly|considerably|almost[\s_-]?fully)"
}

fn level_from_str(s: &str) -> OverlapLevel {
    match s {
        "none" => OverlapLevel::None,
        "slightly" => OverlapLevel::Slightly,
        "considerably" => OverlapLevel::Considerably,
        _ => OverlapLevel::AlmostFully,
    }
}

fn parse_strength(text: &str) -> Option<OverlapStrength> {
    static TIME: OnceLock<Regex> = OnceLock::new();
    static FREQ: OnceLock<Regex> = OnceLock::new();
    let time_re = TIME.get_or_init(|| {
        Regex::new(&format!(r"time\s*[:=\-]?\s*{}", level_pattern())).unwrap()
    });
    let freq_re = FREQ.get_or_init(|| {
        Regex::new(&format!(r"freq(?:uency)?\s*[:=\-]?\s*{}", level_pattern())).unwrap()
    });
    let t = time_re.captures(text)?;
    let f = freq_re.captures(text)?;
    Some(OverlapStrength {
        time_level: level_from_str(&t[1]),
        freq_level: level_from_str(&f[1]),
    })
}

fn wtr_aliases() -> Vec<(&'static str, &'static str)> {
    vec![
        ("dvb-s2", "dvb-s2"),
        ("dvbs2", "dvb-s2"),
        ("dvb s2", "dvb-s2"),
        ("bluetooth", "bt"),
        ("bt", "bt"),
        ("umts", "umts"),
        ("wcdma", "umts"),
        ("lte", "lte"),
        ("nr-dl", "nr-dl"),
        ("nr dl", "nr-dl"),
        ("nr downlink", "nr-dl"),
        ("5g-nr downlink", "nr-dl"),
        ("5g nr downlink", "nr-dl"),
        ("5g downlink", "nr-dl"),
        ("nr-ul", "nr-ul"),
        ("nr ul", "nr-ul"),
        ("nr uplink", "nr-ul"),
        ("5g-nr uplink", "nr-ul"),
        ("5g nr uplink", "nr-ul"),
        ("5g uplink", "nr-ul"),
        ("wlan-ax", "wlan-ax"),
        ("wlan ax", "wlan-ax"),
        ("11ax", "wlan-ax"),
        ("802.11ax", "wlan-ax"),
        ("wlan-be", "wlan-be"),
        ("wlan be", "wlan-be"),
        ("11be", "wlan-be"),
        ("802.11be", "wlan-be"),
    ]
}

fn parse_wtr(text: &str) -> Option<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| alias_regex(&wtr_aliases()));
    let caps = re.captures(text)?;
    let surface = caps.get(1).unwrap().as_str();
    wtr_aliases()
        .iter()
        .find(|(a, _)| *a == surface)
        .map(|(_, c)| c.to_string())
}

fn parse_interval(text: &str) -> Option<(u32, u32)> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"(\d+)\s*(?:-|–|,|to|\.\.)\s*(\d+)").unwrap()
    });
    let caps = re.captures(text)?;
    let s: u32 = caps[1].parse().ok()?;
    let e: u32 = caps[2].parse().ok()?;
    Some((s, e))
}

/// Canonicalize an NRIE answer: "N/A" forms, SSB pattern letters
/// ("case D" -> "d"), numeric values with kHz suffixes, spelled-out counts.
pub fn canonicalize_nrie(text: &str) -> Option<String> {
    let t = normalize(text);
    if t.is_empty() {
        return None;
    }
    static NA: OnceLock<Regex> = OnceLock::new();
    let na_re = NA.get_or_init(|| {
        Regex::new(r"(?:^|[^a-z0-9])(n/a|na|none|not applicable|no ssb)(?:$|[^a-z0-9])").unwrap()
    });
    if na_re.is_match(&t) || t == "n/a" || t == "na" || t == "none" {
        return Some("n/a".to_string());
    }
    if let Some(v) = first_integer(&t) {
        return Some(v.to_string());
    }
    static LETTER: OnceLock<Regex> = OnceLock::new();
    let letter_re = LETTER.get_or_init(|| {
        Regex::new(r"(?:^|[^a-z0-9])(?:case|pattern|type)?\s*([a-d])(?:$|[^a-z0-9])").unwrap()
    });
    if let Some(caps) = letter_re.captures(&t) {
        return Some(caps[1].to_string());
    }
    None
}

/// Parse a free-text answer under the task's grammar.
pub fn parse_answer(
    raw: &str,
    task: BenchTask,
    difficulty: Difficulty,
    candidates: Option<&[String]>,
) -> Result<ParsedAnswer, ParseFailure> {
    let segment = normalize(answer_segment(raw));
    if segment.is_empty() {
        return Err(ParseFailure::new("empty answer text"));
    }
    match task {
        BenchTask::Wbmc => {
            let registry = Registry::builtin();
            let aliases: Vec<(String, String)> = if difficulty == Difficulty::Easy {
                ModFamily::ALL
                    .iter()
                    .map(|f| (f.name().to_string(), f.name().to_string()))
                    .collect()
            } else if let Some(cands) = candidates {
                let mut out = Vec::new();
                for c in class_aliases(&registry) {
                    if cands.contains(&c.1) {
                        out.push(c);
                    }
                }
                out
            } else {
                class_aliases(&registry)
            };
            let labels = scan_labels(&segment, &aliases);
            if labels.is_empty() {
                return Err(ParseFailure::new("no modulation labels found"));
            }
            Ok(ParsedAnswer::Labels(labels))
        }
        BenchTask::Wbod => match difficulty {
            Difficulty::Hard => parse_strength(&segment)
                .map(ParsedAnswer::Strength)
                .ok_or_else(|| ParseFailure::new("no time/frequency strength pair found")),
            _ => parse_overlap_category(&segment)
                .map(ParsedAnswer::Overlap)
                .ok_or_else(|| ParseFailure::new("no overlap category found")),
        },
        BenchTask::Wtr => parse_wtr(&segment)
            .map(ParsedAnswer::TechLabel)
            .ok_or_else(|| ParseFailure::new("no technology label found")),
        BenchTask::Wnuc => match difficulty {
            Difficulty::Hard => first_integer(&segment)
                .map(ParsedAnswer::Count)
                .ok_or_else(|| ParseFailure::new("no integer count found")),
            _ => parse_interval(&segment)
                .map(|(s, e)| ParsedAnswer::Interval(s, e))
                .ok_or_else(|| ParseFailure::new("no bucket interval found")),
        },
        BenchTask::Nrie => canonicalize_nrie(&segment)
            .map(ParsedAnswer::Attribute)
            .ok_or_else(|| ParseFailure::new("no attribute value found")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strength_pair_from_paper_phrasing() {
        let parsed = parse_answer(
            "time: slightly, frequency: almost fully",
            BenchTask::Wbod,
            Difficulty::Hard,
            None,
        )
        .unwrap();
        assert_eq!(
            parsed,
            ParsedAnswer::Strength(OverlapStrength {
                time_level: OverlapLevel::Slightly,
                freq_level: OverlapLevel::AlmostFully,
            })
        );
    }

    #[test]
    fn empty_string_is_parse_failure() {
        assert!(parse_answer("", BenchTask::Wbod, Difficulty::Easy, None).is_err());
        assert!(parse_answer("  \n ", BenchTask::Wnuc, Difficulty::Hard, None).is_err());
    }

    #[test]
    fn interval_forms() {
        for text in ["[16, 30]", "16-30", "16 to 30", "the bucket is [16,30]."] {
            let parsed = parse_answer(text, BenchTask::Wnuc, Difficulty::Easy, None).unwrap();
            assert_eq!(parsed, ParsedAnswer::Interval(16, 30), "text: {text}");
        }
    }

    #[test]
    fn ordered_class_list() {
        let parsed = parse_answer(
            "The signals are QPSK, then 16-QAM, then OFDM 64.",
            BenchTask::Wbmc,
            Difficulty::Hard,
            None,
        )
        .unwrap();
        assert_eq!(
            parsed,
            ParsedAnswer::Labels(vec![
                "qpsk".to_string(),
                "16qam".to_string(),
                "ofdm-64".to_string()
            ])
        );
    }

    #[test]
    fn family_list_for_easy() {
        let parsed = parse_answer(
            "psk, qam and fm",
            BenchTask::Wbmc,
            Difficulty::Easy,
            None,
        )
        .unwrap();
        assert_eq!(
            parsed,
            ParsedAnswer::Labels(vec!["psk".into(), "qam".into(), "fm".into()])
        );
    }

    #[test]
    fn longest_class_token_wins() {
        let parsed =
            parse_answer("256qam", BenchTask::Wbmc, Difficulty::Hard, None).unwrap();
        assert_eq!(parsed, ParsedAnswer::Labels(vec!["256qam".to_string()]));
    }

    #[test]
    fn overlap_category_aliases() {
        for (text, want) in [
            ("both", OverlapType::Both),
            ("they overlap in time only", OverlapType::TimeOnly),
            ("frequency-only", OverlapType::FrequencyOnly),
            ("neither", OverlapType::Neither),
        ] {
            let parsed =
                parse_answer(text, BenchTask::Wbod, Difficulty::Medium, None).unwrap();
            assert_eq!(parsed, ParsedAnswer::Overlap(want), "text: {text}");
        }
    }

    #[test]
    fn wtr_labels() {
        for (text, want) in [
            ("This is a 5G NR downlink capture", "nr-dl"),
            ("DVB-S2", "dvb-s2"),
            ("802.11be transmission", "wlan-be"),
            ("Bluetooth hops", "bt"),
        ] {
            let parsed = parse_answer(text, BenchTask::Wtr, Difficulty::Easy, None).unwrap();
            assert_eq!(parsed, ParsedAnswer::TechLabel(want.to_string()));
        }
    }

    #[test]
    fn nrie_word_number_and_letter() {
        assert_eq!(canonicalize_nrie("three"), Some("3".to_string()));
        assert_eq!(canonicalize_nrie("30 kHz"), Some("30".to_string()));
        assert_eq!(canonicalize_nrie("Case D"), Some("d".to_string()));
        assert_eq!(canonicalize_nrie("N/A"), Some("n/a".to_string()));
    }

    #[test]
    fn answer_marker_preempts_preamble() {
        let text = "Thinking: maybe neither or both... Answer: both";
        let parsed = parse_answer(text, BenchTask::Wbod, Difficulty::Easy, None).unwrap();
        assert_eq!(parsed, ParsedAnswer::Overlap(OverlapType::Both));
    }

    #[test]
    fn candidate_list_restricts_vocabulary() {
        let cands = vec!["qpsk".to_string(), "bpsk".to_string()];
        let parsed = parse_answer(
            "qpsk and 16qam",
            BenchTask::Wbmc,
            Difficulty::Medium,
            Some(&cands),
        )
        .unwrap();
        assert_eq!(parsed, ParsedAnswer::Labels(vec!["qpsk".to_string()]));
    }
}
