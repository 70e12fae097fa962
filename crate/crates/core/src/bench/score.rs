//! Prediction scoring and report aggregation.

use super::build::{BenchmarkItem, GroundTruth};
use super::parse::{parse_answer, ParsedAnswer, WTR_LABELS};
use super::{score_wbmc, BenchTask, Difficulty};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub item_id: String,
    pub raw_text: String,
}

/// Outcome of scoring one item: score in [0, 1] plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub item_id: String,
    pub score: f64,
    pub parse_failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parsed_label: Option<String>,
}

/// Score a single raw prediction against an item. Unparseable or missing
/// text scores 0 and is flagged as a parse failure.
pub fn score_prediction(item: &BenchmarkItem, raw_text: &str) -> ItemScore {
    let parsed = parse_answer(
        raw_text,
        item.task,
        item.difficulty,
        item.candidate_list.as_deref(),
    );
    let (score, parse_failed, parsed_label) = match parsed {
        Err(_) => (0.0, true, None),
        Ok(answer) => match (&item.ground_truth, &answer) {
            (GroundTruth::ModList { labels }, ParsedAnswer::Labels(got)) => {
                (score_wbmc(labels, got), false, None)
            }
            (GroundTruth::GlobalOverlap { label }, ParsedAnswer::Overlap(got))
            | (GroundTruth::PairOverlap { label, .. }, ParsedAnswer::Overlap(got)) => (
                if label == got { 1.0 } else { 0.0 },
                false,
                Some(got.label().to_string()),
            ),
            (
                GroundTruth::PairStrength {
                    time_level,
                    freq_level,
                    ..
                },
                ParsedAnswer::Strength(got),
            ) => (
                if *time_level == got.time_level && *freq_level == got.freq_level {
                    1.0
                } else {
                    0.0
                },
                false,
                None,
            ),
            (GroundTruth::Tech { label }, ParsedAnswer::TechLabel(got)) => {
                if WTR_LABELS.contains(&got.as_str()) {
                    (
                        if label == got { 1.0 } else { 0.0 },
                        false,
                        Some(got.clone()),
                    )
                } else {
                    (0.0, true, None)
                }
            }
            (GroundTruth::UserBucket { start, end }, ParsedAnswer::Interval(s, e)) => (
                if start == s && end == e { 1.0 } else { 0.0 },
                false,
                None,
            ),
            (GroundTruth::UserCount { target }, ParsedAnswer::Count(c)) => {
                (if target == c { 1.0 } else { 0.0 }, false, None)
            }
            (GroundTruth::NrAttribute { value, .. }, ParsedAnswer::Attribute(got)) => (
                if value == got { 1.0 } else { 0.0 },
                false,
                Some(got.clone()),
            ),
            // Grammar produced a shape the task cannot use.
            _ => (0.0, true, None),
        },
    };
    ItemScore {
        item_id: item.item_id.clone(),
        score,
        parse_failed,
        parsed_label,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PerClass {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Row-label and column-label confusion counts (rows = truth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u32>>,
}

impl ConfusionMatrix {
    fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n + 1]; n], // last column: unparsed/other
        }
    }

    fn record(&mut self, truth: &str, predicted: Option<&str>) {
        let Some(row) = self.labels.iter().position(|l| l == truth) else {
            return;
        };
        let col = predicted
            .and_then(|p| self.labels.iter().position(|l| l == p))
            .unwrap_or(self.labels.len());
        self.counts[row][col] += 1;
    }

    /// Row-normalized matrix; rows with no observations stay zero.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u32 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push_str(",unparsed\n");
        for (row_label, row) in self.labels.iter().zip(self.normalized()) {
            out.push_str(row_label);
            for v in row {
                out.push_str(&format!(",{v:.4}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Aggregated scores for one (task, difficulty) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub task: BenchTask,
    pub difficulty: Difficulty,
    pub n: usize,
    pub accuracy: f64,
    pub parse_failure_rate: f64,
    pub missing: usize,
    pub per_class: BTreeMap<String, PerClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub cells: Vec<ScoreCell>,
}

impl ScoreReport {
    pub fn cell(&self, task: BenchTask, difficulty: Difficulty) -> Option<&ScoreCell> {
        self.cells
            .iter()
            .find(|c| c.task == task && c.difficulty == difficulty)
    }

    /// Unweighted mean accuracy over cells.
    pub fn overall_accuracy(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().map(|c| c.accuracy).sum::<f64>() / self.cells.len() as f64
    }
}

fn truth_class_label(truth: &GroundTruth) -> String {
    match truth {
        GroundTruth::ModList { labels } => labels.join("|"),
        GroundTruth::GlobalOverlap { label } | GroundTruth::PairOverlap { label, .. } => {
            label.label().to_string()
        }
        GroundTruth::PairStrength {
            time_level,
            freq_level,
            ..
        } => format!("{}/{}", time_level.label(), freq_level.label()),
        GroundTruth::Tech { label } => label.clone(),
        GroundTruth::UserBucket { start, end } => format!("[{start},{end}]"),
        GroundTruth::UserCount { target } => target.to_string(),
        GroundTruth::NrAttribute { attribute, .. } => attribute.name().to_string(),
    }
}

/// Score a full item set against predictions keyed by `item_id`.
/// Items without a prediction score 0 and are counted as missing.
/// Aggregation is a deterministic fold in `item_id` order.
pub fn score_items(items: &[BenchmarkItem], predictions: &[Prediction]) -> ScoreReport {
    let by_id: BTreeMap<&str, &Prediction> = predictions
        .iter()
        .map(|p| (p.item_id.as_str(), p))
        .collect();
    let mut sorted: Vec<&BenchmarkItem> = items.iter().collect();
    sorted.sort_by(|a, b| a.item_id.cmp(&b.item_id));

    let mut by_cell: BTreeMap<(String, Difficulty), Vec<(&BenchmarkItem, ItemScore, bool)>> =
        BTreeMap::new();
    for item in sorted {
        let (score, missing) = match by_id.get(item.item_id.as_str()) {
            Some(pred) => (score_prediction(item, &pred.raw_text), false),
            None => (
                ItemScore {
                    item_id: item.item_id.clone(),
                    score: 0.0,
                    parse_failed: true,
                    parsed_label: None,
                },
                true,
            ),
        };
        by_cell
            .entry((item.task.name().to_string(), item.difficulty))
            .or_default()
            .push((item, score, missing));
    }

    let mut cells = Vec::new();
    for ((_task_name, difficulty), rows) in by_cell {
        let task = rows[0].0.task;
        let n = rows.len();
        let accuracy = rows.iter().map(|(_, s, _)| s.score).sum::<f64>() / n as f64;
        let failures = rows.iter().filter(|(_, s, _)| s.parse_failed).count();
        let missing = rows.iter().filter(|(_, _, m)| *m).count();

        let mut per_class: BTreeMap<String, PerClass> = BTreeMap::new();
        for (item, s, _) in &rows {
            let entry = per_class.entry(truth_class_label(&item.ground_truth)).or_default();
            entry.n += 1;
            if s.score >= 1.0 {
                entry.correct += 1;
            }
        }
        for entry in per_class.values_mut() {
            entry.accuracy = entry.correct as f64 / entry.n as f64;
        }

        let confusion = if task == BenchTask::Wtr {
            let mut cm =
                ConfusionMatrix::new(WTR_LABELS.iter().map(|s| s.to_string()).collect());
            for (item, s, _) in &rows {
                if let GroundTruth::Tech { label } = &item.ground_truth {
                    cm.record(label, s.parsed_label.as_deref());
                }
            }
            Some(cm)
        } else {
            None
        };

        cells.push(ScoreCell {
            task,
            difficulty,
            n,
            accuracy,
            parse_failure_rate: failures as f64 / n as f64,
            missing,
            per_class,
            confusion,
        });
    }
    ScoreReport { cells }
}
