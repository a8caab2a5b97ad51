//! Scoring predictions against gold labels.
//!
//! Pairs are joined by id, never by position. Precision and recall with a
//! zero denominator are 0, as is F1 when both are 0.

mod table;

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{CorpusRecord, FactualityLabel};

pub use table::{compare, Comparison, ComparisonCell, ComparisonRow};

/// Counts indexed `[gold][predicted]` in label order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix {
    counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[usize; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn add(&mut self, gold: FactualityLabel, predicted: FactualityLabel) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn get(&self, gold: FactualityLabel, predicted: FactualityLabel) -> usize {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn counts(&self) -> &[[usize; 3]; 3] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Number of gold instances of `label`.
    pub fn support(&self, label: FactualityLabel) -> usize {
        self.counts[label.index()].iter().sum()
    }

    /// Number of predictions of `label`.
    pub fn predicted(&self, label: FactualityLabel) -> usize {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total())
    }

    /// Cell-wise sum, for combining partial matrices scored in parallel.
    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        let mut out = *self;
        for g in 0..3 {
            for p in 0..3 {
                out.counts[g][p] += other.counts[g][p];
            }
        }
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no prediction for {} gold id(s): {}", .0.len(), .0.join(", "))]
    MissingPrediction(Vec<String>),
    #[error("gold id {0:?} appears more than once")]
    DuplicateGold(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("reports cover different datasets: {0:?}")]
    DatasetMismatch(Vec<String>),
}

/// A confusion matrix plus what was left out of it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scored {
    pub matrix: ConfusionMatrix,
    /// Predictions whose id is not in the gold set, plus repeated
    /// predictions for one id (the first one counts).
    pub ignored_predictions: usize,
}

/// Joins gold and predicted labels by id.
pub fn score<G, P>(gold: G, predicted: P) -> Result<Scored, EvalError>
where
    G: IntoIterator<Item = (String, FactualityLabel)>,
    P: IntoIterator<Item = (String, FactualityLabel)>,
{
    let mut gold_ids = HashSet::new();
    let gold: Vec<(String, FactualityLabel)> = gold.into_iter().collect();
    for (id, _) in &gold {
        if !gold_ids.insert(id.as_str()) {
            return Err(EvalError::DuplicateGold(id.clone()));
        }
    }

    let mut preds: HashMap<String, FactualityLabel> = HashMap::new();
    let mut ignored = 0;
    for (id, label) in predicted {
        if !gold_ids.contains(id.as_str()) || preds.contains_key(&id) {
            ignored += 1;
        } else {
            preds.insert(id, label);
        }
    }

    let missing: Vec<String> = gold
        .iter()
        .filter(|(id, _)| !preds.contains_key(id))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingPrediction(missing));
    }

    let mut matrix = ConfusionMatrix::default();
    for (id, g) in &gold {
        matrix.add(*g, preds[id]);
    }
    Ok(Scored {
        matrix,
        ignored_predictions: ignored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: FactualityLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub dataset: String,
    pub total: usize,
    /// One entry per label, in label order.
    pub labels: Vec<LabelMetrics>,
    pub matrix: ConfusionMatrix,
}

/// Per-label precision, recall, F1 and support from a confusion matrix.
pub fn metrics(matrix: &ConfusionMatrix) -> EvalReport {
    let labels = FactualityLabel::ALL
        .iter()
        .map(|&c| {
            let tp = matrix.get(c, c);
            let precision = ratio(tp, matrix.predicted(c));
            let recall = ratio(tp, matrix.support(c));
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            LabelMetrics {
                label: c,
                precision,
                recall,
                f1,
                support: matrix.support(c),
            }
        })
        .collect();
    EvalReport {
        system: String::new(),
        dataset: String::new(),
        total: matrix.total(),
        labels,
        matrix: *matrix,
    }
}

impl EvalReport {
    pub fn named(mut self, system: impl Into<String>, dataset: impl Into<String>) -> Self {
        self.system = system.into();
        self.dataset = dataset.into();
        self
    }

    pub fn label(&self, label: FactualityLabel) -> &LabelMetrics {
        &self.labels[label.index()]
    }

    /// Aligned text table with two decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.system.is_empty() || !self.dataset.is_empty() {
            s.push_str(&format!(
                "system: {}  dataset: {}\n",
                self.system, self.dataset
            ));
        }
        s.push_str(&format!(
            "{:<10}{:>6}{:>6}{:>6}{:>9}\n",
            "Label", "Prec", "Rec", "F1", "Support"
        ));
        for m in &self.labels {
            s.push_str(&format!(
                "{:<10}{:>6.2}{:>6.2}{:>6.2}{:>9}\n",
                m.label.title(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            ));
        }
        s.push_str(&format!("{:<10}{:>27}\n", "Total", self.total));
        s
    }
}

#[derive(Deserialize)]
struct PredictionLine {
    id: String,
    label: String,
}

/// Reads `{"id", "label"}` lines; other fields are ignored, so detection
/// output can be scored directly.
pub fn load_predictions(reader: impl BufRead) -> Result<Vec<(String, FactualityLabel)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EvalError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(&line).map_err(|e| EvalError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        let label = p
            .label
            .parse()
            .map_err(|e: crate::types::UnknownLabel| EvalError::Format {
                line: line_no,
                reason: e.to_string(),
            })?;
        out.push((p.id, label));
    }
    Ok(out)
}

/// Gold pairs from a corpus JSONL file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldSet {
    pub pairs: Vec<(String, FactualityLabel)>,
    /// Ids of records without a label; they are not scored.
    pub unlabeled: Vec<String>,
}

pub fn load_gold(reader: impl BufRead) -> Result<GoldSet, EvalError> {
    let mut out = GoldSet::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EvalError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r: CorpusRecord = serde_json::from_str(&line).map_err(|e| EvalError::Format {
            line: line_no,
            reason: e.to_string(),
        })?;
        match r.label {
            Some(l) => out.pairs.push((r.id, l)),
            None => out.unlabeled.push(r.id),
        }
    }
    Ok(out)
}
