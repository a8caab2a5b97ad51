use serde::Serialize;

use super::{EvalError, EvalReport};
use crate::types::FactualityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonCell {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Highest F1 for this label among two or more systems; ties mark
    /// every tied system.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: FactualityLabel,
    pub support: usize,
    pub cells: Vec<ComparisonCell>,
}

/// Side-by-side per-label scores of several systems on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub dataset: String,
    pub systems: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

pub fn compare(reports: &[EvalReport]) -> Result<Comparison, EvalError> {
    let dataset = reports
        .first()
        .map(|r| r.dataset.clone())
        .unwrap_or_default();
    if reports.iter().any(|r| r.dataset != dataset) {
        return Err(EvalError::DatasetMismatch(
            reports.iter().map(|r| r.dataset.clone()).collect(),
        ));
    }
    let rows = FactualityLabel::ALL
        .iter()
        .map(|&label| {
            let best = reports
                .iter()
                .map(|r| r.label(label).f1)
                .fold(f64::NEG_INFINITY, f64::max);
            let cells = reports
                .iter()
                .map(|r| {
                    let m = r.label(label);
                    ComparisonCell {
                        precision: m.precision,
                        recall: m.recall,
                        f1: m.f1,
                        best: reports.len() > 1 && m.f1 == best,
                    }
                })
                .collect();
            let support = reports.first().map_or(0, |r| r.label(label).support);
            ComparisonRow {
                label,
                support,
                cells,
            }
        })
        .collect();
    Ok(Comparison {
        dataset,
        systems: reports.iter().map(|r| r.system.clone()).collect(),
        rows,
    })
}

const CELL: usize = 20;

impl Comparison {
    /// Aligned text with two decimals; `*` marks the best F1 per label.
    pub fn to_text(&self) -> String {
        let mut s = format!("dataset: {}\n", self.dataset);
        s.push_str(&format!("{:<10}", ""));
        for name in &self.systems {
            s.push_str(&format!("{:<CELL$}", truncate(name, CELL - 2)));
        }
        s.push_str("Support\n");
        s.push_str(&format!("{:<10}", "Label"));
        for _ in &self.systems {
            s.push_str(&format!("{:<CELL$}", "Prec  Rec   F1"));
        }
        s.push('\n');
        for row in &self.rows {
            s.push_str(&format!("{:<10}", row.label.title()));
            for c in &row.cells {
                let cell = format!(
                    "{:.2}  {:.2}  {:.2}{}",
                    c.precision,
                    c.recall,
                    c.f1,
                    if c.best { "*" } else { "" }
                );
                s.push_str(&format!("{cell:<CELL$}"));
            }
            s.push_str(&format!("{}\n", row.support));
        }
        s
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}
