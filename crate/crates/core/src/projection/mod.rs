//! Annotation projection through machine translation.
//!
//! The entity is wrapped in `<E>…</E>`, the tagged sentence goes through an
//! [`MtBackend`], and the output is checked for the defects that make a
//! translation unusable: no output, garbage (repetitions, runaway length) and
//! lost markup. Surviving records keep the source gold label.

mod backend;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::markup::{parse_tagged, render_tagged, CLOSE_TAG, OPEN_TAG};
use crate::tokenize::words;
use crate::types::{char_len, AnnotatedSentence};

pub use backend::{BackendError, HttpBackend, LexiconEntry, MtBackend, StubBackend, Unmapped};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    /// Target/source code-point ratio above which output counts as corrupt.
    pub max_length_ratio: f64,
    /// Longest n-gram (in tokens) checked for consecutive repetition.
    pub repeat_ngram: usize,
    pub repeat_count: usize,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            max_length_ratio: 2.5,
            repeat_ngram: 3,
            repeat_count: 3,
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.max_length_ratio.is_finite() && self.max_length_ratio > 0.0) {
            return Err(format!(
                "max_length_ratio must be positive, got {}",
                self.max_length_ratio
            ));
        }
        if self.repeat_ngram == 0 {
            return Err("repeat_ngram must be positive".to_string());
        }
        if self.repeat_count == 0 {
            return Err("repeat_count must be positive".to_string());
        }
        Ok(())
    }
}

pub const DEFAULT_IN_FLIGHT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum ProjectionStatus {
    Ok,
    EmptyOutput,
    MarkupLost,
    Corrupt,
    BackendError(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRecord {
    pub source: AnnotatedSentence,
    pub tagged_source: String,
    pub raw_target: Option<String>,
    pub status: ProjectionStatus,
    /// Present iff `status` is `Ok`.
    pub target: Option<AnnotatedSentence>,
}

/// Sends the tagged sentence to `backend` and returns its output verbatim.
pub fn translate_record(
    sentence: &AnnotatedSentence,
    backend: &dyn MtBackend,
    target_lang: &str,
) -> Result<String, BackendError> {
    backend.translate(&render_tagged(sentence), &sentence.language, target_lang)
}

fn strip_tags(s: &str) -> String {
    s.replace(OPEN_TAG, "").replace(CLOSE_TAG, "")
}

/// True when some n-gram of 1 to `ngram` tokens occurs at least `count`
/// times back to back.
fn has_repetition(tokens: &[String], ngram: usize, count: usize) -> bool {
    for n in 1..=ngram {
        if tokens.len() < n * count {
            continue;
        }
        for start in 0..=tokens.len() - n * count {
            let first = &tokens[start..start + n];
            if (1..count).all(|k| &tokens[start + k * n..start + (k + 1) * n] == first) {
                return true;
            }
        }
    }
    false
}

fn is_corrupt(source: &AnnotatedSentence, untagged: &str, config: &CorruptionConfig) -> bool {
    let tokens: Vec<String> = words(untagged)
        .into_iter()
        .map(|w| w.to_lowercase())
        .collect();
    if has_repetition(&tokens, config.repeat_ngram, config.repeat_count) {
        return true;
    }
    let src_len = char_len(&source.text).max(1);
    char_len(untagged.trim()) as f64 / src_len as f64 > config.max_length_ratio
}

/// Classifies a backend output. Checks run in the order empty, corrupt,
/// markup lost; the first that fires decides the status.
pub fn validate_translation(
    source: &AnnotatedSentence,
    raw_target: &str,
    target_lang: &str,
    config: &CorruptionConfig,
) -> (ProjectionStatus, Option<AnnotatedSentence>) {
    if raw_target.trim().is_empty() {
        return (ProjectionStatus::EmptyOutput, None);
    }
    if is_corrupt(source, &strip_tags(raw_target), config) {
        return (ProjectionStatus::Corrupt, None);
    }
    let Ok((text, entity)) = parse_tagged(raw_target) else {
        return (ProjectionStatus::MarkupLost, None);
    };
    let Ok(mut target) = AnnotatedSentence::new(source.id.clone(), text, entity, target_lang)
    else {
        return (ProjectionStatus::MarkupLost, None);
    };
    target.gold = source.gold;
    target.source = source.source.clone();
    (ProjectionStatus::Ok, Some(target))
}

fn project_one(
    sentence: AnnotatedSentence,
    backend: &dyn MtBackend,
    target_lang: &str,
    config: &CorruptionConfig,
) -> ProjectionRecord {
    let tagged_source = render_tagged(&sentence);
    match backend.translate(&tagged_source, &sentence.language, target_lang) {
        Ok(raw) => {
            let (status, target) = validate_translation(&sentence, &raw, target_lang, config);
            ProjectionRecord {
                source: sentence,
                tagged_source,
                raw_target: Some(raw),
                status,
                target,
            }
        }
        Err(e) => ProjectionRecord {
            source: sentence,
            tagged_source,
            raw_target: None,
            status: ProjectionStatus::BackendError(e.to_string()),
            target: None,
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardCounts {
    pub empty: usize,
    pub corrupt: usize,
    pub markup_lost: usize,
    pub backend_error: usize,
}

impl DiscardCounts {
    pub fn total(&self) -> usize {
        self.empty + self.corrupt + self.markup_lost + self.backend_error
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardReport {
    pub input: usize,
    pub retained: usize,
    pub discarded: DiscardCounts,
}

impl DiscardReport {
    pub fn from_records(records: &[ProjectionRecord]) -> Self {
        let mut report = DiscardReport {
            input: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.status {
                ProjectionStatus::Ok => report.retained += 1,
                ProjectionStatus::EmptyOutput => report.discarded.empty += 1,
                ProjectionStatus::Corrupt => report.discarded.corrupt += 1,
                ProjectionStatus::MarkupLost => report.discarded.markup_lost += 1,
                ProjectionStatus::BackendError(_) => report.discarded.backend_error += 1,
            }
        }
        report
    }

    pub fn is_conserved(&self) -> bool {
        self.input == self.retained + self.discarded.total()
    }

    /// Human-readable breakdown with each bucket's share of all discards and
    /// the thresholds in effect.
    pub fn summary(&self, config: &CorruptionConfig) -> String {
        let total = self.discarded.total();
        let pct = |n: usize| {
            if total == 0 {
                0.0
            } else {
                100.0 * n as f64 / total as f64
            }
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "thresholds: max_length_ratio={} repeat_ngram={} repeat_count={}",
            config.max_length_ratio, config.repeat_ngram, config.repeat_count
        );
        let _ = writeln!(
            s,
            "input {}, retained {}, discarded {}",
            self.input, self.retained, total
        );
        for (name, n) in [
            ("corrupt", self.discarded.corrupt),
            ("empty", self.discarded.empty),
            ("markup_lost", self.discarded.markup_lost),
            ("backend_error", self.discarded.backend_error),
        ] {
            let _ = writeln!(s, "  {name:<14}{n:>6}  {:5.1}%", pct(n));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    pub corruption: CorruptionConfig,
    /// Maximum concurrent backend calls.
    pub in_flight: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            corruption: CorruptionConfig::default(),
            in_flight: DEFAULT_IN_FLIGHT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    /// One record per input sentence, in input order.
    pub records: Vec<ProjectionRecord>,
    pub report: DiscardReport,
}

impl Projection {
    pub fn retained(&self) -> impl Iterator<Item = &AnnotatedSentence> {
        self.records.iter().filter_map(|r| r.target.as_ref())
    }
}

/// Translates and validates a corpus with at most `config.in_flight`
/// backend calls running at once. Output order follows input order.
pub fn project_corpus(
    corpus: Vec<AnnotatedSentence>,
    backend: &dyn MtBackend,
    target_lang: &str,
    config: &ProjectionConfig,
) -> Projection {
    let run = || -> Vec<ProjectionRecord> {
        corpus
            .into_par_iter()
            .map(|s| project_one(s, backend, target_lang, &config.corruption))
            .collect()
    };
    let records = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.in_flight.max(1))
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let report = DiscardReport::from_records(&records);
    Projection { records, report }
}
