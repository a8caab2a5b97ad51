//! Importers from external corpus formats into [`AnnotatedSentence`]s.
//!
//! Each importer applies a [`LabelMapping`] onto the three target labels.
//! Records that map to [`Mapped::Drop`], fail a filter or cannot be merged
//! are counted in the [`ImportSummary`] rather than silently lost.

mod fragments;
mod i2b2;
mod tabular;

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::types::{AnnotatedSentence, CorpusRecord, FactualityLabel};

pub use fragments::{
    merge_fragments, FragmentError, FragmentedEntity, Unmergeable, DEFAULT_MAX_GAP,
};
pub use i2b2::{import_assertion_corpus, parse_assertion_line, AssertionRecord, TokenOffset};
pub use tabular::{import_bronco, import_ex4cds, TabularOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapped {
    Label(FactualityLabel),
    Drop,
}

/// Source-label vocabulary of one corpus and where each label goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    pub name: String,
    rules: BTreeMap<String, Mapped>,
}

impl LabelMapping {
    pub fn new(
        name: impl Into<String>,
        rules: impl IntoIterator<Item = (&'static str, Mapped)>,
    ) -> Self {
        LabelMapping {
            name: name.into(),
            rules: rules.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Looks up a source label, ignoring case and surrounding whitespace.
    pub fn map(&self, label: &str) -> Option<Mapped> {
        self.rules
            .get(label.trim().to_lowercase().as_str())
            .copied()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&str, Mapped)> {
        self.rules.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

use FactualityLabel::{Affirmed, Negated, Possible};

/// i2b2 2010 assertion classes. Only the three NegEx labels are kept.
pub fn i2b2_mapping() -> LabelMapping {
    LabelMapping::new(
        "i2b2",
        [
            ("present", Mapped::Label(Affirmed)),
            ("absent", Mapped::Label(Negated)),
            ("possible", Mapped::Label(Possible)),
            ("conditional", Mapped::Drop),
            ("hypothetical", Mapped::Drop),
            ("not_associated", Mapped::Drop),
            ("associated_with_someone_else", Mapped::Drop),
        ],
    )
}

pub fn ex4cds_mapping() -> LabelMapping {
    LabelMapping::new(
        "ex4cds",
        [
            ("affirmed", Mapped::Label(Affirmed)),
            ("negated", Mapped::Label(Negated)),
            ("possible", Mapped::Label(Possible)),
            ("possible-future", Mapped::Label(Possible)),
            ("unlikely", Mapped::Label(Possible)),
            ("minor", Mapped::Label(Affirmed)),
        ],
    )
}

pub fn bronco_mapping() -> LabelMapping {
    LabelMapping::new(
        "bronco",
        [
            ("affirmed", Mapped::Label(Affirmed)),
            ("negated", Mapped::Label(Negated)),
            ("possible_future", Mapped::Label(Possible)),
            ("speculation", Mapped::Label(Possible)),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("record {record}: {reason}")]
    Format { record: usize, reason: String },
    #[error("record {record}: offset error: {reason}")]
    Offset { record: usize, reason: String },
    #[error("record {record}: label {label:?} is not in the {mapping} vocabulary")]
    UnknownLabel {
        record: usize,
        label: String,
        mapping: String,
    },
    #[error("{0}")]
    Io(String),
}

impl ImportError {
    /// 1-based record (line) number the error refers to, if any.
    pub fn record(&self) -> Option<usize> {
        match self {
            ImportError::Format { record, .. }
            | ImportError::Offset { record, .. }
            | ImportError::UnknownLabel { record, .. } => Some(*record),
            ImportError::Io(_) => None,
        }
    }
}

/// Per-run counters. `input == emitted + dropped + errored` always holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ImportSummary {
    pub input: usize,
    pub emitted: usize,
    pub dropped: usize,
    pub errored: usize,
    /// Dropped records by reason, e.g. `label:hypothetical`, `type:drug`,
    /// `unmergeable`.
    pub drop_reasons: BTreeMap<String, usize>,
    /// Multi-fragment entities merged into one span.
    pub merged: usize,
}

impl ImportSummary {
    pub fn is_conserved(&self) -> bool {
        self.input == self.emitted + self.dropped + self.errored
    }

    pub(crate) fn drop(&mut self, reason: impl Into<String>) {
        self.dropped += 1;
        *self.drop_reasons.entry(reason.into()).or_default() += 1;
    }
}

impl fmt::Display for ImportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "input {}, emitted {}, dropped {}, errored {}",
            self.input, self.emitted, self.dropped, self.errored
        )?;
        if self.merged > 0 {
            write!(f, ", merged {}", self.merged)?;
        }
        for (reason, n) in &self.drop_reasons {
            write!(f, "\n  dropped {reason}: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Import {
    pub sentences: Vec<AnnotatedSentence>,
    pub errors: Vec<ImportError>,
    pub summary: ImportSummary,
}

impl Import {
    pub(crate) fn error(&mut self, e: ImportError) {
        self.summary.errored += 1;
        self.errors.push(e);
    }

    pub(crate) fn emit(&mut self, s: AnnotatedSentence) {
        self.summary.emitted += 1;
        self.sentences.push(s);
    }
}

/// Reads canonical corpus JSONL, validating every span.
pub fn import_jsonl(reader: impl BufRead) -> Import {
    let mut out = Import::default();
    for (i, line) in reader.lines().enumerate() {
        let record = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                out.errors.push(ImportError::Io(e.to_string()));
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        out.summary.input += 1;
        match serde_json::from_str::<CorpusRecord>(&line) {
            Ok(r) => match AnnotatedSentence::try_from(r) {
                Ok(s) => out.emit(s),
                Err(e) => out.error(ImportError::Offset {
                    record,
                    reason: e.to_string(),
                }),
            },
            Err(e) => out.error(ImportError::Format {
                record,
                reason: e.to_string(),
            }),
        }
    }
    out
}

/// Gold label counts in the column order Affirmed, Negated, Possible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LabelDistribution {
    pub affirmed: usize,
    pub negated: usize,
    pub possible: usize,
}

impl LabelDistribution {
    pub const HEADER: [&'static str; 3] = ["Affirmed", "Negated", "Possible"];

    pub fn as_array(&self) -> [usize; 3] {
        [self.affirmed, self.negated, self.possible]
    }

    pub fn total(&self) -> usize {
        self.affirmed + self.negated + self.possible
    }

    /// Tab-separated `name, affirmed, negated, possible`.
    pub fn row(&self, name: &str) -> String {
        format!(
            "{name}\t{}\t{}\t{}",
            self.affirmed, self.negated, self.possible
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sentence {id:?} has no gold label")]
pub struct MissingGold {
    pub id: String,
}

pub fn label_distribution<'a>(
    corpus: impl IntoIterator<Item = &'a AnnotatedSentence>,
) -> Result<LabelDistribution, MissingGold> {
    let mut d = LabelDistribution::default();
    for s in corpus {
        match s.gold {
            Some(Affirmed) => d.affirmed += 1,
            Some(Negated) => d.negated += 1,
            Some(Possible) => d.possible += 1,
            None => return Err(MissingGold { id: s.id.clone() }),
        }
    }
    Ok(d)
}
