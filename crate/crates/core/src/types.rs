//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Three-valued factuality target.
///
/// The derived order (`Affirmed < Negated < Possible`) is the order used for
/// every report row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactualityLabel {
    Affirmed,
    Negated,
    Possible,
}

impl FactualityLabel {
    pub const ALL: [FactualityLabel; 3] = [
        FactualityLabel::Affirmed,
        FactualityLabel::Negated,
        FactualityLabel::Possible,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FactualityLabel::Affirmed => "affirmed",
            FactualityLabel::Negated => "negated",
            FactualityLabel::Possible => "possible",
        }
    }

    /// Capitalized form used in table headers.
    pub fn title(self) -> &'static str {
        match self {
            FactualityLabel::Affirmed => "Affirmed",
            FactualityLabel::Negated => "Negated",
            FactualityLabel::Possible => "Possible",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FactualityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown factuality label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for FactualityLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "affirmed" => Ok(FactualityLabel::Affirmed),
            "negated" => Ok(FactualityLabel::Negated),
            "possible" => Ok(FactualityLabel::Possible),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

/// Half-open range of Unicode code points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("entity span {span} is not within text of length {len}")]
    OutOfBounds { span: Span, len: usize },
    #[error("entity span {0} is empty")]
    Empty(Span),
    #[error("entity span {0} covers only whitespace")]
    Blank(Span),
}

/// Number of code points in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slice `text` by a code-point span. Out-of-range ends are clamped.
pub fn slice_chars(text: &str, span: Span) -> &str {
    let start = byte_offset(text, span.start);
    let end = byte_offset(text, span.end.max(span.start));
    &text[start..end]
}

pub(crate) fn byte_offset(text: &str, char_idx: usize) -> usize {
    text.char_indices()
        .nth(char_idx)
        .map(|(b, _)| b)
        .unwrap_or(text.len())
}

/// One sentence with one target entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub id: String,
    pub text: String,
    pub entity: Span,
    pub language: String,
    pub gold: Option<FactualityLabel>,
    pub source: Option<String>,
}

impl AnnotatedSentence {
    /// Builds a sentence, checking the span invariants.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        entity: Span,
        language: impl Into<String>,
    ) -> Result<Self, SpanError> {
        let text = text.into();
        check_span(&text, entity)?;
        Ok(AnnotatedSentence {
            id: id.into(),
            text,
            entity,
            language: language.into(),
            gold: None,
            source: None,
        })
    }

    pub fn with_gold(mut self, gold: FactualityLabel) -> Self {
        self.gold = Some(gold);
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn entity_text(&self) -> &str {
        slice_chars(&self.text, self.entity)
    }

    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            id: self.id.clone(),
            text: self.text.clone(),
            entity: self.entity,
            lang: self.language.clone(),
            label: self.gold,
            source: self.source.clone(),
        }
    }
}

pub(crate) fn check_span(text: &str, span: Span) -> Result<(), SpanError> {
    let len = char_len(text);
    if span.end > len || span.start > span.end {
        return Err(SpanError::OutOfBounds { span, len });
    }
    if span.is_empty() {
        return Err(SpanError::Empty(span));
    }
    if slice_chars(text, span).trim().is_empty() {
        return Err(SpanError::Blank(span));
    }
    Ok(())
}

/// One line of the corpus JSONL format, before span validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    pub entity: Span,
    pub lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<FactualityLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl TryFrom<CorpusRecord> for AnnotatedSentence {
    type Error = SpanError;

    fn try_from(r: CorpusRecord) -> Result<Self, Self::Error> {
        check_span(&r.text, r.entity)?;
        Ok(AnnotatedSentence {
            id: r.id,
            text: r.text,
            entity: r.entity,
            language: r.lang,
            gold: r.label,
            source: r.source,
        })
    }
}

impl From<&AnnotatedSentence> for CorpusRecord {
    fn from(s: &AnnotatedSentence) -> Self {
        s.to_record()
    }
}

/// Compares the primary subtags of two language tags, ignoring case
/// (`de` matches `de-DE`).
pub fn same_language(a: &str, b: &str) -> bool {
    fn primary(tag: &str) -> &str {
        tag.split(['-', '_']).next().unwrap_or(tag)
    }
    primary(a).eq_ignore_ascii_case(primary(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_order_is_report_order() {
        let mut labels = vec![
            FactualityLabel::Possible,
            FactualityLabel::Affirmed,
            FactualityLabel::Negated,
        ];
        labels.sort();
        assert_eq!(labels, FactualityLabel::ALL);
    }

    #[test]
    fn label_strings_round_trip() {
        for label in FactualityLabel::ALL {
            assert_eq!(label.as_str().parse::<FactualityLabel>().unwrap(), label);
        }
        assert!("maybe".parse::<FactualityLabel>().is_err());
    }

    #[test]
    fn span_invariants_are_enforced() {
        assert!(AnnotatedSentence::new("a", "abc", Span::new(0, 3), "en").is_ok());
        assert_eq!(
            AnnotatedSentence::new("a", "abc", Span::new(1, 4), "en").unwrap_err(),
            SpanError::OutOfBounds {
                span: Span::new(1, 4),
                len: 3
            }
        );
        assert_eq!(
            AnnotatedSentence::new("a", "abc", Span::new(2, 2), "en").unwrap_err(),
            SpanError::Empty(Span::new(2, 2))
        );
        assert_eq!(
            AnnotatedSentence::new("a", "a  b", Span::new(1, 3), "en").unwrap_err(),
            SpanError::Blank(Span::new(1, 3))
        );
    }

    #[test]
    fn spans_count_code_points() {
        let s = AnnotatedSentence::new("x", "Übel ß", Span::new(5, 6), "de").unwrap();
        assert_eq!(s.entity_text(), "ß");
    }

    #[test]
    fn record_json_shape() {
        let s = AnnotatedSentence::new("1", "no fever", Span::new(3, 8), "en")
            .unwrap()
            .with_gold(FactualityLabel::Negated);
        let json = serde_json::to_string(&s.to_record()).unwrap();
        assert_eq!(
            json,
            r#"{"id":"1","text":"no fever","entity":{"start":3,"end":8},"lang":"en","label":"negated"}"#
        );
        let back: CorpusRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(AnnotatedSentence::try_from(back).unwrap(), s);
    }

    #[test]
    fn language_tags_compare_by_primary_subtag() {
        assert!(same_language("de", "DE-de"));
        assert!(!same_language("de", "en"));
    }
}
