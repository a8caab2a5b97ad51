//! Inline entity markup: `Patient denies <E>headache</E>.`

use thiserror::Error;

use crate::types::{char_len, AnnotatedSentence, Span};

pub const OPEN_TAG: &str = "<E>";
pub const CLOSE_TAG: &str = "</E>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MarkupError {
    #[error("no entity markup found")]
    NoTags,
    #[error("more than one entity tagged")]
    MultipleTags,
    #[error("entity tags are unbalanced or out of order")]
    Unbalanced,
    #[error("tagged entity is empty")]
    EmptyEntity,
}

/// Strips the single `<E>…</E>` pair from `tagged` and returns the plain text
/// with the code-point span of the enclosed entity.
pub fn parse_tagged(tagged: &str) -> Result<(String, Span), MarkupError> {
    let opens = tagged.matches(OPEN_TAG).count();
    let closes = tagged.matches(CLOSE_TAG).count();
    match (opens, closes) {
        (0, 0) => return Err(MarkupError::NoTags),
        (1, 1) => {}
        (o, c) if o > 1 && c > 1 && o == c => return Err(MarkupError::MultipleTags),
        _ => return Err(MarkupError::Unbalanced),
    }

    let open = tagged.find(OPEN_TAG).unwrap_or_default();
    let close = tagged.find(CLOSE_TAG).unwrap_or_default();
    if close < open {
        return Err(MarkupError::Unbalanced);
    }

    let before = &tagged[..open];
    let inner = &tagged[open + OPEN_TAG.len()..close];
    let after = &tagged[close + CLOSE_TAG.len()..];
    if inner.trim().is_empty() {
        return Err(MarkupError::EmptyEntity);
    }

    let start = char_len(before);
    let span = Span::new(start, start + char_len(inner));
    let mut text = String::with_capacity(tagged.len());
    text.push_str(before);
    text.push_str(inner);
    text.push_str(after);
    Ok((text, span))
}

/// Inserts the entity tags around the sentence's entity span.
pub fn render_tagged(sentence: &AnnotatedSentence) -> String {
    let mut out = String::with_capacity(sentence.text.len() + OPEN_TAG.len() + CLOSE_TAG.len());
    for (i, c) in sentence.text.chars().enumerate() {
        if i == sentence.entity.start {
            out.push_str(OPEN_TAG);
        }
        if i == sentence.entity.end {
            out.push_str(CLOSE_TAG);
        }
        out.push(c);
    }
    if sentence.entity.end == char_len(&sentence.text) {
        out.push_str(CLOSE_TAG);
    }
    out
}
