//! Whitespace/punctuation tokenizer over normalized text.
//!
//! Tokens are maximal runs of alphanumeric characters; a hyphen between two
//! alphanumerics stays inside the token. Everything else separates tokens and
//! produces nothing.

use crate::normalize::{normalize, NormalizationPolicy};
use crate::types::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Normalized token text.
    pub text: String,
    /// Code-point span in the original text.
    pub source_span: Span,
    pub inside_entity: bool,
}

/// Tokenizes `text` after normalizing it under `policy`. `inside_entity` is
/// set for tokens whose source span overlaps `entity`.
pub fn tokenize(text: &str, policy: NormalizationPolicy, entity: Span) -> Vec<Token> {
    let norm = normalize(text, policy);
    let chars: Vec<char> = norm.text.chars().collect();
    word_ranges(&chars)
        .into_iter()
        .map(|(a, b)| {
            let source_span = Span::new(norm.offset_map[a].start, norm.offset_map[b - 1].end);
            Token {
                text: chars[a..b].iter().collect(),
                source_span,
                inside_entity: source_span.overlaps(&entity),
            }
        })
        .collect()
}

/// Splits already-normalized text into token strings.
pub fn words(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    word_ranges(&chars)
        .into_iter()
        .map(|(a, b)| chars[a..b].iter().collect())
        .collect()
}

fn word_ranges(chars: &[char]) -> Vec<(usize, usize)> {
    let is_word = |i: usize| -> bool {
        let c = chars[i];
        if c.is_alphanumeric() {
            return true;
        }
        c == '-'
            && i > 0
            && i + 1 < chars.len()
            && chars[i - 1].is_alphanumeric()
            && chars[i + 1].is_alphanumeric()
    };

    let mut ranges = Vec::new();
    let mut start = None;
    for i in 0..chars.len() {
        match (is_word(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                ranges.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        ranges.push((s, chars.len()));
    }
    ranges
}
