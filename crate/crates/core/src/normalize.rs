//! Offset-preserving text normalization.
//!
//! Folding can change length (`ß` becomes `ss`, `Ä` becomes `Ae`), so every
//! normalized code point carries the source range it came from. Trigger
//! matches found on normalized text are reported in source coordinates via
//! that map.

use serde::{Deserialize, Serialize};
use unicode_normalization::char::canonical_combining_class;
use unicode_normalization::UnicodeNormalization;

use crate::types::Span;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub fold_case: bool,
    /// ä→ae, ö→oe, ü→ue, Ä→Ae, Ö→Oe, Ü→Ue, ß→ss
    pub fold_umlauts: bool,
    /// Canonical composition (NFC) before folding.
    pub unicode_compose: bool,
}

impl NormalizationPolicy {
    pub const IDENTITY: NormalizationPolicy = NormalizationPolicy {
        fold_case: false,
        fold_umlauts: false,
        unicode_compose: false,
    };

    pub const fn is_identity(&self) -> bool {
        !self.fold_case && !self.fold_umlauts && !self.unicode_compose
    }
}

/// Normalized text plus, for each normalized code point, the source span it
/// derives from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    pub offset_map: Vec<Span>,
}

impl NormalizedText {
    /// Maps a normalized code-point span back to source coordinates.
    ///
    /// Returns `None` for an empty or out-of-range span.
    pub fn source_span(&self, span: Span) -> Option<Span> {
        if span.is_empty() || span.end > self.offset_map.len() {
            return None;
        }
        Some(Span::new(
            self.offset_map[span.start].start,
            self.offset_map[span.end - 1].end,
        ))
    }

    /// Normalized code-point range whose sources overlap `source`.
    pub fn normalized_span(&self, source: Span) -> Option<Span> {
        let first = self.offset_map.iter().position(|s| s.overlaps(&source))?;
        let last = self.offset_map.iter().rposition(|s| s.overlaps(&source))?;
        Some(Span::new(first, last + 1))
    }
}

fn fold_umlaut(c: char) -> Option<&'static str> {
    Some(match c {
        'ä' => "ae",
        'ö' => "oe",
        'ü' => "ue",
        'Ä' => "Ae",
        'Ö' => "Oe",
        'Ü' => "Ue",
        'ß' => "ss",
        _ => return None,
    })
}

fn fold_once(unit: &[char], policy: NormalizationPolicy) -> Vec<char> {
    let composed: Vec<char> = if policy.unicode_compose {
        unit.iter().copied().nfc().collect()
    } else {
        unit.to_vec()
    };
    let mut out = Vec::with_capacity(composed.len());
    for c in composed {
        let cased: Vec<char> = if policy.fold_case {
            c.to_lowercase().collect()
        } else {
            vec![c]
        };
        for c in cased {
            match fold_umlaut(c).filter(|_| policy.fold_umlauts) {
                Some(rep) => out.extend(rep.chars()),
                None => out.push(c),
            }
        }
    }
    out
}

/// Folds one unit until stable: an expansion such as `ä` + U+0308 → `ae` +
/// U+0308 can recompose into a new precomposed character.
fn fold_unit(unit: &[char], policy: NormalizationPolicy) -> Vec<char> {
    let mut cur = fold_once(unit, policy);
    if policy.unicode_compose {
        for _ in 0..4 {
            let next = fold_once(&cur, policy);
            if next == cur {
                break;
            }
            cur = next;
        }
    }
    cur
}

/// Applies `policy` to `text`. Total and deterministic; with the identity
/// policy the output equals the input and the map is the identity.
pub fn normalize(text: &str, policy: NormalizationPolicy) -> NormalizedText {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut offset_map = Vec::with_capacity(chars.len());

    let mut i = 0;
    while i < chars.len() {
        // A unit is one char, or with composition on, a starter plus its
        // trailing combining marks.
        let mut j = i + 1;
        if policy.unicode_compose {
            while j < chars.len() && canonical_combining_class(chars[j]) != 0 {
                j += 1;
            }
        }
        let source = Span::new(i, j);
        for c in fold_unit(&chars[i..j], policy) {
            out.push(c);
            offset_map.push(source);
        }
        i = j;
    }

    NormalizedText {
        text: out,
        offset_map,
    }
}
