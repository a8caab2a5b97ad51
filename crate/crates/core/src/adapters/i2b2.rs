//! i2b2 2010 concept/assertion records.
//!
//! Each assertion line looks like
//!
//! ```text
//! c="chest pain" 12:4 12:5||t="problem"||a="absent"
//! ```
//!
//! where `12:4` is line 12 (1-based) of the document, token 4 (0-based,
//! whitespace separated), and the end token is inclusive. The document line
//! becomes the sentence text.

use std::io::BufRead;

use super::{Import, ImportError, LabelMapping, Mapped};
use crate::types::{AnnotatedSentence, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenOffset {
    pub line: usize,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionRecord {
    pub concept: String,
    pub start: TokenOffset,
    /// Inclusive.
    pub end: TokenOffset,
    pub concept_type: Option<String>,
    pub assertion: String,
}

fn quoted<'a>(field: &'a str, key: &str) -> Result<&'a str, String> {
    let rest = field
        .trim()
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix("=\""))
        .ok_or_else(|| format!("expected {key}=\"…\", found {field:?}"))?;
    rest.strip_suffix('"')
        .ok_or_else(|| format!("unterminated {key} value"))
}

fn token_offset(s: &str) -> Result<TokenOffset, String> {
    let (line, token) = s
        .split_once(':')
        .ok_or_else(|| format!("bad offset {s:?}"))?;
    let line: usize = line
        .parse()
        .map_err(|_| format!("bad line number in {s:?}"))?;
    let token = token
        .parse()
        .map_err(|_| format!("bad token number in {s:?}"))?;
    if line == 0 {
        return Err(format!("line numbers start at 1, found {s:?}"));
    }
    Ok(TokenOffset { line, token })
}

/// Parses one assertion line.
pub fn parse_assertion_line(line: &str) -> Result<AssertionRecord, String> {
    let mut fields = line.split("||");
    let concept_field = fields.next().unwrap_or_default().trim();
    let body = concept_field
        .strip_prefix("c=\"")
        .ok_or_else(|| format!("expected c=\"…\" at start of {concept_field:?}"))?;
    let close = body.rfind('"').ok_or("unterminated concept text")?;
    let concept = body[..close].to_string();
    let offsets: Vec<&str> = body[close + 1..].split_whitespace().collect();
    let [start, end] = offsets[..] else {
        return Err(format!(
            "expected two offsets after the concept, found {}",
            offsets.len()
        ));
    };
    let (start, end) = (token_offset(start)?, token_offset(end)?);

    let mut concept_type = None;
    let mut assertion = None;
    for f in fields {
        match f.trim().split_once('=') {
            Some(("t", _)) => concept_type = Some(quoted(f, "t")?.to_string()),
            Some(("a", _)) => assertion = Some(quoted(f, "a")?.to_string()),
            _ => return Err(format!("unknown field {f:?}")),
        }
    }
    let assertion = assertion.ok_or("missing a=\"…\" field")?;
    Ok(AssertionRecord {
        concept,
        start,
        end,
        concept_type,
        assertion,
    })
}

/// Code-point spans of the whitespace-separated tokens of `line`.
fn token_spans(line: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, c) in line.chars().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                spans.push(Span::new(s, i));
                start = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        spans.push(Span::new(s, n));
    }
    spans
}

fn locate(doc_lines: &[&str], r: &AssertionRecord) -> Result<(String, Span), String> {
    if r.start.line != r.end.line {
        return Err(format!(
            "entity spans lines {} to {}",
            r.start.line, r.end.line
        ));
    }
    let text = doc_lines.get(r.start.line - 1).ok_or_else(|| {
        format!(
            "line {} beyond end of document ({} lines)",
            r.start.line,
            doc_lines.len()
        )
    })?;
    let toks = token_spans(text);
    if r.start.token > r.end.token {
        return Err(format!(
            "start token {} after end token {}",
            r.start.token, r.end.token
        ));
    }
    if r.end.token >= toks.len() {
        return Err(format!(
            "token {} beyond end of line {} ({} tokens)",
            r.end.token,
            r.start.line,
            toks.len()
        ));
    }
    let span = Span::new(toks[r.start.token].start, toks[r.end.token].end);
    let found: Vec<String> = toks[r.start.token..=r.end.token]
        .iter()
        .map(|s| crate::types::slice_chars(text, *s).to_lowercase())
        .collect();
    let expected: Vec<String> = r
        .concept
        .split_whitespace()
        .map(str::to_lowercase)
        .collect();
    if found != expected {
        return Err(format!(
            "concept {:?} does not match tokens {:?}",
            r.concept,
            found.join(" ")
        ));
    }
    Ok((text.to_string(), span))
}

/// Converts the assertion records of one document.
///
/// Problems not of type `problem` are dropped, as are labels the mapping
/// sends to [`Mapped::Drop`]. Malformed lines and bad offsets are reported
/// per record and the import continues.
pub fn import_assertion_corpus(
    document: &str,
    doc_id: &str,
    assertions: impl BufRead,
    mapping: &LabelMapping,
) -> Import {
    let doc_lines: Vec<&str> = document.lines().collect();
    let mut out = Import::default();
    for (i, line) in assertions.lines().enumerate() {
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
        let r = match parse_assertion_line(&line) {
            Ok(r) => r,
            Err(reason) => {
                out.error(ImportError::Format { record, reason });
                continue;
            }
        };
        if let Some(t) = r.concept_type.as_deref().filter(|t| *t != "problem") {
            out.summary.drop(format!("type:{t}"));
            continue;
        }
        let label = match mapping.map(&r.assertion) {
            Some(Mapped::Label(l)) => l,
            Some(Mapped::Drop) => {
                out.summary
                    .drop(format!("label:{}", r.assertion.trim().to_lowercase()));
                continue;
            }
            None => {
                out.error(ImportError::UnknownLabel {
                    record,
                    label: r.assertion.clone(),
                    mapping: mapping.name.clone(),
                });
                continue;
            }
        };
        let (text, span) = match locate(&doc_lines, &r) {
            Ok(x) => x,
            Err(reason) => {
                out.error(ImportError::Offset { record, reason });
                continue;
            }
        };
        match AnnotatedSentence::new(format!("{doc_id}:{record}"), text, span, "en") {
            Ok(s) => out.emit(s.with_gold(label).with_source(doc_id)),
            Err(e) => out.error(ImportError::Offset {
                record,
                reason: e.to_string(),
            }),
        }
    }
    out
}
