//! Tab-separated exports of Ex4CDS and BRONCO150.
//!
//! Both files start with a header row. Ex4CDS columns:
//! `id, sentence, start, end, type, factuality`. BRONCO columns:
//! `id, sentence, fragments, type, factuality`, where `fragments` is a
//! `;`-separated list of `start-end` code-point ranges. Fields are not
//! quoted.

use std::io::Read;

use serde::Deserialize;

use super::{
    bronco_mapping, ex4cds_mapping, merge_fragments, FragmentedEntity, Import, ImportError,
    LabelMapping, Mapped, DEFAULT_MAX_GAP,
};
use crate::types::{AnnotatedSentence, FactualityLabel, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularOptions {
    /// Keep only rows whose `type` equals this (case-insensitive); `None`
    /// keeps every row.
    pub entity_type: Option<String>,
    pub max_gap: usize,
    pub language: String,
}

impl TabularOptions {
    pub fn ex4cds() -> Self {
        TabularOptions {
            entity_type: Some("medical-condition".to_string()),
            max_gap: DEFAULT_MAX_GAP,
            language: "de".to_string(),
        }
    }

    pub fn bronco() -> Self {
        TabularOptions {
            entity_type: Some("diagnosis".to_string()),
            ..TabularOptions::ex4cds()
        }
    }
}

#[derive(Deserialize)]
struct Ex4cdsRow {
    id: String,
    sentence: String,
    start: usize,
    end: usize,
    #[serde(rename = "type")]
    entity_type: String,
    factuality: String,
}

#[derive(Deserialize)]
struct BroncoRow {
    id: String,
    sentence: String,
    fragments: String,
    #[serde(rename = "type")]
    entity_type: String,
    factuality: String,
}

fn reader(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .from_reader(input)
}

/// Shared per-row steps: type filter, then label mapping. `None` means the
/// row was dropped or errored and has been counted.
fn filter_and_map(
    out: &mut Import,
    record: usize,
    entity_type: &str,
    factuality: &str,
    mapping: &LabelMapping,
    options: &TabularOptions,
) -> Option<FactualityLabel> {
    if let Some(want) = &options.entity_type {
        if !entity_type.trim().eq_ignore_ascii_case(want) {
            out.summary.drop(format!("type:{}", entity_type.trim()));
            return None;
        }
    }
    match mapping.map(factuality) {
        Some(Mapped::Label(l)) => Some(l),
        Some(Mapped::Drop) => {
            out.summary
                .drop(format!("label:{}", factuality.trim().to_lowercase()));
            None
        }
        None => {
            out.error(ImportError::UnknownLabel {
                record,
                label: factuality.to_string(),
                mapping: mapping.name.clone(),
            });
            None
        }
    }
}

/// Builds and emits the sentence; false if its span was invalid.
fn emit(
    out: &mut Import,
    record: usize,
    sentence: (String, String, Span),
    label: FactualityLabel,
    options: &TabularOptions,
    source: &str,
) -> bool {
    let (id, text, span) = sentence;
    match AnnotatedSentence::new(id, text, span, options.language.clone()) {
        Ok(s) => {
            out.emit(s.with_gold(label).with_source(source));
            true
        }
        Err(e) => {
            out.error(ImportError::Offset {
                record,
                reason: e.to_string(),
            });
            false
        }
    }
}

fn each_row<R: for<'de> Deserialize<'de>>(
    input: impl Read,
    mut f: impl FnMut(&mut Import, usize, R),
) -> Import {
    let mut out = Import::default();
    let mut rdr = reader(input);
    let mut raw = csv::StringRecord::new();
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            out.errors.push(ImportError::Io(e.to_string()));
            return out;
        }
    };
    loop {
        match rdr.read_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let record = e.position().map_or(0, |p| p.line() as usize);
                out.summary.input += 1;
                out.error(ImportError::Format {
                    record,
                    reason: e.to_string(),
                });
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    break;
                }
                continue;
            }
        }
        let record = raw.position().map_or(0, |p| p.line() as usize);
        if raw.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.summary.input += 1;
        match raw.deserialize::<R>(Some(&headers)) {
            Ok(row) => f(&mut out, record, row),
            Err(e) => out.error(ImportError::Format {
                record,
                reason: e.to_string(),
            }),
        }
    }
    out
}

/// Imports an Ex4CDS export with [`ex4cds_mapping`].
pub fn import_ex4cds(input: impl Read, options: &TabularOptions) -> Import {
    let mapping = ex4cds_mapping();
    each_row(input, |out, record, row: Ex4cdsRow| {
        let Some(label) = filter_and_map(
            out,
            record,
            &row.entity_type,
            &row.factuality,
            &mapping,
            options,
        ) else {
            return;
        };
        emit(
            out,
            record,
            (row.id, row.sentence, Span::new(row.start, row.end)),
            label,
            options,
            "ex4cds",
        );
    })
}

fn parse_fragments(s: &str) -> Result<Vec<Span>, String> {
    s.split(';')
        .map(|f| {
            let (a, b) = f
                .trim()
                .split_once('-')
                .ok_or_else(|| format!("bad fragment {f:?}"))?;
            let a = a
                .trim()
                .parse()
                .map_err(|_| format!("bad fragment start in {f:?}"))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| format!("bad fragment end in {f:?}"))?;
            Ok(Span::new(a, b))
        })
        .collect()
}

/// Imports a BRONCO150 export with [`bronco_mapping`], merging fragmented
/// entities. Entities with a gap above `options.max_gap` are dropped as
/// `unmergeable`.
pub fn import_bronco(input: impl Read, options: &TabularOptions) -> Import {
    let mapping = bronco_mapping();
    each_row(input, |out, record, row: BroncoRow| {
        let fragments = match parse_fragments(&row.fragments) {
            Ok(f) => f,
            Err(reason) => return out.error(ImportError::Format { record, reason }),
        };
        let entity = match FragmentedEntity::new(fragments, options.max_gap) {
            Ok(e) => e,
            Err(e) => {
                return out.error(ImportError::Offset {
                    record,
                    reason: e.to_string(),
                })
            }
        };
        let Some(label) = filter_and_map(
            out,
            record,
            &row.entity_type,
            &row.factuality,
            &mapping,
            options,
        ) else {
            return;
        };
        let span = match merge_fragments(&entity) {
            Ok(s) => s,
            Err(_) => return out.summary.drop("unmergeable"),
        };
        if emit(
            out,
            record,
            (row.id, row.sentence, span),
            label,
            options,
            "bronco",
        ) && entity.fragments().len() > 1
        {
            out.summary.merged += 1;
        }
    })
}
