//! Trigger sets: the cue phrases the rule engine matches.
//!
//! On disk a trigger set is a TSV file, one per language:
//!
//! ```text
//! # comment
//! verneint<TAB>PreNegation
//! wurde ausgeschlossen<TAB>PostNegation<TAB>order_insensitive
//! ```
//!
//! Phrases are tokenized and normalized under the set's policy when loaded.
//! The phrase as written is kept so validation can point at spelling that
//! does not survive normalization.

mod matcher;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::engine::Mode;
use crate::normalize::{normalize, NormalizationPolicy};
use crate::tokenize::words;
use crate::types::AnnotatedSentence;

pub(crate) use matcher::suffix_stem;
pub use matcher::{TriggerMatch, TriggerMatcher, DEFAULT_REORDER_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TriggerCategory {
    PreNegation,
    PostNegation,
    PrePossible,
    PostPossible,
    PseudoNegation,
    Termination,
    /// Matches at the end of a single token (`schmerzfrei`).
    NegationSuffix,
}

impl TriggerCategory {
    pub const ALL: [TriggerCategory; 7] = [
        TriggerCategory::PreNegation,
        TriggerCategory::PostNegation,
        TriggerCategory::PrePossible,
        TriggerCategory::PostPossible,
        TriggerCategory::PseudoNegation,
        TriggerCategory::Termination,
        TriggerCategory::NegationSuffix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TriggerCategory::PreNegation => "PreNegation",
            TriggerCategory::PostNegation => "PostNegation",
            TriggerCategory::PrePossible => "PrePossible",
            TriggerCategory::PostPossible => "PostPossible",
            TriggerCategory::PseudoNegation => "PseudoNegation",
            TriggerCategory::Termination => "Termination",
            TriggerCategory::NegationSuffix => "NegationSuffix",
        }
    }

    pub fn is_pre(self) -> bool {
        matches!(
            self,
            TriggerCategory::PreNegation | TriggerCategory::PrePossible
        )
    }

    pub fn is_post(self) -> bool {
        matches!(
            self,
            TriggerCategory::PostNegation | TriggerCategory::PostPossible
        )
    }

    /// Categories of the same kind may share a phrase without conflicting
    /// (a phrase may be both a pre- and a post-negation cue).
    fn kind(self) -> u8 {
        match self {
            TriggerCategory::PreNegation | TriggerCategory::PostNegation => 0,
            TriggerCategory::PrePossible | TriggerCategory::PostPossible => 1,
            TriggerCategory::PseudoNegation => 2,
            TriggerCategory::Termination => 3,
            TriggerCategory::NegationSuffix => 4,
        }
    }
}

impl fmt::Display for TriggerCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TriggerCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TriggerCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown trigger category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trigger {
    /// Normalized tokens.
    pub phrase: Vec<String>,
    /// The phrase as it was written in the trigger file.
    pub raw: String,
    pub category: TriggerCategory,
    pub order_insensitive: bool,
    pub language: String,
}

impl Trigger {
    pub fn phrase_text(&self) -> String {
        self.phrase.join(" ")
    }
}

#[derive(Debug, Error)]
pub enum TriggerError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("reading trigger file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerSet {
    pub language: String,
    pub policy: NormalizationPolicy,
    triggers: Vec<Trigger>,
    warnings: Vec<LoadWarning>,
}

impl TriggerSet {
    pub fn new(language: impl Into<String>, policy: NormalizationPolicy) -> Self {
        TriggerSet {
            language: language.into(),
            policy,
            triggers: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn triggers(&self) -> &[Trigger] {
        &self.triggers
    }

    pub fn warnings(&self) -> &[LoadWarning] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.triggers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triggers.is_empty()
    }

    /// Adds a trigger. Returns `Ok(false)` when the same (phrase, category)
    /// pair is already present.
    pub fn insert(
        &mut self,
        raw: &str,
        category: TriggerCategory,
        order_insensitive: bool,
    ) -> Result<bool, String> {
        let phrase = words(&normalize(raw, self.policy).text);
        if phrase.is_empty() {
            return Err("empty phrase".to_string());
        }
        if category == TriggerCategory::NegationSuffix && phrase.len() != 1 {
            return Err(format!("suffix trigger {raw:?} must be a single token"));
        }
        if order_insensitive && phrase.len() < 2 {
            return Err(format!(
                "order_insensitive trigger {raw:?} needs at least two tokens"
            ));
        }
        if self
            .triggers
            .iter()
            .any(|t| t.phrase == phrase && t.category == category)
        {
            return Ok(false);
        }
        self.triggers.push(Trigger {
            phrase,
            raw: raw.to_string(),
            category,
            order_insensitive,
            language: self.language.clone(),
        });
        Ok(true)
    }

    /// Same triggers, different policy. Phrases are re-normalized from their
    /// stored (already normalized) tokens.
    pub fn with_policy(&self, policy: NormalizationPolicy) -> TriggerSet {
        let mut out = TriggerSet::new(self.language.clone(), policy);
        for t in &self.triggers {
            // Stored tokens are valid input, so insertion cannot fail.
            let _ = out.insert(&t.phrase_text(), t.category, t.order_insensitive);
        }
        out
    }
}

/// Parses a trigger TSV. Duplicate (phrase, category) lines collapse into one
/// trigger and leave a warning.
pub fn load_trigger_set(
    reader: impl BufRead,
    language: &str,
    policy: NormalizationPolicy,
) -> Result<TriggerSet, TriggerError> {
    let mut set = TriggerSet::new(language, policy);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let format_err = |reason: String| TriggerError::Format {
            line: line_no,
            reason,
        };

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(format_err(format!(
                "expected 2 or 3 tab-separated columns, got {}",
                cols.len()
            )));
        }
        let phrase = cols[0].trim();
        if phrase.is_empty() {
            return Err(format_err("empty phrase".to_string()));
        }
        let category: TriggerCategory = cols[1].trim().parse().map_err(format_err)?;
        let order_insensitive = match cols.get(2).map(|c| c.trim()) {
            None | Some("") => false,
            Some("order_insensitive") => true,
            Some(other) => return Err(format_err(format!("unknown option {other:?}"))),
        };

        if !set
            .insert(phrase, category, order_insensitive)
            .map_err(format_err)?
        {
            set.warnings.push(LoadWarning {
                line: line_no,
                message: format!("duplicate trigger {phrase:?} ({category}) ignored"),
            });
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    /// The phrase as written changes under normalization, so text normalized
    /// with the same policy would never contain it verbatim.
    EncodingInconsistent { phrase: String, normalized: String },
    CategoryConflict {
        phrase: String,
        categories: Vec<TriggerCategory>,
    },
    DeadTrigger {
        phrase: String,
        category: TriggerCategory,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::EncodingInconsistent { phrase, normalized } => {
                write!(f, "encoding: {phrase:?} normalizes to {normalized:?}")
            }
            Finding::CategoryConflict { phrase, categories } => {
                let cats: Vec<&str> = categories.iter().map(|c| c.as_str()).collect();
                write!(f, "conflict: {phrase:?} is listed as {}", cats.join(", "))
            }
            Finding::DeadTrigger { phrase, category } => {
                write!(
                    f,
                    "dead: {phrase:?} ({category}) never matches the sample corpus"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_encoding_issues(&self) -> bool {
        self.findings
            .iter()
            .any(|f| matches!(f, Finding::EncodingInconsistent { .. }))
    }
}

/// Checks a trigger set for spelling that will not match normalized text,
/// phrases listed under conflicting categories, and (given a sample corpus)
/// triggers that never fire.
pub fn validate_trigger_set(
    set: &TriggerSet,
    sample_corpus: Option<&[AnnotatedSentence]>,
) -> ValidationReport {
    let mut findings = Vec::new();

    let mut seen_raw = BTreeSet::new();
    for t in set.triggers() {
        let normalized = normalize(&t.raw, set.policy).text;
        if normalized != t.raw && seen_raw.insert(t.raw.clone()) {
            findings.push(Finding::EncodingInconsistent {
                phrase: t.raw.clone(),
                normalized,
            });
        }
    }

    let mut by_phrase: BTreeMap<String, BTreeSet<TriggerCategory>> = BTreeMap::new();
    for t in set.triggers() {
        by_phrase
            .entry(t.phrase_text())
            .or_default()
            .insert(t.category);
    }
    for (phrase, cats) in by_phrase {
        let kinds: BTreeSet<u8> = cats.iter().map(|c| c.kind()).collect();
        if kinds.len() > 1 {
            findings.push(Finding::CategoryConflict {
                phrase,
                categories: cats.into_iter().collect(),
            });
        }
    }

    if let Some(corpus) = sample_corpus {
        let matcher = TriggerMatcher::compile(set);
        let token_lists: Vec<Vec<String>> = corpus
            .iter()
            .map(|s| words(&normalize(&s.text, set.policy).text))
            .collect();
        for t in set.triggers() {
            let fires = token_lists
                .iter()
                .any(|tokens| matcher.occurs_in(t, tokens));
            if !fires {
                findings.push(Finding::DeadTrigger {
                    phrase: t.phrase_text(),
                    category: t.category,
                });
            }
        }
    }

    ValidationReport { findings }
}

/// The trigger files shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundledSet {
    En,
    DeBaseline,
    DeFixed,
}

pub const BUNDLED_VERSION: &str = "1";

impl BundledSet {
    pub fn name(self) -> &'static str {
        match self {
            BundledSet::En => "en",
            BundledSet::DeBaseline => "de_baseline",
            BundledSet::DeFixed => "de_fixed",
        }
    }

    pub fn language(self) -> &'static str {
        match self {
            BundledSet::En => "en",
            BundledSet::DeBaseline | BundledSet::DeFixed => "de",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            BundledSet::En => include_str!("../../triggers/en.tsv"),
            BundledSet::DeBaseline => include_str!("../../triggers/de_baseline.tsv"),
            BundledSet::DeFixed => include_str!("../../triggers/de_fixed.tsv"),
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            BundledSet::DeBaseline => Mode::Baseline,
            _ => Mode::Fixed,
        }
    }

    /// Bundled set for a language and mode. English has a single set.
    pub fn for_language(language: &str, mode: Mode) -> Option<BundledSet> {
        use crate::types::same_language;
        if same_language(language, "en") {
            Some(BundledSet::En)
        } else if same_language(language, "de") {
            Some(match mode {
                Mode::Baseline => BundledSet::DeBaseline,
                Mode::Fixed => BundledSet::DeFixed,
            })
        } else {
            None
        }
    }

    pub fn load(self) -> TriggerSet {
        let policy = policy_for(self.language(), self.mode());
        load_trigger_set(self.source().as_bytes(), self.language(), policy)
            .expect("bundled trigger files are well-formed")
    }
}

/// Normalization used for a language in a given mode. German baseline keeps
/// umlauts as written, so `aufgelöst` in text never meets `aufgeloest` in the
/// list.
pub fn policy_for(language: &str, mode: Mode) -> NormalizationPolicy {
    let german = crate::types::same_language(language, "de");
    NormalizationPolicy {
        fold_case: true,
        fold_umlauts: german && mode == Mode::Fixed,
        unicode_compose: !(german && mode == Mode::Baseline),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Span;

    fn de_policy() -> NormalizationPolicy {
        policy_for("de", Mode::Fixed)
    }

    fn load(src: &str) -> Result<TriggerSet, TriggerError> {
        load_trigger_set(src.as_bytes(), "de", de_policy())
    }

    #[test]
    fn loads_single_trigger() {
        let set = load("verneint\tPreNegation\n").unwrap();
        assert_eq!(set.len(), 1);
        let t = &set.triggers()[0];
        assert_eq!(t.phrase, ["verneint"]);
        assert_eq!(t.category, TriggerCategory::PreNegation);
        assert!(!t.order_insensitive);
    }

    #[test]
    fn empty_stream_gives_empty_set() {
        let set = load("").unwrap();
        assert!(set.is_empty());
        assert!(set.warnings().is_empty());
    }

    #[test]
    fn duplicates_collapse_with_warning() {
        let set = load("kein\tPreNegation\nkein\tPreNegation\n").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.warnings().len(), 1);
        assert_eq!(set.warnings()[0].line, 2);
    }

    #[test]
    fn phrases_are_normalized_on_load() {
        let set = load("Aufgelöst\tPostNegation\n").unwrap();
        assert_eq!(set.triggers()[0].phrase, ["aufgeloest"]);
        assert_eq!(set.triggers()[0].raw, "Aufgelöst");
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let err = load("# c\n\nkein\tPreNegated\n").unwrap_err();
        assert!(matches!(err, TriggerError::Format { line: 3, .. }), "{err}");
        let err = load(" \tPreNegation\n").unwrap_err();
        assert!(matches!(err, TriggerError::Format { line: 1, .. }));
        let err = load("...\tPreNegation\n").unwrap_err();
        assert!(err.to_string().contains("empty phrase"));
        let err = load("frei von\tNegationSuffix\n").unwrap_err();
        assert!(err.to_string().contains("single token"));
        let err = load("kein\tPreNegation\torder_insensitive\n").unwrap_err();
        assert!(err.to_string().contains("two tokens"));
        let err = load("kein\tPreNegation\tsometimes\n").unwrap_err();
        assert!(err.to_string().contains("unknown option"));
    }

    #[test]
    fn loading_is_stable() {
        let src = BundledSet::DeFixed.source();
        assert_eq!(load(src).unwrap(), load(src).unwrap());
    }

    #[test]
    fn bundled_sets_load_and_validate_clean() {
        for b in [BundledSet::En, BundledSet::DeBaseline, BundledSet::DeFixed] {
            let set = b.load();
            assert!(!set.is_empty(), "{}", b.name());
            assert!(
                set.warnings().is_empty(),
                "{}: {:?}",
                b.name(),
                set.warnings()
            );
            let report = validate_trigger_set(&set, None);
            assert!(report.is_empty(), "{}: {:?}", b.name(), report);
        }
    }

    #[test]
    fn baseline_lacks_documented_fixes() {
        let base = BundledSet::DeBaseline.load();
        assert!(!base
            .triggers()
            .iter()
            .any(|t| t.raw.starts_with("verleugn")));
        assert!(!base.triggers().iter().any(|t| t.order_insensitive));
        assert!(!base
            .triggers()
            .iter()
            .any(|t| t.category == TriggerCategory::NegationSuffix));
        let fixed = BundledSet::DeFixed.load();
        assert!(fixed.triggers().iter().any(|t| t.raw == "verleugnet"));
        assert!(fixed
            .triggers()
            .iter()
            .any(|t| t.raw == "frei" && t.category == TriggerCategory::NegationSuffix));
    }

    #[test]
    fn validation_flags_raw_umlauts_under_folding() {
        let set = load("aufgelöst\tPostNegation\n").unwrap();
        let report = validate_trigger_set(&set, None);
        assert_eq!(
            report.findings,
            [Finding::EncodingInconsistent {
                phrase: "aufgelöst".into(),
                normalized: "aufgeloest".into()
            }]
        );
        assert!(report.has_encoding_issues());
    }

    #[test]
    fn validation_of_empty_set_is_empty() {
        assert!(validate_trigger_set(&TriggerSet::new("de", de_policy()), None).is_empty());
    }

    #[test]
    fn validation_flags_category_conflicts() {
        let set = load(
            "kein\tPreNegation\nkein\tPseudoNegation\nnicht\tPreNegation\nnicht\tPostNegation\n",
        )
        .unwrap();
        let report = validate_trigger_set(&set, None);
        assert_eq!(
            report.findings,
            [Finding::CategoryConflict {
                phrase: "kein".into(),
                categories: vec![
                    TriggerCategory::PreNegation,
                    TriggerCategory::PseudoNegation
                ],
            }]
        );
        assert!(!report.has_encoding_issues());
    }

    #[test]
    fn validation_finds_dead_triggers() {
        let set =
            load("verneint\tPreNegation\nverleugnet\tPreNegation\nfrei\tNegationSuffix\n").unwrap();
        let corpus = vec![
            AnnotatedSentence::new(
                "1",
                "Patient verneint Kopfschmerzen.",
                Span::new(17, 30),
                "de",
            )
            .unwrap(),
            AnnotatedSentence::new("2", "Sie war schmerzfrei.", Span::new(8, 19), "de").unwrap(),
        ];
        let report = validate_trigger_set(&set, Some(&corpus));
        assert_eq!(
            report.findings,
            [Finding::DeadTrigger {
                phrase: "verleugnet".into(),
                category: TriggerCategory::PreNegation
            }]
        );
    }

    #[test]
    fn encoding_flag_iff_normalization_changes_phrase() {
        for raw in ["aufgeloest", "aufgelöst", "Kein", "ß", "nicht nur"] {
            let set = load(&format!("{raw}\tPreNegation\n")).unwrap();
            let changed = normalize(raw, de_policy()).text != raw;
            assert_eq!(
                validate_trigger_set(&set, None).has_encoding_issues(),
                changed,
                "{raw}"
            );
        }
    }
}
