//! NegEx-style factuality classifier.
//!
//! A sentence is tokenized under the trigger set's normalization policy,
//! trigger phrases are matched longest-first, each pre/post trigger governs a
//! window of tokens, and the entity takes the label of the cue whose scope
//! covers it. German compounds such as `schmerzfrei` are handled by suffix
//! triggers that match inside the entity token.

mod scope;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{tokenize, Token};
use crate::triggers::{
    suffix_stem, BundledSet, Trigger, TriggerCategory, TriggerMatch, TriggerMatcher,
};
use crate::types::{
    same_language, AnnotatedSentence, CorpusRecord, FactualityLabel, Span, SpanError,
};

pub use scope::resolve_scope;

/// Selects the German trigger variant and the engine flags together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Behaves like the translated German list: no entity-internal cues, no
    /// compound suffixes.
    Baseline,
    Fixed,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "fixed" => Ok(Mode::Fixed),
            other => Err(format!(
                "unknown mode {other:?} (expected baseline or fixed)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Fixed => "fixed",
        })
    }
}

/// How to decide when both a negation and a possible cue cover the entity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precedence {
    /// The cue with the smaller token distance to the entity wins; equal
    /// distance goes to Possible.
    #[default]
    NearestTrigger,
    PossibleOverNegated,
}

impl FromStr for Precedence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" | "nearest-trigger" => Ok(Precedence::NearestTrigger),
            "possible" | "possible-over-negated" => Ok(Precedence::PossibleOverNegated),
            other => Err(format!("unknown precedence {other:?}")),
        }
    }
}

pub const DEFAULT_SCOPE_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EngineConfig {
    /// Tokens a pre/post trigger governs; at least 1.
    pub scope_window: usize,
    /// Keep triggers that lie entirely inside the entity span.
    pub entity_internal_triggers: bool,
    pub compound_suffix_negation: bool,
    pub precedence: Precedence,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::for_mode(Mode::Baseline)
    }
}

impl EngineConfig {
    pub fn for_mode(mode: Mode) -> Self {
        let fixed = mode == Mode::Fixed;
        EngineConfig {
            scope_window: DEFAULT_SCOPE_WINDOW,
            entity_internal_triggers: fixed,
            compound_suffix_negation: fixed,
            precedence: Precedence::NearestTrigger,
        }
    }

    pub fn with_scope_window(mut self, window: usize) -> Self {
        self.scope_window = window.max(1);
        self
    }
}

/// A trigger occurrence in source coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedTrigger {
    pub trigger: Trigger,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub label: FactualityLabel,
    pub trigger: Option<MatchedTrigger>,
    /// Source span the trigger governs.
    pub scope: Option<Span>,
    pub mode_notes: Vec<String>,
}

impl Detection {
    fn affirmed() -> Self {
        Detection {
            label: FactualityLabel::Affirmed,
            trigger: None,
            scope: None,
            mode_notes: Vec::new(),
        }
    }

    pub fn to_record(&self, id: &str) -> DetectionRecord {
        DetectionRecord {
            id: id.to_string(),
            label: self.label,
            trigger: self.trigger.as_ref().map(|t| t.trigger.phrase_text()),
            scope: self.scope.map(|s| [s.start, s.end]),
        }
    }
}

/// One line of detection JSONL output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub id: String,
    pub label: FactualityLabel,
    pub trigger: Option<String>,
    pub scope: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error("sentence language {sentence:?} does not match trigger set language {triggers:?}")]
    LanguageMismatch { sentence: String, triggers: String },
}

/// Finds trigger matches in `tokens`. With `entity_internal_triggers` off,
/// matches lying entirely inside the entity are dropped.
pub fn match_triggers<'m>(
    tokens: &[Token],
    matcher: &'m TriggerMatcher,
    config: &EngineConfig,
) -> Vec<TriggerMatch<'m>> {
    let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    matcher
        .find(&texts)
        .into_iter()
        .filter(|m| {
            config.entity_internal_triggers
                || !tokens[m.start..m.end].iter().all(|t| t.inside_entity)
        })
        .collect()
}

struct Candidate<'m> {
    label: FactualityLabel,
    distance: usize,
    m: TriggerMatch<'m>,
    scope: Range<usize>,
}

/// Classifies the entity of `sentence`.
pub fn classify(
    sentence: &AnnotatedSentence,
    matcher: &TriggerMatcher,
    config: &EngineConfig,
) -> Result<Detection, EngineError> {
    if !same_language(&sentence.language, matcher.language()) {
        return Err(EngineError::LanguageMismatch {
            sentence: sentence.language.clone(),
            triggers: matcher.language().to_string(),
        });
    }

    let tokens = tokenize(&sentence.text, matcher.policy(), sentence.entity);
    let matches = match_triggers(&tokens, matcher, config);

    let mut negated: Option<Candidate<'_>> = None;
    let mut possible: Option<Candidate<'_>> = None;
    for m in &matches {
        let label = match m.category() {
            TriggerCategory::PreNegation | TriggerCategory::PostNegation => {
                FactualityLabel::Negated
            }
            TriggerCategory::PrePossible | TriggerCategory::PostPossible => {
                FactualityLabel::Possible
            }
            _ => continue,
        };
        let scope = resolve_scope(m, &matches, &tokens, config);
        let distance = scope
            .clone()
            .filter(|&t| tokens[t].inside_entity)
            .map(|t| {
                if m.category().is_pre() {
                    t + 1 - m.end
                } else {
                    m.start - t
                }
            })
            .min();
        let Some(distance) = distance else { continue };

        let slot = if label == FactualityLabel::Negated {
            &mut negated
        } else {
            &mut possible
        };
        let better = match slot {
            None => true,
            Some(c) => (distance, m.start) < (c.distance, c.m.start),
        };
        if better {
            *slot = Some(Candidate {
                label,
                distance,
                m: *m,
                scope,
            });
        }
    }

    let mut notes = Vec::new();
    let winner = match (negated, possible) {
        (Some(n), Some(p)) => {
            let pick_negated =
                config.precedence == Precedence::NearestTrigger && n.distance < p.distance;
            notes.push(format!(
                "negation and possible cues both in scope ({:?})",
                config.precedence
            ));
            Some(if pick_negated { n } else { p })
        }
        (n, p) => n.or(p),
    };

    if let Some(c) = winner {
        let span = token_span(&tokens, c.m.start..c.m.end);
        if tokens[c.m.start..c.m.end].iter().all(|t| t.inside_entity) {
            notes.push("entity-internal trigger".to_string());
        }
        return Ok(Detection {
            label: c.label,
            scope: (!c.scope.is_empty()).then(|| token_span(&tokens, c.scope.clone())),
            trigger: Some(MatchedTrigger {
                trigger: c.m.trigger.clone(),
                span,
            }),
            mode_notes: notes,
        });
    }

    if config.compound_suffix_negation {
        for tok in tokens.iter().filter(|t| t.inside_entity) {
            if let Some(suffix) = matcher
                .suffixes()
                .iter()
                .find(|s| suffix_stem(&tok.text, &s.phrase[0]).is_some())
            {
                return Ok(Detection {
                    label: FactualityLabel::Negated,
                    trigger: Some(MatchedTrigger {
                        trigger: suffix.clone(),
                        span: tok.source_span,
                    }),
                    scope: Some(tok.source_span),
                    mode_notes: vec!["compound-suffix match".to_string()],
                });
            }
        }
    }

    Ok(Detection::affirmed())
}

fn token_span(tokens: &[Token], range: Range<usize>) -> Span {
    Span::new(
        tokens[range.start].source_span.start,
        tokens[range.end - 1].source_span.end,
    )
}

/// Order-preserving [`classify`] over unvalidated corpus records. Invalid
/// spans and language mismatches come back as per-record errors.
pub fn classify_batch(
    records: Vec<CorpusRecord>,
    matcher: &TriggerMatcher,
    config: &EngineConfig,
) -> Vec<(String, Result<Detection, EngineError>)> {
    records
        .into_par_iter()
        .map(|r| {
            let id = r.id.clone();
            let result = AnnotatedSentence::try_from(r)
                .map_err(EngineError::from)
                .and_then(|s| classify(&s, matcher, config));
            (id, result)
        })
        .collect()
}

/// A compiled trigger set bundled with the engine flags it runs under.
#[derive(Debug, Clone)]
pub struct Detector {
    pub matcher: TriggerMatcher,
    pub config: EngineConfig,
}

impl Detector {
    pub fn new(matcher: TriggerMatcher, config: EngineConfig) -> Self {
        Detector { matcher, config }
    }

    /// Bundled trigger set and engine flags for `language` in `mode`.
    pub fn bundled(language: &str, mode: Mode) -> Option<Self> {
        let set = BundledSet::for_language(language, mode)?.load();
        Some(Detector::new(
            TriggerMatcher::compile(&set),
            EngineConfig::for_mode(mode),
        ))
    }

    pub fn classify(&self, sentence: &AnnotatedSentence) -> Result<Detection, EngineError> {
        classify(sentence, &self.matcher, &self.config)
    }
}
