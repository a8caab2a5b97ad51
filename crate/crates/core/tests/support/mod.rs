//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use medfact::engine::{EngineConfig, Precedence};
use medfact::triggers::{policy_for, Trigger, TriggerCategory, TriggerSet};
use medfact::{AnnotatedSentence, FactualityLabel, Mode, Span};
use proptest::prelude::*;

pub const VOCAB: [&str; 5] = ["ab", "cd", "ef", "gh", "ij"];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn read_jsonl(rel: &str) -> Vec<AnnotatedSentence> {
    let text = std::fs::read_to_string(fixture(rel)).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let r: medfact::CorpusRecord = serde_json::from_str(l).unwrap();
            AnnotatedSentence::try_from(r).unwrap()
        })
        .collect()
}

/// A generated trigger: phrase tokens, category, order-insensitivity.
pub type TriggerSpec = (Vec<String>, TriggerCategory, bool);

#[derive(Debug, Clone)]
pub struct Case {
    pub tokens: Vec<String>,
    /// Entity token range.
    pub entity: (usize, usize),
    pub triggers: Vec<TriggerSpec>,
    pub scope_window: usize,
    pub precedence: Precedence,
    pub entity_internal: bool,
}

impl Case {
    pub fn sentence(&self) -> AnnotatedSentence {
        let text = self.tokens.join(" ");
        let start: usize = self.tokens[..self.entity.0]
            .iter()
            .map(|t| t.len() + 1)
            .sum();
        let len: usize = self.tokens[self.entity.0..self.entity.1]
            .iter()
            .map(|t| t.len() + 1)
            .sum::<usize>()
            - 1;
        AnnotatedSentence::new("case", text, Span::new(start, start + len), "en").unwrap()
    }

    pub fn trigger_set(&self) -> TriggerSet {
        let mut set = TriggerSet::new("en", policy_for("en", Mode::Fixed));
        for (phrase, cat, oi) in &self.triggers {
            set.insert(&phrase.join(" "), *cat, *oi).unwrap();
        }
        set
    }

    pub fn config(&self) -> EngineConfig {
        EngineConfig {
            scope_window: self.scope_window,
            entity_internal_triggers: self.entity_internal,
            compound_suffix_negation: false,
            precedence: self.precedence,
        }
    }

    pub fn inside(&self, t: usize) -> bool {
        self.entity.0 <= t && t < self.entity.1
    }
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(VOCAB.to_vec()).prop_map(str::to_string)
}

pub fn phrase_category() -> impl Strategy<Value = TriggerCategory> {
    prop::sample::select(
        TriggerCategory::ALL
            .into_iter()
            .filter(|c| *c != TriggerCategory::NegationSuffix)
            .collect::<Vec<_>>(),
    )
}

pub fn trigger_spec() -> impl Strategy<Value = TriggerSpec> {
    (
        prop::collection::vec(word(), 1..=3),
        phrase_category(),
        any::<bool>(),
    )
        .prop_map(|(p, c, oi)| {
            let oi = oi && p.len() >= 2;
            (p, c, oi)
        })
}

/// Sentences of at most 12 tokens with at most 8 triggers over a small
/// vocabulary, so that matches, overlaps and ties are frequent.
pub fn case() -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(word(), 1..=12),
        prop::collection::vec(trigger_spec(), 0..=8),
        1usize..=6,
        prop::sample::select(vec![
            Precedence::NearestTrigger,
            Precedence::PossibleOverNegated,
        ]),
        any::<bool>(),
        any::<(usize, usize)>(),
    )
        .prop_map(
            |(tokens, triggers, scope_window, precedence, entity_internal, (a, b))| {
                let n = tokens.len();
                let start = a % n;
                let end = start + 1 + b % (n - start);
                Case {
                    tokens,
                    entity: (start, end),
                    triggers,
                    scope_window,
                    precedence,
                    entity_internal,
                }
            },
        )
}

/// An oracle match: phrase, category, token range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatch {
    pub phrase: Vec<String>,
    pub category: TriggerCategory,
    pub start: usize,
    pub end: usize,
}

fn sorted(v: &[String]) -> Vec<String> {
    let mut v = v.to_vec();
    v.sort();
    v
}

/// Every way to keep `k` positions of `0..len` that include both ends.
fn keep_sets(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << len) {
        if mask.count_ones() as usize == k && mask & 1 == 1 && mask >> (len - 1) & 1 == 1 {
            out.push((0..len).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

/// Length of the shortest window at `i` that `t` matches.
fn window_at(t: &Trigger, tokens: &[String], i: usize, slack: usize) -> Option<usize> {
    let k = t.phrase.len();
    if !t.order_insensitive {
        return (tokens.get(i..i + k)? == t.phrase.as_slice()).then_some(k);
    }
    let want = sorted(&t.phrase);
    (k..=k + slack)
        .filter(|len| i + len <= tokens.len())
        .find(|&len| {
            keep_sets(len, k).into_iter().any(|keep| {
                let picked: Vec<String> = keep.iter().map(|&j| tokens[i + j].clone()).collect();
                sorted(&picked) == want
            })
        })
}

/// Greedy left-to-right matching: at each position every trigger that fits
/// is a candidate; the longest wins, then pseudo-negations, then the
/// smaller phrase, then the smaller category.
pub fn oracle_find(triggers: &[Trigger], tokens: &[String], slack: usize) -> Vec<OracleMatch> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut cands: Vec<OracleMatch> = triggers
            .iter()
            .filter(|t| t.category != TriggerCategory::NegationSuffix)
            .filter_map(|t| {
                window_at(t, tokens, i, slack).map(|len| OracleMatch {
                    phrase: t.phrase.clone(),
                    category: t.category,
                    start: i,
                    end: i + len,
                })
            })
            .collect();
        cands.sort_by_key(|m| {
            (
                std::cmp::Reverse(m.end - m.start),
                m.category != TriggerCategory::PseudoNegation,
                m.phrase.clone(),
                m.category,
            )
        });
        match cands.into_iter().next() {
            Some(m) => {
                i = m.end;
                out.push(m);
            }
            None => i += 1,
        }
    }
    out
}

fn is_pre(c: TriggerCategory) -> bool {
    matches!(
        c,
        TriggerCategory::PreNegation | TriggerCategory::PrePossible
    )
}

fn is_post(c: TriggerCategory) -> bool {
    matches!(
        c,
        TriggerCategory::PostNegation | TriggerCategory::PostPossible
    )
}

/// Whether cue `m` governs token `t`, stated per token: within the window on
/// the cue's side, with no termination cue between the two.
pub fn covers(m: &OracleMatch, t: usize, matches: &[OracleMatch], window: usize) -> bool {
    let terms = || {
        matches
            .iter()
            .filter(|x| x.category == TriggerCategory::Termination)
    };
    if is_pre(m.category) {
        t >= m.end && t < m.end + window && !terms().any(|x| x.start >= m.end && x.start <= t)
    } else if is_post(m.category) {
        t < m.start && t + window >= m.start && !terms().any(|x| x.end > t && x.end <= m.start)
    } else {
        false
    }
}

/// Label and winning cue phrase for `case`.
pub fn oracle_classify(case: &Case, triggers: &[Trigger]) -> (FactualityLabel, Option<String>) {
    let window = case.scope_window.max(1);
    let matches: Vec<OracleMatch> = oracle_find(
        triggers,
        &case.tokens,
        medfact::triggers::DEFAULT_REORDER_SLACK,
    )
    .into_iter()
    .filter(|m| case.entity_internal || !(m.start..m.end).all(|t| case.inside(t)))
    .collect();

    // (distance, start, phrase) of the best cue per label
    let mut best: [Option<(usize, usize, String)>; 2] = [None, None];
    for m in &matches {
        let slot = match m.category {
            TriggerCategory::PreNegation | TriggerCategory::PostNegation => 0,
            TriggerCategory::PrePossible | TriggerCategory::PostPossible => 1,
            _ => continue,
        };
        let dist = (0..case.tokens.len())
            .filter(|&t| case.inside(t) && covers(m, t, &matches, window))
            .map(|t| {
                if is_pre(m.category) {
                    t + 1 - m.end
                } else {
                    m.start - t
                }
            })
            .min();
        if let Some(d) = dist {
            let cand = (d, m.start, m.phrase.join(" "));
            if best[slot]
                .as_ref()
                .is_none_or(|b| (cand.0, cand.1) < (b.0, b.1))
            {
                best[slot] = Some(cand);
            }
        }
    }
    match best {
        [None, None] => (FactualityLabel::Affirmed, None),
        [Some(n), None] => (FactualityLabel::Negated, Some(n.2)),
        [None, Some(p)] => (FactualityLabel::Possible, Some(p.2)),
        [Some(n), Some(p)] => {
            if case.precedence == Precedence::NearestTrigger && n.0 < p.0 {
                (FactualityLabel::Negated, Some(n.2))
            } else {
                (FactualityLabel::Possible, Some(p.2))
            }
        }
    }
}

/// Engine label and cue phrase for `case`.
pub fn engine_classify(case: &Case) -> (FactualityLabel, Option<String>) {
    let matcher = medfact::TriggerMatcher::compile(&case.trigger_set());
    let d = medfact::classify(&case.sentence(), &matcher, &case.config()).unwrap();
    (d.label, d.trigger.map(|t| t.trigger.phrase_text()))
}

/// Whether engine and oracle agree on `case`.
pub fn agrees(case: &Case) -> bool {
    let set = case.trigger_set();
    engine_classify(case) == oracle_classify(case, set.triggers())
}
