use std::cmp::Ordering;
use std::collections::HashMap;

use super::{Trigger, TriggerCategory, TriggerSet};
use crate::normalize::NormalizationPolicy;

/// Extra tokens an order-insensitive phrase may span beyond its own length.
pub const DEFAULT_REORDER_SLACK: usize = 1;

/// Immutable longest-match-first phrase matcher over normalized tokens.
///
/// Suffix triggers are kept aside; they match inside single tokens and are
/// applied by the engine, not by [`TriggerMatcher::find`].
#[derive(Debug, Clone)]
pub struct TriggerMatcher {
    language: String,
    policy: NormalizationPolicy,
    phrases: Vec<Trigger>,
    suffixes: Vec<Trigger>,
    /// token -> indices of phrase triggers that may start a match with it
    starts: HashMap<String, Vec<usize>>,
    reorder_slack: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriggerMatch<'m> {
    pub trigger: &'m Trigger,
    /// Token range `[start, end)`.
    pub start: usize,
    pub end: usize,
}

impl TriggerMatch<'_> {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn category(&self) -> TriggerCategory {
        self.trigger.category
    }

    pub fn is_pseudo(&self) -> bool {
        self.trigger.category == TriggerCategory::PseudoNegation
    }
}

impl TriggerMatcher {
    pub fn compile(set: &TriggerSet) -> Self {
        Self::compile_with_slack(set, DEFAULT_REORDER_SLACK)
    }

    pub fn compile_with_slack(set: &TriggerSet, reorder_slack: usize) -> Self {
        let (suffixes, phrases): (Vec<Trigger>, Vec<Trigger>) = set
            .triggers()
            .iter()
            .cloned()
            .partition(|t| t.category == TriggerCategory::NegationSuffix);

        let mut starts: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in phrases.iter().enumerate() {
            let heads: Vec<&String> = if t.order_insensitive {
                t.phrase.iter().collect()
            } else {
                vec![&t.phrase[0]]
            };
            for head in heads {
                let slot = starts.entry(head.clone()).or_default();
                if !slot.contains(&i) {
                    slot.push(i);
                }
            }
        }

        TriggerMatcher {
            language: set.language.clone(),
            policy: set.policy,
            phrases,
            suffixes,
            starts,
            reorder_slack,
        }
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn policy(&self) -> NormalizationPolicy {
        self.policy
    }

    pub fn reorder_slack(&self) -> usize {
        self.reorder_slack
    }

    pub fn suffixes(&self) -> &[Trigger] {
        &self.suffixes
    }

    pub fn phrase_triggers(&self) -> &[Trigger] {
        &self.phrases
    }

    /// Non-overlapping matches, scanning left to right and taking the best
    /// candidate at each position: longest first, then pseudo-negations, then
    /// lexicographic phrase order.
    pub fn find<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TriggerMatch<'_>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let best = self
                .candidates_at(tokens, i)
                .into_iter()
                .min_by(|a, b| match_priority(a, b));
            match best {
                Some(m) => {
                    i = m.end;
                    out.push(m);
                }
                None => i += 1,
            }
        }
        out
    }

    fn candidates_at<S: AsRef<str>>(&self, tokens: &[S], i: usize) -> Vec<TriggerMatch<'_>> {
        let Some(idxs) = self.starts.get(tokens[i].as_ref()) else {
            return Vec::new();
        };
        idxs.iter()
            .filter_map(|&ti| {
                let t = &self.phrases[ti];
                self.match_len(t, tokens, i).map(|len| TriggerMatch {
                    trigger: t,
                    start: i,
                    end: i + len,
                })
            })
            .collect()
    }

    /// Shortest match length of `t` starting at token `i`, if any.
    fn match_len<S: AsRef<str>>(&self, t: &Trigger, tokens: &[S], i: usize) -> Option<usize> {
        let k = t.phrase.len();
        if !t.order_insensitive {
            let window = tokens.get(i..i + k)?;
            return window
                .iter()
                .zip(&t.phrase)
                .all(|(a, b)| a.as_ref() == b)
                .then_some(k);
        }
        (k..=k + self.reorder_slack)
            .take_while(|&len| i + len <= tokens.len())
            .find(|&len| reordered_fit(&t.phrase, &tokens[i..i + len]))
    }

    /// Whether `t` matches anywhere in `tokens`, independent of greedy
    /// selection. Suffix triggers are tested against token endings.
    pub fn occurs_in<S: AsRef<str>>(&self, t: &Trigger, tokens: &[S]) -> bool {
        if t.category == TriggerCategory::NegationSuffix {
            return tokens
                .iter()
                .any(|tok| suffix_stem(tok.as_ref(), &t.phrase[0]).is_some());
        }
        (0..tokens.len()).any(|i| self.match_len(t, tokens, i).is_some())
    }
}

/// The window must start and end with phrase tokens and, after removing
/// `window.len() - phrase.len()` interior tokens, be a permutation of the
/// phrase.
fn reordered_fit<S: AsRef<str>>(phrase: &[String], window: &[S]) -> bool {
    if window.len() < phrase.len() || window.len() < 2 {
        return false;
    }
    let mut need: HashMap<&str, isize> = HashMap::new();
    for p in phrase {
        *need.entry(p.as_str()).or_default() += 1;
    }
    for end in [window[0].as_ref(), window[window.len() - 1].as_ref()] {
        match need.get_mut(end) {
            Some(n) if *n > 0 => *n -= 1,
            _ => return false,
        }
    }
    for tok in &window[1..window.len() - 1] {
        if let Some(n) = need.get_mut(tok.as_ref()) {
            *n -= 1;
        }
    }
    need.values().all(|&n| n <= 0)
}

/// Remaining stem when `token` ends with `suffix` and the stem keeps at least
/// three characters.
pub(crate) fn suffix_stem<'a>(token: &'a str, suffix: &str) -> Option<&'a str> {
    let stem = token.strip_suffix(suffix)?;
    (stem.chars().count() >= 3).then_some(stem)
}

/// Ordering used to break ties between candidates at one position;
/// `Less` means preferred.
pub(crate) fn match_priority(a: &TriggerMatch<'_>, b: &TriggerMatch<'_>) -> Ordering {
    b.len()
        .cmp(&a.len())
        .then_with(|| b.is_pseudo().cmp(&a.is_pseudo()))
        .then_with(|| a.trigger.phrase.cmp(&b.trigger.phrase))
        .then_with(|| a.trigger.category.cmp(&b.trigger.category))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Mode;
    use crate::triggers::{load_trigger_set, policy_for};

    fn set(lines: &str) -> TriggerSet {
        load_trigger_set(lines.as_bytes(), "en", policy_for("en", Mode::Fixed)).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn summary(m: &[TriggerMatch<'_>]) -> Vec<(String, usize, usize)> {
        m.iter()
            .map(|m| (m.trigger.phrase_text(), m.start, m.end))
            .collect()
    }

    #[test]
    fn prefers_longest_phrase() {
        let s = set("ruled out\tPostNegation\nruled out for\tPreNegation\n");
        let m = TriggerMatcher::compile(&s);
        let found = m.find(&toks("he ruled out for mi"));
        assert_eq!(summary(&found), [("ruled out for".into(), 1, 4)]);
    }

    #[test]
    fn empty_set_matches_nothing() {
        let m = TriggerMatcher::compile(&set(""));
        assert!(m.find(&toks("no pain at all")).is_empty());
    }

    #[test]
    fn order_insensitive_matches_both_orders() {
        let s = load_trigger_set(
            "wurde ausgeschlossen\tPostNegation\torder_insensitive\n".as_bytes(),
            "de",
            policy_for("de", Mode::Fixed),
        )
        .unwrap();
        let m = TriggerMatcher::compile(&s);
        assert_eq!(
            summary(&m.find(&toks("infarkt wurde ausgeschlossen"))),
            [("wurde ausgeschlossen".into(), 1, 3)]
        );
        assert_eq!(
            summary(&m.find(&toks("infarkt ausgeschlossen wurde"))),
            [("wurde ausgeschlossen".into(), 1, 3)]
        );
        // one interleaved token fits the window, two do not
        assert_eq!(
            summary(&m.find(&toks("ausgeschlossen werden wurde"))),
            [("wurde ausgeschlossen".into(), 0, 3)]
        );
        assert!(m
            .find(&toks("ausgeschlossen werden konnte wurde"))
            .is_empty());
    }

    #[test]
    fn pseudo_wins_length_ties() {
        let s = set("no change\tPreNegation\nno change\tPseudoNegation\n");
        let m = TriggerMatcher::compile(&s);
        let found = m.find(&toks("no change in pain"));
        assert_eq!(found.len(), 1);
        assert!(found[0].is_pseudo());
    }

    #[test]
    fn suffixes_are_not_phrase_matches() {
        let s = load_trigger_set(
            "frei\tNegationSuffix\n".as_bytes(),
            "de",
            policy_for("de", Mode::Fixed),
        )
        .unwrap();
        let m = TriggerMatcher::compile(&s);
        assert!(m.find(&toks("frei schmerzfrei")).is_empty());
        assert_eq!(m.suffixes().len(), 1);
        assert!(m.occurs_in(&m.suffixes()[0], &toks("sie war schmerzfrei")));
        assert!(!m.occurs_in(&m.suffixes()[0], &toks("frei")));
    }

    #[test]
    fn stem_length_rule() {
        assert_eq!(suffix_stem("schmerzfrei", "frei"), Some("schmerz"));
        assert_eq!(suffix_stem("abfrei", "frei"), None);
        assert_eq!(suffix_stem("frei", "frei"), None);
        assert_eq!(suffix_stem("fieberlos", "los"), Some("fieber"));
    }
}
