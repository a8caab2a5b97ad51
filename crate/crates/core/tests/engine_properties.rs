mod support;

use medfact::engine::{EngineConfig, Precedence};
use medfact::triggers::{
    policy_for, BundledSet, TriggerCategory, TriggerSet, DEFAULT_REORDER_SLACK,
};
use medfact::{
    classify, parse_tagged, render_tagged, AnnotatedSentence, Detector, FactualityLabel, Mode,
    TriggerMatcher,
};
use proptest::prelude::*;
use support::*;

fn summary(m: &[medfact::triggers::TriggerMatch<'_>]) -> Vec<OracleMatch> {
    m.iter()
        .map(|m| OracleMatch {
            phrase: m.trigger.phrase.clone(),
            category: m.category(),
            start: m.start,
            end: m.end,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn matcher_agrees_with_brute_force(c in case()) {
        let set = c.trigger_set();
        let m = TriggerMatcher::compile(&set);
        prop_assert_eq!(summary(&m.find(&c.tokens)), oracle_find(set.triggers(), &c.tokens, DEFAULT_REORDER_SLACK));
    }

    #[test]
    fn matches_never_overlap(c in case()) {
        let m = TriggerMatcher::compile(&c.trigger_set());
        let found = m.find(&c.tokens);
        for w in found.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }

    #[test]
    fn classify_agrees_with_scope_oracle(c in case()) {
        let set = c.trigger_set();
        prop_assert_eq!(engine_classify(&c), oracle_classify(&c, set.triggers()));
    }

    #[test]
    fn scope_stays_inside_sentence_and_window(c in case()) {
        let matcher = TriggerMatcher::compile(&c.trigger_set());
        let s = c.sentence();
        let d = classify(&s, &matcher, &c.config()).unwrap();
        if let Some(scope) = d.scope {
            prop_assert!(scope.end <= medfact::types::char_len(&s.text));
            prop_assert!(scope.overlaps(&s.entity));
            let t = d.trigger.unwrap();
            prop_assert!(!scope.overlaps(&t.span));
        }
    }

    /// Without any cue phrase in the sentence the entity is affirmed, in both
    /// modes and under both precedence rules.
    #[test]
    fn no_trigger_means_affirmed(c in case(), fixed in any::<bool>()) {
        let mut c = c;
        for t in &mut c.triggers {
            for w in &mut t.0 {
                w.push('z');
            }
        }
        c.entity_internal = fixed;
        let mut config = c.config();
        config.compound_suffix_negation = fixed;
        let matcher = TriggerMatcher::compile(&c.trigger_set());
        let d = classify(&c.sentence(), &matcher, &config).unwrap();
        prop_assert_eq!(d.label, FactualityLabel::Affirmed);
        prop_assert!(d.trigger.is_none() && d.scope.is_none());
    }

    /// A pseudo-negation that extends a negation cue keeps the cue from
    /// firing.
    #[test]
    fn pseudo_negation_blocks_its_sub_phrase(
        cue in prop::collection::vec("[a-d]{2}", 1..=2),
        extra in "[a-d]{2}",
        filler in prop::collection::vec("[w-z]{3}", 0..=3),
        entity in prop::collection::vec("[w-z]{3}", 1..=2),
        pre in any::<bool>(),
    ) {
        let mut set = TriggerSet::new("en", policy_for("en", Mode::Fixed));
        let cue_text = cue.join(" ");
        let pseudo = if pre { format!("{cue_text} {extra}") } else { format!("{extra} {cue_text}") };
        set.insert(&cue_text, if pre { TriggerCategory::PreNegation } else { TriggerCategory::PostNegation }, false).unwrap();
        set.insert(&pseudo, TriggerCategory::PseudoNegation, false).unwrap();
        let ent = entity.join(" ");
        let tail = filler.join(" ");
        let text = if pre {
            format!("{pseudo} {tail} <E>{ent}</E>")
        } else {
            format!("<E>{ent}</E> {tail} {pseudo}")
        }
        .replace("  ", " ");
        let (plain, span) = parse_tagged(&text).unwrap();
        let s = AnnotatedSentence::new("p", plain, span, "en").unwrap();
        let d = classify(&s, &TriggerMatcher::compile(&set), &EngineConfig::for_mode(Mode::Fixed)).unwrap();
        prop_assert_eq!(d.label, FactualityLabel::Affirmed);
    }

    /// Case, umlaut spelling and Unicode composition do not change German
    /// fixed-mode results.
    #[test]
    fn german_fixed_mode_is_normalization_invariant(idx in 0usize..8, flips in prop::collection::vec(any::<bool>(), 200), decompose in any::<bool>()) {
        let sentences: Vec<AnnotatedSentence> = read_jsonl("engine/golden_de.jsonl")
            .into_iter()
            .chain(read_jsonl("engine/regressions_de.jsonl"))
            .collect();
        let s = &sentences[idx % sentences.len()];
        let tagged = render_tagged(s);
        let variant = vary(&tagged, &flips, decompose);
        let (plain, span) = parse_tagged(&variant).unwrap();
        let v = AnnotatedSentence::new("v", plain, span, "de").unwrap();

        let det = Detector::bundled("de", Mode::Fixed).unwrap();
        let a = det.classify(s).unwrap();
        let b = det.classify(&v).unwrap();
        prop_assert_eq!(a.label, b.label);
        prop_assert_eq!(a.trigger.map(|t| t.trigger.phrase_text()), b.trigger.map(|t| t.trigger.phrase_text()));
    }

    /// English results ignore letter case.
    #[test]
    fn english_is_case_insensitive(idx in 0usize..3, flips in prop::collection::vec(any::<bool>(), 200)) {
        let sentences = read_jsonl("engine/golden_en.jsonl");
        let s = &sentences[idx];
        let (plain, span) = parse_tagged(&vary(&render_tagged(s), &flips, false)).unwrap();
        let v = AnnotatedSentence::new("v", plain, span, "en").unwrap();
        let det = Detector::bundled("en", Mode::Fixed).unwrap();
        prop_assert_eq!(det.classify(s).unwrap().label, det.classify(&v).unwrap().label);
    }

    /// Possible-over-negated never yields Negated where nearest-trigger
    /// yields Possible.
    #[test]
    fn precedence_only_moves_toward_possible(c in case()) {
        let mut near = c.clone();
        near.precedence = Precedence::NearestTrigger;
        let mut poss = c;
        poss.precedence = Precedence::PossibleOverNegated;
        let (a, _) = engine_classify(&near);
        let (b, _) = engine_classify(&poss);
        prop_assert!(a == b || (a == FactualityLabel::Negated && b == FactualityLabel::Possible));
    }
}

/// Flips letter case per position, swaps umlauts for their two-letter
/// spelling on odd flips and optionally decomposes the rest. Tags are left
/// alone.
fn vary(tagged: &str, flips: &[bool], decompose: bool) -> String {
    let mut out = String::new();
    let mut rest = tagged;
    let mut i = 0;
    while !rest.is_empty() {
        if let Some(tag) = ["<E>", "</E>"].into_iter().find(|t| rest.starts_with(t)) {
            out.push_str(tag);
            rest = &rest[tag.len()..];
            continue;
        }
        let c = rest.chars().next().unwrap();
        rest = &rest[c.len_utf8()..];
        let flip = flips[i % flips.len()];
        i += 1;
        let spelled = match c {
            'ä' if flip => Some("ae"),
            'ö' if flip => Some("oe"),
            'ü' if flip => Some("ue"),
            'ä' if decompose => Some("a\u{308}"),
            'ö' if decompose => Some("o\u{308}"),
            'ü' if decompose => Some("u\u{308}"),
            'Ü' if decompose => Some("U\u{308}"),
            _ => None,
        };
        if let Some(s) = spelled {
            out.push_str(s);
            continue;
        }
        let swapped: Vec<char> = if c.is_lowercase() {
            c.to_uppercase().collect()
        } else {
            c.to_lowercase().collect()
        };
        if flip && swapped.len() == 1 {
            out.push(swapped[0]);
        } else {
            out.push(c);
        }
    }
    out
}

#[test]
fn bundled_sets_have_no_encoding_findings() {
    for set in [BundledSet::En, BundledSet::DeBaseline, BundledSet::DeFixed] {
        let report = medfact::triggers::validate_trigger_set(&set.load(), None);
        assert!(
            !report.has_encoding_issues(),
            "{}: {:?}",
            set.name(),
            report.findings
        );
    }
}
