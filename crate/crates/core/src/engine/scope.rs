use std::ops::Range;

use super::EngineConfig;
use crate::tokenize::Token;
use crate::triggers::{TriggerCategory, TriggerMatch};

/// Token range governed by `m`.
///
/// Pre-triggers look forward from the token after the match, post-triggers
/// look backward from the token before it. Either direction stops after
/// `scope_window` tokens, at a termination match, or at the sentence edge.
/// Pseudo-negations and terminations govern nothing.
pub fn resolve_scope(
    m: &TriggerMatch<'_>,
    matches: &[TriggerMatch<'_>],
    tokens: &[Token],
    config: &EngineConfig,
) -> Range<usize> {
    let terminations = matches
        .iter()
        .filter(|t| t.category() == TriggerCategory::Termination);
    let window = config.scope_window.max(1);

    if m.category().is_pre() {
        let mut end = (m.end + window).min(tokens.len());
        if let Some(t) = terminations
            .filter(|t| t.start >= m.end)
            .map(|t| t.start)
            .min()
        {
            end = end.min(t);
        }
        m.end..end
    } else if m.category().is_post() {
        let mut start = m.start.saturating_sub(window);
        if let Some(t) = terminations
            .filter(|t| t.end <= m.start)
            .map(|t| t.end)
            .max()
        {
            start = start.max(t);
        }
        start..m.start
    } else {
        m.end..m.end
    }
}
