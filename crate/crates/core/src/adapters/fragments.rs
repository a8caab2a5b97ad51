use thiserror::Error;

use crate::types::Span;

pub const DEFAULT_MAX_GAP: usize = 50;

/// An entity annotated as several pieces of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentedEntity {
    fragments: Vec<Span>,
    pub max_gap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("entity has no fragments")]
    Empty,
    #[error("fragment {0} is empty")]
    EmptyFragment(Span),
    #[error("fragments {0} and {1} overlap")]
    Overlap(Span, Span),
}

/// Some gap between consecutive fragments exceeds `max_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("fragment gap of {gap} code points exceeds {max_gap}")]
pub struct Unmergeable {
    pub gap: usize,
    pub max_gap: usize,
}

impl FragmentedEntity {
    /// Sorts the fragments and rejects empty or overlapping ones.
    pub fn new(mut fragments: Vec<Span>, max_gap: usize) -> Result<Self, FragmentError> {
        if fragments.is_empty() {
            return Err(FragmentError::Empty);
        }
        if let Some(f) = fragments.iter().find(|f| f.is_empty()) {
            return Err(FragmentError::EmptyFragment(*f));
        }
        fragments.sort_by_key(|f| (f.start, f.end));
        for w in fragments.windows(2) {
            if w[0].end > w[1].start {
                return Err(FragmentError::Overlap(w[0], w[1]));
            }
        }
        Ok(FragmentedEntity { fragments, max_gap })
    }

    pub fn fragments(&self) -> &[Span] {
        &self.fragments
    }

    /// Code points between consecutive fragments.
    pub fn gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.fragments.windows(2).map(|w| w[1].start - w[0].end)
    }
}

/// The hull `[first.start, last.end)` if no gap exceeds `max_gap`.
pub fn merge_fragments(entity: &FragmentedEntity) -> Result<Span, Unmergeable> {
    if let Some(gap) = entity.gaps().max().filter(|&g| g > entity.max_gap) {
        return Err(Unmergeable {
            gap,
            max_gap: entity.max_gap,
        });
    }
    let first = entity.fragments[0];
    let last = entity.fragments[entity.fragments.len() - 1];
    Ok(Span::new(first.start, last.end))
}
