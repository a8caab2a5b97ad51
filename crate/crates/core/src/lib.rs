//! Clinical factuality toolkit.
//!
//! * [`engine`]: NegEx-style affirmed/negated/possible classification with a
//!   baseline and a fixed German mode.
//! * [`triggers`]: trigger-set files, validation and the phrase matcher.
//! * [`projection`]: carrying entity markup through machine translation and
//!   discarding defective output.
//! * [`adapters`]: importers for assertion corpora and tabular exports.
//! * [`eval`]: confusion matrices and per-label precision/recall/F1.
//! * [`cli`]: the `medfact` command line.

pub mod adapters;
pub mod cli;
pub mod engine;
pub mod eval;
pub mod markup;
pub mod normalize;
pub mod projection;
pub mod tokenize;
pub mod triggers;
pub mod types;

pub use engine::{classify, Detection, Detector, EngineConfig, Mode};
pub use markup::{parse_tagged, render_tagged};
pub use normalize::{normalize, NormalizationPolicy, NormalizedText};
pub use triggers::{TriggerMatcher, TriggerSet};
pub use types::{AnnotatedSentence, CorpusRecord, FactualityLabel, Span};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/triggers.md")]
    mod triggers {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/adapters.md")]
    mod adapters {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
