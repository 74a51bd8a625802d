//! Alignment-based evaluation and synthetic noise injection for
//! spell-correction systems.
//!
//! Generative correctors sometimes hallucinate: they emit words present in
//! neither the input nor the reference, which shifts every later word and
//! wrecks position-based scoring. This crate evaluates
//! (original, predicted, expected) sentence triples by aligning the original
//! and the predicted sentence against the expected one at the word level,
//! flagging hallucinated words as false positives, and comparing the
//! remaining word pairs grapheme by grapheme. Detection is scored with F1
//! and correction with F0.5 from micro-aggregated counts; a positional
//! legacy evaluator is included as a contrast baseline.
//!
//! The corpus side estimates a spelling-error distribution (substitutions,
//! insertions, deletions, transpositions plus a character confusion table)
//! from a noisy/clean parallel corpus and injects errors into clean text at
//! a seeded, reproducible pass-through rate, with a character-level error
//! percentage measure to characterize the result.
//!
//! Text handling is grapheme-cluster aware, with configurable zero-width
//! joiner policies so conjunct-forming scripts such as Sinhala keep their
//! user-perceived characters as single edit units.

pub mod align;
pub mod cli;
pub mod error;
pub mod inject;
pub mod metrics;
pub mod textnorm;

pub use align::{
    grapheme_align, grapheme_distance, triple_align, word_align, AlignOp, Alignment, EvalTriple,
    TripleAlignment, TripleRecord,
};
pub use error::{Error, Result};
pub use inject::{
    count_errors, estimate_error_model, inject_errors, inject_errors_from,
    measure_error_percentage, ErrorCounts, ErrorModel, InjectionConfig, ModelEstimator,
    Proportions,
};
pub use metrics::{
    classify, evaluate_corpus, evaluate_indexed, f_beta, legacy_evaluate, CountTable, EvalMode,
    LineError, MetricReport, Scores,
};
pub use textnorm::{graphemes, normalize, tokenize, NormConfig, TokenizedSentence, ZwjPolicy};
