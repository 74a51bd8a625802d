//! Detection/correction counting and corpus-level scoring.
//!
//! Each aligned record contributes to a [`CountTable`] according to one truth
//! table. Writing `o`, `p`, `e` for the original, predicted and expected
//! tokens (any of which may be absent, and absent compares like an ordinary
//! value: absent = absent, absent ≠ present):
//!
//! - a hallucinated record counts as detection FP and correction FP;
//! - otherwise, with `error = (o ≠ e)` and `flagged = (p ≠ o)`:
//!   detection TP if `error ∧ flagged`, FP if `¬error ∧ flagged`,
//!   FN if `error ∧ ¬flagged`, TN otherwise; correction TP if
//!   `error ∧ p = e`, FP if `flagged ∧ p ≠ e`, FN if `error ∧ p ≠ e`.
//!
//! A wrong fix of a real error is thus detection TP but correction FP and FN
//! at once, which keeps detection scores at or above correction scores.
//!
//! Counts micro-aggregate: tables from any partition of a corpus sum to the
//! table of the whole corpus, and scores are computed once from the sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{triple_align, EvalTriple, TripleRecord};
use crate::error::{Error, Result};
use crate::textnorm::{tokenize, NormConfig};

/// Detection and correction tallies over aligned records.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub det_tp: u64,
    pub det_fp: u64,
    pub det_fn: u64,
    pub det_tn: u64,
    pub cor_tp: u64,
    pub cor_fp: u64,
    pub cor_fn: u64,
}

impl CountTable {
    /// Adds another table into this one. Merging is associative and
    /// commutative, so corpora may be tallied in any partition order.
    pub fn merge(&mut self, other: &CountTable) {
        self.det_tp += other.det_tp;
        self.det_fp += other.det_fp;
        self.det_fn += other.det_fn;
        self.det_tn += other.det_tn;
        self.cor_tp += other.cor_tp;
        self.cor_fp += other.cor_fp;
        self.cor_fn += other.cor_fn;
    }
}

impl std::ops::Add for CountTable {
    type Output = CountTable;

    fn add(mut self, rhs: CountTable) -> CountTable {
        self.merge(&rhs);
        self
    }
}

/// Precision, recall and F-scores for one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(rename = "f0.5")]
    pub f0_5: f64,
}

/// An input problem tied to one line of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Corpus-level evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub detection: Scores,
    pub correction: Scores,
    pub counts: CountTable,
    pub n_sentences: u64,
    pub n_hallucinated: u64,
    #[serde(default)]
    pub errors: Vec<LineError>,
}

/// The F-measure with precision weighted by `beta`.
///
/// Returns 0.0 when precision and recall are both zero; `beta` must be
/// positive.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if precision == 0.0 && recall == 0.0 {
        return Ok(0.0);
    }
    let b2 = beta * beta;
    Ok((1.0 + b2) * precision * recall / (b2 * precision + recall))
}

/// Precision and recall with the zero-denominator convention: both are 1.0
/// on an empty table (nothing to find, nothing found), and a metric whose
/// own denominator alone is empty is 0.0.
fn precision_recall(tp: u64, fp: u64, fn_: u64) -> (f64, f64) {
    let p_den = tp + fp;
    let r_den = tp + fn_;
    let precision = if p_den > 0 {
        tp as f64 / p_den as f64
    } else if r_den == 0 {
        1.0
    } else {
        0.0
    };
    let recall = if r_den > 0 {
        tp as f64 / r_den as f64
    } else if p_den == 0 {
        1.0
    } else {
        0.0
    };
    (precision, recall)
}

fn scores(tp: u64, fp: u64, fn_: u64) -> Scores {
    let (precision, recall) = precision_recall(tp, fp, fn_);
    Scores {
        precision,
        recall,
        f1: f_beta(precision, recall, 1.0).expect("beta is positive"),
        f0_5: f_beta(precision, recall, 0.5).expect("beta is positive"),
    }
}

impl MetricReport {
    /// Computes all scores once from micro-aggregated counts.
    pub fn from_counts(
        counts: CountTable,
        n_sentences: u64,
        n_hallucinated: u64,
        errors: Vec<LineError>,
    ) -> Self {
        MetricReport {
            detection: scores(counts.det_tp, counts.det_fp, counts.det_fn),
            correction: scores(counts.cor_tp, counts.cor_fp, counts.cor_fn),
            counts,
            n_sentences,
            n_hallucinated,
            errors,
        }
    }
}

/// The record truth table. Absent tokens take part in the comparisons like
/// ordinary values, so a word the system deleted counts as flagged and, when
/// the reference kept the word, as a wrong correction.
fn tally(original: Option<&str>, predicted: Option<&str>, expected: Option<&str>) -> CountTable {
    let mut counts = CountTable::default();
    let error = original != expected;
    let flagged = predicted != original;
    match (error, flagged) {
        (true, true) => counts.det_tp += 1,
        (false, true) => counts.det_fp += 1,
        (true, false) => counts.det_fn += 1,
        (false, false) => counts.det_tn += 1,
    }
    if error && predicted == expected {
        counts.cor_tp += 1;
    }
    if flagged && predicted != expected {
        counts.cor_fp += 1;
    }
    if error && predicted != expected {
        counts.cor_fn += 1;
    }
    counts
}

fn tally_hallucinated() -> CountTable {
    CountTable {
        det_fp: 1,
        cor_fp: 1,
        ..CountTable::default()
    }
}

/// Contribution of a single aligned record to the corpus counts.
///
/// Fails when the record violates its structural invariants.
pub fn classify(record: &TripleRecord) -> Result<CountTable> {
    if record.original.is_none() && record.predicted.is_none() && record.expected.is_none() {
        return Err(Error::InvalidRecord("all three tokens absent".into()));
    }
    let is_extra_prediction =
        record.predicted.is_some() && record.original.is_none() && record.expected.is_none();
    if record.hallucinated != is_extra_prediction {
        return Err(Error::InvalidRecord(format!(
            "hallucinated={} does not match token pattern \
             (original={:?}, predicted={:?}, expected={:?})",
            record.hallucinated, record.original, record.predicted, record.expected
        )));
    }
    if record.hallucinated {
        Ok(tally_hallucinated())
    } else {
        Ok(tally(
            record.original.as_deref(),
            record.predicted.as_deref(),
            record.expected.as_deref(),
        ))
    }
}

/// Which comparison strategy a corpus evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Three-way alignment with hallucination handling.
    Aligned,
    /// Position-by-position comparison without any alignment.
    Legacy,
}

fn eval_one(
    triple: &EvalTriple,
    cfg: &NormConfig,
    mode: EvalMode,
) -> std::result::Result<(CountTable, u64), String> {
    let expected = tokenize(&triple.expected, cfg);
    if expected.tokens.is_empty() {
        return Err("empty expected sentence".to_string());
    }
    match mode {
        EvalMode::Aligned => {
            let ta = triple_align(triple, cfg);
            let mut counts = CountTable::default();
            let mut hallucinated = 0u64;
            for record in &ta.records {
                counts.merge(&classify(record).map_err(|e| e.to_string())?);
                if record.hallucinated {
                    hallucinated += 1;
                }
            }
            Ok((counts, hallucinated))
        }
        EvalMode::Legacy => {
            let original = tokenize(&triple.original, cfg);
            let predicted = tokenize(&triple.predicted, cfg);
            let len = original
                .tokens
                .len()
                .max(predicted.tokens.len())
                .max(expected.tokens.len());
            let mut counts = CountTable::default();
            for i in 0..len {
                counts.merge(&tally(
                    original.tokens.get(i).map(String::as_str),
                    predicted.tokens.get(i).map(String::as_str),
                    expected.tokens.get(i).map(String::as_str),
                ));
            }
            Ok((counts, 0))
        }
    }
}

/// Evaluates triples that carry their own input line numbers.
///
/// Triples with an empty expected sentence (or an internally inconsistent
/// alignment) are skipped and reported in the result's error list; the rest
/// are micro-aggregated into one report. Work fans out across threads; the
/// aggregate is order-independent.
pub fn evaluate_indexed(
    triples: &[(usize, EvalTriple)],
    cfg: &NormConfig,
    mode: EvalMode,
) -> MetricReport {
    let (counts, hallucinated, sentences, mut errors) = triples
        .par_iter()
        .map(|(line, triple)| match eval_one(triple, cfg, mode) {
            Ok((counts, hallucinated)) => (counts, hallucinated, 1u64, Vec::new()),
            Err(message) => (
                CountTable::default(),
                0,
                0,
                vec![LineError {
                    line: *line,
                    message,
                }],
            ),
        })
        .reduce(
            || (CountTable::default(), 0, 0, Vec::new()),
            |mut acc, item| {
                acc.0.merge(&item.0);
                acc.1 += item.1;
                acc.2 += item.2;
                acc.3.extend(item.3);
                acc
            },
        );
    errors.sort_by_key(|e| e.line);
    MetricReport::from_counts(counts, sentences, hallucinated, errors)
}

/// Evaluates a corpus with three-way alignment and hallucination handling.
pub fn evaluate_corpus(triples: &[EvalTriple], cfg: &NormConfig) -> MetricReport {
    let indexed: Vec<(usize, EvalTriple)> = triples
        .iter()
        .enumerate()
        .map(|(i, t)| (i + 1, t.clone()))
        .collect();
    evaluate_indexed(&indexed, cfg, EvalMode::Aligned)
}

/// Evaluates a corpus with the positional baseline: position `i` of the
/// predicted sentence is compared against position `i` of the original and
/// expected sentences, with length overhangs counted as mismatches. One
/// early insertion therefore throws off every later position. Provided as a
/// contrast to [`evaluate_corpus`]; the two agree exactly on corpora whose
/// alignments contain no inserts or deletes.
pub fn legacy_evaluate(triples: &[EvalTriple], cfg: &NormConfig) -> MetricReport {
    let indexed: Vec<(usize, EvalTriple)> = triples
        .iter()
        .enumerate()
        .map(|(i, t)| (i + 1, t.clone()))
        .collect();
    evaluate_indexed(&indexed, cfg, EvalMode::Legacy)
}
