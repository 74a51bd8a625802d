//! Weighted edit-distance alignment at word and grapheme level, plus the
//! three-way pivot alignment that exposes hallucinated insertions.
//!
//! Word alignment is a minimum-cost monotone alignment in which substituting
//! token `x` for token `y` costs their normalized grapheme edit distance
//! `d(x, y) / max(|x|, |y|)` and inserting or deleting a token costs 1.
//! Similar words therefore pair up instead of dissolving into insert/delete
//! noise, which is what makes the paired words comparable character by
//! character afterwards. On cost ties the aligner prefers pairing two tokens
//! over a delete/insert pair, and then prefers consuming the first sequence,
//! so results are deterministic.
//!
//! A triple is aligned by pivoting on the expected sentence: the original and
//! the predicted sentences are each aligned against it, and the two pairwise
//! alignments are joined per expected position. Predicted tokens left without
//! an expected counterpart are hallucinations; they become their own records,
//! placed between the pivot records that bracket them.

use serde::{Deserialize, Serialize};

use crate::textnorm::{graphemes, tokenize, NormConfig};

/// Cost of inserting or deleting one element.
const INDEL_COST: f64 = 1.0;

/// One step of a pairwise alignment.
#[derive(Debug, Clone, PartialEq)]
pub enum AlignOp {
    /// Equal elements paired at zero cost.
    Match { a: usize, b: usize },
    /// Differing elements paired at the given cost.
    Substitute { a: usize, b: usize, cost: f64 },
    /// Element present only in the second sequence.
    InsertB { b: usize },
    /// Element present only in the first sequence.
    DeleteA { a: usize },
}

impl AlignOp {
    /// Cost contributed by this operation.
    pub fn cost(&self) -> f64 {
        match self {
            AlignOp::Match { .. } => 0.0,
            AlignOp::Substitute { cost, .. } => *cost,
            AlignOp::InsertB { .. } | AlignOp::DeleteA { .. } => INDEL_COST,
        }
    }

    /// Position consumed in the first sequence, if any.
    pub fn a_index(&self) -> Option<usize> {
        match self {
            AlignOp::Match { a, .. } | AlignOp::Substitute { a, .. } | AlignOp::DeleteA { a } => {
                Some(*a)
            }
            AlignOp::InsertB { .. } => None,
        }
    }

    /// Position consumed in the second sequence, if any.
    pub fn b_index(&self) -> Option<usize> {
        match self {
            AlignOp::Match { b, .. } | AlignOp::Substitute { b, .. } | AlignOp::InsertB { b } => {
                Some(*b)
            }
            AlignOp::DeleteA { .. } => None,
        }
    }
}

/// A minimum-cost monotone alignment of two sequences.
///
/// Every position of each sequence is consumed exactly once, in increasing
/// order, and `total_cost` is the sum of the operation costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub ops: Vec<AlignOp>,
    pub total_cost: f64,
}

/// One (original, predicted, expected) sentence triple to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTriple {
    /// The uncorrected input sentence.
    pub original: String,
    /// The system output.
    pub predicted: String,
    /// The gold correction.
    pub expected: String,
}

impl EvalTriple {
    pub fn new(
        original: impl Into<String>,
        predicted: impl Into<String>,
        expected: impl Into<String>,
    ) -> Self {
        Self {
            original: original.into(),
            predicted: predicted.into(),
            expected: expected.into(),
        }
    }
}

/// One row of a three-way alignment.
///
/// `hallucinated` is true exactly when the predicted token is present while
/// both the original and the expected tokens are absent. At least one of the
/// three tokens is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleRecord {
    pub original: Option<String>,
    pub predicted: Option<String>,
    pub expected: Option<String>,
    pub hallucinated: bool,
}

/// Pivot-joined alignment of a triple: every token of all three sentences
/// appears in exactly one record, and record order is monotone in all three.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleAlignment {
    pub records: Vec<TripleRecord>,
    pub source: EvalTriple,
}

/// Fills a suffix-cost table and walks it forward.
///
/// `suffix[i][j]` holds the cheapest cost of aligning `a[i..]` with `b[j..]`,
/// so the reconstruction can pick, at each step, the first alternative (in
/// tie-break order: pair, consume `a`, consume `b`) whose cost matches the
/// table. Comparisons are exact because the reconstruction recomputes the
/// very expressions the table was filled from.
fn align_with<F>(a_len: usize, b_len: usize, sub_cost: F) -> Alignment
where
    F: Fn(usize, usize) -> f64,
{
    let mut suffix = vec![vec![0.0f64; b_len + 1]; a_len + 1];
    for j in (0..b_len).rev() {
        suffix[a_len][j] = suffix[a_len][j + 1] + INDEL_COST;
    }
    for i in (0..a_len).rev() {
        suffix[i][b_len] = suffix[i + 1][b_len] + INDEL_COST;
        for j in (0..b_len).rev() {
            let pair = sub_cost(i, j) + suffix[i + 1][j + 1];
            let delete = INDEL_COST + suffix[i + 1][j];
            let insert = INDEL_COST + suffix[i][j + 1];
            suffix[i][j] = pair.min(delete).min(insert);
        }
    }

    let mut ops = Vec::with_capacity(a_len.max(b_len));
    let (mut i, mut j) = (0usize, 0usize);
    while i < a_len || j < b_len {
        if i < a_len && j < b_len {
            let cost = sub_cost(i, j);
            if suffix[i][j] == cost + suffix[i + 1][j + 1] {
                ops.push(if cost == 0.0 {
                    AlignOp::Match { a: i, b: j }
                } else {
                    AlignOp::Substitute { a: i, b: j, cost }
                });
                i += 1;
                j += 1;
                continue;
            }
        }
        if i < a_len && suffix[i][j] == INDEL_COST + suffix[i + 1][j] {
            ops.push(AlignOp::DeleteA { a: i });
            i += 1;
        } else {
            ops.push(AlignOp::InsertB { b: j });
            j += 1;
        }
    }

    let total_cost = ops.iter().map(AlignOp::cost).sum();
    Alignment { ops, total_cost }
}

/// Unit-cost edit distance between two grapheme-cluster sequences.
pub(crate) fn cluster_distance(a: &[String], b: &[String]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Grapheme-cluster edit distance between two normalized tokens.
pub fn grapheme_distance(x: &str, y: &str, cfg: &NormConfig) -> usize {
    cluster_distance(&graphemes(x, cfg), &graphemes(y, cfg))
}

/// Aligns two token sequences at minimum cost.
///
/// Matches are free; substituting `x` for `y` costs
/// `grapheme_distance(x, y) / max(|x|, |y|)`, which is 1.0 exactly when the
/// words share no characters; inserting or deleting a token costs 1. Empty
/// sequences are allowed and produce pure insert/delete alignments.
pub fn word_align(a: &[String], b: &[String], cfg: &NormConfig) -> Alignment {
    let ga: Vec<Vec<String>> = a.iter().map(|t| graphemes(t, cfg)).collect();
    let gb: Vec<Vec<String>> = b.iter().map(|t| graphemes(t, cfg)).collect();
    align_with(a.len(), b.len(), |i, j| {
        if a[i] == b[j] {
            0.0
        } else {
            let d = cluster_distance(&ga[i], &gb[j]) as f64;
            let longest = ga[i].len().max(gb[j].len()).max(1) as f64;
            (d / longest).min(1.0)
        }
    })
}

/// Aligns two tokens cluster by cluster with unit costs.
///
/// `total_cost` equals the grapheme edit distance between the tokens.
pub fn grapheme_align(x: &str, y: &str, cfg: &NormConfig) -> Alignment {
    let gx = graphemes(x, cfg);
    let gy = graphemes(y, cfg);
    align_with(
        gx.len(),
        gy.len(),
        |i, j| {
            if gx[i] == gy[j] {
                0.0
            } else {
                1.0
            }
        },
    )
}

/// Aligns `side` against `pivot` and distributes its tokens over pivot
/// positions and the gaps between them. `gaps[g]` holds side tokens that fall
/// before pivot position `g`; `gaps[pivot.len()]` holds trailing ones.
fn pivot_side(
    side: &[String],
    pivot: &[String],
    cfg: &NormConfig,
) -> (Vec<Option<String>>, Vec<Vec<String>>) {
    let alignment = word_align(side, pivot, cfg);
    let mut at: Vec<Option<String>> = vec![None; pivot.len()];
    let mut gaps: Vec<Vec<String>> = vec![Vec::new(); pivot.len() + 1];
    let mut next_pivot = 0usize;
    for op in &alignment.ops {
        match op {
            AlignOp::Match { a, b } | AlignOp::Substitute { a, b, .. } => {
                at[*b] = Some(side[*a].clone());
                next_pivot = *b + 1;
            }
            AlignOp::DeleteA { a } => gaps[next_pivot].push(side[*a].clone()),
            AlignOp::InsertB { b } => next_pivot = *b + 1,
        }
    }
    (at, gaps)
}

/// Builds the three-way alignment of a triple, pivoting on the expected
/// sentence.
///
/// Each expected position yields one record carrying its aligned original
/// and predicted tokens (either may be absent). Predicted tokens with no
/// expected counterpart become hallucinated records; original tokens with no
/// expected counterpart become records with absent predicted/expected fields.
pub fn triple_align(triple: &EvalTriple, cfg: &NormConfig) -> TripleAlignment {
    let original = tokenize(&triple.original, cfg);
    let predicted = tokenize(&triple.predicted, cfg);
    let expected = tokenize(&triple.expected, cfg);

    let (orig_at, orig_gaps) = pivot_side(&original.tokens, &expected.tokens, cfg);
    let (pred_at, pred_gaps) = pivot_side(&predicted.tokens, &expected.tokens, cfg);

    let n = expected.tokens.len();
    let mut records = Vec::with_capacity(n + 2);
    for j in 0..=n {
        for token in &orig_gaps[j] {
            records.push(TripleRecord {
                original: Some(token.clone()),
                predicted: None,
                expected: None,
                hallucinated: false,
            });
        }
        for token in &pred_gaps[j] {
            records.push(TripleRecord {
                original: None,
                predicted: Some(token.clone()),
                expected: None,
                hallucinated: true,
            });
        }
        if j < n {
            records.push(TripleRecord {
                original: orig_at[j].clone(),
                predicted: pred_at[j].clone(),
                expected: Some(expected.tokens[j].clone()),
                hallucinated: false,
            });
        }
    }

    TripleAlignment {
        records,
        source: triple.clone(),
    }
}
