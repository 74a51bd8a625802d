//! Spelling-error model estimation and seeded noise injection.
//!
//! The error model describes corruption from clean to noisy text: an
//! "insert" means the noisy side gained a grapheme cluster, a "delete" means
//! it lost one, a "substitute" swapped one for another and a "transpose"
//! exchanged two adjacent ones. Estimation aligns noisy/clean sentence pairs
//! word by word, grapheme-aligns the changed word pairs and tallies the
//! operations; an adjacent crossed pair of substitutions is folded into a
//! single transposition (a heuristic: swaps have no canonical edit-script
//! form).
//!
//! Injection replays errors onto clean text. Per word, with probability
//! `pass_through_rate` the word is kept; otherwise one error type is sampled
//! from the model proportions and applied at a random grapheme position.
//! Randomness is derived per word from (seed, sentence index, word index),
//! so output is reproducible byte for byte and independent of traversal
//! order. A word never becomes empty and a corrupted word always differs
//! from the input unless the model offers no usable replacement material.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{cluster_distance, grapheme_align, word_align, AlignOp};
use crate::error::{Error, Result};
use crate::textnorm::{graphemes, tokenize, NormConfig};

/// The classical spelling-error types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ErrorKind {
    Substitute,
    Insert,
    Delete,
    Transpose,
}

/// Relative frequency of each error type; the four values sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportions {
    pub substitute: f64,
    pub insert: f64,
    pub delete: f64,
    pub transpose: f64,
}

impl Proportions {
    pub fn sum(&self) -> f64 {
        self.substitute + self.insert + self.delete + self.transpose
    }
}

/// An estimated (or hand-built) spelling-error distribution.
///
/// `confusion` maps a clean grapheme to the noisy graphemes observed in its
/// place; `insert_pool` is the frequency table of spuriously added graphemes
/// and doubles as the fallback substitution alphabet. Both use ordered maps
/// so sampling is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub proportions: Proportions,
    #[serde(default)]
    pub confusion: BTreeMap<String, BTreeMap<String, u64>>,
    pub insert_pool: BTreeMap<String, u64>,
    pub pass_through_default: f64,
}

impl ErrorModel {
    /// Checks the structural invariants: proportions non-negative and
    /// summing to 1, confusion rows non-empty with positive totals, and the
    /// default pass-through rate within [0, 1].
    pub fn validate(&self) -> Result<()> {
        let p = &self.proportions;
        for (name, value) in [
            ("substitute", p.substitute),
            ("insert", p.insert),
            ("delete", p.delete),
            ("transpose", p.transpose),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Model(format!(
                    "proportion {name} must be a non-negative number, got {value}"
                )));
            }
        }
        if (p.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::Model(format!(
                "proportions must sum to 1, got {}",
                p.sum()
            )));
        }
        for (grapheme, row) in &self.confusion {
            if row.values().sum::<u64>() == 0 {
                return Err(Error::Model(format!(
                    "confusion row for {grapheme:?} has no observations"
                )));
            }
            for replacement in row.keys() {
                check_injectable(replacement)?;
            }
        }
        for grapheme in self.insert_pool.keys() {
            check_injectable(grapheme)?;
        }
        if !(0.0..=1.0).contains(&self.pass_through_default) {
            return Err(Error::Model(format!(
                "pass_through_default must lie in [0, 1], got {}",
                self.pass_through_default
            )));
        }
        Ok(())
    }
}

/// Injected material must stay inside a word: no empty entries, no
/// whitespace (which would change word counts downstream).
fn check_injectable(grapheme: &str) -> Result<()> {
    if grapheme.is_empty() || grapheme.chars().any(char::is_whitespace) {
        return Err(Error::Model(format!(
            "model entry {grapheme:?} is empty or contains whitespace"
        )));
    }
    Ok(())
}

/// Injection settings: intensity, reproducibility and per-word severity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionConfig {
    /// Probability that a word is emitted unchanged.
    pub pass_through_rate: f64,
    /// Seed for the per-word random streams.
    pub seed: u64,
    /// Upper bound on edits applied to one corrupted word (at least 1).
    pub max_edits_per_word: u32,
}

impl InjectionConfig {
    pub fn new(pass_through_rate: f64, seed: u64) -> Self {
        Self {
            pass_through_rate,
            seed,
            max_edits_per_word: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pass_through_rate) {
            return Err(Error::InvalidArgument(format!(
                "pass_through_rate must lie in [0, 1], got {}",
                self.pass_through_rate
            )));
        }
        if self.max_edits_per_word == 0 {
            return Err(Error::InvalidArgument(
                "max_edits_per_word must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Tallies {
    substitute: u64,
    insert: u64,
    delete: u64,
    transpose: u64,
    confusion: BTreeMap<String, BTreeMap<String, u64>>,
    insert_pool: BTreeMap<String, u64>,
    matched_words: u64,
    clean_words: u64,
}

/// Tallies the grapheme-level operations of one changed word pair, folding
/// swap patterns into transpositions.
fn tally_word_pair(noisy: &str, clean: &str, cfg: &NormConfig, tallies: &mut Tallies) {
    let gx = graphemes(noisy, cfg);
    let gy = graphemes(clean, cfg);
    let ops = grapheme_align(noisy, clean, cfg).ops;
    let mut k = 0;
    while k < ops.len() {
        // two adjacent substitutions with crossed graphemes are one swap
        if k + 1 < ops.len() {
            if let (
                AlignOp::Substitute { a: a1, b: b1, .. },
                AlignOp::Substitute { a: a2, b: b2, .. },
            ) = (&ops[k], &ops[k + 1])
            {
                if gx[*a1] == gy[*b2] && gx[*a2] == gy[*b1] && gx[*a1] != gx[*a2] {
                    tallies.transpose += 1;
                    k += 2;
                    continue;
                }
            }
        }
        // a grapheme moved across one matching neighbour is also a swap
        if k + 2 < ops.len() {
            if let (AlignOp::DeleteA { a }, AlignOp::Match { .. }, AlignOp::InsertB { b }) =
                (&ops[k], &ops[k + 1], &ops[k + 2])
            {
                if gx[*a] == gy[*b] {
                    tallies.transpose += 1;
                    k += 3;
                    continue;
                }
            }
            if let (AlignOp::InsertB { b }, AlignOp::Match { .. }, AlignOp::DeleteA { a }) =
                (&ops[k], &ops[k + 1], &ops[k + 2])
            {
                if gx[*a] == gy[*b] {
                    tallies.transpose += 1;
                    k += 3;
                    continue;
                }
            }
        }
        match &ops[k] {
            AlignOp::Match { .. } => {}
            AlignOp::Substitute { a, b, .. } => {
                tallies.substitute += 1;
                *tallies
                    .confusion
                    .entry(gy[*b].clone())
                    .or_default()
                    .entry(gx[*a].clone())
                    .or_insert(0) += 1;
            }
            // extra grapheme on the noisy side: the corruption inserted it
            AlignOp::DeleteA { a } => {
                tallies.insert += 1;
                *tallies.insert_pool.entry(gx[*a].clone()).or_insert(0) += 1;
            }
            // grapheme missing from the noisy side: the corruption deleted it
            AlignOp::InsertB { .. } => tallies.delete += 1,
        }
        k += 1;
    }
}

/// Incremental error-model estimator.
///
/// Pairs can be fed in any chunking; tallies are plain sums, so the result
/// only depends on what was observed. Word-level extras count as insertions
/// (and feed the insert pool) and word-level omissions as deletions, each
/// weighted by grapheme count. The default pass-through rate is the
/// fraction of clean words left unchanged.
#[derive(Debug, Default)]
pub struct ModelEstimator {
    tallies: Tallies,
}

impl ModelEstimator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tallies one (noisy, clean) sentence pair.
    pub fn observe(&mut self, noisy: &str, clean: &str, cfg: &NormConfig) {
        let tallies = &mut self.tallies;
        let noisy_tokens = tokenize(noisy, cfg);
        let clean_tokens = tokenize(clean, cfg);
        let alignment = word_align(&noisy_tokens.tokens, &clean_tokens.tokens, cfg);
        for op in &alignment.ops {
            match op {
                AlignOp::Match { .. } => {
                    tallies.matched_words += 1;
                    tallies.clean_words += 1;
                }
                AlignOp::Substitute { a, b, .. } => {
                    tallies.clean_words += 1;
                    tally_word_pair(
                        &noisy_tokens.tokens[*a],
                        &clean_tokens.tokens[*b],
                        cfg,
                        tallies,
                    );
                }
                AlignOp::DeleteA { a } => {
                    for g in &noisy_tokens.token_graphemes[*a] {
                        tallies.insert += 1;
                        *tallies.insert_pool.entry(g.clone()).or_insert(0) += 1;
                    }
                }
                AlignOp::InsertB { b } => {
                    tallies.clean_words += 1;
                    tallies.delete += clean_tokens.token_graphemes[*b].len() as u64;
                }
            }
        }
    }

    /// Grapheme-level edits tallied so far.
    pub fn observed_edits(&self) -> u64 {
        let t = &self.tallies;
        t.substitute + t.insert + t.delete + t.transpose
    }

    /// Normalizes the tallies into a model. Fails with
    /// [`Error::NoErrorSignal`] when the corpora never differed.
    pub fn finish(self) -> Result<ErrorModel> {
        let tallies = self.tallies;
        let total = tallies.substitute + tallies.insert + tallies.delete + tallies.transpose;
        if total == 0 {
            return Err(Error::NoErrorSignal);
        }
        let total = total as f64;
        Ok(ErrorModel {
            proportions: Proportions {
                substitute: tallies.substitute as f64 / total,
                insert: tallies.insert as f64 / total,
                delete: tallies.delete as f64 / total,
                transpose: tallies.transpose as f64 / total,
            },
            confusion: tallies.confusion,
            insert_pool: tallies.insert_pool,
            pass_through_default: if tallies.clean_words > 0 {
                tallies.matched_words as f64 / tallies.clean_words as f64
            } else {
                0.0
            },
        })
    }
}

/// Estimates an [`ErrorModel`] from parallel (noisy, clean) sentence pairs.
pub fn estimate_error_model(pairs: &[(String, String)], cfg: &NormConfig) -> Result<ErrorModel> {
    let mut estimator = ModelEstimator::new();
    for (noisy, clean) in pairs {
        estimator.observe(noisy, clean, cfg);
    }
    estimator.finish()
}

/// Fresh random stream for one word, derived from its coordinates only.
fn word_rng(seed: u64, sentence: u64, word: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sentence.to_le_bytes());
    key[16..24].copy_from_slice(&word.to_le_bytes());
    key[24..32].copy_from_slice(&0x73706c62656e6368u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn sample_kind(p: &Proportions, rng: &mut ChaCha8Rng) -> ErrorKind {
    let r: f64 = rng.gen();
    let mut edge = p.substitute;
    if r < edge {
        return ErrorKind::Substitute;
    }
    edge += p.insert;
    if r < edge {
        return ErrorKind::Insert;
    }
    edge += p.delete;
    if r < edge {
        return ErrorKind::Delete;
    }
    ErrorKind::Transpose
}

/// Frequency-weighted sample from an ordered table, skipping `exclude`.
fn sample_weighted(
    table: &BTreeMap<String, u64>,
    exclude: Option<&str>,
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    let total: u64 = table
        .iter()
        .filter(|(k, _)| exclude != Some(k.as_str()))
        .map(|(_, c)| *c)
        .sum();
    if total == 0 {
        return None;
    }
    let mut pick = rng.gen_range(0..total);
    for (key, count) in table {
        if exclude == Some(key.as_str()) {
            continue;
        }
        if pick < *count {
            return Some(key.clone());
        }
        pick -= *count;
    }
    None
}

/// Uniform sample over the keys of an ordered table, skipping `exclude`.
fn sample_uniform_key(
    table: &BTreeMap<String, u64>,
    exclude: Option<&str>,
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    let keys: Vec<&String> = table
        .keys()
        .filter(|k| exclude != Some(k.as_str()))
        .collect();
    if keys.is_empty() {
        return None;
    }
    Some(keys[rng.gen_range(0..keys.len())].clone())
}

/// Replacement for `original`: its confusion row when available, otherwise a
/// uniform pick from the insert pool. Never returns `original` itself.
fn sample_substitution(model: &ErrorModel, original: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    if let Some(row) = model.confusion.get(original) {
        if let Some(replacement) = sample_weighted(row, Some(original), rng) {
            return Some(replacement);
        }
    }
    sample_uniform_key(&model.insert_pool, Some(original), rng)
}

fn apply_edit(clusters: &mut Vec<String>, model: &ErrorModel, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut kind = sample_kind(&model.proportions, rng);
    if kind == ErrorKind::Delete && clusters.len() == 1 {
        kind = ErrorKind::Substitute;
    }
    if kind == ErrorKind::Transpose
        && !(0..clusters.len().saturating_sub(1)).any(|p| clusters[p] != clusters[p + 1])
    {
        kind = ErrorKind::Substitute;
    }
    match kind {
        ErrorKind::Substitute => {
            let pos = rng.gen_range(0..clusters.len());
            if let Some(replacement) = sample_substitution(model, &clusters[pos], rng) {
                clusters[pos] = replacement;
            }
        }
        ErrorKind::Insert => {
            let grapheme = sample_weighted(&model.insert_pool, None, rng).ok_or_else(|| {
                Error::Model("insertion sampled with an empty insert pool".into())
            })?;
            let pos = rng.gen_range(0..=clusters.len());
            clusters.insert(pos, grapheme);
        }
        ErrorKind::Delete => {
            let pos = rng.gen_range(0..clusters.len());
            clusters.remove(pos);
        }
        ErrorKind::Transpose => {
            let candidates: Vec<usize> = (0..clusters.len() - 1)
                .filter(|&p| clusters[p] != clusters[p + 1])
                .collect();
            let pos = candidates[rng.gen_range(0..candidates.len())];
            clusters.swap(pos, pos + 1);
        }
    }
    Ok(())
}

fn corrupt_word(
    word: &str,
    model: &ErrorModel,
    icfg: &InjectionConfig,
    norm: &NormConfig,
    rng: &mut ChaCha8Rng,
) -> Result<String> {
    let mut clusters = graphemes(word, norm);
    if clusters.is_empty() {
        return Ok(String::new());
    }
    let edits = if icfg.max_edits_per_word <= 1 {
        1
    } else {
        rng.gen_range(1..=icfg.max_edits_per_word)
    };
    for _ in 0..edits {
        apply_edit(&mut clusters, model, rng)?;
    }
    Ok(clusters.concat())
}

/// Splits a line into alternating whitespace and word runs, so every byte of
/// the input reappears in the output.
fn runs(line: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut current: Option<bool> = None;
    for (i, ch) in line.char_indices() {
        let ws = ch.is_whitespace();
        match current {
            None => current = Some(ws),
            Some(prev) if prev != ws => {
                out.push((prev, &line[start..i]));
                start = i;
                current = Some(ws);
            }
            _ => {}
        }
    }
    if let Some(prev) = current {
        out.push((prev, &line[start..]));
    }
    out
}

fn corrupt_line(
    line: &str,
    sentence_idx: usize,
    model: &ErrorModel,
    icfg: &InjectionConfig,
    norm: &NormConfig,
) -> Result<String> {
    let mut out = String::with_capacity(line.len() + 8);
    let mut word_idx = 0u64;
    for (is_ws, run) in runs(line) {
        if is_ws {
            out.push_str(run);
            continue;
        }
        let mut rng = word_rng(icfg.seed, sentence_idx as u64, word_idx);
        word_idx += 1;
        if rng.gen_bool(icfg.pass_through_rate) {
            out.push_str(run);
        } else {
            out.push_str(&corrupt_word(run, model, icfg, norm, &mut rng)?);
        }
    }
    Ok(out)
}

/// Injects spelling errors into `clean` sentences (one per line entry).
///
/// Whitespace is preserved verbatim, so a pass-through rate of 1.0 returns
/// the input unchanged. The sentence count never changes. Identical
/// (input, model, config) always produce identical output.
pub fn inject_errors(
    clean: &[String],
    model: &ErrorModel,
    icfg: &InjectionConfig,
    norm: &NormConfig,
) -> Result<Vec<String>> {
    inject_errors_from(clean, 0, model, icfg, norm)
}

/// [`inject_errors`] for a chunk whose first sentence has corpus-wide index
/// `first_sentence`. Randomness depends only on absolute coordinates, so
/// corrupting a corpus chunk by chunk equals corrupting it in one call.
pub fn inject_errors_from(
    clean: &[String],
    first_sentence: usize,
    model: &ErrorModel,
    icfg: &InjectionConfig,
    norm: &NormConfig,
) -> Result<Vec<String>> {
    icfg.validate()?;
    model.validate()?;
    clean
        .par_iter()
        .enumerate()
        .map(|(idx, line)| corrupt_line(line, first_sentence + idx, model, icfg, norm))
        .collect()
}

/// Running error-percentage tally, mergeable across corpus chunks.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ErrorCounts {
    /// Grapheme clusters that differ from the clean text.
    pub differing: u64,
    /// Grapheme clusters in the clean text (whitespace excluded).
    pub clean_total: u64,
}

impl ErrorCounts {
    pub fn merge(&mut self, other: &ErrorCounts) {
        self.differing += other.differing;
        self.clean_total += other.clean_total;
    }

    /// The error percentage these counts represent, in [0, 1].
    pub fn percentage(&self) -> f64 {
        if self.clean_total == 0 {
            return if self.differing == 0 { 0.0 } else { 1.0 };
        }
        (self.differing as f64 / self.clean_total as f64).min(1.0)
    }
}

/// Tallies differing and total grapheme clusters over parallel sentences.
///
/// Sentences are compared pairwise; each word-aligned pair contributes its
/// grapheme edit distance and unaligned words contribute their full grapheme
/// length, so separators never count.
pub fn count_errors(noisy: &[String], clean: &[String], cfg: &NormConfig) -> Result<ErrorCounts> {
    if noisy.len() != clean.len() {
        return Err(Error::Format(format!(
            "parallel corpora differ in length: {} vs {} sentences",
            noisy.len(),
            clean.len()
        )));
    }
    let counts = noisy
        .par_iter()
        .zip(clean.par_iter())
        .map(|(noisy_line, clean_line)| {
            let nt = tokenize(noisy_line, cfg);
            let ct = tokenize(clean_line, cfg);
            let alignment = word_align(&nt.tokens, &ct.tokens, cfg);
            let mut counts = ErrorCounts::default();
            for op in &alignment.ops {
                match op {
                    AlignOp::Match { b, .. } => {
                        counts.clean_total += ct.token_graphemes[*b].len() as u64;
                    }
                    AlignOp::Substitute { a, b, .. } => {
                        counts.differing +=
                            cluster_distance(&nt.token_graphemes[*a], &ct.token_graphemes[*b])
                                as u64;
                        counts.clean_total += ct.token_graphemes[*b].len() as u64;
                    }
                    AlignOp::DeleteA { a } => {
                        counts.differing += nt.token_graphemes[*a].len() as u64;
                    }
                    AlignOp::InsertB { b } => {
                        counts.differing += ct.token_graphemes[*b].len() as u64;
                        counts.clean_total += ct.token_graphemes[*b].len() as u64;
                    }
                }
            }
            counts
        })
        .reduce(ErrorCounts::default, |mut a, b| {
            a.merge(&b);
            a
        });
    Ok(counts)
}

/// Fraction of clean grapheme clusters that differ in the noisy corpus.
pub fn measure_error_percentage(
    noisy: &[String],
    clean: &[String],
    cfg: &NormConfig,
) -> Result<f64> {
    count_errors(noisy, clean, cfg).map(|c| c.percentage())
}
