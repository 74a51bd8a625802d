//! Shared test support: independent oracles and corpus generators.
//!
//! The oracles deliberately avoid the library's alignment code paths: the
//! word-alignment oracle enumerates every monotone alignment recursively,
//! the distance oracle fills a plain prefix table, and the segmentation
//! oracle implements the default grapheme-cluster rules directly from a
//! hand-transcribed property table for the codepoints used in tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spellbench::EvalTriple;

/// Minimum cost over all monotone alignments, by exhaustive recursion.
/// Insertions and deletions cost 1, pairing `(i, j)` costs `sub(i, j)`.
pub fn enumerate_min_cost(m: usize, n: usize, sub: &dyn Fn(usize, usize) -> f64) -> f64 {
    fn rec(i: usize, j: usize, m: usize, n: usize, sub: &dyn Fn(usize, usize) -> f64) -> f64 {
        if i == m && j == n {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        if i < m && j < n {
            best = best.min(sub(i, j) + rec(i + 1, j + 1, m, n, sub));
        }
        if i < m {
            best = best.min(1.0 + rec(i + 1, j, m, n, sub));
        }
        if j < n {
            best = best.min(1.0 + rec(i, j + 1, m, n, sub));
        }
        best
    }
    rec(0, 0, m, n, sub)
}

/// Textbook prefix-table minimum alignment cost (independent of the
/// suffix-table route used by the implementation).
pub fn table_min_cost(m: usize, n: usize, sub: &dyn Fn(usize, usize) -> f64) -> f64 {
    let mut table = vec![vec![0.0f64; n + 1]; m + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i as f64;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j as f64;
    }
    for i in 1..=m {
        for j in 1..=n {
            let pair = table[i - 1][j - 1] + sub(i - 1, j - 1);
            let delete = table[i - 1][j] + 1.0;
            let insert = table[i][j - 1] + 1.0;
            table[i][j] = pair.min(delete).min(insert);
        }
    }
    table[m][n]
}

/// Unit-cost Levenshtein distance over arbitrary comparable elements.
pub fn table_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

/// Normalized word-substitution cost over ASCII tokens, computed from
/// scratch: character-level edit distance over the longer length.
pub fn ascii_word_cost(x: &str, y: &str) -> f64 {
    if x == y {
        return 0.0;
    }
    let xc: Vec<char> = x.chars().collect();
    let yc: Vec<char> = y.chars().collect();
    let d = table_edit_distance(&xc, &yc) as f64;
    (d / xc.len().max(yc.len()).max(1) as f64).min(1.0)
}

// ---------------------------------------------------------------------------
// Independent grapheme-cluster segmentation (default rules, no tailoring)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gcb {
    Other,
    Cr,
    Lf,
    Control,
    Extend,
    Zwj,
    SpacingMark,
    ExtPict,
}

/// Grapheme_Cluster_Break values transcribed from the Unicode character
/// database for the codepoints exercised in tests.
fn gcb(c: char) -> Gcb {
    match c as u32 {
        0x000D => Gcb::Cr,
        0x000A => Gcb::Lf,
        0x0000..=0x0009 | 0x000B..=0x000C | 0x000E..=0x001F | 0x007F => Gcb::Control,
        0x200D => Gcb::Zwj,
        0x200C => Gcb::Extend,
        0x0300..=0x036F => Gcb::Extend,
        // Sinhala: al-lakuna and the non-spacing vowel signs
        0x0DCA | 0x0DD2..=0x0DD4 | 0x0DD6 => Gcb::Extend,
        // Sinhala: spacing vowel signs
        0x0DCF..=0x0DD1 | 0x0DD8..=0x0DDF | 0x0DF2..=0x0DF3 => Gcb::SpacingMark,
        // the emoji used in tests
        0x1F466..=0x1F469 => Gcb::ExtPict,
        _ => Gcb::Other,
    }
}

fn breaks_between(chars: &[char], k: usize) -> bool {
    let before = gcb(chars[k - 1]);
    let after = gcb(chars[k]);
    if before == Gcb::Cr && after == Gcb::Lf {
        return false; // GB3
    }
    if matches!(before, Gcb::Control | Gcb::Cr | Gcb::Lf)
        || matches!(after, Gcb::Control | Gcb::Cr | Gcb::Lf)
    {
        return true; // GB4, GB5
    }
    if matches!(after, Gcb::Extend | Gcb::Zwj | Gcb::SpacingMark) {
        return false; // GB9, GB9a
    }
    if before == Gcb::Zwj && after == Gcb::ExtPict {
        // GB11: ExtPict Extend* ZWJ x ExtPict
        let mut idx = k - 1;
        while idx > 0 {
            idx -= 1;
            match gcb(chars[idx]) {
                Gcb::Extend => continue,
                Gcb::ExtPict => return false,
                _ => break,
            }
        }
    }
    true // GB999
}

/// Splits `s` into extended grapheme clusters using the rule set above.
pub fn oracle_clusters(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut clusters = Vec::new();
    let mut current = String::new();
    for (k, &c) in chars.iter().enumerate() {
        if k > 0 && breaks_between(&chars, k) {
            clusters.push(std::mem::take(&mut current));
        }
        current.push(c);
    }
    if !current.is_empty() {
        clusters.push(current);
    }
    clusters
}

// ---------------------------------------------------------------------------
// Corpus generators
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Forty distinct lowercase words over a..y (never 'z', so "zzz"-style
/// tokens are guaranteed novel and share no characters with the vocabulary).
pub fn vocab() -> Vec<String> {
    let words = [
        "apple", "banana", "cherry", "damson", "elder", "feijoa", "guava", "honey", "icaco",
        "jujube", "kumquat", "lemon", "mango", "nutmeg", "olive", "papaya", "quince", "raisin",
        "sapote", "tomato", "ugli", "vanilla", "walnut", "xigua", "yam", "acorn", "barley",
        "clover", "durum", "einkorn", "fennel", "ginger", "hyssop", "endive", "karela", "lentil",
        "millet", "nettle", "oat", "parsley",
    ];
    words.iter().map(|w| w.to_string()).collect()
}

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxy";

fn random_letter(rng: &mut ChaCha8Rng, not: Option<char>) -> char {
    loop {
        let c = LETTERS[rng.gen_range(0..LETTERS.len())] as char;
        if Some(c) != not {
            return c;
        }
    }
}

/// One random single-character corruption guaranteed to change the word.
pub fn corrupt_once(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    loop {
        let mut candidate = chars.clone();
        match rng.gen_range(0..4u8) {
            0 => {
                let pos = rng.gen_range(0..candidate.len());
                candidate[pos] = random_letter(rng, Some(candidate[pos]));
            }
            1 => {
                let pos = rng.gen_range(0..=candidate.len());
                candidate.insert(pos, random_letter(rng, None));
            }
            2 if candidate.len() > 1 => {
                let pos = rng.gen_range(0..candidate.len());
                candidate.remove(pos);
            }
            _ if candidate.len() > 1 => {
                let pos = rng.gen_range(0..candidate.len() - 1);
                candidate.swap(pos, pos + 1);
            }
            _ => continue,
        }
        if candidate != chars {
            chars = candidate;
            return chars.into_iter().collect();
        }
    }
}

/// A clean sentence of `len` distinct vocabulary words.
pub fn clean_sentence(len: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut pool = vocab();
    let mut words = Vec::with_capacity(len);
    for _ in 0..len.min(pool.len()) {
        let idx = rng.gen_range(0..pool.len());
        words.push(pool.swap_remove(idx));
    }
    words
}

/// A triple whose original carries `n_errors` corrupted words and whose
/// prediction corrects everything; when `leading_insertion` is set the
/// prediction also hallucinates a novel word at the front.
pub fn synth_triple(
    len: usize,
    n_errors: usize,
    leading_insertion: bool,
    rng: &mut ChaCha8Rng,
) -> EvalTriple {
    let expected = clean_sentence(len, rng);
    let mut original = expected.clone();
    let mut positions: Vec<usize> = (0..len).collect();
    for _ in 0..n_errors.min(len) {
        let pick = rng.gen_range(0..positions.len());
        let pos = positions.swap_remove(pick);
        original[pos] = corrupt_once(&expected[pos], rng);
    }
    let mut predicted = expected.clone();
    if leading_insertion {
        predicted.insert(0, "zzz".to_string());
    }
    EvalTriple::new(original.join(" "), predicted.join(" "), expected.join(" "))
}

/// The worked single-triple example: a hallucinated adjective plus two
/// misspellings that the system fixed.
pub fn hallucinated_triple() -> EvalTriple {
    EvalTriple::new(
        "I am going to the librari to studdy",
        "I am going to the public library to study",
        "I am going to the library to study",
    )
}

/// A triple whose predicted words always share material with their expected
/// counterparts (single-character edits of words at least three letters
/// long), so pairings never tie with insert/delete paths and inserting a
/// novel word later perturbs nothing else.
pub fn locality_triple(rng: &mut ChaCha8Rng) -> EvalTriple {
    let len = rng.gen_range(1..=8);
    let expected = clean_sentence(len, rng);
    let mut original = Vec::with_capacity(len);
    let mut predicted = Vec::with_capacity(len);
    for word in &expected {
        let orig = if rng.gen_bool(0.4) {
            corrupt_once(word, rng)
        } else {
            word.clone()
        };
        let pred = match rng.gen_range(0..10u8) {
            0..=5 => word.clone(),        // corrected (or untouched)
            6..=7 => orig.clone(),        // left as received
            _ => corrupt_once(word, rng), // wrong fix
        };
        original.push(orig);
        predicted.push(pred);
    }
    EvalTriple::new(original.join(" "), predicted.join(" "), expected.join(" "))
}

/// An unconstrained random triple: corruptions, missed and wrong fixes,
/// dropped words and hallucinated extras.
pub fn spicy_triple(rng: &mut ChaCha8Rng) -> EvalTriple {
    let len = rng.gen_range(1..=8);
    let expected = clean_sentence(len, rng);
    let mut original = Vec::new();
    let mut predicted = Vec::new();
    for word in &expected {
        let orig = if rng.gen_bool(0.35) {
            corrupt_once(word, rng)
        } else {
            word.clone()
        };
        match rng.gen_range(0..20u8) {
            0..=10 => predicted.push(word.clone()),
            11..=13 => predicted.push(orig.clone()),
            14..=16 => predicted.push(corrupt_once(word, rng)),
            17 => {} // dropped the word
            _ => {
                predicted.push(word.clone());
                predicted.push("zzqx".to_string()); // hallucinated extra
            }
        }
        original.push(orig);
    }
    EvalTriple::new(original.join(" "), predicted.join(" "), expected.join(" "))
}
