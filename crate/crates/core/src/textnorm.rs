//! Unicode normalization, grapheme segmentation and whitespace tokenization.
//!
//! Everything downstream (alignment, metrics, injection) operates on the
//! units produced here: canonically composed text, whitespace-delimited word
//! tokens, and extended grapheme clusters. Grapheme clusters are the atomic
//! "character" unit so that combining vowel signs and joiner-based conjuncts
//! in scripts such as Sinhala or Devanagari count as single edit units.
//!
//! All functions are pure; configurations are plain `Copy` values.

use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

/// Zero-width joiner, the codepoint governed by [`ZwjPolicy`].
pub const ZWJ: char = '\u{200D}';

/// How zero-width joiners are treated during normalization and segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZwjPolicy {
    /// Leave joiners in place; segmentation follows stock UAX #29 rules,
    /// which may split a conjunct after the joiner.
    Keep,
    /// Remove every U+200D from the text. No other codepoint is touched.
    Strip,
    /// Leave joiners in place and force each one to bind its neighbours
    /// into a single grapheme cluster during segmentation.
    #[default]
    Cluster,
}

/// Normalization settings applied before any comparison or alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormConfig {
    /// Apply canonical composition (NFC).
    pub nfc: bool,
    /// Zero-width-joiner handling.
    pub zwj_policy: ZwjPolicy,
    /// Lowercase the text after composition.
    pub lowercase: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            nfc: true,
            zwj_policy: ZwjPolicy::Cluster,
            lowercase: false,
        }
    }
}

/// A sentence with its normalized form, word tokens and per-token grapheme
/// clusters.
///
/// Tokens are maximal runs of non-whitespace; they are never empty and never
/// contain whitespace, so joining them with single spaces and re-tokenizing
/// yields the same tokens again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    /// The input text as given.
    pub raw: String,
    /// The input after [`normalize`].
    pub normalized: String,
    /// Words in order of appearance.
    pub tokens: Vec<String>,
    /// Grapheme clusters of each token, in token order.
    pub token_graphemes: Vec<Vec<String>>,
}

/// Normalizes `text` under `cfg`.
///
/// The pipeline is: canonical composition (when `cfg.nfc`), joiner stripping
/// (when the policy is [`ZwjPolicy::Strip`]), then lowercasing (when
/// `cfg.lowercase`). Composition is re-applied after a step that can expose
/// new composable pairs, which makes the whole pipeline idempotent.
pub fn normalize(text: &str, cfg: &NormConfig) -> String {
    let mut out: String = if cfg.nfc {
        text.nfc().collect()
    } else {
        text.to_string()
    };
    if cfg.zwj_policy == ZwjPolicy::Strip && out.contains(ZWJ) {
        out.retain(|c| c != ZWJ);
        // removing a joiner can bring a base and a mark together
        if cfg.nfc {
            out = out.nfc().collect();
        }
    }
    if cfg.lowercase {
        let lowered = out.to_lowercase();
        out = if cfg.nfc {
            lowered.nfc().collect()
        } else {
            lowered
        };
    }
    out
}

/// Splits a normalized token into extended grapheme clusters.
///
/// Under [`ZwjPolicy::Cluster`] a cluster ending in a zero-width joiner is
/// merged with the cluster that follows it, so a joiner never sits on a
/// cluster boundary. The clusters partition the token in order; an empty
/// token yields an empty list.
pub fn graphemes(token: &str, cfg: &NormConfig) -> Vec<String> {
    let clusters = token.graphemes(true).map(str::to_string);
    if cfg.zwj_policy != ZwjPolicy::Cluster {
        return clusters.collect();
    }
    let mut merged: Vec<String> = Vec::new();
    for cluster in clusters {
        match merged.last_mut() {
            Some(prev) if prev.ends_with(ZWJ) => prev.push_str(&cluster),
            _ => merged.push(cluster),
        }
    }
    merged
}

/// Normalizes `text` and splits it into whitespace-delimited tokens.
///
/// Whitespace runs collapse: only the tokens and their order survive.
/// Punctuation stays attached to its word.
pub fn tokenize(text: &str, cfg: &NormConfig) -> TokenizedSentence {
    let normalized = normalize(text, cfg);
    let tokens: Vec<String> = normalized.split_whitespace().map(str::to_string).collect();
    let token_graphemes = tokens.iter().map(|t| graphemes(t, cfg)).collect();
    TokenizedSentence {
        raw: text.to_string(),
        normalized,
        tokens,
        token_graphemes,
    }
}
