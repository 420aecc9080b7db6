//! Case and diacritic folding plus the tokenizers shared by the lexicon matchers.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercases and strips diacritics (NFD decomposition, combining marks removed).
pub fn fold(s: &str) -> String {
    s.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Lowercases and NFC-normalizes without removing diacritics.
pub fn lower_nfc(s: &str) -> String {
    s.nfc().flat_map(char::to_lowercase).collect()
}

pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Splits on every non-alphanumeric character; apostrophes and hyphens separate words.
pub fn words(s: &str) -> Vec<&str> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Folded word tokens.
pub fn folded_words(s: &str) -> Vec<String> {
    words(s).into_iter().map(fold).collect()
}

/// Returns true when `needle` (already folded, space separated) occurs as a
/// contiguous token run in `haystack`.
pub fn contains_phrase(haystack: &[String], needle: &str) -> bool {
    let parts: Vec<&str> = needle.split_whitespace().collect();
    if parts.is_empty() || parts.len() > haystack.len() {
        return false;
    }
    haystack
        .windows(parts.len())
        .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Substring by character offsets; `None` when out of range.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut idx = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let b0 = idx.by_ref().nth(start)?;
    if end == start {
        return Some(&s[b0..b0]);
    }
    let b1 = idx.nth(end - start - 1)?;
    Some(&s[b0..b1])
}

/// Parses a plain text word list: one entry per line, `#` comments and blank lines skipped.
pub fn parse_word_list(src: &str) -> Vec<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}
