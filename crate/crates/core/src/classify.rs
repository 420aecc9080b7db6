//! Act typing by keyword matching ratio.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::assembly::fragment_text;
use crate::domain::{Act, ActType, RecognizedPage};
use crate::error::{Error, Result};
use crate::text::{fold, lower_nfc, nfc, words};

const DEFAULT_TABLE: &str = include_str!("../data/keywords.txt");

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Keyword {
    pub word: String,
    /// Compare with accents kept (after lowercasing and NFC).
    pub accent_sensitive: bool,
}

impl Keyword {
    fn key(&self) -> String {
        if self.accent_sensitive {
            lower_nfc(&self.word)
        } else {
            fold(&self.word)
        }
    }
}

/// Keyword sets per act type; sets are pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeywordTable {
    sets: BTreeMap<ActType, Vec<Keyword>>,
}

impl Default for KeywordTable {
    fn default() -> Self {
        KeywordTable::parse(DEFAULT_TABLE).expect("shipped keyword table is valid")
    }
}

impl KeywordTable {
    pub fn new(sets: BTreeMap<ActType, Vec<Keyword>>) -> Result<Self> {
        if sets.contains_key(&ActType::Undefined) {
            return Err(Error::Config("keywords cannot target the undefined type".into()));
        }
        let mut owner: HashMap<String, ActType> = HashMap::new();
        let mut clean = BTreeMap::new();
        for (t, kws) in sets {
            let mut kept: Vec<Keyword> = Vec::new();
            for k in kws {
                // an accent-sensitive entry still collides with a folded one on the folded key
                let probe = fold(&k.word);
                if let Some(prev) = owner.get(&probe) {
                    if *prev != t {
                        return Err(Error::Config(format!(
                            "keyword {:?} listed for both {} and {}",
                            k.word,
                            prev.as_str(),
                            t.as_str()
                        )));
                    }
                }
                if !kept.iter().any(|x| x.key() == k.key() && x.accent_sensitive == k.accent_sensitive) {
                    owner.insert(probe, t);
                    kept.push(k);
                }
            }
            if !kept.is_empty() {
                clean.insert(t, kept);
            }
        }
        if clean.is_empty() {
            return Err(Error::Config("keyword table is empty".into()));
        }
        Ok(KeywordTable { sets: clean })
    }

    /// Reads `[type]` sections of one keyword per line; `=word` keeps accents.
    pub fn parse(src: &str) -> Result<Self> {
        let mut sets: BTreeMap<ActType, Vec<Keyword>> = BTreeMap::new();
        let mut current = None;
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(
                    ActType::parse(name.trim())
                        .ok_or_else(|| Error::Config(format!("keywords line {}: unknown act type {name:?}", i + 1)))?,
                );
                continue;
            }
            let t = current.ok_or_else(|| Error::Config(format!("keywords line {}: word before any [type] header", i + 1)))?;
            let (word, accent_sensitive) = match line.strip_prefix('=') {
                Some(w) => (w.trim(), true),
                None => (line, false),
            };
            sets.entry(t).or_default().push(Keyword {
                word: word.to_string(),
                accent_sensitive,
            });
        }
        KeywordTable::new(sets)
    }

    pub fn types(&self) -> impl Iterator<Item = (ActType, &[Keyword])> {
        self.sets.iter().map(|(t, v)| (*t, v.as_slice()))
    }

    pub fn largest_set(&self) -> usize {
        self.sets.values().map(Vec::len).max().unwrap_or(1)
    }

    /// `1 / |largest set|`: a single keyword of the largest type suffices.
    pub fn default_min_score(&self) -> f64 {
        1.0 / self.largest_set() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub act_type: ActType,
    pub scores: BTreeMap<ActType, f64>,
    pub matched: BTreeMap<ActType, Vec<String>>,
}

/// Scores each type by the share of its distinct keywords present as whole
/// words, and returns the unique best type when it reaches `min_score`.
pub fn classify_text(text: &str, table: &KeywordTable, min_score: f64) -> Classification {
    let text = nfc(text);
    let toks = words(&text);
    let folded: Vec<String> = toks.iter().map(|w| fold(w)).collect();
    let exact: Vec<String> = toks.iter().map(|w| lower_nfc(w)).collect();
    let mut scores = BTreeMap::new();
    let mut matched = BTreeMap::new();
    for (t, kws) in table.types() {
        let hits: Vec<String> = kws
            .iter()
            .filter(|k| {
                let key = k.key();
                let hay = if k.accent_sensitive { &exact } else { &folded };
                let parts: Vec<&str> = key.split(|c: char| !c.is_alphanumeric()).filter(|p| !p.is_empty()).collect();
                !parts.is_empty()
                    && hay
                        .windows(parts.len())
                        .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
            })
            .map(|k| k.word.clone())
            .collect();
        scores.insert(t, hits.len() as f64 / kws.len() as f64);
        matched.insert(t, hits);
    }
    let best = scores.values().copied().fold(0.0, f64::max);
    let winners: Vec<ActType> = scores.iter().filter(|(_, s)| **s == best).map(|(t, _)| *t).collect();
    let act_type = if winners.len() == 1 && best > 0.0 && best >= min_score {
        winners[0]
    } else {
        ActType::Undefined
    };
    Classification { act_type, scores, matched }
}

/// First defined type of an act's parts, in order.
pub fn merged_type(fragment_types: &[ActType]) -> ActType {
    fragment_types
        .iter()
        .copied()
        .find(|t| *t != ActType::Undefined)
        .unwrap_or(ActType::Undefined)
}

/// Types each fragment on its own text, keeps the first defined type, and
/// records the full-text scores on the act.
pub fn classify_act(act: &mut Act, pages: &[RecognizedPage], table: &KeywordTable, min_score: f64) {
    let types: Vec<ActType> = act
        .fragments
        .iter()
        .map(|f| classify_text(&fragment_text(f, pages), table, min_score).act_type)
        .collect();
    act.act_type = merged_type(&types);
    act.type_scores = classify_text(&act.full_text, table, min_score).scores;
}
