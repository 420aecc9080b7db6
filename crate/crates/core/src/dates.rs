//! Written-out date standardization: compositional French/English numerals,
//! month words, and dates given relative to the record date.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::StructuredDate;
use crate::metrics::edit_distance;
use crate::text::{contains_phrase, fold};

pub const NUMERALS: &str = include_str!("../data/numerals.tsv");
pub const MONTHS: &str = include_str!("../data/months.tsv");
pub const RELATIVE: &str = include_str!("../data/relative_dates.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("no number words")]
    Empty,
    #[error("unknown number word {token:?} at position {position}")]
    UnknownToken { position: usize, token: String },
    #[error("ill-formed number at position {position} ({token:?})")]
    IllFormed { position: usize, token: String },
    #[error("{0} is outside the generator range 0..=9999")]
    OutOfRange(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DateError {
    #[error("impossible calendar date: day {day} of month {month}{}", .year.map(|y| format!(" {y}")).unwrap_or_default())]
    Impossible { year: Option<i32>, month: u32, day: u32 },
    #[error("relative offset {0} outside [-31, 31]")]
    OffsetOutOfRange(i32),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    Zero,
    Unit,
    Teen,
    Ten,
    Hundred,
    Thousand,
}

impl AtomKind {
    fn of(value: u32) -> Option<Self> {
        match value {
            0 => Some(AtomKind::Zero),
            1..=9 => Some(AtomKind::Unit),
            10..=19 => Some(AtomKind::Teen),
            20..=90 if value % 10 == 0 => Some(AtomKind::Ten),
            100 => Some(AtomKind::Hundred),
            1000 => Some(AtomKind::Thousand),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeDateRule {
    /// Folded trigger phrase, tokens separated by single spaces.
    pub phrase: String,
    pub offset_days: i32,
}

impl RelativeDateRule {
    pub fn new(phrase: &str, offset_days: i32) -> Result<Self, DateError> {
        if !(-31..=31).contains(&offset_days) {
            return Err(DateError::OffsetOutOfRange(offset_days));
        }
        Ok(RelativeDateRule {
            phrase: tokens_of(phrase).into_iter().map(|t| t.text).collect::<Vec<_>>().join(" "),
            offset_days,
        })
    }
}

/// Number and month lexicons, relative-date triggers, and the fuzzy-match switch.
#[derive(Clone, Debug)]
pub struct NumeralGrammar {
    atoms: HashMap<String, (u32, AtomKind)>,
    months: HashMap<String, u32>,
    relative: Vec<RelativeDateRule>,
    /// Recover single-character HTR noise in words of length ≥ 4.
    pub fuzzy: bool,
}

fn parse_tsv(src: &str) -> Result<Vec<(String, i64)>, DateError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (word, value) = line.rsplit_once('\t').ok_or_else(|| DateError::Lexicon {
            line: i + 1,
            message: "expected word<TAB>value".into(),
        })?;
        let value: i64 = value.trim().parse().map_err(|_| DateError::Lexicon {
            line: i + 1,
            message: format!("bad value {value:?}"),
        })?;
        out.push((word.trim().to_string(), value));
    }
    Ok(out)
}

impl Default for NumeralGrammar {
    fn default() -> Self {
        NumeralGrammar::from_sources(NUMERALS, MONTHS, RELATIVE).expect("shipped lexicons parse")
    }
}

impl NumeralGrammar {
    pub fn from_sources(numerals: &str, months: &str, relative: &str) -> Result<Self, DateError> {
        let mut atoms = HashMap::new();
        for (w, v) in parse_tsv(numerals)? {
            let v = u32::try_from(v).ok().and_then(|v| AtomKind::of(v).map(|k| (v, k)));
            let Some((v, kind)) = v else {
                return Err(DateError::Lexicon {
                    line: 0,
                    message: format!("{w}: value is not a numeral atom"),
                });
            };
            atoms.insert(fold(&w), (v, kind));
        }
        let mut month_map = HashMap::new();
        for (w, m) in parse_tsv(months)? {
            if !(1..=12).contains(&m) {
                return Err(DateError::Lexicon {
                    line: 0,
                    message: format!("{w}: month {m} outside 1..=12"),
                });
            }
            month_map.insert(fold(&w), m as u32);
        }
        let mut rules = Vec::new();
        for (phrase, off) in parse_tsv(relative)? {
            rules.push(RelativeDateRule::new(&phrase, off as i32)?);
        }
        // longest trigger first so "avant hier" wins over "hier"
        rules.sort_by(|a, b| {
            b.phrase
                .split(' ')
                .count()
                .cmp(&a.phrase.split(' ').count())
                .then_with(|| a.phrase.cmp(&b.phrase))
        });
        Ok(NumeralGrammar {
            atoms,
            months: month_map,
            relative: rules,
            fuzzy: true,
        })
    }

    pub fn strict(mut self) -> Self {
        self.fuzzy = false;
        self
    }

    pub fn number_words(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(String::as_str)
    }

    pub fn month_words(&self) -> impl Iterator<Item = &str> {
        self.months.keys().map(String::as_str)
    }

    pub fn relative_rules(&self) -> &[RelativeDateRule] {
        &self.relative
    }

    fn fuzzy_lookup<'a, V: Copy>(&self, map: &'a HashMap<String, V>, word: &str) -> Option<V> {
        if let Some(v) = map.get(word) {
            return Some(*v);
        }
        if !self.fuzzy || word.chars().count() < 4 || word.chars().any(|c| c.is_ascii_digit()) {
            return None;
        }
        let w: Vec<char> = word.chars().collect();
        let mut hit = None;
        for (k, v) in map {
            let kc: Vec<char> = k.chars().collect();
            if kc.len().abs_diff(w.len()) > 1 {
                continue;
            }
            if edit_distance(&kc, &w) == 1 {
                if hit.is_some() {
                    return None; // ambiguous
                }
                hit = Some((kc.len(), *v));
            }
        }
        hit.filter(|(len, _)| *len >= 4).map(|(_, v)| v)
    }

    fn atom(&self, folded: &str) -> Option<(u32, AtomKind)> {
        self.fuzzy_lookup(&self.atoms, folded)
    }

    fn month(&self, folded: &str) -> Option<u32> {
        self.fuzzy_lookup(&self.months, folded)
    }

    /// Value of a sequence of number words.
    ///
    /// Adjacent units before a scale word multiply (`dix huit cent` = 18·100),
    /// smaller words after larger ones add, `quatre vingt` is 80, and a teen
    /// followed by a ten reads as an English year (`eighteen ninety` = 1890).
    /// A single digit string is accepted on its own.
    pub fn parse_number<S: AsRef<str>>(&self, words: &[S]) -> Result<u64, NumberError> {
        let mut total: u64 = 0;
        let mut current: u64 = 0;
        let mut last: u64 = 0;
        let mut has_hundred = false;
        let mut seen_thousand = false;
        let mut any = false;
        let mut prev_word = String::new();
        let parts: Vec<String> = words
            .iter()
            .flat_map(|w| w.as_ref().split('-').map(fold).collect::<Vec<_>>())
            .filter(|w| !w.is_empty())
            .collect();
        let n_parts = parts.iter().filter(|w| !is_and(w)).count();
        for (position, word) in parts.iter().enumerate() {
            if is_and(word) {
                continue;
            }
            let ill = || NumberError::IllFormed {
                position,
                token: word.clone(),
            };
            if let Some(v) = digit_value(word) {
                if n_parts != 1 {
                    return Err(ill());
                }
                return Ok(v);
            }
            let (v, kind) = self.atom(word).ok_or_else(|| NumberError::UnknownToken {
                position,
                token: word.clone(),
            })?;
            let v64 = u64::from(v);
            match kind {
                AtomKind::Zero => {
                    if n_parts != 1 {
                        return Err(ill());
                    }
                }
                AtomKind::Unit | AtomKind::Teen | AtomKind::Ten => {
                    if v == 20 && last == 4 && self.atom(&prev_word).map(|a| a.0) == Some(4) {
                        current = current - 4 + 80;
                        last = 80;
                    } else if kind == AtomKind::Ten && (10..=19).contains(&last) && !has_hundred && current < 100 {
                        current = current * 100 + v64;
                        last = v64;
                        has_hundred = true;
                    } else {
                        let allowed = match last {
                            0 => true,
                            10 => kind == AtomKind::Unit,
                            l if l % 10 == 0 && l >= 20 => v < 20,
                            _ => false,
                        };
                        if !allowed {
                            return Err(ill());
                        }
                        current += v64;
                        last = v64;
                    }
                }
                AtomKind::Hundred => {
                    let mult = if current == 0 { 1 } else { current };
                    if has_hundred || mult >= 100 || (seen_thousand && mult >= 10) {
                        return Err(ill());
                    }
                    current = mult * 100;
                    has_hundred = true;
                    last = 0;
                }
                AtomKind::Thousand => {
                    if seen_thousand {
                        return Err(ill());
                    }
                    let mult = if current == 0 { 1 } else { current };
                    total = mult * 1000;
                    current = 0;
                    last = 0;
                    has_hundred = false;
                    seen_thousand = true;
                }
            }
            any = true;
            prev_word = word.clone();
        }
        if !any {
            return Err(NumberError::Empty);
        }
        Ok(total + current)
    }

    /// Parses a free-text date. With no explicit month-bearing date and a
    /// relative trigger present, a complete `anchor` is shifted by the trigger offset.
    pub fn parse_date(&self, text: &str, anchor: Option<&StructuredDate>) -> Result<DateParse, DateError> {
        let toks = tokens_of(text);
        let found = self.scan(&toks);
        let conflicting_years = {
            let mut years = found.iter().filter_map(|d| d.year);
            match years.next() {
                Some(y) => years.any(|o| o != y),
                None => false,
            }
        };
        if let Some(first) = found.into_iter().next() {
            check_calendar(&first)?;
            return Ok(DateParse {
                date: first,
                conflicting_years,
            });
        }
        let folded: Vec<String> = toks.iter().map(|t| t.text.clone()).collect();
        if let Some(rule) = self.relative.iter().find(|r| contains_phrase(&folded, &r.phrase)) {
            let mut date = match anchor.and_then(|a| a.to_naive()) {
                Some(base) => {
                    let shifted = base + chrono::Duration::days(i64::from(rule.offset_days));
                    use chrono::Datelike;
                    StructuredDate::ymd(shifted.year(), shifted.month(), shifted.day())
                }
                None => StructuredDate::default(),
            };
            date.relative_anchor = Some("record_date".into());
            return Ok(DateParse {
                date,
                conflicting_years: false,
            });
        }
        // bare year, e.g. "mil neuf cent"
        let year = self
            .groups(&toks)
            .into_iter()
            .filter_map(|item| match item {
                Item::Number(v) if (1000..=2999).contains(&v) => Some(v as i32),
                _ => None,
            })
            .next();
        Ok(DateParse {
            date: StructuredDate::new(year, None, None),
            conflicting_years: false,
        })
    }

    /// Every month-bearing date in `text`, in reading order. Segments are disjoint.
    pub fn extract_dates(&self, text: &str) -> Vec<StructuredDate> {
        self.scan(&tokens_of(text))
    }

    fn groups(&self, toks: &[Token]) -> Vec<Item> {
        let mut items = Vec::new();
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, items: &mut Vec<Item>| {
            while run.last().is_some_and(|w| is_and(w)) {
                run.pop();
            }
            if !run.is_empty() {
                match self.parse_number(run) {
                    Ok(v) => items.push(Item::Number(v)),
                    Err(_) => items.push(Item::Break),
                }
                run.clear();
            }
        };
        for t in toks {
            let w = t.text.as_str();
            if digit_value(w).is_some() {
                flush(&mut run, &mut items);
                items.push(Item::Number(digit_value(w).unwrap()));
            } else if let Some(m) = self.months.get(w).copied() {
                flush(&mut run, &mut items);
                items.push(Item::Month(m));
            } else if self.atoms.contains_key(w) || (is_and(w) && !run.is_empty()) {
                run.push(w.to_string());
            } else if is_connector(w) {
                flush(&mut run, &mut items);
                items.push(Item::Connector);
            } else if let Some(m) = self.month(w) {
                flush(&mut run, &mut items);
                items.push(Item::Month(m));
            } else if self.atom(w).is_some() {
                run.push(w.to_string());
            } else {
                flush(&mut run, &mut items);
                items.push(Item::Break);
            }
            if t.boundary_after {
                flush(&mut run, &mut items);
                items.push(Item::Comma);
            }
        }
        flush(&mut run, &mut items);
        items
    }

    fn scan(&self, toks: &[Token]) -> Vec<StructuredDate> {
        let items = self.groups(toks);
        // indices of meaningful items; connectors and commas are transparent
        let sig: Vec<(usize, &Item)> = items
            .iter()
            .enumerate()
            .filter(|(_, it)| !matches!(it, Item::Connector | Item::Comma))
            .collect();
        let mut used = vec![false; sig.len()];
        let mut out = Vec::new();
        for k in 0..sig.len() {
            let Item::Month(month) = sig[k].1 else { continue };
            let number_at = |i: usize, used: &[bool]| match sig.get(i) {
                Some((_, Item::Number(v))) if !used[i] => Some(*v),
                _ => None,
            };
            let mut day = None;
            if k > 0 {
                if let Some(v) = number_at(k - 1, &used) {
                    if (1..=31).contains(&v) {
                        day = Some(v as u32);
                        used[k - 1] = true;
                    }
                }
            }
            used[k] = true;
            let mut year = None;
            let mut next = k + 1;
            if let Some(v) = number_at(next, &used) {
                if day.is_none() && (1..=31).contains(&v) {
                    day = Some(v as u32);
                    used[next] = true;
                    next += 1;
                }
            }
            if let Some(v) = number_at(next, &used) {
                if v >= 32 && v <= i32::MAX as u64 {
                    year = Some(v as i32);
                    used[next] = true;
                }
            }
            let mut d = StructuredDate::new(year, Some(*month), day);
            d.complete = d.complete && d.year.is_some();
            out.push(d);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Item {
    Number(u64),
    Month(u32),
    Connector,
    Comma,
    Break,
}

/// Result of parsing a date phrase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DateParse {
    pub date: StructuredDate,
    /// Two different years were written in the same phrase: likely two merged acts.
    pub conflicting_years: bool,
}

fn check_calendar(d: &StructuredDate) -> Result<(), DateError> {
    if let (Some(m), Some(day)) = (d.month, d.day) {
        let max = match d.year {
            Some(y) => days_in_month(y, m),
            None if m == 2 => 29,
            None => days_in_month(2000, m),
        };
        if day == 0 || day > max {
            return Err(DateError::Impossible {
                year: d.year,
                month: m,
                day,
            });
        }
    }
    Ok(())
}

pub fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

fn is_and(w: &str) -> bool {
    w == "et" || w == "and"
}

fn is_connector(w: &str) -> bool {
    matches!(
        w,
        "le" | "de" | "du" | "l" | "an" | "annee" | "mois" | "jour" | "the" | "of" | "in" | "year" | "day"
    )
}

/// Digit strings, optionally with an ordinal suffix (`1er`, `3rd`, `21st`).
fn digit_value(w: &str) -> Option<u64> {
    let digits: String = w.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() || digits.len() > 9 {
        return None;
    }
    let rest = &w[digits.len()..];
    if matches!(rest, "" | "er" | "e" | "eme" | "st" | "nd" | "rd" | "th") {
        digits.parse().ok()
    } else {
        None
    }
}

#[derive(Clone, Debug)]
struct Token {
    text: String,
    boundary_after: bool,
}

/// Folded tokens; apostrophes and whitespace separate, hyphens join number
/// compounds and are split later, sentence punctuation marks a boundary.
fn tokens_of(text: &str) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    for raw in text.split_whitespace() {
        let boundary = raw.ends_with([',', ';', '.', ':']);
        let pieces: Vec<&str> = raw
            .split(|c: char| !(c.is_alphanumeric() || c == '-'))
            .filter(|p| !p.is_empty())
            .collect();
        let mut produced = false;
        for piece in pieces {
            for sub in piece.split('-').filter(|s| !s.is_empty()) {
                out.push(Token {
                    text: fold(sub),
                    boundary_after: false,
                });
                produced = true;
            }
        }
        if boundary && produced {
            out.last_mut().unwrap().boundary_after = true;
        }
    }
    out
}

const UNITS: [&str; 17] = [
    "zéro", "un", "deux", "trois", "quatre", "cinq", "six", "sept", "huit", "neuf", "dix", "onze", "douze",
    "treize", "quatorze", "quinze", "seize",
];
const TENS: [&str; 7] = ["", "", "vingt", "trente", "quarante", "cinquante", "soixante"];

fn below_hundred(n: u64) -> String {
    match n {
        0..=16 => UNITS[n as usize].to_string(),
        17..=19 => format!("dix-{}", UNITS[(n - 10) as usize]),
        20..=69 => {
            let (t, u) = (n / 10, n % 10);
            match u {
                0 => TENS[t as usize].to_string(),
                1 => format!("{}-et-un", TENS[t as usize]),
                _ => format!("{}-{}", TENS[t as usize], UNITS[u as usize]),
            }
        }
        70..=79 => {
            if n == 71 {
                "soixante-et-onze".into()
            } else {
                format!("soixante-{}", below_hundred(n - 60))
            }
        }
        80 => "quatre-vingt".into(),
        _ => format!("quatre-vingt-{}", below_hundred(n - 80)),
    }
}

fn below_thousand(n: u64) -> String {
    let (h, rest) = (n / 100, n % 100);
    let mut parts = Vec::new();
    match h {
        0 => {}
        1 => parts.push("cent".to_string()),
        _ => parts.push(format!("{} cent", UNITS[h as usize])),
    }
    if rest > 0 || h == 0 {
        parts.push(below_hundred(rest));
    }
    parts.join(" ")
}

/// Canonical French spelling of `n` in register style ("mil" for thousands).
pub fn generate_number(n: u64) -> Result<String, NumberError> {
    if n > 9999 {
        return Err(NumberError::OutOfRange(n));
    }
    let (th, rest) = (n / 1000, n % 1000);
    let mut parts = Vec::new();
    match th {
        0 => {}
        1 => parts.push("mil".to_string()),
        _ => parts.push(format!("{} mil", UNITS[th as usize])),
    }
    if rest > 0 || th == 0 {
        parts.push(below_thousand(rest));
    }
    Ok(parts.join(" "))
}

/// French month names, January first.
pub const FRENCH_MONTHS: [&str; 12] = [
    "janvier", "février", "mars", "avril", "mai", "juin", "juillet", "août", "septembre", "octobre", "novembre",
    "décembre",
];

/// Register-style written date, e.g. "le premier mars mil neuf cent".
pub fn write_french_date(year: i32, month: u32, day: u32) -> String {
    let day_words = if day == 1 {
        "premier".to_string()
    } else {
        generate_number(u64::from(day)).expect("day in range")
    };
    format!(
        "le {} {} {}",
        day_words,
        FRENCH_MONTHS[(month - 1) as usize],
        generate_number(year as u64).expect("year in range")
    )
}
