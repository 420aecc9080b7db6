//! Person names: first/last splitting with a frequency thesaurus, and
//! correction of HTR noise by visual edit cost over a Levenshtein candidate pool.
//!
//! Visual costs are fixed-point integers (`COST_SCALE` units per 1.0) so the
//! best-first search and the dynamic-programming reference agree exactly.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::domain::{ActType, PersonName, Role};
use crate::error::{Error, Result};
use crate::metrics::edit_distance;
use crate::text::{fold, lower_nfc};

pub const COST_SCALE: u64 = 1_000_000;

const SAMPLE_THESAURUS: &str = include_str!("../data/thesaurus_sample.tsv");
const DEFAULT_COSTS: &str = include_str!("../data/visual_costs.tsv");

fn data_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThesaurusEntry {
    pub name: String,
    pub count_first: u64,
    pub count_last: u64,
    pub class_id: Option<String>,
}

impl ThesaurusEntry {
    /// Share of first-name uses; `None` when both counts are zero.
    pub fn p_first(&self) -> Option<f64> {
        let total = self.count_first + self.count_last;
        (total > 0).then(|| self.count_first as f64 / total as f64)
    }
}

#[derive(Clone, Debug, Default)]
pub struct NameThesaurus {
    entries: BTreeMap<String, ThesaurusEntry>,
    by_folded: HashMap<String, Vec<String>>,
    classes: HashMap<String, Vec<String>>,
}

impl NameThesaurus {
    /// The shipped sample. Its counts are placeholders.
    pub fn sample() -> Self {
        NameThesaurus::parse(SAMPLE_THESAURUS).expect("shipped thesaurus parses")
    }

    /// TSV rows `name<TAB>count_first<TAB>count_last<TAB>variant_class_id`; the class may be empty.
    pub fn parse(src: &str) -> Result<Self> {
        let mut t = NameThesaurus::default();
        for (n, line) in data_lines(src) {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 || cols.len() > 4 {
                return Err(Error::Parse {
                    line: n,
                    column: 1,
                    message: "expected name, count_first, count_last[, class]".into(),
                });
            }
            let count = |s: &str, col: usize| {
                s.trim().parse::<u64>().map_err(|_| Error::Parse {
                    line: n,
                    column: col,
                    message: format!("bad count {s:?}"),
                })
            };
            let class_id = cols.get(3).map(|c| c.trim()).filter(|c| !c.is_empty()).map(str::to_string);
            t.insert(ThesaurusEntry {
                name: cols[0].trim().to_string(),
                count_first: count(cols[1], 2)?,
                count_last: count(cols[2], 3)?,
                class_id,
            });
        }
        Ok(t)
    }

    pub fn insert(&mut self, e: ThesaurusEntry) {
        if let Some(old) = self.entries.get(&e.name) {
            if let Some(c) = &old.class_id {
                if let Some(members) = self.classes.get_mut(c) {
                    members.retain(|m| m != &e.name);
                }
            }
        } else {
            self.by_folded.entry(fold(&e.name)).or_default().push(e.name.clone());
        }
        if let Some(c) = &e.class_id {
            self.classes.entry(c.clone()).or_default().push(e.name.clone());
        }
        self.entries.insert(e.name.clone(), e);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Exact spelling first, then the first entry with the same folded form.
    pub fn get(&self, name: &str) -> Option<&ThesaurusEntry> {
        self.entries.get(name).or_else(|| {
            self.by_folded
                .get(&fold(name))
                .and_then(|v| v.iter().min())
                .and_then(|n| self.entries.get(n))
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn p_first(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(ThesaurusEntry::p_first)
    }

    pub fn variant_class(&self, name: &str) -> Option<&[String]> {
        let c = self.get(name)?.class_id.as_ref()?;
        self.classes.get(c).map(Vec::as_slice)
    }
}

/// Substitution costs for visually confusable character groups.
#[derive(Clone, Debug)]
pub struct VisualCostTable {
    single: HashMap<(char, char), u64>,
    groups: Vec<(Vec<char>, Vec<char>, u64)>,
}

impl Default for VisualCostTable {
    fn default() -> Self {
        VisualCostTable::parse(DEFAULT_COSTS).expect("shipped cost table parses")
    }
}

impl VisualCostTable {
    /// An empty table: plain Levenshtein distance.
    pub fn unit() -> Self {
        VisualCostTable {
            single: HashMap::new(),
            groups: Vec::new(),
        }
    }

    /// TSV rows `a<TAB>b<TAB>cost` with cost in `[0, 1]`; pairs are made symmetric.
    pub fn parse(src: &str) -> Result<Self> {
        let mut t = VisualCostTable::unit();
        for (n, line) in data_lines(src) {
            let cols: Vec<&str> = line.split('\t').collect();
            let err = |m: String| Error::Parse { line: n, column: 1, message: m };
            if cols.len() != 3 {
                return Err(err("expected a, b, cost".into()));
            }
            let cost: f64 = cols[2].trim().parse().map_err(|_| err(format!("bad cost {:?}", cols[2])))?;
            t.add(cols[0].trim(), cols[1].trim(), cost).map_err(|e| err(e.to_string()))?;
        }
        Ok(t)
    }

    pub fn add(&mut self, a: &str, b: &str, cost: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&cost) {
            return Err(Error::Config(format!("cost {cost} outside [0, 1]")));
        }
        let (a, b): (Vec<char>, Vec<char>) = (lower_nfc(a).chars().collect(), lower_nfc(b).chars().collect());
        if a.is_empty() || b.is_empty() || a == b {
            return Err(Error::Config("cost pairs need two different non-empty groups".into()));
        }
        let c = (cost * COST_SCALE as f64).round() as u64;
        if a.len() == 1 && b.len() == 1 {
            for key in [(a[0], b[0]), (b[0], a[0])] {
                let e = self.single.entry(key).or_insert(c);
                *e = (*e).min(c);
            }
        } else {
            self.groups.push((a.clone(), b.clone(), c));
            self.groups.push((b, a, c));
        }
        Ok(())
    }

    pub fn substitution(&self, a: char, b: char) -> u64 {
        if a == b {
            0
        } else {
            self.single.get(&(a, b)).copied().unwrap_or(COST_SCALE)
        }
    }

    /// Lowest cost per unit of length change over all operations.
    fn unit_length_cost(&self) -> u64 {
        self.groups
            .iter()
            .filter(|(a, b, _)| a.len() != b.len())
            .map(|(a, b, c)| c / a.len().abs_diff(b.len()) as u64)
            .fold(COST_SCALE, u64::min)
    }
}

fn chars_of(s: &str) -> Vec<char> {
    lower_nfc(s).chars().collect()
}

/// Minimal weighted edit distance (fixed-point) by dynamic programming.
pub fn visual_distance(a: &str, b: &str, costs: &VisualCostTable) -> u64 {
    let (a, b) = (chars_of(a), chars_of(b));
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![u64::MAX; m + 1]; n + 1];
    dp[0][0] = 0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = u64::MAX;
            if i > 0 {
                best = best.min(dp[i - 1][j] + COST_SCALE);
            }
            if j > 0 {
                best = best.min(dp[i][j - 1] + COST_SCALE);
            }
            if i > 0 && j > 0 {
                best = best.min(dp[i - 1][j - 1] + costs.substitution(a[i - 1], b[j - 1]));
            }
            for (x, y, c) in &costs.groups {
                if i >= x.len() && j >= y.len() && a[i - x.len()..i] == x[..] && b[j - y.len()..j] == y[..] {
                    best = best.min(dp[i - x.len()][j - y.len()] + c);
                }
            }
            dp[i][j] = best;
        }
    }
    dp[n][m]
}

pub fn to_score(cost: u64) -> f64 {
    cost as f64 / COST_SCALE as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    /// Every candidate at the minimal visual cost, by name.
    pub best: Vec<(String, f64)>,
    pub accepted: bool,
    pub radius_used: usize,
}

impl CorrectionResult {
    pub fn ambiguous(&self) -> bool {
        self.best.len() > 1
    }
}

/// Thesaurus names within unit Levenshtein distance `radius` of `name`,
/// compared case- and accent-insensitively.
pub fn candidate_pool(name: &str, thesaurus: &NameThesaurus, radius: usize) -> BTreeSet<String> {
    let q: Vec<char> = fold(name).chars().collect();
    thesaurus
        .names()
        .filter(|cand| {
            let c: Vec<char> = fold(cand).chars().collect();
            c.len().abs_diff(q.len()) <= radius && edit_distance(&q, &c) <= radius
        })
        .map(str::to_string)
        .collect()
}

/// Best-first search for the candidates of minimal visual cost.
///
/// All candidates are searched together over states `(candidate, i, j)`;
/// the heuristic charges the remaining length difference at the cheapest
/// per-character rate, so it never overestimates.
pub fn correct_name<S: AsRef<str>>(
    name: &str,
    pool: &[S],
    costs: &VisualCostTable,
    accept_threshold: f64,
    radius_used: usize,
) -> CorrectionResult {
    let a = chars_of(name);
    let cands: Vec<Vec<char>> = pool.iter().map(|c| chars_of(c.as_ref())).collect();
    let unit = costs.unit_length_cost();
    let h = |c: usize, i: usize, j: usize| ((a.len() - i).abs_diff(cands[c].len() - j)) as u64 * unit;
    let mut heap = BinaryHeap::new();
    let mut seen: HashMap<(usize, usize, usize), u64> = HashMap::new();
    for c in 0..cands.len() {
        heap.push(Reverse((h(c, 0, 0), 0u64, c, 0usize, 0usize)));
        seen.insert((c, 0, 0), 0);
    }
    let mut best_cost = None;
    let mut winners = BTreeSet::new();
    while let Some(Reverse((f, g, c, i, j))) = heap.pop() {
        if best_cost.is_some_and(|b| f > b) {
            break;
        }
        if seen.get(&(c, i, j)).is_some_and(|&s| s < g) {
            continue;
        }
        let b = &cands[c];
        if i == a.len() && j == b.len() {
            best_cost.get_or_insert(g);
            winners.insert(c);
            continue;
        }
        let mut push = |ni: usize, nj: usize, step: u64| {
            let ng = g + step;
            if seen.get(&(c, ni, nj)).map_or(true, |&s| ng < s) {
                seen.insert((c, ni, nj), ng);
                heap.push(Reverse((ng + h(c, ni, nj), ng, c, ni, nj)));
            }
        };
        if i < a.len() {
            push(i + 1, j, COST_SCALE);
        }
        if j < b.len() {
            push(i, j + 1, COST_SCALE);
        }
        if i < a.len() && j < b.len() {
            push(i + 1, j + 1, costs.substitution(a[i], b[j]));
        }
        for (x, y, gc) in &costs.groups {
            if a[i..].starts_with(x) && b[j..].starts_with(y) {
                push(i + x.len(), j + y.len(), *gc);
            }
        }
    }
    let score = best_cost.map(to_score);
    let mut best: Vec<(String, f64)> = winners
        .into_iter()
        .map(|c| (pool[c].as_ref().to_string(), score.unwrap()))
        .collect();
    best.sort_by(|x, y| x.0.cmp(&y.0));
    best.dedup_by(|x, y| x.0 == y.0);
    CorrectionResult {
        accepted: score.is_some_and(|s| s <= accept_threshold),
        best,
        radius_used,
    }
}

/// Every pool member with its visual cost, cheapest first.
pub fn rank_pool<S: AsRef<str>>(name: &str, pool: &[S], costs: &VisualCostTable) -> Vec<(String, f64)> {
    let mut v: Vec<(String, u64)> = pool
        .iter()
        .map(|c| (c.as_ref().to_string(), visual_distance(name, c.as_ref(), costs)))
        .collect();
    v.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
    v.into_iter().map(|(n, c)| (n, to_score(c))).collect()
}

/// Representative of the name's variant class: the member that sorts first
/// by folded spelling, with the accented spelling winning a fold tie.
/// Unknown names come back unchanged.
pub fn canonicalize_variant(name: &str, thesaurus: &NameThesaurus) -> String {
    match thesaurus.variant_class(name) {
        Some(members) if !members.is_empty() => members
            .iter()
            .min_by(|a, b| fold(a).cmp(&fold(b)).then_with(|| b.cmp(a)))
            .cloned()
            .unwrap(),
        _ => name.to_string(),
    }
}

/// Whitespace tokens with hyphenated compounds kept whole. A word cut by a
/// line-break hyphen is rejoined unless the continuation starts a capital.
pub fn name_tokens(raw: &str) -> Vec<String> {
    let mut s = String::new();
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '-' || c == '¬' {
            let mut ws = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_whitespace() {
                    ws.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            if ws.contains('\n') {
                match chars.peek() {
                    Some(n) if n.is_uppercase() => s.push('-'),
                    _ => {}
                }
            } else {
                s.push(if c == '¬' { '-' } else { c });
                s.push_str(&ws);
            }
        } else {
            s.push(c);
        }
    }
    s.split_whitespace()
        .map(|t| t.trim_matches(|c: char| matches!(c, ',' | ';' | '.' | ':')))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn token_p_first(token: &str, th: &NameThesaurus) -> Option<f64> {
    th.p_first(token)
        .or_else(|| token.split('-').next().and_then(|p| th.p_first(p)))
}

/// Assigns tokens to first and last names.
pub fn split_tokens(tokens: &[String], th: &NameThesaurus, act_type: ActType, role: Role) -> PersonName {
    let mut out = PersonName::default();
    if tokens.is_empty() {
        return out;
    }
    if role == Role::SubjectName && act_type == ActType::Birth {
        out.first_names = tokens.to_vec();
        return out;
    }
    if role == Role::SubjectName && act_type == ActType::Death && tokens.len() > 1 {
        // exactly one last name: the later token least likely to be a first name
        let last = (1..tokens.len())
            .min_by(|&x, &y| {
                let px = token_p_first(&tokens[x], th).unwrap_or(0.0);
                let py = token_p_first(&tokens[y], th).unwrap_or(0.0);
                px.partial_cmp(&py).unwrap().then(y.cmp(&x))
            })
            .unwrap();
        for (i, t) in tokens.iter().enumerate() {
            if i == last {
                out.last_names.push(t.clone());
            } else {
                out.first_names.push(t.clone());
            }
        }
        return out;
    }
    out.first_names.push(tokens[0].clone());
    for t in &tokens[1..] {
        if token_p_first(t, th).unwrap_or(0.0) >= 0.5 {
            out.first_names.push(t.clone());
        } else {
            out.last_names.push(t.clone());
        }
    }
    out
}

pub fn split_name(raw: &str, th: &NameThesaurus, act_type: ActType, role: Role) -> PersonName {
    split_tokens(&name_tokens(raw), th, act_type, role)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NameConfig {
    pub radius: usize,
    pub accept_threshold: f64,
    /// Try to correct every token absent from the thesaurus.
    pub correct_unknown: bool,
    /// Replace names by their variant-class representative.
    pub canonicalize: bool,
}

impl Default for NameConfig {
    fn default() -> Self {
        NameConfig {
            radius: 2,
            accept_threshold: 1.0,
            correct_unknown: true,
            canonicalize: false,
        }
    }
}

/// Everything name standardization needs, loaded once and shared.
#[derive(Clone, Debug)]
pub struct NameStandardizer {
    pub thesaurus: NameThesaurus,
    pub costs: VisualCostTable,
    pub config: NameConfig,
}

impl Default for NameStandardizer {
    fn default() -> Self {
        NameStandardizer {
            thesaurus: NameThesaurus::sample(),
            costs: VisualCostTable::default(),
            config: NameConfig::default(),
        }
    }
}

impl NameStandardizer {
    pub fn correct(&self, token: &str) -> CorrectionResult {
        let pool: Vec<String> = candidate_pool(token, &self.thesaurus, self.config.radius).into_iter().collect();
        correct_name(token, &pool, &self.costs, self.config.accept_threshold, self.config.radius)
    }

    /// Corrects unknown tokens (hyphenated parts separately), then splits.
    /// A correction is applied only when it is accepted and unambiguous;
    /// otherwise the candidates are kept for review.
    pub fn standardize(&self, raw: &str, act_type: ActType, role: Role) -> PersonName {
        let mut corrected = false;
        let mut candidates = Vec::new();
        let tokens: Vec<String> = name_tokens(raw)
            .into_iter()
            .map(|tok| {
                let parts: Vec<String> = tok
                    .split('-')
                    .map(|part| {
                        if !self.config.correct_unknown || part.is_empty() || self.thesaurus.contains(part) {
                            return part.to_string();
                        }
                        let r = self.correct(part);
                        candidates.extend(r.best.iter().cloned());
                        if r.accepted && r.best.len() == 1 {
                            corrected |= r.best[0].0 != part;
                            r.best[0].0.clone()
                        } else {
                            part.to_string()
                        }
                    })
                    .collect();
                let joined = parts.join("-");
                if self.config.canonicalize {
                    canonicalize_variant(&joined, &self.thesaurus)
                } else {
                    joined
                }
            })
            .collect();
        let mut name = split_tokens(&tokens, &self.thesaurus, act_type, role);
        name.corrected = corrected;
        name.correction_candidates = candidates;
        name
    }
}
