//! From detected fragments to acts: date-line marking, the layout gate for
//! irregular zones, and the cross-page merge of `start`/`center`/`end` parts.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dates::NumeralGrammar;
use crate::domain::{Act, ActClass, ActFragment, PageClass, RecognizedPage, TextLine};
use crate::error::{Error, Result};
use crate::text::fold;

pub const DEFAULT_DATE_WORDS: usize = 3;

/// Folded number and month words.
#[derive(Clone, Debug, Default)]
pub struct DateLexicon {
    pub number_words: HashSet<String>,
    pub month_words: HashSet<String>,
}

impl DateLexicon {
    pub fn from_grammar(g: &NumeralGrammar) -> Self {
        DateLexicon {
            number_words: g.number_words().map(fold).collect(),
            month_words: g.month_words().map(fold).collect(),
        }
    }

    pub fn from_lists<I, J, S, U>(numbers: I, months: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = U>,
        S: AsRef<str>,
        U: AsRef<str>,
    {
        DateLexicon {
            number_words: numbers.into_iter().map(|w| fold(w.as_ref())).collect(),
            month_words: months.into_iter().map(|w| fold(w.as_ref())).collect(),
        }
    }

    /// A whitespace token counts when, stripped of edge punctuation, it is a
    /// digit string or every hyphen-separated part is a lexicon word.
    pub fn is_date_token(&self, token: &str) -> bool {
        let t = fold(token.trim_matches(|c: char| !c.is_alphanumeric()));
        if t.is_empty() {
            return false;
        }
        if t.chars().all(|c| c.is_ascii_digit()) {
            return true;
        }
        t.split('-')
            .all(|p| !p.is_empty() && (self.number_words.contains(p) || self.month_words.contains(p)))
    }

    pub fn date_word_count(&self, text: &str) -> usize {
        text.split_whitespace().filter(|t| self.is_date_token(t)).count()
    }
}

pub fn is_date_line(line: &TextLine, lex: &DateLexicon, k: usize) -> bool {
    lex.date_word_count(&line.text) >= k.max(1)
}

/// Sets `is_date_line` on every line of the page.
pub fn mark_date_lines(page: &mut RecognizedPage, lex: &DateLexicon, k: usize) {
    for line in &mut page.lines {
        line.is_date_line = Some(is_date_line(line, lex, k));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutGate {
    pub min_lines: usize,
    pub max_lines: usize,
    pub min_area_ratio: f64,
    pub max_area_ratio: f64,
}

impl Default for LayoutGate {
    fn default() -> Self {
        LayoutGate {
            min_lines: 2,
            max_lines: 80,
            min_area_ratio: 0.02,
            max_area_ratio: 0.98,
        }
    }
}

impl LayoutGate {
    pub fn new(min_lines: usize, max_lines: usize, min_area_ratio: f64, max_area_ratio: f64) -> Result<Self> {
        let g = LayoutGate {
            min_lines,
            max_lines,
            min_area_ratio,
            max_area_ratio,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if self.min_lines >= self.max_lines {
            return Err(Error::Config(format!(
                "layout gate: min_lines {} must be below max_lines {}",
                self.min_lines, self.max_lines
            )));
        }
        if !(0.0..=1.0).contains(&self.min_area_ratio)
            || !(0.0..=1.0).contains(&self.max_area_ratio)
            || self.min_area_ratio >= self.max_area_ratio
        {
            return Err(Error::Config(format!(
                "layout gate: area ratios [{}, {}] must be increasing within [0, 1]",
                self.min_area_ratio, self.max_area_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "bound", rename_all = "snake_case")]
pub enum GateDecision {
    Keep,
    RejectIrregular(String),
}

/// Checks line count and bounding-box area share against the gate.
pub fn gate_fragment(frag: &ActFragment, page: &RecognizedPage, gate: &LayoutGate) -> GateDecision {
    let n = frag.line_ids.len();
    if n < gate.min_lines {
        return GateDecision::RejectIrregular(format!("{n} lines < min_lines {}", gate.min_lines));
    }
    if n > gate.max_lines {
        return GateDecision::RejectIrregular(format!("{n} lines > max_lines {}", gate.max_lines));
    }
    let page_area = (page.width as f64) * (page.height as f64);
    let ratio = match frag.polygon.bbox() {
        Some((x0, y0, x1, y1)) if page_area > 0.0 => ((x1 - x0) as f64 * (y1 - y0) as f64) / page_area,
        _ => 0.0,
    };
    if ratio < gate.min_area_ratio {
        return GateDecision::RejectIrregular(format!("area ratio {ratio:.4} < min_area_ratio {}", gate.min_area_ratio));
    }
    if ratio > gate.max_area_ratio {
        return GateDecision::RejectIrregular(format!("area ratio {ratio:.4} > max_area_ratio {}", gate.max_area_ratio));
    }
    GateDecision::Keep
}

/// Fragments of all pages in reading order: page order, then `sequence_index`.
pub fn linearize(pages: &[RecognizedPage]) -> Vec<ActFragment> {
    pages
        .iter()
        .flat_map(|p| {
            let mut f = p.fragments.clone();
            f.sort_by_key(|f| f.sequence_index);
            f
        })
        .collect()
}

/// Groups a linear fragment sequence. Each group is `(fragments, orphan)`.
///
/// One act is open at a time: `start` opens it (closing a previous open act
/// as an orphan), `center` extends it, `end` closes it. A `full` fragment is
/// its own act. `center` and `end` with nothing open stand alone as orphans.
pub fn group_fragments(seq: Vec<ActFragment>) -> Vec<(Vec<ActFragment>, bool)> {
    let mut out = Vec::new();
    let mut open: Option<Vec<ActFragment>> = None;
    for f in seq {
        match f.act_class {
            ActClass::Full => {
                if let Some(o) = open.take() {
                    out.push((o, true));
                }
                out.push((vec![f], false));
            }
            ActClass::Start => {
                if let Some(o) = open.replace(vec![f]) {
                    out.push((o, true));
                }
            }
            ActClass::Center => match open.as_mut() {
                Some(o) => o.push(f),
                None => out.push((vec![f], true)),
            },
            ActClass::End => match open.take() {
                Some(mut o) => {
                    o.push(f);
                    out.push((o, false));
                }
                None => out.push((vec![f], true)),
            },
        }
    }
    if let Some(o) = open {
        out.push((o, true));
    }
    out
}

pub fn act_id(register_id: &str, index: usize) -> String {
    format!("{register_id}-act{index:05}")
}

/// Builds the acts of one register. Fragments rejected by `gate` leave the
/// matching stream and become single-fragment acts carrying the reason.
pub fn merge_fragments(pages: &[RecognizedPage], gate: Option<&LayoutGate>) -> Vec<Act> {
    let refs: Vec<&RecognizedPage> = pages.iter().collect();
    let register = pages.first().map(|p| p.register_id.as_str()).unwrap_or("register");
    let seq = linearize(pages);
    let position: HashMap<&str, usize> = seq.iter().enumerate().map(|(i, f)| (f.fragment_id.as_str(), i)).collect();
    let mut stream = Vec::new();
    let mut groups: Vec<(Vec<ActFragment>, bool, Option<String>)> = Vec::new();
    for f in &seq {
        let page = pages.iter().find(|p| p.page_id == f.page_id);
        match (gate, page) {
            (Some(g), Some(p)) => match gate_fragment(f, p, g) {
                GateDecision::Keep => stream.push(f.clone()),
                GateDecision::RejectIrregular(reason) => groups.push((vec![f.clone()], false, Some(reason))),
            },
            _ => stream.push(f.clone()),
        }
    }
    groups.extend(group_fragments(stream).into_iter().map(|(g, o)| (g, o, None)));
    groups.sort_by_key(|g| position[g.0[0].fragment_id.as_str()]);
    groups
        .into_iter()
        .enumerate()
        .map(|(i, (frags, orphan, reason))| {
            let mut act = Act::assemble(act_id(register, i + 1), frags, &refs);
            act.orphan = orphan;
            act.rejected = reason.map(|r| format!("irregular layout: {r}"));
            act.on_no_act_page = act.fragments.iter().any(|f| {
                pages
                    .iter()
                    .any(|p| p.page_id == f.page_id && p.page_class == PageClass::NoAct)
            });
            act
        })
        .collect()
}

/// Text of one fragment's lines, joined with `\n`.
pub fn fragment_text(frag: &ActFragment, pages: &[RecognizedPage]) -> String {
    let Some(page) = pages.iter().find(|p| p.page_id == frag.page_id) else {
        return String::new();
    };
    frag.line_ids
        .iter()
        .filter_map(|id| page.line(id).map(|l| l.text.as_str()))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Polygon;

    fn lex() -> DateLexicon {
        DateLexicon::from_grammar(&NumeralGrammar::default())
    }

    fn line(text: &str) -> TextLine {
        TextLine::new("l", Polygon::rect(0, 0, 10, 10), text)
    }

    #[test]
    fn date_lines() {
        assert!(is_date_line(&line("Le trente et un janvier, mil neuf"), &lex(), 3));
        assert!(!is_date_line(&line(""), &lex(), 3));
        assert!(!is_date_line(&line("Jean Tremblay cultivateur"), &lex(), 3));
        assert!(is_date_line(&line("le 12 mars 1900"), &lex(), 3));
        assert!(is_date_line(&line("quatre-vingt-dix DÉCEMBRE deux"), &lex(), 3));
    }

    fn frag(id: &str, page: &str, class: ActClass, seq: i64, lines: usize, poly: Polygon) -> ActFragment {
        ActFragment {
            fragment_id: id.into(),
            page_id: page.into(),
            act_class: class,
            polygon: poly,
            line_ids: (0..lines).map(|i| format!("{id}.{i}")).collect(),
            sequence_index: seq,
        }
    }

    #[test]
    fn gate_bounds() {
        let page = RecognizedPage::new("p", "r", 1000, 1000);
        let g = LayoutGate::default();
        let one = frag("a", "p", ActClass::Full, 0, 1, Polygon::rect(0, 0, 500, 600));
        assert!(matches!(gate_fragment(&one, &page, &g), GateDecision::RejectIrregular(_)));
        let ok = frag("b", "p", ActClass::Full, 0, 8, Polygon::rect(0, 0, 500, 600));
        assert_eq!(gate_fragment(&ok, &page, &g), GateDecision::Keep);
        let big = frag("c", "p", ActClass::Full, 0, 8, Polygon::rect(0, 0, 1000, 995));
        let tight = LayoutGate::new(2, 80, 0.02, 0.95).unwrap();
        assert!(matches!(gate_fragment(&big, &page, &tight), GateDecision::RejectIrregular(_)));
        assert!(LayoutGate::new(5, 5, 0.1, 0.2).is_err());
    }

    fn classes(groups: &[(Vec<ActFragment>, bool)]) -> Vec<(String, bool)> {
        groups
            .iter()
            .map(|(g, o)| (g.iter().map(|f| f.fragment_id.as_str()).collect::<Vec<_>>().join(","), *o))
            .collect()
    }

    #[test]
    fn interleaved_start() {
        let r = Polygon::rect(0, 0, 10, 10);
        let seq = vec![
            frag("k.s", "k", ActClass::Start, 0, 2, r.clone()),
            frag("k1.s", "k1", ActClass::Start, 0, 2, r.clone()),
            frag("k1.e", "k1", ActClass::End, 1, 2, r),
        ];
        let got = classes(&group_fragments(seq));
        assert_eq!(got, vec![("k.s".into(), true), ("k1.s,k1.e".into(), false)]);
    }

    #[test]
    fn across_pages() {
        let mut a = RecognizedPage::new("a", "r", 100, 200);
        let mut b = RecognizedPage::new("b", "r", 100, 200);
        a.lines.push(TextLine::new("x.0", Polygon::rect(0, 0, 10, 10), "Le premier"));
        b.lines.push(TextLine::new("y.0", Polygon::rect(0, 0, 10, 10), "mars"));
        let mut s = frag("x", "a", ActClass::Start, 0, 1, Polygon::rect(0, 0, 10, 10));
        s.line_ids = vec!["x.0".into()];
        let mut e = frag("y", "b", ActClass::End, 0, 1, Polygon::rect(0, 0, 10, 10));
        e.line_ids = vec!["y.0".into()];
        a.fragments.push(s);
        b.fragments.push(e);
        let acts = merge_fragments(&[a, b], None);
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].full_text, "Le premier\nmars");
        assert!(!acts[0].orphan);
        assert_eq!(acts[0].act_id, "r-act00001");
    }

    #[test]
    fn rejected_fragment_keeps_position() {
        let mut p = RecognizedPage::new("p", "r", 1000, 1000);
        p.fragments = vec![
            frag("a", "p", ActClass::Full, 0, 4, Polygon::rect(0, 0, 500, 300)),
            frag("b", "p", ActClass::Full, 1, 1, Polygon::rect(0, 300, 500, 600)),
            frag("c", "p", ActClass::Full, 2, 4, Polygon::rect(0, 600, 500, 900)),
        ];
        let acts = merge_fragments(&[p], Some(&LayoutGate::default()));
        let ids: Vec<&str> = acts.iter().map(|a| a.fragments[0].fragment_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(acts[1].rejected.as_deref().unwrap().starts_with("irregular layout"));
        assert!(acts[0].rejected.is_none());
    }
}
