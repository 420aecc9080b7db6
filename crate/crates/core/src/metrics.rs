//! Evaluation metrics: CER/WER, character alignment, the alignment-based NER
//! score, and IoU / AP / mAP for zone detection.

use serde::{Deserialize, Serialize};

use std::collections::BTreeMap;

use crate::domain::{EntityTag, Polygon, RecognizedPage};
use crate::error::{Error, Result};
use crate::geometry;
use crate::scalar::Real;

/// Unit-cost Levenshtein distance over arbitrary symbols.
pub fn edit_distance<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (diag + usize::from(x != y)).min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[b.len()]
}

pub fn char_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    edit_distance(&a, &b)
}

fn normalized<T: Real>(dist: usize, ref_len: usize, hyp_len: usize) -> T {
    if ref_len == 0 {
        if hyp_len > 0 {
            log::warn!("empty reference with non-empty hypothesis; rate normalized by 1");
        }
        return T::from_count(dist);
    }
    T::from_count(dist) / T::from_count(ref_len)
}

/// Character error rate: edit distance over reference length.
pub fn cer<T: Real>(reference: &str, hypothesis: &str) -> T {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    normalized(edit_distance(&r, &h), r.len(), h.len())
}

/// Word error rate over whitespace tokens.
pub fn wer<T: Real>(reference: &str, hypothesis: &str) -> T {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    normalized(edit_distance(&r, &h), r.len(), h.len())
}

/// Accumulates edit distances and reference lengths over a corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub char_edits: usize,
    pub char_total: usize,
    pub word_edits: usize,
    pub word_total: usize,
}

impl ErrorCounts {
    pub fn add_pair(&mut self, reference: &str, hypothesis: &str) {
        let r: Vec<char> = reference.chars().collect();
        let h: Vec<char> = hypothesis.chars().collect();
        self.char_edits += edit_distance(&r, &h);
        self.char_total += r.len();
        let rw: Vec<&str> = reference.split_whitespace().collect();
        let hw: Vec<&str> = hypothesis.split_whitespace().collect();
        self.word_edits += edit_distance(&rw, &hw);
        self.word_total += rw.len();
    }

    pub fn merge(&mut self, other: &ErrorCounts) {
        self.char_edits += other.char_edits;
        self.char_total += other.char_total;
        self.word_edits += other.word_edits;
        self.word_total += other.word_total;
    }

    pub fn cer(&self) -> f64 {
        self.char_edits as f64 / self.char_total.max(1) as f64
    }

    pub fn wer(&self) -> f64 {
        self.word_edits as f64 / self.word_total.max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditOp {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// One aligned position: `source`/`target` are char indices, absent for inserts/deletes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub op: EditOp,
    pub source: Option<usize>,
    pub target: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub pairs: Vec<AlignedPair>,
    pub cost: usize,
}

impl EditScript {
    /// Replays the script on `source` with characters taken from `target`.
    pub fn apply(&self, source: &str, target: &str) -> String {
        let s: Vec<char> = source.chars().collect();
        let t: Vec<char> = target.chars().collect();
        let mut out = String::new();
        for p in &self.pairs {
            match p.op {
                EditOp::Match => out.push(s[p.source.unwrap()]),
                EditOp::Substitute | EditOp::Insert => out.push(t[p.target.unwrap()]),
                EditOp::Delete => {}
            }
        }
        out
    }
}

/// Optimal character alignment. Walks left to right over a suffix-cost table and
/// prefers match, then substitute, delete, insert among optimal moves.
pub fn align_chars(reference: &str, hypothesis: &str) -> EditScript {
    let a: Vec<char> = reference.chars().collect();
    let b: Vec<char> = hypothesis.chars().collect();
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    // suffix[i][j] = distance between a[i..] and b[j..]
    let mut suffix = vec![0usize; (n + 1) * w];
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            suffix[i * w + j] = if i == n {
                m - j
            } else if j == m {
                n - i
            } else {
                let sub = suffix[(i + 1) * w + j + 1] + usize::from(a[i] != b[j]);
                sub.min(suffix[(i + 1) * w + j] + 1).min(suffix[i * w + j + 1] + 1)
            };
        }
    }
    let mut pairs = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let here = suffix[i * w + j];
        if i < n && j < m && a[i] == b[j] && suffix[(i + 1) * w + j + 1] == here {
            pairs.push(AlignedPair { op: EditOp::Match, source: Some(i), target: Some(j) });
            i += 1;
            j += 1;
        } else if i < n && j < m && a[i] != b[j] && suffix[(i + 1) * w + j + 1] + 1 == here {
            pairs.push(AlignedPair { op: EditOp::Substitute, source: Some(i), target: Some(j) });
            i += 1;
            j += 1;
        } else if i < n && suffix[(i + 1) * w + j] + 1 == here {
            pairs.push(AlignedPair { op: EditOp::Delete, source: Some(i), target: None });
            i += 1;
        } else {
            pairs.push(AlignedPair { op: EditOp::Insert, source: None, target: Some(j) });
            j += 1;
        }
    }
    EditScript {
        pairs,
        cost: suffix[0],
    }
}

/// Entity span in character offsets of its text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSpan {
    pub tag: EntityTag,
    pub start: usize,
    pub end: usize,
}

impl TaggedSpan {
    pub fn new(tag: EntityTag, start: usize, end: usize) -> Self {
        TaggedSpan { tag, start, end }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerCounts {
    pub recognized: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl NerCounts {
    pub fn merge(&mut self, o: &NerCounts) {
        self.recognized += o.recognized;
        self.predicted += o.predicted;
        self.gold += o.gold;
    }

    pub fn scores(&self) -> PrfScores {
        let p = if self.predicted == 0 { 0.0 } else { self.recognized as f64 / self.predicted as f64 };
        let r = if self.gold == 0 { 0.0 } else { self.recognized as f64 / self.gold as f64 };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        PrfScores { precision: p, recall: r, f1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub const NER_THRESHOLD: f64 = 0.30;

fn check_spans(spans: &[TaggedSpan], len: usize, what: &str, allow_overlap: bool) -> Result<()> {
    for s in spans {
        if s.start >= s.end || s.end > len {
            return Err(Error::Eval(format!("{what} span {}..{} invalid for text of length {len}", s.start, s.end)));
        }
    }
    if !allow_overlap {
        let mut sorted: Vec<&TaggedSpan> = spans.iter().collect();
        sorted.sort_by_key(|s| (s.start, s.end));
        for w in sorted.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::Eval(format!(
                    "overlapping {what} entities at {}..{} and {}..{}",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
    }
    Ok(())
}

/// Alignment-based NER score on one document.
///
/// Gold spans are projected onto the predicted text through the character
/// alignment. Each one is matched to an unused predicted entity of the same tag
/// overlapping the projection (largest overlap first); it counts as recognized
/// when the edit distance between the two surfaces is strictly below
/// `threshold` times the gold length.
pub fn ner_counts(
    gt_text: &str,
    gt: &[TaggedSpan],
    pred_text: &str,
    pred: &[TaggedSpan],
    threshold: f64,
) -> Result<NerCounts> {
    let gchars: Vec<char> = gt_text.chars().collect();
    let pchars: Vec<char> = pred_text.chars().collect();
    check_spans(gt, gchars.len(), "ground-truth", false)?;
    check_spans(pred, pchars.len(), "predicted", true)?;

    // cursor[i] = position in the prediction where gold char i starts;
    // cursor_end[i] = position right after gold char i.
    let script = align_chars(gt_text, pred_text);
    let mut start_at = vec![0usize; gchars.len() + 1];
    let mut end_at = vec![0usize; gchars.len() + 1];
    let mut j = 0usize;
    for p in &script.pairs {
        match (p.op, p.source) {
            (EditOp::Insert, _) => j += 1,
            (op, Some(i)) => {
                start_at[i] = j;
                if op != EditOp::Delete {
                    j += 1;
                }
                end_at[i + 1] = j;
            }
            (_, None) => unreachable!("only inserts lack a source index"),
        }
    }
    start_at[gchars.len()] = j;

    let mut used = vec![false; pred.len()];
    let mut recognized = 0;
    for g in gt {
        let (ps, pe) = (start_at[g.start], end_at[g.end].max(start_at[g.start]));
        let best = pred
            .iter()
            .enumerate()
            .filter(|(k, p)| !used[*k] && p.tag == g.tag)
            .map(|(k, p)| {
                let overlap = pe.min(p.end).saturating_sub(ps.max(p.start));
                (k, overlap)
            })
            .filter(|(_, ov)| *ov > 0)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        let gold_surface: Vec<char> = gchars[g.start..g.end].to_vec();
        let matched: Vec<char> = match best {
            Some((k, _)) => {
                used[k] = true;
                pchars[pred[k].start..pred[k].end].to_vec()
            }
            None => Vec::new(),
        };
        let ratio = edit_distance(&gold_surface, &matched) as f64 / gold_surface.len() as f64;
        if ratio < threshold {
            recognized += 1;
        }
    }
    Ok(NerCounts {
        recognized,
        predicted: pred.len(),
        gold: gt.len(),
    })
}

pub fn ner_eval(
    gt: &[TaggedSpan],
    pred_text: &str,
    pred: &[TaggedSpan],
    gt_text: &str,
    threshold: f64,
) -> Result<PrfScores> {
    Ok(ner_counts(gt_text, gt, pred_text, pred, threshold)?.scores())
}

/// IoU of two pixel polygons.
pub fn iou(a: &Polygon, b: &Polygon) -> Result<f64> {
    for (p, name) in [(a, "first"), (b, "second")] {
        if !p.violations("polygon").is_empty() {
            return Err(Error::Geometry(format!("{name} polygon is degenerate")));
        }
    }
    Ok(geometry::iou(&a.to_points::<f64>(), &b.to_points::<f64>()))
}

/// Average precision at one IoU threshold (all-point interpolation).
///
/// Predictions are visited by descending score, ties in input order; each takes
/// the unmatched ground-truth zone with the highest IoU if that IoU reaches the
/// threshold.
pub fn average_precision<T: Real>(
    gt: &[Vec<geometry::Point<T>>],
    pred: &[(Vec<geometry::Point<T>>, T)],
    iou_threshold: T,
) -> T {
    if gt.is_empty() {
        return if pred.is_empty() { T::one() } else { T::zero() };
    }
    let ious: Vec<Vec<T>> = pred
        .iter()
        .map(|(p, _)| gt.iter().map(|g| geometry::iou(p, g)).collect())
        .collect();
    average_precision_from_ious(&ious, pred.iter().map(|(_, s)| *s).collect(), gt.len(), iou_threshold)
}

fn average_precision_from_ious<T: Real>(ious: &[Vec<T>], scores: Vec<T>, n_gt: usize, thr: T) -> T {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*b].partial_cmp(&scores[*a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut taken = vec![false; n_gt];
    let mut tp = Vec::with_capacity(order.len());
    for &k in &order {
        let best = ious[k]
            .iter()
            .enumerate()
            .filter(|(g, v)| !taken[*g] && **v >= thr)
            .fold(None::<(usize, T)>, |acc, (g, v)| match acc {
                Some((_, bv)) if bv >= *v => acc,
                _ => Some((g, *v)),
            });
        match best {
            Some((g, _)) => {
                taken[g] = true;
                tp.push(true);
            }
            None => tp.push(false),
        }
    }
    let mut precision = Vec::with_capacity(tp.len());
    let mut recall = Vec::with_capacity(tp.len());
    let (mut ctp, mut cfp) = (0usize, 0usize);
    for hit in tp {
        if hit {
            ctp += 1;
        } else {
            cfp += 1;
        }
        precision.push(T::from_count(ctp) / T::from_count(ctp + cfp));
        recall.push(T::from_count(ctp) / T::from_count(n_gt));
    }
    // precision envelope, right to left
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = T::zero();
    let mut prev_r = T::zero();
    for (p, r) in precision.iter().zip(&recall) {
        ap = ap + (*r - prev_r) * *p;
        prev_r = *r;
    }
    ap
}

/// IoU thresholds `0.50, 0.55, …, 0.95`.
pub fn iou_thresholds() -> [f64; 10] {
    std::array::from_fn(|i| (50 + 5 * i) as f64 / 100.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionEval {
    pub class: String,
    pub iou: f64,
    pub ap: Vec<(f64, f64)>,
    pub map: f64,
}

impl DetectionEval {
    pub fn ap_at(&self, thr: f64) -> Option<f64> {
        self.ap.iter().find(|(t, _)| (t - thr).abs() < 1e-9).map(|(_, v)| *v)
    }
}

/// AP over the threshold grid plus pixel IoU for one class.
///
/// The pixel IoU treats the zones within each set as disjoint.
pub fn map_eval(class: &str, gt: &[Polygon], pred: &[(Polygon, f64)]) -> DetectionEval {
    let g: Vec<Vec<geometry::Point<f64>>> = gt.iter().map(|p| p.to_points()).collect();
    let p: Vec<Vec<geometry::Point<f64>>> = pred.iter().map(|(p, _)| p.to_points()).collect();
    let ious: Vec<Vec<f64>> = p.iter().map(|pp| g.iter().map(|gg| geometry::iou(pp, gg)).collect()).collect();
    let scores: Vec<f64> = pred.iter().map(|(_, s)| *s).collect();
    let ap: Vec<(f64, f64)> = iou_thresholds()
        .iter()
        .map(|&t| {
            let v = if g.is_empty() {
                if p.is_empty() { 1.0 } else { 0.0 }
            } else {
                average_precision_from_ious(&ious, scores.clone(), g.len(), t)
            };
            (t, v)
        })
        .collect();
    let map = ap.iter().map(|(_, v)| v).sum::<f64>() / ap.len() as f64;
    let inter: f64 = p
        .iter()
        .flat_map(|pp| g.iter().map(move |gg| geometry::intersection_area(pp, gg)))
        .sum();
    let total: f64 = g.iter().chain(&p).map(|x| geometry::area(x)).sum();
    let union = total - inter;
    let iou = if union > 0.0 { (inter / union).clamp(0.0, 1.0) } else { 0.0 };
    DetectionEval {
        class: class.to_string(),
        iou,
        ap,
        map,
    }
}

/// A page's lines joined by newlines, with its entities in page offsets.
pub fn page_text(page: &RecognizedPage) -> (String, Vec<TaggedSpan>) {
    let mut text = String::new();
    let mut offsets = std::collections::HashMap::new();
    let mut pos = 0;
    for (i, l) in page.lines.iter().enumerate() {
        if i > 0 {
            text.push('\n');
            pos += 1;
        }
        offsets.insert(l.id.as_str(), pos);
        text.push_str(&l.text);
        pos += l.text.chars().count();
    }
    let spans = page
        .entities
        .iter()
        .filter_map(|e| offsets.get(e.line_id.as_str()).map(|o| TaggedSpan::new(e.tag, o + e.char_start, o + e.char_end)))
        .collect();
    (text, spans)
}

/// Ground truth against predictions over a set of pages matched by id.
#[derive(Clone, Debug, Default)]
pub struct CorpusEval {
    pub pages: usize,
    pub errors: ErrorCounts,
    pub ner: NerCounts,
    /// Per class: ground-truth zones and scored predictions, pages stacked apart.
    pub zones: BTreeMap<String, (Vec<Polygon>, Vec<(Polygon, f64)>)>,
    /// Ground-truth pages with no prediction; scored as empty.
    pub missing_pages: Vec<String>,
}

impl CorpusEval {
    pub fn detection(&self) -> Vec<DetectionEval> {
        self.zones.iter().map(|(c, (g, p))| map_eval(c, g, p)).collect()
    }
}

fn zones_of(page: &RecognizedPage, dy: i64) -> Vec<(String, Polygon)> {
    let mut z: Vec<(String, Polygon)> = page.lines.iter().map(|l| ("line".to_string(), l.polygon.translate(0, dy))).collect();
    z.extend(page.fragments.iter().map(|f| (format!("act_{}", f.act_class.as_str()), f.polygon.translate(0, dy))));
    z
}

/// Page text, entities and zones of `pred` scored against `gt`.
///
/// Predictions carry no ranking, so every zone gets score 1 and AP follows
/// input order. Pages are shifted apart vertically so zones of different pages
/// never overlap.
pub fn compare_pages(gt: &[RecognizedPage], pred: &[RecognizedPage], threshold: f64) -> Result<CorpusEval> {
    let by_id: std::collections::HashMap<&str, &RecognizedPage> = pred.iter().map(|p| (p.page_id.as_str(), p)).collect();
    let mut ev = CorpusEval::default();
    let mut dy = 0i64;
    for g in gt {
        ev.pages += 1;
        let (gt_text, gt_spans) = page_text(g);
        let (p_text, p_spans, p_zones) = match by_id.get(g.page_id.as_str()) {
            Some(p) => {
                let (t, s) = page_text(p);
                (t, s, zones_of(p, dy))
            }
            None => {
                ev.missing_pages.push(g.page_id.clone());
                (String::new(), Vec::new(), Vec::new())
            }
        };
        ev.errors.add_pair(&gt_text, &p_text);
        ev.ner.merge(&ner_counts(&gt_text, &gt_spans, &p_text, &p_spans, threshold)?);
        for (c, poly) in zones_of(g, dy) {
            ev.zones.entry(c).or_default().0.push(poly);
        }
        for (c, poly) in p_zones {
            ev.zones.entry(c).or_default().1.push((poly, 1.0));
        }
        let h = by_id.get(g.page_id.as_str()).map_or(0, |p| p.height);
        dy += g.height.max(h) + 1000;
    }
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pages_score_perfectly() {
        use crate::domain::{Entity, TextLine};
        let mut p = RecognizedPage::new("p", "r", 100, 100);
        p.lines.push(TextLine::new("a", Polygon::rect(0, 0, 90, 10), "Jean Roy"));
        p.lines.push(TextLine::new("b", Polygon::rect(0, 20, 90, 30), "cultivateur"));
        p.entities.push(Entity::over("e", EntityTag::Per, &p.lines[0], 0, 8).unwrap());
        p.entities.push(Entity::over("f", EntityTag::Occ, &p.lines[1], 0, 11).unwrap());
        let (t, s) = page_text(&p);
        assert_eq!(t, "Jean Roy\ncultivateur");
        assert_eq!(s[1], TaggedSpan::new(EntityTag::Occ, 9, 20));
        let ev = compare_pages(&[p.clone(), p.clone()], &[p.clone()], NER_THRESHOLD).unwrap();
        // the second ground-truth page has the same id, so both find a match
        assert_eq!(ev.errors.cer(), 0.0);
        assert_eq!(ev.ner.scores().f1, 1.0);
        assert_eq!(ev.detection()[0].map, 1.0);
    }

    #[test]
    fn rates() {
        assert_eq!(cer::<f64>("abc", "abc"), 0.0);
        assert_eq!(cer::<f64>("abc", "abd"), 1.0 / 3.0);
        assert_eq!(wer::<f64>("le deux mars", "le trois mars"), 1.0 / 3.0);
        assert_eq!(cer::<f64>("", "ab"), 2.0);
        // the distance is symmetric, the rate is not
        assert_eq!(char_distance("abcd", "ab"), char_distance("ab", "abcd"));
        assert_ne!(cer::<f64>("abcd", "ab"), cer::<f64>("ab", "abcd"));
    }

    #[test]
    fn alignment_prefers_leftmost_delete() {
        let s = align_chars("ab", "b");
        assert_eq!(s.cost, 1);
        assert_eq!(s.pairs[0].op, EditOp::Delete);
        assert_eq!(s.pairs[1].op, EditOp::Match);
        let same = align_chars("abc", "abc");
        assert!(same.pairs.iter().all(|p| p.op == EditOp::Match));
        assert_eq!(same.cost, 0);
        let s = align_chars("kitten", "sitting");
        assert_eq!(s.cost, 3);
        assert_eq!(s.apply("kitten", "sitting"), "sitting");
    }

    #[test]
    fn ner_identical() {
        let t = "Jean Tremblay de Québec";
        let spans = vec![TaggedSpan::new(EntityTag::Per, 0, 13), TaggedSpan::new(EntityTag::Loc, 17, 23)];
        let s = ner_eval(&spans, t, &spans, t, NER_THRESHOLD).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn ner_small_error_recognized() {
        let g = vec![TaggedSpan::new(EntityTag::Per, 0, 13)];
        let s = ner_eval(&g, "Jean Tremblai", &g, "Jean Tremblay", NER_THRESHOLD).unwrap();
        assert_eq!(s.recall, 1.0);
        let g4 = vec![TaggedSpan::new(EntityTag::Per, 0, 4)];
        let s = ner_eval(&g4, "Paul", &g4, "Jean", NER_THRESHOLD).unwrap();
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn ner_wrong_tag_is_missed() {
        let t = "Jean";
        let g = vec![TaggedSpan::new(EntityTag::Per, 0, 4)];
        let p = vec![TaggedSpan::new(EntityTag::Loc, 0, 4)];
        let c = ner_counts(t, &g, t, &p, NER_THRESHOLD).unwrap();
        assert_eq!(c.recognized, 0);
        assert_eq!(c.predicted, 1);
    }

    #[test]
    fn ner_shifted_prediction() {
        // two inserted characters before the entity shift the prediction
        let g = vec![TaggedSpan::new(EntityTag::Per, 3, 7)];
        let p = vec![TaggedSpan::new(EntityTag::Per, 5, 9)];
        let c = ner_counts("le Jean", &g, "lexx Jean", &p, NER_THRESHOLD).unwrap();
        assert_eq!(c.recognized, 1);
    }

    #[test]
    fn ner_overlapping_gold_rejected() {
        let g = vec![TaggedSpan::new(EntityTag::Per, 0, 4), TaggedSpan::new(EntityTag::Per, 2, 6)];
        assert!(ner_counts("abcdefg", &g, "abcdefg", &[], NER_THRESHOLD).is_err());
    }

    #[test]
    fn polygon_iou() {
        let a = Polygon::rect(0, 0, 2, 2);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &Polygon::rect(5, 5, 7, 7)).unwrap(), 0.0);
        assert_eq!(iou(&a, &Polygon::rect(1, 0, 3, 2)).unwrap(), 1.0 / 3.0);
        assert!(iou(&a, &Polygon { points: vec![[0, 0], [1, 1]] }).is_err());
    }

    fn sq(x: f64, y: f64, s: f64) -> Vec<geometry::Point<f64>> {
        vec![
            geometry::Point::new(x, y),
            geometry::Point::new(x + s, y),
            geometry::Point::new(x + s, y + s),
            geometry::Point::new(x, y + s),
        ]
    }

    #[test]
    fn ap_cases() {
        let gt = vec![sq(0.0, 0.0, 10.0), sq(20.0, 0.0, 10.0)];
        let perfect: Vec<_> = gt.iter().map(|g| (g.clone(), 1.0)).collect();
        for t in iou_thresholds() {
            assert_eq!(average_precision(&gt, &perfect, t), 1.0);
        }
        assert_eq!(average_precision(&gt, &[], 0.5), 0.0);
    }

    #[test]
    fn ap_double_cover_matches_once() {
        // one wide prediction overlapping both boxes, one exact
        let gt = vec![sq(0.0, 0.0, 10.0), sq(10.0, 0.0, 10.0)];
        let wide = vec![
            geometry::Point::new(0.0, 0.0),
            geometry::Point::new(14.0, 0.0),
            geometry::Point::new(14.0, 10.0),
            geometry::Point::new(0.0, 10.0),
        ];
        // wide: IoU 100/140 with box 0, 40/200 with box 1
        let preds = vec![(wide, 0.9), (sq(0.0, 0.0, 10.0), 0.8)];
        // wide takes box 0; the exact one finds box 0 taken and box 1 at IoU 0 → FP
        // PR: (p=1, r=.5), (p=.5, r=.5) → AP = .5
        assert_eq!(average_precision(&gt, &preds, 0.5), 0.5);
        // above 100/140 the wide one misses and the exact one hits: (0,0), (.5,.5) → AP .25
        assert_eq!(average_precision(&gt, &preds, 0.75), 0.25);
    }
}
