//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use actes::assembly::merge_fragments;
use actes::classify::merged_type;
use actes::dates::{generate_number, write_french_date, NumeralGrammar, FRENCH_MONTHS};
use actes::domain::{
    Act, ActClass, ActFragment, ActType, Entity, EntityTag, Polygon, RecognizedPage, Role, StatusKind, TextLine,
};
use actes::geometry::Point;
use actes::metrics::{average_precision, cer, iou, iou_thresholds, ner_eval, wer, TaggedSpan, NER_THRESHOLD};
use actes::names::{correct_name, VisualCostTable, COST_SCALE};
use actes::outlier::{
    evaluate_model, DetectorConfig, FeatureKind, FeatureVector, GridSpec, LocalOutlierFactor,
    PageModel,
};
use actes::pipeline::{run, stats_report, write_run, Input, PipelineConfig, Resources};
use actes::quality::{q_line, BadLineClass};
use actes::synth::{generate, page_set, SynthConfig};
use actes::validate::{finalize_status, Mould, SpecialCaseLexicon, Validator};
use actes::domain::MouldId;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Check {
    ensure!(
        elapsed.as_secs_f64() < limit_s,
        "{what} took {:.2} s, limit {limit_s} s",
        elapsed.as_secs_f64()
    );
    Ok(format!("{:.2} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 1. line quality

fn oracle_q_line(h: &[f64], alpha: f64) -> f64 {
    let mut s = h.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let med = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
    let good = h.iter().filter(|&&x| alpha * med <= x && x <= (1.0 + alpha) * med).count();
    good as f64 / n as f64
}

fn oracle_class(bad: usize, total: usize) -> usize {
    // class edges of the paper's table, in percent
    let pct = 100.0 * bad as f64 / total as f64;
    let exact = |edge: usize| 100 * bad <= edge * total;
    let c = if exact(1) {
        0
    } else if exact(5) {
        1
    } else if exact(25) {
        2
    } else if exact(50) {
        3
    } else {
        4
    };
    debug_assert!(c < 4 || pct > 50.0);
    c
}

fn criterion_q_line() -> Check {
    let t = Instant::now();
    let mut r = rng(1);
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    for case in 0..200 {
        let n = r.gen_range(1..=50);
        let h: Vec<f64> = if case % 2 == 0 {
            (0..n).map(|_| r.gen_range(1..=60) as f64).collect()
        } else {
            (0..n).map(|_| r.gen_range(0.5..120.0)).collect()
        };
        let alpha = if case % 3 == 0 { r.gen_range(0.0..=1.0) } else { alphas[case % alphas.len()] };
        let rep = q_line(&h, alpha).map_err(|e| e.to_string())?;
        let want = oracle_q_line(&h, alpha);
        ensure!((rep.q_line - want).abs() <= 1e-12, "case {case}: q_line {} vs oracle {want}", rep.q_line);
        let bad = rep.total - rep.good;
        ensure!(
            BadLineClass::ALL[oracle_class(bad, rep.total)] == rep.class,
            "case {case}: class {:?} for {bad}/{}",
            rep.class,
            rep.total
        );
        for c in [0.25, 2.0, 8.0] {
            let scaled: Vec<f64> = h.iter().map(|x| x * c).collect();
            let q = q_line(&scaled, alpha).unwrap().q_line;
            ensure!(q == rep.q_line, "case {case}: scale {c} changed q_line");
        }
        let mut shuffled = h.clone();
        shuffled.shuffle(&mut r);
        ensure!(q_line(&shuffled, alpha).unwrap().q_line == rep.q_line, "case {case}: permutation changed q_line");
    }
    let labels: Vec<&str> = BadLineClass::ALL.iter().map(|c| c.label()).collect();
    ensure!(labels == ["≤1%", "1−5%", "5−25%", "25−50%", ">50%"], "class labels {labels:?}");
    within(t.elapsed(), 1.0, "q_line suite").map(|s| format!("200 lists, {s}"))
}

// ---------------------------------------------------------------------------
// 2. dates

fn criterion_dates() -> Check {
    let t = Instant::now();
    let g = NumeralGrammar::default();
    let words = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    for n in 0..=9999u64 {
        let s = generate_number(n).map_err(|e| e.to_string())?;
        let back = g.parse_number(&words(&s)).map_err(|e| format!("{n} ({s}): {e}"))?;
        ensure!(back == n, "{n} written {s:?} parsed as {back}");
    }
    let y = g.parse_number(&words("dix huit cent quatre-vingt-dix-neuf")).map_err(|e| e.to_string())?;
    ensure!(y == 1899, "dix huit cent quatre-vingt-dix-neuf gave {y}");

    let mut r = rng(2);
    for _ in 0..500 {
        let year = r.gen_range(1850..=1916);
        let month = r.gen_range(1..=12u32);
        let day = r.gen_range(1..=oracle_days_in(year, month));
        let text = write_french_date(year, month, day);
        let d = g.parse_date(&text, None).map_err(|e| format!("{text}: {e}"))?.date;
        ensure!(
            d.complete && d.year == Some(year) && d.month == Some(month) && d.day == Some(day),
            "{text:?} parsed as {d:?}"
        );
    }
    // impossible calendar days are never complete
    let mut rejected = 0;
    for year in [1850, 1852, 1900, 1904, 1916] {
        for (m, month) in FRENCH_MONTHS.iter().enumerate() {
            for day in (oracle_days_in(year, m as u32 + 1) + 1)..=31 {
                let day_words = generate_number(u64::from(day)).unwrap();
                let text = format!("le {day_words} {month} {}", generate_number(year as u64).unwrap());
                let d = g.parse_date(&text, None).map(|p| p.date);
                ensure!(!d.as_ref().is_ok_and(|d| d.complete), "{text:?} accepted as {d:?}");
                rejected += 1;
            }
        }
    }
    within(t.elapsed(), 5.0, "date suite").map(|s| format!("10000 numbers, 500 dates, {rejected} impossible dates refused, {s}"))
}

fn oracle_days_in(year: i32, month: u32) -> u32 {
    match month {
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 31,
    }
}

// ---------------------------------------------------------------------------
// 3. name correction

const COST_ROWS: [(&str, &str); 12] = [
    ("rn", "m"),
    ("cl", "d"),
    ("u", "n"),
    ("é", "e"),
    ("l", "t"),
    ("ii", "u"),
    ("nn", "m"),
    ("in", "m"),
    ("a", "o"),
    ("c", "e"),
    ("i", "l"),
    ("vv", "w"),
];

struct OracleCosts {
    single: BTreeMap<(char, char), u64>,
    groups: Vec<(Vec<char>, Vec<char>, u64)>,
}

fn oracle_distance(a: &[char], b: &[char], c: &OracleCosts) -> u64 {
    // forward relaxation over the (i, j) grid
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![u64::MAX; m + 1]; n + 1];
    d[0][0] = 0;
    for i in 0..=n {
        for j in 0..=m {
            let here = d[i][j];
            if here == u64::MAX {
                continue;
            }
            let mut relax = |x: usize, y: usize, w: u64| {
                if here + w < d[x][y] {
                    d[x][y] = here + w;
                }
            };
            if i < n {
                relax(i + 1, j, COST_SCALE);
            }
            if j < m {
                relax(i, j + 1, COST_SCALE);
            }
            if i < n && j < m {
                let w = if a[i] == b[j] { 0 } else { *c.single.get(&(a[i], b[j])).unwrap_or(&COST_SCALE) };
                relax(i + 1, j + 1, w);
            }
            for (x, y, w) in &c.groups {
                if a[i..].starts_with(x) && b[j..].starts_with(y) {
                    relax(i + x.len(), j + y.len(), *w);
                }
            }
        }
    }
    d[n][m]
}

fn criterion_names() -> Check {
    let t = Instant::now();
    let mut r = rng(3);
    let alphabet: Vec<char> = "abcdeilmnortuvwé".chars().collect();
    let word = |r: &mut ChaCha8Rng, max: usize| -> String {
        let n = r.gen_range(1..=max);
        (0..n).map(|_| alphabet[r.gen_range(0..alphabet.len())]).collect()
    };
    let mut ties = 0;
    for case in 0..300 {
        let mut tsv = String::new();
        let mut oc = OracleCosts { single: BTreeMap::new(), groups: Vec::new() };
        for (a, b) in COST_ROWS {
            if r.gen_bool(0.7) {
                let cost = r.gen_range(0..=10) as f64 / 10.0;
                tsv.push_str(&format!("{a}\t{b}\t{cost}\n"));
                let w = (cost * COST_SCALE as f64).round() as u64;
                let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
                if x.len() == 1 && y.len() == 1 {
                    for key in [(x[0], y[0]), (y[0], x[0])] {
                        let e = oc.single.entry(key).or_insert(w);
                        *e = (*e).min(w);
                    }
                } else {
                    oc.groups.push((x.clone(), y.clone(), w));
                    oc.groups.push((y, x, w));
                }
            }
        }
        let table = VisualCostTable::parse(&tsv).map_err(|e| e.to_string())?;
        let name = word(&mut r, 12);
        let pool_len = r.gen_range(1..=50);
        let pool: Vec<String> = (0..pool_len)
            .map(|_| {
                if r.gen_bool(0.3) {
                    // a near miss of the query
                    let mut c: Vec<char> = name.chars().collect();
                    let k = r.gen_range(0..c.len());
                    c[k] = alphabet[r.gen_range(0..alphabet.len())];
                    c.into_iter().collect()
                } else {
                    word(&mut r, 12)
                }
            })
            .collect();
        let q: Vec<char> = name.chars().collect();
        let costs: Vec<u64> = pool
            .iter()
            .map(|p| oracle_distance(&q, &p.chars().collect::<Vec<_>>(), &oc))
            .collect();
        let min = *costs.iter().min().unwrap();
        let want: BTreeSet<&str> = pool.iter().zip(&costs).filter(|(_, c)| **c == min).map(|(p, _)| p.as_str()).collect();
        let got = correct_name(&name, &pool, &table, 1.0, 0);
        let got_names: BTreeSet<&str> = got.best.iter().map(|(n, _)| n.as_str()).collect();
        ensure!(got_names == want, "case {case}: {name:?} best {got_names:?}, oracle {want:?}");
        let want_score = min as f64 / COST_SCALE as f64;
        ensure!(
            got.best.iter().all(|(_, s)| *s == want_score),
            "case {case}: {name:?} score {:?}, oracle {want_score}",
            got.best
        );
        if want.len() > 1 {
            ties += 1;
        }
    }
    within(t.elapsed(), 10.0, "name suite").map(|s| format!("300 cases ({ties} with ties), {s}"))
}

// ---------------------------------------------------------------------------
// 4. isolation forest page detector

fn criterion_isolation_forest() -> Check {
    let spec = GridSpec::new(8, 6).unwrap();
    let kind = FeatureKind::LineCount;
    let detector = DetectorConfig::isolation_forest(42);
    let eval = page_set(75, 25, 42).map_err(|e| e.to_string())?;
    let train: Vec<RecognizedPage> = eval.iter().filter(|(p, _)| !p.fragments.is_empty()).map(|(p, _)| p.clone()).collect();
    let model = PageModel::<f64>::fit_pages(&train, kind, spec, &detector).map_err(|e| e.to_string())?;
    let report = evaluate_model(&model, &eval).map_err(|e| e.to_string())?;
    ensure!(report.act.support == 75 && report.no_act.support == 25, "supports {report:?}");
    ensure!(report.act.recall == 1.0, "act recall {:.3}", report.act.recall);
    ensure!(report.weighted_f1 >= 0.90, "weighted F1 {:.3}", report.weighted_f1);

    let mut r = rng(4);
    let n = kind.len(spec);
    for i in 0..10_000 {
        let scale = [1.0, 10.0, 1e6][i % 3];
        let x = FeatureVector { kind, spec, values: (0..n).map(|_| r.gen_range(-1.0..1.0) * scale).collect() };
        let s = model.score(&x).map_err(|e| e.to_string())?;
        ensure!(s > 0.0 && s < 1.0, "score {s} outside (0, 1)");
    }

    let base: Vec<f64> = eval.iter().map(|(p, _)| model.score_page(p).unwrap()).collect();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let mut shuffled = train.clone();
        shuffled.shuffle(&mut r);
        let m = PageModel::<f64>::fit_pages(&shuffled, kind, spec, &detector).map_err(|e| e.to_string())?;
        for ((p, _), b) in eval.iter().zip(&base) {
            worst = worst.max((m.score_page(p).unwrap() - b).abs());
        }
    }
    ensure!(worst < 0.05, "shuffle moved a score by {worst:.4}");
    Ok(format!(
        "act recall {:.2}, weighted F1 {:.3}, max shuffle shift {worst:.4}",
        report.act.recall, report.weighted_f1
    ))
}

// ---------------------------------------------------------------------------
// 5. local outlier factor

fn oracle_lof(points: &[Vec<f64>], k: usize, query: &[f64], skip: Option<usize>) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let knn = |q: &[f64], skip: Option<usize>| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..points.len()).filter(|&j| Some(j) != skip).collect();
        idx.sort_by(|&a, &b| dist(q, &points[a]).partial_cmp(&dist(q, &points[b])).unwrap().then(a.cmp(&b)));
        idx.truncate(k);
        idx
    };
    let kdist = |o: usize| {
        let nn = knn(&points[o], Some(o));
        dist(&points[o], &points[*nn.last().unwrap()])
    };
    let lrd = |q: &[f64], skip: Option<usize>| {
        let nn = knn(q, skip);
        let reach: f64 = nn.iter().map(|&o| kdist(o).max(dist(q, &points[o]))).sum::<f64>() / nn.len() as f64;
        1.0 / (reach + 1e-10)
    };
    let nn = knn(query, skip);
    let mean: f64 = nn.iter().map(|&o| lrd(&points[o], Some(o))).sum::<f64>() / nn.len() as f64;
    mean / lrd(query, skip)
}

fn criterion_lof() -> Check {
    let mut r = rng(5);
    let spec = GridSpec::new(1, 1).unwrap();
    let mut checked = 0;
    let mut worst = 0.0f64;
    for set in 0..100 {
        let n = r.gen_range(3..=20);
        let dim = r.gen_range(1..=4);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.gen_range(-5.0..5.0)).collect()).collect();
        let k = r.gen_range(1..n);
        let fv: Vec<FeatureVector<f64>> = points
            .iter()
            .map(|p| FeatureVector { kind: FeatureKind::LineCount, spec, values: p.clone() })
            .collect();
        let lof = LocalOutlierFactor::fit(&fv, k).map_err(|e| format!("set {set}: {e}"))?;
        for i in 0..n {
            let err = (lof.training_score(i) - oracle_lof(&points, k, &points[i], Some(i))).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "set {set} point {i}: error {err:e}");
            checked += 1;
        }
        for _ in 0..5 {
            let q: Vec<f64> = (0..dim).map(|_| r.gen_range(-8.0..8.0)).collect();
            let got = lof
                .score(&FeatureVector { kind: FeatureKind::LineCount, spec, values: q.clone() })
                .map_err(|e| e.to_string())?;
            let err = (got - oracle_lof(&points, k, &q, None)).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "set {set} query: error {err:e}");
            checked += 1;
        }
    }
    Ok(format!("{checked} scores over 100 sets, max error {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// 6. evaluation metrics

fn naive_distance<S: PartialEq>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if a[0] == b[0] {
        return naive_distance(&a[1..], &b[1..]);
    }
    1 + naive_distance(&a[1..], b)
        .min(naive_distance(a, &b[1..]))
        .min(naive_distance(&a[1..], &b[1..]))
}

fn criterion_metrics() -> Check {
    let mut r = rng(6);
    let alphabet: Vec<char> = "ab é".chars().collect();
    for case in 0..1000 {
        let mut s = || -> String {
            let n = r.gen_range(0..=8);
            (0..n).map(|_| alphabet[r.gen_range(0..alphabet.len())]).collect()
        };
        let (a, b) = (s(), s());
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let d = naive_distance(&ac, &bc);
        let want = if ac.is_empty() { d as f64 } else { d as f64 / ac.len() as f64 };
        let got: f64 = cer(&a, &b);
        ensure!(got == want, "case {case}: cer({a:?}, {b:?}) = {got}, oracle {want}");
        let (aw, bw): (Vec<&str>, Vec<&str>) = (a.split_whitespace().collect(), b.split_whitespace().collect());
        let d = naive_distance(&aw, &bw);
        let want = if aw.is_empty() { d as f64 } else { d as f64 / aw.len() as f64 };
        let got: f64 = wer(&a, &b);
        ensure!(got == want, "case {case}: wer({a:?}, {b:?}) = {got}, oracle {want}");
    }

    let tags = [EntityTag::Per, EntityTag::Loc, EntityTag::Date, EntityTag::Occ];
    for case in 0..100 {
        let text: String = (0..r.gen_range(1..200)).map(|_| alphabet[r.gen_range(0..alphabet.len())]).collect();
        let len = text.chars().count();
        let mut spans = Vec::new();
        let mut pos = 0;
        while pos < len {
            let start = r.gen_range(pos..len);
            let end = r.gen_range(start + 1..=len.min(start + 20));
            spans.push(TaggedSpan::new(tags[r.gen_range(0..4)], start, end));
            pos = end + r.gen_range(0..5);
        }
        let s = ner_eval(&spans, &text, &spans, &text, NER_THRESHOLD).map_err(|e| e.to_string())?;
        let perfect = if spans.is_empty() { true } else { (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0) };
        ensure!(perfect, "case {case}: identical input scored {s:?}");
    }

    // boundary of the "less than 30%" rule
    let gold: String = "a".repeat(1000);
    let gspan = [TaggedSpan::new(EntityTag::Per, 0, 1000)];
    for (errors, recognized) in [(299, true), (300, false)] {
        let pred: String = "b".repeat(errors) + &"a".repeat(1000 - errors);
        let s = ner_eval(&gspan, &pred, &gspan, &gold, NER_THRESHOLD).map_err(|e| e.to_string())?;
        ensure!((s.recall == 1.0) == recognized, "{errors}/1000 edits: recall {}", s.recall);
    }

    let sq = Polygon::rect(0, 0, 2, 1);
    let cases = [
        (sq.clone(), Polygon::rect(0, 0, 2, 1), 1.0),
        (sq.clone(), Polygon::rect(5, 5, 7, 6), 0.0),
        (sq.clone(), Polygon::rect(1, 0, 3, 1), 1.0 / 3.0),
    ];
    for (a, b, want) in cases {
        let got = iou(&a, &b).map_err(|e| e.to_string())?;
        ensure!(got == want, "iou {got}, expected {want}");
    }

    let rect = |x: f64, y: f64, w: f64, h: f64| {
        vec![Point::new(x, y), Point::new(x + w, y), Point::new(x + w, y + h), Point::new(x, y + h)]
    };
    for set in 0..100 {
        let gt: Vec<Vec<Point<f64>>> = (0..r.gen_range(1..8))
            .map(|_| rect(r.gen_range(0.0..100.0), r.gen_range(0.0..100.0), r.gen_range(5.0..30.0), r.gen_range(5.0..30.0)))
            .collect();
        let pred: Vec<(Vec<Point<f64>>, f64)> = (0..r.gen_range(0..10))
            .map(|_| {
                let p = if r.gen_bool(0.6) && !gt.is_empty() {
                    let g = &gt[r.gen_range(0..gt.len())];
                    let (dx, dy) = (r.gen_range(-6.0..6.0), r.gen_range(-6.0..6.0));
                    g.iter().map(|q| Point::new(q.x + dx, q.y + dy)).collect()
                } else {
                    rect(r.gen_range(0.0..100.0), r.gen_range(0.0..100.0), r.gen_range(5.0..30.0), r.gen_range(5.0..30.0))
                };
                (p, r.gen_range(0.0..1.0))
            })
            .collect();
        let aps: Vec<f64> = iou_thresholds().iter().map(|t| average_precision(&gt, &pred, *t)).collect();
        ensure!(aps.windows(2).all(|w| w[1] <= w[0]), "set {set}: AP over thresholds {aps:?}");
    }
    Ok("1000 cer/wer pairs, 100 NER documents, 30% boundary, IoU cases, 100 AP sets".into())
}

// ---------------------------------------------------------------------------
// 7. act assembly

fn oracle_groups(classes: &[ActClass]) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < classes.len() {
        match classes[i] {
            ActClass::Full => {
                out.push((vec![i], false));
                i += 1;
            }
            ActClass::Start => {
                let mut g = vec![i];
                i += 1;
                while i < classes.len() && classes[i] == ActClass::Center {
                    g.push(i);
                    i += 1;
                }
                if i < classes.len() && classes[i] == ActClass::End {
                    g.push(i);
                    i += 1;
                    out.push((g, false));
                } else {
                    out.push((g, true));
                }
            }
            ActClass::Center | ActClass::End => {
                out.push((vec![i], true));
                i += 1;
            }
        }
    }
    out
}

fn criterion_assembly() -> Check {
    let mut r = rng(7);
    let all = [ActClass::Start, ActClass::Center, ActClass::End, ActClass::Full];
    for case in 0..500 {
        let len = r.gen_range(0..=12);
        let classes: Vec<ActClass> = (0..len).map(|_| all[r.gen_range(0..4)]).collect();
        let mut pages: Vec<RecognizedPage> = Vec::new();
        for (i, c) in classes.iter().enumerate() {
            if pages.is_empty() || r.gen_bool(0.4) {
                let n = pages.len();
                pages.push(RecognizedPage::new(format!("R-p{n:03}"), "R", 1000, 1500));
            }
            let page = pages.last_mut().unwrap();
            let y = 50 * page.fragments.len() as i64;
            let line = TextLine::new(format!("l{i}"), Polygon::rect(10, y + 10, 900, y + 40), format!("texte {i}"));
            page.lines.push(line);
            page.fragments.push(ActFragment {
                fragment_id: format!("f{i}"),
                page_id: page.page_id.clone(),
                act_class: *c,
                polygon: Polygon::rect(0, y, 1000, y + 50),
                line_ids: vec![format!("l{i}")],
                sequence_index: page.fragments.len() as i64,
            });
        }
        let acts = merge_fragments(&pages, None);
        let got: Vec<(Vec<usize>, bool)> = acts
            .iter()
            .map(|a| {
                let ids = a.fragments.iter().map(|f| f.fragment_id[1..].parse().unwrap()).collect();
                (ids, a.orphan)
            })
            .collect();
        let want = oracle_groups(&classes);
        ensure!(got == want, "case {case} {classes:?}: {got:?} vs oracle {want:?}");
        let mut seen: Vec<usize> = got.iter().flat_map(|(g, _)| g.clone()).collect();
        seen.sort();
        ensure!(seen == (0..len).collect::<Vec<_>>(), "case {case}: fragments not conserved");
    }
    let types = [ActType::Birth, ActType::Marriage, ActType::Death, ActType::Undefined];
    for a in types {
        for b in types {
            let want = if a != ActType::Undefined { a } else { b };
            ensure!(merged_type(&[a, b]) == want, "merged_type({a:?}, {b:?})");
        }
    }
    Ok("500 sequences, 16 type pairs".into())
}

// ---------------------------------------------------------------------------
// 8. validator

fn fixture(text: &str, ents: &[(EntityTag, &str)], t: ActType) -> Act {
    let mut a = Act::assemble("A-act00001", vec![], &[]);
    a.fragments.push(ActFragment {
        fragment_id: "f".into(),
        page_id: "p".into(),
        act_class: ActClass::Full,
        polygon: Polygon::rect(0, 0, 10, 10),
        line_ids: vec!["l1".into()],
        sequence_index: 0,
    });
    a.full_text = text.into();
    a.act_type = t;
    a.entities = ents
        .iter()
        .enumerate()
        .map(|(i, (tag, s))| Entity {
            id: format!("e{i}"),
            tag: *tag,
            line_id: "l1".into(),
            char_start: 0,
            char_end: s.chars().count(),
            surface: s.to_string(),
        })
        .collect();
    a
}

const DATE: &str = "le premier mars mil huit cent soixante";
const DATE2: &str = "le deux avril mil huit cent soixante";

struct Golden {
    mould: MouldId,
    act_type: ActType,
    text: &'static str,
    ents: Vec<(EntityTag, &'static str)>,
}

fn goldens() -> Vec<Golden> {
    use EntityTag::*;
    vec![
        Golden {
            mould: MouldId::Birth,
            act_type: ActType::Birth,
            text: "Le premier mars mil huit cent soixante, à Chicoutimi, nous prêtre avons baptisé Marie, née la veille, \
                   fille de Joseph Tremblay cultivateur et de Louise Gagnon. Parrain Pierre Simard, marraine Anne Côté.",
            ents: vec![
                (Date, DATE),
                (Loc, "Chicoutimi"),
                (Per, "Marie"),
                (Date, "la veille"),
                (Per, "Joseph Tremblay"),
                (Occ, "cultivateur"),
                (Per, "Louise Gagnon"),
                (Per, "Pierre Simard"),
                (Per, "Anne Côté"),
            ],
        },
        Golden {
            mould: MouldId::DeathMarried,
            act_type: ActType::Death,
            text: "Le premier mars mil huit cent soixante nous prêtre avons inhumé Jean Bouchard, âgé de soixante ans, \
                   époux de Marie Girard. Présents Paul Roy et Louis Roy.",
            ents: vec![
                (Date, DATE),
                (Per, "Jean Bouchard"),
                (Per, "Marie Girard"),
                (Per, "Paul Roy"),
                (Per, "Louis Roy"),
            ],
        },
        Golden {
            mould: MouldId::DeathSingle,
            act_type: ActType::Death,
            text: "Le premier mars mil huit cent soixante nous prêtre avons inhumé Louis, âgé de trois mois, \
                   fils de Joseph Tremblay et de Louise Gagnon. Présent Paul Roy.",
            ents: vec![
                (Date, DATE),
                (Per, "Louis"),
                (Per, "Joseph Tremblay"),
                (Per, "Louise Gagnon"),
                (Per, "Paul Roy"),
            ],
        },
    ]
}

/// The paper's field table: (role, birth, death married, death single),
/// 2 = mandatory, 1 = optional, 0 = not in the mould.
const FIELD_TABLE: [(Role, u8, u8, u8); 19] = [
    (Role::RecordDate, 2, 2, 2),
    (Role::RecordPlace, 1, 1, 1),
    (Role::SubjectName, 2, 2, 2),
    (Role::EventDate, 1, 1, 1),
    (Role::SubjectAge, 1, 1, 1),
    (Role::FatherName, 2, 0, 2),
    (Role::FatherOccupation, 1, 0, 1),
    (Role::FatherResidence, 1, 0, 1),
    (Role::MotherName, 2, 0, 2),
    (Role::MotherOccupation, 1, 0, 1),
    (Role::MotherResidence, 1, 0, 1),
    (Role::SpouseName, 0, 2, 0),
    (Role::SpouseOccupation, 0, 1, 0),
    (Role::SpouseResidence, 0, 1, 0),
    (Role::GodfatherName, 1, 0, 0),
    (Role::GodfatherOccupation, 1, 0, 0),
    (Role::GodfatherResidence, 1, 0, 0),
    (Role::GodmotherName, 1, 0, 0),
    (Role::WitnessNames, 0, 1, 1),
];

fn criterion_validator() -> Check {
    let v = Validator::default();
    let mut fixtures = 0;
    for (col, id) in [MouldId::Birth, MouldId::DeathMarried, MouldId::DeathSingle].into_iter().enumerate() {
        let m = Mould::get(id);
        for (role, b, dm, ds) in FIELD_TABLE {
            let want = [b, dm, ds][col];
            let got = match m.slots.iter().find(|s| s.role == role) {
                None => 0,
                Some(s) if s.mandatory => 2,
                Some(_) => 1,
            };
            ensure!(got == want, "{id:?} {role:?}: table says {want}, mould has {got}");
        }
    }
    let specials = SpecialCaseLexicon::default();
    for g in goldens() {
        let act = fixture(g.text, &g.ents, g.act_type);
        let rec = v.validate(&act);
        ensure!(rec.mould == Some(g.mould), "{:?}: picked mould {:?}", g.mould, rec.mould);
        ensure!(rec.status.kind == StatusKind::Valid, "{:?}: golden act is {:?}", g.mould, rec.status);
        fixtures += 1;
        let mould = Mould::get(g.mould);

        // each mandatory field removed on its own
        for role in mould.mandatory() {
            let mut r = rec.clone();
            r.slots.remove(&role);
            let s = finalize_status(&r, Some(&mould), false, None);
            ensure!(
                s.kind == StatusKind::Invalid && s.reason == format!("missing {}", role.as_str()),
                "{:?} without {role:?}: {s:?}",
                g.mould
            );
            fixtures += 1;
        }
        // optional fields never decide validity
        for s in mould.slots.iter().filter(|s| !s.mandatory) {
            let mut r = rec.clone();
            r.slots.remove(&s.role);
            ensure!(finalize_status(&r, Some(&mould), false, None).kind == StatusKind::Valid, "{:?} optional {:?}", g.mould, s.role);
        }
        // removing entities end to end: every date (slots go by order, so an event
        // date left behind would take the record date's place), then the last
        // mandatory person of the mould
        let no_date: Vec<_> = g.ents.iter().filter(|(t, _)| *t != EntityTag::Date).cloned().collect();
        let s = v.validate(&fixture(g.text, &no_date, g.act_type)).status;
        ensure!(s.kind == StatusKind::Invalid && s.reason == "missing record_date", "{:?} without date: {s:?}", g.mould);
        let last = *mould.person_order.iter().rev().find(|r| mould.slots.iter().any(|s| s.role == **r && s.mandatory)).unwrap();
        let keep = mould.person_order.iter().position(|r| *r == last).unwrap();
        let mut seen = 0;
        let fewer: Vec<_> = g
            .ents
            .iter()
            .filter(|(t, _)| {
                if *t != EntityTag::Per {
                    return true;
                }
                seen += 1;
                seen <= keep
            })
            .cloned()
            .collect();
        let s = v.validate(&fixture(g.text, &fewer, g.act_type)).status;
        ensure!(
            s.kind == StatusKind::Invalid && s.reason == format!("missing {}", last.as_str()),
            "{:?} without {last:?}: {s:?}",
            g.mould
        );
        fixtures += 2;

        // two complete dates
        let fused = format!("{} {DATE2} nous prêtre soussigné.", g.text);
        let s = v.validate(&fixture(&fused, &g.ents, g.act_type)).status;
        ensure!(s.kind == StatusKind::Fusion, "{:?} fused: {s:?}", g.mould);
        fixtures += 1;

        // every keyword of every special-case group
        for (cat, words) in specials.groups() {
            for w in words {
                let text = format!("{} {w}.", g.text);
                let s = v.validate(&fixture(&text, &g.ents, g.act_type)).status;
                ensure!(
                    s.kind == StatusKind::SpecialCase && s.reason == cat.as_str(),
                    "{:?} with {w:?}: {s:?}",
                    g.mould
                );
                fixtures += 1;
            }
        }

        // precedence over all combinations of fusion, special case and a missing field
        let special_word = &specials.groups()[0].1[0];
        for mask in 0..8u8 {
            let (fusion, special, missing) = (mask & 1 != 0, mask & 2 != 0, mask & 4 != 0);
            let mut text = g.text.to_string();
            if fusion {
                text.push_str(&format!(" {DATE2} nous prêtre soussigné."));
            }
            if special {
                text.push_str(&format!(" {special_word}."));
            }
            let ents = if missing { &fewer } else { &g.ents };
            let s = v.validate(&fixture(&text, ents, g.act_type)).status;
            let want = if fusion {
                StatusKind::Fusion
            } else if special {
                StatusKind::SpecialCase
            } else if missing {
                StatusKind::Invalid
            } else {
                StatusKind::Valid
            };
            ensure!(s.kind == want, "{:?} mask {mask:03b}: {s:?}, expected {want:?}", g.mould);
            fixtures += 1;
        }
    }
    Ok(format!("{fixtures} fixtures"))
}

// ---------------------------------------------------------------------------
// 9. end-to-end determinism and isolation

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_dir(config: &Path, inputs: &Path, workers: usize, out: &Path) -> std::result::Result<(usize, usize), String> {
    let mut cfg = PipelineConfig::load(config).map_err(|e| e.to_string())?;
    cfg.workers = workers;
    let format = cfg.format;
    let res = Resources::load(cfg).map_err(|e| e.to_string())?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(inputs)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "xml"))
        .collect();
    files.sort();
    let o = run(&res, files.into_iter().map(Input::Path).collect()).map_err(|e| e.to_string())?;
    write_run(&o, out, format).map_err(|e| e.to_string())?;
    Ok((o.exports.len(), o.failures.len()))
}

fn dir_bytes(d: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(d)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

fn criterion_determinism() -> Check {
    let config = workspace().join("corpus/pipeline.toml");
    let corpus = workspace().join("corpus/synthetic");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, workers) in [1, 8, 8].into_iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let (exports, failures) = run_dir(&config, &corpus, workers, &out)?;
        ensure!(exports == 10 && failures == 0, "run {i}: {exports} exports, {failures} failures");
        outputs.push(dir_bytes(&out));
    }
    ensure!(outputs[0] == outputs[1], "1 vs 8 workers differ");
    ensure!(outputs[1] == outputs[2], "two runs with 8 workers differ");

    let broken = tmp.path().join("broken");
    std::fs::create_dir(&broken).unwrap();
    for (name, bytes) in dir_bytes(&corpus) {
        std::fs::write(broken.join(&name), bytes).unwrap();
    }
    std::fs::write(broken.join("SYN005.xml"), "<register id=\"SYN005\"><page").unwrap();
    let out = tmp.path().join("isolated");
    let (exports, failures) = run_dir(&config, &broken, 4, &out)?;
    ensure!(exports == 9 && failures == 1, "corrupt register: {exports} exports, {failures} failures");
    let errors = std::fs::read_to_string(out.join("errors.jsonl")).unwrap();
    ensure!(errors.lines().count() == 1 && errors.contains("SYN005"), "errors.jsonl: {errors}");
    let files = outputs[0].len();
    Ok(format!("{files} files identical over 3 runs; corrupt register isolated"))
}

// ---------------------------------------------------------------------------
// 10. corpus statistics

fn criterion_stats_shape() -> Check {
    let cfg = SynthConfig {
        registers: 10,
        acts_per_register: 100,
        type_shares: [0.544, 0.243, 0.121, 0.092],
        ..SynthConfig::default()
    };
    let docs: Vec<Input> = generate(&cfg)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| Input::Document(r.doc.register_id.clone(), Box::new(r.doc)))
        .collect();
    let pc = PipelineConfig { detector: Some(DetectorConfig::isolation_forest(42)), ..PipelineConfig::default() };
    let res = Resources::load(pc).map_err(|e| e.to_string())?;
    let out = run(&res, docs).map_err(|e| e.to_string())?;
    let report = stats_report(&out.stats);
    let rows: Vec<(String, f64)> = report
        .csv
        .lines()
        .filter(|l| l.starts_with("acts_by_type,"))
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[1].to_string(), c[3].parse().unwrap())
        })
        .collect();
    let want = [("birth", 54.4), ("death", 24.3), ("marriage", 12.1), ("undefined", 9.2), ("total", 100.0)];
    ensure!(rows.len() == want.len(), "rows {rows:?}");
    for ((name, pct), (wname, wpct)) in rows.iter().zip(want) {
        ensure!(name == wname && (pct - wpct).abs() <= 0.1 + 1e-9, "{name} {pct} vs {wname} {wpct}");
    }
    let table_order: Vec<&str> = report.table.lines().take(6).map(|l| l.split_whitespace().next().unwrap()).collect();
    ensure!(table_order == ["Act", "Birth", "Death", "Marriage", "Undefined", "Total"], "table rows {table_order:?}");
    Ok(rows.iter().map(|(n, p)| format!("{n} {p:.1}")).collect::<Vec<_>>().join(", "))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("line quality oracle", criterion_q_line),
        ("date round trip", criterion_dates),
        ("name correction exactness", criterion_names),
        ("isolation forest pages", criterion_isolation_forest),
        ("LOF equivalence", criterion_lof),
        ("metric oracles", criterion_metrics),
        ("assembly conservation", criterion_assembly),
        ("validator gates", criterion_validator),
        ("end-to-end determinism", criterion_determinism),
        ("stats shape", criterion_stats_shape),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
