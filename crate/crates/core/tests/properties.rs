use std::collections::BTreeMap;

use actes::assembly::group_fragments;
use actes::classify::{classify_text, Keyword, KeywordTable};
use actes::dates::{days_in_month, generate_number, NumeralGrammar};
use actes::domain::*;
use actes::geometry::Point;
use actes::io::{read_register_str, write_register, Format};
use actes::metrics::{average_precision, edit_distance, iou};
use actes::names::{candidate_pool, name_tokens, split_name, visual_distance, NameThesaurus, VisualCostTable};
use actes::outlier::{FeatureKind, FeatureVector, GridSpec, LocalOutlierFactor};
use actes::quality::q_line;
use actes::synth::{generate, SynthConfig};
use actes::validate::{finalize_status, slot_entities, Mould};
use proptest::prelude::*;

fn frag(i: usize, class: ActClass) -> ActFragment {
    ActFragment {
        fragment_id: format!("f{i:02}"),
        page_id: "p".into(),
        act_class: class,
        polygon: Polygon::rect(0, 0, 10, 10),
        line_ids: vec![format!("l{i}")],
        sequence_index: i as i64,
    }
}

fn class_strategy() -> impl Strategy<Value = ActClass> {
    prop_oneof![Just(ActClass::Start), Just(ActClass::Center), Just(ActClass::End), Just(ActClass::Full)]
}

fn rect_strategy() -> impl Strategy<Value = Polygon> {
    (0i64..500, 0i64..500, 1i64..300, 1i64..300).prop_map(|(x, y, w, h)| Polygon::rect(x, y, x + w, y + h))
}

const SURNAMES: [&str; 12] = [
    "Tremblay", "Gagnon", "Roy", "Côté", "Bouchard", "Gauthier", "Morin", "Lavoie", "Fortin", "Gagné", "Ouellet", "Pelletier",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn grouping_keeps_every_fragment_in_order(classes in prop::collection::vec(class_strategy(), 0..16)) {
        let seq: Vec<ActFragment> = classes.iter().enumerate().map(|(i, c)| frag(i, *c)).collect();
        let groups = group_fragments(seq.clone());
        let flat: Vec<String> = groups.iter().flat_map(|(g, _)| g.iter().map(|f| f.fragment_id.clone())).collect();
        let ids: Vec<String> = seq.iter().map(|f| f.fragment_id.clone()).collect();
        prop_assert_eq!(flat, ids);
        for (g, orphan) in &groups {
            let closed = match g.as_slice() {
                [f] => f.act_class == ActClass::Full,
                [first, middle @ .., last] => {
                    first.act_class == ActClass::Start
                        && last.act_class == ActClass::End
                        && middle.iter().all(|f| f.act_class == ActClass::Center)
                }
                [] => false,
            };
            prop_assert_eq!(!closed, *orphan);
        }
    }

    #[test]
    fn q_line_ignores_order_and_scale(
        heights in prop::collection::vec(1u32..200, 1..50),
        alpha in 0u32..=8,
        shift in 0usize..50,
        scale_pow in -3i32..4,
    ) {
        // dyadic alpha and scale keep the arithmetic exact
        let h: Vec<f64> = heights.iter().map(|x| *x as f64).collect();
        let a = alpha as f64 / 8.0;
        let base = q_line(&h, a).unwrap();
        let mut rotated = h.clone();
        let k = shift % rotated.len();
        rotated.rotate_left(k);
        rotated.reverse();
        prop_assert_eq!(q_line(&rotated, a).unwrap().good, base.good);
        let c = 2f64.powi(scale_pow);
        let scaled: Vec<f64> = h.iter().map(|x| x * c).collect();
        let s = q_line(&scaled, a).unwrap();
        prop_assert_eq!(s.good, base.good);
        prop_assert_eq!(s.class, base.class);
    }

    #[test]
    fn number_words_round_trip(n in 0u64..=9999) {
        let g = NumeralGrammar::default();
        let text = generate_number(n).unwrap();
        let words: Vec<&str> = text.split_whitespace().collect();
        prop_assert_eq!(g.parse_number(&words).unwrap(), n);
    }

    #[test]
    fn complete_dates_exist_on_the_calendar(day in 1u32..=31, month in 1u32..=12, year in 1850i32..1917) {
        let g = NumeralGrammar::default();
        let months = ["janvier", "février", "mars", "avril", "mai", "juin", "juillet", "août", "septembre", "octobre", "novembre", "décembre"];
        let text = format!(
            "le {} {} {}",
            if day == 1 { "premier".to_string() } else { generate_number(day as u64).unwrap() },
            months[month as usize - 1],
            generate_number(year as u64).unwrap()
        );
        match g.parse_date(&text, None) {
            Ok(p) if p.date.complete => {
                prop_assert!(day <= days_in_month(year, month));
                prop_assert_eq!((p.date.year, p.date.month, p.date.day), (Some(year), Some(month), Some(day)));
            }
            _ => prop_assert!(day > days_in_month(year, month), "{text} refused"),
        }
    }

    #[test]
    fn pools_grow_with_radius(name in "[a-zé]{1,9}", r in 0usize..3) {
        let th = NameThesaurus::sample();
        let small = candidate_pool(&name, &th, r);
        let large = candidate_pool(&name, &th, r + 1);
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn visual_cost_is_symmetric(a in "[a-z]{0,8}", b in "[a-z]{0,8}") {
        let costs = VisualCostTable::default();
        prop_assert_eq!(visual_distance(&a, &a, &costs), 0);
        prop_assert_eq!(visual_distance(&a, &b, &costs), visual_distance(&b, &a, &costs));
    }

    #[test]
    fn split_name_keeps_tokens(
        picks in prop::collection::vec(0usize..SURNAMES.len(), 1..5),
        t in 0usize..4,
        subject in any::<bool>(),
    ) {
        let th = NameThesaurus::sample();
        let raw = picks.iter().map(|i| SURNAMES[*i]).collect::<Vec<_>>().join(" ");
        let role = if subject { Role::SubjectName } else { Role::FatherName };
        let p = split_name(&raw, &th, ActType::ALL[t], role);
        let mut out: Vec<String> = p.first_names.iter().chain(&p.last_names).cloned().collect();
        let mut input = name_tokens(&raw);
        out.sort();
        input.sort();
        prop_assert_eq!(out, input);
        prop_assert_eq!(split_name(&raw, &th, ActType::ALL[t], role), p);
    }

    #[test]
    fn typing_ignores_word_order_and_repeats(seed in any::<u64>(), repeat in 1usize..3) {
        use rand::{seq::SliceRandom, SeedableRng};
        let table = KeywordTable::default();
        let text = "le corps de feu Marie Roy a été inhumé au cimetière en présence des témoins";
        // the death keywords here are single words; phrases only match in order
        let mut w: Vec<&str> = text.split_whitespace().collect();
        w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = vec![w.join(" "); repeat].join(" ");
        let a = classify_text(text, &table, 0.0);
        let b = classify_text(&shuffled, &table, 0.0);
        prop_assert_eq!(a.act_type, ActType::Death);
        prop_assert_eq!(b.act_type, a.act_type);
        prop_assert_eq!(b.scores, a.scores);
    }

    #[test]
    fn iou_bounds_identity_translation(a in rect_strategy(), b in rect_strategy(), dx in 0i64..200, dy in 0i64..200) {
        let v = iou(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((iou(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((iou(&b, &a).unwrap() - v).abs() < 1e-12);
        let moved = iou(&a.translate(dx, dy), &b.translate(dx, dy)).unwrap();
        prop_assert!((moved - v).abs() < 1e-9);
    }

    #[test]
    fn ap_never_rises_with_threshold(
        gt in prop::collection::vec(rect_strategy(), 0..5),
        pred in prop::collection::vec((rect_strategy(), 0u32..100), 0..6),
    ) {
        let g: Vec<Vec<Point<f64>>> = gt.iter().map(|p| p.to_points()).collect();
        let p: Vec<(Vec<Point<f64>>, f64)> = pred.iter().map(|(r, s)| (r.to_points(), *s as f64)).collect();
        let aps: Vec<f64> = (0..10).map(|i| average_precision(&g, &p, 0.5 + 0.05 * i as f64)).collect();
        for w in aps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{aps:?}");
        }
    }

    #[test]
    fn edit_distance_symmetric(a in "[abc ]{0,10}", b in "[abc ]{0,10}") {
        let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(edit_distance(&x, &y), edit_distance(&y, &x));
        prop_assert!(edit_distance(&x, &y) <= x.len().max(y.len()));
    }

    #[test]
    fn filling_a_field_never_invalidates(mould in 0usize..4, mask in any::<u32>(), extra in 0usize..19) {
        let m = Mould::get(MouldId::ALL[mould]);
        let mut rec = StructuredRecord::empty("A-act00001", Some(m.id));
        for (i, s) in m.slots.iter().enumerate() {
            if mask & (1 << i) != 0 {
                rec.slots.insert(s.role, FieldValue { raw: "x".into(), standardized: Standardized::Text("x".into()), provenance: vec![] });
            }
        }
        let before = finalize_status(&rec, Some(&m), false, None);
        let role = m.slots[extra % m.slots.len()].role;
        rec.slots.insert(role, FieldValue { raw: "y".into(), standardized: Standardized::Text("x".into()), provenance: vec![] });
        let after = finalize_status(&rec, Some(&m), false, None);
        if before.kind == StatusKind::Valid {
            prop_assert_eq!(after.kind, StatusKind::Valid);
        }
    }

    #[test]
    fn slotting_places_every_entity_once(tags in prop::collection::vec(0usize..4, 0..14), mould in 0usize..4) {
        let all = [EntityTag::Per, EntityTag::Loc, EntityTag::Date, EntityTag::Occ];
        let m = Mould::get(MouldId::ALL[mould]);
        let mut act = Act::assemble("A-act00001", vec![], &[]);
        act.full_text = "x".into();
        act.entities = tags
            .iter()
            .enumerate()
            .map(|(i, t)| Entity {
                id: format!("e{i}"),
                tag: all[*t],
                line_id: "l".into(),
                char_start: 0,
                char_end: 1,
                surface: "x".into(),
            })
            .collect();
        let rec = slot_entities(&act, Some(&m));
        let mut seen: Vec<String> = rec.slots.values().flat_map(|v| v.provenance.clone()).chain(rec.overflow.clone()).collect();
        seen.sort();
        let mut ids: Vec<String> = act.entities.iter().map(|e| e.id.clone()).collect();
        ids.sort();
        prop_assert_eq!(seen, ids);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn registers_round_trip(seed in any::<u64>(), acts in 1usize..12, jsonl in any::<bool>()) {
        let cfg = SynthConfig { seed, registers: 1, acts_per_register: acts, ..SynthConfig::default() };
        let doc = generate(&cfg).unwrap().remove(0).doc;
        let format = if jsonl { Format::Jsonl } else { Format::Xml };
        let text = write_register(&doc, format).unwrap();
        let back = read_register_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(write_register(&back, format).unwrap(), text);
    }
}

#[test]
fn lof_on_a_uniform_grid_is_near_one() {
    let spec = GridSpec::new(1, 2).unwrap();
    let pts: Vec<FeatureVector<f64>> = (0..10)
        .flat_map(|i| (0..10).map(move |j| (i, j)))
        .map(|(i, j)| FeatureVector { kind: FeatureKind::LineCount, spec, values: vec![i as f64, j as f64] })
        .collect();
    for k in [4, 8] {
        let m = LocalOutlierFactor::fit(&pts, k).unwrap();
        for i in 0..pts.len() {
            let s = m.training_score(i);
            assert!((0.8..=1.2).contains(&s), "k {k} point {i}: {s}");
        }
    }
}

#[test]
fn added_keyword_only_moves_its_type() {
    let text = "baptisé ce jour parrain marraine soussigné";
    let mut sets: BTreeMap<ActType, Vec<Keyword>> = BTreeMap::new();
    let kw = |w: &str| Keyword { word: w.into(), accent_sensitive: false };
    sets.insert(ActType::Birth, vec![kw("baptisé"), kw("né"), kw("ondoyé")]);
    sets.insert(ActType::Death, vec![kw("inhumé"), kw("décédé")]);
    let before = classify_text(text, &KeywordTable::new(sets.clone()).unwrap(), 0.0);
    sets.get_mut(&ActType::Birth).unwrap().push(kw("parrain"));
    let after = classify_text(text, &KeywordTable::new(sets).unwrap(), 0.0);
    assert!(after.scores[&ActType::Birth] >= before.scores[&ActType::Birth]);
    assert_eq!(after.scores[&ActType::Death], before.scores[&ActType::Death]);
}
