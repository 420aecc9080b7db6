//! Record moulds, entity slotting, fusion and special-case detection, and the
//! final validity status of each act.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dates::NumeralGrammar;
use crate::domain::{
    Act, ActType, Entity, EntityTag, FieldValue, MouldId, PersonName, Role, Standardized, StatusKind, StructuredRecord,
    ValidityStatus,
};
use crate::error::{Error, Result};
use crate::names::NameStandardizer;
use crate::text::{fold, folded_words};

const DEFAULT_SPECIAL: &str = include_str!("../data/special_cases.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub role: Role,
    /// `None` for values read from the act text rather than from an entity.
    pub tag: Option<EntityTag>,
    pub mandatory: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mould {
    pub id: MouldId,
    pub slots: Vec<Slot>,
    /// Name roles filled by PER entities in reading order.
    pub person_order: Vec<Role>,
    /// Extra PER entities go to `witness_names`; otherwise to the overflow.
    pub witnesses: bool,
}

impl Mould {
    pub fn get(id: MouldId) -> Mould {
        use EntityTag::*;
        use Role::*;
        let s = |role, tag: EntityTag, mandatory| Slot { role, tag: Some(tag), mandatory };
        let mut slots = vec![
            s(RecordDate, Date, true),
            s(RecordPlace, Loc, false),
            s(SubjectName, Per, true),
            s(EventDate, Date, false),
            Slot { role: SubjectAge, tag: None, mandatory: false },
        ];
        let person = |slots: &mut Vec<Slot>, name: Role, mandatory: bool| {
            slots.push(s(name, Per, mandatory));
            slots.push(s(name.occupation_of().unwrap(), Occ, false));
            slots.push(s(name.residence_of().unwrap(), Loc, false));
        };
        let (person_order, witnesses) = match id {
            MouldId::Birth => {
                person(&mut slots, FatherName, true);
                person(&mut slots, MotherName, true);
                person(&mut slots, GodfatherName, false);
                person(&mut slots, GodmotherName, false);
                (vec![SubjectName, FatherName, MotherName, GodfatherName, GodmotherName], false)
            }
            MouldId::DeathMarried | MouldId::Marriage => {
                person(&mut slots, SpouseName, true);
                (vec![SubjectName, SpouseName], true)
            }
            MouldId::DeathSingle => {
                person(&mut slots, FatherName, true);
                person(&mut slots, MotherName, true);
                (vec![SubjectName, FatherName, MotherName], true)
            }
        };
        if witnesses {
            slots.push(s(WitnessNames, Per, false));
        }
        Mould {
            id,
            slots,
            person_order,
            witnesses,
        }
    }

    pub fn mandatory(&self) -> impl Iterator<Item = Role> + '_ {
        self.slots.iter().filter(|s| s.mandatory).map(|s| s.role)
    }

    pub fn has(&self, role: Role) -> bool {
        self.slots.iter().any(|s| s.role == role)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCategory {
    IndigenousCommunity,
    UnidentifiedSubject,
    Immigration,
}

impl SpecialCategory {
    pub const PRIORITY: [SpecialCategory; 3] = [
        SpecialCategory::IndigenousCommunity,
        SpecialCategory::UnidentifiedSubject,
        SpecialCategory::Immigration,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpecialCategory::IndigenousCommunity => "indigenous_community",
            SpecialCategory::UnidentifiedSubject => "unidentified_subject",
            SpecialCategory::Immigration => "immigration",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::PRIORITY.into_iter().find(|c| c.as_str() == s)
    }
}

/// Three disjoint keyword groups of folded words or phrases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialCaseLexicon {
    groups: Vec<(SpecialCategory, Vec<String>)>,
}

impl Default for SpecialCaseLexicon {
    fn default() -> Self {
        SpecialCaseLexicon::parse(DEFAULT_SPECIAL).expect("shipped special-case lexicon parses")
    }
}

impl SpecialCaseLexicon {
    /// `[category]` sections with one word or phrase per line.
    pub fn parse(src: &str) -> Result<Self> {
        let mut groups: Vec<(SpecialCategory, Vec<String>)> =
            SpecialCategory::PRIORITY.iter().map(|c| (*c, Vec::new())).collect();
        let mut current = None;
        let mut owner: HashMap<String, SpecialCategory> = HashMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = Some(SpecialCategory::parse(name.trim()).ok_or_else(|| {
                    Error::Config(format!("special cases line {}: unknown group {name:?}", i + 1))
                })?);
                continue;
            }
            let cat = current
                .ok_or_else(|| Error::Config(format!("special cases line {}: entry before a [group] header", i + 1)))?;
            let key = folded_words(line).join(" ");
            if let Some(prev) = owner.insert(key.clone(), cat) {
                if prev != cat {
                    return Err(Error::Config(format!(
                        "special-case keyword {line:?} is in both {} and {}",
                        prev.as_str(),
                        cat.as_str()
                    )));
                }
                continue;
            }
            groups.iter_mut().find(|(c, _)| *c == cat).unwrap().1.push(key);
        }
        Ok(SpecialCaseLexicon { groups })
    }

    pub fn groups(&self) -> &[(SpecialCategory, Vec<String>)] {
        &self.groups
    }

    /// First group, in priority order, with a keyword present in `text`.
    pub fn detect(&self, text: &str) -> Option<(SpecialCategory, String)> {
        let words = folded_words(text);
        self.groups.iter().find_map(|(cat, kws)| {
            kws.iter()
                .find(|k| crate::text::contains_phrase(&words, k))
                .map(|k| (*cat, k.clone()))
        })
    }
}

pub fn detect_special_case(act: &Act, lex: &SpecialCaseLexicon) -> Option<SpecialCategory> {
    lex.detect(&act.full_text).map(|(c, _)| c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeUnit {
    Years,
    Months,
    Weeks,
    Days,
    Hours,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Age {
    pub value: u64,
    pub unit: AgeUnit,
}

impl Age {
    pub fn in_years(&self) -> f64 {
        let v = self.value as f64;
        match self.unit {
            AgeUnit::Years => v,
            AgeUnit::Months => v / 12.0,
            AgeUnit::Weeks => v * 7.0 / 365.25,
            AgeUnit::Days => v / 365.25,
            AgeUnit::Hours => v / (24.0 * 365.25),
        }
    }
}

fn age_unit(word: &str) -> Option<AgeUnit> {
    Some(match word {
        "an" | "ans" | "annee" | "annees" | "year" | "years" => AgeUnit::Years,
        "mois" | "month" | "months" => AgeUnit::Months,
        "semaine" | "semaines" | "week" | "weeks" => AgeUnit::Weeks,
        "jour" | "jours" | "day" | "days" => AgeUnit::Days,
        "heure" | "heures" | "hour" | "hours" => AgeUnit::Hours,
        _ => return None,
    })
}

/// Reads "âgé(e) de <number> <unit>" (or "aged <number> <unit>").
pub fn parse_age(text: &str, grammar: &NumeralGrammar) -> Option<(Age, String)> {
    let words = folded_words(text);
    for (i, w) in words.iter().enumerate() {
        let start = match w.as_str() {
            "age" | "agee" if words.get(i + 1).map(String::as_str) == Some("de") => i + 2,
            "aged" => i + 1,
            _ => continue,
        };
        let Some(rel) = words[start..].iter().take(8).position(|t| age_unit(t).is_some()) else {
            continue;
        };
        let num = &words[start..start + rel];
        let value = if num.len() == 1 && num[0].chars().all(|c| c.is_ascii_digit()) {
            num[0].parse().ok()
        } else {
            grammar.parse_number(num).ok()
        };
        if let Some(value) = value {
            let unit = age_unit(&words[start + rel]).unwrap();
            let raw = words[i..=start + rel].join(" ");
            return Some((Age { value, unit }, raw));
        }
    }
    None
}

/// Cue words for choosing between the two death moulds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeathCues {
    pub married: Vec<String>,
    pub single: Vec<String>,
    pub young_age: Vec<String>,
    /// Ages below this many years mark an unmarried person.
    pub age_floor_years: f64,
}

impl Default for DeathCues {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        DeathCues {
            married: v(&["époux", "épouse", "mari", "femme", "veuf", "veuve"]),
            single: v(&["fils de", "fille de", "enfant de"]),
            young_age: v(&["semaine", "semaines", "heure", "heures", "quelques instants", "quelques minutes"]),
            age_floor_years: 12.0,
        }
    }
}

/// Married cues win; single cues, infant age words or a young parsed age
/// give the single mould; with no cue at all the single mould is the default.
pub fn pick_death_mould(text: &str, cues: &DeathCues, grammar: &NumeralGrammar) -> (MouldId, String) {
    let words = folded_words(text);
    let hit = |list: &[String]| list.iter().find(|k| crate::text::contains_phrase(&words, &fold(k))).cloned();
    if let Some(k) = hit(&cues.married) {
        return (MouldId::DeathMarried, format!("married cue: {k}"));
    }
    if let Some(k) = hit(&cues.single) {
        return (MouldId::DeathSingle, format!("single cue: {k}"));
    }
    if let Some(k) = hit(&cues.young_age) {
        return (MouldId::DeathSingle, format!("age cue: {k}"));
    }
    if let Some((age, raw)) = parse_age(text, grammar) {
        if age.in_years() < cues.age_floor_years {
            return (MouldId::DeathSingle, format!("age cue: {raw}"));
        }
    }
    (MouldId::DeathSingle, "default".into())
}

fn text_value(e: &Entity) -> FieldValue {
    FieldValue {
        raw: e.surface.clone(),
        standardized: Standardized::Text(e.surface.clone()),
        provenance: vec![e.id.clone()],
    }
}

/// Places the act's entities into the mould's roles by reading order.
///
/// PER entities fill the mould's name roles in order; DATE entities give the
/// record date then the event date; OCC and LOC attach to the nearest
/// preceding person on the same or the previous line. A LOC before every
/// person is the record place. Anything left over lands in `overflow`.
pub fn slot_entities(act: &Act, mould: Option<&Mould>) -> StructuredRecord {
    let mut rec = StructuredRecord::empty(&act.act_id, mould.map(|m| m.id));
    let Some(mould) = mould else {
        rec.overflow = act.entities.iter().map(|e| e.id.clone()).collect();
        return rec;
    };
    let mut line_pos: HashMap<&str, usize> = HashMap::new();
    for f in &act.fragments {
        for l in &f.line_ids {
            let n = line_pos.len();
            line_pos.entry(l.as_str()).or_insert(n);
        }
    }
    let line_of = |e: &Entity| line_pos.get(e.line_id.as_str()).copied().unwrap_or(usize::MAX);
    let mut persons = mould.person_order.iter();
    let mut last_person: Option<(Role, usize)> = None;
    let mut seen_person = false;
    for e in &act.entities {
        let placed = match e.tag {
            EntityTag::Per => {
                seen_person = true;
                match persons.next() {
                    Some(&role) => {
                        rec.slots.insert(role, text_value(e));
                        last_person = Some((role, line_of(e)));
                        true
                    }
                    None if mould.witnesses => {
                        let slot = rec.slots.entry(Role::WitnessNames).or_insert_with(|| FieldValue {
                            raw: String::new(),
                            standardized: Standardized::Text(String::new()),
                            provenance: Vec::new(),
                        });
                        if !slot.raw.is_empty() {
                            slot.raw.push_str("; ");
                        }
                        slot.raw.push_str(&e.surface);
                        slot.standardized = Standardized::Text(slot.raw.clone());
                        slot.provenance.push(e.id.clone());
                        last_person = Some((Role::WitnessNames, line_of(e)));
                        true
                    }
                    None => {
                        last_person = None;
                        false
                    }
                }
            }
            EntityTag::Date => {
                let role = if !rec.slots.contains_key(&Role::RecordDate) {
                    Some(Role::RecordDate)
                } else if !rec.slots.contains_key(&Role::EventDate) {
                    Some(Role::EventDate)
                } else {
                    None
                };
                match role {
                    Some(r) => {
                        rec.slots.insert(r, text_value(e));
                        true
                    }
                    None => false,
                }
            }
            EntityTag::Loc if !seen_person && !rec.slots.contains_key(&Role::RecordPlace) => {
                rec.slots.insert(Role::RecordPlace, text_value(e));
                true
            }
            EntityTag::Occ | EntityTag::Loc => {
                let target = last_person
                    .filter(|(_, line)| line_of(e) >= *line && line_of(e) <= line.saturating_add(1))
                    .and_then(|(role, _)| match e.tag {
                        EntityTag::Occ => role.occupation_of(),
                        _ => role.residence_of(),
                    })
                    .filter(|r| mould.has(*r) && !rec.slots.contains_key(r));
                match target {
                    Some(r) => {
                        rec.slots.insert(r, text_value(e));
                        true
                    }
                    None => false,
                }
            }
        };
        if !placed {
            rec.overflow.push(e.id.clone());
        }
    }
    rec
}

/// Two or more complete written dates suggest two acts merged into one.
pub fn detect_fusion(text: &str, grammar: &NumeralGrammar) -> bool {
    grammar.extract_dates(text).iter().filter(|d| d.complete).count() >= 2
}

/// Precedence: fusion, special case, undefined type, missing mandatory field, valid.
pub fn finalize_status(
    record: &StructuredRecord,
    mould: Option<&Mould>,
    fusion: bool,
    special: Option<SpecialCategory>,
) -> ValidityStatus {
    if fusion {
        return ValidityStatus::with(StatusKind::Fusion, "more than one complete date");
    }
    if let Some(c) = special {
        return ValidityStatus::with(StatusKind::SpecialCase, c.as_str());
    }
    let Some(mould) = mould else {
        return ValidityStatus::with(StatusKind::Invalid, "undefined type");
    };
    let missing: Vec<&str> = mould.mandatory().filter(|r| !record.filled(*r)).map(|r| r.as_str()).collect();
    if !missing.is_empty() {
        return ValidityStatus::with(StatusKind::Invalid, format!("missing {}", missing.join(", ")));
    }
    ValidityStatus::valid()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ValidationConfig {
    pub death: DeathCues,
}

/// Shared, immutable resources for standardizing and validating records.
#[derive(Clone, Debug, Default)]
pub struct Validator {
    pub grammar: NumeralGrammar,
    pub names: NameStandardizer,
    pub special: SpecialCaseLexicon,
    pub config: ValidationConfig,
}

impl Validator {
    pub fn mould_for(&self, act: &Act) -> Option<(Mould, String)> {
        match act.act_type {
            ActType::Birth => Some((Mould::get(MouldId::Birth), String::new())),
            ActType::Marriage => Some((Mould::get(MouldId::Marriage), String::new())),
            ActType::Death => {
                let (id, why) = pick_death_mould(&act.full_text, &self.config.death, &self.grammar);
                Some((Mould::get(id), why))
            }
            ActType::Undefined => None,
        }
    }

    /// Replaces raw text values by parsed dates and split names.
    /// Returns true when a date phrase holds two different years.
    pub fn standardize(&self, rec: &mut StructuredRecord, act_type: ActType) -> bool {
        let mut conflicting = false;
        let anchor = match rec.slots.get_mut(&Role::RecordDate) {
            Some(v) => match self.grammar.parse_date(&v.raw, None) {
                Ok(p) => {
                    conflicting |= p.conflicting_years;
                    v.standardized = Standardized::Date(p.date.clone());
                    Some(p.date)
                }
                Err(e) => {
                    rec.notes.push(format!("record_date: {e}"));
                    None
                }
            },
            None => None,
        };
        if let Some(v) = rec.slots.get_mut(&Role::EventDate) {
            match self.grammar.parse_date(&v.raw, anchor.as_ref()) {
                Ok(p) => {
                    conflicting |= p.conflicting_years;
                    v.standardized = Standardized::Date(p.date);
                }
                Err(e) => rec.notes.push(format!("event_date: {e}")),
            }
        }
        let mut ambiguous = Vec::new();
        for (role, v) in rec.slots.iter_mut() {
            let name = |raw: &str| self.names.standardize(raw, act_type, *role);
            match role {
                Role::WitnessNames => {
                    let names: Vec<PersonName> = v.raw.split("; ").map(name).collect();
                    v.standardized = Standardized::Names(names);
                }
                Role::SubjectName
                | Role::FatherName
                | Role::MotherName
                | Role::SpouseName
                | Role::GodfatherName
                | Role::GodmotherName => {
                    let n = name(&v.raw);
                    if !n.corrected && n.correction_candidates.len() > 1 {
                        ambiguous.push(role.as_str());
                    }
                    v.standardized = Standardized::Name(n);
                }
                _ => {}
            }
        }
        for r in ambiguous {
            rec.notes.push(format!("{r}: ambiguous name correction"));
        }
        conflicting
    }

    /// Full validation of one act.
    pub fn validate(&self, act: &Act) -> StructuredRecord {
        if let Some(reason) = &act.rejected {
            let mut rec = slot_entities(act, None);
            rec.status = ValidityStatus::with(StatusKind::Invalid, reason.clone());
            return rec;
        }
        let mould = self.mould_for(act);
        let mut rec = slot_entities(act, mould.as_ref().map(|(m, _)| m));
        if let Some((m, why)) = &mould {
            if m.id == MouldId::DeathSingle || m.id == MouldId::DeathMarried {
                rec.notes.push(format!("mould {}: {why}", m.id.as_str()));
            }
            if !rec.filled(Role::SubjectAge) {
                if let Some((age, raw)) = parse_age(&act.full_text, &self.grammar) {
                    let unit = serde_json::to_value(age.unit).unwrap();
                    rec.slots.insert(
                        Role::SubjectAge,
                        FieldValue {
                            raw,
                            standardized: Standardized::Text(format!("{} {}", age.value, unit.as_str().unwrap())),
                            provenance: Vec::new(),
                        },
                    );
                }
            }
        }
        let conflicting = self.standardize(&mut rec, act.act_type);
        if act.orphan {
            rec.notes.push("orphan fragment sequence".into());
        }
        if act.on_no_act_page {
            rec.notes.push("on a page classified no_act".into());
        }
        let fusion = conflicting || detect_fusion(&act.full_text, &self.grammar);
        let special = detect_special_case(act, &self.special);
        rec.status = finalize_status(&rec, mould.as_ref().map(|(m, _)| m), fusion, special);
        rec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ActFragment, ActClass, Polygon};

    fn act(text: &str, ents: &[(EntityTag, &str, &str)], t: ActType) -> Act {
        let lines: Vec<String> = ents.iter().map(|(_, l, _)| l.to_string()).collect();
        let mut a = Act::assemble("a1", vec![], &[]);
        a.fragments.push(ActFragment {
            fragment_id: "f".into(),
            page_id: "p".into(),
            act_class: ActClass::Full,
            polygon: Polygon::rect(0, 0, 10, 10),
            line_ids: {
                let mut l = lines.clone();
                l.dedup();
                l
            },
            sequence_index: 0,
        });
        a.full_text = text.into();
        a.act_type = t;
        a.entities = ents
            .iter()
            .enumerate()
            .map(|(i, (tag, line, s))| Entity {
                id: format!("e{i}"),
                tag: *tag,
                line_id: line.to_string(),
                char_start: 0,
                char_end: s.chars().count(),
                surface: s.to_string(),
            })
            .collect();
        a
    }

    #[test]
    fn mould_table() {
        let m = |id| Mould::get(id).mandatory().collect::<Vec<_>>();
        use Role::*;
        assert_eq!(m(MouldId::Birth), [RecordDate, SubjectName, FatherName, MotherName]);
        assert_eq!(m(MouldId::DeathMarried), [RecordDate, SubjectName, SpouseName]);
        assert_eq!(m(MouldId::DeathSingle), [RecordDate, SubjectName, FatherName, MotherName]);
        assert!(!Mould::get(MouldId::Birth).has(WitnessNames));
        assert!(Mould::get(MouldId::DeathSingle).has(WitnessNames));
    }

    #[test]
    fn birth_slotting() {
        use EntityTag::*;
        let a = act("", &[(Per, "l1", "A"), (Per, "l1", "B"), (Per, "l2", "C")], ActType::Birth);
        let r = slot_entities(&a, Some(&Mould::get(MouldId::Birth)));
        assert_eq!(r.slots[&Role::SubjectName].raw, "A");
        assert_eq!(r.slots[&Role::FatherName].raw, "B");
        assert_eq!(r.slots[&Role::MotherName].raw, "C");
        assert_eq!(r.status.kind, StatusKind::Pending);
    }

    #[test]
    fn death_married_slotting_and_extras() {
        use EntityTag::*;
        let a = act(
            "",
            &[
                (Loc, "l0", "Québec"),
                (Date, "l0", "le premier mars"),
                (Per, "l1", "A"),
                (Per, "l1", "B"),
                (Occ, "l1", "cultivateur"),
                (Per, "l5", "W1"),
                (Per, "l5", "W2"),
                (Occ, "l9", "menuisier"),
            ],
            ActType::Death,
        );
        let r = slot_entities(&a, Some(&Mould::get(MouldId::DeathMarried)));
        assert_eq!(r.slots[&Role::RecordPlace].raw, "Québec");
        assert_eq!(r.slots[&Role::SubjectName].raw, "A");
        assert_eq!(r.slots[&Role::SpouseName].raw, "B");
        assert_eq!(r.slots[&Role::SpouseOccupation].raw, "cultivateur");
        assert_eq!(r.slots[&Role::WitnessNames].raw, "W1; W2");
        assert_eq!(r.overflow, ["e7"]);
    }

    #[test]
    fn empty_act() {
        let a = act("", &[], ActType::Birth);
        let r = slot_entities(&a, Some(&Mould::get(MouldId::Birth)));
        assert!(r.slots.is_empty());
        assert_eq!(r.status, ValidityStatus::pending());
    }

    #[test]
    fn death_moulds() {
        let g = NumeralGrammar::default();
        let c = DeathCues::default();
        assert_eq!(pick_death_mould("Marie, épouse de Jean", &c, &g).0, MouldId::DeathMarried);
        assert_eq!(
            pick_death_mould("Marie, fille de Jean, âgée de trois semaines", &c, &g).0,
            MouldId::DeathSingle
        );
        assert_eq!(pick_death_mould("Marie", &c, &g), (MouldId::DeathSingle, "default".into()));
        let (m, why) = pick_death_mould("Paul, âgé de cinq ans", &c, &g);
        assert_eq!(m, MouldId::DeathSingle);
        assert!(why.starts_with("age"));
        assert_eq!(pick_death_mould("veuve de Paul, fille de Jean", &c, &g).0, MouldId::DeathMarried);
    }

    #[test]
    fn ages() {
        let g = NumeralGrammar::default();
        let (a, _) = parse_age("décédé hier âgé de soixante et onze ans", &g).unwrap();
        assert_eq!(a, Age { value: 71, unit: AgeUnit::Years });
        assert!(parse_age("âgé de", &g).is_none());
    }

    #[test]
    fn fusion() {
        let g = NumeralGrammar::default();
        assert!(!detect_fusion("le premier mars mil neuf cent, né la veille", &g));
        assert!(detect_fusion(
            "le premier mars mil neuf cent ... le deux mars mil neuf cent",
            &g
        ));
        assert!(!detect_fusion("", &g));
    }

    #[test]
    fn special_cases() {
        let lex = SpecialCaseLexicon::default();
        let a = act("enfant de parents inconnus, une inconnue", &[], ActType::Birth);
        assert_eq!(detect_special_case(&a, &lex), Some(SpecialCategory::UnidentifiedSubject));
        let a = act("rien", &[], ActType::Birth);
        assert_eq!(detect_special_case(&a, &lex), None);
        let a = act("immigrant, sauvage", &[], ActType::Birth);
        assert_eq!(detect_special_case(&a, &lex), Some(SpecialCategory::IndigenousCommunity));
        assert!(SpecialCaseLexicon::parse("[immigration]\nx\n[indigenous_community]\nX\n").is_err());
    }

    #[test]
    fn status_precedence() {
        let m = Mould::get(MouldId::Birth);
        let mut r = StructuredRecord::empty("a", Some(MouldId::Birth));
        let fv = |s: &str| FieldValue {
            raw: s.into(),
            standardized: Standardized::Text(s.into()),
            provenance: vec![],
        };
        for role in [Role::RecordDate, Role::SubjectName, Role::FatherName] {
            r.slots.insert(role, fv("x"));
        }
        assert_eq!(
            finalize_status(&r, Some(&m), false, None),
            ValidityStatus::with(StatusKind::Invalid, "missing mother_name")
        );
        assert_eq!(finalize_status(&r, Some(&m), true, None).kind, StatusKind::Fusion);
        assert_eq!(
            finalize_status(&r, Some(&m), false, Some(SpecialCategory::Immigration)).kind,
            StatusKind::SpecialCase
        );
        r.slots.insert(Role::MotherName, fv("y"));
        assert_eq!(finalize_status(&r, Some(&m), false, None), ValidityStatus::valid());
        assert_eq!(finalize_status(&r, None, false, None).reason, "undefined type");
    }
}
