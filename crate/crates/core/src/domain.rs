//! Shared vocabulary: pages, lines, entities, act fragments, acts and records.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point};
use crate::text;

pub type Pixel = i64;

/// Closed polygon in integer image coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub points: Vec<[Pixel; 2]>,
}

impl Polygon {
    /// Checked constructor.
    pub fn new(points: Vec<[Pixel; 2]>) -> Result<Self, Vec<Violation>> {
        let p = Polygon { points };
        let v = p.violations("polygon");
        if v.is_empty() {
            Ok(p)
        } else {
            Err(v)
        }
    }

    pub fn rect(x0: Pixel, y0: Pixel, x1: Pixel, y1: Pixel) -> Self {
        Polygon {
            points: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    pub fn to_points<T: crate::Real>(&self) -> Vec<Point<T>> {
        self.points
            .iter()
            .map(|[x, y]| Point::new(T::from_i64(*x).unwrap(), T::from_i64(*y).unwrap()))
            .collect()
    }

    pub fn area(&self) -> f64 {
        geometry::area(&self.to_points::<f64>())
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bbox(&self) -> Option<(Pixel, Pixel, Pixel, Pixel)> {
        let mut it = self.points.iter();
        let [x, y] = *it.next()?;
        Some(it.fold((x, y, x, y), |(x0, y0, x1, y1), [px, py]| {
            (x0.min(*px), y0.min(*py), x1.max(*px), y1.max(*py))
        }))
    }

    pub fn height(&self) -> Option<Pixel> {
        self.bbox().map(|(_, y0, _, y1)| y1 - y0)
    }

    pub fn translate(&self, dx: Pixel, dy: Pixel) -> Polygon {
        Polygon {
            points: self.points.iter().map(|[x, y]| [x + dx, y + dy]).collect(),
        }
    }

    pub fn violations(&self, field: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.points.len() < 3 {
            out.push(Violation::new(field, "points < 3"));
            return out;
        }
        if self.points.iter().any(|[x, y]| *x < 0 || *y < 0) {
            out.push(Violation::new(field, "negative coordinate"));
        }
        let pts = self.to_points::<f64>();
        if geometry::area(&pts) <= 0.0 {
            out.push(Violation::new(field, "zero area"));
        } else if !geometry::is_simple(&pts) {
            out.push(Violation::new(field, "self-intersecting"));
        }
        out
    }
}

/// One broken invariant: the offending field, the rule, and where it was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
    pub location: String,
}

impl Violation {
    pub fn new(field: &str, rule: &str) -> Self {
        Violation {
            field: field.to_string(),
            rule: rule.to_string(),
            location: String::new(),
        }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = location.into();
        self
    }

    /// `"field rule"` without the location, convenient for matching.
    pub fn key(&self) -> String {
        format!("{} {}", self.field, self.rule)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{} {}", self.field, self.rule)
        } else {
            write!(f, "{} {} ({})", self.field, self.rule, self.location)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub id: String,
    pub polygon: Polygon,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_date_line: Option<bool>,
    /// Free-form zone label (e.g. marginalia); carried through, never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone_label: Option<String>,
}

impl TextLine {
    pub fn new(id: impl Into<String>, polygon: Polygon, text: impl Into<String>) -> Self {
        TextLine {
            id: id.into(),
            polygon,
            text: text.into(),
            confidence: None,
            is_date_line: None,
            zone_label: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityTag {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "DATE")]
    Date,
    #[serde(rename = "OCC")]
    Occ,
}

impl EntityTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntityTag::Per => "PER",
            EntityTag::Loc => "LOC",
            EntityTag::Date => "DATE",
            EntityTag::Occ => "OCC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PER" => Some(EntityTag::Per),
            "LOC" => Some(EntityTag::Loc),
            "DATE" => Some(EntityTag::Date),
            "OCC" => Some(EntityTag::Occ),
            _ => None,
        }
    }
}

/// Tagged span of a line. Offsets count Unicode scalar values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub tag: EntityTag,
    pub line_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

impl Entity {
    /// Builds an entity over `line`, deriving the surface from the offsets.
    pub fn over(
        id: impl Into<String>,
        tag: EntityTag,
        line: &TextLine,
        char_start: usize,
        char_end: usize,
    ) -> Result<Self, Vec<Violation>> {
        if char_start >= char_end {
            return Err(vec![Violation::new("entity.span", "start >= end")]);
        }
        let surface = text::char_slice(&line.text, char_start, char_end)
            .ok_or_else(|| vec![Violation::new("entity.span", "out of line text")])?;
        Ok(Entity {
            id: id.into(),
            tag,
            line_id: line.id.clone(),
            char_start,
            char_end,
            surface: surface.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Portrait,
    Landscape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PageClass {
    Act,
    NoAct,
    #[default]
    Unset,
}

impl PageClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PageClass::Act => "act",
            PageClass::NoAct => "no_act",
            PageClass::Unset => "unset",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "act" => Some(PageClass::Act),
            "no_act" => Some(PageClass::NoAct),
            "unset" => Some(PageClass::Unset),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActClass {
    Start,
    Center,
    End,
    Full,
}

impl ActClass {
    pub const ALL: [ActClass; 4] = [ActClass::Start, ActClass::Center, ActClass::End, ActClass::Full];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActClass::Start => "start",
            ActClass::Center => "center",
            ActClass::End => "end",
            ActClass::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "start" => Some(ActClass::Start),
            "center" => Some(ActClass::Center),
            "end" => Some(ActClass::End),
            "full" => Some(ActClass::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActFragment {
    pub fragment_id: String,
    pub page_id: String,
    pub act_class: ActClass,
    pub polygon: Polygon,
    pub line_ids: Vec<String>,
    pub sequence_index: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognizedPage {
    pub page_id: String,
    pub register_id: String,
    #[serde(default)]
    pub orientation: Orientation,
    pub width: Pixel,
    pub height: Pixel,
    #[serde(default)]
    pub lines: Vec<TextLine>,
    #[serde(default)]
    pub entities: Vec<Entity>,
    /// Act zones detected on this page.
    #[serde(default)]
    pub fragments: Vec<ActFragment>,
    #[serde(default)]
    pub page_class: PageClass,
}

impl RecognizedPage {
    pub fn new(page_id: impl Into<String>, register_id: impl Into<String>, width: Pixel, height: Pixel) -> Self {
        RecognizedPage {
            page_id: page_id.into(),
            register_id: register_id.into(),
            orientation: if width > height {
                Orientation::Landscape
            } else {
                Orientation::Portrait
            },
            width,
            height,
            lines: Vec::new(),
            entities: Vec::new(),
            fragments: Vec::new(),
            page_class: PageClass::Unset,
        }
    }

    pub fn line(&self, id: &str) -> Option<&TextLine> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// Splits a landscape double page at `width / 2` into two portrait pages.
    /// Lines, entities and fragments follow the half containing their bounding
    /// box centre; right-half geometry is shifted to its own origin.
    pub fn split_landscape(&self) -> [RecognizedPage; 2] {
        let mid = self.width / 2;
        let right_of = |poly: &Polygon| {
            poly.bbox()
                .map(|(x0, _, x1, _)| x0 + x1 >= 2 * mid)
                .unwrap_or(false)
        };
        let mut halves = [
            RecognizedPage::new(format!("{}L", self.page_id), &self.register_id, mid, self.height),
            RecognizedPage::new(
                format!("{}R", self.page_id),
                &self.register_id,
                self.width - mid,
                self.height,
            ),
        ];
        for h in &mut halves {
            h.orientation = Orientation::Portrait;
        }
        let clamp = |poly: &Polygon, right: bool| {
            let (lo, hi, dx) = if right {
                (mid, self.width, -mid)
            } else {
                (0, mid, 0)
            };
            Polygon {
                points: poly
                    .points
                    .iter()
                    .map(|[x, y]| [(*x).clamp(lo, hi) + dx, *y])
                    .collect(),
            }
        };
        let mut side_of_line = HashMap::new();
        for line in &self.lines {
            let right = right_of(&line.polygon);
            side_of_line.insert(line.id.as_str(), right);
            let mut l = line.clone();
            l.polygon = clamp(&line.polygon, right);
            halves[right as usize].lines.push(l);
        }
        for e in &self.entities {
            let right = side_of_line.get(e.line_id.as_str()).copied().unwrap_or(false);
            halves[right as usize].entities.push(e.clone());
        }
        for f in &self.fragments {
            let right = right_of(&f.polygon);
            let mut g = f.clone();
            g.polygon = clamp(&f.polygon, right);
            g.page_id = halves[right as usize].page_id.clone();
            halves[right as usize].fragments.push(g);
        }
        halves
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActType {
    Birth,
    Marriage,
    Death,
    Undefined,
}

impl ActType {
    pub const ALL: [ActType; 4] = [ActType::Birth, ActType::Marriage, ActType::Death, ActType::Undefined];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActType::Birth => "birth",
            ActType::Marriage => "marriage",
            ActType::Death => "death",
            ActType::Undefined => "undefined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "birth" => Some(ActType::Birth),
            "marriage" => Some(ActType::Marriage),
            "death" => Some(ActType::Death),
            "undefined" => Some(ActType::Undefined),
            _ => None,
        }
    }
}

/// One register entry, possibly spanning several pages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Act {
    pub act_id: String,
    pub fragments: Vec<ActFragment>,
    pub act_type: ActType,
    /// Line texts of all fragments, in order, joined with `\n`.
    pub full_text: String,
    pub entities: Vec<Entity>,
    /// A fragment sequence that did not close (`start` without `end`, or a lone `center`/`end`).
    #[serde(default)]
    pub orphan: bool,
    /// Set when the act's layout was rejected by the gate; the reason names the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
    /// At least one fragment lies on a page classified `no_act`.
    #[serde(default)]
    pub on_no_act_page: bool,
    #[serde(default)]
    pub type_scores: BTreeMap<ActType, f64>,
}

impl Act {
    /// Assembles an act from its fragments, pulling line texts and entities from `pages`.
    pub fn assemble(act_id: impl Into<String>, fragments: Vec<ActFragment>, pages: &[&RecognizedPage]) -> Self {
        let (full_text, entities) = Self::derive_content(&fragments, pages);
        Act {
            act_id: act_id.into(),
            fragments,
            act_type: ActType::Undefined,
            full_text,
            entities,
            orphan: false,
            rejected: None,
            on_no_act_page: false,
            type_scores: BTreeMap::new(),
        }
    }

    /// Recomputes `(full_text, entities)` from fragment line references.
    pub fn derive_content(fragments: &[ActFragment], pages: &[&RecognizedPage]) -> (String, Vec<Entity>) {
        let mut texts = Vec::new();
        let mut entities = Vec::new();
        for frag in fragments {
            let Some(page) = pages.iter().find(|p| p.page_id == frag.page_id) else {
                continue;
            };
            for lid in &frag.line_ids {
                if let Some(line) = page.line(lid) {
                    texts.push(line.text.as_str());
                }
                let mut ents: Vec<&Entity> = page.entities.iter().filter(|e| &e.line_id == lid).collect();
                ents.sort_by_key(|e| (e.char_start, e.char_end));
                entities.extend(ents.into_iter().cloned());
            }
        }
        (texts.join("\n"), entities)
    }

    pub fn page_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in &self.fragments {
            if !out.contains(&f.page_id.as_str()) {
                out.push(&f.page_id);
            }
        }
        out
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let classes: Vec<ActClass> = self.fragments.iter().map(|f| f.act_class).collect();
        let well_formed = match classes.as_slice() {
            [ActClass::Full] => true,
            [ActClass::Start, mid @ .., ActClass::End] => mid.iter().all(|c| *c == ActClass::Center),
            _ => false,
        };
        if !well_formed && !self.orphan && self.rejected.is_none() {
            out.push(Violation::new("act.fragments", "class sequence not [full] or [start, center*, end]").at(&self.act_id));
        }
        if self.fragments.is_empty() {
            out.push(Violation::new("act.fragments", "empty").at(&self.act_id));
        }
        out
    }
}

/// Slot names of the record moulds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    RecordDate,
    RecordPlace,
    SubjectName,
    EventDate,
    SubjectAge,
    FatherName,
    FatherOccupation,
    FatherResidence,
    MotherName,
    MotherOccupation,
    MotherResidence,
    SpouseName,
    SpouseOccupation,
    SpouseResidence,
    GodfatherName,
    GodfatherOccupation,
    GodfatherResidence,
    GodmotherName,
    GodmotherOccupation,
    GodmotherResidence,
    WitnessNames,
}

impl Role {
    pub const ALL: [Role; 21] = [
        Role::RecordDate,
        Role::RecordPlace,
        Role::SubjectName,
        Role::EventDate,
        Role::SubjectAge,
        Role::FatherName,
        Role::FatherOccupation,
        Role::FatherResidence,
        Role::MotherName,
        Role::MotherOccupation,
        Role::MotherResidence,
        Role::SpouseName,
        Role::SpouseOccupation,
        Role::SpouseResidence,
        Role::GodfatherName,
        Role::GodfatherOccupation,
        Role::GodfatherResidence,
        Role::GodmotherName,
        Role::GodmotherOccupation,
        Role::GodmotherResidence,
        Role::WitnessNames,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::RecordDate => "record_date",
            Role::RecordPlace => "record_place",
            Role::SubjectName => "subject_name",
            Role::EventDate => "event_date",
            Role::SubjectAge => "subject_age",
            Role::FatherName => "father_name",
            Role::FatherOccupation => "father_occupation",
            Role::FatherResidence => "father_residence",
            Role::MotherName => "mother_name",
            Role::MotherOccupation => "mother_occupation",
            Role::MotherResidence => "mother_residence",
            Role::SpouseName => "spouse_name",
            Role::SpouseOccupation => "spouse_occupation",
            Role::SpouseResidence => "spouse_residence",
            Role::GodfatherName => "godfather_name",
            Role::GodfatherOccupation => "godfather_occupation",
            Role::GodfatherResidence => "godfather_residence",
            Role::GodmotherName => "godmother_name",
            Role::GodmotherOccupation => "godmother_occupation",
            Role::GodmotherResidence => "godmother_residence",
            Role::WitnessNames => "witness_names",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }

    /// Occupation role paired with a name role.
    pub fn occupation_of(self) -> Option<Role> {
        match self {
            Role::FatherName => Some(Role::FatherOccupation),
            Role::MotherName => Some(Role::MotherOccupation),
            Role::SpouseName => Some(Role::SpouseOccupation),
            Role::GodfatherName => Some(Role::GodfatherOccupation),
            Role::GodmotherName => Some(Role::GodmotherOccupation),
            _ => None,
        }
    }

    pub fn residence_of(self) -> Option<Role> {
        match self {
            Role::FatherName => Some(Role::FatherResidence),
            Role::MotherName => Some(Role::MotherResidence),
            Role::SpouseName => Some(Role::SpouseResidence),
            Role::GodfatherName => Some(Role::GodfatherResidence),
            Role::GodmotherName => Some(Role::GodmotherResidence),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MouldId {
    Birth,
    DeathMarried,
    DeathSingle,
    Marriage,
}

impl MouldId {
    pub const ALL: [MouldId; 4] = [MouldId::Birth, MouldId::DeathMarried, MouldId::DeathSingle, MouldId::Marriage];

    pub fn as_str(&self) -> &'static str {
        match self {
            MouldId::Birth => "birth",
            MouldId::DeathMarried => "death_married",
            MouldId::DeathSingle => "death_single",
            MouldId::Marriage => "marriage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        MouldId::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct StructuredDate {
    pub year: Option<i32>,
    pub month: Option<u32>,
    pub day: Option<u32>,
    /// Role of the date this one was computed from, for relative dates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_anchor: Option<String>,
    pub complete: bool,
}

impl StructuredDate {
    /// Builds a date, setting `complete` iff all parts exist and form a real Gregorian date.
    pub fn new(year: Option<i32>, month: Option<u32>, day: Option<u32>) -> Self {
        let complete = match (year, month, day) {
            (Some(y), Some(m), Some(d)) => chrono::NaiveDate::from_ymd_opt(y, m, d).is_some(),
            _ => false,
        };
        StructuredDate {
            year,
            month,
            day,
            relative_anchor: None,
            complete,
        }
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Self {
        Self::new(Some(year), Some(month), Some(day))
    }

    pub fn to_naive(&self) -> Option<chrono::NaiveDate> {
        chrono::NaiveDate::from_ymd_opt(self.year?, self.month?, self.day?)
    }

    pub fn is_consistent(&self) -> bool {
        self.complete == Self::new(self.year, self.month, self.day).complete
    }
}

impl fmt::Display for StructuredDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |v: Option<i64>, w: usize| match v {
            Some(v) => format!("{v:0w$}"),
            None => "?".repeat(w),
        };
        write!(
            f,
            "{}-{}-{}",
            part(self.year.map(i64::from), 4),
            part(self.month.map(i64::from), 2),
            part(self.day.map(i64::from), 2)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct PersonName {
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
    #[serde(default)]
    pub corrected: bool,
    #[serde(default)]
    pub correction_candidates: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Standardized {
    Date(StructuredDate),
    Name(PersonName),
    Names(Vec<PersonName>),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    pub raw: String,
    pub standardized: Standardized,
    /// Ids of the entities the value was read from.
    #[serde(default)]
    pub provenance: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusKind {
    Valid,
    Invalid,
    Fusion,
    SpecialCase,
    Pending,
}

impl StatusKind {
    pub const ALL: [StatusKind; 5] = [
        StatusKind::Valid,
        StatusKind::Fusion,
        StatusKind::Invalid,
        StatusKind::SpecialCase,
        StatusKind::Pending,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StatusKind::Valid => "valid",
            StatusKind::Invalid => "invalid",
            StatusKind::Fusion => "fusion",
            StatusKind::SpecialCase => "special_case",
            StatusKind::Pending => "pending",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        StatusKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityStatus {
    pub kind: StatusKind,
    #[serde(default)]
    pub reason: String,
}

impl ValidityStatus {
    pub fn pending() -> Self {
        ValidityStatus {
            kind: StatusKind::Pending,
            reason: String::new(),
        }
    }

    pub fn valid() -> Self {
        ValidityStatus {
            kind: StatusKind::Valid,
            reason: String::new(),
        }
    }

    pub fn with(kind: StatusKind, reason: impl Into<String>) -> Self {
        ValidityStatus {
            kind,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredRecord {
    pub act_id: String,
    /// `None` for acts whose type stayed undefined.
    pub mould: Option<MouldId>,
    pub slots: BTreeMap<Role, FieldValue>,
    pub status: ValidityStatus,
    /// Entities that found no legal role in the mould.
    #[serde(default)]
    pub overflow: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl StructuredRecord {
    pub fn empty(act_id: impl Into<String>, mould: Option<MouldId>) -> Self {
        StructuredRecord {
            act_id: act_id.into(),
            mould,
            slots: BTreeMap::new(),
            status: ValidityStatus::pending(),
            overflow: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn filled(&self, role: Role) -> bool {
        self.slots.get(&role).is_some_and(|v| !v.raw.trim().is_empty())
    }
}

/// Checks every page-level invariant. The list is empty iff the page is well formed.
pub fn validate_page(page: &RecognizedPage) -> Vec<Violation> {
    let mut out = Vec::new();
    let pid = &page.page_id;
    if page.width <= 0 || page.height <= 0 {
        out.push(Violation::new("page.dimensions", "not positive").at(pid));
    }
    let mut line_ids = HashSet::new();
    for line in &page.lines {
        let at = format!("page {pid}, line {}", line.id);
        if !line_ids.insert(line.id.as_str()) {
            out.push(Violation::new("line.id", "duplicate").at(&at));
        }
        let poly = line.polygon.violations("polygon");
        let poly_ok = poly.is_empty();
        out.extend(poly.into_iter().map(|v| v.at(&at)));
        if poly_ok {
            if line.polygon.height() == Some(0) {
                out.push(Violation::new("line.height", "zero").at(&at));
            }
            if let Some((x0, y0, x1, y1)) = line.polygon.bbox() {
                if x1 <= 0 || y1 <= 0 || x0 >= page.width || y0 >= page.height {
                    out.push(Violation::new("polygon", "outside page").at(&at));
                }
            }
        }
        if let Some(c) = line.confidence {
            if !(0.0..=1.0).contains(&c) {
                out.push(Violation::new("line.confidence", "outside [0,1]").at(&at));
            }
        }
    }
    let mut entity_ids = HashSet::new();
    for e in &page.entities {
        let at = format!("page {pid}, entity {}", e.id);
        if !entity_ids.insert(e.id.as_str()) {
            out.push(Violation::new("entity.id", "duplicate").at(&at));
        }
        let Some(line) = page.line(&e.line_id) else {
            out.push(Violation::new("entity.line_id", "unresolved").at(&at));
            continue;
        };
        if e.char_start >= e.char_end || e.char_end > text::char_len(&line.text) {
            out.push(Violation::new("entity.span", "out of range").at(&at));
        } else if text::char_slice(&line.text, e.char_start, e.char_end) != Some(e.surface.as_str()) {
            out.push(Violation::new("entity.surface", "differs from text slice").at(&at));
        }
    }
    for f in &page.fragments {
        let at = format!("page {pid}, fragment {}", f.fragment_id);
        if f.line_ids.is_empty() {
            out.push(Violation::new("fragment.line_ids", "empty").at(&at));
        }
        if f.page_id != page.page_id {
            out.push(Violation::new("fragment.page_id", "differs from page").at(&at));
        }
        for lid in &f.line_ids {
            if !line_ids.contains(lid.as_str()) {
                out.push(Violation::new("fragment.line_ids", "unresolved").at(&at));
            }
        }
        out.extend(f.polygon.violations("fragment.polygon").into_iter().map(|v| v.at(&at)));
    }
    out
}
