//! Synthetic registers: French act templates laid out on portrait pages, with
//! entity tags, act zones and planted defects. Used for tests, demos and the
//! shipped sample corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dates::{write_french_date, NumeralGrammar};
use crate::domain::{
    ActClass, ActFragment, ActType, Entity, EntityTag, Orientation, PageClass, Polygon, RecognizedPage, StatusKind,
    TextLine,
};
use crate::error::{Error, Result};
use crate::io::{LanguageHint, RegisterDocument};
use crate::names::NameThesaurus;
use crate::text::fold;

pub const PAGE_WIDTH: i64 = 1000;
pub const PAGE_HEIGHT: i64 = 1500;
const MARGIN_X: i64 = 80;
const MARGIN_TOP: i64 = 60;
const LINE_H: i64 = 40;
const LINE_STEP: i64 = 48;
const MAX_CHARS: usize = 62;

/// What to plant in an act.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Defect {
    None,
    /// A second complete written date.
    Fusion,
    /// A mandatory person left out.
    MissingField,
    /// A special-case keyword.
    Special,
}

impl Defect {
    /// Status the validator should assign to a typed act carrying this defect.
    pub fn expected_status(&self, act_type: ActType) -> StatusKind {
        if act_type == ActType::Undefined {
            return match self {
                Defect::Fusion => StatusKind::Fusion,
                _ => StatusKind::Invalid,
            };
        }
        match self {
            Defect::None => StatusKind::Valid,
            Defect::Fusion => StatusKind::Fusion,
            Defect::MissingField => StatusKind::Invalid,
            Defect::Special => StatusKind::SpecialCase,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub registers: usize,
    pub acts_per_register: usize,
    /// Birth, death, marriage, undefined; normalized.
    pub type_shares: [f64; 4],
    /// Share of typed acts given a fusion, a missing field, a special case.
    pub defect_shares: [f64; 3],
    /// Chance that a line is drawn at double height.
    pub tall_line_rate: f64,
    /// Blank cover page at the start of each register.
    pub cover_page: bool,
    /// Index page at the end of each register.
    pub index_page: bool,
    pub first_year: i32,
    pub last_year: i32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            registers: 10,
            acts_per_register: 60,
            type_shares: [0.544, 0.243, 0.121, 0.092],
            defect_shares: [0.10, 0.07, 0.02],
            tall_line_rate: 0.01,
            cover_page: true,
            index_page: true,
            first_year: 1850,
            last_year: 1916,
        }
    }
}

/// Expected outcome for one generated act.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthAct {
    pub first_fragment: String,
    pub act_type: ActType,
    pub defect: Defect,
    pub status: StatusKind,
}

#[derive(Clone, Debug)]
pub struct SynthRegister {
    pub doc: RegisterDocument,
    pub truth: Vec<TruthAct>,
}

/// Counts per category by largest remainder, summing to `total`.
pub fn apportion(shares: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    if sum <= 0.0 {
        return vec![0; shares.len()];
    }
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..shares.len()).collect();
    rest.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let missing = total - counts.iter().sum::<usize>();
    for &i in rest.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Name pools drawn from the thesaurus: clear first names and clear last names,
/// minus anything the date grammar would read as a number or month.
pub struct NamePools {
    pub male: Vec<String>,
    pub female: Vec<String>,
    pub last: Vec<String>,
}

impl NamePools {
    pub fn from_thesaurus(th: &NameThesaurus, grammar: &NumeralGrammar) -> Self {
        let blocked: std::collections::HashSet<String> =
            grammar.number_words().chain(grammar.month_words()).map(fold).collect();
        let mut first = Vec::new();
        let mut last = Vec::new();
        for n in th.names() {
            if blocked.contains(&fold(n)) || n.contains(' ') || n.contains('-') {
                continue;
            }
            match th.p_first(n) {
                Some(p) if p >= 0.9 => first.push(n.to_string()),
                Some(p) if p <= 0.1 => last.push(n.to_string()),
                _ => {}
            }
        }
        first.sort();
        last.sort();
        // crude gender split on the final letter, good enough for agreement in templates
        let (female, male): (Vec<String>, Vec<String>) = first.into_iter().partition(|n| n.ends_with('e') || n.ends_with('a'));
        NamePools { male, female, last }
    }
}

/// A piece of act text; tagged pieces never break across lines.
struct Seg {
    text: String,
    tag: Option<EntityTag>,
}

fn plain(s: &str) -> Seg {
    Seg { text: s.to_string(), tag: None }
}

fn ent(tag: EntityTag, s: impl Into<String>) -> Seg {
    Seg { text: s.into(), tag: Some(tag) }
}

struct Person {
    first: String,
    last: String,
}

impl Person {
    fn full(&self) -> String {
        format!("{} {}", self.first, self.last)
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    pools: &'a NamePools,
    cfg: &'a SynthConfig,
}

const OCCUPATIONS: [&str; 8] = ["cultivateur", "journalier", "forgeron", "menuisier", "marchand", "navigateur", "cordonnier", "meunier"];
const PLACES: [&str; 8] = ["Québec", "Lévis", "Rimouski", "Chicoutimi", "Beauport", "Kamouraska", "Montmagny", "Trois-Rivières"];
const AGES: [&str; 6] = ["vingt-deux", "trente-cinq", "quarante", "cinquante-huit", "soixante-sept", "quatre-vingt-un"];

impl<'a> Gen<'a> {
    fn pick<'b>(&mut self, xs: &'b [String]) -> &'b str {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    fn person(&mut self, female: bool) -> Person {
        let first = if female { self.pick(&self.pools.female) } else { self.pick(&self.pools.male) }.to_string();
        Person {
            first,
            last: self.pick(&self.pools.last).to_string(),
        }
    }

    fn date(&mut self) -> String {
        let y = self.rng.gen_range(self.cfg.first_year..=self.cfg.last_year);
        let m = self.rng.gen_range(1..=12);
        let d = self.rng.gen_range(1..=crate::dates::days_in_month(y, m));
        let s = write_french_date(y, m, d);
        s.strip_prefix("le ").unwrap_or(&s).to_string()
    }

    fn pick_str(&mut self, xs: &[&'static str]) -> &'static str {
        xs[self.rng.gen_range(0..xs.len())]
    }

    fn occupation(&mut self) -> Seg {
        let o = self.pick_str(&OCCUPATIONS);
        ent(EntityTag::Occ, o)
    }

    fn place(&mut self) -> Seg {
        let p = self.pick_str(&PLACES);
        ent(EntityTag::Loc, p)
    }

    fn fusion_tail(&mut self) -> Vec<Seg> {
        vec![plain("Le"), ent(EntityTag::Date, self.date()), plain("nous prêtre soussigné.")]
    }

    fn birth(&mut self, defect: Defect) -> Vec<Seg> {
        let female = self.rng.gen_bool(0.5);
        let child = self.person(female);
        let father = Person {
            first: self.person(false).first,
            last: child.last.clone(),
        };
        let mother = self.person(true);
        let godfather = self.person(false);
        let godmother = self.person(true);
        let mut v = vec![
            plain("Le"),
            ent(EntityTag::Date, self.date()),
            plain("nous prêtre soussigné avons baptisé"),
            ent(EntityTag::Per, child.full()),
            plain(if female { "née" } else { "né" }),
            ent(EntityTag::Date, "hier"),
        ];
        match defect {
            Defect::Special => v.push(plain("de parents inconnus.")),
            Defect::MissingField => {
                // only the father is named, so the mother slot stays empty
                v.push(plain("de"));
                v.push(ent(EntityTag::Per, father.full()));
                v.push(self.occupation());
                v.push(plain(". Parrain et marraine absents."));
                return v;
            }
            _ => {
                v.push(plain("de"));
                v.push(ent(EntityTag::Per, father.full()));
                v.push(self.occupation());
                v.push(plain("et de"));
                v.push(ent(EntityTag::Per, mother.full()));
                v.push(plain("de cette paroisse."));
            }
        }
        v.push(plain("Parrain"));
        v.push(ent(EntityTag::Per, godfather.full()));
        v.push(plain("marraine"));
        v.push(ent(EntityTag::Per, godmother.full()));
        v.push(plain("lesquels ont déclaré ne savoir signer."));
        if defect == Defect::Fusion {
            v.extend(self.fusion_tail());
        }
        v
    }

    fn death(&mut self, defect: Defect) -> Vec<Seg> {
        let married = self.rng.gen_bool(0.6);
        let female = self.rng.gen_bool(0.5);
        let subject = self.person(female);
        let mut v = vec![
            plain("Le"),
            ent(EntityTag::Date, self.date()),
            plain("nous prêtre soussigné avons inhumé dans le cimetière de cette paroisse le corps de"),
            ent(EntityTag::Per, subject.full()),
            plain(if female { "décédée" } else { "décédé" }),
            ent(EntityTag::Date, "la veille"),
        ];
        if defect == Defect::Special {
            v.push(plain("immigrant débarqué du navire,"));
        }
        if married {
            let age = self.pick_str(&AGES);
            v.push(plain(&format!("{} de {age} ans,", if female { "âgée" } else { "âgé" })));
            v.push(plain(if female { "épouse de" } else { "époux de" }));
            if defect == Defect::MissingField {
                v.push(plain("feu son conjoint."));
            } else {
                v.push(ent(EntityTag::Per, self.person(!female).full()));
                v.push(self.occupation());
                v.push(plain("."));
            }
        } else {
            v.push(plain(if female { "âgée de trois mois," } else { "âgé de trois mois," }));
            v.push(plain(if female { "fille de" } else { "fils de" }));
            let father = self.person(false);
            v.push(ent(EntityTag::Per, format!("{} {}", father.first, subject.last)));
            if defect != Defect::MissingField {
                v.push(plain("et de"));
                v.push(ent(EntityTag::Per, self.person(true).full()));
            }
            v.push(plain("."));
        }
        // witnesses would slide into the empty person slot
        if defect != Defect::MissingField {
            v.push(plain("Présents"));
            v.push(ent(EntityTag::Per, self.person(false).full()));
            v.push(plain("et"));
            v.push(ent(EntityTag::Per, self.person(false).full()));
        }
        v.push(plain("qui ont signé avec nous."));
        if defect == Defect::Fusion {
            v.extend(self.fusion_tail());
        }
        v
    }

    fn marriage(&mut self, defect: Defect) -> Vec<Seg> {
        let groom = self.person(false);
        let bride = self.person(true);
        let mut v = vec![
            plain("Le"),
            ent(EntityTag::Date, self.date()),
            plain("après la publication de trois bans de mariage faite au prône de la messe paroissiale entre"),
            ent(EntityTag::Per, groom.full()),
            self.occupation(),
            plain("domicilié à"),
            self.place(),
        ];
        if defect == Defect::Special {
            v.push(plain("immigrant arrivé par navire"));
        }
        if defect == Defect::MissingField {
            v.push(plain("et une fille de cette paroisse"));
        } else {
            v.push(plain("d'une part et"));
            v.push(ent(EntityTag::Per, bride.full()));
            v.push(plain("d'autre part"));
        }
        v.push(plain(
            ", ne s'étant découvert aucun empêchement ni opposition, nous prêtre soussigné avons reçu leur mutuel consentement et leur avons donné la bénédiction nuptiale",
        ));
        if defect == Defect::MissingField {
            v.push(plain("."));
        } else {
            v.push(plain("en présence de"));
            v.push(ent(EntityTag::Per, self.person(false).full()));
            v.push(plain("et de"));
            v.push(ent(EntityTag::Per, self.person(false).full()));
            v.push(plain("témoins."));
        }
        if defect == Defect::Fusion {
            v.extend(self.fusion_tail());
        }
        v
    }

    fn undefined(&mut self, defect: Defect) -> Vec<Seg> {
        let judge = self.person(false);
        let mut v = vec![
            plain("Le présent registre contenant"),
            plain(self.pick_str(&["vingt", "trente", "quarante"])),
            plain("feuillets a été coté et paraphé par nous"),
            ent(EntityTag::Per, judge.full()),
            plain("juge de la cour supérieure, pour servir à la tenue des actes de la paroisse de"),
            self.place(),
            plain("."),
        ];
        if defect == Defect::Fusion {
            v.push(plain("Le"));
            v.push(ent(EntityTag::Date, self.date()));
            v.extend(self.fusion_tail());
        }
        v
    }
}

/// Wraps segments into lines of at most `MAX_CHARS` characters; returns each
/// line's text and its entities as `(tag, char_start, char_end)`.
fn wrap(segs: &[Seg]) -> Vec<(String, Vec<(EntityTag, usize, usize)>)> {
    let mut units: Vec<(String, Option<EntityTag>)> = Vec::new();
    for s in segs {
        match s.tag {
            Some(t) => units.push((s.text.clone(), Some(t))),
            None => units.extend(s.text.split_whitespace().map(|w| (w.to_string(), None))),
        }
    }
    let mut lines: Vec<(String, Vec<(EntityTag, usize, usize)>)> = Vec::new();
    let mut cur = String::new();
    let mut ents = Vec::new();
    for (u, tag) in units {
        let glue = matches!(u.as_str(), "." | ",");
        let ulen = u.chars().count();
        let len = cur.chars().count();
        if !cur.is_empty() && !glue && len + 1 + ulen > MAX_CHARS {
            lines.push((std::mem::take(&mut cur), std::mem::take(&mut ents)));
        }
        if !cur.is_empty() && !glue {
            cur.push(' ');
        }
        let start = cur.chars().count();
        cur.push_str(&u);
        if let Some(t) = tag {
            ents.push((t, start, start + ulen));
        }
    }
    if !cur.is_empty() {
        lines.push((cur, ents));
    }
    lines
}

struct PageBuilder {
    page: RecognizedPage,
    y: i64,
    next_line: usize,
    next_entity: usize,
}

impl PageBuilder {
    fn new(register_id: &str, index: usize) -> Self {
        let mut page = RecognizedPage::new(format!("{register_id}-p{index:03}"), register_id, PAGE_WIDTH, PAGE_HEIGHT);
        page.orientation = Orientation::Portrait;
        page.page_class = PageClass::Unset;
        PageBuilder {
            page,
            y: MARGIN_TOP,
            next_line: 0,
            next_entity: 0,
        }
    }

    fn room(&self) -> usize {
        let left = PAGE_HEIGHT - MARGIN_TOP - self.y;
        if left < LINE_H {
            0
        } else {
            ((left - LINE_H) / LINE_STEP + 1) as usize
        }
    }

    fn add_fragment(
        &mut self,
        lines: &[(String, Vec<(EntityTag, usize, usize)>)],
        class: ActClass,
        rng: &mut ChaCha8Rng,
        tall_rate: f64,
    ) -> String {
        let top = self.y;
        let mut ids = Vec::new();
        let mut right = MARGIN_X;
        for (k, (text, ents)) in lines.iter().enumerate() {
            let id = format!("{}-l{:03}", self.page.page_id, self.next_line);
            self.next_line += 1;
            // lines run to the right margin except the one closing the act
            let closes = k + 1 == lines.len() && matches!(class, ActClass::Full | ActClass::End);
            let full = PAGE_WIDTH - 2 * MARGIN_X;
            let width = if closes {
                (text.chars().count() as i64 * 13).min(full)
            } else {
                full - rng.gen_range(0..=24)
            };
            // a tall line only where the rest of the fragment still fits
            let after = (lines.len() - k - 1) as i64 * LINE_STEP;
            let fits = self.y + 2 * LINE_H + 8 + after <= PAGE_HEIGHT - MARGIN_TOP - LINE_H + LINE_STEP;
            let h = if rng.gen_bool(tall_rate) && fits { 2 * LINE_H } else { LINE_H };
            let jitter = rng.gen_range(-4..=4);
            let x0 = MARGIN_X + jitter;
            right = right.max(x0 + width);
            let mut line = TextLine::new(&id, Polygon::rect(x0, self.y, x0 + width, self.y + h), text.as_str());
            line.confidence = Some((rng.gen_range(80..=99) as f64) / 100.0);
            for (tag, s, e) in ents {
                self.page.entities.push(Entity {
                    id: format!("{}-e{:03}", self.page.page_id, self.next_entity),
                    tag: *tag,
                    line_id: id.clone(),
                    char_start: *s,
                    char_end: *e,
                    surface: text.chars().skip(*s).take(e - s).collect(),
                });
                self.next_entity += 1;
            }
            self.page.lines.push(line);
            ids.push(id);
            self.y += h.max(LINE_STEP) + if h > LINE_H { 8 } else { 0 };
        }
        let fragment_id = format!("{}-a{:02}", self.page.page_id, self.page.fragments.len());
        self.page.fragments.push(ActFragment {
            fragment_id: fragment_id.clone(),
            page_id: self.page.page_id.clone(),
            act_class: class,
            // acts follow one another with no blank line, so the boxes keep inside the line pitch
            polygon: Polygon::rect(MARGIN_X - 10, top - 3, right + 10, self.y - LINE_STEP + LINE_H + 3),
            line_ids: ids,
            sequence_index: self.page.fragments.len() as i64,
        });
        fragment_id
    }
}

/// A page with no act: blank with a stray mark, or a three-column name index.
pub fn no_act_page(page_id: &str, register_id: &str, index_style: bool, rng: &mut ChaCha8Rng) -> RecognizedPage {
    let mut page = RecognizedPage::new(page_id, register_id, PAGE_WIDTH, PAGE_HEIGHT);
    if index_style {
        let rows = rng.gen_range(40..=52);
        for c in 0..3 {
            for r in 0..rows {
                let x0 = 70 + c * 300;
                let y0 = 50 + r * 27;
                let id = format!("{page_id}-l{:03}", c * rows + r);
                let w = rng.gen_range(120..=220);
                let text = format!("{} {}", ["Tremblay", "Gagnon", "Roy", "Côté", "Bouchard"][rng.gen_range(0..5)], r + 1);
                page.lines.push(TextLine::new(id, Polygon::rect(x0, y0, x0 + w, y0 + 20), text));
            }
        }
    } else {
        for i in 0..rng.gen_range(0..=2) {
            let y0 = rng.gen_range(100..1300);
            let x0 = rng.gen_range(100..700);
            page.lines.push(TextLine::new(
                format!("{page_id}-l{i:03}"),
                Polygon::rect(x0, y0, x0 + rng.gen_range(60..200), y0 + 30),
                "N° 12",
            ));
        }
    }
    page
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Generates the corpus described by `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthRegister>> {
    if cfg.registers == 0 {
        return Ok(Vec::new());
    }
    if cfg.first_year > cfg.last_year || cfg.first_year < 1 || cfg.last_year > 9999 {
        return Err(Error::Config("synthetic year range is invalid".into()));
    }
    let grammar = NumeralGrammar::default();
    let pools = NamePools::from_thesaurus(&NameThesaurus::sample(), &grammar);
    let total = cfg.registers * cfg.acts_per_register;
    let type_counts = apportion(&cfg.type_shares, total);
    let mut plan: Vec<ActType> = Vec::with_capacity(total);
    for (t, n) in [ActType::Birth, ActType::Death, ActType::Marriage, ActType::Undefined].iter().zip(&type_counts) {
        plan.extend(std::iter::repeat(*t).take(*n));
    }
    let mut rng = seeded(cfg.seed, 0);
    plan.shuffle(&mut rng);
    // defects are apportioned per act type so each type carries the configured mix
    let mut defects: Vec<Defect> = vec![Defect::None; total];
    for t in [ActType::Birth, ActType::Death, ActType::Marriage, ActType::Undefined] {
        let idx: Vec<usize> = (0..total).filter(|&i| plan[i] == t).collect();
        let none = (1.0 - cfg.defect_shares.iter().sum::<f64>()).max(0.0);
        let shares = if t == ActType::Undefined {
            [none + cfg.defect_shares[1] + cfg.defect_shares[2], cfg.defect_shares[0], 0.0, 0.0]
        } else {
            [none, cfg.defect_shares[0], cfg.defect_shares[1], cfg.defect_shares[2]]
        };
        let counts = apportion(&shares, idx.len());
        let mut kinds: Vec<Defect> = Vec::new();
        for (d, n) in [Defect::None, Defect::Fusion, Defect::MissingField, Defect::Special].iter().zip(counts) {
            kinds.extend(std::iter::repeat(*d).take(n));
        }
        kinds.shuffle(&mut rng);
        for (i, d) in idx.into_iter().zip(kinds) {
            defects[i] = d;
        }
    }

    let mut out = Vec::with_capacity(cfg.registers);
    for r in 0..cfg.registers {
        let register_id = format!("SYN{:03}", r + 1);
        let mut g = Gen {
            rng: seeded(cfg.seed, r as u64 + 1),
            pools: &pools,
            cfg,
        };
        let mut pages: Vec<RecognizedPage> = Vec::new();
        let mut truth = Vec::new();
        if cfg.cover_page {
            pages.push(no_act_page(&format!("{register_id}-p000"), &register_id, false, &mut g.rng));
        }
        let mut pb = PageBuilder::new(&register_id, pages.len());
        for k in 0..cfg.acts_per_register {
            let i = r * cfg.acts_per_register + k;
            let (t, d) = (plan[i], defects[i]);
            let segs = match t {
                ActType::Birth => g.birth(d),
                ActType::Death => g.death(d),
                ActType::Marriage => g.marriage(d),
                ActType::Undefined => g.undefined(d),
            };
            let lines = wrap(&segs);
            let room = pb.room();
            let first_fragment = if lines.len() <= room {
                pb.add_fragment(&lines, ActClass::Full, &mut g.rng, cfg.tall_line_rate)
            } else if room >= 2 && lines.len() >= 4 {
                // the act runs on overleaf; the page is written down to the bottom
                // unless that would strand a single line on either side
                let cut = if lines.len() - room == 1 { room - 1 } else { room };
                let id = pb.add_fragment(&lines[..cut], ActClass::Start, &mut g.rng, cfg.tall_line_rate);
                pages.push(std::mem::replace(&mut pb, PageBuilder::new(&register_id, pages.len() + 1)).page);
                pb.add_fragment(&lines[cut..], ActClass::End, &mut g.rng, cfg.tall_line_rate);
                id
            } else {
                pages.push(std::mem::replace(&mut pb, PageBuilder::new(&register_id, pages.len() + 1)).page);
                pb.add_fragment(&lines, ActClass::Full, &mut g.rng, cfg.tall_line_rate)
            };
            truth.push(TruthAct {
                first_fragment,
                act_type: t,
                defect: d,
                status: d.expected_status(t),
            });
        }
        if !pb.page.lines.is_empty() {
            pages.push(pb.page);
        }
        if cfg.index_page {
            let id = format!("{register_id}-p{:03}", pages.len());
            pages.push(no_act_page(&id, &register_id, true, &mut g.rng));
        }
        let mut doc = RegisterDocument::new(&register_id, pages);
        doc.parish = Some(PLACES[r % PLACES.len()].to_string());
        doc.religion = Some("catholique".into());
        doc.language_hint = LanguageHint::Fr;
        doc.validate()?;
        out.push(SynthRegister { doc, truth });
    }
    Ok(out)
}

/// Labelled pages for page-model work: full act pages (true) and blank or
/// index pages (false), in a seeded shuffled order.
pub fn page_set(n_act: usize, n_no_act: usize, seed: u64) -> Result<Vec<(RecognizedPage, bool)>> {
    let acts_needed = n_act * 6 + 12;
    let cfg = SynthConfig {
        seed,
        registers: 1,
        acts_per_register: acts_needed,
        type_shares: [0.55, 0.25, 0.12, 0.08],
        tall_line_rate: 0.0,
        cover_page: false,
        index_page: false,
        ..SynthConfig::default()
    };
    let reg = generate(&cfg)?.remove(0);
    // the last page may be partly filled
    let full: Vec<RecognizedPage> = reg.doc.pages[..reg.doc.pages.len() - 1].to_vec();
    if full.len() < n_act {
        return Err(Error::Config("not enough synthetic act pages".into()));
    }
    let mut rng = seeded(seed, 1 << 32);
    let mut out: Vec<(RecognizedPage, bool)> = full.into_iter().take(n_act).map(|p| (p, true)).collect();
    for i in 0..n_no_act {
        out.push((no_act_page(&format!("X-p{i:03}"), "X", i % 2 == 0, &mut rng), false));
    }
    out.shuffle(&mut rng);
    Ok(out)
}
