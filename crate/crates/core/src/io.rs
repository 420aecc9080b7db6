//! Register and export documents in XML (canonical) and JSONL (streaming).
//! The schemas are described in `docs/formats.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::domain::{
    validate_page, Act, ActClass, ActFragment, ActType, Entity, EntityTag, FieldValue, MouldId, Orientation,
    PageClass, PersonName, Polygon, RecognizedPage, Role, Standardized, StatusKind, StructuredDate,
    StructuredRecord, TextLine, ValidityStatus, Violation,
};
use crate::error::{Error, Result};
use crate::text::nfc;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LanguageHint {
    Fr,
    En,
    #[default]
    Unset,
}

impl LanguageHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            LanguageHint::Fr => "fr",
            LanguageHint::En => "en",
            LanguageHint::Unset => "unset",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fr" => Some(LanguageHint::Fr),
            "en" => Some(LanguageHint::En),
            "unset" => Some(LanguageHint::Unset),
            _ => None,
        }
    }
}

/// Unknown content keyed by where it was found: `"{location}#{n}"` holds the
/// raw XML of an unknown element, `"{location}@{name}"` an unknown attribute.
pub type Extensions = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterDocument {
    pub register_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parish: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub religion: Option<String>,
    #[serde(default)]
    pub language_hint: LanguageHint,
    /// Scan order.
    pub pages: Vec<RecognizedPage>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extensions: Extensions,
}

impl RegisterDocument {
    pub fn new(register_id: impl Into<String>, pages: Vec<RecognizedPage>) -> Self {
        RegisterDocument {
            register_id: register_id.into(),
            parish: None,
            religion: None,
            language_hint: LanguageHint::Unset,
            pages,
            extensions: Extensions::new(),
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ids = std::collections::HashSet::new();
        for p in &self.pages {
            if !ids.insert(p.page_id.as_str()) {
                out.push(Violation::new("page.page_id", "duplicate").at(&p.page_id));
            }
            if p.register_id != self.register_id {
                out.push(Violation::new("page.register_id", "differs from register").at(&p.page_id));
            }
            out.extend(validate_page(p));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(v))
        }
    }
}

/// Counts per act type over all acts and per status over acts with a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub acts: usize,
    pub by_type: BTreeMap<ActType, usize>,
    pub by_status: BTreeMap<StatusKind, usize>,
}

impl Summary {
    pub fn of(acts: &[ExportedAct]) -> Self {
        let mut by_type: BTreeMap<ActType, usize> = ActType::ALL.iter().map(|t| (*t, 0)).collect();
        let mut by_status: BTreeMap<StatusKind, usize> = StatusKind::ALL.iter().map(|s| (*s, 0)).collect();
        for a in acts {
            *by_type.get_mut(&a.act.act_type).unwrap() += 1;
            if let Some(r) = &a.record {
                *by_status.get_mut(&r.status.kind).unwrap() += 1;
            }
        }
        Summary {
            acts: acts.len(),
            by_type,
            by_status,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportedAct {
    pub act: Act,
    /// Absent before validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<StructuredRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportDocument {
    pub register_id: String,
    #[serde(default)]
    pub config_hash: String,
    /// Sorted by act id.
    pub acts: Vec<ExportedAct>,
    pub summary: Summary,
}

impl ExportDocument {
    pub fn new(register_id: impl Into<String>, config_hash: impl Into<String>, mut acts: Vec<ExportedAct>) -> Self {
        acts.sort_by(|a, b| a.act.act_id.cmp(&b.act.act_id));
        let summary = Summary::of(&acts);
        ExportDocument {
            register_id: register_id.into(),
            config_hash: config_hash.into(),
            acts,
            summary,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let want = Summary::of(&self.acts);
        if want.acts != self.summary.acts {
            out.push(format!("summary.acts {} but {} acts present", self.summary.acts, want.acts));
        }
        for (t, n) in &want.by_type {
            let got = self.summary.by_type.get(t).copied().unwrap_or(0);
            if got != *n {
                out.push(format!("summary type {}: {got} recorded, {n} counted", t.as_str()));
            }
        }
        for (s, n) in &want.by_status {
            let got = self.summary.by_status.get(s).copied().unwrap_or(0);
            if got != *n {
                out.push(format!("summary status {}: {got} recorded, {n} counted", s.as_str()));
            }
        }
        if self.acts.windows(2).any(|w| w[0].act.act_id >= w[1].act.act_id) {
            out.push("acts not sorted by unique id".into());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Xml,
    Jsonl,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "xml" => Some(Format::Xml),
            "jsonl" | "json" => Some(Format::Jsonl),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Xml => "xml",
            Format::Jsonl => "jsonl",
        }
    }

    /// From the extension, falling back to the first non-blank byte.
    pub fn detect(path: Option<&Path>, content: &str) -> Format {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("xml") => Format::Xml,
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ if content.trim_start().starts_with('<') => Format::Xml,
            _ => Format::Jsonl,
        }
    }
}

// ---------------------------------------------------------------- XML tree

#[derive(Debug, Default)]
struct El {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<El>,
    text: String,
    start: usize,
    end: usize,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src.as_bytes()[..offset];
    let line = before.iter().filter(|b| **b == b'\n').count() + 1;
    let col = offset - before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

fn parse_err(src: &str, offset: usize, message: impl Into<String>) -> Error {
    let (line, column) = line_col(src, offset);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_tree(src: &str) -> Result<El> {
    let mut reader = Reader::from_str(src);
    let mut stack: Vec<El> = Vec::new();
    let mut root: Option<El> = None;
    loop {
        let ev = reader
            .read_event()
            .map_err(|e| parse_err(src, reader.error_position() as usize, e.to_string()))?;
        let after = reader.buffer_position() as usize;
        let open = |e: &quick_xml::events::BytesStart, start: usize| -> Result<El> {
            let mut attrs = Vec::new();
            for a in e.attributes() {
                let a = a.map_err(|err| parse_err(src, start, err.to_string()))?;
                let v = a.unescape_value().map_err(|err| parse_err(src, start, err.to_string()))?;
                attrs.push((String::from_utf8_lossy(a.key.as_ref()).into_owned(), nfc(&v)));
            }
            Ok(El {
                name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                attrs,
                start,
                ..El::default()
            })
        };
        match ev {
            Event::Start(e) => {
                let el = open(&e, after - e.len() - 2)?;
                stack.push(el);
            }
            Event::Empty(e) => {
                let mut el = open(&e, after - e.len() - 3)?;
                el.end = after;
                match stack.last_mut() {
                    Some(p) => p.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(parse_err(src, after, "content after the root element")),
                }
            }
            Event::End(_) => {
                let mut el = stack.pop().ok_or_else(|| parse_err(src, after, "unbalanced end tag"))?;
                el.end = after;
                match stack.last_mut() {
                    Some(p) => p.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| parse_err(src, after, e.to_string()))?;
                match stack.last_mut() {
                    Some(p) => p.text.push_str(&s),
                    None if s.trim().is_empty() => {}
                    None => return Err(parse_err(src, after, "text outside the root element")),
                }
            }
            Event::CData(c) => {
                if let Some(p) = stack.last_mut() {
                    p.text.push_str(&String::from_utf8_lossy(&c));
                }
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(parse_err(src, src.len(), format!("unexpected end of document inside <{}>", stack.last().unwrap().name)));
                }
                break;
            }
            _ => {}
        }
    }
    root.ok_or_else(|| parse_err(src, 0, "empty document"))
}

/// Reads one element's attributes, tracking the ones it consumed.
struct Attrs<'a> {
    el: &'a El,
    src: &'a str,
    used: Vec<&'a str>,
}

impl<'a> Attrs<'a> {
    fn new(el: &'a El, src: &'a str) -> Self {
        Attrs { el, src, used: Vec::new() }
    }

    fn opt(&mut self, name: &'a str) -> Option<&'a str> {
        self.used.push(name);
        self.el.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn req(&mut self, name: &'a str) -> Result<&'a str> {
        self.opt(name)
            .ok_or_else(|| parse_err(self.src, self.el.start, format!("<{}> lacks attribute {name}", self.el.name)))
    }

    fn parse<T: std::str::FromStr>(&mut self, name: &'a str) -> Result<T> {
        let v = self.req(name)?;
        v.parse()
            .map_err(|_| parse_err(self.src, self.el.start, format!("<{}> {name}={v:?} is not valid", self.el.name)))
    }

    fn parse_opt<T: std::str::FromStr>(&mut self, name: &'a str) -> Result<Option<T>> {
        match self.opt(name) {
            None => Ok(None),
            Some(_) => self.parse(name).map(Some),
        }
    }

    fn flag(&mut self, name: &'a str) -> Result<bool> {
        Ok(self.parse_opt::<bool>(name)?.unwrap_or(false))
    }

    fn bad(&self, name: &str, value: &str) -> Error {
        parse_err(self.src, self.el.start, format!("<{}> {name}={value:?} is not valid", self.el.name))
    }

    /// Stores attributes that were never asked for.
    fn leftovers(&self, location: &str, ext: &mut Extensions) {
        for (k, v) in &self.el.attrs {
            if !self.used.contains(&k.as_str()) {
                ext.insert(format!("{location}@{k}"), v.clone());
            }
        }
    }
}

fn keep_unknown(el: &El, src: &str, location: &str, known: &[&str], ext: &mut Extensions) {
    let mut n = 0;
    for c in &el.children {
        if !known.contains(&c.name.as_str()) {
            ext.insert(format!("{location}#{n}"), src[c.start..c.end].to_string());
            n += 1;
        }
    }
}

fn parse_points(s: &str, a: &Attrs) -> Result<Polygon> {
    let mut points = Vec::new();
    for pair in s.split_whitespace() {
        let (x, y) = pair.split_once(',').ok_or_else(|| a.bad("points", s))?;
        let x: i64 = x.trim().parse().map_err(|_| a.bad("points", s))?;
        let y: i64 = y.trim().parse().map_err(|_| a.bad("points", s))?;
        points.push([x, y]);
    }
    Ok(Polygon { points })
}

fn ids_of(el: &El, child: &str) -> Vec<String> {
    el.children
        .iter()
        .filter(|c| c.name == child)
        .filter_map(|c| c.attrs.iter().find(|(k, _)| k == "id").map(|(_, v)| v.clone()))
        .collect()
}

fn check_version(a: &mut Attrs) -> Result<()> {
    let v = a.req("schema_version")?;
    if v != SCHEMA_VERSION {
        return Err(a.bad("schema_version", v));
    }
    Ok(())
}

fn read_fragment(el: &El, src: &str, page_id: &str) -> Result<ActFragment> {
    let mut a = Attrs::new(el, src);
    let class = a.req("class")?;
    Ok(ActFragment {
        fragment_id: a.req("id")?.to_string(),
        page_id: a.opt("page").unwrap_or(page_id).to_string(),
        act_class: ActClass::parse(class).ok_or_else(|| a.bad("class", class))?,
        polygon: parse_points(a.req("points")?, &a)?,
        line_ids: ids_of(el, "lineref"),
        sequence_index: a.parse("seq")?,
    })
}

fn read_entity(el: &El, src: &str, line: Option<&TextLine>) -> Result<Entity> {
    let mut a = Attrs::new(el, src);
    let tag = a.req("tag")?;
    let line_id = match line {
        Some(l) => l.id.clone(),
        None => a.req("line")?.to_string(),
    };
    let start: usize = a.parse("start")?;
    let end: usize = a.parse("end")?;
    let surface = match (a.opt("surface"), line) {
        (Some(s), _) => s.to_string(),
        (None, Some(l)) => crate::text::char_slice(&l.text, start, end).unwrap_or_default().to_string(),
        (None, None) => return Err(a.bad("surface", "")),
    };
    Ok(Entity {
        id: a.req("id")?.to_string(),
        tag: EntityTag::parse(tag).ok_or_else(|| a.bad("tag", tag))?,
        line_id,
        char_start: start,
        char_end: end,
        surface,
    })
}

fn read_page(el: &El, src: &str, register_id: &str, ext: &mut Extensions) -> Result<RecognizedPage> {
    let mut a = Attrs::new(el, src);
    let page_id = a.req("id")?.to_string();
    let loc = format!("page:{page_id}");
    let mut page = RecognizedPage::new(&page_id, register_id, a.parse("width")?, a.parse("height")?);
    if let Some(o) = a.opt("orientation") {
        page.orientation = match o {
            "portrait" => Orientation::Portrait,
            "landscape" => Orientation::Landscape,
            _ => return Err(a.bad("orientation", o)),
        };
    }
    if let Some(c) = a.opt("class") {
        page.page_class = PageClass::parse(c).ok_or_else(|| a.bad("class", c))?;
    }
    a.leftovers(&loc, ext);
    keep_unknown(el, src, &loc, &["line", "act"], ext);
    for c in &el.children {
        match c.name.as_str() {
            "line" => {
                let mut la = Attrs::new(c, src);
                let mut line = TextLine::new(la.req("id")?, parse_points(la.req("points")?, &la)?, la.opt("text").unwrap_or(""));
                line.confidence = la.parse_opt("confidence")?;
                line.is_date_line = la.parse_opt("date_line")?;
                line.zone_label = la.opt("zone").map(str::to_string);
                let lloc = format!("line:{page_id}/{}", line.id);
                la.leftovers(&lloc, ext);
                keep_unknown(c, src, &lloc, &["entity"], ext);
                for e in c.children.iter().filter(|e| e.name == "entity") {
                    page.entities.push(read_entity(e, src, Some(&line))?);
                }
                page.lines.push(line);
            }
            "act" => page.fragments.push(read_fragment(c, src, &page_id)?),
            _ => {}
        }
    }
    Ok(page)
}

fn read_extensions(el: &El, ext: &mut Extensions) {
    for c in el.children.iter().filter(|c| c.name == "ext") {
        if let Some((_, k)) = c.attrs.iter().find(|(k, _)| k == "key") {
            ext.insert(k.clone(), c.text.clone());
        }
    }
}

/// Parses and validates a register document.
pub fn read_register_str(src: &str) -> Result<RegisterDocument> {
    let doc = match Format::detect(None, src) {
        Format::Xml => register_from_xml(src)?,
        Format::Jsonl => register_from_jsonl(src)?,
    };
    doc.validate()?;
    Ok(doc)
}

pub fn read_register(path: &Path) -> Result<RegisterDocument> {
    let src = std::fs::read_to_string(path)?;
    let doc = match Format::detect(Some(path), &src) {
        Format::Xml => register_from_xml(&src)?,
        Format::Jsonl => register_from_jsonl(&src)?,
    };
    doc.validate()?;
    Ok(doc)
}

fn register_from_xml(src: &str) -> Result<RegisterDocument> {
    let root = parse_tree(src)?;
    if root.name != "register" {
        return Err(parse_err(src, root.start, format!("expected <register>, found <{}>", root.name)));
    }
    let mut a = Attrs::new(&root, src);
    check_version(&mut a)?;
    let mut doc = RegisterDocument::new(a.req("id")?, Vec::new());
    doc.parish = a.opt("parish").map(str::to_string);
    doc.religion = a.opt("religion").map(str::to_string);
    if let Some(l) = a.opt("language") {
        doc.language_hint = LanguageHint::parse(l).ok_or_else(|| a.bad("language", l))?;
    }
    let mut ext = Extensions::new();
    a.leftovers("register", &mut ext);
    keep_unknown(&root, src, "register", &["page", "extensions"], &mut ext);
    for c in &root.children {
        match c.name.as_str() {
            "page" => {
                let p = read_page(c, src, &doc.register_id, &mut ext)?;
                doc.pages.push(p);
            }
            "extensions" => read_extensions(c, &mut ext),
            _ => {}
        }
    }
    doc.extensions = ext;
    Ok(doc)
}

// ---------------------------------------------------------------- XML writing

fn check_chars(s: &str, owner: &str) -> Result<()> {
    for c in s.chars() {
        let ok = matches!(c, '\t' | '\n' | '\r') || (c >= ' ' && c != '\u{FFFE}' && c != '\u{FFFF}');
        if !ok {
            return Err(Error::Unrepresentable {
                act_id: owner.to_string(),
                code: c as u32,
            });
        }
    }
    Ok(())
}

fn esc_attr(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' => o.push_str("&quot;"),
            '\n' => o.push_str("&#10;"),
            '\r' => o.push_str("&#13;"),
            '\t' => o.push_str("&#9;"),
            _ => o.push(c),
        }
    }
    o
}

fn esc_text(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '\r' => o.push_str("&#13;"),
            _ => o.push(c),
        }
    }
    o
}

/// Accumulates XML with owner-tagged character checks.
struct Xml {
    out: String,
    owner: String,
}

impl Xml {
    fn new() -> Self {
        Xml {
            out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
            owner: String::new(),
        }
    }

    fn open(&mut self, depth: usize, name: &str, attrs: &[(&str, String)], empty: bool) -> Result<()> {
        let _ = write!(self.out, "{}<{name}", "  ".repeat(depth));
        for (k, v) in attrs {
            check_chars(v, &self.owner)?;
            let _ = write!(self.out, " {k}=\"{}\"", esc_attr(v));
        }
        self.out.push_str(if empty { "/>\n" } else { ">\n" });
        Ok(())
    }

    fn close(&mut self, depth: usize, name: &str) {
        let _ = writeln!(self.out, "{}</{name}>", "  ".repeat(depth));
    }

    fn text_el(&mut self, depth: usize, name: &str, attrs: &[(&str, String)], text: &str) -> Result<()> {
        check_chars(text, &self.owner)?;
        let _ = write!(self.out, "{}<{name}", "  ".repeat(depth));
        for (k, v) in attrs {
            check_chars(v, &self.owner)?;
            let _ = write!(self.out, " {k}=\"{}\"", esc_attr(v));
        }
        let _ = writeln!(self.out, ">{}</{name}>", esc_text(text));
        Ok(())
    }
}

fn points_attr(p: &Polygon) -> String {
    p.points.iter().map(|[x, y]| format!("{x},{y}")).collect::<Vec<_>>().join(" ")
}

fn write_fragment(x: &mut Xml, depth: usize, f: &ActFragment, with_page: bool) -> Result<()> {
    let mut attrs = vec![("id", f.fragment_id.clone())];
    if with_page {
        attrs.push(("page", f.page_id.clone()));
    }
    attrs.push(("class", f.act_class.as_str().to_string()));
    attrs.push(("seq", f.sequence_index.to_string()));
    attrs.push(("points", points_attr(&f.polygon)));
    x.open(depth, if with_page { "fragment" } else { "act" }, &attrs, f.line_ids.is_empty())?;
    if !f.line_ids.is_empty() {
        for l in &f.line_ids {
            x.open(depth + 1, "lineref", &[("id", l.clone())], true)?;
        }
        x.close(depth, if with_page { "fragment" } else { "act" });
    }
    Ok(())
}

fn entity_attrs(e: &Entity, with_line: bool) -> Vec<(&'static str, String)> {
    let mut v = vec![("id", e.id.clone()), ("tag", e.tag.as_str().to_string())];
    if with_line {
        v.push(("line", e.line_id.clone()));
    }
    v.push(("start", e.char_start.to_string()));
    v.push(("end", e.char_end.to_string()));
    v.push(("surface", e.surface.clone()));
    v
}

fn write_extensions(x: &mut Xml, ext: &Extensions) -> Result<()> {
    if ext.is_empty() {
        return Ok(());
    }
    x.open(1, "extensions", &[], false)?;
    for (k, v) in ext {
        x.text_el(2, "ext", &[("key", k.clone())], v)?;
    }
    x.close(1, "extensions");
    Ok(())
}

pub fn register_to_xml(doc: &RegisterDocument) -> Result<String> {
    let mut x = Xml::new();
    x.owner = doc.register_id.clone();
    let mut attrs = vec![("schema_version", SCHEMA_VERSION.to_string()), ("id", doc.register_id.clone())];
    if let Some(p) = &doc.parish {
        attrs.push(("parish", p.clone()));
    }
    if let Some(r) = &doc.religion {
        attrs.push(("religion", r.clone()));
    }
    attrs.push(("language", doc.language_hint.as_str().to_string()));
    x.open(0, "register", &attrs, false)?;
    for p in &doc.pages {
        x.owner = p.page_id.clone();
        let orientation = match p.orientation {
            Orientation::Portrait => "portrait",
            Orientation::Landscape => "landscape",
        };
        x.open(
            1,
            "page",
            &[
                ("id", p.page_id.clone()),
                ("width", p.width.to_string()),
                ("height", p.height.to_string()),
                ("orientation", orientation.to_string()),
                ("class", p.page_class.as_str().to_string()),
            ],
            false,
        )?;
        for l in &p.lines {
            x.owner = format!("{}/{}", p.page_id, l.id);
            let mut attrs = vec![("id", l.id.clone()), ("points", points_attr(&l.polygon)), ("text", l.text.clone())];
            if let Some(c) = l.confidence {
                attrs.push(("confidence", c.to_string()));
            }
            if let Some(d) = l.is_date_line {
                attrs.push(("date_line", d.to_string()));
            }
            if let Some(z) = &l.zone_label {
                attrs.push(("zone", z.clone()));
            }
            let ents: Vec<&Entity> = p.entities.iter().filter(|e| e.line_id == l.id).collect();
            x.open(2, "line", &attrs, ents.is_empty())?;
            if !ents.is_empty() {
                for e in ents {
                    x.open(3, "entity", &entity_attrs(e, false), true)?;
                }
                x.close(2, "line");
            }
        }
        for f in &p.fragments {
            x.owner = f.fragment_id.clone();
            write_fragment(&mut x, 2, f, false)?;
        }
        x.close(1, "page");
    }
    x.owner = doc.register_id.clone();
    write_extensions(&mut x, &doc.extensions)?;
    x.close(0, "register");
    Ok(x.out)
}

fn write_name(x: &mut Xml, depth: usize, n: &PersonName) -> Result<()> {
    x.open(depth, "name", &[("corrected", n.corrected.to_string())], false)?;
    for f in &n.first_names {
        x.text_el(depth + 1, "first", &[], f)?;
    }
    for l in &n.last_names {
        x.text_el(depth + 1, "last", &[], l)?;
    }
    for (c, s) in &n.correction_candidates {
        x.open(depth + 1, "candidate", &[("name", c.clone()), ("score", s.to_string())], true)?;
    }
    x.close(depth, "name");
    Ok(())
}

fn write_record(x: &mut Xml, depth: usize, r: &StructuredRecord) -> Result<()> {
    let mut attrs = Vec::new();
    if let Some(m) = r.mould {
        attrs.push(("mould", m.as_str().to_string()));
    }
    attrs.push(("status", r.status.kind.as_str().to_string()));
    attrs.push(("reason", r.status.reason.clone()));
    x.open(depth, "record", &attrs, false)?;
    for (role, v) in &r.slots {
        x.open(depth + 1, "field", &[("role", role.as_str().to_string()), ("raw", v.raw.clone())], false)?;
        for p in &v.provenance {
            x.open(depth + 2, "ref", &[("id", p.clone())], true)?;
        }
        match &v.standardized {
            Standardized::Text(t) => x.text_el(depth + 2, "value", &[], t)?,
            Standardized::Date(d) => {
                let mut a = Vec::new();
                if let Some(y) = d.year {
                    a.push(("year", y.to_string()));
                }
                if let Some(m) = d.month {
                    a.push(("month", m.to_string()));
                }
                if let Some(dd) = d.day {
                    a.push(("day", dd.to_string()));
                }
                if let Some(an) = &d.relative_anchor {
                    a.push(("anchor", an.clone()));
                }
                a.push(("complete", d.complete.to_string()));
                x.open(depth + 2, "date", &a, true)?;
            }
            Standardized::Name(n) => write_name(x, depth + 2, n)?,
            Standardized::Names(ns) => {
                x.open(depth + 2, "names", &[], false)?;
                for n in ns {
                    write_name(x, depth + 3, n)?;
                }
                x.close(depth + 2, "names");
            }
        }
        x.close(depth + 1, "field");
    }
    for o in &r.overflow {
        x.open(depth + 1, "overflow", &[("id", o.clone())], true)?;
    }
    for n in &r.notes {
        x.text_el(depth + 1, "note", &[], n)?;
    }
    x.close(depth, "record");
    Ok(())
}

pub fn export_to_xml(doc: &ExportDocument) -> Result<String> {
    let mut x = Xml::new();
    x.owner = doc.register_id.clone();
    x.open(
        0,
        "export",
        &[
            ("schema_version", SCHEMA_VERSION.to_string()),
            ("register", doc.register_id.clone()),
            ("config_hash", doc.config_hash.clone()),
        ],
        false,
    )?;
    x.open(1, "summary", &[("acts", doc.summary.acts.to_string())], false)?;
    for (t, n) in &doc.summary.by_type {
        x.open(2, "type", &[("name", t.as_str().to_string()), ("count", n.to_string())], true)?;
    }
    for (s, n) in &doc.summary.by_status {
        x.open(2, "status", &[("name", s.as_str().to_string()), ("count", n.to_string())], true)?;
    }
    x.close(1, "summary");
    for ea in &doc.acts {
        let a = &ea.act;
        x.owner = a.act_id.clone();
        let mut attrs = vec![("id", a.act_id.clone()), ("type", a.act_type.as_str().to_string())];
        if a.orphan {
            attrs.push(("orphan", "true".into()));
        }
        if a.on_no_act_page {
            attrs.push(("on_no_act_page", "true".into()));
        }
        if let Some(r) = &a.rejected {
            attrs.push(("rejected", r.clone()));
        }
        x.open(1, "act", &attrs, false)?;
        for f in &a.fragments {
            write_fragment(&mut x, 2, f, true)?;
        }
        x.text_el(2, "text", &[], &a.full_text)?;
        for e in &a.entities {
            x.open(2, "entity", &entity_attrs(e, true), true)?;
        }
        for (t, s) in &a.type_scores {
            x.open(2, "score", &[("type", t.as_str().to_string()), ("value", s.to_string())], true)?;
        }
        if let Some(r) = &ea.record {
            write_record(&mut x, 2, r)?;
        }
        x.close(1, "act");
    }
    x.close(0, "export");
    Ok(x.out)
}

// ---------------------------------------------------------------- XML export reading

fn read_name(el: &El, src: &str) -> Result<PersonName> {
    let mut a = Attrs::new(el, src);
    let mut n = PersonName {
        corrected: a.flag("corrected")?,
        ..PersonName::default()
    };
    for c in &el.children {
        match c.name.as_str() {
            "first" => n.first_names.push(nfc(&c.text)),
            "last" => n.last_names.push(nfc(&c.text)),
            "candidate" => {
                let mut ca = Attrs::new(c, src);
                n.correction_candidates.push((ca.req("name")?.to_string(), ca.parse("score")?));
            }
            _ => {}
        }
    }
    Ok(n)
}

fn read_record(el: &El, src: &str, act_id: &str, problems: &mut Vec<String>) -> Result<StructuredRecord> {
    let mut a = Attrs::new(el, src);
    let mould = match a.opt("mould") {
        Some(m) => Some(MouldId::parse(m).ok_or_else(|| Error::validation([format!("act {act_id}: unknown mould {m:?}")]))?),
        None => None,
    };
    let status = a.req("status")?;
    let kind = StatusKind::parse(status)
        .ok_or_else(|| Error::validation([format!("act {act_id}: unknown status {status:?}")]))?;
    let mut rec = StructuredRecord::empty(act_id, mould);
    rec.status = ValidityStatus::with(kind, a.opt("reason").unwrap_or(""));
    for c in &el.children {
        match c.name.as_str() {
            "field" => {
                let mut fa = Attrs::new(c, src);
                let role_s = fa.req("role")?;
                let role = Role::parse(role_s)
                    .ok_or_else(|| Error::validation([format!("act {act_id}: unknown role {role_s:?}")]))?;
                let mut standardized = None;
                for s in &c.children {
                    standardized = match s.name.as_str() {
                        "value" => Some(Standardized::Text(nfc(&s.text))),
                        "date" => {
                            let mut da = Attrs::new(s, src);
                            let mut d = StructuredDate::new(da.parse_opt("year")?, da.parse_opt("month")?, da.parse_opt("day")?);
                            d.relative_anchor = da.opt("anchor").map(str::to_string);
                            if da.flag("complete")? != d.complete {
                                problems.push(format!("act {act_id}: {role_s} complete flag inconsistent"));
                            }
                            Some(Standardized::Date(d))
                        }
                        "name" => Some(Standardized::Name(read_name(s, src)?)),
                        "names" => Some(Standardized::Names(
                            s.children
                                .iter()
                                .filter(|n| n.name == "name")
                                .map(|n| read_name(n, src))
                                .collect::<Result<_>>()?,
                        )),
                        _ => standardized,
                    };
                }
                let raw = fa.req("raw")?.to_string();
                rec.slots.insert(
                    role,
                    FieldValue {
                        standardized: standardized.unwrap_or_else(|| Standardized::Text(raw.clone())),
                        raw,
                        provenance: ids_of(c, "ref"),
                    },
                );
            }
            "overflow" => rec.overflow.extend(c.attrs.iter().find(|(k, _)| k == "id").map(|(_, v)| v.clone())),
            "note" => rec.notes.push(nfc(&c.text)),
            _ => {}
        }
    }
    Ok(rec)
}

fn export_from_xml(src: &str) -> Result<ExportDocument> {
    let root = parse_tree(src)?;
    if root.name != "export" {
        return Err(parse_err(src, root.start, format!("expected <export>, found <{}>", root.name)));
    }
    let mut a = Attrs::new(&root, src);
    check_version(&mut a)?;
    let register_id = a.req("register")?.to_string();
    let config_hash = a.opt("config_hash").unwrap_or("").to_string();
    let mut problems = Vec::new();
    let mut summary = Summary {
        acts: 0,
        by_type: BTreeMap::new(),
        by_status: BTreeMap::new(),
    };
    let mut acts = Vec::new();
    for c in &root.children {
        match c.name.as_str() {
            "summary" => {
                summary.acts = Attrs::new(c, src).parse("acts")?;
                for s in &c.children {
                    let mut sa = Attrs::new(s, src);
                    let name = sa.req("name")?;
                    let count: usize = sa.parse("count")?;
                    match s.name.as_str() {
                        "type" => match ActType::parse(name) {
                            Some(t) => {
                                summary.by_type.insert(t, count);
                            }
                            None => problems.push(format!("summary: unknown act type {name:?}")),
                        },
                        "status" => match StatusKind::parse(name) {
                            Some(k) => {
                                summary.by_status.insert(k, count);
                            }
                            None => problems.push(format!("summary: unknown status {name:?}")),
                        },
                        _ => {}
                    }
                }
            }
            "act" => {
                let mut aa = Attrs::new(c, src);
                let act_id = aa.req("id")?.to_string();
                let t = aa.req("type")?;
                let Some(act_type) = ActType::parse(t) else {
                    problems.push(format!("act {act_id}: unknown type {t:?}"));
                    continue;
                };
                let mut act = Act::assemble(&act_id, Vec::new(), &[]);
                act.act_type = act_type;
                act.orphan = aa.flag("orphan")?;
                act.on_no_act_page = aa.flag("on_no_act_page")?;
                act.rejected = aa.opt("rejected").map(str::to_string);
                let mut record = None;
                for e in &c.children {
                    match e.name.as_str() {
                        "fragment" => act.fragments.push(read_fragment(e, src, "")?),
                        "text" => act.full_text = nfc(&e.text),
                        "entity" => act.entities.push(read_entity(e, src, None)?),
                        "score" => {
                            let mut sa = Attrs::new(e, src);
                            let t = sa.req("type")?;
                            let at = ActType::parse(t).ok_or_else(|| sa.bad("type", t))?;
                            act.type_scores.insert(at, sa.parse("value")?);
                        }
                        "record" => record = Some(read_record(e, src, &act_id, &mut problems)?),
                        _ => {}
                    }
                }
                acts.push(ExportedAct { act, record });
            }
            _ => {}
        }
    }
    let doc = ExportDocument {
        register_id,
        config_hash,
        acts,
        summary,
    };
    problems.extend(doc.violations());
    if !problems.is_empty() {
        return Err(Error::validation(problems));
    }
    Ok(doc)
}

// ---------------------------------------------------------------- JSONL

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RegisterLine {
    Register {
        schema_version: String,
        register_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parish: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        religion: Option<String>,
        #[serde(default)]
        language_hint: LanguageHint,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        extensions: Extensions,
    },
    Page(Box<RecognizedPage>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExportLine {
    Export {
        schema_version: String,
        register_id: String,
        #[serde(default)]
        config_hash: String,
        summary: Summary,
    },
    Act(Box<ExportedAct>),
}

fn json_lines<T: serde::de::DeserializeOwned>(src: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line).map_err(|e| {
            let message = e.to_string();
            let kind = e.classify();
            if kind == serde_json::error::Category::Data {
                Error::validation([format!("line {}: {message}", i + 1)])
            } else {
                Error::Parse {
                    line: i + 1,
                    column: e.column(),
                    message,
                }
            }
        })?;
        out.push(v);
    }
    Ok(out)
}

fn nfc_page(p: &mut RecognizedPage) {
    for l in &mut p.lines {
        l.text = nfc(&l.text);
    }
    for e in &mut p.entities {
        e.surface = nfc(&e.surface);
    }
}

fn register_from_jsonl(src: &str) -> Result<RegisterDocument> {
    let mut lines = json_lines::<RegisterLine>(src)?.into_iter();
    let Some(RegisterLine::Register {
        schema_version,
        register_id,
        parish,
        religion,
        language_hint,
        extensions,
    }) = lines.next()
    else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "first line must be the register header".into(),
        });
    };
    if schema_version != SCHEMA_VERSION {
        return Err(Error::validation([format!("unsupported schema_version {schema_version:?}")]));
    }
    let mut doc = RegisterDocument::new(register_id, Vec::new());
    doc.parish = parish;
    doc.religion = religion;
    doc.language_hint = language_hint;
    doc.extensions = extensions;
    for (i, l) in lines.enumerate() {
        match l {
            RegisterLine::Page(mut p) => {
                nfc_page(&mut p);
                doc.pages.push(*p);
            }
            RegisterLine::Register { .. } => {
                return Err(Error::validation([format!("item {}: second register header", i + 2)]))
            }
        }
    }
    Ok(doc)
}

pub fn register_to_jsonl(doc: &RegisterDocument) -> Result<String> {
    let mut out = serde_json::to_string(&RegisterLine::Register {
        schema_version: SCHEMA_VERSION.into(),
        register_id: doc.register_id.clone(),
        parish: doc.parish.clone(),
        religion: doc.religion.clone(),
        language_hint: doc.language_hint,
        extensions: doc.extensions.clone(),
    })?;
    out.push('\n');
    for p in &doc.pages {
        out.push_str(&serde_json::to_string(&RegisterLine::Page(Box::new(p.clone())))?);
        out.push('\n');
    }
    Ok(out)
}

fn export_from_jsonl(src: &str) -> Result<ExportDocument> {
    let mut lines = json_lines::<ExportLine>(src)?.into_iter();
    let Some(ExportLine::Export {
        schema_version,
        register_id,
        config_hash,
        summary,
    }) = lines.next()
    else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "first line must be the export header".into(),
        });
    };
    if schema_version != SCHEMA_VERSION {
        return Err(Error::validation([format!("unsupported schema_version {schema_version:?}")]));
    }
    let mut acts = Vec::new();
    for l in lines {
        match l {
            ExportLine::Act(a) => acts.push(*a),
            ExportLine::Export { .. } => return Err(Error::validation(["second export header"])),
        }
    }
    let doc = ExportDocument {
        register_id,
        config_hash,
        acts,
        summary,
    };
    let v = doc.violations();
    if !v.is_empty() {
        return Err(Error::validation(v));
    }
    Ok(doc)
}

pub fn export_to_jsonl(doc: &ExportDocument) -> Result<String> {
    let mut out = serde_json::to_string(&ExportLine::Export {
        schema_version: SCHEMA_VERSION.into(),
        register_id: doc.register_id.clone(),
        config_hash: doc.config_hash.clone(),
        summary: doc.summary.clone(),
    })?;
    out.push('\n');
    for a in &doc.acts {
        out.push_str(&serde_json::to_string(&ExportLine::Act(Box::new(a.clone())))?);
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------- entry points

pub fn write_register(doc: &RegisterDocument, format: Format) -> Result<String> {
    match format {
        Format::Xml => register_to_xml(doc),
        Format::Jsonl => register_to_jsonl(doc),
    }
}

pub fn write_export(doc: &ExportDocument, format: Format) -> Result<String> {
    match format {
        Format::Xml => export_to_xml(doc),
        Format::Jsonl => export_to_jsonl(doc),
    }
}

pub fn read_export_str(src: &str) -> Result<ExportDocument> {
    match Format::detect(None, src) {
        Format::Xml => export_from_xml(src),
        Format::Jsonl => export_from_jsonl(src),
    }
}

pub fn read_export(path: &Path) -> Result<ExportDocument> {
    let src = std::fs::read_to_string(path)?;
    match Format::detect(Some(path), &src) {
        Format::Xml => export_from_xml(&src),
        Format::Jsonl => export_from_jsonl(&src),
    }
}
