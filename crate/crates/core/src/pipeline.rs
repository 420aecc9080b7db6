//! Whole-corpus runs: config, shared resources, per-register processing and
//! corpus statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{mark_date_lines, merge_fragments, DateLexicon, LayoutGate, DEFAULT_DATE_WORDS};
use crate::classify::{classify_act, KeywordTable};
use crate::dates::NumeralGrammar;
use crate::domain::{ActType, PageClass, RecognizedPage, StatusKind};
use crate::error::{Error, Result};
use crate::io::{read_register, ExportDocument, ExportedAct, Format, RegisterDocument};
use crate::names::{NameConfig, NameStandardizer, NameThesaurus, VisualCostTable};
use crate::outlier::{classify_page, DetectorConfig, FeatureKind, GridSpec, PageModel};
use crate::quality::{page_quality, BadLineClass, DEFAULT_ALPHA};
use crate::validate::{SpecialCaseLexicon, ValidationConfig, Validator};

/// Everything a run depends on. Relative paths resolve against the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub features: FeatureKind,
    pub grid: GridSpec,
    /// Used to fit a page model when `page_model` is absent; the seed is explicit.
    pub detector: Option<DetectorConfig>,
    /// Fitted model written by `fit-pages`.
    pub page_model: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub alpha: f64,
    pub date_words: usize,
    /// `None` turns the layout gate off.
    pub layout_gate: Option<LayoutGate>,
    pub keywords: Option<PathBuf>,
    pub min_score: Option<f64>,
    pub numerals: Option<PathBuf>,
    pub months: Option<PathBuf>,
    pub relative_dates: Option<PathBuf>,
    pub special_cases: Option<PathBuf>,
    pub thesaurus: Option<PathBuf>,
    pub visual_costs: Option<PathBuf>,
    pub names: NameConfig,
    pub validation: ValidationConfig,
    /// 0 means one per core. Not part of the config hash.
    pub workers: usize,
    /// Not part of the config hash.
    pub format: Format,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureKind::LineCount,
            grid: GridSpec { rows: 8, columns: 6 },
            detector: None,
            page_model: None,
            threshold: None,
            alpha: DEFAULT_ALPHA,
            date_words: DEFAULT_DATE_WORDS,
            layout_gate: Some(LayoutGate::default()),
            keywords: None,
            min_score: None,
            numerals: None,
            months: None,
            relative_dates: None,
            special_cases: None,
            thesaurus: None,
            visual_costs: None,
            names: NameConfig::default(),
            validation: ValidationConfig::default(),
            workers: 0,
            format: Format::Xml,
        }
    }
}

impl PipelineConfig {
    /// TOML unless the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        let mut cfg: PipelineConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in self.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [
            &mut self.page_model,
            &mut self.keywords,
            &mut self.numerals,
            &mut self.months,
            &mut self.relative_dates,
            &mut self.special_cases,
            &mut self.thesaurus,
            &mut self.visual_costs,
        ]
        .into_iter()
        .filter_map(|p| p.as_mut())
    }

    fn paths(&self) -> Vec<&Path> {
        [
            &self.page_model,
            &self.keywords,
            &self.numerals,
            &self.months,
            &self.relative_dates,
            &self.special_cases,
            &self.thesaurus,
            &self.visual_costs,
        ]
        .into_iter()
        .filter_map(|p| p.as_deref())
        .collect()
    }

    pub fn check(&self) -> Result<()> {
        GridSpec::new(self.grid.rows, self.grid.columns)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if self.date_words == 0 {
            return Err(Error::Config("date_words must be at least 1".into()));
        }
        if let Some(g) = &self.layout_gate {
            g.check()?;
        }
        for p in self.paths() {
            if !p.is_file() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 over the settings that affect results plus the bytes of every
    /// referenced file, so a moved but identical setup keeps its hash.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.workers = 0;
        c.format = Format::Xml;
        let files: Vec<Vec<u8>> = self.paths().iter().map(std::fs::read).collect::<std::io::Result<_>>()?;
        for p in c.paths_mut() {
            *p = PathBuf::from(p.file_name().unwrap_or_default());
        }
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&c)?);
        for f in files {
            h.update((f.len() as u64).to_le_bytes());
            h.update(f);
        }
        Ok(format!("{:x}", h.finalize()))
    }
}

fn read_opt(p: &Option<PathBuf>) -> Result<Option<String>> {
    p.as_ref().map(std::fs::read_to_string).transpose().map_err(Error::from)
}

/// Immutable resources shared by all workers.
#[derive(Clone, Debug)]
pub struct Resources {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub page_model: Option<PageModel<f64>>,
    pub keywords: KeywordTable,
    pub min_score: f64,
    pub lexicon: DateLexicon,
    pub validator: Validator,
}

impl Resources {
    pub fn load(config: PipelineConfig) -> Result<Self> {
        config.check()?;
        let page_model = match &config.page_model {
            Some(p) => {
                let m: PageModel<f64> = serde_json::from_str(&std::fs::read_to_string(p)?)?;
                Some(m)
            }
            None => None,
        };
        let keywords = match read_opt(&config.keywords)? {
            Some(s) => KeywordTable::parse(&s)?,
            None => KeywordTable::default(),
        };
        let grammar = match (read_opt(&config.numerals)?, read_opt(&config.months)?, read_opt(&config.relative_dates)?) {
            (None, None, None) => NumeralGrammar::default(),
            (n, m, r) => {
                let d = |s: Option<String>, builtin: &str| s.unwrap_or_else(|| builtin.to_string());
                NumeralGrammar::from_sources(
                    &d(n, crate::dates::NUMERALS),
                    &d(m, crate::dates::MONTHS),
                    &d(r, crate::dates::RELATIVE),
                )?
            }
        };
        let special = match read_opt(&config.special_cases)? {
            Some(s) => SpecialCaseLexicon::parse(&s)?,
            None => SpecialCaseLexicon::default(),
        };
        let thesaurus = match read_opt(&config.thesaurus)? {
            Some(s) => NameThesaurus::parse(&s)?,
            None => NameThesaurus::sample(),
        };
        let costs = match read_opt(&config.visual_costs)? {
            Some(s) => VisualCostTable::parse(&s)?,
            None => VisualCostTable::default(),
        };
        let min_score = config.min_score.unwrap_or_else(|| keywords.default_min_score());
        Ok(Resources {
            config_hash: config.hash()?,
            page_model,
            min_score,
            lexicon: DateLexicon::from_grammar(&grammar),
            validator: Validator {
                names: NameStandardizer {
                    thesaurus,
                    costs,
                    config: config.names.clone(),
                },
                grammar,
                special,
                config: config.validation.clone(),
            },
            keywords,
            config,
        })
    }

    /// The configured model, or one fitted on the given pages that carry act zones.
    pub fn page_model_for(&self, pages: &[RecognizedPage]) -> Result<PageModel<f64>> {
        let model = match &self.page_model {
            Some(m) => m.clone(),
            None => {
                let detector = self
                    .config
                    .detector
                    .as_ref()
                    .ok_or_else(|| Error::Config("no page model and no detector".into()))?;
                let act_pages: Vec<RecognizedPage> = pages.iter().filter(|p| !p.fragments.is_empty()).cloned().collect();
                if act_pages.is_empty() {
                    return Err(Error::Model("no pages with act zones to fit a page model on".into()));
                }
                PageModel::fit_pages(&act_pages, self.config.features, self.config.grid, detector)?
            }
        };
        Ok(match self.config.threshold {
            Some(t) => model.with_threshold(t),
            None => model,
        })
    }
}

/// Corpus counts; `merge` is commutative and associative.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub registers: usize,
    pub failed_registers: usize,
    pub pages: usize,
    pub pages_by_class: BTreeMap<PageClass, usize>,
    pub quality: BTreeMap<BadLineClass, usize>,
    /// Pages without lines or with a degenerate line polygon.
    pub unscored_pages: usize,
    pub acts_by_type: BTreeMap<ActType, usize>,
    pub records_by_status: BTreeMap<StatusKind, usize>,
    pub status_by_type: BTreeMap<ActType, BTreeMap<StatusKind, usize>>,
    /// Wall time of the run; merged by maximum.
    pub elapsed_seconds: f64,
}

fn sum<K>(m: &BTreeMap<K, usize>) -> usize {
    m.values().sum()
}

fn add_counts<K: Ord + Copy>(a: &mut BTreeMap<K, usize>, b: &BTreeMap<K, usize>) {
    for (k, v) in b {
        *a.entry(*k).or_insert(0) += v;
    }
}

impl CorpusStats {
    pub fn merge(&mut self, o: &CorpusStats) {
        self.registers += o.registers;
        self.failed_registers += o.failed_registers;
        self.pages += o.pages;
        add_counts(&mut self.pages_by_class, &o.pages_by_class);
        add_counts(&mut self.quality, &o.quality);
        self.unscored_pages += o.unscored_pages;
        add_counts(&mut self.acts_by_type, &o.acts_by_type);
        add_counts(&mut self.records_by_status, &o.records_by_status);
        for (t, m) in &o.status_by_type {
            add_counts(self.status_by_type.entry(*t).or_default(), m);
        }
        self.elapsed_seconds = self.elapsed_seconds.max(o.elapsed_seconds);
    }

    pub fn acts(&self) -> usize {
        self.acts_by_type.values().sum()
    }

    pub fn pages_per_second(&self) -> Option<f64> {
        (self.elapsed_seconds > 0.0).then(|| self.pages as f64 / self.elapsed_seconds)
    }

    /// Totals that disagree with each other.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if sum(&self.pages_by_class) != self.pages {
            out.push(format!("pages by class sum to {}, not {}", sum(&self.pages_by_class), self.pages));
        }
        if sum(&self.quality) + self.unscored_pages != self.pages {
            out.push("quality classes plus unscored pages differ from page count".into());
        }
        if sum(&self.records_by_status) != self.acts() {
            out.push("records by status differ from act count".into());
        }
        for (t, m) in &self.status_by_type {
            if sum(m) != self.acts_by_type.get(t).copied().unwrap_or(0) {
                out.push(format!("status counts for {} differ from its act count", t.as_str()));
            }
        }
        if self.failed_registers > self.registers {
            out.push("more failed registers than registers".into());
        }
        out
    }

    /// Act and status counts of existing exports; page counts stay zero.
    pub fn from_exports(docs: &[ExportDocument]) -> Self {
        let mut s = CorpusStats {
            registers: docs.len(),
            ..CorpusStats::default()
        };
        for d in docs {
            s.add_export(d);
        }
        s
    }

    fn add_export(&mut self, doc: &ExportDocument) {
        for a in &doc.acts {
            *self.acts_by_type.entry(a.act.act_type).or_insert(0) += 1;
            let status = a.record.as_ref().map_or(StatusKind::Pending, |r| r.status.kind);
            *self.records_by_status.entry(status).or_insert(0) += 1;
            *self.status_by_type.entry(a.act.act_type).or_default().entry(status).or_insert(0) += 1;
        }
    }
}

/// Runs every stage on one register: page classes, line quality, date-line
/// marks, assembly, typing and validation. No-act pages go through too.
pub fn process_register(
    mut doc: RegisterDocument,
    res: &Resources,
    model: &PageModel<f64>,
) -> Result<(RegisterDocument, ExportDocument, CorpusStats)> {
    let mut stats = CorpusStats {
        registers: 1,
        pages: doc.pages.len(),
        ..CorpusStats::default()
    };
    for page in &mut doc.pages {
        let (class, _) = classify_page(page, model, None)?;
        page.page_class = class;
        *stats.pages_by_class.entry(class).or_insert(0) += 1;
        match page_quality(&page.lines, res.config.alpha) {
            Ok(Some(q)) => *stats.quality.entry(q.class).or_insert(0) += 1,
            Ok(None) => stats.unscored_pages += 1,
            Err(e) => {
                log::warn!("{}/{}: line quality not scored: {e}", doc.register_id, page.page_id);
                stats.unscored_pages += 1;
            }
        }
        mark_date_lines(page, &res.lexicon, res.config.date_words);
    }
    let mut acts = merge_fragments(&doc.pages, res.config.layout_gate.as_ref());
    let exported = acts
        .iter_mut()
        .map(|act| {
            classify_act(act, &doc.pages, &res.keywords, res.min_score);
            let record = res.validator.validate(act);
            ExportedAct {
                act: act.clone(),
                record: Some(record),
            }
        })
        .collect();
    let export = ExportDocument::new(&doc.register_id, &res.config_hash, exported);
    stats.add_export(&export);
    Ok((doc, export, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterFailure {
    pub input: String,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// In input order.
    pub exports: Vec<ExportDocument>,
    pub failures: Vec<RegisterFailure>,
    pub stats: CorpusStats,
}

/// A register to process: a file path or an already parsed document.
#[derive(Clone, Debug)]
pub enum Input {
    Path(PathBuf),
    Document(String, Box<RegisterDocument>),
}

impl Input {
    fn name(&self) -> String {
        match self {
            Input::Path(p) => p.display().to_string(),
            Input::Document(n, _) => n.clone(),
        }
    }

    fn load(self) -> Result<RegisterDocument> {
        match self {
            Input::Path(p) => read_register(&p),
            Input::Document(_, d) => {
                d.validate()?;
                Ok(*d)
            }
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Processes registers on a bounded pool. A failing register becomes a
/// failure entry and the rest carry on; outputs do not depend on the worker count.
pub fn run(res: &Resources, inputs: Vec<Input>) -> Result<RunOutput> {
    if res.page_model.is_none() && res.config.detector.is_none() {
        return Err(Error::Config("set page_model or a detector with an explicit seed".into()));
    }
    let started = Instant::now();
    let pool = pool(res.config.workers)?;
    let loaded: Vec<(String, Result<RegisterDocument>)> =
        pool.install(|| inputs.into_par_iter().map(|i| (i.name(), i.load())).collect());

    let model = if loaded.iter().all(|(_, d)| d.is_err()) {
        None
    } else {
        let pages: Vec<RecognizedPage> = loaded
            .iter()
            .filter_map(|(_, d)| d.as_ref().ok())
            .flat_map(|d| d.pages.iter().cloned())
            .collect();
        Some(res.page_model_for(&pages)?)
    };

    let results: Vec<(String, Result<(RegisterDocument, ExportDocument, CorpusStats)>)> = pool.install(|| {
        loaded
            .into_par_iter()
            .map(|(name, doc)| {
                let out = doc.and_then(|d| process_register(d, res, model.as_ref().expect("model exists when a register loaded")));
                (name, out)
            })
            .collect()
    });

    let mut out = RunOutput {
        exports: Vec::new(),
        failures: Vec::new(),
        stats: CorpusStats::default(),
    };
    for (name, r) in results {
        match r {
            Ok((_, export, stats)) => {
                out.stats.merge(&stats);
                out.exports.push(export);
            }
            Err(e) => {
                log::error!("{name}: {e}");
                out.stats.registers += 1;
                out.stats.failed_registers += 1;
                out.failures.push(RegisterFailure {
                    input: name,
                    error: e.to_string(),
                });
            }
        }
    }
    out.stats.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(out)
}

/// Writes one export per register, `errors.jsonl` and the stats files.
/// The stats files leave out the elapsed time. Returns the written export paths.
pub fn write_run(out: &RunOutput, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for e in &out.exports {
        let p = dir.join(format!("{}.{}", e.register_id, format.extension()));
        std::fs::write(&p, crate::io::write_export(e, format)?)?;
        written.push(p);
    }
    let mut errors = String::new();
    for f in &out.failures {
        errors.push_str(&serde_json::to_string(f)?);
        errors.push('\n');
    }
    std::fs::write(dir.join("errors.jsonl"), errors)?;
    // no wall time in the files, so reruns compare byte for byte
    let stats = CorpusStats {
        elapsed_seconds: 0.0,
        ..out.stats.clone()
    };
    std::fs::write(dir.join("stats.json"), serde_json::to_string_pretty(&stats)?)?;
    let report = stats_report(&stats);
    std::fs::write(dir.join("stats.csv"), &report.csv)?;
    std::fs::write(dir.join("stats.txt"), &report.table)?;
    Ok(written)
}

pub struct StatsReport {
    pub csv: String,
    pub table: String,
}

/// Percentage with one decimal; 0.0 when the total is zero.
pub fn percent(count: usize, total: usize) -> String {
    if total == 0 {
        "0.0".into()
    } else {
        format!("{:.1}", 100.0 * count as f64 / total as f64)
    }
}

const TYPE_ORDER: [ActType; 4] = [ActType::Birth, ActType::Death, ActType::Marriage, ActType::Undefined];
const STATUS_ORDER: [StatusKind; 5] = [
    StatusKind::Valid,
    StatusKind::Fusion,
    StatusKind::Invalid,
    StatusKind::SpecialCase,
    StatusKind::Pending,
];

fn title(s: &str) -> String {
    let s = s.replace('_', " ");
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn section<K: Ord>(
    csv: &mut String,
    table: &mut String,
    name: &str,
    heading: &str,
    rows: &[(K, String)],
    counts: &BTreeMap<K, usize>,
) {
    let total: usize = rows.iter().map(|(k, _)| counts.get(k).copied().unwrap_or(0)).sum();
    let _ = writeln!(table, "{heading:<16}{:>10}{:>12}", "Count", "Percentage");
    for (k, label) in rows {
        let n = counts.get(k).copied().unwrap_or(0);
        let _ = writeln!(csv, "{name},{label},{n},{}", percent(n, total));
        let _ = writeln!(table, "{:<16}{n:>10}{:>11}%", title(label), percent(n, total));
    }
    let _ = writeln!(csv, "{name},total,{total},{}", if total == 0 { "0.0" } else { "100.0" });
    let _ = writeln!(table, "{:<16}{total:>10}{:>11}%\n", "Total", if total == 0 { "0.0" } else { "100.0" });
}

/// CSV (`table,row,count,percentage`) and an aligned text rendering with
/// one-decimal percentages and a totals row per table.
pub fn stats_report(stats: &CorpusStats) -> StatsReport {
    let mut csv = String::from("table,row,count,percentage\n");
    let mut table = String::new();
    let types: Vec<(ActType, String)> = TYPE_ORDER.iter().map(|t| (*t, t.as_str().to_string())).collect();
    section(&mut csv, &mut table, "acts_by_type", "Act type", &types, &stats.acts_by_type);
    let statuses: Vec<(StatusKind, String)> = STATUS_ORDER.iter().map(|s| (*s, s.as_str().to_string())).collect();
    section(&mut csv, &mut table, "records_by_status", "Status", &statuses, &stats.records_by_status);
    for t in [ActType::Birth, ActType::Death] {
        let empty = BTreeMap::new();
        let m = stats.status_by_type.get(&t).unwrap_or(&empty);
        let name = format!("status_{}", t.as_str());
        section(&mut csv, &mut table, &name, &format!("{} status", title(t.as_str())), &statuses, m);
    }
    let classes: Vec<(PageClass, String)> =
        [PageClass::Act, PageClass::NoAct].iter().map(|c| (*c, c.as_str().to_string())).collect();
    section(&mut csv, &mut table, "pages_by_class", "Page class", &classes, &stats.pages_by_class);
    let buckets: Vec<(BadLineClass, String)> = BadLineClass::ALL.iter().map(|c| (*c, c.label().to_string())).collect();
    section(&mut csv, &mut table, "bad_line_class", "Bad lines", &buckets, &stats.quality);
    let _ = writeln!(
        table,
        "Registers {} ({} failed), pages {}, unscored pages {}",
        stats.registers, stats.failed_registers, stats.pages, stats.unscored_pages
    );
    if let Some(t) = stats.pages_per_second() {
        let _ = writeln!(table, "Throughput {t:.1} pages/s");
    }
    StatsReport { csv, table }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_percentages() {
        let mut s = CorpusStats::default();
        s.acts_by_type.insert(ActType::Birth, 2);
        s.acts_by_type.insert(ActType::Death, 1);
        s.acts_by_type.insert(ActType::Marriage, 1);
        let r = stats_report(&s);
        assert!(r.csv.contains("acts_by_type,birth,2,50.0\n"));
        assert!(r.csv.contains("acts_by_type,death,1,25.0\n"));
        assert!(r.csv.contains("acts_by_type,marriage,1,25.0\n"));
        assert!(r.csv.contains("acts_by_type,undefined,0,0.0\n"));
        assert!(r.csv.contains("acts_by_type,total,4,100.0\n"));
    }

    #[test]
    fn zero_stats_render() {
        let r = stats_report(&CorpusStats::default());
        assert!(r.csv.contains("acts_by_type,total,0,0.0\n"));
        assert!(r.table.contains("Birth"));
        assert!(CorpusStats::default().violations().is_empty());
    }

    #[test]
    fn merge_commutes() {
        let mut a = CorpusStats::default();
        a.pages = 2;
        a.pages_by_class.insert(PageClass::Act, 2);
        a.elapsed_seconds = 1.0;
        let mut b = CorpusStats::default();
        b.pages = 1;
        b.pages_by_class.insert(PageClass::NoAct, 1);
        b.elapsed_seconds = 3.0;
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.pages, 3);
    }

    #[test]
    fn config_needs_model_source() {
        let c = PipelineConfig { workers: 1, ..PipelineConfig::default() };
        let res = Resources::load(c).unwrap();
        assert!(matches!(run(&res, vec![]), Err(Error::Config(_))));
        let c = PipelineConfig {
            detector: Some(DetectorConfig::isolation_forest(42)),
            ..PipelineConfig::default()
        };
        c.check().unwrap();
        let t = toml::to_string(&c).unwrap();
        let back: PipelineConfig = toml::from_str(&t).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn hash_ignores_workers() {
        let a = PipelineConfig {
            detector: Some(DetectorConfig::isolation_forest(42)),
            ..PipelineConfig::default()
        };
        let b = PipelineConfig { workers: 8, ..a.clone() };
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = PipelineConfig { alpha: 0.4, ..a.clone() };
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn empty_corpus() {
        let cfg = PipelineConfig {
            detector: Some(DetectorConfig::isolation_forest(42)),
            workers: 1,
            ..PipelineConfig::default()
        };
        let res = Resources::load(cfg).unwrap();
        let out = run(&res, vec![]).unwrap();
        assert!(out.exports.is_empty());
        assert_eq!(out.stats.acts(), 0);
    }
}
