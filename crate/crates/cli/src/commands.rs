use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actes::assembly::{merge_fragments, LayoutGate};
use actes::classify::{classify_act, classify_text, KeywordTable};
use actes::dates::NumeralGrammar;
use actes::domain::{ActType, PageClass, RecognizedPage, Role, StructuredDate};
use actes::io::{
    read_export, read_register, write_export, write_register, ExportDocument, ExportedAct, Format, RegisterDocument,
};
use actes::metrics::compare_pages;
use actes::names::{NameConfig, NameStandardizer, NameThesaurus, VisualCostTable};
use actes::outlier::{
    classify_page, default_grids, evaluate_model, grid_search, DetectorConfig, FeatureKind, GridSpec, PageModel,
};
use actes::pipeline::{run, stats_report, write_run, CorpusStats, Input, PipelineConfig, Resources};
use actes::quality::page_quality;
use actes::synth::{generate, SynthConfig};
use anyhow::{anyhow, bail, Context, Result};

use crate::*;

/// Bad flag combinations found after parsing; exit code 1 like clap's own.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

pub fn dispatch(cmd: Command) -> Result<ExitCode, anyhow::Error> {
    let r = match cmd {
        Command::FitPages(a) | Command::Pagekit(Pagekit::Fit(a)) => fit_pages(a),
        Command::ClassifyPages(a) => classify_pages(a),
        Command::Quality(a) => quality(a),
        Command::Assemble(a) => assemble(a),
        Command::ClassifyActs(a) => classify_acts(a),
        Command::StandardizeDate(a) => standardize_date(a),
        Command::StandardizeName(a) => standardize_name(a),
        Command::Validate(a) => validate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Run(a) => run_cmd(a),
        Command::Stats(a) => stats(a),
        Command::Synth(a) => synth(a),
        Command::Pagekit(Pagekit::Score(a)) => score(a),
        Command::Pagekit(Pagekit::Eval(a)) => page_eval(a),
        Command::Pagekit(Pagekit::GridSearch(a)) => grid(a),
    };
    match r {
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(1))
        }
        other => other,
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Xml => Format::Xml,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

impl From<FeatureArg> for FeatureKind {
    fn from(f: FeatureArg) -> Self {
        match f {
            FeatureArg::Projection => FeatureKind::Projection,
            FeatureArg::LineDensity => FeatureKind::LineDensity,
            FeatureArg::LineCount => FeatureKind::LineCount,
        }
    }
}

impl From<ActTypeArg> for ActType {
    fn from(a: ActTypeArg) -> Self {
        match a {
            ActTypeArg::Birth => ActType::Birth,
            ActTypeArg::Marriage => ActType::Marriage,
            ActTypeArg::Death => ActType::Death,
            ActTypeArg::Undefined => ActType::Undefined,
        }
    }
}

const SKIPPED: [&str; 2] = ["errors.jsonl", "truth.jsonl"];

/// Files as given, directories as their sorted `.xml` / `.jsonl` entries.
fn expand(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == "xml" || e == "jsonl"))
                .filter(|f| !f.file_name().is_some_and(|n| SKIPPED.iter().any(|s| n == *s)))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        bail!("no input files");
    }
    Ok(out)
}

fn registers(inputs: &[PathBuf]) -> Result<Vec<RegisterDocument>> {
    expand(inputs)?
        .iter()
        .map(|p| read_register(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn exports(inputs: &[PathBuf]) -> Result<Vec<ExportDocument>> {
    expand(inputs)?
        .iter()
        .map(|p| read_export(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn write_to(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, content).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(format!("grid {s:?} is not ROWSxCOLUMNS")))?;
    let r = r.trim().parse().map_err(|_| usage(format!("grid {s:?} is not ROWSxCOLUMNS")))?;
    let c = c.trim().parse().map_err(|_| usage(format!("grid {s:?} is not ROWSxCOLUMNS")))?;
    GridSpec::new(r, c).map_err(|e| usage(e.to_string()))
}

fn load_model(p: &Path) -> Result<PageModel<f64>> {
    let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&s).with_context(|| format!("{} is not a page model", p.display()))
}

fn fit_pages(a: FitArgs) -> Result<ExitCode> {
    let spec = parse_grid(&a.grid)?;
    let detector = match a.detector {
        DetectorArg::IsolationForest => DetectorConfig::IsolationForest {
            num_trees: a.trees,
            subsample: a.subsample,
            seed: a.seed.ok_or_else(|| usage("--seed is required for the isolation forest"))?,
        },
        DetectorArg::Lof => DetectorConfig::Lof { k: a.k },
    };
    let pages: Vec<RecognizedPage> = registers(&a.inputs)?
        .into_iter()
        .flat_map(|d| d.pages)
        .filter(|p| a.all_pages || !p.fragments.is_empty())
        .collect();
    if pages.is_empty() {
        bail!("no training pages (pages need act zones unless --all-pages)");
    }
    let model = PageModel::<f64>::fit_pages(&pages, a.features.into(), spec, &detector)?;
    write_to(
        a.output.parent().unwrap_or(Path::new(".")),
        &a.output.file_name().ok_or_else(|| usage("output needs a file name"))?.to_string_lossy(),
        &serde_json::to_string(&model)?,
    )?;
    log::info!("fitted on {} pages", pages.len());
    Ok(ExitCode::SUCCESS)
}

fn classify_pages(a: ClassifyPagesArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    let mut csv = String::from("register,page,score,class\n");
    for mut doc in registers(&a.inputs)? {
        for p in &mut doc.pages {
            let (class, score) = classify_page(p, &model, a.threshold)?;
            p.page_class = class;
            let _ = writeln!(csv, "{},{},{score:.6},{}", doc.register_id, p.page_id, class.as_str());
        }
        if let Some(dir) = &a.output {
            let f: Format = a.format.map(Into::into).unwrap_or(Format::Xml);
            write_to(dir, &format!("{}.{}", doc.register_id, f.extension()), &write_register(&doc, f)?)?;
        }
    }
    print!("{csv}");
    Ok(ExitCode::SUCCESS)
}

fn score(a: ScoreArgs) -> Result<ExitCode> {
    let model = load_model(&a.model)?;
    println!("register,page,score");
    for doc in registers(&a.inputs)? {
        for p in &doc.pages {
            let (_, s) = classify_page(p, &model, None)?;
            println!("{},{},{s:.6}", doc.register_id, p.page_id);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn labelled(docs: Vec<RegisterDocument>) -> Vec<(RecognizedPage, bool)> {
    let mut out = Vec::new();
    for d in docs {
        for p in d.pages {
            match p.page_class {
                PageClass::Act => out.push((p, true)),
                PageClass::NoAct => out.push((p, false)),
                PageClass::Unset => log::warn!("{}: no class label, skipped", p.page_id),
            }
        }
    }
    out
}

fn page_eval(a: PageEvalArgs) -> Result<ExitCode> {
    let mut model = load_model(&a.model)?;
    if let Some(t) = a.threshold {
        model = model.with_threshold(t);
    }
    let eval = labelled(registers(&a.inputs)?);
    if eval.is_empty() {
        bail!("no labelled pages");
    }
    let r = evaluate_model(&model, &eval)?;
    print!("{}", r.to_csv());
    println!("weighted,,,{:.2},{}", r.weighted_f1, r.act.support + r.no_act.support);
    Ok(ExitCode::SUCCESS)
}

fn grid(a: GridSearchArgs) -> Result<ExitCode> {
    let train: Vec<RecognizedPage> = registers(&a.train)?
        .into_iter()
        .flat_map(|d| d.pages)
        .filter(|p| !p.fragments.is_empty())
        .collect();
    let eval = labelled(registers(&a.eval)?);
    let mut detectors = vec![DetectorConfig::isolation_forest(a.seed)];
    if let Some(k) = a.lof_k {
        detectors.push(DetectorConfig::Lof { k });
    }
    let (rows, best) = grid_search::<f64>(&train, &eval, &FeatureKind::ALL, &default_grids(), &detectors)?;
    println!("features,grid,detector,vector_len,act_f1,no_act_f1,weighted_f1,best");
    for (i, r) in rows.iter().enumerate() {
        let det = match r.detector {
            DetectorConfig::IsolationForest { .. } => "isolation_forest",
            DetectorConfig::Lof { .. } => "lof",
        };
        println!(
            "{},{},{det},{},{:.2},{:.2},{:.4},{}",
            r.kind.as_str(),
            r.spec,
            r.vector_len(),
            r.report.act.f1,
            r.report.no_act.f1,
            r.report.weighted_f1,
            i == best
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn quality(a: QualityArgs) -> Result<ExitCode> {
    println!("register,page,lines,q_line,bad_ratio,class");
    for doc in registers(&a.inputs)? {
        for p in &doc.pages {
            match page_quality(&p.lines, a.alpha)? {
                Some(q) => println!("{},{},{},{:.4},{:.4},{}", doc.register_id, p.page_id, q.total, q.q_line, q.bad_ratio, q.class),
                None => println!("{},{},0,,,", doc.register_id, p.page_id),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn gate(g: &GateArgs) -> Result<Option<LayoutGate>> {
    if g.no_gate {
        return Ok(None);
    }
    LayoutGate::new(g.min_lines, g.max_lines, g.min_area, g.max_area)
        .map(Some)
        .map_err(|e| usage(e.to_string()))
}

fn assembled(doc: &RegisterDocument, gate: Option<&LayoutGate>) -> Vec<ExportedAct> {
    merge_fragments(&doc.pages, gate)
        .into_iter()
        .map(|act| ExportedAct { act, record: None })
        .collect()
}

fn assemble(a: AssembleArgs) -> Result<ExitCode> {
    let gate = gate(&a.gate)?;
    let f: Format = a.format.into();
    for doc in registers(&a.inputs)? {
        let e = ExportDocument::new(&doc.register_id, "", assembled(&doc, gate.as_ref()));
        write_to(&a.output, &format!("{}.{}", doc.register_id, f.extension()), &write_export(&e, f)?)?;
        log::info!("{}: {} acts", doc.register_id, e.acts.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn keyword_table(p: &Option<PathBuf>) -> Result<KeywordTable> {
    Ok(match p {
        Some(p) => KeywordTable::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => KeywordTable::default(),
    })
}

fn classify_acts(a: ClassifyActsArgs) -> Result<ExitCode> {
    let table = keyword_table(&a.keywords)?;
    let min = a.min_score.unwrap_or_else(|| table.default_min_score());
    if let Some(t) = &a.text {
        println!("{}", serde_json::to_string_pretty(&classify_text(t, &table, min))?);
        return Ok(ExitCode::SUCCESS);
    }
    if a.inputs.is_empty() {
        return Err(usage("give register inputs or --text"));
    }
    let out = a.output.as_ref().ok_or_else(|| usage("--output is required with register inputs"))?;
    let gate = gate(&a.gate)?;
    let f: Format = a.format.into();
    for doc in registers(&a.inputs)? {
        let mut acts = assembled(&doc, gate.as_ref());
        for ea in &mut acts {
            classify_act(&mut ea.act, &doc.pages, &table, min);
        }
        let e = ExportDocument::new(&doc.register_id, "", acts);
        write_to(out, &format!("{}.{}", doc.register_id, f.extension()), &write_export(&e, f)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_anchor(s: &str) -> Result<StructuredDate> {
    let parts: Vec<&str> = s.split('-').collect();
    let bad = || usage(format!("anchor {s:?} is not YYYY-MM-DD"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let d = StructuredDate::ymd(
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    );
    if !d.is_consistent() {
        return Err(usage(format!("anchor {s} is not a calendar date")));
    }
    Ok(d)
}

fn standardize_date(a: DateArgs) -> Result<ExitCode> {
    let g = NumeralGrammar::default();
    let anchor = a.anchor.as_deref().map(parse_anchor).transpose()?;
    let mut failed = false;
    for t in &a.texts {
        let mut v = match g.parse_date(t, anchor.as_ref()) {
            Ok(p) => serde_json::json!({ "text": t, "date": p.date, "conflicting_years": p.conflicting_years }),
            Err(e) => {
                failed = true;
                serde_json::json!({ "text": t, "error": e.to_string() })
            }
        };
        if a.extract {
            v["found"] = serde_json::to_value(g.extract_dates(t))?;
        }
        println!("{v}");
    }
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn standardize_name(a: NameArgs) -> Result<ExitCode> {
    let role = Role::parse(&a.role).ok_or_else(|| usage(format!("unknown role {:?}", a.role)))?;
    let read = |p: &PathBuf| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let s = NameStandardizer {
        thesaurus: match &a.thesaurus {
            Some(p) => NameThesaurus::parse(&read(p)?)?,
            None => NameThesaurus::sample(),
        },
        costs: match &a.costs {
            Some(p) => VisualCostTable::parse(&read(p)?)?,
            None => VisualCostTable::default(),
        },
        config: NameConfig {
            radius: a.radius,
            canonicalize: a.canonicalize,
            ..NameConfig::default()
        },
    };
    for n in &a.names {
        let name = s.standardize(n, a.act_type.into(), role);
        println!("{}", serde_json::json!({ "raw": n, "name": name }));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let cfg = match &a.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let res = Resources::load(cfg)?;
    let f: Format = a.format.into();
    for doc in exports(&a.inputs)? {
        let acts = doc
            .acts
            .into_iter()
            .map(|ea| {
                let record = res.validator.validate(&ea.act);
                ExportedAct { act: ea.act, record: Some(record) }
            })
            .collect();
        let e = ExportDocument::new(&doc.register_id, &res.config_hash, acts);
        write_to(&a.output, &format!("{}.{}", e.register_id, f.extension()), &write_export(&e, f)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn evaluate(a: EvaluateArgs) -> Result<ExitCode> {
    let gt: Vec<RecognizedPage> = registers(&a.gt)?.into_iter().flat_map(|d| d.pages).collect();
    let pred: Vec<RecognizedPage> = registers(&a.pred)?.into_iter().flat_map(|d| d.pages).collect();
    let ev = compare_pages(&gt, &pred, a.ner_threshold)?;
    for p in &ev.missing_pages {
        log::warn!("page {p} has no prediction");
    }
    let htr = format!(
        "split,pages,cer,wer\n{},{},{:.2},{:.2}\n",
        a.split,
        ev.pages,
        100.0 * ev.errors.cer(),
        100.0 * ev.errors.wer()
    );
    let s = ev.ner.scores();
    let ner = format!(
        "system,precision,recall,f1\n{},{:.1},{:.1},{:.1}\n",
        a.system,
        100.0 * s.precision,
        100.0 * s.recall,
        100.0 * s.f1
    );
    let mut det = String::from("class,iou,ap50,ap75,map\n");
    for d in ev.detection() {
        let _ = writeln!(
            det,
            "{},{:.2},{:.2},{:.2},{:.2}",
            d.class,
            100.0 * d.iou,
            100.0 * d.ap_at(0.5).unwrap_or(0.0),
            100.0 * d.ap_at(0.75).unwrap_or(0.0),
            100.0 * d.map
        );
    }
    match &a.output {
        Some(dir) => {
            write_to(dir, "htr.csv", &htr)?;
            write_to(dir, "ner.csv", &ner)?;
            write_to(dir, "detection.csv", &det)?;
        }
        None => print!("{htr}\n{ner}\n{det}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_cmd(a: RunArgs) -> Result<ExitCode> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if let Some(f) = a.format {
        cfg.format = f.into();
    }
    let format = cfg.format;
    let res = Resources::load(cfg)?;
    let inputs = expand(&a.inputs)?.into_iter().map(Input::Path).collect();
    let out = run(&res, inputs)?;
    write_run(&out, &a.output, format)?;
    print!("{}", stats_report(&out.stats).table);
    if out.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &out.failures {
            eprintln!("failed: {}: {}", f.input, f.error);
        }
        Ok(ExitCode::from(3))
    }
}

fn stats(a: StatsArgs) -> Result<ExitCode> {
    let mut total = CorpusStats::default();
    let mut export_inputs = Vec::new();
    for p in &a.inputs {
        if p.extension().is_some_and(|e| e == "json") {
            let s: CorpusStats = serde_json::from_str(&std::fs::read_to_string(p)?)
                .with_context(|| format!("{} is not a stats file", p.display()))?;
            total.merge(&s);
        } else {
            export_inputs.push(p.clone());
        }
    }
    if !export_inputs.is_empty() {
        total.merge(&CorpusStats::from_exports(&exports(&export_inputs)?));
    }
    let v = total.violations();
    if !v.is_empty() {
        return Err(anyhow!("inconsistent stats: {}", v.join("; ")));
    }
    let r = stats_report(&total);
    print!("{}", if a.csv { r.csv } else { r.table });
    Ok(ExitCode::SUCCESS)
}

fn synth(a: SynthArgs) -> Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?).with_context(|| format!("{}", p.display()))?,
        None => SynthConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.registers {
        cfg.registers = r;
    }
    if let Some(n) = a.acts {
        cfg.acts_per_register = n;
    }
    let f: Format = a.format.into();
    let mut truth = String::new();
    for r in generate(&cfg)? {
        write_to(&a.output, &format!("{}.{}", r.doc.register_id, f.extension()), &write_register(&r.doc, f)?)?;
        for t in &r.truth {
            truth.push_str(&serde_json::to_string(t)?);
            truth.push('\n');
        }
    }
    if a.truth {
        write_to(&a.output, "truth.jsonl", &truth)?;
    }
    Ok(ExitCode::SUCCESS)
}
