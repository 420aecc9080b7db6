//! One-class page classification. Act pages form the training cloud; pages
//! whose line-geometry features fall outside it are classified `no_act`.
//!
//! Three feature families are computed on a `rows × columns` grid laid over
//! the page: subsampled mask projections, line-area density per cell, and the
//! number of line polygons touching each cell. Two detectors are provided: an
//! isolation forest scored in `(0, 1)` with 0.5 as the outlier boundary, and
//! the local outlier factor with 1.5 as the default boundary.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Orientation, PageClass, RecognizedPage};
use crate::error::{Error, Result};
use crate::geometry::{self, Rect};
use crate::scalar::Real;

pub const IF_THRESHOLD: f64 = 0.5;
pub const LOF_THRESHOLD: f64 = 1.5;
pub const DEFAULT_TREES: usize = 100;
pub const DEFAULT_SUBSAMPLE: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub columns: usize,
}

impl GridSpec {
    pub fn new(rows: usize, columns: usize) -> Result<Self> {
        if rows == 0 || columns == 0 || rows * columns > 10_000 {
            return Err(Error::Config(format!("grid {rows}x{columns} must be positive with at most 10000 cells")));
        }
        Ok(GridSpec { rows, columns })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.columns)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Projection,
    LineDensity,
    LineCount,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Projection, FeatureKind::LineDensity, FeatureKind::LineCount];

    pub fn len(&self, spec: GridSpec) -> usize {
        match self {
            FeatureKind::Projection => spec.rows + spec.columns,
            _ => spec.rows * spec.columns,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureKind::Projection => "projection",
            FeatureKind::LineDensity => "line_density",
            FeatureKind::LineCount => "line_count",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub kind: FeatureKind,
    pub spec: GridSpec,
    pub values: Vec<T>,
}

/// Computes one feature family for a page. Cell `(r, c)` is at index `r·columns + c`.
pub fn extract_features<T: Real>(page: &RecognizedPage, kind: FeatureKind, spec: GridSpec) -> Result<FeatureVector<T>> {
    if page.width <= 0 || page.height <= 0 {
        return Err(Error::Geometry(format!("page {} has degenerate dimensions", page.page_id)));
    }
    let w = T::from_i64(page.width).unwrap();
    let h = T::from_i64(page.height).unwrap();
    let (rows, cols) = (spec.rows, spec.columns);
    let page_rect = Rect { x0: T::zero(), y0: T::zero(), x1: w, y1: h };
    let cell = |r: usize, c: usize| Rect {
        x0: w * T::from_count(c) / T::from_count(cols),
        x1: w * T::from_count(c + 1) / T::from_count(cols),
        y0: h * T::from_count(r) / T::from_count(rows),
        y1: h * T::from_count(r + 1) / T::from_count(rows),
    };
    let mut coverage = vec![T::zero(); rows * cols];
    let mut counts = vec![T::zero(); rows * cols];
    for line in &page.lines {
        if line.polygon.points.len() < 3 {
            continue;
        }
        let poly = geometry::clip_to_rect(&line.polygon.to_points::<T>(), &page_rect);
        let Some(bb) = geometry::bbox(&poly) else { continue };
        let c0 = (bb.x0 / w * T::from_count(cols)).floor().to_usize().unwrap_or(0).min(cols - 1);
        let c1 = (bb.x1 / w * T::from_count(cols)).floor().to_usize().unwrap_or(0).min(cols - 1);
        let r0 = (bb.y0 / h * T::from_count(rows)).floor().to_usize().unwrap_or(0).min(rows - 1);
        let r1 = (bb.y1 / h * T::from_count(rows)).floor().to_usize().unwrap_or(0).min(rows - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                let a = geometry::area(&geometry::clip_to_rect(&poly, &cell(r, c)));
                if a > T::zero() {
                    coverage[r * cols + c] = coverage[r * cols + c] + a;
                    counts[r * cols + c] = counts[r * cols + c] + T::one();
                }
            }
        }
    }
    let density: Vec<T> = (0..rows * cols)
        .map(|i| (coverage[i] / cell(i / cols, i % cols).area()).min(T::one()))
        .collect();
    let values = match kind {
        FeatureKind::LineCount => counts,
        FeatureKind::LineDensity => density,
        FeatureKind::Projection => {
            let row_sums: Vec<T> = (0..rows).map(|r| (0..cols).map(|c| density[r * cols + c]).sum()).collect();
            let col_sums: Vec<T> = (0..cols).map(|c| (0..rows).map(|r| density[r * cols + c]).sum()).collect();
            let norm = |v: Vec<T>| {
                let m = v.iter().copied().fold(T::zero(), T::max);
                if m > T::zero() {
                    v.into_iter().map(|x| x / m).collect()
                } else {
                    v
                }
            };
            let mut out = norm(row_sums);
            out.extend(norm(col_sums));
            out
        }
    };
    Ok(FeatureVector { kind, spec, values })
}

fn check_training<T>(features: &[FeatureVector<T>]) -> Result<(FeatureKind, GridSpec, usize)> {
    let first = features.first().ok_or_else(|| Error::Model("empty training set".into()))?;
    for f in features {
        if f.kind != first.kind || f.spec != first.spec || f.values.len() != first.values.len() {
            return Err(Error::Model("training vectors mix feature kinds or grids".into()));
        }
    }
    Ok((first.kind, first.spec, first.values.len()))
}

/// Average path length of an unsuccessful binary-search-tree lookup over `n` keys.
pub fn average_path_length<T: Real>(n: usize) -> T {
    match n {
        0 | 1 => T::zero(),
        2 => T::one(),
        _ => {
            let m = T::from_count(n - 1);
            let harmonic = m.ln() + T::lit(0.577_215_664_901_532_9);
            T::lit(2.0) * harmonic - T::lit(2.0) * m / T::from_count(n)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node<T> {
    Leaf { size: usize, depth: usize },
    Split { feature: usize, value: T, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree<T> {
    /// Node 0 is the root.
    pub nodes: Vec<Node<T>>,
}

impl<T: Real> IsolationTree<T> {
    fn grow(data: &[Vec<T>], idx: Vec<usize>, height_limit: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut tree = IsolationTree { nodes: Vec::new() };
        tree.build(data, idx, 0, height_limit, rng);
        tree
    }

    fn build(&mut self, data: &[Vec<T>], idx: Vec<usize>, depth: usize, limit: usize, rng: &mut ChaCha8Rng) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { size: idx.len(), depth });
        if depth >= limit || idx.len() <= 1 {
            return at;
        }
        let dim = data[idx[0]].len();
        let ranges: Vec<(usize, T, T)> = (0..dim)
            .filter_map(|f| {
                let (lo, hi) = idx.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &i| {
                    (lo.min(data[i][f]), hi.max(data[i][f]))
                });
                (hi > lo).then_some((f, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return at;
        }
        let (feature, lo, hi) = ranges[rng.gen_range(0..ranges.len())];
        let u = T::lit(rng.gen::<f64>());
        let value = (lo + (hi - lo) * u).max(lo);
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| data[i][feature] < value);
        let left = self.build(data, l, depth + 1, limit, rng);
        let right = self.build(data, r, depth + 1, limit, rng);
        self.nodes[at] = Node::Split { feature, value, left, right };
        at
    }

    /// Depth of the leaf reached by `x`, adjusted by `c(size)` for unresolved leaves.
    pub fn path_length(&self, x: &[T]) -> T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { size, depth } => return T::from_count(*depth) + average_path_length::<T>(*size),
                Node::Split { feature, value, left, right } => {
                    at = if x[*feature] < *value { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest<T> {
    pub kind: FeatureKind,
    pub spec: GridSpec,
    pub num_trees: usize,
    /// Effective subsample size ψ = min(requested, training size).
    pub subsample_size: usize,
    pub seed: u64,
    pub trees: Vec<IsolationTree<T>>,
}

impl<T: Real> IsolationForest<T> {
    /// Fits `num_trees` trees, each on a uniform subsample drawn without
    /// replacement, with height capped at `ceil(log2 ψ)`.
    pub fn fit(features: &[FeatureVector<T>], num_trees: usize, subsample: usize, seed: u64) -> Result<Self> {
        let (kind, spec, _) = check_training(features)?;
        if features.len() < 2 {
            return Err(Error::Model("isolation forest needs at least two training vectors".into()));
        }
        if num_trees == 0 || subsample < 2 {
            return Err(Error::Model("need at least one tree and a subsample of two".into()));
        }
        let data: Vec<Vec<T>> = features.iter().map(|f| f.values.clone()).collect();
        let psi = subsample.min(data.len());
        let height_limit = (psi as f64).log2().ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..num_trees)
            .map(|_| {
                let idx = sample(&mut rng, data.len(), psi).into_vec();
                IsolationTree::grow(&data, idx, height_limit, &mut rng)
            })
            .collect();
        Ok(IsolationForest {
            kind,
            spec,
            num_trees,
            subsample_size: psi,
            seed,
            trees,
        })
    }

    pub fn mean_path_length(&self, x: &FeatureVector<T>) -> Result<T> {
        self.check_query(x)?;
        let total: T = self.trees.iter().map(|t| t.path_length(&x.values)).sum();
        Ok(total / T::from_count(self.trees.len()))
    }

    /// `2^(−E[h(x)] / c(ψ))`; above 0.5 means outlier.
    pub fn score(&self, x: &FeatureVector<T>) -> Result<T> {
        let e = self.mean_path_length(x)?;
        Ok(anomaly_score(e, self.subsample_size))
    }

    fn check_query(&self, x: &FeatureVector<T>) -> Result<()> {
        if x.kind != self.kind || x.spec != self.spec || x.values.len() != self.kind.len(self.spec) {
            return Err(Error::Model(format!(
                "query features {}/{} do not match model {}/{}",
                x.kind.as_str(),
                x.spec,
                self.kind.as_str(),
                self.spec
            )));
        }
        Ok(())
    }
}

/// Isolation score for mean path length `e` in a forest with subsample size `psi`.
pub fn anomaly_score<T: Real>(e: T, psi: usize) -> T {
    T::lit(2.0).powf(-e / average_path_length::<T>(psi))
}

fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

/// Local outlier factor with exactly `k` neighbours per point (ties by index).
/// A `1e-10` term keeps reachability densities finite on duplicated points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalOutlierFactor<T> {
    pub kind: FeatureKind,
    pub spec: GridSpec,
    pub k: usize,
    pub points: Vec<Vec<T>>,
    pub k_distance: Vec<T>,
    pub lrd: Vec<T>,
}

const LRD_EPS: f64 = 1e-10;

impl<T: Real> LocalOutlierFactor<T> {
    pub fn fit(features: &[FeatureVector<T>], k: usize) -> Result<Self> {
        let (kind, spec, _) = check_training(features)?;
        if k == 0 || k >= features.len() {
            return Err(Error::Model(format!("k = {k} must satisfy 1 <= k < {}", features.len())));
        }
        let points: Vec<Vec<T>> = features.iter().map(|f| f.values.clone()).collect();
        if points.iter().all(|p| *p == points[0]) {
            return Err(Error::Model(
                "training set holds a single distinct point; local densities are infinite".into(),
            ));
        }
        let neighbours: Vec<Vec<(usize, T)>> = (0..points.len())
            .map(|i| nearest(&points, &points[i], k, Some(i)))
            .collect();
        let k_distance: Vec<T> = neighbours.iter().map(|n| n[k - 1].1).collect();
        let lrd = neighbours
            .iter()
            .map(|n| local_density(n, &k_distance))
            .collect();
        Ok(LocalOutlierFactor {
            kind,
            spec,
            k,
            points,
            k_distance,
            lrd,
        })
    }

    /// LOF of a query point against the training set.
    pub fn score(&self, x: &FeatureVector<T>) -> Result<T> {
        if x.kind != self.kind || x.spec != self.spec || x.values.len() != self.points[0].len() {
            return Err(Error::Model("query features do not match the model".into()));
        }
        Ok(self.lof_of(&nearest(&self.points, &x.values, self.k, None)))
    }

    /// LOF of training point `i` with itself excluded from its neighbourhood.
    pub fn training_score(&self, i: usize) -> T {
        self.lof_of(&nearest(&self.points, &self.points[i], self.k, Some(i)))
    }

    fn lof_of(&self, neigh: &[(usize, T)]) -> T {
        let own = local_density(neigh, &self.k_distance);
        let mean: T = neigh.iter().map(|(o, _)| self.lrd[*o]).sum::<T>() / T::from_count(neigh.len());
        mean / own
    }
}

fn nearest<T: Real>(points: &[Vec<T>], x: &[T], k: usize, skip: Option<usize>) -> Vec<(usize, T)> {
    let mut d: Vec<(usize, T)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, p)| (j, distance(x, p)))
        .collect();
    d.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    d.truncate(k);
    d
}

fn local_density<T: Real>(neigh: &[(usize, T)], k_distance: &[T]) -> T {
    let reach: T = neigh.iter().map(|(o, d)| k_distance[*o].max(*d)).sum::<T>() / T::from_count(neigh.len());
    T::one() / (reach + T::lit(LRD_EPS))
}

/// A fitted page model with its decision threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum PageModel<T> {
    IsolationForest { model: IsolationForest<T>, threshold: f64 },
    Lof { model: LocalOutlierFactor<T>, threshold: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum DetectorConfig {
    IsolationForest { num_trees: usize, subsample: usize, seed: u64 },
    Lof { k: usize },
}

impl DetectorConfig {
    pub fn isolation_forest(seed: u64) -> Self {
        DetectorConfig::IsolationForest {
            num_trees: DEFAULT_TREES,
            subsample: DEFAULT_SUBSAMPLE,
            seed,
        }
    }

    pub fn default_threshold(&self) -> f64 {
        match self {
            DetectorConfig::IsolationForest { .. } => IF_THRESHOLD,
            DetectorConfig::Lof { .. } => LOF_THRESHOLD,
        }
    }
}

impl<T: Real> PageModel<T> {
    pub fn fit(features: &[FeatureVector<T>], detector: &DetectorConfig) -> Result<Self> {
        Ok(match detector {
            DetectorConfig::IsolationForest { num_trees, subsample, seed } => PageModel::IsolationForest {
                model: IsolationForest::fit(features, *num_trees, *subsample, *seed)?,
                threshold: IF_THRESHOLD,
            },
            DetectorConfig::Lof { k } => PageModel::Lof {
                model: LocalOutlierFactor::fit(features, *k)?,
                threshold: LOF_THRESHOLD,
            },
        })
    }

    /// Extracts the model's feature family from each page and fits on them.
    pub fn fit_pages(pages: &[RecognizedPage], kind: FeatureKind, spec: GridSpec, detector: &DetectorConfig) -> Result<Self> {
        let feats = portrait_pages(pages)
            .iter()
            .map(|p| extract_features(p, kind, spec))
            .collect::<Result<Vec<_>>>()?;
        Self::fit(&feats, detector)
    }

    pub fn kind(&self) -> (FeatureKind, GridSpec) {
        match self {
            PageModel::IsolationForest { model, .. } => (model.kind, model.spec),
            PageModel::Lof { model, .. } => (model.kind, model.spec),
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            PageModel::IsolationForest { threshold, .. } | PageModel::Lof { threshold, .. } => *threshold,
        }
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        match &mut self {
            PageModel::IsolationForest { threshold, .. } | PageModel::Lof { threshold, .. } => *threshold = t,
        }
        self
    }

    pub fn score(&self, x: &FeatureVector<T>) -> Result<T> {
        match self {
            PageModel::IsolationForest { model, .. } => model.score(x),
            PageModel::Lof { model, .. } => model.score(x),
        }
    }

    /// Score of a single portrait page.
    pub fn score_page(&self, page: &RecognizedPage) -> Result<T> {
        let (kind, spec) = self.kind();
        self.score(&extract_features(page, kind, spec)?)
    }
}

/// Replaces landscape double pages by their two portrait halves.
pub fn portrait_pages(pages: &[RecognizedPage]) -> Vec<RecognizedPage> {
    pages
        .iter()
        .flat_map(|p| match p.orientation {
            Orientation::Landscape => p.split_landscape().to_vec(),
            Orientation::Portrait => vec![p.clone()],
        })
        .collect()
}

/// `no_act` iff the score exceeds the threshold. Landscape pages are split and
/// keep the lower (more act-like) score of their halves.
pub fn classify_page<T: Real>(page: &RecognizedPage, model: &PageModel<T>, threshold: Option<f64>) -> Result<(PageClass, f64)> {
    let thr = threshold.unwrap_or_else(|| model.threshold());
    let score = match page.orientation {
        Orientation::Portrait => model.score_page(page)?.to_f64().unwrap(),
        Orientation::Landscape => {
            let [l, r] = page.split_landscape();
            let a = model.score_page(&l)?.to_f64().unwrap();
            let b = model.score_page(&r)?.to_f64().unwrap();
            a.min(b)
        }
    };
    let class = if score > thr { PageClass::NoAct } else { PageClass::Act };
    Ok((class, score))
}

/// Precision / recall / F1 for the act and no-act classes plus the support-weighted F1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub act: ClassRow,
    pub no_act: ClassRow,
    pub weighted_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

impl ClassReport {
    /// `truth[i]` and `pred[i]` are true for act pages.
    pub fn from_labels(truth: &[bool], pred: &[bool]) -> Self {
        let count = |t: bool, p: bool| truth.iter().zip(pred).filter(|(a, b)| **a == t && **b == p).count();
        let (tt, tf, ft, ff) = (count(true, true), count(true, false), count(false, true), count(false, false));
        let (ap, ar, af) = prf(tt, ft, tf);
        let (np, nr, nf) = prf(ff, tf, ft);
        let (sa, sn) = (tt + tf, ft + ff);
        let weighted_f1 = if sa + sn == 0 { 0.0 } else { (af * sa as f64 + nf * sn as f64) / (sa + sn) as f64 };
        ClassReport {
            act: ClassRow { precision: ap, recall: ar, f1: af, support: sa },
            no_act: ClassRow { precision: np, recall: nr, f1: nf, support: sn },
            weighted_f1,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,precision,recall,f1,support\n");
        for (name, r) in [("act", &self.act), ("no_act", &self.no_act)] {
            s.push_str(&format!("{name},{:.2},{:.2},{:.2},{}\n", r.precision, r.recall, r.f1, r.support));
        }
        s
    }
}

/// Scores a labelled evaluation set.
pub fn evaluate_model<T: Real>(model: &PageModel<T>, eval: &[(RecognizedPage, bool)]) -> Result<ClassReport> {
    let mut truth = Vec::with_capacity(eval.len());
    let mut pred = Vec::with_capacity(eval.len());
    for (page, is_act) in eval {
        let (class, _) = classify_page(page, model, None)?;
        truth.push(*is_act);
        pred.push(class == PageClass::Act);
    }
    Ok(ClassReport::from_labels(&truth, &pred))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchRow {
    pub kind: FeatureKind,
    pub spec: GridSpec,
    pub detector: DetectorConfig,
    pub report: ClassReport,
}

impl GridSearchRow {
    pub fn vector_len(&self) -> usize {
        self.kind.len(self.spec)
    }
}

pub fn default_grids() -> Vec<GridSpec> {
    vec![
        GridSpec { rows: 8, columns: 6 },
        GridSpec { rows: 16, columns: 12 },
        GridSpec { rows: 32, columns: 24 },
    ]
}

/// Fits every (feature kind, grid, detector) combination on `train` and picks
/// the one with the highest weighted F1 on `eval`, ties going to the shorter
/// feature vector and then to the earlier configuration.
pub fn grid_search<T: Real>(
    train: &[RecognizedPage],
    eval: &[(RecognizedPage, bool)],
    kinds: &[FeatureKind],
    grids: &[GridSpec],
    detectors: &[DetectorConfig],
) -> Result<(Vec<GridSearchRow>, usize)> {
    let mut rows = Vec::new();
    for &kind in kinds {
        for &spec in grids {
            for det in detectors {
                let model = PageModel::<T>::fit_pages(train, kind, spec, det)?;
                rows.push(GridSearchRow {
                    kind,
                    spec,
                    detector: det.clone(),
                    report: evaluate_model(&model, eval)?,
                });
            }
        }
    }
    let best = best_row(&rows).ok_or_else(|| Error::Model("empty grid search".into()))?;
    Ok((rows, best))
}

pub fn best_row(rows: &[GridSearchRow]) -> Option<usize> {
    (0..rows.len()).reduce(|b, i| {
        let (fb, fi) = (rows[b].report.weighted_f1, rows[i].report.weighted_f1);
        if fi > fb || (fi == fb && rows[i].vector_len() < rows[b].vector_len()) {
            i
        } else {
            b
        }
    })
}
