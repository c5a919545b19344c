//! Similarity-search evaluation.
//!
//! Every sample of the test pool is used in turn as a query against all other
//! samples of the pool. Accuracy is the mean fraction of a query's `r` nearest
//! input-space neighbors that are also among its `r` nearest output-space
//! neighbors. Distance ties at the rank boundary go to the lowest index in
//! both spaces.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{make_fjl, make_fly, make_lsh, BaselineSpec};
use crate::config::{default_c, ModelConfig};
use crate::datagen::{random_codes, Dataset};
use crate::error::{ensure_dim, Error, Result};
use crate::matrix::{BinaryCodeMatrix, DenseMatrix};
use crate::parallel::with_workers;
use crate::seed::derive_seed;
use crate::trainer::{train_supervised, train_unsupervised, TrainOptions};
use crate::wta::hash_columns;

pub const DEFAULT_TOP_R: usize = 100;
pub const DEFAULT_REPEATS: usize = 10;
pub const CSV_HEADER: &str = "dataset,algorithm,k,run,accuracy,train_seconds,eval_seconds,seed";

/// The `r` nearest neighbors of each query, nearest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborTable {
    n_queries: usize,
    top_r: usize,
    indices: Vec<u32>,
}

impl NeighborTable {
    pub fn new(n_queries: usize, top_r: usize, indices: Vec<u32>) -> Result<Self> {
        ensure_dim("neighbor index count", n_queries * top_r, indices.len())?;
        Ok(Self {
            n_queries,
            top_r,
            indices,
        })
    }

    pub fn n_queries(&self) -> usize {
        self.n_queries
    }

    pub fn top_r(&self) -> usize {
        self.top_r
    }

    pub fn row(&self, q: usize) -> &[u32] {
        &self.indices[q * self.top_r..(q + 1) * self.top_r]
    }
}

/// Output-space representations that can be searched.
#[derive(Clone, Copy, Debug)]
pub enum Codes<'a> {
    /// Fixed-weight binary codes, compared by Hamming distance.
    Binary(&'a BinaryCodeMatrix),
    /// Dense vectors, compared by Euclidean distance.
    Dense(&'a DenseMatrix),
}

impl Codes<'_> {
    fn len(&self) -> usize {
        match self {
            Codes::Binary(b) => b.line_count(),
            Codes::Dense(d) => d.cols(),
        }
    }
}

/// The `r` smallest `dist` entries other than `query`, ordered by
/// `(distance, index)`.
fn nearest<D: Copy + PartialOrd>(dist: &[D], query: usize, r: usize) -> Vec<u32> {
    let order = |a: &u32, b: &u32| {
        dist[*a as usize]
            .partial_cmp(&dist[*b as usize])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut idx: Vec<u32> = (0..dist.len() as u32).filter(|&i| i as usize != query).collect();
    if r < idx.len() {
        idx.select_nth_unstable_by(r - 1, order);
        idx.truncate(r);
    }
    idx.sort_unstable_by(order);
    idx
}

#[inline]
pub fn squared_euclidean(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = [0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let t = x[l] as f64 - y[l] as f64;
            acc[l] += t * t;
        }
    }
    let tail: f64 = ra
        .iter()
        .zip(rb)
        .map(|(x, y)| (*x as f64 - *y as f64).powi(2))
        .sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn check_r(r: usize, n: usize) -> Result<()> {
    if r == 0 || r >= n {
        return Err(Error::InvalidArgument(format!(
            "neighbor count r must satisfy 1 <= r < n (r = {r}, n = {n})"
        )));
    }
    Ok(())
}

fn dense_neighbors(x: &DenseMatrix, r: usize, workers: Option<usize>) -> Result<NeighborTable> {
    let n = x.cols();
    check_r(r, n)?;
    let rows: Vec<Vec<u32>> = with_workers(workers, || {
        (0..n)
            .into_par_iter()
            .map(|q| {
                let query = x.column(q);
                let dist: Vec<f64> = x.columns().map(|c| squared_euclidean(query, c)).collect();
                nearest(&dist, q, r)
            })
            .collect()
    });
    NeighborTable::new(n, r, rows.concat())
}

/// Exact Euclidean `r` nearest neighbors of every column among the others.
pub fn ground_truth(x: &DenseMatrix, r: usize, workers: Option<usize>) -> Result<NeighborTable> {
    dense_neighbors(x, r, workers)
}

/// Nearest neighbors in the output space.
pub fn output_neighbors(codes: Codes<'_>, r: usize, workers: Option<usize>) -> Result<NeighborTable> {
    match codes {
        Codes::Dense(d) => dense_neighbors(d, r, workers),
        Codes::Binary(b) => {
            let n = codes.len();
            check_r(r, n)?;
            let rows: Vec<Vec<u32>> = with_workers(workers, || {
                (0..n)
                    .into_par_iter()
                    .map(|q| {
                        let dist: Vec<u32> = (0..n).map(|m| b.hamming(q, m)).collect();
                        nearest(&dist, q, r)
                    })
                    .collect()
            });
            NeighborTable::new(n, r, rows.concat())
        }
    }
}

/// Mean over queries of the fraction of shared neighbors.
pub fn overlap_accuracy(gt: &NeighborTable, found: &NeighborTable) -> Result<f64> {
    ensure_dim("query count", gt.n_queries, found.n_queries)?;
    ensure_dim("neighbor count", gt.top_r, found.top_r)?;
    if gt.n_queries == 0 {
        return Err(Error::InvalidArgument("neighbor tables are empty".into()));
    }
    let mut a = Vec::with_capacity(gt.top_r);
    let mut b = Vec::with_capacity(gt.top_r);
    let mut shared_total = 0usize;
    for q in 0..gt.n_queries {
        a.clear();
        a.extend_from_slice(gt.row(q));
        a.sort_unstable();
        b.clear();
        b.extend_from_slice(found.row(q));
        b.sort_unstable();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    shared_total += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok(shared_total as f64 / (gt.n_queries * gt.top_r) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Sup,
    Unsup,
    Lsh,
    Fjl,
    Fly,
    /// Uniformly random fixed-weight codes; the chance-level control.
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Sup,
        Algorithm::Unsup,
        Algorithm::Lsh,
        Algorithm::Fjl,
        Algorithm::Fly,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sup => "sup",
            Algorithm::Unsup => "unsup",
            Algorithm::Lsh => "lsh",
            Algorithm::Fjl => "fjl",
            Algorithm::Fly => "fly",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm {s:?} (expected one of sup, unsup, lsh, fjl, fly, random)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    /// Output dimension of the binary-code algorithms.
    pub d_out: usize,
    /// Ones per projection row; `floor(0.1 d)` when `None`.
    pub c: Option<usize>,
    pub top_r: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Settings for the unsupervised trainer (its `workers` is overridden).
    pub train_options: TrainOptions,
    pub fjl_density: f64,
    pub workers: Option<usize>,
}

impl BenchConfig {
    pub fn new(d_out: usize, seed: u64) -> Self {
        Self {
            d_out,
            c: None,
            top_r: DEFAULT_TOP_R,
            repeats: DEFAULT_REPEATS,
            seed,
            train_options: TrainOptions::default(),
            fjl_density: crate::baselines::DEFAULT_FJL_DENSITY,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub run: usize,
    pub accuracy: f64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
    pub seed: u64,
}

/// Seed used by `algorithm` at hash length `k` in repeat `run`.
pub fn run_seed(root: u64, algorithm: Algorithm, k: usize, run: usize) -> u64 {
    derive_seed(derive_seed(root, algorithm.name(), k as u64), "run", run as u64)
}

fn validate_benchmark(
    train: &Dataset,
    test: &Dataset,
    algorithms: &[Algorithm],
    k_values: &[usize],
    config: &BenchConfig,
) -> Result<()> {
    if algorithms.is_empty() || k_values.is_empty() {
        return Err(Error::Config("need at least one algorithm and one k".into()));
    }
    if config.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    if train.x.rows() != test.x.rows() {
        return Err(Error::Config(format!(
            "train and test dimensions differ ({} vs {})",
            train.x.rows(),
            test.x.rows()
        )));
    }
    check_r(config.top_r, test.len())
        .map_err(|_| Error::Config(format!("test pool of {} samples is too small for r = {}", test.len(), config.top_r)))?;
    let d = test.x.rows();
    for &k in k_values {
        for &alg in algorithms {
            match alg {
                Algorithm::Lsh | Algorithm::Fjl => {
                    if k == 0 {
                        return Err(Error::Config("k must be positive".into()));
                    }
                }
                _ => {
                    ModelConfig::new(d, config.d_out, k, config.c, config.seed)
                        .map_err(|e| Error::Config(format!("{alg} at k = {k}: {e}")))?;
                }
            }
            if alg == Algorithm::Sup {
                match &train.y {
                    None => {
                        return Err(Error::Config(
                            "supervised training requested but the training set has no codes".into(),
                        ))
                    }
                    Some(y) if y.weight() != k || y.rows() != config.d_out => {
                        return Err(Error::Config(format!(
                            "supervised training at k = {k}, d_out = {} needs codes of that shape; the training codes have weight {} and {} rows",
                            config.d_out,
                            y.weight(),
                            y.rows()
                        )))
                    }
                    Some(_) => {}
                }
            }
            if matches!(alg, Algorithm::Sup | Algorithm::Unsup) && train.is_empty() {
                return Err(Error::Config("training set is empty".into()));
            }
        }
    }
    Ok(())
}

/// Trains or draws each algorithm on `train`, encodes `test`, and scores the
/// encoding against exact test-pool neighbors.
pub fn run_benchmark(
    train: &Dataset,
    test: &Dataset,
    algorithms: &[Algorithm],
    k_values: &[usize],
    config: &BenchConfig,
) -> Result<Vec<EvalReport>> {
    validate_benchmark(train, test, algorithms, k_values, config)?;
    let workers = config.workers;
    let d = test.x.rows();
    let c = config.c.unwrap_or_else(|| default_c(d));
    let gt = ground_truth(&test.x, config.top_r, workers)?;
    let train_options = TrainOptions {
        workers,
        ..config.train_options.clone()
    };

    let mut reports = Vec::new();
    for &k in k_values {
        for &alg in algorithms {
            for run in 0..config.repeats {
                let seed = run_seed(config.seed, alg, k, run);
                let model_cfg = ModelConfig {
                    d,
                    d_out: config.d_out,
                    k,
                    c,
                    seed,
                };
                let started = Instant::now();
                let encoder = match alg {
                    Algorithm::Sup => {
                        let y = train.y.as_ref().expect("validated");
                        Encoder::Binary(train_supervised(&train.x, y, &model_cfg, workers)?.w)
                    }
                    Algorithm::Unsup => {
                        Encoder::Binary(train_unsupervised(&train.x, &model_cfg, &train_options)?.model.w)
                    }
                    Algorithm::Fly => Encoder::Binary(make_fly(&BaselineSpec::fly(d, config.d_out, k, c, seed))?),
                    Algorithm::Lsh => Encoder::Lsh(make_lsh(&BaselineSpec::lsh(d, k, seed))?),
                    Algorithm::Fjl => Encoder::Fjl(make_fjl(&BaselineSpec {
                        density: config.fjl_density,
                        ..BaselineSpec::fjl(d, k, seed)
                    })?),
                    Algorithm::Random => Encoder::Codes(random_codes(config.d_out, test.len(), k, seed)?),
                };
                let train_seconds = started.elapsed().as_secs_f64();

                let started = Instant::now();
                let found = match &encoder {
                    Encoder::Binary(w) => {
                        let codes = hash_columns(w, &test.x, k, workers)?;
                        output_neighbors(Codes::Binary(&codes), config.top_r, workers)?
                    }
                    Encoder::Codes(codes) => output_neighbors(Codes::Binary(codes), config.top_r, workers)?,
                    Encoder::Lsh(p) => {
                        let out = p.transform(&test.x, workers)?;
                        output_neighbors(Codes::Dense(&out), config.top_r, workers)?
                    }
                    Encoder::Fjl(p) => {
                        let out = p.transform(&test.x, workers)?;
                        output_neighbors(Codes::Dense(&out), config.top_r, workers)?
                    }
                };
                let accuracy = overlap_accuracy(&gt, &found)?;
                let eval_seconds = started.elapsed().as_secs_f64();

                reports.push(EvalReport {
                    dataset: test.name.clone(),
                    algorithm: alg,
                    k,
                    run,
                    accuracy,
                    train_seconds,
                    eval_seconds,
                    seed,
                });
            }
        }
    }
    Ok(reports)
}

enum Encoder {
    Binary(BinaryCodeMatrix),
    Codes(BinaryCodeMatrix),
    Lsh(crate::baselines::DenseProjection),
    Fjl(crate::baselines::SparseSignedProjection),
}

/// Writes reports as CSV. With `timing` off the two duration columns are left
/// empty so that repeated runs produce identical bytes.
pub fn write_csv<W: Write>(out: &mut W, reports: &[EvalReport], timing: bool) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        let (train, eval) = if timing {
            (format!("{:.6}", r.train_seconds), format!("{:.6}", r.eval_seconds))
        } else {
            (String::new(), String::new())
        };
        writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{}",
            r.dataset, r.algorithm, r.k, r.run, r.accuracy, train, eval, r.seed
        )?;
    }
    Ok(())
}

/// Mean and spread of accuracy over the repeats of one `(dataset, algorithm, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
    pub mean_train_seconds: f64,
}

pub fn summarize(reports: &[EvalReport]) -> Vec<Summary> {
    let mut keys: Vec<(String, usize, Algorithm)> = Vec::new();
    for r in reports {
        let key = (r.dataset.clone(), r.k, r.algorithm);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(dataset, k, algorithm)| {
            let group: Vec<&EvalReport> = reports
                .iter()
                .filter(|r| r.dataset == dataset && r.k == k && r.algorithm == algorithm)
                .collect();
            let n = group.len() as f64;
            let mean = group.iter().map(|r| r.accuracy).sum::<f64>() / n;
            let std = if group.len() > 1 {
                (group.iter().map(|r| (r.accuracy - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            Summary {
                dataset,
                algorithm,
                k,
                runs: group.len(),
                mean,
                std,
                mean_train_seconds: group.iter().map(|r| r.train_seconds).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Renders summaries as a dataset/k by algorithm table of mean accuracies.
pub fn format_table(summaries: &[Summary]) -> String {
    let mut algorithms: Vec<Algorithm> = summaries.iter().map(|s| s.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut rows: Vec<(&str, usize)> = Vec::new();
    for s in summaries {
        if !rows.contains(&(s.dataset.as_str(), s.k)) {
            rows.push((s.dataset.as_str(), s.k));
        }
    }
    let name_width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(7);

    let mut out = String::new();
    let _ = write!(out, "{:<name_width$} | {:>3}", "dataset", "k");
    for a in &algorithms {
        let _ = write!(out, " | {:>16}", a.name().to_uppercase());
    }
    out.push('\n');
    let width = out.trim_end().len();
    out.push_str(&"-".repeat(width));
    out.push('\n');
    for (dataset, k) in rows {
        let _ = write!(out, "{dataset:<name_width$} | {k:>3}");
        for a in &algorithms {
            match summaries
                .iter()
                .find(|s| s.dataset == dataset && s.k == k && s.algorithm == *a)
            {
                Some(s) => {
                    let _ = write!(out, " | {:>7.4} ± {:<6.4}", s.mean, s.std);
                }
                None => {
                    let _ = write!(out, " | {:>16}", "n/a");
                }
            }
        }
        out.push('\n');
    }
    out
}
