//! Training of the projection matrix `W`.
//!
//! The supervised objective decomposes over output rows: row `i` of the
//! optimal `W` is the winner-take-all of its score vector
//! `l_i = sum_m x_m (y_im - k/d')` with `c` winners. The unsupervised trainer
//! alternates that closed-form `W` step with re-hashing the inputs to get `Y`;
//! each half-step maximizes the same objective over one variable, so the
//! objective never decreases.

use rand::seq::index;
use rayon::prelude::*;

use crate::config::ModelConfig;
use crate::error::{ensure_dim, Error, Result};
use crate::matrix::{Axis, BinaryCodeMatrix, DenseMatrix};
use crate::parallel::with_workers;
use crate::seed;
use crate::wta::{check_projection, hash_columns, project_unchecked, top_k_indices};

/// Score vectors `l_i`, one contiguous `d`-vector per output row.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    d: usize,
    d_out: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// `l_i`, the score vector of output row `i`.
    pub fn column(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    /// Entry `l_{j,i}`.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[i * self.d + j]
    }
}

/// A trained (or randomly drawn) projection with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub config: ModelConfig,
    /// `d' x d`, exactly `c` ones per row.
    pub w: BinaryCodeMatrix,
    /// Final objective value.
    pub objective: f64,
    /// 1 for supervised training; number of code updates for unsupervised.
    pub iterations: usize,
    /// Training columns that were entirely zero.
    pub zero_columns: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Convergence {
    /// Stop once the codes repeat.
    CodeFixedPoint,
    /// Also stop once an iteration raises the objective by at most `epsilon`.
    ObjectiveEpsilon(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// Each row an independent uniform `c`-subset of the inputs.
    UniformRandomRows,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    pub max_iterations: usize,
    pub convergence: Convergence,
    pub init: Init,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            convergence: Convergence::CodeFixedPoint,
            init: Init::UniformRandomRows,
            workers: None,
        }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        if let Convergence::ObjectiveEpsilon(eps) = self.convergence {
            if !(eps >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "objective epsilon must be >= 0, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    CodeFixedPoint,
    ObjectiveEpsilon,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct UnsupervisedOutcome {
    pub model: TrainedModel,
    /// Codes of the training inputs under the returned `W`.
    pub codes: BinaryCodeMatrix,
    /// Objective after each code update.
    pub trace: Vec<f64>,
    pub stop: StopReason,
}

fn check_codes(x: &DenseMatrix, y: &BinaryCodeMatrix) -> Result<()> {
    if y.axis() != Axis::PerColumn {
        return Err(Error::InvalidArgument("codes must be column-constrained".into()));
    }
    ensure_dim("code count", x.cols(), y.cols())
}

/// Computes every score vector `l_i = sum_m x_m (y_im - k/d')`.
///
/// Uses `l_i = sum_{m : y_im = 1} x_m - (k/d') sum_m x_m`, so the cost is one
/// pass over `X` for the global sum plus `k` column additions per sample.
pub fn score_vectors(
    x: &DenseMatrix,
    y: &BinaryCodeMatrix,
    workers: Option<usize>,
) -> Result<ScoreMatrix> {
    check_codes(x, y)?;
    let (d, d_out, k) = (x.rows(), y.rows(), y.weight());

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); d_out];
    for (m, code) in y.lines().enumerate() {
        for &i in code {
            members[i as usize].push(m as u32);
        }
    }

    let mut total = vec![0f64; d];
    for col in x.columns() {
        for (t, &v) in total.iter_mut().zip(col) {
            *t += v as f64;
        }
    }
    let ratio = k as f64 / d_out as f64;

    let mut values = vec![0f64; d * d_out];
    if d > 0 {
        with_workers(workers, || {
            values
                .par_chunks_mut(d)
                .zip(members.par_iter())
                .for_each(|(score, rows)| {
                    for &m in rows {
                        for (s, &v) in score.iter_mut().zip(x.column(m as usize)) {
                            *s += v as f64;
                        }
                    }
                    for (s, t) in score.iter_mut().zip(&total) {
                        *s -= ratio * t;
                    }
                });
        });
    }
    Ok(ScoreMatrix { d, d_out, values })
}

/// Optimal `W` for the given score vectors: row `i` is `WTA_c(l_i)`.
pub fn rows_from_scores(
    scores: &ScoreMatrix,
    c: usize,
    workers: Option<usize>,
) -> Result<BinaryCodeMatrix> {
    if c == 0 || c > scores.d {
        return Err(Error::InvalidArgument(format!(
            "c must satisfy 1 <= c <= {}, got {c}",
            scores.d
        )));
    }
    let rows: Vec<Vec<u32>> = with_workers(workers, || {
        (0..scores.d_out)
            .into_par_iter()
            .map(|i| top_k_indices(scores.column(i), c))
            .collect()
    });
    BinaryCodeMatrix::from_sorted_indices(
        scores.d_out,
        scores.d,
        c,
        Axis::PerRow,
        rows.into_iter().flatten().collect(),
    )
}

/// Objective of `W` given score vectors: `d' * sum_i w_i . l_i`.
pub fn objective_from_scores(w: &BinaryCodeMatrix, scores: &ScoreMatrix) -> f64 {
    let d_out = scores.d_out as f64;
    w.lines()
        .enumerate()
        .map(|(i, row)| {
            let l = scores.column(i);
            row.iter().map(|&j| l[j as usize]).sum::<f64>()
        })
        .sum::<f64>()
        * d_out
}

/// Supervised objective `sum_m sum_i sum_j y_im (1 - y_jm)(w_i x_m - w_j x_m)`,
/// evaluated as `sum_m [d' sum_i y_im (Wx_m)_i - k sum_j (Wx_m)_j]`.
pub fn objective_supervised(w: &BinaryCodeMatrix, x: &DenseMatrix, y: &BinaryCodeMatrix) -> Result<f64> {
    check_projection(w)?;
    check_codes(x, y)?;
    ensure_dim("input dimension", w.cols(), x.rows())?;
    ensure_dim("output dimension", w.rows(), y.rows())?;
    let (d_out, k) = (w.rows() as f64, y.weight() as f64);
    let terms: Vec<f64> = (0..x.cols())
        .into_par_iter()
        .map(|m| {
            let a = project_unchecked(w, x.column(m));
            let active: f64 = y.line(m).iter().map(|&i| a[i as usize]).sum();
            let all: f64 = a.iter().sum();
            d_out * active - k * all
        })
        .collect();
    Ok(terms.iter().sum())
}

/// Unsupervised objective `L_u(W, Y)`; same form as the supervised one with
/// `Y` treated as a variable.
pub fn objective_unsupervised(w: &BinaryCodeMatrix, y: &BinaryCodeMatrix, x: &DenseMatrix) -> Result<f64> {
    objective_supervised(w, x, y)
}

/// `d_out` independent uniform `c`-subsets of `0..d` as a row-constrained matrix.
pub fn random_rows(d: usize, d_out: usize, c: usize, seed: u64) -> Result<BinaryCodeMatrix> {
    if c == 0 || c > d {
        return Err(Error::InvalidArgument(format!(
            "c must satisfy 1 <= c <= d (c = {c}, d = {d})"
        )));
    }
    let mut rng = seed::rng(seed);
    let rows: Vec<Vec<u32>> = (0..d_out)
        .map(|_| index::sample(&mut rng, d, c).into_iter().map(|j| j as u32).collect())
        .collect();
    BinaryCodeMatrix::from_lines(d_out, d, c, Axis::PerRow, rows)
}

fn check_inputs(x: &DenseMatrix, config: &ModelConfig) -> Result<()> {
    config.validate()?;
    ensure_dim("input dimension", config.d, x.rows())
}

/// Closed-form supervised training.
pub fn train_supervised(
    x: &DenseMatrix,
    y: &BinaryCodeMatrix,
    config: &ModelConfig,
    workers: Option<usize>,
) -> Result<TrainedModel> {
    check_inputs(x, config)?;
    check_codes(x, y)?;
    ensure_dim("output dimension", config.d_out, y.rows())?;
    ensure_dim("code weight", config.k, y.weight())?;
    let scores = score_vectors(x, y, workers)?;
    let w = rows_from_scores(&scores, config.c, workers)?;
    let objective = objective_from_scores(&w, &scores);
    Ok(TrainedModel {
        config: *config,
        w,
        objective,
        iterations: 1,
        zero_columns: x.zero_columns(),
    })
}

/// Alternating unsupervised training from a random `W`.
pub fn train_unsupervised(
    x: &DenseMatrix,
    config: &ModelConfig,
    options: &TrainOptions,
) -> Result<UnsupervisedOutcome> {
    check_inputs(x, config)?;
    options.validate()?;
    if x.cols() == 0 {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let workers = options.workers;
    let mut w = match options.init {
        Init::UniformRandomRows => random_rows(
            config.d,
            config.d_out,
            config.c,
            seed::derive_seed(config.seed, "init", 0),
        )?,
    };
    let mut previous: Option<BinaryCodeMatrix> = None;
    let mut trace = Vec::new();
    let stop = loop {
        let codes = hash_columns(&w, x, config.k, workers)?;
        let scores = score_vectors(x, &codes, workers)?;
        let objective = objective_from_scores(&w, &scores);
        trace.push(objective);
        let t = trace.len();

        let reason = if previous.as_ref() == Some(&codes) {
            Some(StopReason::CodeFixedPoint)
        } else if matches!(options.convergence, Convergence::ObjectiveEpsilon(eps)
            if t > 1 && objective - trace[t - 2] <= eps)
        {
            Some(StopReason::ObjectiveEpsilon)
        } else if t >= options.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = reason {
            previous = Some(codes);
            break reason;
        }
        w = rows_from_scores(&scores, config.c, workers)?;
        previous = Some(codes);
    };
    let codes = previous.expect("loop runs at least once");
    Ok(UnsupervisedOutcome {
        model: TrainedModel {
            config: *config,
            w,
            objective: *trace.last().expect("trace is non-empty"),
            iterations: trace.len(),
            zero_columns: x.zero_columns(),
        },
        codes,
        trace,
        stop,
    })
}
