//! Random-projection baselines: dense Gaussian (LSH), sparse signed (FJL) and
//! random sparse binary expansion followed by WTA (FLY).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{ensure_dim, Error, Result};
use crate::matrix::{BinaryCodeMatrix, DenseMatrix};
use crate::parallel::with_workers;
use crate::seed;
use crate::trainer::random_rows;

/// Nonzero probability of FJL entries, mirroring the `c = d/10` density of `W`.
pub const DEFAULT_FJL_DENSITY: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    Lsh,
    Fjl,
    Fly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    /// Input dimension.
    pub d: usize,
    /// `k` for LSH/FJL, `d'` for FLY.
    pub out_dim: usize,
    /// Hash length, FLY only.
    pub k: Option<usize>,
    /// Ones per row, FLY only.
    pub c: Option<usize>,
    /// Nonzero probability, FJL only.
    pub density: f64,
    pub seed: u64,
}

impl BaselineSpec {
    pub fn lsh(d: usize, k: usize, seed: u64) -> Self {
        Self {
            kind: BaselineKind::Lsh,
            d,
            out_dim: k,
            k: None,
            c: None,
            density: DEFAULT_FJL_DENSITY,
            seed,
        }
    }

    pub fn fjl(d: usize, k: usize, seed: u64) -> Self {
        Self {
            kind: BaselineKind::Fjl,
            ..Self::lsh(d, k, seed)
        }
    }

    pub fn fly(d: usize, d_out: usize, k: usize, c: usize, seed: u64) -> Self {
        Self {
            kind: BaselineKind::Fly,
            d,
            out_dim: d_out,
            k: Some(k),
            c: Some(c),
            density: DEFAULT_FJL_DENSITY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.out_dim == 0 {
            return Err(Error::InvalidArgument(
                "baseline dimensions must be positive".into(),
            ));
        }
        match self.kind {
            BaselineKind::Lsh => Ok(()),
            BaselineKind::Fjl => {
                if self.density > 0.0 && self.density <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "FJL density must lie in (0, 1], got {}",
                        self.density
                    )))
                }
            }
            BaselineKind::Fly => match (self.k, self.c) {
                (Some(k), Some(c)) if k >= 1 && k < self.out_dim && c >= 1 && c <= self.d => Ok(()),
                (k, c) => Err(Error::InvalidArgument(format!(
                    "FLY needs 1 <= k < d' and 1 <= c <= d (k = {k:?}, c = {c:?}, d' = {}, d = {})",
                    self.out_dim, self.d
                ))),
            },
        }
    }

    fn expect(&self, kind: BaselineKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "expected a {kind:?} spec, got {:?}",
                self.kind
            )));
        }
        self.validate()
    }
}

/// Dense `k x d` projection, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseProjection {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl DenseProjection {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[f32]) -> Result<Vec<f32>> {
        ensure_dim("input length", self.cols, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &[f32]) -> Vec<f32> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a as f64 * b as f64)
                    .sum::<f64>() as f32
            })
            .collect()
    }

    pub fn transform(&self, x: &DenseMatrix, workers: Option<usize>) -> Result<DenseMatrix> {
        ensure_dim("input dimension", self.cols, x.rows())?;
        let cols: Vec<Vec<f32>> = with_workers(workers, || {
            (0..x.cols())
                .into_par_iter()
                .map(|m| self.apply_unchecked(x.column(m)))
                .collect()
        });
        DenseMatrix::from_columns(self.rows, &cols)
    }
}

/// Sparse `k x d` projection with entries in `{0, +s, -s}`, stored by row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignedProjection {
    rows: usize,
    cols: usize,
    magnitude: f32,
    row_start: Vec<usize>,
    entries: Vec<(u32, bool)>,
}

impl SparseSignedProjection {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    /// Entry `(i, j)` as a dense value.
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.entries[self.row_start[i]..self.row_start[i + 1]]
            .iter()
            .find(|(col, _)| *col as usize == j)
            .map_or(0.0, |&(_, neg)| if neg { -self.magnitude } else { self.magnitude })
    }

    pub fn apply(&self, x: &[f32]) -> Result<Vec<f32>> {
        ensure_dim("input length", self.cols, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &[f32]) -> Vec<f32> {
        let s = self.magnitude as f64;
        (0..self.rows)
            .map(|i| {
                let acc: f64 = self.entries[self.row_start[i]..self.row_start[i + 1]]
                    .iter()
                    .map(|&(j, neg)| {
                        let v = x[j as usize] as f64;
                        if neg {
                            -v
                        } else {
                            v
                        }
                    })
                    .sum();
                (acc * s) as f32
            })
            .collect()
    }

    pub fn transform(&self, x: &DenseMatrix, workers: Option<usize>) -> Result<DenseMatrix> {
        ensure_dim("input dimension", self.cols, x.rows())?;
        let cols: Vec<Vec<f32>> = with_workers(workers, || {
            (0..x.cols())
                .into_par_iter()
                .map(|m| self.apply_unchecked(x.column(m)))
                .collect()
        });
        DenseMatrix::from_columns(self.rows, &cols)
    }
}

/// `k x d` matrix of independent standard Gaussians.
pub fn make_lsh(spec: &BaselineSpec) -> Result<DenseProjection> {
    spec.expect(BaselineKind::Lsh)?;
    let mut rng = seed::rng(spec.seed);
    let values = (0..spec.out_dim * spec.d)
        .map(|_| rng.sample::<f32, _>(StandardNormal))
        .collect();
    Ok(DenseProjection {
        rows: spec.out_dim,
        cols: spec.d,
        values,
    })
}

/// `k x d` matrix whose entries are 0 with probability `1 - q` and
/// `+-sqrt(1/q)` with probability `q/2` each, giving unit entry variance.
pub fn make_fjl(spec: &BaselineSpec) -> Result<SparseSignedProjection> {
    spec.expect(BaselineKind::Fjl)?;
    let q = spec.density;
    let mut rng = seed::rng(spec.seed);
    let mut row_start = Vec::with_capacity(spec.out_dim + 1);
    let mut entries = Vec::new();
    row_start.push(0);
    for _ in 0..spec.out_dim {
        for j in 0..spec.d {
            let u: f64 = rng.random();
            if u < q {
                entries.push((j as u32, u < q / 2.0));
            }
        }
        row_start.push(entries.len());
    }
    Ok(SparseSignedProjection {
        rows: spec.out_dim,
        cols: spec.d,
        magnitude: (1.0 / q).sqrt() as f32,
        row_start,
        entries,
    })
}

/// Random `d' x d` binary matrix with `c` ones per row, each row a uniform
/// `c`-subset. Hash with [`crate::wta::hash`].
pub fn make_fly(spec: &BaselineSpec) -> Result<BinaryCodeMatrix> {
    spec.expect(BaselineKind::Fly)?;
    random_rows(spec.d, spec.out_dim, spec.c.unwrap_or_default(), spec.seed)
}
