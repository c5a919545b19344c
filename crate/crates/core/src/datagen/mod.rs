//! Synthetic ARTFC datasets and loaders for external dense vectors.
//!
//! An ARTFC dataset starts from random fixed-weight binary codes `Y`. The
//! codes are projected onto their own top-`d` principal subspace to obtain the
//! dense inputs `X`, then rescaled so that the mean pairwise squared distance
//! in `X` equals the one in `Y`.

pub mod io;
pub mod pca;

use nalgebra::DMatrix;
use rand::seq::index;

use crate::error::{ensure_dim, Error, Result};
use crate::matrix::{Axis, BinaryCodeMatrix, DenseMatrix};
use crate::seed::{self, derive_seed};

pub use io::{load_csv, load_fvecs, read_fvecs, save_csv, save_fvecs, FvecsReader};
pub use pca::{fit_pca, pca_project, Pca};

/// Inputs, optional output codes, and a description of where they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub y: Option<BinaryCodeMatrix>,
    pub name: String,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        x: DenseMatrix,
        y: Option<BinaryCodeMatrix>,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if let Some(y) = &y {
            if y.axis() != Axis::PerColumn {
                return Err(Error::InvalidArgument("dataset codes must be column-constrained".into()));
            }
            ensure_dim("code count", x.cols(), y.cols())?;
        }
        Ok(Self {
            x,
            y,
            name: name.into(),
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArtfcSpec {
    pub n_train: usize,
    pub n_test: usize,
    /// Dense input dimension.
    pub d: usize,
    /// Code dimension.
    pub d_out: usize,
    /// Ones per code.
    pub k: usize,
    pub seed: u64,
}

impl ArtfcSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.d_out {
            return Err(Error::InvalidArgument(format!(
                "k must satisfy 1 <= k < d_out (k = {}, d_out = {})",
                self.k, self.d_out
            )));
        }
        if self.d == 0 || self.d >= self.d_out {
            return Err(Error::InvalidArgument(format!(
                "d must satisfy 1 <= d < d_out (d = {}, d_out = {})",
                self.d, self.d_out
            )));
        }
        let n = self.n_train + self.n_test;
        if self.d > n {
            return Err(Error::InvalidArgument(format!(
                "need at least d = {} samples for the principal subspace, got {n}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        format!("artfc-d{}-dout{}-k{}", self.d, self.d_out, self.k)
    }
}

/// `n` uniform random `k`-subsets of `0..d_out` as a column-constrained matrix.
pub fn random_codes(d_out: usize, n: usize, k: usize, seed: u64) -> Result<BinaryCodeMatrix> {
    if k == 0 || k > d_out {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k <= d_out (k = {k}, d_out = {d_out})"
        )));
    }
    let mut rng = seed::rng(seed);
    let lines: Vec<Vec<u32>> = (0..n)
        .map(|_| index::sample(&mut rng, d_out, k).into_iter().map(|i| i as u32).collect())
        .collect();
    BinaryCodeMatrix::from_lines(d_out, n, k, Axis::PerColumn, lines)
}

/// Generates an ARTFC train/test pair. The first `n_train` generated samples
/// form the training split.
pub fn generate_artfc(spec: &ArtfcSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let n = spec.n_train + spec.n_test;
    let codes = random_codes(spec.d_out, n, spec.k, derive_seed(spec.seed, "artfc-codes", 0))?;

    let fill = spec.k as f64 / spec.d_out as f64;
    let mut centered = DMatrix::<f64>::from_element(spec.d_out, n, -fill);
    let mut mean = vec![0f64; spec.d_out];
    for (m, code) in codes.lines().enumerate() {
        for &i in code {
            centered[(i as usize, m)] += 1.0;
            mean[i as usize] += 1.0;
        }
    }
    // Center by the empirical row means rather than the expected fill.
    for (i, mu) in mean.iter_mut().enumerate() {
        *mu /= n as f64;
        centered.row_mut(i).add_scalar_mut(fill - *mu);
    }
    let code_energy = centered.norm_squared();

    let fit = pca::fit_centered(centered, mean, spec.d, derive_seed(spec.seed, "artfc-pca", 0))?;
    let dense = fit.coefficients()?;
    let dense_energy: f64 = dense.values().iter().map(|&v| (v as f64).powi(2)).sum();
    if !(dense_energy > 0.0) {
        return Err(Error::Degenerate("projected codes have zero variance".into()));
    }
    let x = dense.scaled((code_energy / dense_energy).sqrt() as f32)?;

    let train_idx: Vec<usize> = (0..spec.n_train).collect();
    let test_idx: Vec<usize> = (spec.n_train..n).collect();
    let split_codes = |idx: &[usize]| {
        BinaryCodeMatrix::from_sorted_indices(
            spec.d_out,
            idx.len(),
            spec.k,
            Axis::PerColumn,
            idx.iter().flat_map(|&m| codes.line(m).iter().copied()).collect(),
        )
    };
    let provenance = format!(
        "artfc n_train={} n_test={} d={} d_out={} k={} seed={}",
        spec.n_train, spec.n_test, spec.d, spec.d_out, spec.k, spec.seed
    );
    let train = Dataset::new(
        x.select_columns(&train_idx),
        Some(split_codes(&train_idx)?),
        format!("{}-train", spec.name()),
        provenance.clone(),
    )?;
    let test = Dataset::new(
        x.select_columns(&test_idx),
        Some(split_codes(&test_idx)?),
        format!("{}-test", spec.name()),
        provenance,
    )?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ArtfcSpec {
        ArtfcSpec {
            n_train: 150,
            n_test: 100,
            d: 30,
            d_out: 60,
            k: 3,
            seed: 17,
        }
    }

    #[test]
    fn shapes_and_weights() {
        let (train, test) = generate_artfc(&small()).unwrap();
        assert_eq!((train.x.rows(), train.x.cols()), (30, 150));
        assert_eq!((test.x.rows(), test.x.cols()), (30, 100));
        let y = train.y.as_ref().unwrap();
        assert_eq!((y.rows(), y.cols(), y.weight()), (60, 150, 3));
        assert!(y.lines().all(|l| l.len() == 3));
    }

    #[test]
    fn seeded() {
        let a = generate_artfc(&small()).unwrap();
        let b = generate_artfc(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate_artfc(&ArtfcSpec { seed: 18, ..small() }).unwrap();
        assert_ne!(a.0.x, c.0.x);
        assert_ne!(a.1.x, c.1.x);
    }

    #[test]
    fn mean_pairwise_distance_matches() {
        let (train, _) = generate_artfc(&ArtfcSpec { n_test: 0, n_train: 250, ..small() }).unwrap();
        let y = train.y.unwrap();
        let (mut dx, mut dy) = (0.0, 0.0);
        for a in 0..250 {
            for b in 0..a {
                dx += train
                    .x
                    .column(a)
                    .iter()
                    .zip(train.x.column(b))
                    .map(|(p, q)| (*p as f64 - *q as f64).powi(2))
                    .sum::<f64>();
                dy += y.hamming(a, b) as f64;
            }
        }
        assert!((dx / dy - 1.0).abs() < 1e-4, "{}", dx / dy);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_artfc(&ArtfcSpec { k: 60, ..small() }).is_err());
        assert!(generate_artfc(&ArtfcSpec { d: 60, ..small() }).is_err());
        assert!(generate_artfc(&ArtfcSpec { n_train: 10, n_test: 10, ..small() }).is_err());
    }
}
