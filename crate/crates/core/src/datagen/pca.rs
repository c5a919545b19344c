//! Principal component projection via randomized range finding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::seed;

/// Extra sketch columns beyond the target dimension.
pub const OVERSAMPLING: usize = 10;
/// Subspace (power) iterations applied to the sketch.
pub const POWER_ITERATIONS: usize = 2;

/// A fitted principal subspace.
#[derive(Clone, Debug)]
pub struct Pca {
    /// Per-feature mean that was removed before fitting.
    pub mean: Vec<f64>,
    /// `D x target_dim` orthonormal basis, leading direction first.
    pub basis: DMatrix<f64>,
    /// Variance captured by each basis direction (population normalization).
    pub component_variances: Vec<f64>,
    /// Total variance of the centered data.
    pub total_variance: f64,
    /// `N x target_dim` coefficients of the fitted samples.
    coefficients: DMatrix<f64>,
}

impl Pca {
    pub fn captured_variance(&self) -> f64 {
        self.component_variances.iter().sum()
    }

    /// Coefficients of the fitted samples as a `target_dim x N` matrix.
    pub fn coefficients(&self) -> Result<DenseMatrix> {
        let t = self.basis.ncols();
        let n = self.coefficients.nrows();
        let mut values = Vec::with_capacity(t * n);
        for m in 0..n {
            values.extend(self.coefficients.row(m).iter().map(|&v| v as f32));
        }
        DenseMatrix::new(t, n, values)
    }

    /// Projects arbitrary columns onto the fitted basis.
    pub fn transform(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        crate::error::ensure_dim("feature count", self.mean.len(), m.rows())?;
        let t = self.basis.ncols();
        let mut values = Vec::with_capacity(t * m.cols());
        for col in m.columns() {
            for k in 0..t {
                let b = self.basis.column(k);
                let v: f64 = col
                    .iter()
                    .zip(&self.mean)
                    .zip(b.iter())
                    .map(|((&x, mu), bk)| (x as f64 - mu) * bk)
                    .sum();
                values.push(v as f32);
            }
        }
        DenseMatrix::new(t, m.cols(), values)
    }
}

/// Copies `m` into an `f64` matrix with each row (feature) centered.
fn centered(m: &DenseMatrix) -> (DMatrix<f64>, Vec<f64>) {
    let (d, n) = (m.rows(), m.cols());
    let mut a = DMatrix::<f64>::from_column_slice(
        d,
        n,
        &m.values().iter().map(|&v| v as f64).collect::<Vec<_>>(),
    );
    let mean: Vec<f64> = (0..d).map(|i| a.row(i).sum() / n.max(1) as f64).collect();
    for (i, mu) in mean.iter().enumerate() {
        a.row_mut(i).add_scalar_mut(-mu);
    }
    (a, mean)
}

/// Fits the top-`target_dim` principal subspace of the columns of `m`.
pub fn fit_pca(m: &DenseMatrix, target_dim: usize, seed: u64) -> Result<Pca> {
    let (a, mean) = centered(m);
    fit_centered(a, mean, target_dim, seed)
}

/// Fits a principal subspace of already-centered `D x N` data.
pub(crate) fn fit_centered(a: DMatrix<f64>, mean: Vec<f64>, target_dim: usize, seed: u64) -> Result<Pca> {
    let (d, n) = a.shape();
    let rank_cap = d.min(n);
    if target_dim == 0 || target_dim > rank_cap {
        return Err(Error::InvalidArgument(format!(
            "target_dim must satisfy 1 <= target_dim <= min(D, N) = {rank_cap}, got {target_dim}"
        )));
    }
    let total = a.norm_squared();
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!(
            "zero variance: all {n} columns are identical after centering"
        )));
    }
    let width = (target_dim + OVERSAMPLING).min(rank_cap);

    // Column-by-column generation keeps the sketch of a smaller width a prefix
    // of a larger one, so captured variance is monotone in target_dim.
    let mut rng = seed::rng(seed);
    let mut omega = DMatrix::<f64>::zeros(n, width);
    for j in 0..width {
        for i in 0..n {
            omega[(i, j)] = rng.sample(StandardNormal);
        }
    }

    let mut q = (&a * omega).qr().q();
    for _ in 0..POWER_ITERATIONS {
        let z = (a.transpose() * &q).qr().q();
        q = (&a * z).qr().q();
    }
    let z = a.transpose() * &q;
    let gram = z.transpose() * &z;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    order.truncate(target_dim);

    let v = DMatrix::from_fn(width, target_dim, |r, c| eig.eigenvectors[(r, order[c])]);
    let basis = &q * &v;
    let coefficients = z * v;
    let component_variances = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0) / n as f64)
        .collect();
    Ok(Pca {
        mean,
        basis,
        component_variances,
        total_variance: total / n as f64,
        coefficients,
    })
}

/// Centers the columns of `m` and returns their coefficients on the top
/// `target_dim` principal directions.
pub fn pca_project(m: &DenseMatrix, target_dim: usize, seed: u64) -> Result<DenseMatrix> {
    fit_pca(m, target_dim, seed)?.coefficients()
}
