//! The winner-take-all primitive and the sparse projection it is applied to.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{ensure_dim, Error, Result};
use crate::matrix::{Axis, BinaryCodeMatrix, DenseMatrix};
use crate::parallel::with_workers;

/// Positions of the `k` largest entries of `x`, ascending.
///
/// Equal values at the selection boundary go to the lowest index. Callers must
/// guarantee `1 <= k <= x.len()` and that no entry is NaN.
pub(crate) fn top_k_indices<T: Copy + PartialOrd>(x: &[T], k: usize) -> Vec<u32> {
    debug_assert!(k >= 1 && k <= x.len());
    let rank = |a: &u32, b: &u32| -> Ordering {
        let (va, vb) = (x[*a as usize], x[*b as usize]);
        vb.partial_cmp(&va)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.cmp(b))
    };
    let mut idx: Vec<u32> = (0..x.len() as u32).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, rank);
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

fn check_k(k: usize, len: usize) -> Result<()> {
    if k == 0 || k > len {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k <= {len}, got {k}"
        )));
    }
    Ok(())
}

/// Ascending positions of the top-`k` entries of `x`.
pub fn wta_indices(x: &[f32], k: usize) -> Result<Vec<u32>> {
    check_k(k, x.len())?;
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry at {i}")));
    }
    Ok(top_k_indices(x, k))
}

/// Winner-take-all: a 0/1 vector marking the top-`k` entries of `x`.
pub fn wta(x: &[f32], k: usize) -> Result<Vec<u8>> {
    let mut out = vec![0u8; x.len()];
    for i in wta_indices(x, k)? {
        out[i as usize] = 1;
    }
    Ok(out)
}

/// `W x` for a row-constrained binary `W`: each output is the sum of the `c`
/// selected inputs, accumulated in `f64`.
pub fn project(w: &BinaryCodeMatrix, x: &[f32]) -> Result<Vec<f64>> {
    check_projection(w)?;
    ensure_dim("input length", w.cols(), x.len())?;
    Ok(project_unchecked(w, x))
}

pub(crate) fn project_unchecked(w: &BinaryCodeMatrix, x: &[f32]) -> Vec<f64> {
    w.lines()
        .map(|row| row.iter().map(|&j| x[j as usize] as f64).sum())
        .collect()
}

pub(crate) fn check_projection(w: &BinaryCodeMatrix) -> Result<()> {
    if w.axis() != Axis::PerRow {
        return Err(Error::InvalidArgument(
            "projection matrix must be row-constrained".into(),
        ));
    }
    Ok(())
}

/// `WTA_k(W x)` as ascending output positions.
pub fn hash(w: &BinaryCodeMatrix, x: &[f32], k: usize) -> Result<Vec<u32>> {
    check_k(k, w.rows())?;
    let y = project(w, x)?;
    Ok(top_k_indices(&y, k))
}

/// Hashes every column of `x`, producing a `d' x n` code matrix with `k` ones
/// per column.
pub fn hash_columns(
    w: &BinaryCodeMatrix,
    x: &DenseMatrix,
    k: usize,
    workers: Option<usize>,
) -> Result<BinaryCodeMatrix> {
    check_projection(w)?;
    check_k(k, w.rows())?;
    ensure_dim("input dimension", w.cols(), x.rows())?;
    let codes: Vec<Vec<u32>> = with_workers(workers, || {
        (0..x.cols())
            .into_par_iter()
            .map(|m| top_k_indices(&project_unchecked(w, x.column(m)), k))
            .collect()
    });
    let flat = codes.into_iter().flatten().collect();
    BinaryCodeMatrix::from_sorted_indices(w.rows(), x.cols(), k, Axis::PerColumn, flat)
}
