//! Dense real matrices and fixed-weight binary matrices.
//!
//! Both types are column-major in the sense that matters for this crate: a
//! [`DenseMatrix`] stores one sample per column, and a [`BinaryCodeMatrix`]
//! stores one constrained "line" (a column of `Y` or a row of `W`) contiguously.

use crate::error::{ensure_dim, Error, Result};

/// Column-major `f32` matrix with finite entries, one sample per column.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f32>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self> {
        ensure_dim("dense matrix value count", rows * cols, values.len())?;
        if rows == 0 && cols > 0 {
            return Err(Error::InvalidArgument(
                "matrix with columns must have at least one row".into(),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value {} at row {}, column {}",
                values[pos],
                pos % rows,
                pos / rows
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// Builds a `rows x n` matrix from `n` columns of length `rows`.
    pub fn from_columns<C: AsRef<[f32]>>(rows: usize, columns: &[C]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * columns.len());
        for col in columns {
            let col = col.as_ref();
            ensure_dim("column length", rows, col.len())?;
            values.extend_from_slice(col);
        }
        Self::new(rows, columns.len(), values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn column(&self, m: usize) -> &[f32] {
        &self.values[m * self.rows..(m + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[col * self.rows + row]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        (0..self.cols).map(move |m| self.column(m))
    }

    /// New matrix holding the given columns, in the given order.
    pub fn select_columns(&self, which: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.rows * which.len());
        for &m in which {
            values.extend_from_slice(self.column(m));
        }
        Self {
            rows: self.rows,
            cols: which.len(),
            values,
        }
    }

    /// Multiplies every entry by `alpha`.
    pub fn scaled(&self, alpha: f32) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.values.iter().map(|v| v * alpha).collect(),
        )
    }

    /// Subtracts from each column the mean of its own entries.
    pub fn center_columns(&self) -> Self {
        let mut values = self.values.clone();
        if self.rows > 0 {
            for col in values.chunks_mut(self.rows) {
                let mean = col.iter().map(|&v| v as f64).sum::<f64>() / self.rows as f64;
                for v in col.iter_mut() {
                    *v = (*v as f64 - mean) as f32;
                }
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }

    /// Number of columns whose entries are all zero.
    pub fn zero_columns(&self) -> usize {
        self.columns()
            .filter(|c| c.iter().all(|&v| v == 0.0))
            .count()
    }
}

/// Which axis of a [`BinaryCodeMatrix`] carries the fixed-weight constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Every column has exactly `weight` ones (output codes `Y`).
    PerColumn,
    /// Every row has exactly `weight` ones (projection matrices `W`).
    PerRow,
}

/// Binary matrix with an exact ones-count along one axis.
///
/// Each constrained line is kept twice: as an ascending index list (the fast
/// path for sparse projection) and packed into 64-bit words (the fast path for
/// popcount Hamming distance).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCodeMatrix {
    rows: usize,
    cols: usize,
    weight: usize,
    axis: Axis,
    words_per_line: usize,
    bits: Vec<u64>,
    indices: Vec<u32>,
}

impl BinaryCodeMatrix {
    /// Builds a matrix from one index set per constrained line. Indices within a
    /// line may come in any order but must be distinct and in range.
    pub fn from_lines<L>(rows: usize, cols: usize, weight: usize, axis: Axis, lines: L) -> Result<Self>
    where
        L: IntoIterator,
        L::Item: AsRef<[u32]>,
    {
        let mut flat = Vec::new();
        let mut scratch = Vec::with_capacity(weight);
        for line in lines {
            scratch.clear();
            scratch.extend_from_slice(line.as_ref());
            scratch.sort_unstable();
            flat.extend_from_slice(&scratch);
        }
        Self::from_sorted_indices(rows, cols, weight, axis, flat)
    }

    /// Builds a matrix from a flat buffer of `weight` strictly ascending indices
    /// per constrained line.
    pub fn from_sorted_indices(
        rows: usize,
        cols: usize,
        weight: usize,
        axis: Axis,
        indices: Vec<u32>,
    ) -> Result<Self> {
        let (lines, line_len) = match axis {
            Axis::PerColumn => (cols, rows),
            Axis::PerRow => (rows, cols),
        };
        if weight == 0 {
            return Err(Error::InvalidArgument("weight must be positive".into()));
        }
        if weight > line_len {
            return Err(Error::InvalidArgument(format!(
                "weight {weight} exceeds constrained line length {line_len}"
            )));
        }
        ensure_dim("binary matrix index count", lines * weight, indices.len())?;
        let words_per_line = line_len.div_ceil(64);
        let mut bits = vec![0u64; lines * words_per_line];
        for (line, idx) in indices.chunks(weight).enumerate() {
            for (pos, &i) in idx.iter().enumerate() {
                if i as usize >= line_len {
                    return Err(Error::InvalidInput(format!(
                        "line {line}: index {i} out of range 0..{line_len}"
                    )));
                }
                if pos > 0 && idx[pos - 1] >= i {
                    return Err(Error::InvalidInput(format!(
                        "line {line}: indices not strictly ascending ({} then {i})",
                        idx[pos - 1]
                    )));
                }
                bits[line * words_per_line + i as usize / 64] |= 1u64 << (i % 64);
            }
        }
        Ok(Self {
            rows,
            cols,
            weight,
            axis,
            words_per_line,
            bits,
            indices,
        })
    }

    /// Builds a matrix from explicit 0/1 rows, inferring the weight.
    pub fn from_dense_rows(rows: &[Vec<u8>], axis: Axis) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        for r in rows {
            ensure_dim("row length", n_cols, r.len())?;
            if r.iter().any(|&b| b > 1) {
                return Err(Error::InvalidInput("entries must be 0 or 1".into()));
            }
        }
        let lines: Vec<Vec<u32>> = match axis {
            Axis::PerRow => rows
                .iter()
                .map(|r| (0..n_cols as u32).filter(|&j| r[j as usize] == 1).collect())
                .collect(),
            Axis::PerColumn => (0..n_cols)
                .map(|j| (0..n_rows as u32).filter(|&i| rows[i as usize][j] == 1).collect())
                .collect(),
        };
        let weight = lines.first().map_or(0, Vec::len);
        if let Some((line, l)) = lines.iter().enumerate().find(|(_, l)| l.len() != weight) {
            return Err(Error::InvalidInput(format!(
                "line {line} has {} ones, expected {weight}",
                l.len()
            )));
        }
        Self::from_lines(n_rows, n_cols, weight, axis, lines)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.weight
    }

    #[inline]
    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Number of constrained lines (columns for `PerColumn`, rows for `PerRow`).
    #[inline]
    pub fn line_count(&self) -> usize {
        match self.axis {
            Axis::PerColumn => self.cols,
            Axis::PerRow => self.rows,
        }
    }

    /// Length of each constrained line.
    #[inline]
    pub fn line_len(&self) -> usize {
        match self.axis {
            Axis::PerColumn => self.rows,
            Axis::PerRow => self.cols,
        }
    }

    /// Ascending positions of the ones in line `i`.
    #[inline]
    pub fn line(&self, i: usize) -> &[u32] {
        &self.indices[i * self.weight..(i + 1) * self.weight]
    }

    pub fn lines(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.indices.chunks(self.weight)
    }

    /// Packed bits of line `i`.
    #[inline]
    pub fn line_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_line..(i + 1) * self.words_per_line]
    }

    /// The flat index buffer, `weight` entries per line.
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        let (line, pos) = match self.axis {
            Axis::PerColumn => (col, row),
            Axis::PerRow => (row, col),
        };
        self.line_words(line)[pos / 64] >> (pos % 64) & 1 == 1
    }

    /// Hamming distance between lines `a` and `b`.
    #[inline]
    pub fn hamming(&self, a: usize, b: usize) -> u32 {
        hamming_words(self.line_words(a), self.line_words(b))
    }

    /// Number of shared ones between lines `a` and `b`.
    pub fn overlap(&self, a: usize, b: usize) -> u32 {
        self.line_words(a)
            .iter()
            .zip(self.line_words(b))
            .map(|(x, y)| (x & y).count_ones())
            .sum()
    }

    /// Expands into explicit 0/1 rows.
    pub fn to_dense_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }
}

#[inline]
pub fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}
