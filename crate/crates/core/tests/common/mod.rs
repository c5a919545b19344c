//! Brute-force reference implementations, kept independent of the library's
//! fast paths.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use wtahash::seed::{self, Rng as SeededRng};
use wtahash::{Axis, BinaryCodeMatrix, DenseMatrix};

pub fn rng(seed: u64) -> SeededRng {
    seed::rng(seed)
}

pub fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
}

/// Uniform random `weight`-subset per line, drawn by shuffling.
pub fn random_binary(rng: &mut SeededRng, rows: usize, cols: usize, weight: usize, axis: Axis) -> BinaryCodeMatrix {
    let (lines, len) = match axis {
        Axis::PerColumn => (cols, rows),
        Axis::PerRow => (rows, cols),
    };
    let picked: Vec<Vec<u32>> = (0..lines)
        .map(|_| {
            let mut all: Vec<u32> = (0..len as u32).collect();
            for i in 0..weight {
                let j = rng.random_range(i..len);
                all.swap(i, j);
            }
            all.truncate(weight);
            all
        })
        .collect();
    BinaryCodeMatrix::from_lines(rows, cols, weight, axis, picked).unwrap()
}

pub fn dense(b: &BinaryCodeMatrix) -> Vec<Vec<f64>> {
    b.to_dense_rows()
        .into_iter()
        .map(|r| r.into_iter().map(f64::from).collect())
        .collect()
}

/// `W X` by naive dense multiplication, `d' x n` indexed `[i][m]`.
pub fn dense_product(w: &BinaryCodeMatrix, x: &DenseMatrix) -> Vec<Vec<f64>> {
    let wd = dense(w);
    (0..w.rows())
        .map(|i| {
            (0..x.cols())
                .map(|m| (0..x.rows()).map(|j| wd[i][j] * x.get(j, m) as f64).sum())
                .collect()
        })
        .collect()
}

/// The objective as the literal triple sum over samples and output pairs.
pub fn triple_loop_objective(w: &BinaryCodeMatrix, x: &DenseMatrix, y: &BinaryCodeMatrix) -> f64 {
    let wx = dense_product(w, x);
    let yd = dense(y);
    let mut total = 0.0;
    for m in 0..x.cols() {
        for i in 0..w.rows() {
            for j in 0..w.rows() {
                total += yd[i][m] * (1.0 - yd[j][m]) * (wx[i][m] - wx[j][m]);
            }
        }
    }
    total
}

/// `l_{j,i} = sum_m x_{j,m} (y_{i,m} - k/d')`, indexed `[i][j]`.
pub fn naive_scores(x: &DenseMatrix, y: &BinaryCodeMatrix) -> Vec<Vec<f64>> {
    let yd = dense(y);
    let ratio = y.weight() as f64 / y.rows() as f64;
    (0..y.rows())
        .map(|i| {
            (0..x.rows())
                .map(|j| (0..x.cols()).map(|m| x.get(j, m) as f64 * (yd[i][m] - ratio)).sum())
                .collect()
        })
        .collect()
}

/// All `c`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, c: usize) -> Vec<Vec<u32>> {
    fn rec(start: usize, n: usize, c: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == c {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as u32);
            rec(i + 1, n, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, c, &mut Vec::new(), &mut out);
    out
}

/// Best objective over every feasible `W`, found row by row: the objective
/// is a sum of independent per-row terms, so enumerating each row's subsets
/// separately reaches the global maximum.
pub fn brute_force_best_objective(x: &DenseMatrix, y: &BinaryCodeMatrix, c: usize) -> f64 {
    let scores = naive_scores(x, y);
    let subsets = combinations(x.rows(), c);
    let d_out = y.rows() as f64;
    scores
        .iter()
        .map(|l| {
            subsets
                .iter()
                .map(|s| s.iter().map(|&j| l[j as usize]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        * d_out
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Exact neighbors by sorting a full distance row.
pub fn sorted_neighbors(dist: &[f64], query: usize, r: usize) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..dist.len()).filter(|&i| i != query).collect();
    idx.sort_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b)));
    idx.truncate(r);
    idx.into_iter().map(|i| i as u32).collect()
}
