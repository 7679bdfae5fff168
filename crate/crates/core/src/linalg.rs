//! Compressed sparse rows and truncated SVD.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self {
            rows,
            cols,
            indptr,
            indices,
            data,
        };
        m.prune_zeros();
        m
    }

    /// Builds from rows that are already sorted by column and free of duplicates.
    pub fn from_sorted_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        for row in &rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for &(c, v) in row {
                debug_assert!(c < cols);
                indices.push(c);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        let mut m = Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            data,
        };
        m.prune_zeros();
        m
    }

    fn prune_zeros(&mut self) {
        if self.data.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] != 0.0 {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.data[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.data[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates every stored entry as (row, col, value) in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0f64; self.nnz()];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                let k = next[c];
                indices[k] = r;
                data[k] = v;
                next[c] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            data,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            d[(r, c)] = v;
        }
        d
    }

    /// `self * rhs` for a dense right-hand side.
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.cols, rhs.nrows());
        let width = rhs.ncols();
        // row-major copy of rhs for contiguous access
        let rhs_rows: Vec<f64> = rhs.transpose().as_slice().to_vec();
        let out_rows: Vec<Vec<f64>> = (0..self.rows)
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![0f64; width];
                for (c, v) in self.row(r) {
                    let src = &rhs_rows[c * width..(c + 1) * width];
                    for (a, b) in acc.iter_mut().zip(src) {
                        *a += v * b;
                    }
                }
                acc
            })
            .collect();
        DMatrix::from_fn(self.rows, width, |r, c| out_rows[r][c])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    pub seed: u64,
    pub oversample: usize,
    pub power_iters: usize,
    /// Inputs with at most this many dense cells are decomposed exactly.
    pub exact_max_cells: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            oversample: 20,
            power_iters: 6,
            exact_max_cells: 250_000,
        }
    }
}

/// Rank-k factorization `A ≈ U · diag(s) · Vt`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U · diag(s)^exponent`, one row per input row.
    pub fn scaled_left(&self, exponent: f64) -> DMatrix<f64> {
        let mut out = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            let w = if exponent == 0.0 { 1.0 } else { s.powf(exponent) };
            out.column_mut(j).scale_mut(w);
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.scaled_left(1.0) * &self.vt
    }
}

/// Truncated SVD keeping the `k` largest singular triplets. Small inputs use
/// a dense decomposition; larger ones a seeded randomized range finder with
/// power iterations, so results are deterministic for a fixed seed. Each
/// left singular vector is signed so its largest-magnitude entry is positive.
pub fn truncated_svd(a: &CsrMatrix, k: usize, opts: &SvdOptions) -> Result<Svd> {
    let min_dim = a.rows().min(a.cols());
    if k == 0 || k > min_dim {
        return Err(Error::InvalidArgument(format!(
            "rank {k} must be in 1..={min_dim} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let cells = a.rows().saturating_mul(a.cols());
    let mut svd = if cells <= opts.exact_max_cells || k + opts.oversample >= min_dim {
        dense_svd(&a.to_dense(), k)
    } else {
        randomized_svd(a, k, opts)
    };
    fix_signs(&mut svd);
    Ok(svd)
}

fn dense_svd(a: &DMatrix<f64>, k: usize) -> Svd {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    order.truncate(k);
    Svd {
        u: u.select_columns(&order),
        s: order.iter().map(|&i| svd.singular_values[i]).collect(),
        vt: vt.select_rows(&order),
    }
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

fn randomized_svd(a: &CsrMatrix, k: usize, opts: &SvdOptions) -> Svd {
    let l = (k + opts.oversample).min(a.rows().min(a.cols()));
    let at = a.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega = DMatrix::from_fn(a.cols(), l, |_, _| rng.random_range(-1.0..1.0));
    let mut q = orthonormal_basis(a.mul_dense(&omega));
    for _ in 0..opts.power_iters {
        let z = orthonormal_basis(at.mul_dense(&q));
        q = orthonormal_basis(a.mul_dense(&z));
    }
    // B = Q^T A, computed as (A^T Q)^T
    let b = at.mul_dense(&q).transpose();
    let small = dense_svd(&b, k);
    Svd {
        u: q * small.u,
        s: small.s,
        vt: small.vt,
    }
}

fn fix_signs(svd: &mut Svd) {
    for j in 0..svd.s.len() {
        let col = svd.u.column(j);
        let mut best = 0usize;
        for i in 0..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            svd.u.column_mut(j).neg_mut();
            svd.vt.row_mut(j).neg_mut();
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}
