//! Square transition matrices, dense or compressed sparse row.
//!
//! Entry `(i, j)` is the one-step probability of moving from state `i` to
//! state `j`. Row vectors act from the left (`m P`, pushing measures
//! forward) and column vectors from the right (`P f`, pulling functions
//! back). Products follow the same convention: `A.matmul(B)` is "first A,
//! then B".
//!
//! Matrices with more than [`DENSE_LIMIT`] states are stored as CSR; both
//! layouts expose identical semantics, and every reduction runs in a fixed
//! column order so results do not depend on the layout.

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Largest dimension stored densely by default.
pub const DENSE_LIMIT: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Square nonnegative matrix in either layout.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel<T> {
    Dense(DenseMatrix<T>),
    Sparse(CsrMatrix<T>),
}

impl<T: Scalar> CsrMatrix<T> {
    fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }
}

impl<T: Scalar> Kernel<T> {
    /// Dense matrix from a row-major buffer, re-laid out as CSR past [`DENSE_LIMIT`].
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let dense = Kernel::Dense(DenseMatrix { n, data });
        Ok(if n > DENSE_LIMIT {
            dense.to_sparse()
        } else {
            dense
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Builds from per-row `(column, value)` lists. Entries within a row may
    /// come in any order; duplicates are summed.
    pub fn from_sparse_rows(n: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if j >= n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: j + 1,
                    });
                }
                if last == Some(j) {
                    *vals.last_mut().expect("pushed above") += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(cols.len());
        }
        let sparse = Kernel::Sparse(CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        });
        Ok(if n > DENSE_LIMIT {
            sparse
        } else {
            sparse.to_dense()
        })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| vec![(i, T::one())]).collect();
        Self::from_sparse_rows(n, rows).expect("identity is well formed")
    }

    pub fn n(&self) -> usize {
        match self {
            Kernel::Dense(d) => d.n,
            Kernel::Sparse(s) => s.n,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Kernel::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self {
            Kernel::Dense(d) => d.data[i * d.n + j],
            Kernel::Sparse(s) => {
                let span = s.row_ptr[i]..s.row_ptr[i + 1];
                match s.cols[span.clone()].binary_search(&j) {
                    Ok(pos) => s.vals[span.start + pos],
                    Err(_) => T::zero(),
                }
            }
        }
    }

    /// Calls `f(j, value)` for the stored entries of row `i`, in increasing `j`.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, T)) {
        match self {
            Kernel::Dense(d) => d.data[i * d.n..(i + 1) * d.n]
                .iter()
                .enumerate()
                .for_each(|(j, &v)| f(j, v)),
            Kernel::Sparse(s) => s.row(i).for_each(|(j, v)| f(j, v)),
        }
    }

    pub fn row_dense(&self, i: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.n()];
        self.for_each_in_row(i, |j, v| out[j] = v);
        out
    }

    pub fn row_sum(&self, i: usize) -> T {
        let mut acc = T::zero();
        self.for_each_in_row(i, |_, v| acc += v);
        acc
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n()).map(|i| self.row_dense(i)).collect()
    }

    pub fn to_dense(&self) -> Self {
        match self {
            Kernel::Dense(_) => self.clone(),
            Kernel::Sparse(s) => {
                let mut data = vec![T::zero(); s.n * s.n];
                for i in 0..s.n {
                    for (j, v) in s.row(i) {
                        data[i * s.n + j] = v;
                    }
                }
                Kernel::Dense(DenseMatrix { n: s.n, data })
            }
        }
    }

    pub fn to_sparse(&self) -> Self {
        match self {
            Kernel::Sparse(_) => self.clone(),
            Kernel::Dense(d) => {
                let mut row_ptr = Vec::with_capacity(d.n + 1);
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                row_ptr.push(0);
                for i in 0..d.n {
                    for (j, &v) in d.data[i * d.n..(i + 1) * d.n].iter().enumerate() {
                        if v != T::zero() {
                            cols.push(j);
                            vals.push(v);
                        }
                    }
                    row_ptr.push(cols.len());
                }
                Kernel::Sparse(CsrMatrix {
                    n: d.n,
                    row_ptr,
                    cols,
                    vals,
                })
            }
        }
    }

    /// Matrix product `self * rhs` ("first self, then rhs").
    ///
    /// Each output entry is accumulated over the intermediate index in
    /// increasing order, whatever the layouts.
    pub fn matmul(&self, rhs: &Kernel<T>) -> Result<Kernel<T>> {
        let n = self.n();
        if rhs.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.n(),
            });
        }
        match (self, rhs) {
            (Kernel::Dense(a), Kernel::Dense(b)) => {
                let mut data = vec![T::zero(); n * n];
                for i in 0..n {
                    let out = &mut data[i * n..(i + 1) * n];
                    for m in 0..n {
                        let a_im = a.data[i * n + m];
                        if a_im == T::zero() {
                            continue;
                        }
                        for (o, &b_mj) in out.iter_mut().zip(&b.data[m * n..(m + 1) * n]) {
                            *o += a_im * b_mj;
                        }
                    }
                }
                Ok(Kernel::Dense(DenseMatrix { n, data }))
            }
            _ => {
                let mut acc = vec![T::zero(); n];
                let mut touched = vec![false; n];
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    let mut hit: Vec<usize> = Vec::new();
                    self.for_each_in_row(i, |m, a_im| {
                        if a_im == T::zero() {
                            return;
                        }
                        rhs.for_each_in_row(m, |j, b_mj| {
                            if !touched[j] {
                                touched[j] = true;
                                hit.push(j);
                            }
                            acc[j] += a_im * b_mj;
                        });
                    });
                    hit.sort_unstable();
                    let row: Vec<(usize, T)> = hit
                        .iter()
                        .map(|&j| {
                            let v = acc[j];
                            acc[j] = T::zero();
                            touched[j] = false;
                            (j, v)
                        })
                        .collect();
                    rows.push(row);
                }
                Self::from_sparse_rows(n, rows)
            }
        }
    }

    /// Row vector times matrix: `(m P)_j = sum_i m_i P(i, j)`.
    pub fn left_mul(&self, m: &[T]) -> Result<Vec<T>> {
        let n = self.n();
        if m.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.len(),
            });
        }
        let mut out = vec![T::zero(); n];
        for (i, &w) in m.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            self.for_each_in_row(i, |j, v| out[j] += w * v);
        }
        Ok(out)
    }

    /// Matrix times column vector: `(P f)_i = sum_j P(i, j) f_j`.
    pub fn right_mul(&self, f: &[T]) -> Result<Vec<T>> {
        let n = self.n();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        Ok((0..n)
            .map(|i| {
                let mut acc = T::zero();
                self.for_each_in_row(i, |j, v| acc += v * f[j]);
                acc
            })
            .collect())
    }

    /// Column-wise minimum over the rows selected by `rows`.
    ///
    /// Returns zeros when no row is selected.
    pub fn column_minima(&self, rows: &[bool]) -> Vec<T> {
        let n = self.n();
        let mut out: Option<Vec<T>> = None;
        for i in (0..n).filter(|&i| rows.get(i).copied().unwrap_or(false)) {
            let row = self.row_dense(i);
            out = Some(match out {
                None => row,
                Some(mut cur) => {
                    for (c, r) in cur.iter_mut().zip(row) {
                        if r < *c {
                            *c = r;
                        }
                    }
                    cur
                }
            });
        }
        out.unwrap_or_else(|| vec![T::zero(); n])
    }

    /// Largest `|A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Kernel<T>) -> Result<T> {
        let n = self.n();
        if other.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: other.n(),
            });
        }
        let mut worst = T::zero();
        for i in 0..n {
            let a = self.row_dense(i);
            let b = other.row_dense(i);
            for (x, y) in a.into_iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    }

    /// Sum of row `i` restricted to `cols`.
    pub fn row_mass_on(&self, i: usize, cols: &[bool]) -> T {
        let mut parts = Vec::new();
        self.for_each_in_row(i, |j, v| {
            if cols.get(j).copied().unwrap_or(false) {
                parts.push(v);
            }
        });
        ordered_sum(parts)
    }
}
