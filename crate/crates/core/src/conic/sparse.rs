use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Compressed sparse matrix kept in both column- and row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T: Real> {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<T>,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<T>,
}

/// Triplet form used for JSON dumps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

fn compress<T: Real>(outer: usize, entries: &mut [(usize, usize, T)]) -> (Vec<usize>, Vec<usize>, Vec<T>) {
    entries.sort_by_key(|&(o, i, _)| (o, i));
    let mut ptr = vec![0usize; outer + 1];
    let mut idx: Vec<usize> = Vec::with_capacity(entries.len());
    let mut vals: Vec<T> = Vec::with_capacity(entries.len());
    let mut last: Option<(usize, usize)> = None;
    for &(o, i, v) in entries.iter() {
        if last == Some((o, i)) {
            *vals.last_mut().expect("previous entry") += v;
        } else {
            idx.push(i);
            vals.push(v);
            ptr[o + 1] += 1;
            last = Some((o, i));
        }
    }
    for k in 0..outer {
        ptr[k + 1] += ptr[k];
    }
    (ptr, idx, vals)
}

impl<T: Real> SparseMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        assert!(triplets.iter().all(|&(r, c, _)| r < nrows && c < ncols), "triplet out of range");
        let mut by_col: Vec<_> = triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        let (col_ptr, col_rows, col_vals) = compress(ncols, &mut by_col);
        let mut by_row: Vec<_> = triplets.to_vec();
        let (row_ptr, row_cols, row_vals) = compress(nrows, &mut by_row);
        Self {
            nrows,
            ncols,
            col_ptr,
            col_rows,
            col_vals,
            row_ptr,
            row_cols,
            row_vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.col_rows[r.clone()].iter().copied().zip(self.col_vals[r].iter().copied())
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.row_cols[r.clone()].iter().copied().zip(self.row_vals[r].iter().copied())
    }

    /// `G x`
    pub fn mul_vec(&self, x: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.nrows, |i, _| self.row(i).fold(T::zero(), |a, (j, v)| a + v * x[j]))
    }

    /// `Gᵀ y`
    pub fn tr_mul_vec(&self, y: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.ncols, |j, _| self.col(j).fold(T::zero(), |a, (i, v)| a + v * y[i]))
    }

    pub fn to_triplets(&self) -> Triplets {
        let mut entries = Vec::with_capacity(self.col_vals.len());
        for j in 0..self.ncols {
            for (i, v) in self.col(j) {
                entries.push((i, j, v.as_f64()));
            }
        }
        Triplets {
            nrows: self.nrows,
            ncols: self.ncols,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let t = [(0, 0, 1.0), (2, 1, -2.0), (1, 2, 3.0), (2, 1, 0.5), (0, 2, 4.0)];
        let g = SparseMatrix::from_triplets(3, 3, &t);
        let mut d = nalgebra::DMatrix::<f64>::zeros(3, 3);
        for &(r, c, v) in &t {
            d[(r, c)] += v;
        }
        let x = DVector::from_vec(vec![1.0, -1.0, 2.0]);
        assert_eq!(g.mul_vec(&x), &d * &x);
        assert_eq!(g.tr_mul_vec(&x), d.transpose() * &x);
        assert_eq!(g.to_triplets().entries.len(), 4);
    }
}
