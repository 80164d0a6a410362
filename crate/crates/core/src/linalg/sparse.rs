use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Square matrix in compressed sparse row form.
///
/// Column indices are sorted and unique within each row. `symmetric` records
/// whether the stored values are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Builds a CSR matrix, summing duplicate entries.
///
/// Duplicates are summed in ascending value order, so the result does not
/// depend on the order of `triplets` and mirrored entries of a symmetric
/// triplet list produce bit-identical values.
pub fn csr_from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<SparseSym> {
    if let Some(&(row, col, _)) = triplets.iter().find(|&&(i, j, _)| i >= n || j >= n) {
        return Err(Error::IndexOutOfRange { row, col, dim: n });
    }
    let mut sorted = triplets.to_vec();
    sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

    let mut row_ptr = vec![0usize; n + 1];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let (i, j, _) = sorted[k];
        let mut sum = 0.0;
        while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
            sum += sorted[k].2;
            k += 1;
        }
        col_idx.push(j);
        values.push(sum);
        row_ptr[i + 1] += 1;
    }
    for i in 0..n {
        row_ptr[i + 1] += row_ptr[i];
    }
    let mut a = SparseSym {
        n,
        row_ptr,
        col_idx,
        values,
        symmetric: false,
    };
    a.symmetric = a.symmetry_defect() == 0.0;
    Ok(a)
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            symmetric: true,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SparseSym {
            values: d.to_vec(),
            ..SparseSym::identity(d.len())
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut sum = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                sum += self.values[k] * x[self.col_idx[k]];
            }
            *yi = sum;
        }
    }

    /// `xᵀAy`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> SparseSym {
        SparseSym {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other` on the union of the two sparsity patterns.
    pub fn linear_combination(&self, a: f64, other: &SparseSym, b: f64) -> Result<SparseSym> {
        if self.n != other.n {
            return Err(Error::InvalidInput(format!(
                "cannot combine {}x{} and {}x{} matrices",
                self.n, self.n, other.n, other.n
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.n {
            let mut p = self.row(i).peekable();
            let mut q = other.row(i).peekable();
            loop {
                let entry = match (p.peek(), q.peek()) {
                    (Some(&(j, u)), Some(&(k, v))) if j == k => {
                        p.next();
                        q.next();
                        (j, a * u + b * v)
                    }
                    (Some(&(j, u)), Some(&(k, _))) if j < k => {
                        p.next();
                        (j, a * u)
                    }
                    (_, Some(&(k, v))) => {
                        q.next();
                        (k, b * v)
                    }
                    (Some(&(j, u)), None) => {
                        p.next();
                        (j, a * u)
                    }
                    (None, None) => break,
                };
                col_idx.push(entry.0);
                values.push(entry.1);
            }
            row_ptr.push(col_idx.len());
        }
        let mut out = SparseSym {
            n: self.n,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        };
        out.symmetric = self.symmetric && other.symmetric || out.symmetry_defect() == 0.0;
        Ok(out)
    }

    /// `max |A_ij − A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j > i {
                    defect = defect.max((v - self.get(j, i)).abs());
                } else if j < i && self.get(j, i) == 0.0 {
                    defect = defect.max(v.abs());
                }
            }
        }
        defect
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Matrix Market coordinate format, general storage, 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.n, self.n, self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
        out
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_matrix_market())?;
        Ok(())
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a·x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
