//! Compressed-row storage for the symmetric finite-element operators.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Result, SeamError};

/// Square sparse matrix in CSR form. Symmetric operators store both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
}

/// Rows below this count are multiplied serially.
const PARALLEL_ROWS: usize = 4096;

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<CsrMatrix> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(SeamError::InvalidArgument(format!(
                "entry ({r}, {c}) out of range for a {n}x{n} matrix"
            )));
        }
        // stable sort keeps the element order of duplicates, so sums are reproducible
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0; n + 1];
        let mut columns = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                columns.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(CsrMatrix {
            n,
            row_offsets,
            columns,
            values,
        })
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> CsrMatrix {
        CsrMatrix {
            n: d.len(),
            row_offsets: (0..=d.len()).collect(),
            columns: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.columns[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.columns[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`. Each row is summed in a fixed order, so results do not depend on threading.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row_dot = |(r, out): (usize, &mut f64)| {
            let mut acc = 0.0;
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[k] * x[self.columns[k]];
            }
            *out = acc;
        };
        if self.n >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(row_dot);
        } else {
            y.iter_mut().enumerate().for_each(row_dot);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    /// `A + s B`, for operators on the same dimension.
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, s * v)));
        }
        CsrMatrix::from_triplets(self.n, triplets).expect("indices come from valid matrices")
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            triplets.extend(self.row(r).map(|(c, v)| (c, r, v)));
        }
        CsrMatrix::from_triplets(self.n, triplets).expect("indices come from a valid matrix")
    }

    /// Largest `|A_ij - A_ji|` relative to the largest `|A_ij|`; `None` if the pattern is not symmetric.
    pub fn asymmetry(&self) -> Option<f64> {
        let t = self.transpose();
        if t.row_offsets != self.row_offsets || t.columns != self.columns {
            return None;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self
            .values
            .iter()
            .zip(&t.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Some(if scale > 0.0 { diff / scale } else { 0.0 })
    }

    /// Row-major dense copy, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (r, row) in dense.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        dense
    }

    /// MatrixMarket coordinate format, general symmetry, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a =
            CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 2.0)])
                .unwrap();
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.asymmetry(), Some(0.0));
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![6.0, 2.0]);
        let b = CsrMatrix::from_triplets(2, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(b.asymmetry(), None);
    }

    #[test]
    fn out_of_range_triplet() {
        assert!(CsrMatrix::from_triplets(2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn add_scaled_and_symmetry() {
        let a = CsrMatrix::from_triplets(
            2,
            vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)],
        )
        .unwrap();
        let b = CsrMatrix::identity(2).add_scaled(0.5, &a);
        assert_eq!(b.to_dense(), vec![vec![2.0, -0.5], vec![-0.5, 2.0]]);
        assert_eq!(b.asymmetry(), Some(0.0));
        assert_eq!(a.bilinear(&[1.0, 1.0], &[1.0, 1.0]), 2.0);
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        CsrMatrix::diagonal(&[1.0, 2.0])
            .write_matrix_market(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "2 2 2");
        assert_eq!(lines[3], "2 2 2e0");
    }
}
