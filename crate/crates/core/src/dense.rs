//! Small dense symmetric matrices and the cyclic Jacobi eigensolver.

use crate::error::{Result, SeamError};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> DenseMatrix {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> DenseMatrix {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DenseMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(SeamError::InvalidArgument(
                "matrix rows must form a square".into(),
            ));
        }
        Ok(DenseMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn diagonal(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        DenseMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij − A_ji|` relative to the largest entry magnitude.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn ensure_symmetric(&self, tol: f64) -> Result<()> {
        let asym = self.asymmetry();
        if asym > tol {
            return Err(SeamError::InvalidArgument(format!(
                "matrix is not symmetric (relative asymmetry {asym:e})"
            )));
        }
        Ok(())
    }

    pub fn permuted(&self, perm: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Asymmetry tolerated by eigen-decompositions.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// One plane rotation `A ← Jᵀ A J` acting on rows and columns `p`, `q`.
#[derive(Debug, Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    t: f64,
}

/// Pairs of the round-robin tournament on `players` (even) entrants.
fn tournament_round(players: usize, round: usize) -> impl Iterator<Item = (usize, usize)> {
    let slot = move |k: usize| {
        if k == 0 {
            0
        } else {
            1 + (k - 1 + round) % (players - 1)
        }
    };
    (0..players / 2).map(move |k| {
        let (a, b) = (slot(k), slot(players - 1 - k));
        (a.min(b), a.max(b))
    })
}

/// Full eigen-decomposition by cyclic Jacobi rotations.
///
/// Each sweep visits every off-diagonal pair exactly once in round-robin
/// order: a round applies disjoint rotations, first to rows and then to
/// columns, so both passes stream through memory. A rotation is skipped once
/// its off-diagonal entry is negligible next to both diagonal entries. Sweeps
/// stop when the off-diagonal part is below roundoff.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    a.ensure_symmetric(SYMMETRY_TOLERANCE)?;
    let n = a.dim();
    // symmetrise so tiny asymmetries do not bias the result
    let mut m: Vec<f64> = (0..n * n)
        .map(|k| 0.5 * (a.data[k] + a.data[(k % n) * n + k / n]))
        .collect();
    // row k holds the k-th eigenvector
    let mut vt: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
        .collect();
    let total: f64 = m.iter().map(|v| v * v).sum();
    let players = n + n % 2;

    let mut converged = n < 2 || total == 0.0;
    let mut rotations = Vec::with_capacity(n / 2);
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= (f64::EPSILON * f64::EPSILON) * total {
            converged = true;
            break;
        }
        for round in 0..players - 1 {
            rotations.clear();
            for (p, q) in tournament_round(players, round) {
                if q >= n {
                    continue;
                }
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs().min(aqq.abs())) {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push(Rotation {
                    p,
                    q,
                    c,
                    s: t * c,
                    t,
                });
            }
            if rotations.is_empty() {
                continue;
            }
            let diagonals: Vec<(f64, f64, f64)> = rotations
                .iter()
                .map(|r| (m[r.p * n + r.p], m[r.q * n + r.q], m[r.p * n + r.q]))
                .collect();
            for r in &rotations {
                rotate_rows(&mut m, n, r);
                rotate_rows(&mut vt, n, r);
            }
            for row in m.chunks_exact_mut(n) {
                for r in &rotations {
                    let (x, y) = (row[r.p], row[r.q]);
                    row[r.p] = r.c * x - r.s * y;
                    row[r.q] = r.s * x + r.c * y;
                }
            }
            // the rotated 2x2 blocks are known in closed form; this avoids roundoff in them
            for (r, &(app, aqq, apq)) in rotations.iter().zip(&diagonals) {
                m[r.p * n + r.p] = app - r.t * apq;
                m[r.q * n + r.q] = aqq + r.t * apq;
                m[r.p * n + r.q] = 0.0;
                m[r.q * n + r.p] = 0.0;
            }
        }
    }
    if !converged {
        return Err(SeamError::NumericalFault(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    Ok(SymmetricEigen {
        values: order.iter().map(|&k| m[k * n + k]).collect(),
        vectors: order
            .iter()
            .map(|&k| vt[k * n..(k + 1) * n].to_vec())
            .collect(),
    })
}

/// Rows `p`, `q` of a row-major `n`-column matrix ← `[c −s; s c]` applied to them.
fn rotate_rows(data: &mut [f64], n: usize, r: &Rotation) {
    let (head, tail) = data.split_at_mut(r.q * n);
    let row_p = &mut head[r.p * n..(r.p + 1) * n];
    let row_q = &mut tail[..n];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = r.c * a - r.s * b;
        *y = r.s * a + r.c * b;
    }
}
