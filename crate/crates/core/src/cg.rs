//! Unpreconditioned conjugate gradients for symmetric positive definite systems.

use crate::error::{Result, SeamError};
use crate::sparse::{dot, norm2, CsrMatrix};

/// Relative residual target used by every solve in the pipeline.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` starting from the contents of `x`.
///
/// Stops once `‖b − A x‖₂ ≤ tol ‖b‖₂`; gives up after `10 · dim` iterations.
pub fn solve(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64) -> Result<CgStats> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let max_iter = 10 * n.max(1);

    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = tol * b_norm;

    let mut iterations = 0;
    while rr.sqrt() > target {
        if iterations == max_iter {
            return Err(SeamError::SolverFailure {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SeamError::SolverFailure {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        let step = rr / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
        iterations += 1;
    }
    Ok(CgStats {
        iterations,
        relative_residual: rr.sqrt() / b_norm,
    })
}
