//! Randomized Hoffman–Wielandt check of the Jacobi eigensolver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seam_core::analysis::{hoffman_wielandt_check, HoffmanWielandt};
use seam_core::dense::DenseMatrix;
use serde::Serialize;

pub const SELFTEST_SEED: u64 = 0x5EA1_2024;
pub const SELFTEST_CASES: usize = 100;
/// Allowed violation of either inequality on random pairs.
pub const SLACK: f64 = 1e-9;
/// Allowed deviation from equality in the equality cases.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HwCase {
    pub size: usize,
    pub check: HoffmanWielandt,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HwSelftestReport {
    pub seed: u64,
    pub cases: Vec<HwCase>,
    pub worst_frobenius_margin: f64,
    pub worst_interval_margin: f64,
    pub equality_deviation: f64,
    pub passed: bool,
}

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..=1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

/// Largest deviation from equality over `E = 0` and a commuting diagonal pair.
fn equality_deviation() -> f64 {
    let a = DenseMatrix::diagonal(&[1.0, 2.0]);
    let zero = hoffman_wielandt_check(&a, &DenseMatrix::zeros(2)).expect("symmetric input");
    let diag =
        hoffman_wielandt_check(&a, &DenseMatrix::diagonal(&[0.1, -0.1])).expect("symmetric input");
    [
        zero.shift_sum_sq,
        zero.frobenius_margin,
        zero.lower_margin,
        zero.upper_margin,
        diag.frobenius_margin,
        diag.shift_sum_sq - 0.02,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn run_hw_selftest() -> HwSelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SELFTEST_SEED);
    let cases: Vec<HwCase> = (0..SELFTEST_CASES)
        .map(|_| {
            let size = rng.random_range(2..=20);
            let a = random_symmetric(&mut rng, size);
            let e = random_symmetric(&mut rng, size);
            let check = hoffman_wielandt_check(&a, &e).expect("random input is symmetric");
            HwCase {
                size,
                holds: check.holds(SLACK),
                check,
            }
        })
        .collect();
    let worst_frobenius_margin = cases
        .iter()
        .map(|c| c.check.frobenius_margin)
        .fold(f64::INFINITY, f64::min);
    let worst_interval_margin = cases
        .iter()
        .map(|c| c.check.lower_margin.min(c.check.upper_margin))
        .fold(f64::INFINITY, f64::min);
    let equality_deviation = equality_deviation();
    let passed = cases.iter().all(|c| c.holds) && equality_deviation <= EQUALITY_TOLERANCE;
    HwSelftestReport {
        seed: SELFTEST_SEED,
        cases,
        worst_frobenius_margin,
        worst_interval_margin,
        equality_deviation,
        passed,
    }
}
