//! Spectral diagnostics for snapshot Gram matrices.
//!
//! The symmetrised evolution operator `𝒜 = ℳ^{-1/2} 𝒮 ℳ^{-1/2}` is never
//! formed: its 2-norm is the top eigenvalue of the pencil `(𝒮, ℳ)`, and the
//! rank-one reference block `Ū*_k = (1 − τ‖𝒜‖₂)^k U_0` has a closed-form Gram
//! spectrum.

use serde::Serialize;

use crate::cg;
use crate::dense::{symmetric_eigen, DenseMatrix, SYMMETRY_TOLERANCE};
use crate::error::{Result, SeamError};
use crate::hifi::{SnapshotMatrix, SnapshotView};
use crate::pod::GramSpectrum;
use crate::seam::SeamSolution;
use crate::sparse::{dot, CsrMatrix};

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// Number of leading eigenvalues kept per segment in reports.
pub const REPORTED_EIGENVALUES: usize = 5;

/// Largest generalized eigenvalue of `𝒮 v = λ ℳ v`, i.e. `‖𝒜‖₂`.
///
/// Power iteration on `ℳ⁻¹𝒮` in the ℳ-inner product, one CG solve per step.
/// The start vector alternates in sign (plus a fixed pseudo-random ripple) so
/// it overlaps strongly with the oscillatory top mode of a Laplacian-like
/// pencil and is never orthogonal to it.
pub fn operator_norm_a(mass: &CsrMatrix, stiffness: &CsrMatrix) -> Result<f64> {
    let n = mass.dim();
    if stiffness.dim() != n || n == 0 {
        return Err(SeamError::InvalidArgument(
            "operators must be non-empty and of equal size".into(),
        ));
    }
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let ripple = (state >> 11) as f64 / (1u64 << 53) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * (1.0 + 0.25 * ripple)
        })
        .collect();
    let norm = mass.bilinear(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut z = v.clone();
    let mut previous = f64::NAN;
    let mut change = f64::INFINITY;
    for _ in 0..POWER_MAX_ITERATIONS {
        let w = stiffness.mul_vec(&v);
        let lambda = dot(&v, &w);
        change = (lambda - previous).abs();
        if change <= POWER_TOLERANCE * lambda.abs() {
            return Ok(lambda);
        }
        previous = lambda;
        cg::solve(mass, &w, &mut z, cg::DEFAULT_TOLERANCE)?;
        let zn = mass.bilinear(&z, &z).sqrt();
        if zn == 0.0 {
            return Ok(0.0);
        }
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / zn;
        }
    }
    Err(SeamError::Stagnation {
        iterations: POWER_MAX_ITERATIONS,
        change: change / previous.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeStepCheck {
    /// `τ‖𝒜‖₂`.
    pub tau_norm: f64,
    /// `τ‖𝒜‖₂ < 1`; with `𝒜` SPD this also gives `‖I − τ𝒜‖₂ < 1`.
    pub satisfied: bool,
}

pub fn check_time_step_assumption(tau: f64, norm_a: f64) -> TimeStepCheck {
    let tau_norm = tau * norm_a;
    TimeStepCheck {
        tau_norm,
        satisfied: tau_norm < 1.0,
    }
}

/// Principal eigenvalue of `X̄* = Ū*ᵀŪ*`; all other eigenvalues are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceSpectrum {
    /// Contraction factor `1 − τ‖𝒜‖₂`.
    pub ratio: f64,
    /// `‖U_0‖² Σ_{k=0}^{n} ratio^{2k}`; infinite when it overflows.
    pub lambda0: f64,
    /// Natural log of `lambda0`, finite even when `lambda0` overflows.
    pub ln_lambda0: f64,
}

/// `ln Σ_{k=0}^{n} q^k` for `q ≥ 0`.
fn ln_geometric_sum(q: f64, n: usize) -> f64 {
    let terms = (n + 1) as f64;
    if q == 0.0 {
        0.0
    } else if q == 1.0 {
        terms.ln()
    } else if q < 1.0 {
        (-(terms * q.ln()).exp()).ln_1p() - (-q).ln_1p()
    } else {
        terms * q.ln() + (-(-terms * q.ln()).exp()).ln_1p() - (q - 1.0).ln()
    }
}

pub fn reference_matrix_spectrum(u0: &[f64], norm_a: f64, tau: f64, n: usize) -> ReferenceSpectrum {
    let ratio = 1.0 - tau * norm_a;
    let u0_sq = dot(u0, u0);
    let ln_lambda0 = u0_sq.ln() + ln_geometric_sum(ratio * ratio, n);
    let q = ratio * ratio;
    let direct = if q == 1.0 {
        (n + 1) as f64
    } else {
        (1.0 - q.powi((n + 1) as i32)) / (1.0 - q)
    };
    let lambda0 = if direct.is_finite() {
        u0_sq * direct
    } else {
        f64::INFINITY
    };
    ReferenceSpectrum {
        ratio,
        lambda0,
        ln_lambda0,
    }
}

/// Explicit reference block `(Ū*_0, …, Ū*_n)` with `Ū*_k = (1 − τ‖𝒜‖₂)^k U_0`.
pub fn reference_matrix(u0: &[f64], norm_a: f64, tau: f64, n: usize) -> SnapshotMatrix {
    let ratio = 1.0 - tau * norm_a;
    let mut out = SnapshotMatrix::new(u0.len(), tau);
    let mut scale = 1.0;
    for _ in 0..=n {
        let col: Vec<f64> = u0.iter().map(|v| scale * v).collect();
        out.push(&col).expect("same length as u0");
        scale *= ratio;
    }
    out
}

/// Per-segment spectral diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub segment: usize,
    /// Leading eigenvalues of the segment Gram matrix.
    pub eigenvalues: Vec<f64>,
    pub lambda0: f64,
    pub lambda0_reference: f64,
    /// `Σ_{k≥1} λ_k(X)²`.
    pub tail_sum_sq: f64,
    /// `P = (λ₀(X) − λ₀(X̄*))² + Σ_{k≥1} λ_k(X)²`.
    pub perturbation: f64,
    /// `ln P`, finite even when `P` overflows.
    pub ln_perturbation: f64,
    /// `n⁴τ²`.
    pub bound_proxy: f64,
    /// `P / (n⁴τ²)`.
    pub bound_ratio: f64,
}

/// `ln(e^a + e^b)`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln |e^a − e^b|`.
fn log_sub_exp(a: f64, b: f64) -> f64 {
    if a == b {
        return f64::NEG_INFINITY;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(lo - hi).exp()).ln_1p()
}

pub fn perturbation_quantity(
    spectrum: &GramSpectrum,
    reference: &ReferenceSpectrum,
    n: usize,
    tau: f64,
) -> SegmentReport {
    let lambda0 = spectrum.lambda0();
    let tail_sum_sq = spectrum.tail_sum_sq();
    let shift = lambda0 - reference.lambda0;
    let perturbation = shift * shift + tail_sum_sq;
    let ln_shift_sq = if reference.lambda0.is_finite() {
        2.0 * shift.abs().ln()
    } else {
        2.0 * log_sub_exp(reference.ln_lambda0, lambda0.ln())
    };
    let ln_perturbation = log_add_exp(ln_shift_sq, tail_sum_sq.ln());
    let bound_proxy = (n as f64).powi(4) * tau * tau;
    SegmentReport {
        segment: spectrum.segment,
        eigenvalues: spectrum
            .eigenvalues
            .iter()
            .take(REPORTED_EIGENVALUES)
            .copied()
            .collect(),
        lambda0,
        lambda0_reference: reference.lambda0,
        tail_sum_sq,
        perturbation,
        ln_perturbation,
        bound_proxy,
        bound_ratio: perturbation / bound_proxy,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub tau: f64,
    pub segment_length: usize,
    pub norm_a: f64,
    pub time_step: TimeStepCheck,
    pub segments: Vec<SegmentReport>,
}

/// Diagnostics for every segment; each segment's reference block starts from its first column.
pub fn spectral_report(
    snapshots: &SnapshotMatrix,
    spectra: &[GramSpectrum],
    segment_length: usize,
    norm_a: f64,
) -> SpectralReport {
    let tau = snapshots.tau();
    let per_segment = segment_length + 1;
    let segments = spectra
        .iter()
        .map(|s| {
            let start = snapshots.column(s.segment * per_segment);
            let reference = reference_matrix_spectrum(start, norm_a, tau, segment_length);
            perturbation_quantity(s, &reference, segment_length, tau)
        })
        .collect();
    SpectralReport {
        tau,
        segment_length,
        norm_a,
        time_step: check_time_step_assumption(tau, norm_a),
        segments,
    }
}

/// Both Hoffman–Wielandt statements for `A` and `A + E`, as margins (≥ 0 when they hold).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoffmanWielandt {
    /// `Σ_k (λ_k(A+E) − λ_k(A))²`.
    pub shift_sum_sq: f64,
    /// `‖E‖_F²`.
    pub frobenius_sq: f64,
    /// `‖E‖_F² − Σ_k (λ_k(A+E) − λ_k(A))²`.
    pub frobenius_margin: f64,
    /// `min_k (λ_k(A+E) − λ_k(A)) − λ_min(E)`.
    pub lower_margin: f64,
    /// `λ_max(E) − max_k (λ_k(A+E) − λ_k(A))`.
    pub upper_margin: f64,
}

impl HoffmanWielandt {
    pub fn holds(&self, slack: f64) -> bool {
        self.frobenius_margin >= -slack
            && self.lower_margin >= -slack
            && self.upper_margin >= -slack
    }
}

pub fn hoffman_wielandt_check(a: &DenseMatrix, e: &DenseMatrix) -> Result<HoffmanWielandt> {
    if a.dim() != e.dim() {
        return Err(SeamError::InvalidArgument("matrices differ in size".into()));
    }
    a.ensure_symmetric(SYMMETRY_TOLERANCE)?;
    e.ensure_symmetric(SYMMETRY_TOLERANCE)?;
    let base = symmetric_eigen(a)?.values;
    let perturbed = symmetric_eigen(&a.add(e))?.values;
    let pert = symmetric_eigen(e)?.values;
    let shifts: Vec<f64> = perturbed.iter().zip(&base).map(|(p, b)| p - b).collect();
    let shift_sum_sq: f64 = shifts.iter().map(|d| d * d).sum();
    let frobenius_sq = e.frobenius_norm_sq();
    let (e_max, e_min) = match (pert.first(), pert.last()) {
        (Some(&hi), Some(&lo)) => (hi, lo),
        _ => (0.0, 0.0),
    };
    let min_shift = shifts.iter().copied().fold(f64::INFINITY, f64::min);
    let max_shift = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(HoffmanWielandt {
        shift_sum_sq,
        frobenius_sq,
        frobenius_margin: frobenius_sq - shift_sum_sq,
        lower_margin: if shifts.is_empty() {
            0.0
        } else {
            min_shift - e_min
        },
        upper_margin: if shifts.is_empty() {
            0.0
        } else {
            e_max - max_shift
        },
    })
}

/// Squared ℳ-norm of every column difference and of every reference column.
pub fn error_series(
    reference: SnapshotView<'_>,
    approx: SnapshotView<'_>,
    mass: &CsrMatrix,
) -> Result<Vec<(f64, f64)>> {
    if reference.rows() != approx.rows() || reference.cols() != approx.cols() {
        return Err(SeamError::InvalidArgument(format!(
            "snapshot shapes differ: {}x{} vs {}x{}",
            reference.rows(),
            reference.cols(),
            approx.rows(),
            approx.cols()
        )));
    }
    Ok(reference
        .iter()
        .zip(approx.iter())
        .map(|(u, v)| {
            let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
            (mass.bilinear(&diff, &diff), mass.bilinear(u, u))
        })
        .collect())
}

/// Space-time relative L² error with the mass matrix in space and the
/// left-rectangle rule over every time index in time.
pub fn relative_l2_error_snapshots(
    reference: SnapshotView<'_>,
    approx: SnapshotView<'_>,
    mass: &CsrMatrix,
    tau: f64,
) -> Result<f64> {
    let series = error_series(reference, approx, mass)?;
    let num: f64 = series.iter().map(|(e, _)| tau * e).sum();
    let den: f64 = series.iter().map(|(_, r)| tau * r).sum();
    if !(den > 0.0) {
        return Err(SeamError::DegenerateReference);
    }
    Ok((num / den).sqrt())
}

pub fn relative_l2_error(
    hifi: &SnapshotMatrix,
    seam: &SeamSolution,
    mass: &CsrMatrix,
    tau: f64,
) -> Result<f64> {
    if seam.cols() != hifi.cols() {
        return Err(SeamError::InvalidArgument(format!(
            "SEAM solution has {} columns, high-fidelity {}",
            seam.cols(),
            hifi.cols()
        )));
    }
    let approx = seam.to_snapshots();
    relative_l2_error_snapshots(hifi.view(), approx.view(), mass, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal_pencils() {
        let s = CsrMatrix::diagonal(&[1.0, 4.0, 9.0]);
        let norm = operator_norm_a(&CsrMatrix::identity(3), &s).unwrap();
        assert!((norm - 9.0).abs() < 1e-8);
        let two = CsrMatrix::diagonal(&[2.0; 4]);
        assert!((operator_norm_a(&two, &two).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn time_step_flags() {
        let ok = check_time_step_assumption(1e-4, 5000.0);
        assert!((ok.tau_norm - 0.5).abs() < 1e-15 && ok.satisfied);
        let bad = check_time_step_assumption(1e-3, 2000.0);
        assert!((bad.tau_norm - 2.0).abs() < 1e-15 && !bad.satisfied);
    }

    #[test]
    fn reference_spectrum_limits() {
        let u0 = [3.0, 4.0];
        let r = reference_matrix_spectrum(&u0, 0.0, 0.1, 7);
        assert_eq!(r.lambda0, 8.0 * 25.0);
        assert!((r.ln_lambda0 - 200f64.ln()).abs() < 1e-14);

        let r = reference_matrix_spectrum(&u0, 2.0, 0.1, 1);
        let ratio: f64 = 0.8;
        assert!((r.lambda0 - 25.0 * (1.0 + ratio * ratio)).abs() < 1e-12);
        assert!((r.ln_lambda0 - r.lambda0.ln()).abs() < 1e-14);
    }

    #[test]
    fn reference_spectrum_overflow_stays_finite_in_logs() {
        let r = reference_matrix_spectrum(&[1.0], 460_000.0, 1e-4, 100);
        assert!(r.ratio < -40.0);
        assert!(r.lambda0.is_infinite());
        // dominated by ratio^{200}
        let expected = 200.0 * r.ratio.abs().ln();
        assert!((r.ln_lambda0 - expected).abs() < 1e-3);
    }

    #[test]
    fn zero_perturbation_for_reference_block() {
        let u0 = [1.0, -2.0, 0.5];
        let block = reference_matrix(&u0, 10.0, 0.01, 4);
        let x = crate::pod::gram(block.view());
        let spectrum = crate::pod::eig_descending(&x, 5, 0).unwrap();
        let reference = reference_matrix_spectrum(&u0, 10.0, 0.01, 4);
        let report = perturbation_quantity(&spectrum, &reference, 4, 0.01);
        assert!(report.perturbation < 1e-24, "{}", report.perturbation);
        assert!(report.perturbation >= report.tail_sum_sq);
    }

    #[test]
    fn hoffman_wielandt_equality_cases() {
        let a = DenseMatrix::diagonal(&[1.0, 2.0]);
        let hw = hoffman_wielandt_check(&a, &DenseMatrix::zeros(2)).unwrap();
        assert_eq!(hw.shift_sum_sq, 0.0);
        assert_eq!(hw.frobenius_margin, 0.0);
        assert_eq!(hw.lower_margin, 0.0);
        assert_eq!(hw.upper_margin, 0.0);

        let e = DenseMatrix::diagonal(&[0.1, -0.1]);
        let hw = hoffman_wielandt_check(&a, &e).unwrap();
        assert!((hw.shift_sum_sq - 0.02).abs() < 1e-12);
        assert!(hw.frobenius_margin.abs() < 1e-12);
        assert!(hw.holds(1e-12));
    }

    #[test]
    fn hoffman_wielandt_rejects_asymmetric() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(hoffman_wielandt_check(&a, &DenseMatrix::zeros(2)).is_err());
        assert!(hoffman_wielandt_check(&DenseMatrix::zeros(3), &DenseMatrix::zeros(2)).is_err());
    }

    #[test]
    fn relative_error_extremes() {
        let m = CsrMatrix::identity(2);
        let u = SnapshotMatrix::from_columns(&[vec![1.0, 2.0], vec![0.5, 0.0]], 0.1).unwrap();
        let zero = SnapshotMatrix::from_columns(&[vec![0.0; 2], vec![0.0; 2]], 0.1).unwrap();
        assert_eq!(
            relative_l2_error_snapshots(u.view(), u.view(), &m, 0.1).unwrap(),
            0.0
        );
        assert!(
            (relative_l2_error_snapshots(u.view(), zero.view(), &m, 0.1).unwrap() - 1.0).abs()
                < 1e-15
        );
        assert!(matches!(
            relative_l2_error_snapshots(zero.view(), u.view(), &m, 0.1),
            Err(SeamError::DegenerateReference)
        ));
    }
}
