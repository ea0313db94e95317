//! Gram-matrix eigenanalysis of snapshot blocks and the rank-1 POD basis.

use crate::dense::{symmetric_eigen, DenseMatrix};
use crate::error::{Result, SeamError};
use crate::hifi::SnapshotView;
use crate::sparse::dot;

/// Eigenvalues below `-NEGATIVE_CLAMP · trace(X)` are treated as a numerical fault.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Spectrum of a snapshot Gram matrix `X = UᵀU`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum {
    pub segment: usize,
    /// Leading eigenvalues, descending and clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvector of the principal eigenvalue; its largest-magnitude entry is positive.
    pub leading_vector: Vec<f64>,
    pub trace: f64,
}

impl GramSpectrum {
    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `Σ_{j≥1} λ_j` over the retained eigenvalues.
    pub fn tail_sum(&self) -> f64 {
        self.eigenvalues[1..].iter().sum()
    }

    /// `Σ_{j≥1} λ_j²` over the retained eigenvalues.
    pub fn tail_sum_sq(&self) -> f64 {
        self.eigenvalues[1..].iter().map(|l| l * l).sum()
    }
}

/// Rank-1 POD basis `β = (1/√λ₀) U b₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    pub vector: Vec<f64>,
    pub lambda0: f64,
    pub leading_vector: Vec<f64>,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        1
    }
}

/// `X_ij = U_i · U_j`.
pub fn gram(segment: SnapshotView<'_>) -> DenseMatrix {
    let n = segment.cols();
    let mut x = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = dot(segment.column(i), segment.column(j));
            x.set(i, j, v);
            x.set(j, i, v);
        }
    }
    x
}

/// Leading `k` eigenpairs of a Gram matrix, descending, clamped at zero.
pub fn eig_descending(x: &DenseMatrix, k: usize, segment: usize) -> Result<GramSpectrum> {
    let n = x.dim();
    if k == 0 || k > n {
        return Err(SeamError::InvalidArgument(format!(
            "requested {k} eigenvalues of a {n}x{n} matrix"
        )));
    }
    let eig = symmetric_eigen(x)?;
    let trace = x.trace();
    let floor = -NEGATIVE_CLAMP * trace.abs();
    if let Some(&worst) = eig.values.last() {
        if worst < floor {
            return Err(SeamError::NumericalFault(format!(
                "Gram matrix has eigenvalue {worst:e} below clamp threshold {floor:e}"
            )));
        }
    }
    let eigenvalues = eig.values[..k].iter().map(|&l| l.max(0.0)).collect();
    let mut leading_vector = eig.vectors[0].clone();
    fix_sign(&mut leading_vector);
    Ok(GramSpectrum {
        segment,
        eigenvalues,
        leading_vector,
        trace,
    })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut pivot = 0.0f64;
    for &x in v.iter() {
        if x.abs() > pivot.abs() {
            pivot = x;
        }
    }
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Gram matrix and full spectrum of one segment.
pub fn segment_spectrum(segment: SnapshotView<'_>, id: usize) -> Result<GramSpectrum> {
    let x = gram(segment);
    eig_descending(&x, x.dim(), id)
}

/// Builds `β = (1/√λ₀) Σ_k b_k U_k`; unit length follows from `b₀ᵀ X b₀ = λ₀`.
pub fn pod_basis(segment: SnapshotView<'_>, spectrum: &GramSpectrum) -> Result<PodBasis> {
    let lambda0 = spectrum.lambda0();
    if !(lambda0 > f64::EPSILON * spectrum.trace) {
        return Err(SeamError::DegenerateSnapshot {
            lambda0,
            trace: spectrum.trace,
        });
    }
    let b = &spectrum.leading_vector;
    if b.len() != segment.cols() {
        return Err(SeamError::InvalidArgument(format!(
            "eigenvector has {} entries for {} snapshot columns",
            b.len(),
            segment.cols()
        )));
    }
    let mut vector = vec![0.0; segment.rows()];
    for (bk, column) in b.iter().zip(segment.iter()) {
        for (v, u) in vector.iter_mut().zip(column) {
            *v += bk * u;
        }
    }
    let scale = 1.0 / lambda0.sqrt();
    vector.iter_mut().for_each(|v| *v *= scale);
    Ok(PodBasis {
        vector,
        lambda0,
        leading_vector: b.clone(),
    })
}

/// `Σ_k ‖U_k − (β·U_k) β‖₂²`.
pub fn projection_residual(segment: SnapshotView<'_>, basis: &PodBasis) -> f64 {
    let beta = &basis.vector;
    segment
        .iter()
        .map(|u| {
            let c = dot(beta, u);
            u.iter()
                .zip(beta)
                .map(|(ui, bi)| (ui - c * bi).powi(2))
                .sum::<f64>()
        })
        .sum()
}
