//! Single eigenvalue acceleration: a rank-1 Galerkin model per snapshot segment.
//!
//! Offline, each segment's principal POD vector `β` is extracted and the
//! operators are reduced to three scalars. Online, every step is the scalar
//! recurrence
//!
//! ```text
//! βᵀ(ℳ+τ𝒮)β · α_k = βᵀℳβ · α_{k−1} + τ βᵀF_k
//! ```
//!
//! and the reconstructed solution is `α_k β`.

use rayon::prelude::*;

use crate::error::{Result, SeamError};
use crate::hifi::{Forcing, SnapshotMatrix, SnapshotView};
use crate::pod::{pod_basis, segment_spectrum, GramSpectrum, PodBasis};
use crate::sparse::{dot, CsrMatrix};

/// Reduced right-hand side `g_k = βᵀF_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReducedLoad {
    Constant(f64),
    /// `g_1, …, g_n`.
    PerStep(Vec<f64>),
}

impl ReducedLoad {
    /// Load for local step `k ≥ 1`.
    pub fn at(&self, k: usize) -> f64 {
        match self {
            ReducedLoad::Constant(g) => *g,
            ReducedLoad::PerStep(g) => g[k - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeamModel {
    pub basis: PodBasis,
    /// `βᵀ(ℳ+τ𝒮)β`.
    pub system: f64,
    /// `βᵀℳβ`.
    pub mass: f64,
    pub load: ReducedLoad,
    /// `βᵀU_start`.
    pub alpha0: f64,
    pub tau: f64,
}

impl SeamModel {
    /// Reduced operators for a given basis. `first_step` is the global time
    /// index of the segment's first column; loads are taken at the following
    /// `steps` indices.
    #[allow(clippy::too_many_arguments)]
    pub fn reduce(
        basis: PodBasis,
        start: &[f64],
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        forcing: &Forcing<'_>,
        tau: f64,
        first_step: usize,
        steps: usize,
    ) -> Result<SeamModel> {
        let beta = &basis.vector;
        let m = mass.bilinear(beta, beta);
        let s = stiffness.bilinear(beta, beta);
        let system = m + tau * s;
        if !(m > 0.0 && system > 0.0) {
            return Err(SeamError::NumericalFault(format!(
                "reduced operators are not positive (a = {system:e}, m = {m:e})"
            )));
        }
        let load = match forcing {
            Forcing::Constant(f) => ReducedLoad::Constant(dot(beta, f)),
            Forcing::TimeDependent { .. } => ReducedLoad::PerStep(
                (1..=steps)
                    .map(|k| Ok(dot(beta, &forcing.at(first_step + k, tau)?)))
                    .collect::<Result<_>>()?,
            ),
        };
        let alpha0 = dot(beta, start);
        Ok(SeamModel {
            basis,
            system,
            mass: m,
            load,
            alpha0,
            tau,
        })
    }

    /// Returns a copy with `β` and every coefficient negated.
    pub fn flipped(&self) -> SeamModel {
        let mut out = self.clone();
        out.basis.vector.iter_mut().for_each(|v| *v = -*v);
        out.alpha0 = -out.alpha0;
        out.load = match &self.load {
            ReducedLoad::Constant(g) => ReducedLoad::Constant(-g),
            ReducedLoad::PerStep(g) => ReducedLoad::PerStep(g.iter().map(|v| -v).collect()),
        };
        out
    }
}

/// Offline phase for one segment starting at global time index `first_step`.
pub fn seam_offline(
    segment: SnapshotView<'_>,
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    forcing: &Forcing<'_>,
    tau: f64,
    first_step: usize,
) -> Result<(GramSpectrum, SeamModel)> {
    if segment.cols() == 0 {
        return Err(SeamError::InvalidArgument("empty snapshot segment".into()));
    }
    let spectrum = segment_spectrum(segment, 0)?;
    let basis = pod_basis(segment, &spectrum)?;
    let model = SeamModel::reduce(
        basis,
        segment.column(0),
        mass,
        stiffness,
        forcing,
        tau,
        first_step,
        segment.cols() - 1,
    )?;
    Ok((spectrum, model))
}

/// Online phase: `α_0, …, α_steps` from the scalar recurrence.
pub fn seam_online(model: &SeamModel, steps: usize) -> Vec<f64> {
    let mut alpha = Vec::with_capacity(steps + 1);
    let mut current = model.alpha0;
    alpha.push(current);
    for k in 1..=steps {
        current = (model.mass * current + model.tau * model.load.at(k)) / model.system;
        alpha.push(current);
    }
    alpha
}

/// One segment of a SEAM solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SeamSegment {
    pub index: usize,
    /// Global time index of the first column.
    pub start: usize,
    pub spectrum: GramSpectrum,
    pub model: SeamModel,
    pub coefficients: Vec<f64>,
}

impl SeamSegment {
    pub fn columns(&self) -> usize {
        self.coefficients.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeamSolution {
    pub rows: usize,
    pub tau: f64,
    pub segments: Vec<SeamSegment>,
}

impl SeamSolution {
    pub fn cols(&self) -> usize {
        self.segments.iter().map(SeamSegment::columns).sum()
    }

    /// Segment and local index holding global column `k`.
    fn locate(&self, k: usize) -> (&SeamSegment, usize) {
        let idx = self
            .segments
            .partition_point(|s| s.start + s.columns() <= k);
        let seg = &self.segments[idx];
        (seg, k - seg.start)
    }

    /// Reconstructed column `α_k β`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        let (seg, local) = self.locate(k);
        let alpha = seg.coefficients[local];
        seg.model.basis.vector.iter().map(|b| alpha * b).collect()
    }

    pub fn to_snapshots(&self) -> SnapshotMatrix {
        let mut out = SnapshotMatrix::new(self.rows, self.tau);
        let mut column = vec![0.0; self.rows];
        for seg in &self.segments {
            let beta = &seg.model.basis.vector;
            for &alpha in &seg.coefficients {
                for (c, b) in column.iter_mut().zip(beta) {
                    *c = alpha * b;
                }
                out.push(&column).expect("columns have matching length");
            }
        }
        out
    }
}

/// Offline result for one segment: its spectrum and reduced model.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSegment {
    pub index: usize,
    /// Global time index of the first column.
    pub start: usize,
    /// Steps in the segment.
    pub steps: usize,
    pub spectrum: GramSpectrum,
    pub model: SeamModel,
}

/// Offline phase on every segment of `n + 1` columns, in parallel.
pub fn parallel_offline(
    snapshots: &SnapshotMatrix,
    segment_length: usize,
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    forcing: &Forcing<'_>,
) -> Result<Vec<OfflineSegment>> {
    let per_segment = segment_length + 1;
    let total = snapshots.cols();
    if total == 0 || !total.is_multiple_of(per_segment) {
        return Err(SeamError::Divisibility {
            columns: total,
            segment: per_segment,
        });
    }
    let tau = snapshots.tau();
    (0..total / per_segment)
        .into_par_iter()
        .map(|index| {
            let start = index * per_segment;
            let block = snapshots.columns(start..start + per_segment);
            let (mut spectrum, model) = seam_offline(block, mass, stiffness, forcing, tau, start)?;
            spectrum.segment = index;
            Ok(OfflineSegment {
                index,
                start,
                steps: segment_length,
                spectrum,
                model,
            })
        })
        .collect()
}

/// Online phase: runs every segment's recurrence.
pub fn parallel_online(offline: Vec<OfflineSegment>, rows: usize, tau: f64) -> SeamSolution {
    let segments = offline
        .into_par_iter()
        .map(|seg| {
            let coefficients = seam_online(&seg.model, seg.steps);
            SeamSegment {
                index: seg.index,
                start: seg.start,
                spectrum: seg.spectrum,
                model: seg.model,
                coefficients,
            }
        })
        .collect();
    SeamSolution {
        rows,
        tau,
        segments,
    }
}

/// Runs offline and online phases on every segment of `n + 1` columns in parallel.
pub fn run_parallel_seam(
    snapshots: &SnapshotMatrix,
    segment_length: usize,
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    forcing: &Forcing<'_>,
) -> Result<SeamSolution> {
    let offline = parallel_offline(snapshots, segment_length, mass, stiffness, forcing)?;
    Ok(parallel_online(offline, snapshots.rows(), snapshots.tau()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::PodBasis;

    fn model(system: f64, mass: f64, tau: f64, g: f64, alpha0: f64) -> SeamModel {
        SeamModel {
            basis: PodBasis {
                vector: vec![1.0],
                lambda0: 1.0,
                leading_vector: vec![1.0],
            },
            system,
            mass,
            load: ReducedLoad::Constant(g),
            alpha0,
            tau,
        }
    }

    #[test]
    fn identity_operators() {
        let v = 0.5f64.sqrt();
        let u = SnapshotMatrix::from_columns(&[vec![v, v], vec![0.5 * v, 0.5 * v]], 0.5).unwrap();
        let id = CsrMatrix::identity(2);
        let (_, m) = seam_offline(u.view(), &id, &id, &Forcing::zero(2), 0.5, 0).unwrap();
        assert!((m.system - 1.5).abs() < 1e-15);
        assert!((m.mass - 1.0).abs() < 1e-15);
        assert!((m.alpha0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_decay_without_forcing() {
        let m = model(3.0, 2.0, 0.1, 0.0, 5.0);
        let alpha = seam_online(&m, 6);
        for (k, a) in alpha.iter().enumerate() {
            assert!((a - 5.0 * (2.0f64 / 3.0).powi(k as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn hand_iterated_recurrence() {
        let alpha = seam_online(&model(2.0, 1.0, 1.0, 1.0, 0.0), 3);
        assert_eq!(alpha, vec![0.0, 0.5, 0.75, 0.875]);
    }

    #[test]
    fn zero_segment_is_rejected() {
        let u = SnapshotMatrix::from_columns(&[vec![0.0; 2], vec![0.0; 2]], 0.5).unwrap();
        let id = CsrMatrix::identity(2);
        assert!(matches!(
            seam_offline(u.view(), &id, &id, &Forcing::zero(2), 0.5, 0),
            Err(SeamError::DegenerateSnapshot { .. })
        ));
    }

    #[test]
    fn divisibility_is_enforced() {
        let u = SnapshotMatrix::from_columns(&vec![vec![1.0]; 5], 0.1).unwrap();
        let id = CsrMatrix::identity(1);
        assert!(matches!(
            run_parallel_seam(&u, 1, &id, &id, &Forcing::zero(1)),
            Err(SeamError::Divisibility {
                columns: 5,
                segment: 2
            })
        ));
    }

    #[test]
    fn locate_spans_segments() {
        let u = SnapshotMatrix::from_columns(&[vec![1.0], vec![0.5], vec![0.25], vec![0.125]], 1.0)
            .unwrap();
        let id = CsrMatrix::identity(1);
        let sol = run_parallel_seam(&u, 1, &id, &id, &Forcing::zero(1)).unwrap();
        assert_eq!(sol.cols(), 4);
        assert_eq!(sol.segments[1].start, 2);
        assert!((sol.column(2)[0] - 0.25).abs() < 1e-15);
        // ℳ = 𝒮 = I, τ = 1 halves the coefficient each step
        assert!((sol.column(3)[0] - 0.125).abs() < 1e-15);
    }
}
