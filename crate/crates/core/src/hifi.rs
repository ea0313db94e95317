//! Backward-Euler time stepping of the assembled finite-element system.

use std::borrow::Cow;
use std::io::{Read, Write};
use std::ops::Range;

use crate::assembly::{assemble_load, assemble_mass, assemble_stiffness, interpolate_initial};
use crate::cg;
use crate::error::{Result, SeamError};
use crate::expr::ScalarField;
use crate::mesh::Mesh;
use crate::problem::ProblemSpec;
use crate::sparse::CsrMatrix;

/// Column-major block of solution vectors `(U_0, …, U_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    rows: usize,
    cols: usize,
    tau: f64,
    data: Vec<f64>,
}

/// Borrowed column range of a [`SnapshotMatrix`].
#[derive(Debug, Clone, Copy)]
pub struct SnapshotView<'a> {
    rows: usize,
    data: &'a [f64],
}

impl SnapshotMatrix {
    pub fn new(rows: usize, tau: f64) -> SnapshotMatrix {
        SnapshotMatrix {
            rows,
            cols: 0,
            tau,
            data: Vec::new(),
        }
    }

    pub fn from_columns(columns: &[Vec<f64>], tau: f64) -> Result<SnapshotMatrix> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut s = SnapshotMatrix::new(rows, tau);
        for c in columns {
            s.push(c)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, column: &[f64]) -> Result<()> {
        if column.len() != self.rows {
            return Err(SeamError::InvalidArgument(format!(
                "column has {} entries, expected {}",
                column.len(),
                self.rows
            )));
        }
        self.data.extend_from_slice(column);
        self.cols += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn view(&self) -> SnapshotView<'_> {
        self.columns(0..self.cols)
    }

    pub fn columns(&self, range: Range<usize>) -> SnapshotView<'_> {
        assert!(range.end <= self.cols, "column range past the end");
        SnapshotView {
            rows: self.rows,
            data: &self.data[range.start * self.rows..range.end * self.rows],
        }
    }

    /// Keeps only the first `cols` columns.
    pub fn truncate(&mut self, cols: usize) {
        if cols < self.cols {
            self.cols = cols;
            self.data.truncate(cols * self.rows);
        }
    }

    /// Flat binary layout: `rows: u64`, `cols: u64`, `tau: f64`, then the
    /// column-major entries, all little-endian.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.rows as u64).to_le_bytes())?;
        out.write_all(&(self.cols as u64).to_le_bytes())?;
        out.write_all(&self.tau.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.data.len());
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<SnapshotMatrix> {
        let mut word = [0u8; 8];
        let mut next = |input: &mut R| -> Result<[u8; 8]> {
            input.read_exact(&mut word).map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    SeamError::Format("truncated snapshot file".into())
                }
                _ => SeamError::Io(e),
            })?;
            Ok(word)
        };
        let rows = u64::from_le_bytes(next(&mut input)?) as usize;
        let cols = u64::from_le_bytes(next(&mut input)?) as usize;
        let tau = f64::from_le_bytes(next(&mut input)?);
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| SeamError::Format("snapshot dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * len {
            return Err(SeamError::Format(format!(
                "expected {} bytes of data for {rows}x{cols}, found {}",
                8 * len,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(SnapshotMatrix {
            rows,
            cols,
            tau,
            data,
        })
    }

    /// One row per time index: `step,t,u_0,…,u_{M−1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let heads: Vec<String> = (0..self.rows).map(|i| format!("u{i}")).collect();
        writeln!(out, "step,t,{}", heads.join(","))?;
        for k in 0..self.cols {
            let vals: Vec<String> = self.column(k).iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{k},{},{}", k as f64 * self.tau, vals.join(","))?;
        }
        Ok(())
    }
}

impl<'a> SnapshotView<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.data.len().checked_div(self.rows).unwrap_or(0)
    }

    pub fn column(&self, k: usize) -> &'a [f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        self.data.chunks_exact(self.rows.max(1))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Right-hand side source for the time stepper.
#[derive(Debug, Clone)]
pub enum Forcing<'a> {
    /// Autonomous forcing assembled once.
    Constant(Vec<f64>),
    /// Reassembled at every `t_n = n τ`.
    TimeDependent { mesh: &'a Mesh, f: &'a ScalarField },
}

impl<'a> Forcing<'a> {
    pub fn new(mesh: &'a Mesh, f: &'a ScalarField) -> Result<Forcing<'a>> {
        if f.is_time_dependent() {
            Ok(Forcing::TimeDependent { mesh, f })
        } else {
            Ok(Forcing::Constant(assemble_load(mesh, f, 0.0)?.values))
        }
    }

    pub fn zero(dim: usize) -> Forcing<'static> {
        Forcing::Constant(vec![0.0; dim])
    }

    /// Load vector for global time index `step`.
    pub fn at(&self, step: usize, tau: f64) -> Result<Cow<'_, [f64]>> {
        match self {
            Forcing::Constant(v) => Ok(Cow::Borrowed(v)),
            Forcing::TimeDependent { mesh, f } => Ok(Cow::Owned(
                assemble_load(mesh, f, step as f64 * tau)?.values,
            )),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Constant(v) if v.iter().all(|&x| x == 0.0))
    }
}

/// Assembled operators for one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub initial: Vec<f64>,
}

impl Discretization {
    pub fn assemble(spec: &ProblemSpec) -> Result<Discretization> {
        let mesh = spec.build_mesh()?;
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh, &spec.alpha, &spec.c)?;
        let initial = interpolate_initial(&mesh, &spec.u0)?;
        Ok(Discretization {
            mesh,
            mass,
            stiffness,
            initial,
        })
    }

    pub fn forcing<'a>(&'a self, spec: &'a ScalarField) -> Result<Forcing<'a>> {
        Forcing::new(&self.mesh, spec)
    }
}

/// Backward-Euler system `(ℳ + τ𝒮) U_n = ℳ U_{n−1} + τ F_n`.
#[derive(Debug, Clone)]
pub struct BackwardEuler<'a> {
    mass: &'a CsrMatrix,
    system: CsrMatrix,
    tau: f64,
}

impl<'a> BackwardEuler<'a> {
    pub fn new(mass: &'a CsrMatrix, stiffness: &CsrMatrix, tau: f64) -> Result<BackwardEuler<'a>> {
        if !(tau > 0.0) {
            return Err(SeamError::InvalidArgument(format!(
                "time step must be positive, got {tau}"
            )));
        }
        if mass.dim() != stiffness.dim() {
            return Err(SeamError::InvalidArgument(
                "mass and stiffness dimensions differ".into(),
            ));
        }
        Ok(BackwardEuler {
            mass,
            system: mass.add_scaled(tau, stiffness),
            tau,
        })
    }

    /// The system matrix `ℳ + τ𝒮`.
    pub fn system(&self) -> &CsrMatrix {
        &self.system
    }

    /// Right-hand side `ℳ U_{n−1} + τ F_n`.
    pub fn rhs(&self, load: &[f64], prev: &[f64]) -> Vec<f64> {
        let mut rhs = self.mass.mul_vec(prev);
        for (r, f) in rhs.iter_mut().zip(load) {
            *r += self.tau * f;
        }
        rhs
    }

    /// Advances one step, warm-starting CG from `prev`.
    pub fn step(&self, load: &[f64], prev: &[f64]) -> Result<Vec<f64>> {
        if load.len() != prev.len() || prev.len() != self.system.dim() {
            return Err(SeamError::InvalidArgument(
                "vector dimensions do not match the operators".into(),
            ));
        }
        let rhs = self.rhs(load, prev);
        let mut next = prev.to_vec();
        cg::solve(&self.system, &rhs, &mut next, cg::DEFAULT_TOLERANCE)?;
        Ok(next)
    }
}

/// One backward-Euler step for the given operators.
pub fn backward_euler_step(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    load: &[f64],
    prev: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    BackwardEuler::new(mass, stiffness, tau)?.step(load, prev)
}

/// Runs `steps` backward-Euler steps from `initial`; returns `steps + 1` columns.
pub fn integrate(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    forcing: &Forcing<'_>,
    initial: &[f64],
    tau: f64,
    steps: usize,
) -> Result<SnapshotMatrix> {
    let stepper = BackwardEuler::new(mass, stiffness, tau)?;
    let mut snapshots = SnapshotMatrix::new(initial.len(), tau);
    snapshots.push(initial)?;
    let mut current = initial.to_vec();
    for n in 1..=steps {
        let load = forcing.at(n, tau)?;
        current = stepper.step(&load, &current)?;
        snapshots.push(&current)?;
    }
    Ok(snapshots)
}

/// High-fidelity solve of `spec` over its full time grid.
pub fn run_hifi(spec: &ProblemSpec) -> Result<(Discretization, SnapshotMatrix)> {
    let steps = spec.steps()?;
    let disc = Discretization::assemble(spec)?;
    let forcing = disc.forcing(&spec.f)?;
    let snapshots = integrate(
        &disc.mass,
        &disc.stiffness,
        &forcing,
        &disc.initial,
        spec.tau,
        steps,
    )?;
    Ok((disc, snapshots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::scenario;

    fn scalar(v: f64) -> CsrMatrix {
        CsrMatrix::diagonal(&[v])
    }

    #[test]
    fn single_node_recurrence() {
        let h = 0.5;
        let (m, s, tau) = (2.0 * h / 3.0, 2.0 / h, 1e-3);
        let mut u = vec![1.0];
        for n in 1..=50 {
            u = backward_euler_step(&scalar(m), &scalar(s), &[0.0], &u, tau).unwrap();
            let exact = (m / (m + tau * s)).powi(n);
            assert!((u[0] - exact).abs() < 1e-14 * exact.max(1.0));
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let u = backward_euler_step(&scalar(1.0), &scalar(1.0), &[0.0], &[0.0], 0.1).unwrap();
        assert_eq!(u, vec![0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(backward_euler_step(&scalar(1.0), &scalar(1.0), &[0.0], &[1.0], 0.0).is_err());
        assert!(backward_euler_step(&scalar(1.0), &scalar(1.0), &[0.0, 0.0], &[1.0], 0.1).is_err());
    }

    #[test]
    fn heat1d_shape_and_initial_column() {
        let spec = scenario("heat1d").unwrap();
        let (disc, u) = run_hifi(&spec).unwrap();
        assert_eq!((u.rows(), u.cols()), (98, 1001));
        assert_eq!(u.column(0), disc.initial.as_slice());
    }

    #[test]
    fn zero_data_gives_zero_snapshots() {
        let mut spec = scenario("s3").unwrap();
        spec.divisions = 4;
        spec.u0 = ScalarField::parse("0").unwrap();
        let (_, u) = run_hifi(&spec).unwrap();
        assert_eq!(u.cols(), 441);
        assert!(u.view().iter().all(|c| c.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn time_dependent_forcing_is_reassembled() {
        let mesh = Mesh::interval(4).unwrap();
        let f = ScalarField::parse("t").unwrap();
        let forcing = Forcing::new(&mesh, &f).unwrap();
        assert!(matches!(forcing, Forcing::TimeDependent { .. }));
        assert!((forcing.at(3, 0.5).unwrap()[0] - 1.5 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn binary_round_trip_and_truncation() {
        let u = SnapshotMatrix::from_columns(&[vec![1.0, -2.0], vec![0.5, 3.25]], 0.01).unwrap();
        let mut buf = Vec::new();
        u.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 32);
        assert_eq!(SnapshotMatrix::read_binary(buf.as_slice()).unwrap(), u);
        assert!(matches!(
            SnapshotMatrix::read_binary(&buf[..40]),
            Err(SeamError::Format(_))
        ));
    }

    #[test]
    fn csv_export() {
        let u = SnapshotMatrix::from_columns(&[vec![1.0], vec![0.5]], 0.25).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,t,u0\n0,0,1e0\n1,0.25,5e-1\n"
        );
    }
}
