//! Finite-element heat solver with parallel rank-1 model reduction.
//!
//! The pipeline is: build a uniform simplicial [`mesh`], parse coefficient
//! fields with [`expr`], assemble P1 operators in [`assembly`], march with
//! backward Euler in [`hifi`], then split the snapshots into segments and
//! replace each by a scalar recurrence in [`seam`]. [`analysis`] measures how
//! close each segment is to rank one.
//!
//! ```
//! use seam_core::analysis::relative_l2_error;
//! use seam_core::{run_hifi, run_parallel_seam, scenario};
//!
//! # fn main() -> seam_core::Result<()> {
//! let mut spec = scenario("s3")?;
//! spec.divisions = 8;
//! let (disc, snapshots) = run_hifi(&spec)?;
//! let forcing = disc.forcing(&spec.f)?;
//! let n = spec.segmentation.unwrap().length;
//! let seam = run_parallel_seam(&snapshots, n, &disc.mass, &disc.stiffness, &forcing)?;
//! let error = relative_l2_error(&snapshots, &seam, &disc.mass, spec.tau)?;
//! assert!(error < 1.0);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod assembly;
pub mod cg;
pub mod dense;
pub mod error;
pub mod expr;
pub mod hifi;
pub mod mesh;
pub mod pod;
pub mod problem;
pub mod seam;
pub mod sparse;

pub use error::{Result, SeamError};
pub use expr::{parse_expression, ScalarField};
pub use hifi::{run_hifi, Discretization, Forcing, SnapshotMatrix, SnapshotView};
pub use mesh::Mesh;
pub use problem::{scenario, scenario_with_forcing, ProblemSpec, Segmentation};
pub use seam::{run_parallel_seam, SeamSolution};
pub use sparse::CsrMatrix;
