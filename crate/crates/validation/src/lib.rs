//! Shared pieces of the acceptance suite: pinned tolerances, a scenario
//! runner that goes through the same configuration path as the `seam`
//! command, and a PASS/FAIL reporter.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use seam_cli::config::{resolve, ResolvedProblem};
use seam_cli::{CliResult, Mode, RunArgs};
use seam_core::analysis::relative_l2_error;
use seam_core::hifi::integrate;
use seam_core::pod::projection_residual;
use seam_core::seam::{parallel_offline, parallel_online};
use seam_core::{Discretization, SeamSolution, SnapshotMatrix};

pub mod tolerances {
    /// Criterion 1.
    pub const HEAT1D_LAMBDA0: f64 = 1007.63;
    pub const HEAT1D_LAMBDA0_REL: f64 = 0.01;
    pub const HEAT1D_LAMBDA1_MAX: f64 = 1e-6;
    pub const HEAT1D_RUNTIME_S: f64 = 30.0;

    /// Criteria 1, 3 and 4.
    pub const SEAM_ERROR_MAX: f64 = 1e-6;

    /// Criterion 2: `(scenario, forcing, first λ₀, tolerance, last λ₀, tolerance)`.
    pub const DECAY: [(&str, &str, f64, f64, f64, f64); 3] = [
        ("s1", "0", 3376.2, 0.02, 38.0, 0.05),
        ("s2", "10", 2389.5, 0.05, 1258.0, 0.05),
        ("s3", "0", 4495.9, 0.05, 328.3, 0.05),
    ];
    pub const S2_XY_LAMBDA0: f64 = 2373.15;
    pub const S2_XY_LAMBDA0_REL: f64 = 0.05;
    pub const S2_XY_LAMBDA1: f64 = 2.56e-4;
    pub const S2_XY_LAMBDA1_REL: f64 = 0.25;

    /// Criterion 4.
    pub const HEAT3D_RUNTIME_S: f64 = 600.0;
    pub const HEAT3D_REDUCTION: &str = "3375:1";

    /// Criterion 5, relative to the segment's trace.
    pub const PROJECTION_IDENTITY_REL: f64 = 1e-10;

    /// Criterion 6.
    pub const HW_SLACK: f64 = 1e-9;
    pub const HW_EQUALITY: f64 = 1e-12;

    /// Criterion 7.
    pub const SWEEP_TAUS: [f64; 3] = [4e-4, 2e-4, 1e-4];
    pub const SWEEP_SEGMENT: usize = 100;
    pub const TAIL_SQ_MAX: f64 = 1e-12;

    /// Criterion 8.
    pub const EIGEN_CASES: usize = 500;
    pub const EIGEN_MAX_DIM: usize = 6;
    pub const EIGEN_ERROR_MAX: f64 = 1e-8;
    pub const RECURRENCE_STEPS: usize = 1000;
    pub const RECURRENCE_ERROR_MAX: f64 = 1e-12;

    /// Criterion 9.
    pub const BENCH_SPEEDUP_MIN: f64 = 10.0;
    pub const BENCH_REPEATS: usize = 3;
}

/// One scenario taken through the high-fidelity solve and parallel SEAM.
pub struct ScenarioRun {
    pub label: String,
    pub problem: ResolvedProblem,
    pub disc: Discretization,
    pub hifi: SnapshotMatrix,
    pub solution: SeamSolution,
    pub error: f64,
    pub elapsed_s: f64,
}

impl ScenarioRun {
    /// Resolves `scenario` with an optional forcing variant exactly as `seam run` would.
    pub fn execute(scenario: &str, forcing: Option<&str>) -> CliResult<ScenarioRun> {
        let mut args = RunArgs::new(scenario, Mode::ParallelSeam, Path::new("unused"));
        args.f = forcing.map(str::to_string);
        let problem = resolve(&args)?;
        let start = Instant::now();
        let spec = &problem.spec;
        let disc = Discretization::assemble(spec)?;
        let load = disc.forcing(&spec.f)?;
        let mut hifi = integrate(
            &disc.mass,
            &disc.stiffness,
            &load,
            &disc.initial,
            spec.tau,
            spec.steps()?,
        )?;
        hifi.truncate(problem.columns);
        let n = problem.segmentation.length;
        let offline = parallel_offline(&hifi, n, &disc.mass, &disc.stiffness, &load)?;
        let solution = parallel_online(offline, hifi.rows(), spec.tau);
        let error = relative_l2_error(&hifi, &solution, &disc.mass, spec.tau)?;
        let elapsed_s = start.elapsed().as_secs_f64();
        let label = match forcing {
            Some(f) => format!("{scenario} f={f}"),
            None => scenario.to_string(),
        };
        Ok(ScenarioRun {
            label,
            problem,
            disc,
            hifi,
            solution,
            error,
            elapsed_s,
        })
    }

    pub fn lambda0(&self) -> Vec<f64> {
        self.solution
            .segments
            .iter()
            .map(|s| s.spectrum.lambda0())
            .collect()
    }

    /// Worst `|residual − tail| / trace` of the rank-1 projection over all segments.
    pub fn projection_identity_gap(&self) -> f64 {
        let n = self.problem.segmentation.length;
        self.solution
            .segments
            .iter()
            .map(|s| {
                let block = self.hifi.columns(s.start..s.start + n + 1);
                let residual = projection_residual(block, &s.model.basis);
                (residual - s.spectrum.tail_sum()).abs() / s.spectrum.trace
            })
            .fold(0.0, f64::max)
    }

    /// Largest `Σ_{k≥1} λ_k²` over all segments.
    pub fn max_tail_sum_sq(&self) -> f64 {
        self.solution
            .segments
            .iter()
            .map(|s| s.spectrum.tail_sum_sq())
            .fold(0.0, f64::max)
    }
}

/// Outcome of a single measured quantity.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// A numbered criterion made of one or more checks.
#[derive(Debug, Clone)]
pub struct Criterion {
    pub number: usize,
    pub title: String,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn new(number: usize, title: &str) -> Criterion {
        Criterion {
            number,
            title: title.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&mut self, label: &str, passed: bool, detail: String) -> &mut Criterion {
        self.checks.push(Check {
            label: label.to_string(),
            passed,
            detail,
        });
        self
    }

    /// `|measured − expected| ≤ rel · |expected|`.
    pub fn relative(
        &mut self,
        label: &str,
        measured: f64,
        expected: f64,
        rel: f64,
    ) -> &mut Criterion {
        let deviation = (measured - expected).abs() / expected.abs();
        self.check(
            label,
            deviation <= rel,
            format!("measured {measured:.6e}, expected {expected:.6e} within {rel:e} (deviation {deviation:.3e})"),
        )
    }

    pub fn at_most(&mut self, label: &str, measured: f64, bound: f64) -> &mut Criterion {
        self.check(
            label,
            measured <= bound,
            format!("measured {measured:.6e}, bound {bound:.1e}"),
        )
    }

    pub fn at_least(&mut self, label: &str, measured: f64, bound: f64) -> &mut Criterion {
        self.check(
            label,
            measured >= bound,
            format!("measured {measured:.6e}, required {bound:.1e}"),
        )
    }

    /// Check lines followed by the single PASS/FAIL line for the criterion.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "miss" };
            let _ = writeln!(out, "    {mark} {}: {}", c.label, c.detail);
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(
            out,
            "{verdict} criterion {}: {} ({passed}/{} checks)",
            self.number,
            self.title,
            self.checks.len()
        );
        out
    }
}

/// `true` when every consecutive pair strictly decreases.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
