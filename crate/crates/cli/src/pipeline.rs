//! Orchestration of a run: assemble, solve, reduce, analyse, write.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use seam_core::analysis::{
    check_time_step_assumption, operator_norm_a, relative_l2_error, spectral_report,
    SpectralReport, TimeStepCheck,
};
use seam_core::hifi::integrate;
use seam_core::pod::{segment_spectrum, GramSpectrum};
use seam_core::seam::{parallel_offline, parallel_online};
use seam_core::{Discretization, SeamSolution, SnapshotMatrix};
use serde::Serialize;

use crate::bench::{run_bench, BenchReport};
use crate::config::{resolve, Mode, ResolvedProblem, RunArgs};
use crate::error::{CliError, CliResult};
use crate::output::{
    slice_steps, write_eigenvalues, write_error_series, write_segment_table, write_slice,
    OutputDir, SliceInfo,
};
use crate::selftest::{run_hw_selftest, HwSelftestReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub assembly_s: f64,
    pub hifi_s: f64,
    pub seam_offline_s: Option<f64>,
    pub seam_online_s: Option<f64>,
    pub analysis_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSummary {
    /// Numbered from 1.
    pub segment: usize,
    pub start_step: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    /// `Σ_{j≥1} λ_j`.
    pub tail_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub problem: String,
    pub mode: String,
    pub dimension: usize,
    pub divisions: usize,
    pub dofs: usize,
    pub reduced_dofs: usize,
    pub reduction: String,
    pub tau: f64,
    pub t_final: f64,
    pub steps: usize,
    pub segment_length: usize,
    pub segment_count: usize,
    pub threads: usize,
    pub timings: Timings,
    pub error_l2: Option<f64>,
    pub norm_a: Option<f64>,
    pub time_step: Option<TimeStepCheck>,
    pub lambda0_first: Option<f64>,
    pub lambda0_last: Option<f64>,
    pub segments: Vec<SegmentSummary>,
    pub slices: Vec<SliceInfo>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

/// Everything a run produced, for callers that drive the pipeline in-process.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: Option<RunSummary>,
    pub report: Option<SpectralReport>,
    pub bench: Option<BenchReport>,
    pub selftest: Option<HwSelftestReport>,
}

fn seconds(since: Instant) -> f64 {
    since.elapsed().as_secs_f64()
}

fn load_or_solve(
    args: &RunArgs,
    problem: &ResolvedProblem,
    disc: &Discretization,
) -> CliResult<(SnapshotMatrix, f64)> {
    let spec = &problem.spec;
    let steps = spec.steps()?;
    if let Some(path) = args.snapshots.as_deref().filter(|p| p.exists()) {
        let file = File::open(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let snapshots = SnapshotMatrix::read_binary(BufReader::new(file))?;
        let matches = snapshots.rows() == disc.mass.dim()
            && snapshots.cols() == steps + 1
            && (snapshots.tau() - spec.tau).abs() <= 1e-12 * spec.tau;
        if !matches {
            return Err(CliError::Config(format!(
                "snapshot file {} holds {}x{} columns with tau = {}, the problem needs {}x{} with tau = {}",
                path.display(),
                snapshots.rows(),
                snapshots.cols(),
                snapshots.tau(),
                disc.mass.dim(),
                steps + 1,
                spec.tau
            )));
        }
        return Ok((snapshots, 0.0));
    }
    let forcing = disc.forcing(&spec.f)?;
    let start = Instant::now();
    let snapshots = integrate(
        &disc.mass,
        &disc.stiffness,
        &forcing,
        &disc.initial,
        spec.tau,
        steps,
    )?;
    let elapsed = seconds(start);
    if let Some(path) = &args.snapshots {
        write_snapshot_file(path, &snapshots)?;
    }
    Ok((snapshots, elapsed))
}

fn write_snapshot_file(path: &Path, snapshots: &SnapshotMatrix) -> CliResult<()> {
    let file = File::create(path).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })?;
    snapshots.write_binary(std::io::BufWriter::new(file))?;
    Ok(())
}

fn segment_summaries(spectra: &[GramSpectrum], segment_length: usize) -> Vec<SegmentSummary> {
    spectra
        .iter()
        .map(|s| SegmentSummary {
            segment: s.segment + 1,
            start_step: s.segment * (segment_length + 1),
            lambda0: s.lambda0(),
            lambda1: s.eigenvalues.get(1).copied().unwrap_or(0.0),
            tail_sum: s.tail_sum(),
        })
        .collect()
}

fn base_summary(
    args: &RunArgs,
    problem: &ResolvedProblem,
    disc: &Discretization,
) -> CliResult<RunSummary> {
    let spec = &problem.spec;
    let dofs = disc.mass.dim();
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        problem: spec.name.clone(),
        mode: args.mode.name().to_string(),
        dimension: spec.dimension,
        divisions: spec.divisions,
        dofs,
        reduced_dofs: 1,
        reduction: format!("{dofs}:1"),
        tau: spec.tau,
        t_final: spec.t_final,
        steps: spec.steps()?,
        segment_length: problem.segmentation.length,
        segment_count: problem.segmentation.segment_count(),
        threads: rayon::current_num_threads(),
        timings: Timings::default(),
        error_l2: None,
        norm_a: None,
        time_step: None,
        lambda0_first: None,
        lambda0_last: None,
        segments: Vec::new(),
        slices: Vec::new(),
        warnings: problem.warnings.clone(),
        files: Vec::new(),
    })
}

fn write_slices(
    out: &mut OutputDir,
    problem: &ResolvedProblem,
    disc: &Discretization,
    hifi: &SnapshotMatrix,
    seam: Option<&SeamSolution>,
) -> CliResult<Vec<SliceInfo>> {
    let spec = &problem.spec;
    let slices = slice_steps(spec.t_final, spec.tau, hifi.cols() - 1);
    for s in &slices {
        let reduced = seam.map(|sol| sol.column(s.step));
        out.write(&s.file, |w| {
            write_slice(w, &disc.mesh, hifi.column(s.step), reduced.as_deref())
        })?;
    }
    Ok(slices)
}

fn analyse(
    disc: &Discretization,
    hifi: &SnapshotMatrix,
    spectra: &[GramSpectrum],
    segment_length: usize,
) -> CliResult<SpectralReport> {
    let norm_a = operator_norm_a(&disc.mass, &disc.stiffness)?;
    Ok(spectral_report(hifi, spectra, segment_length, norm_a))
}

fn run_problem(
    args: &RunArgs,
    problem: &ResolvedProblem,
    out: &mut OutputDir,
) -> CliResult<RunOutcome> {
    let total = Instant::now();
    let spec = &problem.spec;
    let segment_length = problem.segmentation.length;

    let start = Instant::now();
    let disc = Discretization::assemble(spec)?;
    let assembly_s = seconds(start);
    let mut summary = base_summary(args, problem, &disc)?;
    summary.timings.assembly_s = assembly_s;

    if args.dump_operators {
        out.write("mesh.csv", |w| disc.mesh.write_csv(w))?;
        out.write("mass.mtx", |w| disc.mass.write_matrix_market(w))?;
        out.write("stiffness.mtx", |w| disc.stiffness.write_matrix_market(w))?;
    }

    if args.mode == Mode::Bench {
        let bench = run_bench(spec, &disc, problem.segmentation, args.repeats)?;
        summary.timings.hifi_s = bench.hifi.median_s;
        summary.timings.seam_offline_s = Some(bench.offline_s);
        summary.timings.seam_online_s = Some(bench.online.median_s);
        summary.timings.total_s = seconds(total);
        out.write_json("bench.json", &bench)?;
        summary.files = out.written().to_vec();
        summary.files.push("summary.json".into());
        out.write_json("summary.json", &summary)?;
        return Ok(RunOutcome {
            summary: Some(summary),
            report: None,
            bench: Some(bench),
            selftest: None,
        });
    }

    let (mut hifi, hifi_s) = load_or_solve(args, problem, &disc)?;
    hifi.truncate(problem.columns);
    summary.timings.hifi_s = hifi_s;
    out.write("snapshots.bin", |w| hifi.write_binary(w))?;

    let mut report = None;
    let mut seam = None;
    match args.mode {
        Mode::Hifi => {}
        Mode::Eigs => {
            let start = Instant::now();
            let per_segment = segment_length + 1;
            let spectra = (0..problem.segmentation.segment_count())
                .into_par_iter()
                .map(|i| segment_spectrum(hifi.columns(i * per_segment..(i + 1) * per_segment), i))
                .collect::<seam_core::Result<Vec<_>>>()?;
            report = Some(analyse(&disc, &hifi, &spectra, segment_length)?);
            summary.timings.analysis_s = Some(seconds(start));
            summary.segments = segment_summaries(&spectra, segment_length);
            out.write("eigenvalues.csv", |w| write_eigenvalues(w, &spectra))?;
        }
        Mode::Seam | Mode::ParallelSeam => {
            let forcing = disc.forcing(&spec.f)?;
            let reduce = || -> CliResult<(SeamSolution, f64, f64)> {
                let start = Instant::now();
                let offline =
                    parallel_offline(&hifi, segment_length, &disc.mass, &disc.stiffness, &forcing)?;
                let offline_s = seconds(start);
                let start = Instant::now();
                let solution = parallel_online(offline, hifi.rows(), hifi.tau());
                Ok((solution, offline_s, seconds(start)))
            };
            let (solution, offline_s, online_s) = if args.mode == Mode::Seam {
                serial_pool()?.install(reduce)?
            } else {
                reduce()?
            };
            summary.timings.seam_offline_s = Some(offline_s);
            summary.timings.seam_online_s = Some(online_s);

            let start = Instant::now();
            let spectra: Vec<GramSpectrum> = solution
                .segments
                .iter()
                .map(|s| s.spectrum.clone())
                .collect();
            summary.error_l2 = Some(relative_l2_error(&hifi, &solution, &disc.mass, spec.tau)?);
            report = Some(analyse(&disc, &hifi, &spectra, segment_length)?);
            summary.timings.analysis_s = Some(seconds(start));
            summary.segments = segment_summaries(&spectra, segment_length);

            let approx = solution.to_snapshots();
            out.write("eigenvalues.csv", |w| write_eigenvalues(w, &spectra))?;
            out.write("error.csv", |w| {
                write_error_series(w, &hifi, &approx, &disc.mass)
            })?;
            out.write("seam.bin", |w| approx.write_binary(w))?;
            out.write("seam_segments.csv", |w| write_segment_table(w, &solution))?;
            seam = Some(solution);
        }
        Mode::Bench | Mode::HwSelftest => unreachable!("handled before the solve"),
    }

    if let Some(r) = &report {
        summary.norm_a = Some(r.norm_a);
        summary.time_step = Some(check_time_step_assumption(spec.tau, r.norm_a));
        let mut numbered = r.clone();
        numbered.segments.iter_mut().for_each(|s| s.segment += 1);
        out.write_json("report.json", &numbered)?;
    }
    summary.lambda0_first = summary.segments.first().map(|s| s.lambda0);
    summary.lambda0_last = summary.segments.last().map(|s| s.lambda0);
    summary.slices = write_slices(out, problem, &disc, &hifi, seam.as_ref())?;
    summary.timings.total_s = seconds(total);
    summary.files = out.written().to_vec();
    summary.files.push("summary.json".into());
    out.write_json("summary.json", &summary)?;
    Ok(RunOutcome {
        summary: Some(summary),
        report,
        bench: None,
        selftest: None,
    })
}

fn serial_pool() -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

/// Runs one `run` invocation. Configuration is fully resolved before the
/// output directory is created, so invalid input leaves no files behind.
pub fn run(args: &RunArgs) -> CliResult<RunOutcome> {
    if args.repeats == 0 {
        return Err(CliError::Config("--repeats must be at least 1".into()));
    }
    if args.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let problem = if args.mode == Mode::HwSelftest {
        None
    } else {
        Some(resolve(args)?)
    };
    let body = || -> CliResult<RunOutcome> {
        let mut out = OutputDir::create(&args.out)?;
        match &problem {
            Some(problem) => run_problem(args, problem, &mut out),
            None => {
                let report = run_hw_selftest();
                out.write_json("hw_selftest.json", &report)?;
                Ok(RunOutcome {
                    summary: None,
                    report: None,
                    bench: None,
                    selftest: Some(report),
                })
            }
        }
    };
    match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?
            .install(body),
        None => body(),
    }
}
