//! Timing harness: high-fidelity solve against the SEAM online replay.

use std::time::Instant;

use seam_core::hifi::integrate;
use seam_core::seam::{parallel_offline, parallel_online};
use seam_core::{Discretization, ProblemSpec, Segmentation, SnapshotMatrix};
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Samples {
    pub samples_s: Vec<f64>,
    pub median_s: f64,
}

impl Samples {
    pub fn new(samples_s: Vec<f64>) -> Samples {
        let median_s = median(&samples_s);
        Samples {
            samples_s,
            median_s,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Machine {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub worker_threads: usize,
    pub cpu_model: Option<String>,
}

impl Machine {
    pub fn detect() -> Machine {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|info| {
                info.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split(':').nth(1))
                    .map(|s| s.trim().to_string())
            });
        Machine {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            worker_threads: rayon::current_num_threads(),
            cpu_model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub problem: String,
    pub dofs: usize,
    pub steps: usize,
    pub repeats: usize,
    /// Backward-Euler solve over the full time grid.
    pub hifi: Samples,
    /// Scalar recurrences plus reconstruction of every column.
    pub online: Samples,
    pub offline_s: f64,
    /// `hifi.median_s / online.median_s`.
    pub speedup: f64,
    pub machine: Machine,
}

pub fn run_bench(
    spec: &ProblemSpec,
    disc: &Discretization,
    segmentation: Segmentation,
    repeats: usize,
) -> CliResult<BenchReport> {
    let steps = spec.steps()?;
    let forcing = disc.forcing(&spec.f)?;
    let mut hifi_samples = Vec::with_capacity(repeats);
    let mut snapshots = SnapshotMatrix::new(0, spec.tau);
    for _ in 0..repeats {
        let start = Instant::now();
        snapshots = integrate(
            &disc.mass,
            &disc.stiffness,
            &forcing,
            &disc.initial,
            spec.tau,
            steps,
        )?;
        hifi_samples.push(start.elapsed().as_secs_f64());
    }

    snapshots.truncate(segmentation.total_columns());
    let start = Instant::now();
    let offline = parallel_offline(
        &snapshots,
        segmentation.length,
        &disc.mass,
        &disc.stiffness,
        &forcing,
    )?;
    let offline_s = start.elapsed().as_secs_f64();

    let mut online_samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let models = offline.clone();
        let start = Instant::now();
        let replay = parallel_online(models, snapshots.rows(), spec.tau).to_snapshots();
        online_samples.push(start.elapsed().as_secs_f64());
        debug_assert_eq!(replay.cols(), snapshots.cols());
    }

    let hifi = Samples::new(hifi_samples);
    let online = Samples::new(online_samples);
    Ok(BenchReport {
        problem: spec.name.clone(),
        dofs: disc.mass.dim(),
        steps,
        repeats,
        speedup: hifi.median_s / online.median_s,
        hifi,
        online,
        offline_s,
        machine: Machine::detect(),
    })
}
