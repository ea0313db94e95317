//! Command-line arguments, JSON config files and their resolution into a [`ProblemSpec`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use seam_core::problem::{forcing_variants, scenario_with_forcing};
use seam_core::{ProblemSpec, ScalarField, SeamError, Segmentation};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Mesh divisions used for heat3d unless `--large` is given.
pub const DESK_SCALE_3D: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "seam",
    version,
    about = "Heat-equation solver with parallel rank-1 model reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario or a problem described in a JSON file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// High-fidelity solve only.
    Hifi,
    /// SEAM with segments processed one after another.
    Seam,
    /// SEAM with segments processed concurrently.
    ParallelSeam,
    /// Snapshot spectra and diagnostics without reduction.
    Eigs,
    /// Timing of the high-fidelity solve against the online replay.
    Bench,
    /// Randomized Hoffman–Wielandt check of the eigensolver.
    HwSelftest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Hifi => "hifi",
            Mode::Seam => "seam",
            Mode::ParallelSeam => "parallel-seam",
            Mode::Eigs => "eigs",
            Mode::Bench => "bench",
            Mode::HwSelftest => "hw-selftest",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Named scenario: heat1d, s1, s2, s3 or heat3d.
    #[arg(long)]
    pub scenario: Option<String>,
    /// JSON problem or scenario description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "parallel-seam")]
    pub mode: Mode,
    /// Mesh divisions per axis.
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Time step.
    #[arg(long = "tau")]
    pub tau: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Steps per SEAM segment.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Forcing variant of the scenario (for example 0, 10 or xy).
    #[arg(long = "f")]
    pub f: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Snapshot file to reuse; written after the solve when it does not exist.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Allow full-size 3D meshes.
    #[arg(long)]
    pub large: bool,
    /// Repetitions for bench mode.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Also write the mesh and the assembled operators.
    #[arg(long)]
    pub dump_operators: bool,
    /// Drop trailing columns that do not fill a whole segment instead of failing.
    #[arg(long)]
    pub truncate: bool,
}

impl RunArgs {
    pub fn new(scenario: &str, mode: Mode, out: &Path) -> RunArgs {
        RunArgs {
            scenario: Some(scenario.to_string()),
            config: None,
            mode,
            m: None,
            tau: None,
            t_final: None,
            n: None,
            f: None,
            out: out.to_path_buf(),
            snapshots: None,
            threads: None,
            large: false,
            repeats: 3,
            dump_operators: false,
            truncate: false,
        }
    }
}

/// Overrides shared by the command line and scenario config files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<usize>,
    pub tau: Option<f64>,
    pub t_final: Option<f64>,
    pub n: Option<usize>,
    pub f: Option<String>,
}

impl Overrides {
    /// Fields set in `other` win.
    fn merged(&self, other: &Overrides) -> Overrides {
        Overrides {
            m: other.m.or(self.m),
            tau: other.tau.or(self.tau),
            t_final: other.t_final.or(self.t_final),
            n: other.n.or(self.n),
            f: other.f.clone().or_else(|| self.f.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: String,
    pub m: Option<usize>,
    pub tau: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub n: Option<usize>,
    pub f: Option<String>,
}

impl ScenarioFile {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            m: self.m,
            tau: self.tau,
            t_final: self.t_final,
            n: self.n,
            f: self.f.clone(),
        }
    }
}

/// A fully explicit problem; fields are expressions in `x`, `y`, `z`, `t`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitFile {
    pub name: String,
    pub dimension: usize,
    pub alpha: Vec<String>,
    pub c: String,
    pub f: String,
    pub u0: String,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub tau: f64,
    pub m: usize,
    /// Steps per segment; the whole trajectory when absent.
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ConfigFile {
    Scenario(ScenarioFile),
    Explicit(ExplicitFile),
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<ConfigFile> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: format!("expected a scenario with overrides or a full problem ({e})"),
        })
    }
}

/// A problem ready to run plus the segment layout used by SEAM.
#[derive(Debug, Clone)]
pub struct ResolvedProblem {
    pub spec: ProblemSpec,
    pub segmentation: Segmentation,
    /// Snapshot columns covered by the segments; below `steps + 1` only when truncating.
    pub columns: usize,
    pub warnings: Vec<String>,
}

fn cli_overrides(args: &RunArgs) -> Overrides {
    Overrides {
        m: args.m,
        tau: args.tau,
        t_final: args.t_final,
        n: args.n,
        f: args.f.clone(),
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Splits `steps + 1` columns into segments of `n + 1`, optionally
/// dropping the incomplete tail.
fn segmentation_for(steps: usize, n: usize, truncate: bool) -> CliResult<Segmentation> {
    if n == 0 {
        return Err(CliError::Config(
            "segment length n must be at least 1".into(),
        ));
    }
    let columns = steps + 1;
    let whole = columns / (n + 1);
    if whole == 0 || (!columns.is_multiple_of(n + 1) && !truncate) {
        return Err(SeamError::Divisibility {
            columns,
            segment: n + 1,
        }
        .into());
    }
    Ok(Segmentation {
        length: n,
        extra_segments: whole - 1,
    })
}

fn apply_overrides(
    mut spec: ProblemSpec,
    o: &Overrides,
    large: bool,
    truncate: bool,
) -> CliResult<ResolvedProblem> {
    let base = spec.segmentation;
    if let Some(m) = o.m {
        spec.divisions = m;
    } else if spec.dimension == 3 && !large {
        spec.divisions = spec.divisions.min(DESK_SCALE_3D);
    }
    if spec.dimension == 3 && spec.divisions > DESK_SCALE_3D && !large {
        return Err(CliError::Config(format!(
            "3D mesh with m = {} needs --large (default is m = {DESK_SCALE_3D})",
            spec.divisions
        )));
    }
    if let Some(tau) = o.tau {
        spec.tau = positive("tau", tau)?;
    }
    let multi_segment = base.is_some_and(|s| s.extra_segments > 0);
    match o.t_final {
        Some(t) => spec.t_final = positive("T", t)?,
        None if multi_segment => {
            let mut seg = base.expect("checked above");
            if let Some(n) = o.n {
                seg.length = n;
            }
            spec.segmentation = Some(seg);
            spec.fit_final_time_to_segments();
        }
        None => {}
    }
    let steps = spec.steps()?;
    let length =
        o.n.or_else(|| base.filter(|s| s.extra_segments > 0).map(|s| s.length))
            .unwrap_or(steps);
    let segmentation = segmentation_for(steps, length, truncate)?;
    let columns = segmentation.total_columns();
    let exact = columns == steps + 1;
    spec.segmentation = exact.then_some(segmentation);
    let mut warnings = spec.validate()?;
    if !exact {
        warnings.push(format!(
            "{} trailing snapshot columns do not fill a segment and are dropped",
            steps + 1 - columns
        ));
    }
    Ok(ResolvedProblem {
        spec,
        segmentation,
        columns,
        warnings,
    })
}

fn scenario_spec(name: &str, overrides: &Overrides, args: &RunArgs) -> CliResult<ResolvedProblem> {
    let variants = forcing_variants(name)?;
    let variant = overrides.f.as_deref().unwrap_or(variants[0]);
    let spec = scenario_with_forcing(name, variant)?;
    apply_overrides(spec, overrides, args.large, args.truncate)
}

fn explicit_spec(
    file: &ExplicitFile,
    overrides: &Overrides,
    args: &RunArgs,
) -> CliResult<ResolvedProblem> {
    let field = |s: &str| ScalarField::parse(s);
    let mut f = field(&file.f)?;
    if let Some(text) = &overrides.f {
        f = field(text)?;
    }
    let spec = ProblemSpec {
        name: file.name.clone(),
        dimension: file.dimension,
        alpha: file
            .alpha
            .iter()
            .map(|a| field(a))
            .collect::<Result<_, _>>()?,
        c: field(&file.c)?,
        f,
        u0: field(&file.u0)?,
        t_final: positive("T", file.t_final)?,
        tau: positive("tau", file.tau)?,
        divisions: file.m,
        segmentation: None,
    };
    let defaults = Overrides {
        n: file.n,
        ..Overrides::default()
    };
    apply_overrides(spec, &defaults.merged(overrides), args.large, args.truncate)
}

/// Resolves the problem named on the command line, with overrides applied
/// and validated before any compute happens.
pub fn resolve(args: &RunArgs) -> CliResult<ResolvedProblem> {
    let cli = cli_overrides(args);
    match (&args.scenario, &args.config) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either --scenario or --config, not both".into(),
        )),
        (None, None) => Err(CliError::Config(
            "one of --scenario or --config is required".into(),
        )),
        (Some(name), None) => scenario_spec(name, &cli, args),
        (None, Some(path)) => match ConfigFile::load(path)? {
            ConfigFile::Scenario(file) => {
                scenario_spec(&file.scenario, &file.overrides().merged(&cli), args)
            }
            ConfigFile::Explicit(file) => explicit_spec(&file, &cli, args),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(scenario: &str) -> RunArgs {
        RunArgs::new(scenario, Mode::ParallelSeam, Path::new("unused"))
    }

    #[test]
    fn heat3d_defaults_to_desk_scale() {
        let r = resolve(&args("heat3d")).unwrap();
        assert_eq!(r.spec.divisions, 16);
        assert_eq!(r.segmentation.length, 20);
        assert_eq!(r.segmentation.segment_count(), 21);

        let mut big = args("heat3d");
        big.m = Some(32);
        assert!(matches!(resolve(&big), Err(CliError::Config(_))));
        big.large = true;
        assert_eq!(resolve(&big).unwrap().spec.divisions, 32);
    }

    #[test]
    fn heat1d_is_one_segment() {
        let r = resolve(&args("heat1d")).unwrap();
        assert_eq!(r.segmentation.length, 1000);
        assert_eq!(r.segmentation.segment_count(), 1);
    }

    #[test]
    fn tau_override_keeps_segment_layout() {
        let mut a = args("s3");
        a.tau = Some(1e-3);
        let r = resolve(&a).unwrap();
        assert_eq!(r.segmentation.length, 20);
        assert_eq!(r.segmentation.segment_count(), 21);
        assert!((r.spec.t_final - 0.44).abs() < 1e-12);
    }

    #[test]
    fn explicit_final_time_must_split_evenly() {
        let mut a = args("heat1d");
        a.tau = Some(4e-4);
        a.n = Some(100);
        assert_eq!(resolve(&a).unwrap_err().exit_code(), 4);
        a.t_final = Some(0.04);
        let r = resolve(&a).unwrap();
        assert_eq!(r.spec.steps().unwrap(), 100);
        assert_eq!(r.segmentation.segment_count(), 1);
    }

    #[test]
    fn truncation_drops_the_incomplete_tail() {
        let mut a = args("s3");
        a.t_final = Some(1.0);
        assert_eq!(resolve(&a).unwrap_err().exit_code(), 4);
        a.truncate = true;
        let r = resolve(&a).unwrap();
        assert_eq!(r.spec.steps().unwrap(), 400);
        assert_eq!(r.segmentation.segment_count(), 19);
        assert_eq!(r.columns, 399);
        assert!(r.warnings.iter().any(|w| w.contains("2 trailing")));
    }

    #[test]
    fn bad_names_are_config_errors() {
        assert_eq!(resolve(&args("s9")).unwrap_err().exit_code(), 2);
        let mut a = args("s1");
        a.f = Some("10".into());
        assert_eq!(resolve(&a).unwrap_err().exit_code(), 2);
        let mut a = args("s1");
        a.tau = Some(-1.0);
        assert_eq!(resolve(&a).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn config_file_forms() {
        let scenario: ConfigFile =
            serde_json::from_str(r#"{"scenario": "s2", "f": "xy", "m": 8}"#).unwrap();
        assert!(matches!(&scenario, ConfigFile::Scenario(s) if s.m == Some(8)));
        let explicit: ConfigFile = serde_json::from_str(
            r#"{"name": "box", "dimension": 2, "alpha": ["1", "1"], "c": "0", "f": "0",
                "u0": "sin(pi*x)*sin(pi*y)", "T": 0.01, "tau": 0.001, "m": 8, "n": 10}"#,
        )
        .unwrap();
        let ConfigFile::Explicit(file) = explicit else {
            panic!("expected an explicit problem");
        };
        let r = explicit_spec(&file, &Overrides::default(), &args("unused")).unwrap();
        assert_eq!(r.segmentation.length, 10);
        assert_eq!(r.spec.steps().unwrap(), 10);
        assert!(serde_json::from_str::<ConfigFile>(r#"{"scenario": "s1", "bogus": 1}"#).is_err());
    }
}
