//! Artifact writers: CSV tables and JSON documents.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use seam_core::analysis::error_series;
use seam_core::pod::GramSpectrum;
use seam_core::{CsrMatrix, Mesh, SeamError, SeamSolution, SnapshotMatrix};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Eigenvalues listed per segment in `eigenvalues.csv`.
pub const EIGENVALUES_PER_SEGMENT: usize = 5;

/// Requested slice times; any above `T` are read as fractions of `T`.
pub const SLICE_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Collects every file written by a run.
#[derive(Debug, Default)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<OutputDir> {
        fs::create_dir_all(root).map_err(|source| CliError::Output {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Opens `name` for writing, hands it to `fill`, then flushes.
    pub fn write<F>(&mut self, name: &str, fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> seam_core::Result<()>,
    {
        let path = self.path(name);
        let io_err = |source| CliError::Output {
            path: path.clone(),
            source,
        };
        let file = File::create(&path).map_err(io_err)?;
        let mut out = BufWriter::new(file);
        fill(&mut out).map_err(|e| match e {
            SeamError::Io(source) => CliError::Output {
                path: path.clone(),
                source,
            },
            other => CliError::Core(other),
        })?;
        out.flush().map_err(io_err)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value).map_err(|e| SeamError::Io(e.into()))?;
            writeln!(out)?;
            Ok(())
        })
    }
}

/// `segment,index,eigenvalue` with segments numbered from 1.
pub fn write_eigenvalues<W: Write>(out: &mut W, spectra: &[GramSpectrum]) -> seam_core::Result<()> {
    writeln!(out, "segment,index,eigenvalue")?;
    for s in spectra {
        for (i, l) in s
            .eigenvalues
            .iter()
            .take(EIGENVALUES_PER_SEGMENT)
            .enumerate()
        {
            writeln!(out, "{},{i},{l:e}", s.segment + 1)?;
        }
    }
    Ok(())
}

/// Per-step ℳ-norms of the error and of the high-fidelity solution.
pub fn write_error_series<W: Write>(
    out: &mut W,
    hifi: &SnapshotMatrix,
    approx: &SnapshotMatrix,
    mass: &CsrMatrix,
) -> seam_core::Result<()> {
    writeln!(out, "step,t,error,reference,relative")?;
    let series = error_series(hifi.view(), approx.view(), mass)?;
    for (k, (e, r)) in series.iter().enumerate() {
        let (e, r) = (e.sqrt(), r.sqrt());
        let rel = if r > 0.0 { e / r } else { f64::NAN };
        writeln!(out, "{k},{:e},{e:e},{r:e},{rel:e}", k as f64 * hifi.tau())?;
    }
    Ok(())
}

/// `segment,start,lambda0,lambda1,a,m,alpha0` with segments numbered from 1.
pub fn write_segment_table<W: Write>(out: &mut W, seam: &SeamSolution) -> seam_core::Result<()> {
    writeln!(out, "segment,start,lambda0,lambda1,a,m,alpha0")?;
    for s in &seam.segments {
        let l1 = s.spectrum.eigenvalues.get(1).copied().unwrap_or(0.0);
        writeln!(
            out,
            "{},{},{:e},{l1:e},{:e},{:e},{:e}",
            s.index + 1,
            s.start,
            s.spectrum.lambda0(),
            s.model.system,
            s.model.mass,
            s.model.alpha0
        )?;
    }
    Ok(())
}

/// A solution slice requested at time `requested` and taken at time index `step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceInfo {
    pub file: String,
    pub requested: f64,
    pub step: usize,
    pub t: f64,
}

/// Time index for each entry of [`SLICE_TIMES`].
pub fn slice_steps(t_final: f64, tau: f64, steps: usize) -> Vec<SliceInfo> {
    SLICE_TIMES
        .iter()
        .map(|&req| {
            let t = if req <= t_final * (1.0 + 1e-12) {
                req
            } else {
                req * t_final
            };
            let step = ((t / tau).round() as usize).min(steps);
            SliceInfo {
                file: format!("slices_t{req}.csv"),
                requested: req,
                step,
                t: step as f64 * tau,
            }
        })
        .collect()
}

/// Interior-node values at one time index: `node,x[,y[,z]],hifi[,seam]`.
pub fn write_slice<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    hifi: &[f64],
    seam: Option<&[f64]>,
) -> seam_core::Result<()> {
    let axes = ["x", "y", "z"];
    let d = mesh.dimension();
    write!(out, "node,{}", axes[..d].join(","))?;
    writeln!(
        out,
        "{}",
        if seam.is_some() {
            ",hifi,seam"
        } else {
            ",hifi"
        }
    )?;
    for (i, p) in mesh.interior_nodes().iter().enumerate() {
        write!(out, "{i}")?;
        for x in &p[..d] {
            write!(out, ",{x}")?;
        }
        write!(out, ",{:e}", hifi[i])?;
        if let Some(s) = seam {
            write!(out, ",{:e}", s[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
