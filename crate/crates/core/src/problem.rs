//! Problem definitions and the registry of reference scenarios.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SeamError};
use crate::expr::ScalarField;
use crate::mesh::Mesh;

/// Partition of the time grid into `count` segments of `length + 1` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    /// Steps per segment; each segment holds `length + 1` snapshot columns.
    pub length: usize,
    /// Number of segments minus one.
    pub extra_segments: usize,
}

impl Segmentation {
    pub fn columns_per_segment(&self) -> usize {
        self.length + 1
    }

    pub fn segment_count(&self) -> usize {
        self.extra_segments + 1
    }

    /// Total snapshot columns `(ñ+1)(n+1)`.
    pub fn total_columns(&self) -> usize {
        self.segment_count() * self.columns_per_segment()
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    pub alpha: Vec<ScalarField>,
    pub c: ScalarField,
    pub f: ScalarField,
    pub u0: ScalarField,
    pub t_final: f64,
    pub tau: f64,
    pub divisions: usize,
    pub segmentation: Option<Segmentation>,
}

impl ProblemSpec {
    /// Number of time steps `N` with `N τ = T`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.tau > 0.0 && self.tau.is_finite())
            || !(self.t_final > 0.0 && self.t_final.is_finite())
        {
            return Err(SeamError::SpecMismatch(format!(
                "T = {} and tau = {} must be positive",
                self.t_final, self.tau
            )));
        }
        let n = (self.t_final / self.tau).round();
        if n < 1.0 || (n * self.tau - self.t_final).abs() >= 1e-9 * self.t_final {
            return Err(SeamError::SpecMismatch(format!(
                "T = {} is not an integer multiple of tau = {}",
                self.t_final, self.tau
            )));
        }
        Ok(n as usize)
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match self.dimension {
            1 => Mesh::interval(self.divisions),
            2 => Mesh::square(self.divisions),
            3 => Mesh::cube(self.divisions),
            d => Err(SeamError::InvalidArgument(format!(
                "dimension must be 1, 2 or 3, got {d}"
            ))),
        }
    }

    /// Sets `T` so that the time grid holds exactly `(ñ+1)(n+1)` columns.
    pub fn fit_final_time_to_segments(&mut self) {
        if let Some(seg) = self.segmentation {
            self.t_final = (seg.total_columns() - 1) as f64 * self.tau;
        }
    }

    /// Checks structural consistency and evaluates every field on a sample grid.
    ///
    /// Returns non-fatal warnings, such as diffusion coefficients that vanish or
    /// turn negative somewhere in the closed domain.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(1..=3).contains(&self.dimension) {
            return Err(SeamError::InvalidArgument(format!(
                "dimension must be 1, 2 or 3, got {}",
                self.dimension
            )));
        }
        if self.alpha.len() != self.dimension {
            return Err(SeamError::InvalidArgument(format!(
                "expected {} diffusion entries, got {}",
                self.dimension,
                self.alpha.len()
            )));
        }
        if self.divisions < 2 {
            return Err(SeamError::InvalidArgument(format!(
                "mesh needs at least 2 divisions, got {}",
                self.divisions
            )));
        }
        let steps = self.steps()?;
        if let Some(seg) = self.segmentation {
            if steps + 1 != seg.total_columns() {
                return Err(SeamError::Divisibility {
                    columns: steps + 1,
                    segment: seg.columns_per_segment(),
                });
            }
        }

        let mut warnings = Vec::new();
        let samples = 9;
        let mut negative = vec![false; self.dimension];
        let mut vanishing = vec![false; self.dimension];
        let grid = |i: usize| i as f64 / (samples - 1) as f64;
        let axis_count = |axis: usize| if axis < self.dimension { samples } else { 1 };
        for k in 0..axis_count(2) {
            for j in 0..axis_count(1) {
                for i in 0..axis_count(0) {
                    let p = [grid(i), grid(j), grid(k)];
                    for (a, field) in self.alpha.iter().enumerate() {
                        let v = field.eval(p, 0.0)?;
                        negative[a] |= v < 0.0;
                        vanishing[a] |= v == 0.0;
                    }
                    self.c.eval(p, 0.0)?;
                    self.f.eval(p, 0.0)?;
                    self.u0.eval(p, 0.0)?;
                }
            }
        }
        for a in 0..self.dimension {
            if negative[a] {
                warnings.push(format!(
                    "alpha[{a}] = {} is negative somewhere in the domain",
                    self.alpha[a]
                ));
            } else if vanishing[a] {
                warnings.push(format!(
                    "alpha[{a}] = {} vanishes somewhere in the closed domain",
                    self.alpha[a]
                ));
            }
        }
        Ok(warnings)
    }
}

pub const SCENARIOS: [&str; 5] = ["heat1d", "s1", "s2", "s3", "heat3d"];

/// Forcing variants available per scenario; the first entry is the default.
pub fn forcing_variants(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "heat1d" | "s3" | "heat3d" => &["0"],
        "s1" => &["0", "xy"],
        "s2" => &["0", "10", "xy"],
        _ => return Err(SeamError::UnknownScenario(name.to_string())),
    })
}

/// Reference scenario with its default forcing.
pub fn scenario(name: &str) -> Result<ProblemSpec> {
    let default = forcing_variants(name)?[0];
    scenario_with_forcing(name, default)
}

/// Reference scenario with one of its listed forcing variants (`"0"`, `"10"`, `"xy"`).
///
/// Segmented scenarios get `T = ((ñ+1)(n+1) - 1) τ` so the time grid splits evenly.
pub fn scenario_with_forcing(name: &str, variant: &str) -> Result<ProblemSpec> {
    let variants = forcing_variants(name)?;
    if !variants.contains(&variant) {
        return Err(SeamError::UnknownVariant {
            scenario: name.to_string(),
            variant: variant.to_string(),
        });
    }
    let field = |s: &str| ScalarField::parse(s).expect("registry expressions are valid");
    let f = field(if variant == "xy" { "x*y" } else { variant });
    let segments = |n: usize| {
        Some(Segmentation {
            length: n,
            extra_segments: n,
        })
    };

    let mut spec = match name {
        "heat1d" => ProblemSpec {
            name: name.into(),
            dimension: 1,
            alpha: vec![field("1")],
            c: field("0"),
            f,
            u0: field("sin(4*pi*x)"),
            t_final: 0.1,
            tau: 1e-4,
            divisions: 99,
            segmentation: Some(Segmentation {
                length: 1000,
                extra_segments: 0,
            }),
        },
        "s1" => ProblemSpec {
            name: name.into(),
            dimension: 2,
            alpha: vec![field("1"), field("1")],
            c: field("1"),
            f,
            u0: field("sin(pi*x*y)"),
            t_final: 1.0,
            tau: 1e-4,
            divisions: 32,
            segmentation: segments(100),
        },
        "s2" | "s3" => ProblemSpec {
            name: name.into(),
            dimension: 2,
            alpha: vec![field("x^2"), field("y^2")],
            c: field("pi^2*(1-2*x^2*y^2)"),
            f,
            u0: field("sin(pi*x)*sin(pi*y)"),
            t_final: 1.0,
            tau: if name == "s2" { 1e-4 } else { 2.5e-3 },
            divisions: 32,
            segmentation: segments(if name == "s2" { 100 } else { 20 }),
        },
        "heat3d" => ProblemSpec {
            name: name.into(),
            dimension: 3,
            alpha: vec![field("1"), field("1"), field("1")],
            c: field("0"),
            f,
            u0: field("sin(2*pi*x)*sin(2*pi*y)*sin(2*pi*z)"),
            t_final: 1.0,
            tau: 2.5e-3,
            divisions: 32,
            segmentation: segments(20),
        },
        _ => unreachable!("checked by forcing_variants"),
    };
    spec.fit_final_time_to_segments();
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat1d_parameters() {
        let s = scenario("heat1d").unwrap();
        assert_eq!(s.tau, 1e-4);
        assert_eq!(s.steps().unwrap(), 1000);
        assert_eq!(s.divisions, 99);
        assert!((s.t_final - 0.1).abs() < 1e-15);
        assert!(s.validate().unwrap().is_empty());
    }

    #[test]
    fn s3_time_grid_matches_segments() {
        let s = scenario("s3").unwrap();
        assert_eq!(s.tau, 2.5e-3);
        assert_eq!(s.steps().unwrap() + 1, 441);
        assert!((s.t_final - 1.1).abs() < 1e-12);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn s1_initial_value() {
        let s = scenario("s1").unwrap();
        let v = s.u0.eval([0.5, 0.5, 0.0], 0.0).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.steps().unwrap() + 1, 101 * 101);
    }

    #[test]
    fn s2_warns_about_vanishing_diffusion() {
        let s = scenario_with_forcing("s2", "10").unwrap();
        let warnings = s.validate().unwrap();
        assert_eq!(warnings.len(), 2);
        assert_eq!(s.f.eval([0.3, 0.3, 0.0], 0.0).unwrap(), 10.0);
    }

    #[test]
    fn heat3d_parameters() {
        let s = scenario("heat3d").unwrap();
        assert_eq!(s.dimension, 3);
        assert_eq!(s.divisions, 32);
        assert_eq!(s.steps().unwrap(), 440);
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(
            scenario("heat2d"),
            Err(SeamError::UnknownScenario(_))
        ));
        assert!(matches!(
            scenario_with_forcing("s3", "xy"),
            Err(SeamError::UnknownVariant { .. })
        ));
    }

    #[test]
    fn rejects_incommensurate_end_time() {
        let mut s = scenario("s3").unwrap();
        s.t_final = 1.0001;
        assert!(matches!(s.steps(), Err(SeamError::SpecMismatch(_))));
        s.t_final = 1.0;
        // 401 columns do not split into 21 segments of 21
        assert!(matches!(
            s.validate(),
            Err(SeamError::Divisibility {
                columns: 401,
                segment: 21
            })
        ));
    }
}
