//! Continuous piecewise-linear finite elements on interior nodes.
//!
//! Constant-coefficient integrals are exact. Variable coefficients (`α`, `c`,
//! `f`) are frozen at the element centroid. Boundary nodes carry the
//! homogeneous Dirichlet value and are dropped from every operator.

use crate::error::Result;
use crate::expr::ScalarField;
use crate::mesh::{signed_volume, Mesh, Point};
use crate::sparse::CsrMatrix;

/// Load vector `F_k = (f(·, t), φ_k)` and the time it was assembled at.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    pub values: Vec<f64>,
    pub time: f64,
}

struct ElementGeometry {
    volume: f64,
    /// Gradients of the barycentric basis functions, one per vertex.
    gradients: [[f64; 3]; 4],
    centroid: Point,
}

fn element_geometry(points: &[Point], d: usize) -> ElementGeometry {
    let volume = signed_volume(points, d);
    let mut centroid = [0.0; 3];
    for p in points {
        for a in 0..d {
            centroid[a] += p[a] / (d + 1) as f64;
        }
    }
    // Edge matrix J with rows e_i = p_i - p_0; grad φ_i (i ≥ 1) are the columns of J⁻¹.
    let e = |i: usize, a: usize| points[i][a] - points[0][a];
    let mut gradients = [[0.0; 3]; 4];
    match d {
        1 => {
            gradients[1][0] = 1.0 / e(1, 0);
        }
        2 => {
            let det = e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0);
            gradients[1] = [e(2, 1) / det, -e(2, 0) / det, 0.0];
            gradients[2] = [-e(1, 1) / det, e(1, 0) / det, 0.0];
        }
        3 => {
            let j = [
                [e(1, 0), e(1, 1), e(1, 2)],
                [e(2, 0), e(2, 1), e(2, 2)],
                [e(3, 0), e(3, 1), e(3, 2)],
            ];
            let cof = |r: usize, c: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]
            };
            let det = j[0][0] * cof(0, 0) + j[0][1] * cof(0, 1) + j[0][2] * cof(0, 2);
            // (J⁻¹)[a][i] = cof(i, a) / det
            for i in 0..3 {
                for a in 0..3 {
                    gradients[i + 1][a] = cof(i, a) / det;
                }
            }
        }
        _ => unreachable!("dimension is 1, 2 or 3"),
    }
    for a in 0..d {
        gradients[0][a] = -(1..=d).map(|i| gradients[i][a]).sum::<f64>();
    }
    ElementGeometry {
        volume,
        gradients,
        centroid,
    }
}

/// `∫_T φ_i φ_j = |T| (1 + δ_ij) d! / (d+2)!`.
fn local_mass(volume: f64, d: usize, i: usize, j: usize) -> f64 {
    let scale = match d {
        1 => 1.0 / 6.0,
        2 => 1.0 / 12.0,
        _ => 1.0 / 20.0,
    };
    volume * scale * if i == j { 2.0 } else { 1.0 }
}

/// Sums local matrices over all cells into the interior-node operator.
///
/// `coefficients` runs once per cell; `entry` maps those coefficients to the
/// local entry for vertex pair `(i, j)`.
fn assemble_operator<C>(
    mesh: &Mesh,
    coefficients: impl Fn(&ElementGeometry) -> Result<C>,
    entry: impl Fn(&ElementGeometry, &C, usize, usize) -> f64,
) -> Result<CsrMatrix> {
    let d = mesh.dimension();
    let mut triplets = Vec::with_capacity(mesh.cell_count() * (d + 1) * (d + 1));
    for c in 0..mesh.cell_count() {
        let cell = mesh.cell(c);
        let geom = element_geometry(&mesh.cell_points(c), d);
        let coeffs = coefficients(&geom)?;
        for (i, &vi) in cell.iter().enumerate() {
            let Some(row) = mesh.interior_index(vi) else {
                continue;
            };
            for (j, &vj) in cell.iter().enumerate() {
                let Some(col) = mesh.interior_index(vj) else {
                    continue;
                };
                triplets.push((row, col, entry(&geom, &coeffs, i, j)));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.interior_count(), triplets)
}

/// Exact linear-element mass matrix `ℳ_kj = (φ_k, φ_j)`.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let d = mesh.dimension();
    assemble_operator(mesh, |_| Ok(()), |g, _, i, j| local_mass(g.volume, d, i, j))
        .expect("mass assembly has no fallible step")
}

/// Stiffness `𝒮_kj = (α∇φ_k, ∇φ_j) + (c φ_k, φ_j)` for diagonal `α`.
pub fn assemble_stiffness(
    mesh: &Mesh,
    alpha: &[ScalarField],
    c: &ScalarField,
) -> Result<CsrMatrix> {
    let d = mesh.dimension();
    assert_eq!(alpha.len(), d, "one diffusion entry per axis");
    assemble_operator(
        mesh,
        |g| {
            let mut a = [0.0; 3];
            for (axis, field) in alpha.iter().enumerate() {
                a[axis] = field.eval(g.centroid, 0.0)?;
            }
            Ok((a, c.eval(g.centroid, 0.0)?))
        },
        |g, &(a, reaction), i, j| {
            let diffusion: f64 = (0..d)
                .map(|axis| a[axis] * g.gradients[i][axis] * g.gradients[j][axis])
                .sum();
            diffusion * g.volume + reaction * local_mass(g.volume, d, i, j)
        },
    )
}

/// Centroid-rule load vector `F_k = Σ_T f(x_T, t) |T| / (d+1)`.
pub fn assemble_load(mesh: &Mesh, f: &ScalarField, t: f64) -> Result<LoadVector> {
    let d = mesh.dimension();
    let mut values = vec![0.0; mesh.interior_count()];
    if !f.is_zero() {
        for c in 0..mesh.cell_count() {
            let points = mesh.cell_points(c);
            let g = element_geometry(&points, d);
            let share = f.eval(g.centroid, t)? * g.volume / (d + 1) as f64;
            for &v in mesh.cell(c) {
                if let Some(k) = mesh.interior_index(v) {
                    values[k] += share;
                }
            }
        }
    }
    Ok(LoadVector { values, time: t })
}

/// Nodal interpolant of `u0` on the interior nodes.
pub fn interpolate_initial(mesh: &Mesh, u0: &ScalarField) -> Result<Vec<f64>> {
    mesh.interior_nodes()
        .into_iter()
        .map(|p| u0.eval(p, 0.0))
        .collect()
}
