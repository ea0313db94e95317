//! Uniform simplicial meshes of the unit interval, square and cube.
//!
//! Vertices are numbered lexicographically with x fastest, and interior
//! vertices get a dense index in the same order. Squares are split along the
//! lower-left to upper-right diagonal; cubes use the 6-tetrahedra Kuhn split
//! (one simplex per permutation of the axes, all sharing the main diagonal).

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Result, SeamError};

/// A point of `[0,1]^d`; unused trailing coordinates are zero.
pub type Point = [f64; 3];

#[derive(Debug, Clone)]
pub struct Mesh {
    dimension: usize,
    divisions: usize,
    vertices: Vec<Point>,
    /// Flat cell connectivity, `dimension + 1` vertex ids per cell.
    cells: Vec<usize>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
}

impl Mesh {
    /// Uniform mesh of (0,1) with `m` cells.
    pub fn interval(m: usize) -> Result<Mesh> {
        check_divisions(m)?;
        let h = 1.0 / m as f64;
        let vertices = (0..=m).map(|i| [i as f64 * h, 0.0, 0.0]).collect();
        let cells = (0..m).flat_map(|i| [i, i + 1]).collect();
        let boundary = (0..=m).map(|i| i == 0 || i == m).collect();
        Ok(Mesh::finish(1, m, vertices, cells, boundary))
    }

    /// Uniform mesh of (0,1)^2: `m x m` squares, each cut into two right triangles.
    pub fn square(m: usize) -> Result<Mesh> {
        check_divisions(m)?;
        let h = 1.0 / m as f64;
        let n = m + 1;
        let id = |i: usize, j: usize| i + n * j;
        let mut vertices = Vec::with_capacity(n * n);
        let mut boundary = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                vertices.push([i as f64 * h, j as f64 * h, 0.0]);
                boundary.push(i == 0 || j == 0 || i == m || j == m);
            }
        }
        let mut cells = Vec::with_capacity(6 * m * m);
        for j in 0..m {
            for i in 0..m {
                let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                cells.extend_from_slice(&[v00, v10, v11]);
                cells.extend_from_slice(&[v00, v11, v01]);
            }
        }
        Ok(Mesh::finish(2, m, vertices, cells, boundary))
    }

    /// Uniform mesh of (0,1)^3: `m^3` cubes, each cut into six Kuhn tetrahedra.
    pub fn cube(m: usize) -> Result<Mesh> {
        check_divisions(m)?;
        let h = 1.0 / m as f64;
        let n = m + 1;
        let id = |c: [usize; 3]| c[0] + n * (c[1] + n * c[2]);
        let mut vertices = Vec::with_capacity(n * n * n);
        let mut boundary = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
                    boundary.push([i, j, k].iter().any(|&c| c == 0 || c == m));
                }
            }
        }
        const PERMUTATIONS: [([usize; 3], bool); 6] = [
            ([0, 1, 2], true),
            ([0, 2, 1], false),
            ([1, 0, 2], false),
            ([1, 2, 0], true),
            ([2, 0, 1], true),
            ([2, 1, 0], false),
        ];
        let mut cells = Vec::with_capacity(24 * m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    for (perm, even) in PERMUTATIONS {
                        let mut corner = [i, j, k];
                        let mut tet = [id(corner), 0, 0, 0];
                        for (step, &axis) in perm.iter().enumerate() {
                            corner[axis] += 1;
                            tet[step + 1] = id(corner);
                        }
                        // odd permutations walk the path with negative orientation
                        if !even {
                            tet.swap(2, 3);
                        }
                        cells.extend_from_slice(&tet);
                    }
                }
            }
        }
        Ok(Mesh::finish(3, m, vertices, cells, boundary))
    }

    fn finish(
        dimension: usize,
        divisions: usize,
        vertices: Vec<Point>,
        cells: Vec<usize>,
        boundary: Vec<bool>,
    ) -> Mesh {
        let mut interior_index = vec![None; vertices.len()];
        let mut interior_vertices = Vec::new();
        for (v, &on_boundary) in boundary.iter().enumerate() {
            if !on_boundary {
                interior_index[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }
        Mesh {
            dimension,
            divisions,
            vertices,
            cells,
            boundary,
            interior_index,
            interior_vertices,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Cells per axis.
    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / (self.dimension + 1)
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dimension + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.dimension + 1)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// Dense interior index of vertex `v`, `None` on the boundary.
    pub fn interior_index(&self, v: usize) -> Option<usize> {
        self.interior_index[v]
    }

    /// Number of interior nodes, i.e. finite-element degrees of freedom.
    pub fn interior_count(&self) -> usize {
        self.interior_vertices.len()
    }

    /// Coordinates of the interior nodes in interior-index order.
    pub fn interior_nodes(&self) -> Vec<Point> {
        self.interior_vertices
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Signed measure of cell `c` (positive for every cell built here).
    pub fn signed_volume(&self, c: usize) -> f64 {
        signed_volume(&self.cell_points(c), self.dimension)
    }

    /// Number of cells sharing each (d-1)-face, keyed by sorted vertex ids.
    pub fn face_incidence(&self) -> HashMap<Vec<usize>, usize> {
        let mut faces = HashMap::new();
        for cell in self.cells() {
            for skip in 0..cell.len() {
                let mut face: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                face.sort_unstable();
                *faces.entry(face).or_insert(0) += 1;
            }
        }
        faces
    }

    /// Writes the `vertices` and `cells` sections as CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let axes = ["x", "y", "z"];
        writeln!(out, "vertices")?;
        writeln!(out, "id,{},boundary", axes[..self.dimension].join(","))?;
        for (v, p) in self.vertices.iter().enumerate() {
            let coords: Vec<String> = p[..self.dimension].iter().map(|c| c.to_string()).collect();
            writeln!(
                out,
                "{v},{},{}",
                coords.join(","),
                u8::from(self.boundary[v])
            )?;
        }
        writeln!(out, "cells")?;
        let heads: Vec<String> = (0..=self.dimension).map(|i| format!("v{i}")).collect();
        writeln!(out, "id,{}", heads.join(","))?;
        for (c, cell) in self.cells().enumerate() {
            let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{c},{}", ids.join(","))?;
        }
        Ok(())
    }
}

fn check_divisions(m: usize) -> Result<()> {
    if m < 2 {
        return Err(SeamError::InvalidArgument(format!(
            "need at least 2 divisions per axis for an interior node, got {m}"
        )));
    }
    Ok(())
}

/// Signed measure of the simplex spanned by `points` in dimension `d`.
pub fn signed_volume(points: &[Point], d: usize) -> f64 {
    let e = |i: usize, a: usize| points[i][a] - points[0][a];
    match d {
        1 => e(1, 0),
        2 => 0.5 * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)),
        3 => {
            let det = e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1))
                - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
                + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0));
            det / 6.0
        }
        _ => unreachable!("dimension is 1, 2 or 3"),
    }
}
