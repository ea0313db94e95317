use proptest::prelude::*;
use seam_core::Mesh;

fn build(d: usize, m: usize) -> Mesh {
    match d {
        1 => Mesh::interval(m),
        2 => Mesh::square(m),
        _ => Mesh::cube(m),
    }
    .unwrap()
}

/// A face lies on the boundary when all its vertices share a coordinate equal to 0 or 1.
fn on_boundary(mesh: &Mesh, face: &[usize]) -> bool {
    (0..mesh.dimension()).any(|axis| {
        [0.0, 1.0]
            .iter()
            .any(|&side| face.iter().all(|&v| mesh.vertices()[v][axis] == side))
    })
}

fn check_mesh(d: usize, m: usize) {
    let mesh = build(d, m);
    let cells_per_cube = [1, 2, 6][d - 1];
    assert_eq!(mesh.cell_count(), cells_per_cube * m.pow(d as u32));
    assert_eq!(mesh.vertex_count(), (m + 1).pow(d as u32));

    let mut total = 0.0;
    for c in 0..mesh.cell_count() {
        let v = mesh.signed_volume(c);
        assert!(v > 0.0, "cell {c} of d={d} m={m} has volume {v}");
        assert!(mesh.cell(c).iter().all(|&i| i < mesh.vertex_count()));
        total += v;
    }
    assert!((total - 1.0).abs() < 1e-12, "volume sum {total}");

    let nodes = mesh.interior_nodes();
    assert_eq!(nodes.len(), (m - 1).pow(d as u32));
    assert_eq!(mesh.interior_count(), nodes.len());
    for p in &nodes {
        assert!(p[..d].iter().all(|&x| x > 0.0 && x < 1.0));
    }

    for (face, count) in mesh.face_incidence() {
        let expected = if on_boundary(&mesh, &face) { 1 } else { 2 };
        assert_eq!(count, expected, "face {face:?} in d={d} m={m}");
    }
}

#[test]
fn every_small_mesh_is_a_conforming_partition() {
    for d in 1..=3 {
        for m in 2..=8 {
            check_mesh(d, m);
        }
    }
}

#[test]
fn interior_ordering_is_lexicographic_x_fastest() {
    let mesh = Mesh::square(4).unwrap();
    let nodes = mesh.interior_nodes();
    let expected: Vec<[f64; 2]> = (1..4)
        .flat_map(|j| (1..4).map(move |i| [i as f64 / 4.0, j as f64 / 4.0]))
        .collect();
    for (p, e) in nodes.iter().zip(&expected) {
        assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
    }
    let interval = Mesh::interval(4).unwrap().interior_nodes();
    assert_eq!(
        interval.iter().map(|p| p[0]).collect::<Vec<_>>(),
        vec![0.25, 0.5, 0.75]
    );
}

#[test]
fn reference_scale_counts() {
    assert_eq!(Mesh::interval(99).unwrap().interior_count(), 98);
    let square = Mesh::square(32).unwrap();
    assert_eq!((square.cell_count(), square.interior_count()), (2048, 961));
}

#[test]
fn too_coarse_meshes_are_rejected() {
    assert!(Mesh::interval(1).is_err());
    assert!(Mesh::square(0).is_err());
    assert!(Mesh::cube(1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interior_indices_are_dense(d in 1usize..=3, m in 2usize..=8) {
        let mesh = build(d, m);
        let mut seen = vec![false; mesh.interior_count()];
        for v in 0..mesh.vertex_count() {
            match mesh.interior_index(v) {
                Some(k) => {
                    prop_assert!(!mesh.is_boundary(v));
                    prop_assert!(!seen[k]);
                    seen[k] = true;
                }
                None => prop_assert!(mesh.is_boundary(v)),
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }
}
