use proptest::prelude::*;
use seam_core::pod::{fix_sign, gram, pod_basis, projection_residual, segment_spectrum};
use seam_core::sparse::norm2;
use seam_core::{scenario, Discretization, SnapshotMatrix};

fn snapshots() -> impl Strategy<Value = SnapshotMatrix> {
    (2usize..=20, 1usize..=10).prop_flat_map(|(rows, cols)| {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, rows), cols)
            .prop_map(|c| SnapshotMatrix::from_columns(&c, 0.1).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectrum_accounts_for_the_whole_energy(u in snapshots()) {
        let s = segment_spectrum(u.view(), 0).unwrap();
        let energy = u.view().frobenius_norm_sq();
        prop_assert!((s.trace - energy).abs() <= 1e-12 * energy);
        let total: f64 = s.eigenvalues.iter().sum();
        prop_assert!((total - energy).abs() <= 1e-10 * energy);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn projection_residual_is_the_tail(u in snapshots()) {
        let s = segment_spectrum(u.view(), 0).unwrap();
        let basis = pod_basis(u.view(), &s).unwrap();
        prop_assert!((norm2(&basis.vector) - 1.0).abs() < 1e-10);
        let residual = projection_residual(u.view(), &basis);
        prop_assert!((residual - s.tail_sum()).abs() <= 1e-9 * s.trace, "{} vs {}", residual, s.tail_sum());
    }

    #[test]
    fn column_order_does_not_change_the_spectrum(u in snapshots(), seed in any::<u64>()) {
        let n = u.cols();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let columns: Vec<Vec<f64>> = perm.iter().map(|&k| u.column(k).to_vec()).collect();
        let shuffled = SnapshotMatrix::from_columns(&columns, u.tau()).unwrap();
        let a = segment_spectrum(u.view(), 0).unwrap();
        let b = segment_spectrum(shuffled.view(), 0).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-10 * a.trace);
        }
        let xa = gram(u.view()).permuted(&perm);
        let xb = gram(shuffled.view());
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(xa.get(i, j), xb.get(i, j));
            }
        }
    }

    #[test]
    fn sign_rule_is_deterministic(u in snapshots()) {
        let s = segment_spectrum(u.view(), 0).unwrap();
        let b = &s.leading_vector;
        let pivot = b.iter().copied().fold(0.0f64, |p, x| if x.abs() > p.abs() { x } else { p });
        prop_assert!(pivot > 0.0);
        let mut flipped: Vec<f64> = b.iter().map(|x| -x).collect();
        fix_sign(&mut flipped);
        prop_assert_eq!(&flipped, b);
        let again = segment_spectrum(u.view(), 0).unwrap();
        prop_assert_eq!(&again, &s);
    }
}

#[test]
fn sign_rule_ties_go_to_the_first_entry() {
    let mut v = vec![-0.5, 0.5, 0.1];
    fix_sign(&mut v);
    assert_eq!(v, vec![0.5, -0.5, -0.1]);
}

#[test]
fn rank_one_block_has_one_nonzero_eigenvalue() {
    let v = [3.0, -4.0];
    let columns: Vec<Vec<f64>> = (0..5)
        .map(|k| v.iter().map(|x| x * 0.5f64.powi(k)).collect())
        .collect();
    let u = SnapshotMatrix::from_columns(&columns, 1.0).unwrap();
    let s = segment_spectrum(u.view(), 0).unwrap();
    let expected = 25.0 * (1.0 - 0.25f64.powi(5)) / 0.75;
    assert!((s.lambda0() - expected).abs() < 1e-12 * expected);
    assert!(s.tail_sum() < 1e-12 * expected);
    let basis = pod_basis(u.view(), &s).unwrap();
    // the principal vector of U is ±v/|v|; the sign follows b₀, which is all positive here
    assert!((basis.vector[0] - 0.6).abs() < 1e-12 && (basis.vector[1] + 0.8).abs() < 1e-12);
}

#[test]
fn zero_block_is_degenerate() {
    let u = SnapshotMatrix::from_columns(&[vec![0.0; 3], vec![0.0; 3]], 1.0).unwrap();
    let s = segment_spectrum(u.view(), 0).unwrap();
    assert!(pod_basis(u.view(), &s).is_err());
}

#[test]
fn initial_heat_profile_trace() {
    let spec = scenario("heat1d").unwrap();
    let disc = Discretization::assemble(&spec).unwrap();
    let u0 = &disc.initial;
    // Σ_i sin²(4π i/99) over the interior nodes is (m)/2 for m = 99 divisions
    let energy: f64 = u0.iter().map(|v| v * v).sum();
    assert!((energy - 99.0 / 2.0).abs() < 1e-10);
    let block = SnapshotMatrix::from_columns(&[u0.clone(), u0.clone()], spec.tau).unwrap();
    let s = segment_spectrum(block.view(), 0).unwrap();
    assert!((s.trace - 99.0).abs() < 1e-10);
    assert!((s.lambda0() - 99.0).abs() < 1e-10);
}
