use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seam_core::analysis::{
    check_time_step_assumption, hoffman_wielandt_check, operator_norm_a, perturbation_quantity,
    reference_matrix, reference_matrix_spectrum, relative_l2_error_snapshots, spectral_report,
};
use seam_core::dense::DenseMatrix;
use seam_core::pod::{gram, segment_spectrum};
use seam_core::{run_hifi, scenario, CsrMatrix, SnapshotMatrix};

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| d[i][j])
}

/// Largest eigenvalue of `L⁻¹ 𝒮 L⁻ᵀ` with `ℳ = LLᵀ`.
fn generalized_max(mass: &CsrMatrix, stiffness: &CsrMatrix) -> f64 {
    let l = dense(mass).cholesky().unwrap().l();
    let linv = l.try_inverse().unwrap();
    let c = &linv * dense(stiffness) * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    c.symmetric_eigen().eigenvalues.max()
}

fn operators(name: &str, m: usize) -> (CsrMatrix, CsrMatrix) {
    let mut spec = scenario(name).unwrap();
    spec.divisions = m;
    spec.t_final = spec.tau;
    let (disc, _) = run_hifi(&spec).unwrap();
    (disc.mass, disc.stiffness)
}

#[test]
fn operator_norm_matches_the_one_dimensional_closed_form() {
    for m in [4, 10, 99] {
        let (mass, stiffness) = operators("heat1d", m);
        let h = 1.0 / m as f64;
        let theta = (m - 1) as f64 * std::f64::consts::PI * h;
        let exact = 6.0 / (h * h) * (1.0 - theta.cos()) / (2.0 + theta.cos());
        let ours = operator_norm_a(&mass, &stiffness).unwrap();
        assert!(
            (ours - exact).abs() < 1e-8 * exact,
            "m={m}: {ours} vs {exact}"
        );
    }
}

#[test]
fn operator_norm_matches_a_dense_generalized_solve() {
    for (name, m) in [("heat1d", 4), ("s1", 6), ("s2", 6), ("heat3d", 3)] {
        let (mass, stiffness) = operators(name, m);
        let ours = operator_norm_a(&mass, &stiffness).unwrap();
        let oracle = generalized_max(&mass, &stiffness);
        assert!(
            (ours - oracle).abs() < 1e-8 * oracle,
            "{name}: {ours} vs {oracle}"
        );
    }
}

#[test]
fn time_step_check_is_strict() {
    assert!(check_time_step_assumption(0.01, 99.0).satisfied);
    assert!(!check_time_step_assumption(0.01, 100.0).satisfied);
}

#[test]
fn reference_spectrum_matches_explicit_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let rows = rng.random_range(1..8);
        let u0: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm_a = rng.random_range(0.0..3000.0);
        let tau = rng.random_range(1e-5..1e-3);
        let n = rng.random_range(1..40);
        let closed = reference_matrix_spectrum(&u0, norm_a, tau, n);
        let explicit = reference_matrix(&u0, norm_a, tau, n);
        assert_eq!(explicit.cols(), n + 1);
        let values = segment_spectrum(explicit.view(), 0).unwrap().eigenvalues;
        let scale = closed.lambda0;
        assert!(
            (values[0] - scale).abs() <= 1e-10 * scale,
            "{} vs {scale}",
            values[0]
        );
        assert!(values[1..].iter().all(|&l| l <= 1e-10 * scale));
        assert!((closed.ln_lambda0 - scale.ln()).abs() < 1e-10);
    }
}

#[test]
fn reference_logarithm_survives_overflow() {
    let u0 = [1.0; 4];
    // ratio −10: the geometric sum of 100^k up to k = 200 overflows f64
    let s = reference_matrix_spectrum(&u0, 11.0, 1.0, 200);
    assert!(s.lambda0.is_infinite());
    let expected = 4f64.ln() + 201.0 * 100f64.ln() - 99f64.ln();
    assert!((s.ln_lambda0 - expected).abs() < 1e-9 * expected);
    let finite = reference_matrix_spectrum(&u0, 11.0, 1.0, 10);
    assert!((finite.ln_lambda0 - finite.lambda0.ln()).abs() < 1e-12);
}

#[test]
fn perturbation_bounds_the_tail() {
    let mut spec = scenario("s3").unwrap();
    spec.divisions = 8;
    let (disc, hifi) = run_hifi(&spec).unwrap();
    let norm_a = operator_norm_a(&disc.mass, &disc.stiffness).unwrap();
    let spectra: Vec<_> = (0..hifi.cols() / 21)
        .map(|s| {
            let mut sp = segment_spectrum(hifi.columns(s * 21..s * 21 + 21), s).unwrap();
            sp.segment = s;
            sp
        })
        .collect();
    let report = spectral_report(&hifi, &spectra, 20, norm_a);
    assert_eq!(report.segments.len(), 21);
    for (r, s) in report.segments.iter().zip(&spectra) {
        assert!(r.perturbation >= r.tail_sum_sq);
        assert!((r.tail_sum_sq - s.tail_sum_sq()).abs() <= 1e-15 * s.trace * s.trace);
        assert!((r.bound_proxy - 20f64.powi(4) * spec.tau * spec.tau).abs() < 1e-12);
        if r.perturbation.is_finite() && r.perturbation > 0.0 {
            assert!(
                (r.ln_perturbation - r.perturbation.ln()).abs()
                    < 1e-9 * r.perturbation.ln().abs().max(1.0)
            );
        }
        let start = hifi.column(r.segment * 21);
        let again = perturbation_quantity(
            s,
            &reference_matrix_spectrum(start, norm_a, spec.tau, 20),
            20,
            spec.tau,
        );
        assert_eq!(&again, r);
    }
}

fn symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = scale * rng.random_range(-1.0..1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

#[test]
fn hoffman_wielandt_holds_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for case in 0..100 {
        let n = 1 + case % 8;
        let a = symmetric(&mut rng, n, 1.0);
        let e = symmetric(&mut rng, n, 10f64.powi(-(case as i32 % 4)));
        let hw = hoffman_wielandt_check(&a, &e).unwrap();
        assert!(hw.holds(1e-9), "case {case}: {hw:?}");
        assert!((hw.frobenius_sq - e.frobenius_norm_sq()).abs() < 1e-15);
    }
}

#[test]
fn hoffman_wielandt_is_tight_for_commuting_pairs() {
    let a = DenseMatrix::diagonal(&[3.0, 1.0, -2.0]);
    let e = DenseMatrix::diagonal(&[0.5, 0.25, -0.5]);
    let hw = hoffman_wielandt_check(&a, &e).unwrap();
    assert!(hw.frobenius_margin.abs() < 1e-14);
    assert!(hw.lower_margin.abs() < 1e-14 && hw.upper_margin.abs() < 1e-14);
}

#[test]
fn gram_of_reference_block_is_rank_one() {
    let u = reference_matrix(&[1.0, 2.0], 10.0, 0.01, 5);
    let x = gram(u.view());
    for i in 0..6 {
        for j in 0..6 {
            assert!((x.get(i, j) - 5.0 * 0.9f64.powi((i + j) as i32)).abs() < 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relative_error_ignores_column_order(
        cols in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 4), prop::collection::vec(-0.1f64..0.1, 4)), 1..12),
        seed in any::<u64>(),
    ) {
        let reference: Vec<Vec<f64>> = cols.iter().map(|(u, _)| u.clone()).collect();
        let approx: Vec<Vec<f64>> = cols.iter().map(|(u, d)| u.iter().zip(d).map(|(a, b)| a + b).collect()).collect();
        prop_assume!(reference.iter().flatten().any(|&v| v != 0.0));
        let mass = CsrMatrix::diagonal(&[1.0, 2.0, 0.5, 1.5]);
        let tau = 0.01;
        let r = SnapshotMatrix::from_columns(&reference, tau).unwrap();
        let a = SnapshotMatrix::from_columns(&approx, tau).unwrap();
        let base = relative_l2_error_snapshots(r.view(), a.view(), &mass, tau).unwrap();

        let n = reference.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let rp = SnapshotMatrix::from_columns(&perm.iter().map(|&k| reference[k].clone()).collect::<Vec<_>>(), tau).unwrap();
        let ap = SnapshotMatrix::from_columns(&perm.iter().map(|&k| approx[k].clone()).collect::<Vec<_>>(), tau).unwrap();
        let shuffled = relative_l2_error_snapshots(rp.view(), ap.view(), &mass, tau).unwrap();
        prop_assert!((base - shuffled).abs() <= 1e-12 * base.max(1e-300));
        prop_assert_eq!(relative_l2_error_snapshots(r.view(), r.view(), &mass, tau).unwrap(), 0.0);
    }
}

#[test]
fn zero_reference_is_rejected() {
    let z = SnapshotMatrix::from_columns(&[vec![0.0; 2]], 1.0).unwrap();
    let mass = CsrMatrix::identity(2);
    assert!(relative_l2_error_snapshots(z.view(), z.view(), &mass, 1.0).is_err());
}
