use d2alf::algebra::C64;
use d2alf::duy::{solve_duy, DuyOptions};
use d2alf::grid::{make_grid, GridRef};
use d2alf::moduli::{chart_csv_header, hamiltonian_check, harmonic_frame, kernel_dims, metric_pullback_chart, J_SIGN};
use d2alf::nahm::{complex_nahm_family, Family, RealNahm};
use d2alf::sample;
use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid(n: usize) -> GridRef {
    make_grid(1.0, n).unwrap()
}

fn solution(g: &GridRef, alpha0: C64, beta_x: C64) -> RealNahm {
    let b = complex_nahm_family(Family::I { alpha0, beta_x }, c(0.2, -0.1), c(-0.3, 0.25), g).unwrap();
    solve_duy(&b, (0.6, -0.2), &DuyOptions::default()).unwrap().a
}

#[test]
fn zero_data_kernel_dimensions() {
    assert_eq!(kernel_dims(&RealNahm::zero(&grid(24))).unwrap().as_tuple(), (1, 8, 11, 3));
}

#[test]
fn irreducible_solution_kernel_dimensions() {
    let d = kernel_dims(&solution(&grid(40), c(0.5, 0.3), c(0.2, 0.1))).unwrap();
    assert_eq!(d.as_tuple(), (0, 4, 10, 0));
    assert!(d.min_gap() > 1e3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn frame_is_hyperkahler(re in 0.25..0.75f64, im in 0.15..1.0f64, bx in (-0.5..0.5f64, -0.5..0.5f64)) {
        let f = harmonic_frame(&solution(&grid(40), c(re, im), c(bx.0, bx.1))).unwrap();
        prop_assert!(f.quaternion_defect() < 1e-6);
        prop_assert!(f.g.symmetric_eigenvalues().min() > 0.0);
        for i in 0..3 {
            prop_assert!((f.omega[i] + f.omega[i].transpose()).amax() < 1e-10);
            // Each J^i is a G-isometry: J^T G J = G.
            prop_assert!((f.j[i].transpose() * f.g * f.j[i] - f.g).amax() < 1e-6);
            prop_assert!((f.omega[i] - f.g * f.j[i] * J_SIGN).amax() < 1e-9);
        }
        for d in f.harmonic_defects() {
            prop_assert!(d < 1e-8);
        }
    }

    #[test]
    fn moment_maps_are_hamiltonian(seed in any::<u64>()) {
        let g = make_grid(1.2, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, xl) = (sample::uniform_xi(&mut rng, 0.5), sample::uniform_xi(&mut rng, 0.5));
        let a = sample::real_nahm(&mut rng, &g, x0, xl, 0.6);
        let da = sample::tangent(&mut rng, &g, 0.5);
        let h = sample::skew_param(&mut rng, &g, 0.5);
        let r = hamiltonian_check(&a, &h, &da);
        prop_assert!(r.defect() < 1e-6 * r.scale());
    }
}

#[test]
fn chart_rows_match_header() {
    let g = grid(32);
    let pts = metric_pullback_chart(
        &g,
        &[c(0.4, 0.2), c(0.5, 0.2)],
        &[c(0.1, 0.0)],
        [0.6, 0.2, -0.1],
        [-0.2, -0.3, 0.25],
        &DuyOptions::default(),
    );
    assert_eq!(pts.len(), 2);
    let cols = chart_csv_header().split(',').count();
    for p in &pts {
        assert!(p.status.is_ok());
        assert_eq!(p.csv_row().split(',').count(), cols);
        assert!(p.g.symmetric_eigenvalues().min() > 0.0);
        assert!((p.g - p.g.transpose()).amax() < 1e-12);
        assert_ne!(p.g, Matrix4::zeros());
    }
}

#[test]
fn chart_keeps_failed_points() {
    // Im α₀ outside the admissible strip.
    let pts = metric_pullback_chart(
        &grid(24),
        &[c(0.4, -0.5)],
        &[c(0.0, 0.0)],
        [0.5, 0.0, 0.0],
        [-0.5, 0.0, 0.0],
        &DuyOptions::default(),
    );
    assert_eq!(pts.len(), 1);
    assert!(pts[0].status.is_err());
    assert!(pts[0].residual.is_nan());
}
