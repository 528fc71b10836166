use d2alf::algebra::{quasigroup_product, C64};
use d2alf::duy::{donaldson_m, gauge_invariants, log_positive, psi, solve_duy, weitzenbock_residual, DuyOptions, DuyRoute};
use d2alf::grid::{make_grid, GridRef, MatFn};
use d2alf::moduli::moment_residual;
use d2alf::nahm::transport::double_coset_invariant;
use d2alf::nahm::{complex_nahm_family, parallel_transport, Family, GaugeKind, GaugeTransform, Special};
use d2alf::{sample, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid(n: usize) -> GridRef {
    make_grid(1.0, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The complex invariants of the input survive the solve, computed straight from `α` and `β`.
    #[test]
    fn solve_keeps_complex_invariants(
        re in 0.2..0.8f64, im in 0.1..1.0f64,
        bx in (-0.6..0.6f64, -0.6..0.6f64),
        x0 in (-0.5..0.5f64, -0.5..0.5f64), xl in (-0.5..0.5f64, -0.5..0.5f64),
        xr in (-1.0..1.0f64, -1.0..1.0f64),
    ) {
        let g = grid(40);
        let b = complex_nahm_family(Family::I { alpha0: c(re, im), beta_x: c(bx.0, bx.1) }, c(x0.0, x0.1), c(xl.0, xl.1), &g).unwrap();
        let r = solve_duy(&b, xr, &DuyOptions::default()).unwrap();
        prop_assert!(r.residual < 1e-9 * (1.0 + b.norm_sup()));
        prop_assert!(moment_residual(&r.a) < 1e-7);
        let (h, tb) = gauge_invariants(&r.a);
        let h_in = double_coset_invariant(&parallel_transport(&b.alpha));
        let tb_in = b.beta.integrate_trace_product(&b.beta);
        prop_assert!((h - h_in).norm() < 1e-7 * (1.0 + h_in.norm()));
        prop_assert!((tb - tb_in).norm() < 1e-7 * (1.0 + tb_in.norm()));
    }

    #[test]
    fn donaldson_functional_is_a_cocycle(seed in any::<u64>()) {
        let g = grid(40);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, xl) = (sample::uniform_xi(&mut rng, 0.6), sample::uniform_xi(&mut rng, 0.6));
        let b = sample::complex_unitary(&mut rng, &g, x0, xl, 0.6);
        let g1 = sample::positive_gauge(&mut rng, &g, 0.4);
        let g2 = sample::positive_gauge(&mut rng, &g, 0.4);
        let prod: Vec<_> = g1.values.iter().zip(&g2.values).map(|(p, q)| quasigroup_product(p, q).unwrap()).collect();
        let lhs = donaldson_m(&log_positive(&MatFn::new(&g, prod)).unwrap(), &b);
        let b1 = GaugeTransform::new(g1.clone(), GaugeKind::Complex).act_complex_unchecked(&b);
        let rhs = donaldson_m(&log_positive(&g2).unwrap(), &b1) + donaldson_m(&log_positive(&g1).unwrap(), &b);
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn weitzenbock_identity_holds(seed in any::<u64>()) {
        let g = grid(48);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, xl) = (sample::uniform_xi(&mut rng, 1.0), sample::uniform_xi(&mut rng, 1.0));
        let b = sample::complex_unitary(&mut rng, &g, x0, xl, 0.5);
        let s = sample::section(&mut rng, &g, 0.8);
        prop_assert!(weitzenbock_residual(&b, &s) < 1e-8);
    }

    #[test]
    fn psi_is_continuous_across_its_series_switch(x in -2.0..2.0f64) {
        for u in [0.999e-3f64, 1.001e-3, -0.999e-3, -1.001e-3] {
            let direct = ((2.0 * u).exp() - 2.0 * u - 1.0) / (2.0 * u * u);
            prop_assert!((psi(x, x + u) - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn unstable_input_is_rejected() {
    let b = complex_nahm_family(Family::II { c: c(0.3, 0.1) }, c(0.0, 0.0), c(0.0, 0.0), &grid(32)).unwrap();
    assert!(matches!(
        solve_duy(&b, (-0.5, 0.5), &DuyOptions::default()),
        Err(Error::UnstableInput)
    ));
    assert!(solve_duy(&b, (0.5, -0.5), &DuyOptions::default()).is_ok());
}

#[test]
fn polystable_input_takes_the_closed_form_route() {
    let x = c(0.3, 0.2);
    let b = complex_nahm_family(Family::VI(Special::Diagonal), x, x, &grid(32)).unwrap();
    let r = solve_duy(&b, (0.4, 0.4), &DuyOptions::default()).unwrap();
    assert_eq!(r.route, DuyRoute::Polystable);
    assert!(moment_residual(&r.a) < 1e-9);
}

#[test]
fn donaldson_functional_vanishes_at_identity() {
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = sample::complex_unitary(&mut rng, &g, [0.2, 0.1, 0.0], [-0.3, 0.0, 0.4], 0.5);
    assert_eq!(donaldson_m(&MatFn::zeros(&g), &b), 0.0);
}

#[test]
fn iteration_cap_reports_history() {
    let b = complex_nahm_family(
        Family::I {
            alpha0: c(0.4, 0.3),
            beta_x: c(0.5, 0.0),
        },
        c(0.1, 0.0),
        c(0.0, 0.2),
        &grid(32),
    )
    .unwrap();
    match solve_duy(&b, (0.9, -0.4), &DuyOptions { tol: 1e-9, max_iter: 1 }) {
        Err(Error::NoConvergence { iterations, history, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}
