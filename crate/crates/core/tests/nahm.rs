use d2alf::algebra::{exp_traceless, C64};
use d2alf::duy::{gauge_invariants, solve_duy, DuyOptions};
use d2alf::grid::{make_grid, GridRef};
use d2alf::nahm::stability::classify_sublines;
use d2alf::nahm::{
    complex_nahm_family, find_sublines, mu_complex, Family, GaugeKind, GaugeTransform, RealNahm, Special, Stability,
};
use d2alf::sample;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn grid() -> GridRef {
    make_grid(1.0, 32).unwrap()
}

/// Sampled gauge fields need a finer grid for their derivative tags to hold at `1e-8`.
fn gauge_grid() -> GridRef {
    make_grid(1.0, 48).unwrap()
}

fn family_strategy() -> impl Strategy<Value = (Family, C64, C64)> {
    let special = prop_oneof![
        Just(Special::Diagonal),
        Just(Special::Upper),
        cplx().prop_map(|c| Special::Lower { c }),
    ];
    (0usize..7, cplx(), cplx(), cplx(), special, 0.2..0.8f64, 0.1..1.2f64).prop_map(|(w, x0, xl, p, s, re, im)| match w {
        0 => (
            Family::I {
                alpha0: c(re, im),
                beta_x: p,
            },
            x0,
            xl,
        ),
        1 => (Family::II { c: p }, x0, xl),
        2 => (Family::III { c: p }, x0, xl),
        3 => (Family::IV { c: p }, x0, xl),
        4 => (Family::V { c: p }, x0, xl),
        5 => (Family::VI(s), x0, x0),
        _ => (Family::VII(s), x0, -x0),
    })
}

fn unitary_gauge(seed: u64, g: &GridRef) -> GaugeTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GaugeTransform::new(sample::skew_param(&mut rng, g, 0.6).map(exp_traceless), GaugeKind::Unitary)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn representatives_solve_the_complex_equation((f, x0, xl) in family_strategy()) {
        let b = complex_nahm_family(f, x0, xl, &grid()).unwrap();
        prop_assert!(mu_complex(&b).sup_norm() < 1e-10, "{}", f.label());
        prop_assert!(b.beta.satisfies_tags(1e-10));
    }

    #[test]
    fn complex_gauge_preserves_the_complex_equation(seed in any::<u64>(), (f, x0, xl) in family_strategy()) {
        let g = gauge_grid();
        let b = complex_nahm_family(f, x0, xl, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = GaugeTransform::new(sample::positive_gauge(&mut rng, &g, 0.4), GaugeKind::Complex);
        let b2 = h.act_complex(&b).unwrap();
        prop_assert!(mu_complex(&b2).sup_norm() < 1e-8);
    }

    #[test]
    fn real_complex_roundtrip(seed in any::<u64>()) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x0, xl) = (sample::uniform_xi(&mut rng, 1.0), sample::uniform_xi(&mut rng, 1.0));
        let a = sample::real_nahm(&mut rng, &g, x0, xl, 0.5);
        let back = a.to_complex().to_real(x0[0], xl[0]);
        for mu in 0..4 {
            prop_assert!(back.a[mu].sub(&a.a[mu]).sup_norm() < 1e-14);
        }
        prop_assert_eq!(back.xi0, x0);
    }

    #[test]
    fn unitary_gauge_preserves_invariants_and_residual(seed in any::<u64>()) {
        let g = gauge_grid();
        let b = complex_nahm_family(Family::I { alpha0: c(0.4, 0.3), beta_x: c(0.2, -0.1) }, c(0.3, 0.1), c(-0.2, 0.2), &g).unwrap();
        let a = solve_duy(&b, (0.5, -0.4), &DuyOptions::default()).unwrap().a;
        let a2 = unitary_gauge(seed, &g).act_real(&a).unwrap();
        let (h1, t1) = gauge_invariants(&a);
        let (h2, t2) = gauge_invariants(&a2);
        prop_assert!((h1 - h2).norm() < 1e-8 && (t1 - t2).norm() < 1e-8);
        prop_assert!(a2.nahm_residual() < 1e-7);
    }

    #[test]
    fn family_ii_flips_at_equal_real_parameters(x0 in -1.0..1.0f64, xl in -1.0..1.0f64, p in cplx()) {
        prop_assume!((x0 - xl).abs() > 1e-9);
        let b = complex_nahm_family(Family::II { c: p }, c(0.0, 0.0), c(0.0, 0.0), &grid()).unwrap();
        let want = if xl < x0 { Stability::Stable } else { Stability::Unstable };
        prop_assert_eq!(classify_sublines(&find_sublines(&b), (x0, xl)), want);
    }
}

#[test]
fn g1_flips_the_far_end() {
    let g = grid();
    let b = complex_nahm_family(
        Family::I {
            alpha0: c(0.5, 0.2),
            beta_x: c(0.3, 0.0),
        },
        c(0.2, -0.1),
        c(0.1, 0.4),
        &g,
    )
    .unwrap();
    let a = solve_duy(&b, (0.3, 0.7), &DuyOptions::default()).unwrap().a;
    let t = GaugeTransform::g1(&g);
    let flipped = t.act_real(&a).unwrap();
    assert_eq!(flipped.xi0, a.xi0);
    assert_eq!(flipped.xi_l, a.xi_l.map(|x| -x));
    assert!(flipped.nahm_residual() < 1e-7);
    let back = t.inverse().act_real(&flipped).unwrap();
    for mu in 0..4 {
        assert!(back.a[mu].sub(&a.a[mu]).sup_norm() < 1e-9);
    }
}

#[test]
fn zero_data_is_reducible_but_valid() {
    let z = RealNahm::zero(&grid());
    assert!(z.validity_defect() < 1e-15);
    assert_eq!(z.nahm_residual(), 0.0);
}

#[test]
fn family_vi_rejects_mismatched_parameters() {
    assert!(complex_nahm_family(Family::VI(Special::Diagonal), c(0.1, 0.0), c(0.2, 0.0), &grid()).is_err());
    assert!(complex_nahm_family(Family::VII(Special::Upper), c(0.1, 0.0), c(0.1, 0.0), &grid()).is_err());
}
