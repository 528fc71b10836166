use d2alf::algebra::{Mat2, C64};
use d2alf::grid::make_grid;
use d2alf::nahm::{classify_stability, complex_nahm_family, Family, Stability};
use d2alf::rg::{
    chamber_below, kronheimer_pairing, kronheimer_residual, nahm_pairing, resolution_map, rg_c, s_equiv_collapse,
    weakly_same_sign,
};
use d2alf::{sample, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Tangents to family (i) pair the same way before and after the map, up to `-2L`.
    #[test]
    fn map_scales_the_pairing(
        re in 0.2..0.8f64, im in 0.1..0.9f64, bx in (-0.6..0.6f64, -0.6..0.6f64),
        d1 in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        d2 in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let g = make_grid(1.1, 40).unwrap();
        let (x0, xl) = (c(0.3, -0.2), c(-0.1, 0.4));
        let data = |a: C64, b: C64| complex_nahm_family(Family::I { alpha0: a, beta_x: b }, x0, xl, &g).unwrap();
        let (a0, b0) = (c(re, im), c(bx.0, bx.1));
        let h = 1e-5;
        let tangent = |da: C64, db: C64| {
            let (p, m) = (data(a0 + da * h, b0 + db * h), data(a0 - da * h, b0 - db * h));
            let n = (p.alpha.sub(&m.alpha).scale_re(0.5 / h), p.beta.sub(&m.beta).scale_re(0.5 / h));
            let (kp, km) = (rg_c(&p, (0.2, 0.5)).unwrap(), rg_c(&m, (0.2, 0.5)).unwrap());
            let k = ((kp.alpha_k - km.alpha_k).scale_re(0.5 / h), (kp.beta_k - km.beta_k).scale_re(0.5 / h));
            (n, k)
        };
        let (n1, k1) = tangent(c(d1.0, d1.1), c(d1.2, d1.3));
        let (n2, k2) = tangent(c(d2.0, d2.1), c(d2.2, d2.3));
        let lhs = nahm_pairing((&n1.0, &n1.1), (&n2.0, &n2.1)) * (-2.0 * g.l);
        let rhs = kronheimer_pairing((&k1.0, &k1.1), (&k2.0, &k2.1));
        prop_assert!((lhs - rhs).norm() < 1e-8 * (1.0 + rhs.norm()));
    }

    #[test]
    fn images_solve_the_kronheimer_equation(which in 0usize..3, p in (-1.0..1.0f64, -1.0..1.0f64), x in (-1.0..1.0f64, -1.0..1.0f64)) {
        let g = make_grid(1.0, 32).unwrap();
        let f = match which {
            0 => Family::I { alpha0: c(0.4, 0.3), beta_x: c(p.0, p.1) },
            1 => Family::II { c: c(p.0, p.1) },
            _ => Family::III { c: c(p.0, p.1) },
        };
        let (x0, xl) = (c(x.0, x.1), c(x.1, -x.0));
        let k = rg_c(&complex_nahm_family(f, x0, xl, &g).unwrap(), (0.1, -0.7)).unwrap();
        prop_assert!(kronheimer_residual(&k) < 1e-10);
        prop_assert!((k.xi_kc - (xl - x0)).norm() < 1e-14);
        prop_assert!((k.xi_kr + 0.8).abs() < 1e-14);
    }

    #[test]
    fn sign_relation_is_reflexive(x in -1.0..1.0f64, y in -1.0..1.0f64) {
        prop_assert!(weakly_same_sign(x, x));
        prop_assert!(weakly_same_sign(x, 0.0));
        prop_assert!(chamber_below((x, y), (x, y)));
    }
}

#[test]
fn family_i_image_matches_closed_form() {
    let g = make_grid(1.3, 48).unwrap();
    let (a0, bx) = (c(0.5, 0.25), c(0.3, -0.2));
    let (x0, xl) = (c(0.2, 0.1), c(-0.4, 0.3));
    let k = rg_c(
        &complex_nahm_family(Family::I { alpha0: a0, beta_x: bx }, x0, xl, &g).unwrap(),
        (0.0, 1.0),
    )
    .unwrap();
    let want = Mat2::sigma_y() * ((xl - x0) / (a0 * 2.0)) + Mat2::sigma_x() * (bx * g.l);
    assert!((k.beta_k - want).max_abs() < 1e-10);
    assert!((k.alpha_k - Mat2::sigma_x() * a0).max_abs() < 1e-14);
}

#[test]
fn non_constant_alpha_is_rejected() {
    let g = make_grid(1.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = sample::complex_unitary(&mut rng, &g, [0.1, 0.2, 0.3], [0.0, -0.1, 0.2], 0.5);
    assert!(matches!(rg_c(&b, (0.1, 0.0)), Err(Error::NonConstantAlpha(_))));
}

#[test]
fn semistable_point_collapses_to_polystable() {
    let g = make_grid(1.0, 32).unwrap();
    let z = c(0.0, 0.0);
    let b = complex_nahm_family(Family::II { c: c(0.3, 0.1) }, z, z, &g).unwrap();
    assert_eq!(classify_stability(&b, (0.4, 0.4)), Stability::StrictlySemistableNonPoly);
    let p = s_equiv_collapse(&b, (0.4, 0.4)).unwrap();
    assert_eq!(classify_stability(&p, (0.4, 0.4)), Stability::StrictlyPolystable);
    assert!(matches!(s_equiv_collapse(&b, (0.0, 0.4)), Err(Error::UnstableInput)));
}

#[test]
fn resolution_needs_a_chamber_below() {
    let g = make_grid(1.0, 24).unwrap();
    let z = c(0.0, 0.0);
    let b = complex_nahm_family(Family::II { c: c(0.3, 0.1) }, z, z, &g).unwrap();
    assert!(matches!(
        resolution_map(&b, (0.5, 0.1), (-0.5, 0.1)),
        Err(Error::SignConditionViolated)
    ));
    assert!(resolution_map(&b, (0.5, 0.1), (0.5, 0.1)).is_ok());
}
