use d2alf::algebra::{Mat2, C64};
use d2alf::connection::{
    coulomb_defect, curvature_closed_form, curvature_coeffs, horizontal_lift, parallel_transport_path, segment_wall_distance,
    wall_distance, End, TransportOptions, XiPair,
};
use d2alf::duy::{gauge_invariants, solve_duy, DuyOptions};
use d2alf::grid::make_grid;
use d2alf::nahm::{complex_nahm_family, Family, RealNahm};
use d2alf::Error;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn start(n: usize, xi: XiPair) -> RealNahm {
    let g = make_grid(1.0, n).unwrap();
    let b = complex_nahm_family(
        Family::I {
            alpha0: c(0.45, 0.3),
            beta_x: c(0.25, -0.1),
        },
        c(xi.0[1], xi.0[2]),
        c(xi.1[1], xi.1[2]),
        &g,
    )
    .unwrap();
    solve_duy(&b, (xi.0[0], xi.1[0]), &DuyOptions::default()).unwrap().a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn curvature_matches_closed_form(cc in 0.3..1.2f64, l in 0.6..1.4f64) {
        let g = make_grid(l, 64).unwrap();
        let z = Mat2::zero();
        let a = RealNahm::constant(&g, [z, Mat2::sigma_x() * c(0.0, cc), z, z], [0.0; 3], [0.0; 3]);
        let k = curvature_coeffs(&a, (2, End::End), (3, End::End)).unwrap();
        let want = curvature_closed_form(cc, l);
        for (comp, field) in k.iter().enumerate() {
            for x in field {
                let t = if comp == 0 { [-want, 0.0, 0.0] } else { [0.0; 3] };
                let err = (0..3).map(|q| (x[q] - t[q]).abs()).fold(0.0, f64::max);
                prop_assert!(err < 1e-6 * want);
            }
        }
    }
}

#[test]
fn curvature_is_antisymmetric_in_its_slots() {
    let g = make_grid(1.0, 48).unwrap();
    let a = start(48, ([0.5, 0.1, -0.2], [-0.3, 0.2, 0.3]));
    assert!(a.grid().same_as(&g));
    let p = curvature_coeffs(&a, (1, End::Start), (2, End::End)).unwrap();
    let q = curvature_coeffs(&a, (2, End::End), (1, End::Start)).unwrap();
    for (fp, fq) in p.iter().zip(&q) {
        for (x, y) in fp.iter().zip(fq) {
            for k in 0..3 {
                assert!((x[k] + y[k]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn horizontal_lift_is_in_coulomb_gauge() {
    let a = start(40, ([0.5, 0.1, -0.2], [-0.3, 0.2, 0.3]));
    let v = horizontal_lift(&a, [0.1, -0.2, 0.3], [0.0, 0.4, -0.1]).unwrap();
    assert!(coulomb_defect(&a, &v) < 1e-8);
}

#[test]
fn there_and_back_returns_to_start() {
    let p: XiPair = ([0.5, 0.1, -0.2], [-0.3, 0.2, 0.3]);
    let q: XiPair = ([0.6, 0.15, -0.2], [-0.3, 0.1, 0.35]);
    let a = start(32, p);
    let r = parallel_transport_path(&a, &[p, q, p], &TransportOptions::default()).unwrap();
    assert!(r.max_residual < 1e-9);
    let (h0, t0) = gauge_invariants(&a);
    let (h1, t1) = gauge_invariants(&r.a);
    assert!((h0 - h1).norm() < 1e-6 && (t0 - t1).norm() < 1e-6);
}

#[test]
fn transport_stops_at_the_wall() {
    let p: XiPair = ([0.5, 0.0, 0.0], [-0.3, 0.0, 0.0]);
    let q: XiPair = ([0.5, 0.0, 0.0], [0.7, 0.0, 0.0]);
    let a = start(24, p);
    let r = parallel_transport_path(&a, &[p, q], &TransportOptions::default());
    assert!(matches!(r, Err(Error::PathHitsWall(_))));
    assert!(wall_distance(&([0.5, 0.0, 0.0], [0.5, 0.0, 0.0])) == 0.0);
}

proptest! {
    #[test]
    fn segment_distance_bounds_sampled_distance(a in prop::array::uniform6(-1.0..1.0f64), b in prop::array::uniform6(-1.0..1.0f64)) {
        let pa: XiPair = ([a[0], a[1], a[2]], [a[3], a[4], a[5]]);
        let pb: XiPair = ([b[0], b[1], b[2]], [b[3], b[4], b[5]]);
        let seg = segment_wall_distance(&pa, &pb);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let f = |x: [f64; 3], y: [f64; 3]| std::array::from_fn(|i| x[i] + s * (y[i] - x[i]));
            let x: XiPair = (f(pa.0, pb.0), f(pa.1, pb.1));
            // The segment value uses the larger endpoint size, so it never exceeds a sample.
            prop_assert!(seg <= wall_distance(&x) + 1e-12);
        }
    }
}

#[test]
fn transport_rejects_a_mismatched_start() {
    let p: XiPair = ([0.5, 0.1, -0.2], [-0.3, 0.2, 0.3]);
    let a = start(24, p);
    let off: XiPair = ([0.4, 0.1, -0.2], [-0.3, 0.2, 0.3]);
    assert!(matches!(
        parallel_transport_path(&a, &[off, p], &TransportOptions::default()),
        Err(Error::InvalidParams(_))
    ));
}
