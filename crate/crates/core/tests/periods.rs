use d2alf::periods::{icosphere, rotation_to_e1, sphere_to_projective};
use proptest::prelude::*;

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[test]
fn icosphere_counts_and_orientation() {
    for (level, faces) in [(0, 20), (1, 80), (2, 320)] {
        let (v, f) = icosphere(level);
        assert_eq!(f.len(), faces);
        // Euler characteristic of the sphere.
        assert_eq!(v.len() + f.len() - 3 * f.len() / 2, 2);
        for p in &v {
            assert!((dot(*p, *p) - 1.0).abs() < 1e-14);
        }
        for t in &f {
            let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
            let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [
                e1[1] * e2[2] - e1[2] * e2[1],
                e1[2] * e2[0] - e1[0] * e2[2],
                e1[0] * e2[1] - e1[1] * e2[0],
            ];
            assert!(dot(n, a) > 0.0);
        }
    }
}

#[test]
fn poles_map_to_coordinate_points() {
    let (a, c) = sphere_to_projective([0.0, 0.0, -1.0]);
    assert!((a.re - 1.0).abs() < 1e-15 && c.norm() < 1e-15);
    let (a, c) = sphere_to_projective([0.0, 0.0, 1.0]);
    assert!(a.norm() < 1e-15 && (c.re - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn charts_agree_projectively(th in 0.1..3.0f64, ph in 0.0..6.28f64) {
        let p = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let (a, c) = sphere_to_projective(p);
        // Both charts send p to the same ratio c/a = (x + iy)/(1 - z).
        let zeta = d2alf::algebra::C64::new(p[0], p[1]) / (1.0 - p[2]);
        prop_assert!((c - zeta * a).norm() < 1e-10 * (1.0 + zeta.norm()));
    }

    #[test]
    fn rotation_sends_direction_to_e1(d in prop::array::uniform3(-2.0..2.0f64)) {
        prop_assume!(dot(d, d) > 1e-6);
        let r = rotation_to_e1(d).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(r[i], r[j]) - want).abs() < 1e-12);
            }
        }
        let det = dot(r[0], [r[1][1] * r[2][2] - r[1][2] * r[2][1], r[1][2] * r[2][0] - r[1][0] * r[2][2], r[1][0] * r[2][1] - r[1][1] * r[2][0]]);
        prop_assert!((det - 1.0).abs() < 1e-12);
        let rd = [dot(r[0], d), dot(r[1], d), dot(r[2], d)];
        prop_assert!((rd[0] - dot(d, d).sqrt()).abs() < 1e-12 && rd[1].abs() < 1e-12 && rd[2].abs() < 1e-12);
    }
}

#[test]
fn zero_direction_is_rejected() {
    assert!(rotation_to_e1([0.0; 3]).is_err());
}
