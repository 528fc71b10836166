use d2alf::algebra::{eigh, herm_exp, herm_log, herm_sqrt, quasigroup_product, v3, Mat2, C64};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0..2.0f64)
}

fn herm(e: [f64; 3], a: f64) -> Mat2 {
    Mat2::identity() * a + Mat2::from_herm_coeffs(e)
}

proptest! {
    #[test]
    fn commutator_is_twice_cross_product(x in vec3(), y in vec3()) {
        let c = Mat2::from_su2_coeffs(x).commutator(&Mat2::from_su2_coeffs(y)).su2_coeffs();
        let want = v3::scale(v3::cross(x, y), 2.0);
        prop_assert!(v3::norm(v3::sub(c, want)) < 1e-12);
    }

    #[test]
    fn su2_coefficients_roundtrip(x in vec3()) {
        let m = Mat2::from_su2_coeffs(x);
        prop_assert!(m.is_su2(1e-14));
        prop_assert!(v3::norm(v3::sub(m.su2_coeffs(), x)) < 1e-14);
    }

    #[test]
    fn exp_and_log_are_inverse(e in vec3(), a in -1.0..1.0f64) {
        let h = herm(e, a);
        let back = herm_log(&herm_exp(&h)).unwrap();
        prop_assert!((back - h).max_abs() < 1e-10 * (1.0 + h.max_abs()));
    }

    #[test]
    fn sqrt_squares_back(e in vec3()) {
        let g = herm_exp(&Mat2::from_herm_coeffs(e));
        let s = herm_sqrt(&g).unwrap();
        prop_assert!((s * s - g).max_abs() < 1e-10 * g.max_abs());
    }

    #[test]
    fn eigh_diagonalizes(e in vec3(), a in -1.0..1.0f64) {
        let h = herm(e, a);
        let s = eigh(&h);
        prop_assert!(s.values[0] <= s.values[1]);
        for k in 0..2 {
            let v = s.vectors[k];
            let hv = [h.get(0, 0) * v[0] + h.get(0, 1) * v[1], h.get(1, 0) * v[0] + h.get(1, 1) * v[1]];
            let r = (hv[0] - v[0] * s.values[k]).norm() + (hv[1] - v[1] * s.values[k]).norm();
            prop_assert!(r < 1e-12 * (1.0 + h.max_abs()));
        }
    }

    #[test]
    fn quasigroup_product_is_polar_factor(e1 in vec3(), e2 in vec3()) {
        let g1 = herm_exp(&Mat2::from_herm_coeffs(v3::scale(e1, 0.5)));
        let g2 = herm_exp(&Mat2::from_herm_coeffs(v3::scale(e2, 0.5)));
        let p = quasigroup_product(&g1, &g2).unwrap();
        prop_assert!(p.is_hermitian(1e-10 * p.max_abs()));
        // p⁻¹ g1 g2² g1 p⁻¹ = 1 with p positive.
        let pinv = p.inverse();
        let id = pinv * g1 * g2 * g2 * g1 * pinv;
        prop_assert!((id - Mat2::identity()).max_abs() < 1e-9 * (1.0 + g1.max_abs() * g2.max_abs()).powi(2));
        prop_assert!((p.det() - C64::new(1.0, 0.0)).norm() < 1e-9);
    }
}

#[test]
fn log_rejects_indefinite_matrices() {
    assert!(herm_log(&Mat2::from_herm_coeffs([0.0, 0.0, 2.0])).is_err());
    assert!(herm_sqrt(&Mat2::sigma_x()).is_err());
}
