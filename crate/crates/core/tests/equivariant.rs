use d2alf::equivariant::{
    dft_pairing_rank, fi_dimension, flat_orbifold_spectrum, frobenius_check, smith_normal_form, weyl_group,
    EquivariantSpectralProblem, FiniteSubgroup, GroupKind, IntMatrix,
};
use d2alf::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn all_kinds() -> Vec<GroupKind> {
    let mut k: Vec<GroupKind> = (1..=8).map(GroupKind::Cyclic).collect();
    k.extend((2..=6).map(GroupKind::BinaryDihedral));
    k.extend([GroupKind::Tetrahedral, GroupKind::Octahedral, GroupKind::Icosahedral]);
    k
}

#[test]
fn character_tables_are_orthogonal_and_match_mckay() {
    for kind in all_kinds() {
        let g = FiniteSubgroup::new(kind).unwrap();
        assert_eq!(g.order(), kind.order(), "{}", kind.label());
        assert!(g.orthogonality_defect() < 1e-10, "{}", kind.label());
        assert_eq!(g.irrep_dims.iter().map(|d| d * d).sum::<usize>(), g.order());
        assert_eq!(fi_dimension(&g), kind.mckay_rank(), "{}", kind.label());
        assert!(frobenius_check(&g, &g).unwrap());
    }
}

#[test]
fn weyl_group_of_binary_tetrahedral() {
    let t = FiniteSubgroup::new(GroupKind::Tetrahedral).unwrap();
    let w = weyl_group(&t, &t).unwrap();
    assert_eq!(w.label(), "S3xS3");
    assert_eq!(w.order(), 36);
}

#[test]
fn group_labels_roundtrip() {
    for kind in all_kinds() {
        assert_eq!(GroupKind::parse(&kind.label()).unwrap(), kind);
    }
    assert_eq!(GroupKind::parse("E8").unwrap(), GroupKind::Icosahedral);
    assert!(GroupKind::parse("A4").is_err());
}

fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn det(a: &IntMatrix) -> f64 {
    DMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j] as f64).determinant()
}

proptest! {
    #[test]
    fn smith_form_is_a_unimodular_diagonalization(entries in prop::collection::vec(-6i64..7, 9)) {
        let a: IntMatrix = entries.chunks(3).map(|r| r.to_vec()).collect();
        let s = smith_normal_form(&a);
        let d = int_mul(&int_mul(&s.u, &a), &s.v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { s.diag[i] } else { 0 };
                prop_assert_eq!(d[i][j], want);
            }
        }
        prop_assert!((det(&s.u).abs() - 1.0).abs() < 1e-9);
        prop_assert!((det(&s.v).abs() - 1.0).abs() < 1e-9);
        for k in 0..2 {
            if s.diag[k] != 0 {
                prop_assert_eq!(s.diag[k + 1] % s.diag[k], 0);
            } else {
                prop_assert_eq!(s.diag[k + 1], 0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generic_orbifold_data_has_full_orbits(a in 0.0..2.0f64, phi in prop::array::uniform3(-1.0..1.0f64), seed in any::<u64>()) {
        let p = EquivariantSpectralProblem::new(32, a, phi, 3.0).with_gauge(seed);
        let r = flat_orbifold_spectrum(&p).unwrap();
        prop_assert!(r.orbit_ok);
        prop_assert!(r.max_heat_trace() < 1e-10);
        prop_assert_eq!(r.regular_defect, 0);
    }
}

#[test]
fn reflection_pairing_on_square_lattice() {
    let minus = DMatrix::from_diagonal_element(2, 2, -1.0);
    let r = dft_pairing_rank(&minus, &vec![vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(r.torus_order, 4);
    assert_eq!(r.dual_order, 4);
    assert!(r.perfect);
    assert!(r.unitarity_defect < 1e-12);
}

#[test]
fn hexagonal_rotation_pairing() {
    // Order-3 integer matrix with det(1 - γ) = 3.
    let gamma = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, -1.0]);
    let r = dft_pairing_rank(&gamma, &vec![vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(r.torus_order, 3);
    assert!(r.perfect);
}

#[test]
fn identity_action_is_not_isolated() {
    let id = DMatrix::<f64>::identity(2, 2);
    assert!(matches!(
        dft_pairing_rank(&id, &vec![vec![1, 0], vec![0, 1]]),
        Err(Error::NonIsolatedAction)
    ));
}
