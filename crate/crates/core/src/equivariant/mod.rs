//! Finite-group and flat-orbifold layer: ADE subgroups of SU(2), FI dimensions, Weyl
//! groups, the torus pairing and the rank-one spectral check.

pub mod groups;
pub mod lattice;
pub mod spectral;

pub use groups::{
    fi_dimension, frobenius_check, generated_subgroup, restricted_regular_multiplicities, weyl_group, FiniteSubgroup, GroupKind,
    WeylGroup,
};
pub use lattice::{dft_pairing_rank, smith_normal_form, IntMatrix, PairingReport};
pub use spectral::{flat_orbifold_spectrum, EquivariantSpectralProblem, HeatTrace, SpectrumReport};
