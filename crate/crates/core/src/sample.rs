//! Random smooth fields with prescribed endpoint behaviour, for property checks.

use std::f64::consts::PI;

use rand::Rng;

use crate::algebra::{herm_exp, Mat2, C64};
use crate::grid::{GridRef, MatFn};
use crate::nahm::{ComplexNahm, RealNahm};

/// Endpoint behaviour of a random scalar profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Free,
    /// Vanishes at both ends.
    Dirichlet,
    /// Zero derivative at both ends.
    Neumann,
}

/// Number of Fourier modes used by the random profiles.
pub const MODES: usize = 4;

pub fn scalar<R: Rng>(rng: &mut R, grid: &GridRef, p: Profile, amp: f64) -> Vec<f64> {
    let l = grid.l;
    let c: Vec<f64> = (0..=MODES).map(|_| rng.gen_range(-1.0..1.0) * amp).collect();
    let s: Vec<f64> = (0..=MODES).map(|_| rng.gen_range(-1.0..1.0) * amp).collect();
    grid.nodes
        .iter()
        .map(|&t| {
            let mut v = 0.0;
            for k in 0..=MODES {
                let damp = 1.0 / (1.0 + k as f64);
                let arg = k as f64 * PI * t / l;
                match p {
                    Profile::Dirichlet => v += damp * s[k] * arg.sin(),
                    Profile::Neumann => v += damp * c[k] * arg.cos(),
                    Profile::Free => v += damp * (c[k] * arg.cos() + s[k] * (arg + 0.3).sin()),
                }
            }
            v
        })
        .collect()
}

/// su(2)-valued field `-i x·σ` with the given profile per coefficient.
pub fn su2_field<R: Rng>(rng: &mut R, grid: &GridRef, p: [Profile; 3], amp: f64) -> MatFn {
    let cs: Vec<Vec<f64>> = p.iter().map(|pp| scalar(rng, grid, *pp, amp)).collect();
    MatFn::new(
        grid,
        (0..grid.n)
            .map(|k| Mat2::from_su2_coeffs([cs[0][k], cs[1][k], cs[2][k]]))
            .collect(),
    )
}

/// Hermitian traceless `η·σ` with gauge-parameter tags (diagonal ends, off-diagonal derivative).
pub fn hermitian_param<R: Rng>(rng: &mut R, grid: &GridRef, amp: f64) -> MatFn {
    let x = scalar(rng, grid, Profile::Dirichlet, amp);
    let y = scalar(rng, grid, Profile::Dirichlet, amp);
    let z = scalar(rng, grid, Profile::Neumann, amp);
    MatFn::new(
        grid,
        (0..grid.n).map(|k| Mat2::from_herm_coeffs([x[k], y[k], z[k]])).collect(),
    )
}

/// `exp` of a random Hermitian parameter: positive-definite, det 1, with gauge tags.
pub fn positive_gauge<R: Rng>(rng: &mut R, grid: &GridRef, amp: f64) -> MatFn {
    hermitian_param(rng, grid, amp).map(herm_exp)
}

/// `-i x·σ` with the same tags, i.e. a unitary gauge parameter.
pub fn skew_param<R: Rng>(rng: &mut R, grid: &GridRef, amp: f64) -> MatFn {
    su2_field(rng, grid, [Profile::Dirichlet, Profile::Dirichlet, Profile::Neumann], amp)
}

/// Random smooth real pre-Nahm data in `𝒜_ξ`.
pub fn real_nahm<R: Rng>(rng: &mut R, grid: &GridRef, xi0: [f64; 3], xi_l: [f64; 3], amp: f64) -> RealNahm {
    let l = grid.l;
    let a0 = su2_field(rng, grid, [Profile::Free, Profile::Free, Profile::Dirichlet], amp);
    let mut a = [a0.clone(), a0.clone(), a0.clone(), a0];
    for i in 0..3 {
        let f = su2_field(rng, grid, [Profile::Free, Profile::Free, Profile::Dirichlet], amp);
        let vals = f
            .values
            .iter()
            .zip(&grid.nodes)
            .map(|(m, &t)| {
                let zc = xi0[i] * (1.0 - t / l) + xi_l[i] * t / l;
                *m + Mat2::from_su2_coeffs([0.0, 0.0, zc])
            })
            .collect();
        a[i + 1] = MatFn::new(grid, vals);
    }
    RealNahm::new(a, xi0, xi_l)
}

/// Random tangent vector to `𝒜_ξ` (every `z` coefficient vanishing at the ends).
pub fn tangent<R: Rng>(rng: &mut R, grid: &GridRef, amp: f64) -> [MatFn; 4] {
    std::array::from_fn(|_| su2_field(rng, grid, [Profile::Free, Profile::Free, Profile::Dirichlet], amp))
}

/// Random unitary-frame complex data built from random real data.
pub fn complex_unitary<R: Rng>(rng: &mut R, grid: &GridRef, xi0: [f64; 3], xi_l: [f64; 3], amp: f64) -> ComplexNahm {
    real_nahm(rng, grid, xi0, xi_l, amp).to_complex()
}

/// Random smooth `ℂ²`-valued section.
pub fn section<R: Rng>(rng: &mut R, grid: &GridRef, amp: f64) -> Vec<[C64; 2]> {
    let parts: Vec<Vec<f64>> = (0..4).map(|_| scalar(rng, grid, Profile::Free, amp)).collect();
    (0..grid.n)
        .map(|k| [C64::new(parts[0][k], parts[1][k]), C64::new(parts[2][k], parts[3][k])])
        .collect()
}

pub fn uniform_xi<R: Rng>(rng: &mut R, amp: f64) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen_range(-amp..amp))
}
