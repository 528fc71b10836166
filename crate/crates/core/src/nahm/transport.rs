//! Parallel transport of `∂ + α` and the axial normal form of `α`.
//!
//! Convention: the transport `g` solves `∂g + αg = 0` with `g(0) = Id`; the
//! returned matrix is `g(L)`. Under a gauge transformation `h` the transport
//! changes to `h(L)⁻¹ g(L) h(0)`, so `H = g₁₁ g₂₂` is a gauge invariant.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::algebra::{Mat2, C64, I};
use crate::error::{Error, Result};
use crate::grid::MatFn;

/// Transport matrices `g(t_k)` at every node, by Chebyshev collocation.
pub fn transport_matrices(alpha: &MatFn) -> Vec<Mat2> {
    let g = &alpha.grid;
    let n = g.n;
    let mut m = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for i in 1..n {
        for j in 0..n {
            let d = C64::new(g.diff[(i, j)], 0.0);
            m[(2 * i, 2 * j)] += d;
            m[(2 * i + 1, 2 * j + 1)] += d;
        }
        let a = alpha.values[i];
        for r in 0..2 {
            for s in 0..2 {
                m[(2 * i + r, 2 * i + s)] += a.get(r, s);
            }
        }
    }
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 1)] = C64::new(1.0, 0.0);
    let mut rhs = DMatrix::<C64>::zeros(2 * n, 2);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    rhs[(1, 1)] = C64::new(1.0, 0.0);
    let sol = m.lu().solve(&rhs).expect("transport collocation system is nonsingular");
    (0..n)
        .map(|k| Mat2::new(sol[(2 * k, 0)], sol[(2 * k, 1)], sol[(2 * k + 1, 0)], sol[(2 * k + 1, 1)]))
        .collect()
}

/// Transport across the whole interval.
pub fn parallel_transport(alpha: &MatFn) -> Mat2 {
    *transport_matrices(alpha).last().expect("nonempty grid")
}

/// The double-coset invariant `H(PT) = PT₁₁ PT₂₂`.
pub fn double_coset_invariant(pt: &Mat2) -> C64 {
    pt.get(0, 0) * pt.get(1, 1)
}

/// Axial-gauge class of a connection on `[0, L]` up to complex gauge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxialClass {
    /// `α₀ σ_x` with `α₀ = a + ic`, `c ∈ [0, π/2L]`.
    I { alpha0: C64 },
    /// Upper nilpotent `[[0, 1/L], [0, 0]]`.
    II,
    /// Lower nilpotent `[[0, 0], [1/L, 0]]`.
    III,
    /// Class II twisted by the extended transformation `exp(πitσ_x/2L)`.
    IV,
    /// Class III twisted likewise.
    V,
}

impl AxialClass {
    pub fn label(&self) -> &'static str {
        match self {
            AxialClass::I { .. } => "i",
            AxialClass::II => "ii",
            AxialClass::III => "iii",
            AxialClass::IV => "iv",
            AxialClass::V => "v",
        }
    }
}

/// Ambiguity window on the invariant `H` near the non-Hausdorff fibres.
pub const AXIAL_WINDOW: f64 = 1e-8;

/// Classify `α` from its transport.
pub fn axial_normal_form(alpha: &MatFn) -> Result<AxialClass> {
    classify_transport(&parallel_transport(alpha), alpha.grid.l)
}

/// Classify a transport matrix over an interval of length `l`.
pub fn classify_transport(pt: &Mat2, l: f64) -> Result<AxialClass> {
    let w = AXIAL_WINDOW;
    let h = double_coset_invariant(pt);
    let small = |z: C64| z.norm() < w;
    if (h - 1.0).norm() < w {
        return match (small(pt.get(0, 1)), small(pt.get(1, 0))) {
            (true, true) => Ok(AxialClass::I {
                alpha0: C64::new(0.0, 0.0),
            }),
            (false, true) => Ok(AxialClass::II),
            (true, false) => Ok(AxialClass::III),
            (false, false) => Err(Error::Degenerate(format!(
                "H = {h} is within {w:e} of 1 but both off-diagonal transport entries are nonzero"
            ))),
        };
    }
    if h.norm() < w {
        return match (small(pt.get(0, 0)), small(pt.get(1, 1))) {
            (true, true) => Ok(AxialClass::I {
                alpha0: C64::new(0.0, PI / (2.0 * l)),
            }),
            (true, false) => Ok(AxialClass::IV),
            (false, true) => Ok(AxialClass::V),
            (false, false) => Err(Error::Degenerate(format!(
                "H = {h} is within {w:e} of 0 but both diagonal transport entries are nonzero"
            ))),
        };
    }
    Ok(AxialClass::I {
        alpha0: alpha0_from_invariant(h, l),
    })
}

/// Solve `cosh²(α₀ L) = H` for `α₀` in the fundamental domain of class (i).
pub fn alpha0_from_invariant(h: C64, l: f64) -> C64 {
    let z = h.sqrt();
    let mut wv = (z + (z - 1.0).sqrt() * (z + 1.0).sqrt()).ln();
    // Reduce the imaginary part modulo π into [0, π).
    let k = (wv.im / PI).floor();
    wv -= I * (k * PI);
    if wv.im > 0.5 * PI {
        wv = I * PI - wv;
    }
    let eps = 1e-12;
    if wv.im.abs() < eps {
        wv = C64::new(wv.re.abs(), 0.0);
    } else if (wv.im - 0.5 * PI).abs() < eps {
        wv = C64::new(wv.re.abs(), 0.5 * PI);
    }
    wv / l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::exp_traceless;
    use crate::grid::make_grid;

    #[test]
    fn zero_connection() {
        let g = make_grid(1.0, 16).unwrap();
        let pt = parallel_transport(&MatFn::zeros(&g));
        assert!((pt - Mat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn constant_connection() {
        let l = 1.4;
        let c = 0.6;
        let g = make_grid(l, 48).unwrap();
        let a = Mat2::sigma_x() * (I * c);
        let pt = parallel_transport(&MatFn::constant(&g, a));
        let want = exp_traceless(&(a * (-l)));
        assert!((pt - want).max_abs() < 1e-12);
        match axial_normal_form(&MatFn::constant(&g, a)).unwrap() {
            AxialClass::I { alpha0 } => assert!((alpha0 - I * c).norm() < 1e-10),
            other => panic!("unexpected class {other:?}"),
        }
    }

    #[test]
    fn twisted_classes_from_zero_pattern() {
        let pt_iv = Mat2::new(C64::new(0.0, 0.0), -I, -I, I);
        assert_eq!(classify_transport(&pt_iv, 1.0).unwrap(), AxialClass::IV);
        let pt_ii = Mat2::real(1.0, -1.0, 0.0, 1.0);
        assert_eq!(classify_transport(&pt_ii, 1.0).unwrap(), AxialClass::II);
    }
}
