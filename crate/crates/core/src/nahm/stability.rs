//! Good sublines, their degrees, and the stability classifier.
//!
//! A subline is a line field `ℓ(t) ⊂ ℂ²` preserved by `∂_α` and by `β`, with
//! `ℓ` equal to `ℂe₁` or `ℂe₂` at each endpoint. In the affine coordinate
//! `ℓ = v₂/v₁` it solves `∂ℓ = α₁₂ℓ² + (α₁₁ - α₂₂)ℓ - α₂₁`; we integrate the
//! equivalent linear system `∂v = -αv` in homogeneous coordinates.

use super::transport::transport_matrices;
use super::ComplexNahm;
use crate::algebra::{mat_vec, C64};

/// Which coordinate line a subline meets at an endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    /// `ℂe₁`, i.e. `ℓ = 0`.
    Plus,
    /// `ℂe₂`, i.e. `ℓ = ∞`.
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Debug)]
pub struct Subline {
    /// Unit-norm homogeneous representatives at every node.
    pub ell: Vec<[C64; 2]>,
    pub endpoint_signs: (Sign, Sign),
}

/// Projective chordal acceptance tolerance at `t = L`.
pub const CHORDAL_TOL: f64 = 1e-7;
/// Relative tolerance for the `β`-eigenline test.
pub const EIGENLINE_TOL: f64 = 1e-8;

fn normalize(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// All good sublines of `b` (at most two).
pub fn find_sublines(b: &ComplexNahm) -> Vec<Subline> {
    let pts = transport_matrices(&b.alpha);
    let beta_scale = 1.0 + b.beta.sup_norm();
    let mut out = Vec::new();
    for (start, s0) in [(0usize, Sign::Plus), (1usize, Sign::Minus)] {
        let ell: Vec<[C64; 2]> = pts.iter().map(|g| normalize([g.get(0, start), g.get(1, start)])).collect();
        let end = ell[ell.len() - 1];
        let s_l = if end[1].norm() < CHORDAL_TOL {
            Sign::Plus
        } else if end[0].norm() < CHORDAL_TOL {
            Sign::Minus
        } else {
            continue;
        };
        let eigen_ok = ell.iter().zip(&b.beta.values).all(|(v, beta)| {
            let w = mat_vec(beta, *v);
            (v[0] * w[1] - v[1] * w[0]).norm() <= EIGENLINE_TOL * beta_scale
        });
        if eigen_ok {
            out.push(Subline {
                ell,
                endpoint_signs: (s0, s_l),
            });
        }
    }
    out
}

/// `deg = s_L ξ^ℝ_L - s_0 ξ^ℝ_0` with `s = +1` for `ℂe₁`.
pub fn degree(sub: &Subline, xi_r0: f64, xi_rl: f64) -> f64 {
    let (s0, sl) = sub.endpoint_signs;
    sl.value() * xi_rl - s0.value() * xi_r0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    StrictlyPolystable,
    StrictlySemistableNonPoly,
    Unstable,
}

impl Stability {
    pub fn is_polystable(self) -> bool {
        matches!(self, Stability::Stable | Stability::StrictlyPolystable)
    }

    pub fn label(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::StrictlyPolystable => "strictly_polystable",
            Stability::StrictlySemistableNonPoly => "strictly_semistable",
            Stability::Unstable => "unstable",
        }
    }
}

/// Degrees within this distance of zero count as zero.
pub const DEGREE_ZERO_TOL: f64 = 1e-12;

pub fn classify_stability(b: &ComplexNahm, xi_r: (f64, f64)) -> Stability {
    classify_sublines(&find_sublines(b), xi_r)
}

/// Classification from an already computed list of sublines.
pub fn classify_sublines(subs: &[Subline], xi_r: (f64, f64)) -> Stability {
    let tol = DEGREE_ZERO_TOL * (1.0 + xi_r.0.abs() + xi_r.1.abs());
    let degs: Vec<f64> = subs.iter().map(|s| degree(s, xi_r.0, xi_r.1)).collect();
    if degs.iter().all(|d| *d < -tol) {
        Stability::Stable
    } else if degs.iter().any(|d| *d > tol) {
        Stability::Unstable
    } else if degs.len() == 2 {
        Stability::StrictlyPolystable
    } else {
        Stability::StrictlySemistableNonPoly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2;
    use crate::grid::make_grid;
    use crate::nahm::{boundary_diag, complex_nahm_family, Family};

    #[test]
    fn diagonal_data_has_both_lines() {
        let g = make_grid(1.0, 24).unwrap();
        let xi = C64::new(0.4, 0.0);
        let b = ComplexNahm::constant(&g, Mat2::zero(), boundary_diag(xi), xi, xi);
        let subs = find_sublines(&b);
        assert_eq!(subs.len(), 2);
        assert_eq!(classify_stability(&b, (1.0, 1.0)), Stability::StrictlyPolystable);
        assert_eq!(classify_stability(&b, (1.0, 2.0)), Stability::Unstable);
    }

    #[test]
    fn degree_bookkeeping() {
        let sub = |a, b| Subline {
            ell: vec![],
            endpoint_signs: (a, b),
        };
        assert_eq!(degree(&sub(Sign::Plus, Sign::Plus), 3.0, 5.0), 2.0);
        assert_eq!(degree(&sub(Sign::Plus, Sign::Minus), 3.0, 5.0), -8.0);
    }

    #[test]
    fn family_ii_wall() {
        let g = make_grid(1.0, 48).unwrap();
        let z = C64::new(0.0, 0.0);
        let b = complex_nahm_family(Family::II { c: C64::new(0.3, 0.1) }, z, z, &g).unwrap();
        let subs = find_sublines(&b);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].endpoint_signs, (Sign::Plus, Sign::Plus));
        assert_eq!(classify_stability(&b, (2.0, 1.0)), Stability::Stable);
        assert_eq!(classify_stability(&b, (1.0, 2.0)), Stability::Unstable);
        assert_eq!(classify_stability(&b, (1.5, 1.5)), Stability::StrictlySemistableNonPoly);
    }
}
