//! The map from constant-`α` complex Nahm data to finite-dimensional Kronheimer data,
//! S-equivalence collapse, and the maps between stability chambers.

use serde_json::{json, Value};

use crate::algebra::{Mat2, C64, I};
use crate::error::{Error, Result};
use crate::grid::MatFn;
use crate::nahm::stability::{classify_sublines, find_sublines, Sign, Stability};
use crate::nahm::transport::transport_matrices;
use crate::nahm::{ComplexNahm, GaugeTransform};

/// Constant off-diagonal pair `(α^K, β^K)` with its FI parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KronheimerData {
    pub alpha_k: Mat2,
    pub beta_k: Mat2,
    pub xi_kr: f64,
    pub xi_kc: C64,
}

impl KronheimerData {
    pub fn to_json(&self) -> Value {
        let m = |x: &Mat2| {
            (0..2)
                .map(|i| (0..2).map(|j| [x.get(i, j).re, x.get(i, j).im]).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        json!({
            "alphaK": m(&self.alpha_k),
            "betaK": m(&self.beta_k),
            "xiKR": self.xi_kr,
            "xiKC": [self.xi_kc.re, self.xi_kc.im],
            "residual": kronheimer_residual(self),
        })
    }
}

/// Deviation from constancy tolerated in `α`.
pub const CONSTANT_ALPHA_TOL: f64 = 1e-9;

pub fn rg_c(b: &ComplexNahm, xi_r: (f64, f64)) -> Result<KronheimerData> {
    let dev = b.alpha_deviation();
    if dev > CONSTANT_ALPHA_TOL * (1.0 + b.alpha.sup_norm()) {
        return Err(Error::NonConstantAlpha(dev));
    }
    let g = b.grid();
    let entries: Vec<C64> = [(0, 1), (1, 0)]
        .iter()
        .map(|&(i, j)| g.integrate_c(&b.beta.values.iter().map(|m| m.get(i, j)).collect::<Vec<_>>()))
        .collect();
    let zero = C64::new(0.0, 0.0);
    Ok(KronheimerData {
        alpha_k: b.alpha.values[0],
        beta_k: Mat2::new(zero, entries[0], entries[1], zero),
        xi_kr: xi_r.1 - xi_r.0,
        xi_kc: b.xi_cl - b.xi_c0,
    })
}

/// `max|[α^K, β^K] - iξ^{K,ℂ}σ_z|`.
pub fn kronheimer_residual(k: &KronheimerData) -> f64 {
    (k.alpha_k.commutator(&k.beta_k) - Mat2::sigma_z() * (I * k.xi_kc)).max_abs()
}

/// Holomorphic symplectic pairing `Tr(δα δβ′ - δα′ δβ)` of Kronheimer tangent vectors.
pub fn kronheimer_pairing(a: (&Mat2, &Mat2), b: (&Mat2, &Mat2)) -> C64 {
    (*a.0 * *b.1 - *b.0 * *a.1).trace()
}

/// `-(1/2L)∫Tr(δα δβ′ - δα′ δβ)` of complex Nahm tangent vectors.
pub fn nahm_pairing(a: (&MatFn, &MatFn), b: (&MatFn, &MatFn)) -> C64 {
    let g = &a.0.grid;
    let v: Vec<C64> = (0..g.n)
        .map(|k| (a.0.values[k] * b.1.values[k] - b.0.values[k] * a.1.values[k]).trace())
        .collect();
    -g.integrate_c(&v) / (2.0 * g.l)
}

/// Semistable data collapsed to its polystable representative.
pub fn s_equiv_collapse(b: &ComplexNahm, xi_r: (f64, f64)) -> Result<ComplexNahm> {
    let subs = find_sublines(b);
    match classify_sublines(&subs, xi_r) {
        Stability::Stable | Stability::StrictlyPolystable => Ok(b.clone()),
        Stability::Unstable => Err(Error::UnstableInput),
        Stability::StrictlySemistableNonPoly => {
            let (s0, sl) = subs[0].endpoint_signs;
            if s0 == sl {
                Ok(graded(b))
            } else {
                let g1 = GaugeTransform::g1(b.grid());
                Ok(g1.inverse().act_complex_unchecked(&graded(&g1.act_complex_unchecked(b))))
            }
        }
    }
}

/// Gauge `α` away with the transport matrix and keep the diagonal part of `β`.
fn graded(b: &ComplexNahm) -> ComplexNahm {
    let g = b.grid();
    let p = transport_matrices(&b.alpha);
    let beta: Vec<Mat2> = p
        .iter()
        .zip(&b.beta.values)
        .map(|(pk, bk)| (pk.inverse() * *bk * *pk).diag_part())
        .collect();
    ComplexNahm::new(MatFn::zeros(g), MatFn::new(g, beta), b.xi_c0, b.xi_cl)
}

/// `x` weakly has the same sign as `y`.
pub fn weakly_same_sign(x: f64, y: f64) -> bool {
    (y <= 0.0 || x > 0.0) && (y >= 0.0 || x < 0.0)
}

/// `ξ^ℝ` weakly has the same sign as `ξ̃^ℝ`, on both `ξ₀ + ξ_L` and `ξ₀ - ξ_L`.
pub fn chamber_below(from: (f64, f64), to: (f64, f64)) -> bool {
    weakly_same_sign(from.0 + from.1, to.0 + to.1) && weakly_same_sign(from.0 - from.1, to.0 - to.1)
}

pub fn resolution_map(b: &ComplexNahm, from: (f64, f64), to: (f64, f64)) -> Result<ComplexNahm> {
    if !chamber_below(from, to) {
        return Err(Error::SignConditionViolated);
    }
    if !classify_sublines(&find_sublines(b), from).is_polystable() {
        return Err(Error::UnstableInput);
    }
    s_equiv_collapse(b, to)
}

/// Endpoint signs of every subline, for invariance checks.
pub fn subline_signs(b: &ComplexNahm) -> Vec<(Sign, Sign)> {
    let mut v: Vec<(Sign, Sign)> = find_sublines(b).iter().map(|s| s.endpoint_signs).collect();
    v.sort_by_key(|(a, b)| (a.symbol(), b.symbol()));
    v
}
