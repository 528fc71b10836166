//! Two-by-two complex matrix algebra.
//!
//! Everything in the crate is built on [`Mat2`]: Pauli decomposition, Lie
//! brackets, closed-form Hermitian spectral calculus, and the positive-definite
//! quasigroup product used by the DUY solver.
//!
//! Coefficient convention: an element of su(2) is written `A = -i(a_x σ_x + a_y σ_y + a_z σ_z)`
//! with real `a`, and its complexification uses the same formula with complex
//! `a`. In these coordinates `[A, B] <-> 2 a × b`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for the structural predicates.
pub const STRUCT_TOL: f64 = 1e-10;

pub const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense 2×2 complex matrix stored row-major as `[m00, m01, m10, m11]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([a, b, c, d])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([a.into(), b.into(), c.into(), d.into()])
    }

    pub const fn zero() -> Self {
        Mat2([ZERO; 4])
    }

    pub const fn identity() -> Self {
        Mat2([ONE, ZERO, ZERO, ONE])
    }

    pub fn sigma_x() -> Self {
        Mat2([ZERO, ONE, ONE, ZERO])
    }

    pub fn sigma_y() -> Self {
        Mat2([ZERO, -I, I, ZERO])
    }

    pub fn sigma_z() -> Self {
        Mat2([ONE, ZERO, ZERO, -ONE])
    }

    pub fn sigma(k: usize) -> Self {
        match k {
            0 => Self::sigma_x(),
            1 => Self::sigma_y(),
            2 => Self::sigma_z(),
            _ => panic!("Pauli index {k} out of range"),
        }
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([a, ZERO, ZERO, d])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[2 * r + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.0[2 * r + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a, c, b, d])
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> C64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    /// Inverse of an invertible matrix. Panics never; a singular input yields non-finite entries.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.0;
        let det = self.det();
        Mat2([d / det, -b / det, -c / det, a / det])
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|x| x * s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Mat2(self.0.map(|x| x * s))
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn diag_part(&self) -> Mat2 {
        Mat2([self.0[0], ZERO, ZERO, self.0[3]])
    }

    pub fn offdiag_part(&self) -> Mat2 {
        Mat2([ZERO, self.0[1], self.0[2], ZERO])
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Mat2 {
        (*self + self.adjoint()).scale_re(0.5)
    }

    /// Skew-Hermitian part `(M - M†)/2`.
    pub fn skew_part(&self) -> Mat2 {
        (*self - self.adjoint()).scale_re(0.5)
    }

    pub fn traceless_part(&self) -> Mat2 {
        let t = self.trace() * 0.5;
        Mat2([self.0[0] - t, self.0[1], self.0[2], self.0[3] - t])
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        (*self + self.adjoint()).max_abs() <= tol
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().norm() <= tol
    }

    pub fn is_su2(&self, tol: f64) -> bool {
        self.is_skew_hermitian(tol) && self.is_traceless(tol)
    }

    pub fn is_sl2c(&self, tol: f64) -> bool {
        self.is_traceless(tol)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.0[1].norm() <= tol && self.0[2].norm() <= tol
    }

    pub fn is_offdiagonal(&self, tol: f64) -> bool {
        self.0[0].norm() <= tol && self.0[3].norm() <= tol
    }

    /// Components in the Pauli basis: `M = s_0 I + Σ s_k σ_k`, returns `(s_0, [s_x, s_y, s_z])`.
    pub fn pauli_components(&self) -> (C64, [C64; 3]) {
        let [a, b, c, d] = self.0;
        let s0 = (a + d) * 0.5;
        let sx = (b + c) * 0.5;
        let sy = (b - c) * 0.5 * I;
        let sz = (a - d) * 0.5;
        (s0, [sx, sy, sz])
    }

    /// Coefficients `c` with `M = -i c·σ` (valid for traceless `M`).
    pub fn coeffs(&self) -> [C64; 3] {
        let (_, s) = self.pauli_components();
        s.map(|x| x * I)
    }

    /// Inverse of [`Mat2::coeffs`].
    pub fn from_coeffs(c: [C64; 3]) -> Mat2 {
        let s = c.map(|x| -x * I);
        from_sigma(s)
    }

    /// Real coefficients `a` with `M = -i a·σ`; the imaginary parts are dropped.
    pub fn su2_coeffs(&self) -> [f64; 3] {
        self.coeffs().map(|x| x.re)
    }

    pub fn from_su2_coeffs(a: [f64; 3]) -> Mat2 {
        Mat2::from_coeffs(a.map(C64::from))
    }

    /// Real coefficients `η` of a traceless Hermitian matrix `η·σ`.
    pub fn herm_coeffs(&self) -> [f64; 3] {
        self.pauli_components().1.map(|x| x.re)
    }

    pub fn from_herm_coeffs(e: [f64; 3]) -> Mat2 {
        from_sigma(e.map(C64::from))
    }
}

/// Assemble `Σ s_k σ_k`.
pub fn from_sigma(s: [C64; 3]) -> Mat2 {
    Mat2([s[2], s[0] - I * s[1], s[0] + I * s[1], -s[2]])
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl SubAssign for Mat2 {
    fn sub_assign(&mut self, o: Mat2) {
        *self = *self - o;
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|x| -x))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale_re(s)
    }
}

/// Matrix-vector product.
pub fn mat_vec(m: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [m.0[0] * v[0] + m.0[1] * v[1], m.0[2] * v[0] + m.0[3] * v[1]]
}

/// Expand a traceless skew-Hermitian matrix as `M = -i(xσ_x + yσ_y + zσ_z)`.
pub fn pauli_expand(m: &Mat2) -> Result<(f64, f64, f64)> {
    let defect = (*m + m.adjoint()).max_abs();
    if defect > STRUCT_TOL {
        return Err(Error::NotSkewHermitian(defect));
    }
    if !m.is_traceless(STRUCT_TOL) {
        return Err(Error::NotTraceless(m.trace().norm()));
    }
    let [x, y, z] = m.su2_coeffs();
    Ok((x, y, z))
}

/// Inverse of [`pauli_expand`].
pub fn pauli_assemble(x: f64, y: f64, z: f64) -> Mat2 {
    Mat2::from_su2_coeffs([x, y, z])
}

/// Closed-form spectral data of a Hermitian matrix `a I + η·σ`.
#[derive(Clone, Copy, Debug)]
pub struct HermSpectrum {
    /// Eigenvalues in ascending order.
    pub values: [f64; 2],
    /// Orthonormal eigenvectors, `vectors[k]` belongs to `values[k]`.
    pub vectors: [[C64; 2]; 2],
}

/// Eigendecomposition of a Hermitian 2×2 matrix from its trace and Pauli vector.
pub fn eigh(h: &Mat2) -> HermSpectrum {
    let a = 0.5 * (h.0[0].re + h.0[3].re);
    let (_, s) = h.pauli_components();
    let e = [s[0].re, s[1].re, s[2].re];
    let r = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    if r <= 1e-300 {
        return HermSpectrum {
            values: [a, a],
            vectors: [[ONE, ZERO], [ZERO, ONE]],
        };
    }
    let n = [e[0] / r, e[1] / r, e[2] / r];
    // Projector onto the +1 eigenspace of n·σ is (I + n·σ)/2; pick its better-conditioned column.
    let off = C64::new(n[0], n[1]); // (n·σ)_{10}
    let up = if n[2] >= 0.0 {
        let v = [C64::new(1.0 + n[2], 0.0), off];
        normalize2(v)
    } else {
        let v = [off.conj(), C64::new(1.0 - n[2], 0.0)];
        normalize2(v)
    };
    // Orthogonal complement.
    let down = [-up[1].conj(), up[0].conj()];
    HermSpectrum {
        values: [a - r, a + r],
        vectors: [down, up],
    }
}

fn normalize2(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Split a Hermitian matrix into `(a, η, r)` with `h = aI + η·σ`, `r = |η|`.
fn herm_split(h: &Mat2) -> (f64, [f64; 3], f64) {
    let a = 0.5 * (h.0[0].re + h.0[3].re);
    let (_, s) = h.pauli_components();
    let e = [s[0].re, s[1].re, s[2].re];
    let r = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    (a, e, r)
}

fn herm_join(c0: f64, c1: f64, e: [f64; 3]) -> Mat2 {
    Mat2::identity() * c0 + Mat2::from_herm_coeffs([c1 * e[0], c1 * e[1], c1 * e[2]])
}

/// Exponential of a Hermitian matrix.
pub fn herm_exp(h: &Mat2) -> Mat2 {
    let (a, e, r) = herm_split(h);
    let ea = a.exp();
    let shc = if r < 1e-4 {
        1.0 + r * r / 6.0 + r.powi(4) / 120.0
    } else {
        r.sinh() / r
    };
    herm_join(ea * r.cosh(), ea * shc, e)
}

/// Logarithm of a Hermitian positive-definite matrix.
pub fn herm_log(g: &Mat2) -> Result<Mat2> {
    check_pd(g)?;
    let (a, e, r) = herm_split(g);
    let x = r / a;
    let ratio = if x < 1e-4 {
        (1.0 + x * x / 3.0 + x.powi(4) / 5.0) / a
    } else {
        x.atanh() / r
    };
    let l0 = 0.5 * ((a + r).ln() + (a - r).ln());
    Ok(herm_join(l0, ratio, e))
}

/// Square root of a Hermitian positive-definite matrix.
pub fn herm_sqrt(g: &Mat2) -> Result<Mat2> {
    check_pd(g)?;
    let (a, e, r) = herm_split(g);
    let sp = (a + r).sqrt();
    let sm = (a - r).sqrt();
    Ok(herm_join(0.5 * (sp + sm), 1.0 / (sp + sm), e))
}

fn check_pd(g: &Mat2) -> Result<()> {
    let scale = 1.0 + g.max_abs();
    if !g.is_hermitian(STRUCT_TOL * scale) {
        return Err(Error::NotHermitian((*g - g.adjoint()).max_abs()));
    }
    let (a, _, r) = herm_split(g);
    let lmin = a - r;
    if !(lmin > 0.0) {
        return Err(Error::NotPositiveDefinite(lmin));
    }
    Ok(())
}

/// The quasigroup product `g1 × g2 = (g1 g2² g1)^{1/2}` on positive-definite matrices.
///
/// This is the positive factor of the polar decomposition of `g1 g2`.
pub fn quasigroup_product(g1: &Mat2, g2: &Mat2) -> Result<Mat2> {
    check_pd(g1)?;
    check_pd(g2)?;
    let m = (*g1 * *g2 * *g2 * *g1).hermitian_part();
    herm_sqrt(&m)
}

/// Positive factor `p = (g g†)^{1/2}` of the left polar decomposition `g = p u`.
pub fn positive_part(g: &Mat2) -> Result<Mat2> {
    herm_sqrt(&(*g * g.adjoint()).hermitian_part())
}

/// Exponential of an arbitrary traceless matrix via `M² = -det(M) I`.
pub fn exp_traceless(m: &Mat2) -> Mat2 {
    let d = -m.det();
    let (c, s) = ch_sh(d);
    Mat2::identity() * c + *m * s
}

/// `(cosh √z, sinh √z / √z)` as entire functions of `z`.
pub fn ch_sh(z: C64) -> (C64, C64) {
    if z.norm() < 1e-3 {
        // Taylor series, accurate to well below 1e-16 at this radius.
        let mut c = ZERO;
        let mut s = ZERO;
        let mut term_c = ONE;
        let mut term_s = ONE;
        for k in 0..10 {
            c += term_c;
            s += term_s;
            let kf = k as f64;
            term_c = term_c * z / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            term_s = term_s * z / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        (c, s)
    } else {
        let w = z.sqrt();
        (w.cosh(), w.sinh() / w)
    }
}

/// Apply a two-variable function through the Hermitian spectral calculus:
/// with `h = Σ λ_i w_i w_i†` and `A = Σ a_ij w_i w_j†`, returns `Σ a_ij F(λ_j, λ_i) w_i w_j†`.
pub fn herm_bifunction<F: Fn(f64, f64) -> f64>(h: &Mat2, a: &Mat2, f: F) -> Mat2 {
    let sp = eigh(h);
    let w = sp.vectors;
    let mut out = Mat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            // a_ij = w_i† A w_j
            let aw = mat_vec(a, w[j]);
            let aij = w[i][0].conj() * aw[0] + w[i][1].conj() * aw[1];
            let coef = aij * f(sp.values[j], sp.values[i]);
            for r in 0..2 {
                for c in 0..2 {
                    let v = out.get(r, c) + coef * w[i][r] * w[j][c].conj();
                    out.set(r, c, v);
                }
            }
        }
    }
    out
}

/// Real 3-vector helpers for su(2) coefficient arithmetic.
pub mod v3 {
    pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
        [a[0] * s, a[1] * s, a[2] * s]
    }

    pub fn norm(a: [f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }

    /// Matrix of `x ↦ a × x`.
    pub fn cross_matrix(a: [f64; 3]) -> [[f64; 3]; 3] {
        [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
    }
}

/// Levi-Civita symbol on indices `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() < tol
    }

    #[test]
    fn pauli_basis_cases() {
        let m = Mat2::sigma_z() * (-I);
        assert_eq!(pauli_expand(&m).unwrap(), (0.0, 0.0, 1.0));
        assert_eq!(pauli_expand(&Mat2::zero()).unwrap(), (0.0, 0.0, 0.0));
        let m = (Mat2::sigma_x() * 2.0 - Mat2::sigma_y()) * (-I);
        let (x, y, z) = pauli_expand(&m).unwrap();
        assert!((x - 2.0).abs() < 1e-15 && (y + 1.0).abs() < 1e-15 && z.abs() < 1e-15);
    }

    #[test]
    fn pauli_rejects_hermitian() {
        assert!(matches!(pauli_expand(&Mat2::sigma_x()), Err(Error::NotSkewHermitian(_))));
    }

    #[test]
    fn commutator_coefficients() {
        let a = [0.3, -1.2, 0.5];
        let b = [0.7, 0.1, -0.4];
        let lhs = Mat2::from_su2_coeffs(a).commutator(&Mat2::from_su2_coeffs(b));
        let rhs = Mat2::from_su2_coeffs(v3::scale(v3::cross(a, b), 2.0));
        assert!(close(&lhs, &rhs, 1e-15));
    }

    #[test]
    fn exp_log_cases() {
        assert!(close(&herm_exp(&Mat2::zero()), &Mat2::identity(), 1e-16));
        let e = std::f64::consts::E;
        let l = herm_log(&Mat2::real(e, 0.0, 0.0, 1.0 / e)).unwrap();
        assert!(close(&l, &Mat2::real(1.0, 0.0, 0.0, -1.0), 1e-15));
        let h = Mat2::sigma_x() * 0.3;
        assert!(close(&herm_log(&herm_exp(&h)).unwrap(), &h, 1e-14));
        assert!(matches!(
            herm_log(&Mat2::real(1.0, 0.0, 0.0, -1.0)),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn quasigroup_cases() {
        let g = herm_exp(&(Mat2::sigma_x() * 0.4 + Mat2::sigma_z() * 0.1));
        assert!(close(&quasigroup_product(&Mat2::identity(), &g).unwrap(), &g, 1e-14));
        let e = std::f64::consts::E;
        let d = Mat2::real(e, 0.0, 0.0, 1.0 / e);
        let p = quasigroup_product(&d, &d).unwrap();
        assert!(close(&p, &Mat2::real(e * e, 0.0, 0.0, 1.0 / (e * e)), 1e-13));
    }

    #[test]
    fn eigh_reconstructs() {
        let h = Mat2::from_herm_coeffs([0.2, -0.7, 0.4]) + Mat2::identity() * 0.3;
        let sp = eigh(&h);
        for k in 0..2 {
            let hv = mat_vec(&h, sp.vectors[k]);
            for r in 0..2 {
                assert!((hv[r] - sp.vectors[k][r] * sp.values[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn traceless_exp_matches_series() {
        let m = Mat2::from_coeffs([C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(0.05, 0.0)]);
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..30 {
            term = term * m * (1.0 / k as f64);
            sum += term;
        }
        assert!(close(&exp_traceless(&m), &sum, 1e-14));
    }
}
