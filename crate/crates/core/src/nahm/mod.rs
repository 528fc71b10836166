//! Pre-Nahm data on `[0, L]`, moment maps and gauge actions.
//!
//! Real data is a quadruple `(A⁰, A¹, A², A³)` of su(2)-valued fields; complex
//! data is `(α, β) = (A⁰ + iA¹, A² + iA³)`. Endpoint conditions: `A⁰` and `α`
//! are off-diagonal at both ends, `A^i` has diagonal part `-iξ^i σ_z`, and `β`
//! has diagonal part `-iξ^ℂ σ_z`.

pub mod families;
pub mod stability;
pub mod transport;

use crate::algebra::{levi_civita, Mat2, C64, I, STRUCT_TOL};
use crate::error::{Error, Result};
use crate::grid::{BcTag, Constraint, GridRef, MatFn};

pub use families::{complex_nahm_family, Family, Special};
pub use stability::{classify_stability, degree, find_sublines, Sign, Stability, Subline};
pub use transport::{axial_normal_form, parallel_transport, transport_matrices, AxialClass};

/// `-iξσ_z`.
pub fn boundary_diag(xi: C64) -> Mat2 {
    Mat2::sigma_z() * (-I * xi)
}

/// Real pre-Nahm data with its FI parameters.
#[derive(Clone, Debug)]
pub struct RealNahm {
    pub a: [MatFn; 4],
    pub xi0: [f64; 3],
    pub xi_l: [f64; 3],
    pub l: f64,
}

/// Complex pre-Nahm data. The endpoint tags on `alpha` record its diagonal
/// endpoint value: zero in the standard frame, `ξ^ℝ σ_z` in the unitary frame.
#[derive(Clone, Debug)]
pub struct ComplexNahm {
    pub alpha: MatFn,
    pub beta: MatFn,
    pub xi_c0: C64,
    pub xi_cl: C64,
    pub l: f64,
}

impl RealNahm {
    pub fn new(a: [MatFn; 4], xi0: [f64; 3], xi_l: [f64; 3]) -> Self {
        let l = a[0].grid.l;
        let mut r = RealNahm { a, xi0, xi_l, l };
        r.set_tags();
        r
    }

    pub fn grid(&self) -> &GridRef {
        &self.a[0].grid
    }

    /// Constant data `(A⁰, A¹, A², A³)`.
    pub fn constant(grid: &GridRef, a: [Mat2; 4], xi0: [f64; 3], xi_l: [f64; 3]) -> Self {
        Self::new(a.map(|m| MatFn::constant(grid, m)), xi0, xi_l)
    }

    pub fn zero(grid: &GridRef) -> Self {
        Self::constant(grid, [Mat2::zero(); 4], [0.0; 3], [0.0; 3])
    }

    fn set_tags(&mut self) {
        self.a[0].bc0 = BcTag::value(Constraint::OffDiagonal);
        self.a[0].bc_l = BcTag::value(Constraint::OffDiagonal);
        for i in 0..3 {
            self.a[i + 1].bc0 = BcTag::value(Constraint::OffDiagonalPlus(boundary_diag(self.xi0[i].into())));
            self.a[i + 1].bc_l = BcTag::value(Constraint::OffDiagonalPlus(boundary_diag(self.xi_l[i].into())));
        }
    }

    /// Real su(2) coefficients of each component, node by node.
    pub fn coeffs(&self) -> [Vec<[f64; 3]>; 4] {
        std::array::from_fn(|mu| self.a[mu].values.iter().map(|m| m.su2_coeffs()).collect())
    }

    pub fn from_coeffs(grid: &GridRef, c: &[Vec<[f64; 3]>; 4], xi0: [f64; 3], xi_l: [f64; 3]) -> Self {
        let a = std::array::from_fn(|mu| MatFn::new(grid, c[mu].iter().map(|v| Mat2::from_su2_coeffs(*v)).collect()));
        Self::new(a, xi0, xi_l)
    }

    /// Largest violation of the endpoint tags and of pointwise su(2)-ness.
    pub fn validity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for f in &self.a {
            for v in [f.first(), f.last()] {
                d = d.max((v + v.adjoint()).max_abs()).max(v.trace().norm());
            }
            let n = f.n() - 1;
            for (tag, v) in [(&f.bc0, f.values[0]), (&f.bc_l, f.values[n])] {
                if !tag.value.holds(&v, 0.0) {
                    d = d.max(match tag.value {
                        Constraint::OffDiagonal => v.diag_part().max_abs(),
                        Constraint::OffDiagonalPlus(t) => (v.diag_part() - t.diag_part()).max_abs(),
                        _ => 0.0,
                    });
                }
            }
        }
        d
    }

    /// Complex data in the unitary frame.
    pub fn to_complex(&self) -> ComplexNahm {
        let alpha = self.a[0].add(&self.a[1].scale(I));
        let beta = self.a[2].add(&self.a[3].scale(I));
        let xi_c0 = C64::new(self.xi0[1], self.xi0[2]);
        let xi_cl = C64::new(self.xi_l[1], self.xi_l[2]);
        let mut b = ComplexNahm {
            alpha,
            beta,
            xi_c0,
            xi_cl,
            l: self.l,
        };
        b.alpha.bc0 = BcTag::value(Constraint::OffDiagonalPlus(Mat2::sigma_z() * self.xi0[0]));
        b.alpha.bc_l = BcTag::value(Constraint::OffDiagonalPlus(Mat2::sigma_z() * self.xi_l[0]));
        b.set_beta_tags();
        b
    }

    pub fn xi_real(&self) -> (f64, f64) {
        (self.xi0[0], self.xi_l[0])
    }

    /// Apply a proper rotation `R` to the triplet `(A¹, A², A³)` and to `ξ`.
    pub fn rotate(&self, r: &[[f64; 3]; 3]) -> RealNahm {
        let c = self.coeffs();
        let n = self.grid().n;
        let mut out = c.clone();
        for k in 0..n {
            for i in 0..3 {
                let mut v = [0.0; 3];
                for j in 0..3 {
                    for comp in 0..3 {
                        v[comp] += r[i][j] * c[j + 1][k][comp];
                    }
                }
                out[i + 1][k] = v;
            }
        }
        let rot = |x: [f64; 3]| std::array::from_fn(|i| (0..3).map(|j| r[i][j] * x[j]).sum());
        RealNahm::from_coeffs(self.grid(), &out, rot(self.xi0), rot(self.xi_l))
    }

    /// `max_i ‖μ^i‖_∞`.
    pub fn nahm_residual(&self) -> f64 {
        moment_maps(self).iter().map(|m| m.sup_norm()).fold(0.0, f64::max)
    }
}

impl ComplexNahm {
    /// Standard-frame complex data from samples.
    pub fn new(alpha: MatFn, beta: MatFn, xi_c0: C64, xi_cl: C64) -> Self {
        let l = alpha.grid.l;
        let mut b = ComplexNahm {
            alpha,
            beta,
            xi_c0,
            xi_cl,
            l,
        };
        b.alpha.bc0 = BcTag::value(Constraint::OffDiagonal);
        b.alpha.bc_l = BcTag::value(Constraint::OffDiagonal);
        b.set_beta_tags();
        b
    }

    pub fn set_beta_tags(&mut self) {
        self.beta.bc0 = BcTag::value(Constraint::OffDiagonalPlus(boundary_diag(self.xi_c0)));
        self.beta.bc_l = BcTag::value(Constraint::OffDiagonalPlus(boundary_diag(self.xi_cl)));
    }

    pub fn grid(&self) -> &GridRef {
        &self.alpha.grid
    }

    pub fn constant(grid: &GridRef, alpha: Mat2, beta: Mat2, xi_c0: C64, xi_cl: C64) -> Self {
        Self::new(MatFn::constant(grid, alpha), MatFn::constant(grid, beta), xi_c0, xi_cl)
    }

    /// Real data `A⁰ = (α-α†)/2`, `A¹ = -i(α+α†)/2`, and likewise for `β`.
    pub fn to_real(&self, xi_r0: f64, xi_rl: f64) -> RealNahm {
        let (a0, a1) = split_complex(&self.alpha);
        let (a2, a3) = split_complex(&self.beta);
        RealNahm::new(
            [a0, a1, a2, a3],
            [xi_r0, self.xi_c0.re, self.xi_c0.im],
            [xi_rl, self.xi_cl.re, self.xi_cl.im],
        )
    }

    pub fn norm_sup(&self) -> f64 {
        self.alpha.sup_norm().max(self.beta.sup_norm())
    }

    /// Whether `α` is constant on the grid to the given tolerance.
    pub fn alpha_deviation(&self) -> f64 {
        let a0 = self.alpha.values[0];
        self.alpha.values.iter().map(|m| (*m - a0).max_abs()).fold(0.0, f64::max)
    }
}

fn split_complex(x: &MatFn) -> (MatFn, MatFn) {
    let re = x.map(|m| m.skew_part());
    let im = x.map(|m| m.hermitian_part() * (-I));
    (re, im)
}

/// `μ^i = ∂A^i + [A⁰, A^i] + ½ ε^{ijk} [A^j, A^k]`.
pub fn moment_maps(a: &RealNahm) -> [MatFn; 3] {
    std::array::from_fn(|i| {
        let mut m = a.a[i + 1].derivative().add(&a.a[0].commutator(&a.a[i + 1]));
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    m = m.add(&a.a[j + 1].commutator(&a.a[k + 1]).scale_re(0.5 * e));
                }
            }
        }
        m
    })
}

/// `∂β + [α, β]`.
pub fn mu_complex(b: &ComplexNahm) -> MatFn {
    b.beta.derivative().add(&b.alpha.commutator(&b.beta))
}

/// Kind of gauge transformation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeKind {
    Unitary,
    Complex,
    /// Weyl-twisting transformation; the flags record which endpoint values are antidiagonal.
    Extended {
        flip0: bool,
        flip_l: bool,
    },
}

/// A gauge transformation sampled on the grid.
#[derive(Clone, Debug)]
pub struct GaugeTransform {
    pub g: MatFn,
    pub kind: GaugeKind,
}

impl GaugeTransform {
    pub fn identity(grid: &GridRef) -> Self {
        GaugeTransform {
            g: MatFn::constant(grid, Mat2::identity()),
            kind: GaugeKind::Unitary,
        }
    }

    pub fn new(g: MatFn, kind: GaugeKind) -> Self {
        GaugeTransform { g, kind }
    }

    /// `g₁ = exp(πitσ_x/2L)`, flipping the sign of `ξ_L`.
    pub fn g1(grid: &GridRef) -> Self {
        let l = grid.l;
        let g = MatFn::from_fn(grid, |t| rot_x(std::f64::consts::PI * t / (2.0 * l)));
        GaugeTransform {
            g,
            kind: GaugeKind::Extended {
                flip0: false,
                flip_l: true,
            },
        }
    }

    /// `g₂ = exp(πi(L-t)σ_x/2L)`, flipping the sign of `ξ_0`.
    pub fn g2(grid: &GridRef) -> Self {
        let l = grid.l;
        let g = MatFn::from_fn(grid, |t| rot_x(std::f64::consts::PI * (l - t) / (2.0 * l)));
        GaugeTransform {
            g,
            kind: GaugeKind::Extended {
                flip0: true,
                flip_l: false,
            },
        }
    }

    pub fn inverse(&self) -> Self {
        GaugeTransform {
            g: self.g.map(|m| m.inverse()),
            kind: self.kind,
        }
    }

    /// `self` followed by `other` (as actions on data).
    pub fn then(&self, other: &GaugeTransform) -> Self {
        let kind = match (self.kind, other.kind) {
            (GaugeKind::Unitary, GaugeKind::Unitary) => GaugeKind::Unitary,
            (GaugeKind::Extended { flip0: a, flip_l: b }, GaugeKind::Extended { flip0: c, flip_l: d }) => GaugeKind::Extended {
                flip0: a ^ c,
                flip_l: b ^ d,
            },
            (GaugeKind::Extended { flip0, flip_l }, _) | (_, GaugeKind::Extended { flip0, flip_l }) => {
                GaugeKind::Extended { flip0, flip_l }
            }
            _ => GaugeKind::Complex,
        };
        GaugeTransform {
            g: self.g.mul(&other.g),
            kind,
        }
    }

    fn flips(&self) -> (bool, bool) {
        match self.kind {
            GaugeKind::Extended { flip0, flip_l } => (flip0, flip_l),
            _ => (false, false),
        }
    }

    /// Check endpoint conditions and determinant; returns the largest defect found.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let (f0, fl) = self.flips();
        let dg = self.g.derivative();
        let n = self.g.n() - 1;
        for (idx, flip) in [(0usize, f0), (n, fl)] {
            let g = self.g.values[idx];
            let shape_ok = if flip { g.is_offdiagonal(tol) } else { g.is_diagonal(tol) };
            if !shape_ok {
                return Err(Error::BoundaryViolation(format!(
                    "gauge value at node {idx} has the wrong shape"
                )));
            }
            let m = g.inverse() * dg.values[idx];
            // For extended transformations the twisted frame makes g⁻¹∂g off-diagonal as well.
            if !m.is_offdiagonal(tol * (1.0 + m.max_abs())) {
                return Err(Error::BoundaryViolation(format!("g⁻¹∂g at node {idx} is not off-diagonal")));
            }
        }
        for v in &self.g.values {
            if (v.det() - C64::new(1.0, 0.0)).norm() > tol * 1e3 {
                return Err(Error::BoundaryViolation("det g ≠ 1".into()));
            }
            if self.kind == GaugeKind::Unitary && (*v * v.adjoint() - Mat2::identity()).max_abs() > tol * 1e3 {
                return Err(Error::BoundaryViolation("unitary gauge is not unitary".into()));
            }
        }
        Ok(())
    }

    /// Act on real data: `A⁰ ↦ g⁻¹A⁰g + g⁻¹∂g`, `A^i ↦ g⁻¹A^i g`.
    pub fn act_real(&self, a: &RealNahm) -> Result<RealNahm> {
        if !self.g.grid.same_as(a.grid()) {
            return Err(Error::GridMismatch);
        }
        self.validate(1e-8)?;
        let good = matches!(self.kind, GaugeKind::Unitary | GaugeKind::Extended { .. });
        if !good {
            return Err(Error::BoundaryViolation("complex gauge applied to real data".into()));
        }
        let comps = self.act_raw(&a.a);
        let (f0, fl) = self.flips();
        let xi0 = if f0 { a.xi0.map(|x| -x) } else { a.xi0 };
        let xi_l = if fl { a.xi_l.map(|x| -x) } else { a.xi_l };
        let mut comps = comps;
        for c in comps.iter_mut() {
            for v in c.values.iter_mut() {
                *v = v.skew_part().traceless_part();
            }
        }
        Ok(RealNahm::new(comps, xi0, xi_l))
    }

    /// Act on complex data: `α ↦ g⁻¹αg + g⁻¹∂g`, `β ↦ g⁻¹βg`.
    pub fn act_complex(&self, b: &ComplexNahm) -> Result<ComplexNahm> {
        if !self.g.grid.same_as(b.grid()) {
            return Err(Error::GridMismatch);
        }
        self.validate(1e-8)?;
        Ok(self.act_complex_unchecked(b))
    }

    /// Action without endpoint validation (used for frame changes and solver iterates).
    pub fn act_complex_unchecked(&self, b: &ComplexNahm) -> ComplexNahm {
        let comps = self.act_raw(&[b.alpha.clone(), b.beta.clone()]);
        let (f0, fl) = self.flips();
        let xi_c0 = if f0 { -b.xi_c0 } else { b.xi_c0 };
        let xi_cl = if fl { -b.xi_cl } else { b.xi_cl };
        let mut alpha = comps[0].clone();
        alpha.bc0 = b.alpha.bc0;
        alpha.bc_l = b.alpha.bc_l;
        let mut out = ComplexNahm {
            alpha,
            beta: comps[1].clone(),
            xi_c0,
            xi_cl,
            l: b.l,
        };
        out.set_beta_tags();
        out
    }

    /// First component is treated as a connection, the rest as endomorphisms.
    fn act_raw<const K: usize>(&self, comps: &[MatFn; K]) -> [MatFn; K] {
        let dg = self.g.derivative();
        let ginv: Vec<Mat2> = self.g.values.iter().map(|m| m.inverse()).collect();
        std::array::from_fn(|mu| {
            let vals = (0..self.g.n())
                .map(|k| {
                    let mut v = ginv[k] * comps[mu].values[k] * self.g.values[k];
                    if mu == 0 {
                        v += ginv[k] * dg.values[k];
                    }
                    v
                })
                .collect();
            MatFn::new(&self.g.grid, vals)
        })
    }
}

/// `exp(iθσ_x)`.
pub fn rot_x(theta: f64) -> Mat2 {
    Mat2::identity() * theta.cos() + Mat2::sigma_x() * (I * theta.sin())
}

/// Gauge-transform any kind of data.
pub enum NahmData {
    Real(RealNahm),
    Complex(ComplexNahm),
}

pub fn gauge_act(g: &GaugeTransform, data: &NahmData) -> Result<NahmData> {
    match data {
        NahmData::Real(a) => g.act_real(a).map(NahmData::Real),
        NahmData::Complex(b) => g.act_complex(b).map(NahmData::Complex),
    }
}

/// Tolerance used when checking that sampled data obeys its tags.
pub fn data_tol(scale: f64) -> f64 {
    STRUCT_TOL * (1.0 + scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn constant_commuting_data_solves() {
        let g = make_grid(1.0, 16).unwrap();
        let xi = 0.7;
        let a = RealNahm::constant(
            &g,
            [Mat2::zero(), boundary_diag(xi.into()), Mat2::zero(), Mat2::zero()],
            [xi, 0.0, 0.0],
            [xi, 0.0, 0.0],
        );
        assert!(a.nahm_residual() < 1e-13);
        let b = RealNahm::constant(
            &g,
            [Mat2::sigma_x() * (I * 0.4), Mat2::zero(), Mat2::zero(), Mat2::zero()],
            [0.0; 3],
            [0.0; 3],
        );
        assert!(b.nahm_residual() < 1e-13);
    }

    #[test]
    fn g1_flips_xi_l() {
        let g = make_grid(1.0, 32).unwrap();
        let xi_l = 0.8;
        let b = ComplexNahm::constant(&g, Mat2::zero(), boundary_diag(xi_l.into()), xi_l.into(), xi_l.into());
        let out = GaugeTransform::g1(&g).act_complex(&b).unwrap();
        assert!((out.xi_cl.re + xi_l).abs() < 1e-15);
        let end = out.beta.last().diag_part();
        assert!((end - boundary_diag((-xi_l).into())).max_abs() < 1e-12);
    }
}
