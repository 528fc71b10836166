//! Deformation complexes at Nahm data, harmonic tangent spaces and the
//! hyperkähler structure on them.

use nalgebra::{DMatrix, DVector, Matrix4};
use serde_json::{json, Value};

use crate::algebra::{levi_civita, v3, C64};
use crate::duy::{solve_duy, DuyOptions};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridRef, MatFn};
use crate::nahm::{complex_nahm_family, moment_maps, Family, RealNahm};
use crate::ops::{
    self, apply_tau_rows, constrained_basis, gauge_bcs, kernel, tangent_general_bcs, tangent_special_bcs, LinearOps,
};

/// Dense deformation-complex operators at a base point.
pub struct OperatorBundle {
    pub d0: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d0_adj: DMatrix<f64>,
    pub d1_adj: DMatrix<f64>,
}

pub fn linearized_ops(a: &RealNahm) -> OperatorBundle {
    let grid = a.grid();
    let ops = LinearOps::new(a);
    OperatorBundle {
        d0: ops.d0(grid),
        d1: ops.d1(grid),
        d0_adj: ops.d0_adj(grid),
        d1_adj: ops.d1_adj(grid),
    }
}

/// Dimensions of the four harmonic spaces and the singular-value gap at each cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelDims {
    pub h0: usize,
    pub h1sp: usize,
    pub h1gen: usize,
    pub h2sp: usize,
    pub gaps: [f64; 4],
}

impl KernelDims {
    pub fn as_tuple(&self) -> (usize, usize, usize, usize) {
        (self.h0, self.h1sp, self.h1gen, self.h2sp)
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn stack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.view_mut((0, 0), top.shape()).copy_from(top);
    m.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    m
}

fn check_solution(a: &RealNahm) -> Result<()> {
    let scale = 1.0 + a.a.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let r = a.nahm_residual();
    if r > 1e-6 * scale {
        return Err(Error::InvalidParams(format!(
            "base point is not Nahm data (residual {r:.3e})"
        )));
    }
    Ok(())
}

pub fn kernel_dims(a: &RealNahm) -> Result<KernelDims> {
    check_solution(a)?;
    let grid = a.grid();
    let ob = linearized_ops(a);
    let k0 = kernel(&ob.d0, &constrained_basis(grid, &gauge_bcs(1)), grid)?;
    let op1 = stack(&ob.d0_adj, &ob.d1);
    let k1 = kernel(&op1, &constrained_basis(grid, &tangent_special_bcs()), grid)?;
    let k1g = kernel(&op1, &constrained_basis(grid, &tangent_general_bcs()), grid)?;
    let k2 = kernel(&ob.d1_adj, &constrained_basis(grid, &gauge_bcs(3)), grid)?;
    Ok(KernelDims {
        h0: k0.dim,
        h1sp: k1.dim,
        h1gen: k1g.dim,
        h2sp: k2.dim,
        gaps: [k0.gap, k1.gap, k1g.gap, k2.gap],
    })
}

/// `ω^i(a, b) = (1/L)∫(a⁰·b^i - a^i·b⁰ + ε^{ijk} a^j·b^k)` on flattened tangent vectors.
pub fn omega(grid: &Grid, i: usize, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = grid.n;
    let mut s = 0.0;
    for k in 0..n {
        let w = grid.weights[k];
        let dot = |p: usize, q: usize| -> f64 { (0..3).map(|j| a[ops::idx(n, p, k, j)] * b[ops::idx(n, q, k, j)]).sum() };
        let mut v = dot(0, i + 1) - dot(i + 1, 0);
        for j in 0..3 {
            for kk in 0..3 {
                let e = levi_civita(i, j, kk);
                if e != 0.0 {
                    v += e * dot(j + 1, kk + 1);
                }
            }
        }
        s += w * v;
    }
    s / grid.l
}

/// Orthonormal harmonic frame with the metric, Kähler forms and complex structures on it.
#[derive(Clone, Debug)]
pub struct HarmonicFrame {
    pub a: RealNahm,
    /// Columns are flattened tangent vectors.
    pub basis: DMatrix<f64>,
    pub g: Matrix4<f64>,
    pub omega: [Matrix4<f64>; 3],
    pub j: [Matrix4<f64>; 3],
    pub kernel_gap: f64,
}

/// Sign in `J^i = s·G⁻¹Ω^i`, fixed so that `J¹J² = J³`.
pub const J_SIGN: f64 = -1.0;

pub fn harmonic_frame(a: &RealNahm) -> Result<HarmonicFrame> {
    check_solution(a)?;
    let grid = a.grid();
    let ob = linearized_ops(a);
    let k0 = kernel(&ob.d0, &constrained_basis(grid, &gauge_bcs(1)), grid)?;
    if k0.dim != 0 {
        return Err(Error::NotIrreducible);
    }
    let op1 = stack(&ob.d0_adj, &ob.d1);
    let k1 = kernel(&op1, &constrained_basis(grid, &tangent_special_bcs()), grid)?;
    if k1.dim != 4 {
        return Err(Error::WrongDimension {
            expected: 4,
            found: k1.dim,
        });
    }
    let raw = k1.basis;
    let gram = DMatrix::from_fn(4, 4, |p, q| ops::pairing(grid, &raw.column(p).into(), &raw.column(q).into()));
    let chol = gram.cholesky().ok_or(Error::Singular)?;
    let linv = chol.l().try_inverse().ok_or(Error::Singular)?;
    let basis = &raw * linv.transpose();
    let cols: Vec<DVector<f64>> = (0..4).map(|c| basis.column(c).into()).collect();
    let g = Matrix4::from_fn(|p, q| ops::pairing(grid, &cols[p], &cols[q]));
    let omega: [Matrix4<f64>; 3] = std::array::from_fn(|i| Matrix4::from_fn(|p, q| omega(grid, i, &cols[p], &cols[q])));
    let ginv = g.try_inverse().ok_or(Error::Singular)?;
    let j = omega.map(|o| ginv * o * J_SIGN);
    Ok(HarmonicFrame {
        a: a.clone(),
        basis,
        g,
        omega,
        j,
        kernel_gap: k1.gap,
    })
}

impl HarmonicFrame {
    /// `max(‖(J^i)² + 1‖, ‖J¹J² - J³‖)` in max-norm.
    pub fn quaternion_defect(&self) -> f64 {
        let id = Matrix4::<f64>::identity();
        let mut d: f64 = 0.0;
        for ji in &self.j {
            d = d.max((ji * ji + id).amax());
        }
        d.max((self.j[0] * self.j[1] - self.j[2]).amax())
    }

    /// `‖d₀*a‖ + ‖d₁a‖` for each basis vector, in the continuum norm.
    pub fn harmonic_defects(&self) -> Vec<f64> {
        let grid = self.a.grid();
        let ob = linearized_ops(&self.a);
        (0..4)
            .map(|c| {
                let v: DVector<f64> = self.basis.column(c).into();
                ops::norm(grid, &(&ob.d0_adj * &v)) + ops::norm(grid, &(&ob.d1 * &v))
            })
            .collect()
    }
}

/// Remove the infinitesimal-gauge part of a tangent vector: `v - d₀x` with `Δ₀x = d₀*v`.
pub fn coulomb_project(a: &RealNahm, v: &DVector<f64>) -> Result<DVector<f64>> {
    let grid = a.grid();
    let lo = LinearOps::new(a);
    let d0 = lo.d0(grid);
    let d0a = lo.d0_adj(grid);
    let mut lap = &d0a * &d0;
    let mut rhs = &d0a * v;
    apply_tau_rows(&mut lap, &mut rhs, grid, &gauge_bcs(1));
    let x = lap.lu().solve(&rhs).ok_or(Error::Reducible)?;
    Ok(v - d0 * x)
}

/// Flattened coefficients of real data.
pub fn flat(a: &RealNahm) -> DVector<f64> {
    ops::flatten(&a.coeffs())
}

/// One row of a chart table.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub alpha0: C64,
    pub beta_x: C64,
    pub g: Matrix4<f64>,
    pub omega: [Matrix4<f64>; 3],
    pub residual: f64,
    pub status: std::result::Result<(), String>,
}

/// Step used for chart tangent vectors.
pub const CHART_STEP: f64 = 1e-4;

/// Solve family (i) at a chart point and return its real Nahm data.
pub fn chart_solution(
    grid: &GridRef,
    alpha0: C64,
    beta_x: C64,
    xi0: [f64; 3],
    xi_l: [f64; 3],
    opts: &DuyOptions,
) -> Result<(RealNahm, f64)> {
    let b = complex_nahm_family(
        Family::I { alpha0, beta_x },
        C64::new(xi0[1], xi0[2]),
        C64::new(xi_l[1], xi_l[2]),
        grid,
    )?;
    let r = solve_duy(&b, (xi0[0], xi_l[0]), opts)?;
    Ok((r.a, r.residual))
}

/// Pull back the metric and Kähler forms to the family-(i) chart `(Re α₀, Im α₀, Re β_x, Im β_x)`.
pub fn metric_pullback_point(
    grid: &GridRef,
    alpha0: C64,
    beta_x: C64,
    xi0: [f64; 3],
    xi_l: [f64; 3],
    opts: &DuyOptions,
) -> Result<ChartPoint> {
    let (base, residual) = chart_solution(grid, alpha0, beta_x, xi0, xi_l, opts)?;
    let h = CHART_STEP;
    let dirs = [
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        (C64::new(0.0, 1.0), C64::new(0.0, 0.0)),
        (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        (C64::new(0.0, 0.0), C64::new(0.0, 1.0)),
    ];
    let mut tangents = Vec::with_capacity(4);
    for (da, db) in dirs {
        let (p, _) = chart_solution(grid, alpha0 + da * h, beta_x + db * h, xi0, xi_l, opts)?;
        let (m, _) = chart_solution(grid, alpha0 - da * h, beta_x - db * h, xi0, xi_l, opts)?;
        let v = (flat(&p) - flat(&m)) / (2.0 * h);
        tangents.push(coulomb_project(&base, &v)?);
    }
    let g = Matrix4::from_fn(|p, q| ops::pairing(grid, &tangents[p], &tangents[q]));
    let omega = std::array::from_fn(|i| Matrix4::from_fn(|p, q| omega(grid, i, &tangents[p], &tangents[q])));
    Ok(ChartPoint {
        alpha0,
        beta_x,
        g,
        omega,
        residual,
        status: Ok(()),
    })
}

/// Evaluate a rectangular chart; failed points are kept with their error message.
pub fn metric_pullback_chart(
    grid: &GridRef,
    alpha0s: &[C64],
    beta_xs: &[C64],
    xi0: [f64; 3],
    xi_l: [f64; 3],
    opts: &DuyOptions,
) -> Vec<ChartPoint> {
    use rayon::prelude::*;
    let pts: Vec<(C64, C64)> = alpha0s.iter().flat_map(|a| beta_xs.iter().map(move |b| (*a, *b))).collect();
    pts.par_iter()
        .map(|&(a, b)| {
            metric_pullback_point(grid, a, b, xi0, xi_l, opts).unwrap_or_else(|e| ChartPoint {
                alpha0: a,
                beta_x: b,
                g: Matrix4::zeros(),
                omega: [Matrix4::zeros(); 3],
                residual: f64::NAN,
                status: Err(e.to_string()),
            })
        })
        .collect()
}

/// CSV header for chart tables.
pub fn chart_csv_header() -> String {
    let mut cols: Vec<String> = ["re_alpha0", "im_alpha0", "re_beta_x", "im_beta_x"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for p in 0..4 {
        for q in p..4 {
            cols.push(format!("g{p}{q}"));
        }
    }
    for i in 1..=3 {
        for p in 0..4 {
            for q in p + 1..4 {
                cols.push(format!("omega{i}_{p}{q}"));
            }
        }
    }
    cols.push("residual".into());
    cols.join(",")
}

impl ChartPoint {
    pub fn csv_row(&self) -> String {
        let mut v = vec![self.alpha0.re, self.alpha0.im, self.beta_x.re, self.beta_x.im];
        for p in 0..4 {
            for q in p..4 {
                v.push(self.g[(p, q)]);
            }
        }
        for o in &self.omega {
            for p in 0..4 {
                for q in p + 1..4 {
                    v.push(o[(p, q)]);
                }
            }
        }
        v.push(self.residual);
        v.iter().map(|x| format!("{x:.12e}")).collect::<Vec<_>>().join(",")
    }
}

impl HarmonicFrame {
    pub fn to_json(&self) -> Value {
        let m = |x: &Matrix4<f64>| {
            (0..4)
                .map(|p| (0..4).map(|q| x[(p, q)]).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        json!({
            "G": m(&self.g),
            "Omega": self.omega.iter().map(m).collect::<Vec<_>>(),
            "J": self.j.iter().map(m).collect::<Vec<_>>(),
            "quaternion_defect": self.quaternion_defect(),
            "kernel_gap": self.kernel_gap,
        })
    }
}

/// Largest moment-map component, for reporting.
pub fn moment_residual(a: &RealNahm) -> f64 {
    moment_maps(a).iter().map(|m| m.sup_norm()).fold(0.0, f64::max)
}

/// Both sides of the tri-Hamiltonian identity `ω^i(d₀h, δA) = -⟨dμ^i(δA), h⟩` for one triple.
#[derive(Clone, Copy, Debug)]
pub struct HamiltonianCheck {
    /// `ω^i(d₀h, δA)`.
    pub omega: [f64; 3],
    /// `-⟨dμ^i(δA), h⟩`, with `dμ^i` from a central difference of the moment maps.
    pub moment: [f64; 3],
    /// `(1/L)[h·δa^i]₀^L`, the integration-by-parts remainder.
    pub boundary: [f64; 3],
}

impl HamiltonianCheck {
    pub fn defect(&self) -> f64 {
        (0..3).map(|i| (self.omega[i] - self.moment[i]).abs()).fold(0.0, f64::max)
    }

    /// How far the discrepancy is from the boundary remainder.
    pub fn boundary_defect(&self) -> f64 {
        (0..3)
            .map(|i| (self.omega[i] - self.moment[i] - self.boundary[i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self) -> f64 {
        (0..3)
            .map(|i| self.omega[i].abs().max(self.moment[i].abs()))
            .fold(1.0, f64::max)
    }
}

pub const HAMILTONIAN_FD_STEP: f64 = 1e-5;

/// The identity at `A` for a gauge parameter `h` (skew) and tangent vector `δA`.
pub fn hamiltonian_check(a: &RealNahm, h: &MatFn, da: &[MatFn; 4]) -> HamiltonianCheck {
    let grid = a.grid().clone();
    let eps = HAMILTONIAN_FD_STEP;
    let shifted = |s: f64| {
        let b: [MatFn; 4] = std::array::from_fn(|m| a.a[m].add(&da[m].scale_re(s)));
        moment_maps(&RealNahm::new(b, a.xi0, a.xi_l))
    };
    let (plus, minus) = (shifted(eps), shifted(-eps));
    let hc: Vec<[f64; 3]> = h.values.iter().map(|m| m.su2_coeffs()).collect();
    let hv = ops::flatten(&[hc.clone()]);
    let dav = ops::flatten(
        &da.iter()
            .map(|f| f.values.iter().map(|m| m.su2_coeffs()).collect())
            .collect::<Vec<_>>(),
    );
    let xh = LinearOps::new(a).d0(&grid) * &hv;
    let mut out = HamiltonianCheck {
        omega: [0.0; 3],
        moment: [0.0; 3],
        boundary: [0.0; 3],
    };
    let n = grid.n;
    for i in 0..3 {
        let dmu: Vec<[f64; 3]> = (0..n)
            .map(|k| {
                let (p, q) = (plus[i].values[k].su2_coeffs(), minus[i].values[k].su2_coeffs());
                std::array::from_fn(|j| (p[j] - q[j]) / (2.0 * eps))
            })
            .collect();
        out.moment[i] = -ops::pairing(&grid, &ops::flatten(&[dmu]), &hv);
        out.omega[i] = omega(&grid, i, &xh, &dav);
        let end = |k: usize| v3::dot(hc[k], da[i + 1].values[k].su2_coeffs());
        out.boundary[i] = (end(n - 1) - end(0)) / grid.l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_data_dims() {
        let g = make_grid(1.0, 24).unwrap();
        let d = kernel_dims(&RealNahm::zero(&g)).unwrap();
        assert_eq!(d.as_tuple(), (1, 8, 11, 3));
    }

    #[test]
    fn hamiltonian_boundary_term() {
        use crate::sample::{self, Profile};
        use rand::SeedableRng;
        let g = make_grid(1.2, 32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = sample::real_nahm(&mut rng, &g, [0.3, -0.2, 0.5], [0.1, 0.4, -0.3], 0.6);
        let da = sample::tangent(&mut rng, &g, 0.5);
        let h = sample::skew_param(&mut rng, &g, 0.5);
        let ok = hamiltonian_check(&a, &h, &da);
        assert!(ok.defect() < 1e-7 * ok.scale(), "{:?}", ok);
        let free = sample::su2_field(&mut rng, &g, [Profile::Free; 3], 0.5);
        let bad = hamiltonian_check(&a, &free, &da);
        assert!(bad.defect() > 1e-3, "{:?}", bad);
        assert!(bad.boundary_defect() < 1e-7 * bad.scale(), "{:?}", bad);
    }
}
