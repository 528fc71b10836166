//! Dense linear operators on su(2)-coefficient fields.
//!
//! A field with `m` su(2)-valued components is stored as a flat real vector
//! with index `(c·N + k)·3 + j` (component `c`, node `k`, Pauli coefficient
//! `j`), in the convention `X = -i x·σ`. In these coordinates `[X, Y] ↔ 2x × y`
//! and the pairing `-(1/2L)∫Tr(XY)` becomes `(1/L)∫x·y`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{levi_civita, v3};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nahm::RealNahm;

#[inline]
pub fn idx(n: usize, comp: usize, node: usize, j: usize) -> usize {
    (comp * n + node) * 3 + j
}

/// Flatten per-component coefficient samples.
pub fn flatten(c: &[Vec<[f64; 3]>]) -> DVector<f64> {
    let n = c[0].len();
    let mut v = DVector::zeros(c.len() * n * 3);
    for (comp, f) in c.iter().enumerate() {
        for (k, x) in f.iter().enumerate() {
            for j in 0..3 {
                v[idx(n, comp, k, j)] = x[j];
            }
        }
    }
    v
}

/// Inverse of [`flatten`].
pub fn unflatten(v: &DVector<f64>, comps: usize, n: usize) -> Vec<Vec<[f64; 3]>> {
    (0..comps)
        .map(|c| (0..n).map(|k| std::array::from_fn(|j| v[idx(n, c, k, j)])).collect())
        .collect()
}

/// `(1/L)∫ Σ x·y` on flattened fields.
pub fn pairing(grid: &Grid, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let n = grid.n;
    let comps = a.len() / (3 * n);
    let mut s = 0.0;
    for c in 0..comps {
        for k in 0..n {
            let w = grid.weights[k];
            for j in 0..3 {
                s += w * a[idx(n, c, k, j)] * b[idx(n, c, k, j)];
            }
        }
    }
    s / grid.l
}

pub fn norm(grid: &Grid, a: &DVector<f64>) -> f64 {
    pairing(grid, a, a).max(0.0).sqrt()
}

/// Adds `s·D` acting on every coefficient from column block `cc` into row block `rc`.
fn add_diff(m: &mut DMatrix<f64>, grid: &Grid, rc: usize, cc: usize, s: f64) {
    let n = grid.n;
    for i in 0..n {
        for k in 0..n {
            let d = s * grid.diff[(i, k)];
            if d != 0.0 {
                for j in 0..3 {
                    m[(idx(n, rc, i, j), idx(n, cc, k, j))] += d;
                }
            }
        }
    }
}

/// Adds the pointwise map `x ↦ s·a(t_k) × x`.
fn add_cross(m: &mut DMatrix<f64>, n: usize, rc: usize, cc: usize, a: &[[f64; 3]], s: f64) {
    for k in 0..n {
        let cm = v3::cross_matrix(a[k]);
        for r in 0..3 {
            for c in 0..3 {
                m[(idx(n, rc, k, r), idx(n, cc, k, c))] += s * cm[r][c];
            }
        }
    }
}

/// The linearized operators at a fixed base point.
pub struct LinearOps {
    pub a: [Vec<[f64; 3]>; 4],
    pub n: usize,
}

impl LinearOps {
    pub fn new(base: &RealNahm) -> Self {
        LinearOps {
            a: base.coeffs(),
            n: base.grid().n,
        }
    }

    /// `d₀x = (∂x + 2a⁰×x, 2a^i×x)`: gauge → tangent.
    pub fn d0(&self, grid: &Grid) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(12 * n, 3 * n);
        add_diff(&mut m, grid, 0, 0, 1.0);
        add_cross(&mut m, n, 0, 0, &self.a[0], 2.0);
        for i in 1..4 {
            add_cross(&mut m, n, i, 0, &self.a[i], 2.0);
        }
        m
    }

    /// Formal adjoint `d₀*b = -∂b⁰ - 2a⁰×b⁰ - Σ 2a^i×b^i`.
    pub fn d0_adj(&self, grid: &Grid) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(3 * n, 12 * n);
        add_diff(&mut m, grid, 0, 0, -1.0);
        add_cross(&mut m, n, 0, 0, &self.a[0], -2.0);
        for i in 1..4 {
            add_cross(&mut m, n, 0, i, &self.a[i], -2.0);
        }
        m
    }

    /// Linearized moment map `d₁b^i = ∂b^i + 2a⁰×b^i - 2a^i×b⁰ + Σ ε^{ijk} 2a^j×b^k`.
    pub fn d1(&self, grid: &Grid) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(9 * n, 12 * n);
        for i in 0..3 {
            add_diff(&mut m, grid, i, i + 1, 1.0);
            add_cross(&mut m, n, i, i + 1, &self.a[0], 2.0);
            add_cross(&mut m, n, i, 0, &self.a[i + 1], -2.0);
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        add_cross(&mut m, n, i, k + 1, &self.a[j + 1], 2.0 * e);
                    }
                }
            }
        }
        m
    }

    /// Formal adjoint `d₁*f = (Σ 2a^i×f^i, -∂f^ℓ - 2a⁰×f^ℓ + Σ ε^{ℓjm} 2a^j×f^m)`.
    pub fn d1_adj(&self, grid: &Grid) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(12 * n, 9 * n);
        for i in 0..3 {
            add_cross(&mut m, n, 0, i, &self.a[i + 1], 2.0);
        }
        for l in 0..3 {
            add_diff(&mut m, grid, l + 1, l, -1.0);
            add_cross(&mut m, n, l + 1, l, &self.a[0], -2.0);
            for j in 0..3 {
                for k in 0..3 {
                    let e = levi_civita(l, j, k);
                    if e != 0.0 {
                        add_cross(&mut m, n, l + 1, k, &self.a[j + 1], 2.0 * e);
                    }
                }
            }
        }
        m
    }

    /// `Δ₀ = d₀*d₀`.
    pub fn laplacian0(&self, grid: &Grid) -> DMatrix<f64> {
        self.d0_adj(grid) * self.d0(grid)
    }

    /// `Δ₂ = d₁d₁*`.
    pub fn laplacian2(&self, grid: &Grid) -> DMatrix<f64> {
        self.d1(grid) * self.d1_adj(grid)
    }
}

/// Endpoint condition on one scalar coefficient function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndCond {
    Free,
    Value(f64),
    Deriv(f64),
}

/// Conditions at `t = 0` and `t = L` on one scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarBc {
    pub start: EndCond,
    pub end: EndCond,
}

impl ScalarBc {
    pub const FREE: ScalarBc = ScalarBc {
        start: EndCond::Free,
        end: EndCond::Free,
    };
    pub const DIRICHLET: ScalarBc = ScalarBc {
        start: EndCond::Value(0.0),
        end: EndCond::Value(0.0),
    };
    pub const NEUMANN: ScalarBc = ScalarBc {
        start: EndCond::Deriv(0.0),
        end: EndCond::Deriv(0.0),
    };
}

/// Homogeneous tags of a gauge parameter (and of `𝔉̃`): `x, y` vanish, `z′` vanishes.
pub fn gauge_bcs(comps: usize) -> Vec<ScalarBc> {
    (0..comps)
        .flat_map(|_| [ScalarBc::DIRICHLET, ScalarBc::DIRICHLET, ScalarBc::NEUMANN])
        .collect()
}

/// Tangent tags with every `z` coefficient pinned (the space `𝒜₀`).
pub fn tangent_special_bcs() -> Vec<ScalarBc> {
    (0..4)
        .flat_map(|_| [ScalarBc::FREE, ScalarBc::FREE, ScalarBc::DIRICHLET])
        .collect()
}

/// Tangent tags for the general deformation space: only `a⁰_z` pinned.
pub fn tangent_general_bcs() -> Vec<ScalarBc> {
    let mut v = vec![ScalarBc::FREE, ScalarBc::FREE, ScalarBc::DIRICHLET];
    v.extend(std::iter::repeat(ScalarBc::FREE).take(9));
    v
}

/// Basis of scalar samples obeying homogeneous versions of `bc`: an `N × (N - r)` matrix.
fn scalar_basis(grid: &Grid, bc: &ScalarBc) -> DMatrix<f64> {
    let n = grid.n;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (node, c) in [(0usize, bc.start), (n - 1, bc.end)] {
        match c {
            EndCond::Free => {}
            EndCond::Value(_) => {
                let mut r = vec![0.0; n];
                r[node] = 1.0;
                rows.push((node, r));
            }
            EndCond::Deriv(_) => rows.push((node, (0..n).map(|k| grid.diff[(node, k)]).collect())),
        }
    }
    let pivots: Vec<usize> = rows.iter().map(|(p, _)| *p).collect();
    let free: Vec<usize> = (0..n).filter(|k| !pivots.contains(k)).collect();
    let r = rows.len();
    let mut z = DMatrix::zeros(n, free.len());
    for (col, &f) in free.iter().enumerate() {
        z[(f, col)] = 1.0;
    }
    if r > 0 {
        // C_p x_p = -C_f x_f.
        let cp = DMatrix::from_fn(r, r, |i, j| rows[i].1[pivots[j]]);
        let cf = DMatrix::from_fn(r, free.len(), |i, j| rows[i].1[free[j]]);
        let sol = cp.lu().solve(&(-cf)).expect("endpoint constraint block is invertible");
        for (i, &p) in pivots.iter().enumerate() {
            for col in 0..free.len() {
                z[(p, col)] = sol[(i, col)];
            }
        }
    }
    z
}

/// Constrained basis for a flattened field; `bcs[c·3 + j]` applies to coefficient `j` of component `c`.
pub fn constrained_basis(grid: &Grid, bcs: &[ScalarBc]) -> DMatrix<f64> {
    let n = grid.n;
    let blocks: Vec<DMatrix<f64>> = bcs.iter().map(|b| scalar_basis(grid, b)).collect();
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut z = DMatrix::zeros(bcs.len() * n, total);
    let mut col0 = 0;
    for (s, b) in blocks.iter().enumerate() {
        let (comp, j) = (s / 3, s % 3);
        for col in 0..b.ncols() {
            for k in 0..n {
                z[(idx(n, comp, k, j), col0 + col)] = b[(k, col)];
            }
        }
        col0 += b.ncols();
    }
    z
}

/// Replace endpoint collocation rows of a square system by boundary rows (tau method).
pub fn apply_tau_rows(m: &mut DMatrix<f64>, rhs: &mut DVector<f64>, grid: &Grid, bcs: &[ScalarBc]) {
    let n = grid.n;
    for (s, bc) in bcs.iter().enumerate() {
        let (comp, j) = (s / 3, s % 3);
        for (node, c) in [(0usize, bc.start), (n - 1, bc.end)] {
            let row = idx(n, comp, node, j);
            match c {
                EndCond::Free => {}
                EndCond::Value(v) => {
                    m.row_mut(row).fill(0.0);
                    m[(row, row)] = 1.0;
                    rhs[row] = v;
                }
                EndCond::Deriv(v) => {
                    m.row_mut(row).fill(0.0);
                    for k in 0..n {
                        m[(row, idx(n, comp, k, j))] = grid.diff[(node, k)];
                    }
                    rhs[row] = v;
                }
            }
        }
    }
}

/// Scale each row by `√(w_k/L)` so singular values reflect the continuum pairing.
pub fn weight_rows(m: &DMatrix<f64>, grid: &Grid) -> DMatrix<f64> {
    let n = grid.n;
    let mut out = m.clone();
    for r in 0..m.nrows() {
        let node = (r / 3) % n;
        let w = (grid.weights[node] / grid.l).sqrt();
        out.row_mut(r).scale_mut(w);
    }
    out
}

/// Solve a square system; fall back to a Tikhonov-regularized normal system if LU fails
/// or the solution is not finite. Returns the solution and whether the fallback was used.
pub fn solve_dense(m: DMatrix<f64>, rhs: &DVector<f64>, shift: f64) -> Result<(DVector<f64>, bool)> {
    if let Some(x) = m.clone().lu().solve(rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Ok((x, false));
        }
    }
    let mt = m.transpose();
    let mut nrm = &mt * &m;
    let scale = nrm.diagonal().amax().max(1.0);
    for i in 0..nrm.nrows() {
        nrm[(i, i)] += shift * scale;
    }
    let x = nrm.cholesky().ok_or(Error::Singular)?.solve(&(&mt * rhs));
    Ok((x, true))
}

/// Numerical kernel of an operator restricted to a constrained subspace.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub dim: usize,
    /// Ratio of the smallest singular value kept to the largest one discarded.
    pub gap: f64,
    /// Kernel vectors in full (unconstrained) coordinates.
    pub basis: DMatrix<f64>,
    pub sigma_max: f64,
}

/// Relative singular-value cut below which a direction counts as kernel.
pub const KERNEL_CUT: f64 = 1e-8;

/// Kernel of `op · z`, from the SVD of the row-weighted product.
pub fn kernel(op: &DMatrix<f64>, z: &DMatrix<f64>, grid: &Grid) -> Result<Kernel> {
    let m = weight_rows(&(op * z), grid);
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].partial_cmp(&svd.singular_values[*a]).unwrap());
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let ncols = z.ncols();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = KERNEL_CUT * smax;
    // Columns beyond the row count are kernel automatically.
    let missing = ncols.saturating_sub(sv.len());
    let below: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] < cut).collect();
    let dim = below.len() + missing;
    let kept_min = sv.iter().copied().filter(|s| *s >= cut).fold(f64::INFINITY, f64::min);
    if missing > 0 {
        return Err(Error::InvalidSize("operator has fewer rows than constrained unknowns".into()));
    }
    let disc_max = below.iter().map(|&i| sv[i]).fold(0.0, f64::max);
    let gap = if below.is_empty() {
        kept_min / cut
    } else {
        kept_min / disc_max
    };
    if gap < 10.0 {
        return Err(Error::IllConditioned(gap));
    }
    let mut basis = DMatrix::zeros(z.nrows(), dim);
    for (c, &i) in below.iter().enumerate() {
        let v = vt.row(order[i]).transpose();
        basis.set_column(c, &(z * v));
    }
    Ok(Kernel {
        dim,
        gap,
        basis,
        sigma_max: smax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn neumann_basis_has_flat_ends() {
        let g = make_grid(1.3, 20).unwrap();
        let z = constrained_basis(&g, &gauge_bcs(1));
        assert_eq!(z.ncols(), 3 * 20 - 6);
        for col in 0..z.ncols() {
            let v = z.column(col);
            let zc: Vec<f64> = (0..20).map(|k| v[idx(20, 0, k, 2)]).collect();
            let d = g.diff_real(&zc);
            assert!(d[0].abs() < 1e-10 && d[19].abs() < 1e-10);
            assert!(v[idx(20, 0, 0, 0)].abs() < 1e-15 && v[idx(20, 0, 19, 1)].abs() < 1e-15);
        }
    }
}
