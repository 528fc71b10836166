//! Horizontal lifts of FI-parameter variations, transport along parameter paths,
//! and the curvature of the resulting connection.

use nalgebra::DVector;

use crate::algebra::{levi_civita, v3, Mat2};
use crate::error::{Error, Result};
use crate::grid::{GridRef, MatFn};
use crate::nahm::{moment_maps, RealNahm};
use crate::ops::{self, apply_tau_rows, gauge_bcs, EndCond, LinearOps, ScalarBc};

/// Which end of the interval a boundary harmonic is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Start,
    End,
}

type Coeffs = Vec<[f64; 3]>;

/// Relative singular-value floor of `Δ₀` below which data counts as reducible.
pub const REDUCIBLE_TOL: f64 = 1e-11;

/// Solutions of `Δ₀h = 0` with Hermitian diagonal ends and unit `σ_z` slope at one end.
#[derive(Clone, Debug)]
pub struct BoundaryHarmonics {
    pub h0: MatFn,
    pub hl: MatFn,
    pub eta0: Coeffs,
    pub eta_l: Coeffs,
}

impl BoundaryHarmonics {
    pub fn at(&self, end: End) -> &Coeffs {
        match end {
            End::Start => &self.eta0,
            End::End => &self.eta_l,
        }
    }
}

fn lap0_solve(a: &RealNahm, rhs: DVector<f64>, bcs: &[ScalarBc], check: bool) -> Result<DVector<f64>> {
    let grid = a.grid();
    let mut m = LinearOps::new(a).laplacian0(grid);
    let mut rhs = rhs;
    apply_tau_rows(&mut m, &mut rhs, grid, bcs);
    if check {
        let sv = m.clone().singular_values();
        if sv.min() < REDUCIBLE_TOL * sv.max() {
            return Err(Error::Reducible);
        }
    }
    m.lu().solve(&rhs).ok_or(Error::Reducible)
}

fn herm_matfn(grid: &GridRef, eta: &[[f64; 3]]) -> MatFn {
    MatFn::new(grid, eta.iter().map(|e| Mat2::from_herm_coeffs(*e)).collect())
}

pub fn boundary_harmonics(a: &RealNahm) -> Result<BoundaryHarmonics> {
    let grid = a.grid();
    let n = grid.n;
    let solve = |start: f64, end: f64, check: bool| -> Result<Coeffs> {
        let z = ScalarBc {
            start: EndCond::Deriv(start),
            end: EndCond::Deriv(end),
        };
        let bcs = [ScalarBc::DIRICHLET, ScalarBc::DIRICHLET, z];
        let x = lap0_solve(a, DVector::zeros(3 * n), &bcs, check)?;
        Ok(ops::unflatten(&x, 1, n).remove(0))
    };
    let eta0 = solve(1.0, 0.0, true)?;
    let eta_l = solve(0.0, 1.0, false)?;
    Ok(BoundaryHarmonics {
        h0: herm_matfn(grid, &eta0),
        hl: herm_matfn(grid, &eta_l),
        eta0,
        eta_l,
    })
}

/// `∂̄^{(k)}` applied to the Hermitian field with coefficients `eta`, using coefficients `b`
/// in place of the base data; the `∂η` term is included only when `deriv` is given.
fn dbar_with(k: usize, b: &[Coeffs], eta: &[[f64; 3]], deriv: Option<&[[f64; 3]]>) -> [Coeffs; 4] {
    let n = eta.len();
    let mut out: [Coeffs; 4] = std::array::from_fn(|_| vec![[0.0; 3]; n]);
    for node in 0..n {
        let e = eta[node];
        out[0][node] = v3::scale(v3::cross(b[k][node], e), -2.0);
        for l in 1..4 {
            let mut v = [0.0; 3];
            if l == k {
                v = v3::scale(v3::cross(b[0][node], e), 2.0);
                if let Some(d) = deriv {
                    v = v3::add(v, d[node]);
                }
            }
            for m in 1..4 {
                let s = levi_civita(k - 1, l - 1, m - 1);
                if s != 0.0 {
                    v = v3::add(v, v3::scale(v3::cross(b[m][node], e), -2.0 * s));
                }
            }
            out[l][node] = v;
        }
    }
    out
}

fn derivative(grid: &GridRef, eta: &[[f64; 3]]) -> Coeffs {
    let parts: Vec<Vec<f64>> = (0..3)
        .map(|j| grid.diff_real(&eta.iter().map(|e| e[j]).collect::<Vec<_>>()))
        .collect();
    (0..eta.len()).map(|k| [parts[0][k], parts[1][k], parts[2][k]]).collect()
}

/// `∂̄₀^{(k)}η` at `a` for `k ∈ {1, 2, 3}`, in tangent coefficients.
pub fn dbar(a: &RealNahm, k: usize, eta: &[[f64; 3]]) -> [Coeffs; 4] {
    let c = a.coeffs();
    let d = derivative(a.grid(), eta);
    dbar_with(k, &c, eta, Some(&d))
}

fn add_into(acc: &mut [Coeffs; 4], x: &[Coeffs; 4], s: f64) {
    for c in 0..4 {
        for (p, q) in acc[c].iter_mut().zip(&x[c]) {
            *p = v3::add(*p, v3::scale(*q, s));
        }
    }
}

fn zeros4(n: usize) -> [Coeffs; 4] {
    std::array::from_fn(|_| vec![[0.0; 3]; n])
}

/// Horizontal lift of `(δξ₀, δξ_L)` at irreducible Nahm data, as tangent coefficients.
pub fn horizontal_lift_coeffs(a: &RealNahm, bh: &BoundaryHarmonics, dxi0: [f64; 3], dxi_l: [f64; 3]) -> [Coeffs; 4] {
    let c = a.coeffs();
    let n = a.grid().n;
    let mut out = zeros4(n);
    for (end, dxi) in [(End::Start, dxi0), (End::End, dxi_l)] {
        let eta = bh.at(end);
        let d = derivative(a.grid(), eta);
        for k in 1..4 {
            if dxi[k - 1] != 0.0 {
                add_into(&mut out, &dbar_with(k, &c, eta, Some(&d)), dxi[k - 1]);
            }
        }
    }
    out
}

fn to_skew(grid: &GridRef, c: &[Coeffs; 4]) -> [MatFn; 4] {
    std::array::from_fn(|m| MatFn::new(grid, c[m].iter().map(|x| Mat2::from_su2_coeffs(*x)).collect()))
}

pub fn horizontal_lift(a: &RealNahm, dxi0: [f64; 3], dxi_l: [f64; 3]) -> Result<[MatFn; 4]> {
    let bh = boundary_harmonics(a)?;
    Ok(to_skew(a.grid(), &horizontal_lift_coeffs(a, &bh, dxi0, dxi_l)))
}

fn cross_sum(a: &[Coeffs; 4], b: &[Coeffs; 4], s: f64) -> DVector<f64> {
    let n = a[0].len();
    let mut acc = vec![[0.0; 3]; n];
    for mu in 0..4 {
        for k in 0..n {
            acc[k] = v3::add(acc[k], v3::scale(v3::cross(a[mu][k], b[mu][k]), s));
        }
    }
    ops::flatten(&[acc])
}

fn as_array(v: &DVector<f64>, n: usize) -> [Coeffs; 4] {
    let mut u = ops::unflatten(v, 4, n).into_iter();
    std::array::from_fn(|_| u.next().unwrap())
}

/// Commutator of the lifts of `δξ^i_{t₀}` and `δξ'^j_{t₁}` at irreducible data, in Coulomb gauge.
/// Indices `i, j` run over `1..=3`.
pub fn curvature_commutator(a: &RealNahm, (i, t0): (usize, End), (j, t1): (usize, End)) -> Result<[MatFn; 4]> {
    Ok(to_skew(a.grid(), &curvature_coeffs(a, (i, t0), (j, t1))?))
}

pub fn curvature_coeffs(a: &RealNahm, (i, t0): (usize, End), (j, t1): (usize, End)) -> Result<[Coeffs; 4]> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::InvalidParams("direction indices run over 1..=3".into()));
    }
    let grid = a.grid();
    let n = grid.n;
    let bh = boundary_harmonics(a)?;
    let d0 = LinearOps::new(a).d0(grid);
    let (h_t0, h_t1) = (bh.at(t0), bh.at(t1));
    let a0 = dbar(a, i, h_t0);
    let a1 = dbar(a, j, h_t1);
    let d0h = |h: &Coeffs| as_array(&(&d0 * ops::flatten(&[h.clone()])), n);
    let bcs = gauge_bcs(1);
    let solve = |rhs: DVector<f64>| -> Result<Coeffs> { Ok(ops::unflatten(&lap0_solve(a, rhs, &bcs, false)?, 1, n).remove(0)) };
    let hh0 = solve(cross_sum(&a1, &d0h(h_t0), 4.0))?;
    let hh1 = solve(cross_sum(&a0, &d0h(h_t1), 4.0))?;
    let ha0 = solve(cross_sum(&a1, &a0, -2.0))?;
    let ha1 = solve(cross_sum(&a0, &a1, -2.0))?;
    let mut out = zeros4(n);
    add_into(&mut out, &dbar_with(i, &a1, h_t0, None), 1.0);
    add_into(&mut out, &dbar_with(j, &a0, h_t1, None), -1.0);
    add_into(&mut out, &dbar(a, i, &hh0), 1.0);
    add_into(&mut out, &dbar(a, j, &hh1), -1.0);
    add_into(&mut out, &as_array(&(&d0 * ops::flatten(&[ha0])), n), 1.0);
    add_into(&mut out, &as_array(&(&d0 * ops::flatten(&[ha1])), n), -1.0);
    Ok(out)
}

/// `(4cL + sinh 4cL) / (4c²L sinh²2cL)`: the curvature coefficient at `A = (0, icσ_x, 0, 0)`.
pub fn curvature_closed_form(c: f64, l: f64) -> f64 {
    (4.0 * c * l + (4.0 * c * l).sinh()) / (4.0 * c * c * l * (2.0 * c * l).sinh().powi(2))
}

#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    /// Predictor steps per unit of FI-parameter arclength.
    pub steps_per_unit: f64,
    pub correctors: usize,
    /// Radius of the excluded tube around non-generic parameters, relative to `|ξ|`.
    pub wall_radius: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            steps_per_unit: 64.0,
            correctors: 2,
            wall_radius: 1e-3,
        }
    }
}

/// FI parameters at both ends.
pub type XiPair = ([f64; 3], [f64; 3]);

#[derive(Clone, Debug)]
pub struct TransportResult {
    pub a: RealNahm,
    pub steps: usize,
    /// Largest Nahm residual seen after a corrector phase.
    pub max_residual: f64,
}

/// Distance from `ξ` to the non-generic locus `ξ₀ = ±ξ_L`, relative to `|ξ|`.
pub fn wall_distance(xi: &XiPair) -> f64 {
    let size = (v3::dot(xi.0, xi.0) + v3::dot(xi.1, xi.1)).sqrt();
    let d = v3::norm(v3::sub(xi.0, xi.1)).min(v3::norm(v3::add(xi.0, xi.1)));
    if size == 0.0 {
        0.0
    } else {
        d / size
    }
}

/// Smallest [`wall_distance`] along the segment from `a` to `b`, relative to the larger endpoint size.
pub fn segment_wall_distance(a: &XiPair, b: &XiPair) -> f64 {
    let size = wall_scale(a).max(wall_scale(b));
    if size == 0.0 {
        return 0.0;
    }
    // Distance from the origin to the segment u + s(v - u), s ∈ [0, 1].
    let closest = |u: [f64; 3], v: [f64; 3]| {
        let d = v3::sub(v, u);
        let dd = v3::dot(d, d);
        let s = if dd == 0.0 {
            0.0
        } else {
            (-v3::dot(u, d) / dd).clamp(0.0, 1.0)
        };
        v3::norm(v3::add(u, v3::scale(d, s)))
    };
    let minus = closest(v3::sub(a.0, a.1), v3::sub(b.0, b.1));
    let plus = closest(v3::add(a.0, a.1), v3::add(b.0, b.1));
    minus.min(plus) / size
}

fn moment_coeffs(a: &RealNahm) -> DVector<f64> {
    let m = moment_maps(a);
    ops::flatten(
        &m.iter()
            .map(|f| f.values.iter().map(|v| v.su2_coeffs()).collect())
            .collect::<Vec<_>>(),
    )
}

fn with_coeffs(a: &RealNahm, v: &DVector<f64>, xi: &XiPair) -> RealNahm {
    let c = as_array(v, a.grid().n);
    RealNahm::from_coeffs(a.grid(), &c, xi.0, xi.1)
}

/// Newton correction of `μ = 0` along `A + d₁*f`; returns the final residual.
fn correct(a: &mut RealNahm, xi: &XiPair, iters: usize) -> Result<f64> {
    let grid = a.grid().clone();
    for _ in 0..iters {
        let lo = LinearOps::new(a);
        let d1a = lo.d1_adj(&grid);
        let mut lap = lo.d1(&grid) * &d1a;
        let mut rhs = -moment_coeffs(a);
        apply_tau_rows(&mut lap, &mut rhs, &grid, &gauge_bcs(3));
        let f = lap.lu().solve(&rhs).ok_or(Error::Singular)?;
        let v = ops::flatten(&a.coeffs()) + d1a * f;
        *a = with_coeffs(a, &v, xi);
    }
    Ok(a.nahm_residual())
}

fn lerp(a: &XiPair, b: &XiPair, s: f64) -> XiPair {
    let f = |x: [f64; 3], y: [f64; 3]| std::array::from_fn(|k| x[k] + s * (y[k] - x[k]));
    (f(a.0, b.0), f(a.1, b.1))
}

fn lift_flat(a: &RealNahm, dxi: &XiPair) -> Result<DVector<f64>> {
    let bh = boundary_harmonics(a)?;
    Ok(ops::flatten(&horizontal_lift_coeffs(a, &bh, dxi.0, dxi.1)))
}

/// Transport irreducible Nahm data along the piecewise-linear FI path through `path`.
pub fn parallel_transport_path(a: &RealNahm, path: &[XiPair], opts: &TransportOptions) -> Result<TransportResult> {
    if path.is_empty() {
        return Err(Error::InvalidParams("empty path".into()));
    }
    let tol = 1e-9 * (1.0 + wall_scale(&path[0]));
    let start = (a.xi0, a.xi_l);
    if v3::norm(v3::sub(start.0, path[0].0)) + v3::norm(v3::sub(start.1, path[0].1)) > tol {
        return Err(Error::InvalidParams(
            "path does not start at the FI parameters of the data".into(),
        ));
    }
    let mut cur = a.clone();
    let mut steps = 0;
    let mut max_residual: f64 = 0.0;
    for w in path.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let dxi: XiPair = (v3::sub(q.0, p.0), v3::sub(q.1, p.1));
        let len = (v3::dot(dxi.0, dxi.0) + v3::dot(dxi.1, dxi.1)).sqrt();
        if len == 0.0 {
            continue;
        }
        let nsteps = (opts.steps_per_unit * len).ceil().max(1.0) as usize;
        let h = 1.0 / nsteps as f64;
        for s in 0..nsteps {
            let x0 = lerp(p, q, s as f64 * h);
            let xm = lerp(p, q, (s as f64 + 0.5) * h);
            let x1 = lerp(p, q, (s + 1) as f64 * h);
            steps += 1;
            if segment_wall_distance(&x0, &x1) < opts.wall_radius {
                return Err(Error::PathHitsWall(steps));
            }
            let y = ops::flatten(&cur.coeffs());
            let k1 = lift_flat(&cur, &dxi)?;
            let k2 = lift_flat(&with_coeffs(&cur, &(&y + &k1 * (0.5 * h)), &xm), &dxi)?;
            let k3 = lift_flat(&with_coeffs(&cur, &(&y + &k2 * (0.5 * h)), &xm), &dxi)?;
            let k4 = lift_flat(&with_coeffs(&cur, &(&y + &k3 * h), &x1), &dxi)?;
            let next = &y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            cur = with_coeffs(&cur, &next, &x1);
            max_residual = max_residual.max(correct(&mut cur, &x1, opts.correctors)?);
        }
    }
    Ok(TransportResult {
        a: cur,
        steps,
        max_residual,
    })
}

fn wall_scale(xi: &XiPair) -> f64 {
    (v3::dot(xi.0, xi.0) + v3::dot(xi.1, xi.1)).sqrt()
}

/// Max-norm of `d₀*v` for tangent coefficients `v` at `a`.
pub fn coulomb_defect(a: &RealNahm, v: &[MatFn; 4]) -> f64 {
    let grid = a.grid();
    let flat = ops::flatten(
        &v.iter()
            .map(|f| f.values.iter().map(|m| m.su2_coeffs()).collect())
            .collect::<Vec<_>>(),
    );
    let d = LinearOps::new(a).d0_adj(grid) * flat;
    d.amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn twisted(c: f64, n: usize) -> RealNahm {
        let g = make_grid(1.0, n).unwrap();
        let a1 = Mat2::sigma_x() * crate::algebra::C64::new(0.0, c);
        RealNahm::constant(&g, [Mat2::zero(), a1, Mat2::zero(), Mat2::zero()], [0.0; 3], [0.0; 3])
    }

    #[test]
    fn zero_data_is_reducible() {
        let g = make_grid(1.0, 16).unwrap();
        assert_eq!(boundary_harmonics(&RealNahm::zero(&g)).unwrap_err(), Error::Reducible);
    }

    #[test]
    fn curvature_matches_closed_form() {
        let c = 0.7;
        let a = twisted(c, 96);
        let k = curvature_coeffs(&a, (2, End::End), (3, End::End)).unwrap();
        let want = curvature_closed_form(c, 1.0);
        let mut err: f64 = 0.0;
        for comp in 0..4 {
            for (node, x) in k[comp].iter().enumerate() {
                let target = if comp == 0 { [-want, 0.0, 0.0] } else { [0.0; 3] };
                err = err.max(v3::norm(v3::sub(*x, target)));
                let _ = node;
            }
        }
        assert!(err / want < 1e-6, "relative error {err:e}");
    }
}
