//! The real moment map, Weitzenböck identities, Donaldson's functional and the
//! DUY solve.
//!
//! Solves run in the unitary frame: standard-frame data `B` is moved there by
//! the diagonal gauge `exp(φσ_z)` with `φ(0) = φ(L) = 0`, `φ′(0) = ξ^ℝ_0`,
//! `φ′(L) = ξ^ℝ_L`. The Newton direction solves `Δ₀ η = μ_ℝ` for the real
//! Laplacian of the current iterate; gauging by `exp(τ η·σ)` changes `μ_ℝ` by
//! `-2τΔ₀η` to first order, so the full step is `τ = 1/2`.

use nalgebra::DVector;
use serde_json::{json, Value};

use crate::algebra::{herm_exp, herm_log, mat_vec, positive_part, Mat2, C64};
use crate::error::{Error, Result};
use crate::grid::{BcTag, Constraint, MatFn};
use crate::nahm::stability::{classify_sublines, find_sublines, Sign, Stability, Subline};
use crate::nahm::transport::{double_coset_invariant, parallel_transport, transport_matrices};
use crate::nahm::{boundary_diag, ComplexNahm, GaugeKind, GaugeTransform, RealNahm};
use crate::ops::{self, apply_tau_rows, gauge_bcs, solve_dense, LinearOps};

/// `φ` and `φ′` of the frame change at `t`.
fn frame_phi(t: f64, l: f64, x0: f64, xl: f64) -> (f64, f64) {
    let s = t / l;
    let phi = x0 * l * s * (1.0 - s).powi(2) + xl * l * s * s * (s - 1.0);
    let dphi = x0 * (1.0 - s) * (1.0 - 3.0 * s) + xl * s * (3.0 * s - 2.0);
    (phi, dphi)
}

fn diag_exp(x: f64) -> Mat2 {
    Mat2::diag(C64::new(x.exp(), 0.0), C64::new((-x).exp(), 0.0))
}

/// The positive diagonal gauge `exp(-φσ_z)` taking unitary-frame data to the standard frame.
pub fn frame_gauge(grid: &crate::grid::GridRef, xi_r: (f64, f64)) -> MatFn {
    MatFn::from_fn(grid, |t| diag_exp(-frame_phi(t, grid.l, xi_r.0, xi_r.1).0))
}

/// Standard frame → unitary frame: `α ↦ e^{-φσ_z} α e^{φσ_z} + φ′σ_z`, `β` conjugated likewise.
pub fn to_unitary_frame(b: &ComplexNahm, xi_r: (f64, f64)) -> ComplexNahm {
    let g = b.grid().clone();
    let mut alpha = b.alpha.clone();
    let mut beta = b.beta.clone();
    for (k, &t) in g.nodes.iter().enumerate() {
        let (phi, dphi) = frame_phi(t, g.l, xi_r.0, xi_r.1);
        let (m, mi) = (diag_exp(-phi), diag_exp(phi));
        alpha.values[k] = m * b.alpha.values[k] * mi + Mat2::sigma_z() * dphi;
        beta.values[k] = m * b.beta.values[k] * mi;
    }
    alpha.bc0 = BcTag::value(Constraint::OffDiagonalPlus(Mat2::sigma_z() * xi_r.0));
    alpha.bc_l = BcTag::value(Constraint::OffDiagonalPlus(Mat2::sigma_z() * xi_r.1));
    let mut out = ComplexNahm {
        alpha,
        beta,
        xi_c0: b.xi_c0,
        xi_cl: b.xi_cl,
        l: b.l,
    };
    out.set_beta_tags();
    out
}

/// Inverse of [`to_unitary_frame`].
pub fn to_standard_frame(b: &ComplexNahm, xi_r: (f64, f64)) -> ComplexNahm {
    let g = b.grid().clone();
    let mut alpha = b.alpha.clone();
    let mut beta = b.beta.clone();
    for (k, &t) in g.nodes.iter().enumerate() {
        let (phi, dphi) = frame_phi(t, g.l, xi_r.0, xi_r.1);
        let (m, mi) = (diag_exp(-phi), diag_exp(phi));
        alpha.values[k] = mi * (b.alpha.values[k] - Mat2::sigma_z() * dphi) * m;
        beta.values[k] = mi * b.beta.values[k] * m;
    }
    ComplexNahm::new(alpha, beta, b.xi_c0, b.xi_cl)
}

/// `μ_ℝ = ∂(α + α†) + [α, α†] + [β, β†]` of unitary-frame data.
pub fn mu_real_unitary(b: &ComplexNahm) -> MatFn {
    let ad = b.alpha.adjoint();
    let bd = b.beta.adjoint();
    b.alpha
        .add(&ad)
        .derivative()
        .add(&b.alpha.commutator(&ad))
        .add(&b.beta.commutator(&bd))
}

/// `μ_ℝ` of standard-frame data in the `ξ^ℝ`-adapted metric.
pub fn mu_real(b: &ComplexNahm, xi_r: (f64, f64)) -> MatFn {
    mu_real_unitary(&to_unitary_frame(b, xi_r))
}

/// `sqrt((1/2L) ∫ Tr(H H†))`; for Hermitian `H = η·σ` this is the coefficient norm.
pub fn herm_norm(h: &MatFn) -> f64 {
    let v: Vec<f64> = h.values.iter().map(|m| (*m * m.adjoint()).trace().re).collect();
    let sq = h.grid.integrate(&v) / (2.0 * h.grid.l);
    // `f64::max` would turn NaN into 0 and let an overflowing step pass as converged.
    if sq.is_nan() {
        f64::NAN
    } else {
        sq.max(0.0).sqrt()
    }
}

fn apply_d(b: &ComplexNahm, s: &[[C64; 2]]) -> Vec<[C64; 2]> {
    let g = b.grid();
    (0..g.n)
        .map(|i| {
            let mut acc = [C64::new(0.0, 0.0); 2];
            for (j, v) in s.iter().enumerate() {
                let d = g.diff[(i, j)];
                acc[0] += v[0] * d;
                acc[1] += v[1] * d;
            }
            acc
        })
        .collect()
}

fn pointwise(m: &MatFn, s: &[[C64; 2]]) -> Vec<[C64; 2]> {
    m.values.iter().zip(s).map(|(a, v)| mat_vec(a, *v)).collect()
}

fn comb(terms: &[(f64, &Vec<[C64; 2]>)]) -> Vec<[C64; 2]> {
    let n = terms[0].1.len();
    (0..n)
        .map(|k| {
            let mut acc = [C64::new(0.0, 0.0); 2];
            for (c, v) in terms {
                acc[0] += v[k][0] * *c;
                acc[1] += v[k][1] * *c;
            }
            acc
        })
        .collect()
}

/// Largest interior defect of `Δ₀ = Δ̄₀ + ½μ_ℝ` and `Δ₀ = Δ̃₀ - ½μ_ℝ` on a `ℂ²` section.
///
/// `Δ₀ = -∂²_{A⁰} - Σ A^iA^i`, `Δ̄₀ = -∂_{-α†}∂_α + β†β`, `Δ̃₀ = -∂_α∂_{-α†} + ββ†`.
/// The common `-∂²` term is omitted from all three operators.
pub fn weitzenbock_residual(b: &ComplexNahm, s: &[[C64; 2]]) -> f64 {
    let r = b.to_real(0.0, 0.0);
    let ds = apply_d(b, s);
    let a0s = pointwise(&r.a[0], s);
    let d_a0s = apply_d(b, &a0s);
    let a0ds = pointwise(&r.a[0], &ds);
    let a0a0s = pointwise(&r.a[0], &a0s);
    let mut lap0 = comb(&[(-1.0, &d_a0s), (-1.0, &a0ds), (-1.0, &a0a0s)]);
    for i in 1..4 {
        let ais = pointwise(&r.a[i], s);
        let aiais = pointwise(&r.a[i], &ais);
        lap0 = comb(&[(1.0, &lap0), (-1.0, &aiais)]);
    }
    let ad = b.alpha.adjoint();
    let bd = b.beta.adjoint();
    let als = pointwise(&b.alpha, s);
    let d_als = apply_d(b, &als);
    let adds = pointwise(&ad, &ds);
    let adals = pointwise(&ad, &als);
    let btbs = pointwise(&bd, &pointwise(&b.beta, s));
    // -∂_{-α†}∂_α s + β†βs = -(D(αs) - α†Ds - α†αs) + β†βs (minus the -DDs term).
    let lap_bar = comb(&[(-1.0, &d_als), (1.0, &adds), (1.0, &adals), (1.0, &btbs)]);
    let ads = pointwise(&ad, s);
    let d_ads = apply_d(b, &ads);
    let alds = pointwise(&b.alpha, &ds);
    let alads = pointwise(&b.alpha, &ads);
    let bbts = pointwise(&b.beta, &pointwise(&bd, s));
    // -∂_α∂_{-α†} s + ββ†s = -(-D(α†s) + αDs - αα†s) + ββ†s.
    let lap_tilde = comb(&[(1.0, &d_ads), (-1.0, &alds), (1.0, &alads), (1.0, &bbts)]);
    let mu = mu_real_unitary(b);
    let mus = pointwise(&mu, s);
    let r1 = comb(&[(1.0, &lap0), (-1.0, &lap_bar), (-0.5, &mus)]);
    let r2 = comb(&[(1.0, &lap0), (-1.0, &lap_tilde), (0.5, &mus)]);
    let n = s.len();
    let mut worst: f64 = 0.0;
    for k in 1..n - 1 {
        for v in [r1[k], r2[k]] {
            worst = worst.max((v[0].norm_sqr() + v[1].norm_sqr()).sqrt());
        }
    }
    worst
}

/// `Ψ(x, y) = (e^{2u} - 2u - 1)/(2u²)` with `u = y - x`.
pub fn psi(x: f64, y: f64) -> f64 {
    let u = y - x;
    if u.abs() < 1e-3 {
        // Taylor series Σ 2^{k+1} u^k/(k+2)!.
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..8 {
            sum += term;
            term *= 2.0 * u / (k as f64 + 3.0);
        }
        sum
    } else {
        ((2.0 * u).exp() - 2.0 * u - 1.0) / (2.0 * u * u)
    }
}

/// Donaldson's functional
/// `M(h) = ∫ Tr(-hμ_ℝ + Ψ(-h)(∂_αh)·∂_{-α†}h + Ψ(-h)([β,h])·[h,β†])` on unitary-frame data.
pub fn donaldson_m(h: &MatFn, b: &ComplexNahm) -> f64 {
    let mu = mu_real_unitary(b);
    let dh = h.derivative();
    let ad = b.alpha.adjoint();
    let bd = b.beta.adjoint();
    let vals: Vec<f64> = (0..h.n())
        .map(|k| {
            let hk = h.values[k];
            let mh = -hk;
            let da = dh.values[k] + b.alpha.values[k].commutator(&hk);
            let db = dh.values[k] - ad.values[k].commutator(&hk);
            let ba = b.beta.values[k].commutator(&hk);
            let bb = hk.commutator(&bd.values[k]);
            let pa = crate::algebra::herm_bifunction(&mh, &da, psi);
            let pb = crate::algebra::herm_bifunction(&mh, &ba, psi);
            (-(hk * mu.values[k]) + pa * db + pb * bb).trace().re
        })
        .collect();
    h.grid.integrate(&vals)
}

/// Gauge transformation `exp(h)` of a Hermitian field.
pub fn exp_gauge(h: &MatFn) -> GaugeTransform {
    GaugeTransform::new(h.map(herm_exp), GaugeKind::Complex)
}

#[derive(Clone, Copy, Debug)]
pub struct DuyOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DuyOptions {
    fn default() -> Self {
        DuyOptions {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// How a solve was carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DuyRoute {
    AlreadySolved,
    Newton,
    Polystable,
}

#[derive(Clone, Debug)]
pub struct DuyResult {
    /// Positive-definite part of `total`.
    pub g: MatFn,
    /// Gauge transformation from the unitary-frame input to the complex data of `a`.
    pub total: GaugeTransform,
    pub a: RealNahm,
    pub residual: f64,
    pub iterations: usize,
    pub m_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub tikhonov_used: bool,
    pub route: DuyRoute,
}

impl DuyResult {
    pub fn to_json(&self) -> Value {
        json!({
            "residual": self.residual,
            "iterations": self.iterations,
            "M_history": self.m_history,
            "residual_history": self.residual_history,
            "tikhonov_used": self.tikhonov_used,
            "route": format!("{:?}", self.route),
            "A": self.a.a.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            "g": self.g.to_json(),
        })
    }
}

/// Armijo constant and backtracking factor for the line search on `½‖μ_ℝ‖²`.
const ARMIJO_C1: f64 = 0.25;
const BACKTRACK: f64 = 0.5;
/// Relative singular-value floor below which the Newton system is regularized.
const TIKHONOV_TRIGGER: f64 = 1e-10;
const TIKHONOV_SHIFT: f64 = 1e-12;

/// Coefficients `η` of the Newton direction `Δ₀η = μ_ℝ` at unitary-frame data `bp`.
pub fn newton_direction(bp: &ComplexNahm, mu: &MatFn) -> Result<(DVector<f64>, bool)> {
    let grid = bp.grid().clone();
    let a = bp.to_real(0.0, 0.0);
    let mut m = LinearOps::new(&a).laplacian0(&grid);
    let mut rhs = ops::flatten(&[mu.values.iter().map(|v| v.herm_coeffs()).collect()]);
    let bcs = gauge_bcs(1);
    apply_tau_rows(&mut m, &mut rhs, &grid, &bcs);
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin < TIKHONOV_TRIGGER * smax {
        let (x, _) = solve_dense_tikhonov(m, &rhs)?;
        return Ok((x, true));
    }
    solve_dense(m, &rhs, TIKHONOV_SHIFT)
}

fn solve_dense_tikhonov(m: nalgebra::DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, bool)> {
    let mt = m.transpose();
    let mut nrm = &mt * &m;
    let scale = nrm.diagonal().amax().max(1.0);
    for i in 0..nrm.nrows() {
        nrm[(i, i)] += TIKHONOV_SHIFT * scale;
    }
    let x = nrm.cholesky().ok_or(Error::Singular)?.solve(&(&mt * rhs));
    Ok((x, true))
}

fn herm_field(grid: &crate::grid::GridRef, eta: &DVector<f64>, scale: f64) -> MatFn {
    let n = grid.n;
    MatFn::new(
        grid,
        (0..n)
            .map(|k| Mat2::from_herm_coeffs(std::array::from_fn(|j| scale * eta[ops::idx(n, 0, k, j)])))
            .collect(),
    )
}

/// Solve `μ_ℝ(g(B)) = 0` for polystable standard-frame data `b`.
pub fn solve_duy(b: &ComplexNahm, xi_r: (f64, f64), opts: &DuyOptions) -> Result<DuyResult> {
    let subs = find_sublines(b);
    match classify_sublines(&subs, xi_r) {
        Stability::Stable => solve_newton(b, xi_r, opts),
        Stability::StrictlyPolystable => solve_polystable(b, xi_r, &subs),
        _ => Err(Error::UnstableInput),
    }
}

fn solve_newton(b: &ComplexNahm, xi_r: (f64, f64), opts: &DuyOptions) -> Result<DuyResult> {
    let bu = to_unitary_frame(b, xi_r);
    let grid = bu.grid().clone();
    let scale = 1.0 + b.norm_sup();
    let target = opts.tol * scale;
    let mut g = MatFn::constant(&grid, Mat2::identity());
    let mut bp = bu.clone();
    let mut mu = mu_real_unitary(&bp);
    let mut res = herm_norm(&mu);
    let mut residual_history = vec![res];
    let mut m_history = vec![0.0];
    let mut tikhonov_used = false;
    let mut iterations = 0;
    let route = if res <= target {
        DuyRoute::AlreadySolved
    } else {
        DuyRoute::Newton
    };
    while res > 0.1 * target {
        if iterations >= opts.max_iter || !res.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
                history: residual_history,
            });
        }
        let (eta, tik) = newton_direction(&bp, &mu)?;
        tikhonov_used |= tik;
        let f0 = 0.5 * res * res;
        let mut s = 1.0;
        let accepted = loop {
            let step = herm_field(&grid, &eta, 0.5 * s);
            let gt = g.zip(&step, |a, e| *a * herm_exp(e));
            let bt = GaugeTransform::new(gt.clone(), GaugeKind::Complex).act_complex_unchecked(&bu);
            let mut_ = mu_real_unitary(&bt);
            let rt = herm_norm(&mut_);
            if 0.5 * rt * rt <= f0 * (1.0 - 2.0 * ARMIJO_C1 * s) {
                break Some((gt, bt, mut_, rt));
            }
            s *= BACKTRACK;
            if s < 1e-12 {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((gt, bt, mut_, rt)) => {
                g = gt;
                bp = bt;
                mu = mut_;
                res = rt;
                residual_history.push(res);
                if let Ok(h) = log_positive(&g) {
                    m_history.push(donaldson_m(&h, &bu));
                }
            }
            None => {
                if res <= target {
                    break;
                }
                return Err(Error::NoConvergence {
                    iterations,
                    residual: res,
                    history: residual_history,
                });
            }
        }
    }
    let gpos = g.map(|m| positive_part(m).unwrap_or(Mat2::identity()));
    let a = bp.to_real(xi_r.0, xi_r.1);
    Ok(DuyResult {
        g: gpos,
        total: GaugeTransform::new(g, GaugeKind::Complex),
        a,
        residual: res,
        iterations,
        m_history,
        residual_history,
        tikhonov_used,
        route,
    })
}

/// `d/dτ ‖μ_ℝ(exp(τη)B)‖²` at `τ = 0` for the Newton direction `η`, by central difference,
/// together with `‖μ_ℝ(B)‖²`.
pub fn newton_descent_rate(b: &ComplexNahm, xi_r: (f64, f64), step: f64) -> Result<(f64, f64)> {
    let bu = to_unitary_frame(b, xi_r);
    let grid = bu.grid().clone();
    let mu = mu_real_unitary(&bu);
    let (eta, _) = newton_direction(&bu, &mu)?;
    let f = |t: f64| {
        let g = herm_field(&grid, &eta, t).map(herm_exp);
        let r = herm_norm(&mu_real_unitary(
            &GaugeTransform::new(g, GaugeKind::Complex).act_complex_unchecked(&bu),
        ));
        r * r
    };
    let rate = (f(step) - f(-step)) / (2.0 * step);
    let r0 = herm_norm(&mu);
    Ok((rate, r0 * r0))
}

/// `log` of the positive factor of each sample.
pub fn log_positive(g: &MatFn) -> Result<MatFn> {
    let mut vals = Vec::with_capacity(g.n());
    for m in &g.values {
        vals.push(herm_log(&positive_part(m)?)?);
    }
    Ok(MatFn::new(&g.grid, vals))
}

fn solve_polystable(b: &ComplexNahm, xi_r: (f64, f64), subs: &[Subline]) -> Result<DuyResult> {
    let grid = b.grid().clone();
    let flipped = subs.iter().any(|s| s.endpoint_signs.0 != s.endpoint_signs.1);
    if !flipped {
        return polystable_core(b, xi_r);
    }
    let g1 = GaugeTransform::g1(&grid);
    let b2 = g1.act_complex_unchecked(b);
    let xi2 = (xi_r.0, -xi_r.1);
    let mut r = polystable_core(&b2, xi2)?;
    let a = g1.inverse().act_real(&r.a)?;
    // Unitary input → standard → twisted standard → twisted unitary → solution → untwist.
    let f = frame_gauge(&grid, xi_r);
    let f2inv = frame_gauge(&grid, xi2).map(|m| m.inverse());
    let total = f.mul(&g1.g).mul(&f2inv).mul(&r.total.g).mul(&g1.inverse().g);
    r.g = total.map(|m| positive_part(m).unwrap_or(Mat2::identity()));
    r.total = GaugeTransform::new(total, GaugeKind::Complex);
    r.a = a;
    Ok(r)
}

/// Polystable data whose two sublines are `ℂe₁` and `ℂe₂` at both ends.
fn polystable_core(b: &ComplexNahm, xi_r: (f64, f64)) -> Result<DuyResult> {
    let grid = b.grid().clone();
    let tol = 1e-8 * (1.0 + b.norm_sup());
    if (xi_r.0 - xi_r.1).abs() > tol || (b.xi_c0 - b.xi_cl).norm() > tol {
        return Err(Error::InvalidParams(
            "polystable data needs matching FI parameters at both ends".into(),
        ));
    }
    let p = transport_matrices(&b.alpha);
    let xi = xi_r.0;
    let xc = b.xi_c0;
    let e = MatFn::from_fn(&grid, |t| diag_exp(xi * t));
    let pf = MatFn::new(&grid, p);
    let total = frame_gauge(&grid, xi_r).mul(&pf).mul(&e);
    let d = |x: f64| boundary_diag(C64::new(x, 0.0));
    let a = RealNahm::constant(
        &grid,
        [Mat2::zero(), d(xi), d(xc.re), d(xc.im)],
        [xi, xc.re, xc.im],
        [xi, xc.re, xc.im],
    );
    let residual = herm_norm(&mu_real_unitary(&a.to_complex()));
    Ok(DuyResult {
        g: total.map(|m| positive_part(m).unwrap_or(Mat2::identity())),
        total: GaugeTransform::new(total, GaugeKind::Complex),
        a,
        residual,
        iterations: 0,
        m_history: vec![0.0],
        residual_history: vec![residual],
        tikhonov_used: false,
        route: DuyRoute::Polystable,
    })
}

/// Complex-gauge invariants of real data: `H` of the transport of `α = A⁰ + iA¹`, and `∫Tr β²`.
pub fn gauge_invariants(a: &RealNahm) -> (C64, C64) {
    let b = a.to_complex();
    let h = double_coset_invariant(&parallel_transport(&b.alpha));
    let tb = b.beta.integrate_trace_product(&b.beta);
    (h, tb)
}

/// Endpoint signs of a subline list, for diagnostics.
pub fn subline_signature(subs: &[Subline]) -> Vec<(Sign, Sign)> {
    subs.iter().map(|s| s.endpoint_signs).collect()
}
