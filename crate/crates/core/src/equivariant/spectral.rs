//! Rank-one flat orbifold check: `Γ̂ = ℤ ⋊ Z₂` acting on `ℝ⁴ = ℝ ⊕ ℝ³` by translation of
//! the first coordinate and `q ↦ -q`, realised on `Z₂`-equivariant ℂ²-valued functions on a
//! circle sampled at `2K + 1` points.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{Mat2, C64};
use crate::error::{Error, Result};

/// Constant diagonal data `a = diag(a, -a)`, `φ^i = diag(φ^i, -φ^i)` on a circle, optionally
/// conjugated by an equivariant unitary gauge transformation.
#[derive(Clone, Debug)]
pub struct EquivariantSpectralProblem {
    pub k: usize,
    pub a: f64,
    pub phi: [f64; 3],
    pub circumference: f64,
    /// Seed for a random equivariant gauge transformation; `None` keeps the diagonal frame.
    pub gauge_seed: Option<u64>,
    /// Extra constant Hermitian perturbation of `φ^i`; used to exercise the commutator check.
    pub phi_offdiag: Option<[f64; 3]>,
}

impl EquivariantSpectralProblem {
    pub fn new(k: usize, a: f64, phi: [f64; 3], circumference: f64) -> Self {
        EquivariantSpectralProblem {
            k,
            a,
            phi,
            circumference,
            gauge_seed: None,
            phi_offdiag: None,
        }
    }

    pub fn with_gauge(mut self, seed: u64) -> Self {
        self.gauge_seed = Some(seed);
        self
    }

    /// Spacing of the translation lattice in the first coordinate.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.circumference
    }

    pub fn q(&self) -> [f64; 4] {
        [self.a, self.phi[0], self.phi[1], self.phi[2]]
    }
}

/// Sampled heat trace `Tr e^{-τΔ} j(γ̂)` with `γ̂ = (n, ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatTrace {
    pub shift: i64,
    pub reflect: bool,
    pub tau: f64,
    pub value: C64,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub k_used: usize,
    /// Joint eigenvalues inside the window `|first coordinate| ≤ (K - 2)ω`, sorted.
    pub eigenvalues: Vec<[f64; 4]>,
    pub orbit_defect: f64,
    pub orbit_ok: bool,
    pub commutator: f64,
    pub eigen_residual: f64,
    /// Largest `|Tr j(γ̂)|_{Y_μ}|` over stabilised eigenvalues and nontrivial stabiliser elements.
    pub stabiliser_character: f64,
    /// Number of in-window eigenspaces whose dimension differs from the stabiliser order.
    pub regular_defect: usize,
    pub heat_traces: Vec<HeatTrace>,
}

impl SpectrumReport {
    pub fn max_heat_trace(&self) -> f64 {
        self.heat_traces.iter().map(|h| h.value.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "K": self.k_used,
            "window_eigenvalues": self.eigenvalues.len(),
            "orbit_ok": self.orbit_ok,
            "orbit_defect": self.orbit_defect,
            "commutator": self.commutator,
            "eigen_residual": self.eigen_residual,
            "stabiliser_character": self.stabiliser_character,
            "regular_defect": self.regular_defect,
            "max_heat_trace": self.max_heat_trace(),
            "heat_traces": self.heat_traces.iter().map(|h| json!({
                "shift": h.shift, "reflect": h.reflect, "tau": h.tau, "re": h.value.re, "im": h.value.im,
            })).collect::<Vec<_>>(),
        })
    }
}

pub const COMMUTE_TOL: f64 = 1e-12;
pub const HEAT_TAUS: [f64; 4] = [0.1, 0.3, 0.6, 1.0];
const HEAT_TRUNCATION: f64 = 1e-14;
const TRANSLATIONS: [i64; 3] = [0, 1, 2];

/// Smallest cutoff whose edge heat weight `e^{-τK²ω²}` drops below `1e-14` at `τ_min`.
pub fn heat_cutoff(k: usize, omega: f64, tau_min: f64) -> usize {
    let need = ((-HEAT_TRUNCATION.ln()) / tau_min).sqrt() / omega;
    k.max(need.ceil() as usize)
}

/// Fourier differentiation on `m` equispaced points (odd `m`), exactly Hermitian with
/// spectrum `ω·{-K, ..., K}`.
fn fourier_derivative(m: usize, omega: f64) -> DMatrix<C64> {
    let k = (m - 1) / 2;
    let dft = DMatrix::from_fn(m, m, |j, s| {
        let wave = s as f64 - k as f64;
        C64::from_polar(
            1.0 / (m as f64).sqrt(),
            2.0 * std::f64::consts::PI * wave * j as f64 / m as f64,
        )
    });
    let waves = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            C64::new(omega * (r as f64 - k as f64), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &dft * waves * dft.adjoint()
}

/// Index layout: `2·j + c` for sample `j` and fibre component `c`.
fn embed_pointwise(m: usize, f: impl Fn(usize) -> Mat2) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        let g = f(j);
        for r in 0..2 {
            for c in 0..2 {
                out[(2 * j + r, 2 * j + c)] = g.get(r, c);
            }
        }
    }
    out
}

fn kron_scalar(d: &DMatrix<C64>) -> DMatrix<C64> {
    let m = d.nrows();
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            out[(2 * i, 2 * j)] = d[(i, j)];
            out[(2 * i + 1, 2 * j + 1)] = d[(i, j)];
        }
    }
    out
}

/// `j(n, ε)`: multiplication by `e^{inωθ}`, composed with `ψ(θ) ↦ σ_x ψ(-θ)` when `ε`.
fn j_matrix(m: usize, omega: f64, circumference: f64, shift: i64, reflect: bool) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        let theta = circumference * j as f64 / m as f64;
        let phase = C64::from_polar(1.0, shift as f64 * omega * theta);
        let src = if reflect { (m - j) % m } else { j };
        for c in 0..2 {
            let sc = if reflect { 1 - c } else { c };
            out[(2 * j + c, 2 * src + sc)] = phase;
        }
    }
    out
}

fn unitary_exp_i(h: &Mat2) -> Mat2 {
    let e = crate::algebra::eigh(h);
    let mut out = Mat2::zero();
    for (lam, v) in e.values.iter().zip(e.vectors.iter()) {
        let ph = C64::from_polar(1.0, *lam);
        for r in 0..2 {
            for c in 0..2 {
                out.set(r, c, out.get(r, c) + ph * v[r] * v[c].conj());
            }
        }
    }
    out
}

/// Equivariant gauge `g(θ) = exp(i h(θ))` with `σ_x h(-θ) σ_x = h(θ)`.
fn gauge_matrix(m: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<[f64; 4]> = (0..3).map(|_| std::array::from_fn(|_| rng.gen_range(-0.6..0.6))).collect();
    embed_pointwise(m, |j| {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let mut h = Mat2::zero();
        for (l, c) in modes.iter().enumerate() {
            let (cs, sn) = ((l as f64 * theta).cos(), (l as f64 * theta).sin());
            // Even in θ along 1 and σ_x, odd along σ_y and σ_z.
            h = h
                + Mat2::identity().scale_re(c[0] * cs)
                + Mat2::sigma_x().scale_re(c[1] * cs)
                + Mat2::sigma_y().scale_re(c[2] * sn)
                + Mat2::sigma_z().scale_re(c[3] * sn);
        }
        unitary_exp_i(&h)
    })
}

/// `‖[A, B]‖_F / (‖A‖_F ‖B‖_F)`, zero when either operator vanishes.
fn commutator_norm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let s = a.norm() * b.norm();
    if s == 0.0 {
        0.0
    } else {
        (a * b - b * a).norm() / s
    }
}

/// Joint spectrum of `(Φ₀, Φ₁, Φ₂, Φ₃)` with orbit, stabiliser and heat-trace checks.
pub fn flat_orbifold_spectrum(p: &EquivariantSpectralProblem) -> Result<SpectrumReport> {
    if p.k < 8 {
        return Err(Error::InvalidParams("Fourier cutoff must be at least 8".into()));
    }
    if !(p.circumference > 0.0) {
        return Err(Error::InvalidParams("circumference must be positive".into()));
    }
    let omega = p.omega();
    let k = heat_cutoff(p.k, omega, HEAT_TAUS[0]);
    let m = 2 * k + 1;

    let d = kron_scalar(&fourier_derivative(m, omega));
    let diag = |x: f64| embed_pointwise(m, |_| Mat2::diag(C64::new(x, 0.0), C64::new(-x, 0.0)));
    let mut ops = vec![&d + diag(p.a)];
    for i in 0..3 {
        let mut op = diag(p.phi[i]);
        if let Some(off) = p.phi_offdiag {
            // σ_y and σ_z anticommute with σ_x conjugation, so these terms stay equivariant.
            let extra = if i == 0 { Mat2::sigma_y() } else { Mat2::sigma_z() };
            op += embed_pointwise(m, |_| extra.scale_re(off[i]));
        }
        ops.push(op);
    }
    if let Some(seed) = p.gauge_seed {
        let g = gauge_matrix(m, seed);
        for op in ops.iter_mut() {
            *op = &g * &*op * g.adjoint();
        }
    }

    let mut commutator: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            commutator = commutator.max(commutator_norm(&ops[a], &ops[b]));
        }
    }
    if commutator > COMMUTE_TOL {
        return Err(Error::NonCommuting(commutator));
    }

    // A generic combination separates joint eigenspaces.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b1f);
    let weights: Vec<f64> = (0..4).map(|i| if i == 0 { 1.0 } else { rng.gen_range(0.05..0.2) }).collect();
    let mut h = DMatrix::<C64>::zeros(2 * m, 2 * m);
    for (w, op) in weights.iter().zip(&ops) {
        h += op * C64::new(*w, 0.0);
    }
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;

    let mut joint: Vec<[f64; 4]> = Vec::with_capacity(2 * m);
    let mut eigen_residual: f64 = 0.0;
    for col in 0..2 * m {
        let x = v.column(col);
        let mut mu = [0.0; 4];
        for (i, op) in ops.iter().enumerate() {
            let ox = op * x;
            mu[i] = x.dotc(&ox).re;
            eigen_residual = eigen_residual.max((ox - x * C64::new(mu[i], 0.0)).camax());
        }
        joint.push(mu);
    }

    // Window check against the Γ̂-orbit of q.
    // Points on the window edge are kept on both sides despite rounding.
    let window = (k as f64 - 2.0) * omega * (1.0 + 1e-10);
    let q = p.q();
    let mut expected: Vec<[f64; 4]> = Vec::new();
    let reach = k as i64 + 2;
    for n in -reach..=reach {
        for sign in [1.0, -1.0] {
            let mu = [n as f64 * omega + sign * q[0], sign * q[1], sign * q[2], sign * q[3]];
            if mu[0].abs() <= window {
                expected.push(mu);
            }
        }
    }
    let mut got: Vec<[f64; 4]> = joint.iter().copied().filter(|mu| mu[0].abs() <= window).collect();
    let total = |a: &[f64; 4]| (a[0], a[1], a[2], a[3]);
    expected.sort_by(|a, b| total(a).partial_cmp(&total(b)).unwrap());
    got.sort_by(|a, b| total(a).partial_cmp(&total(b)).unwrap());
    let orbit_defect = if got.len() == expected.len() {
        let mut used = vec![false; got.len()];
        let mut worst: f64 = 0.0;
        for e in &expected {
            let (best, dist) = got
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, g)| (i, (0..4).map(|c| (g[c] - e[c]).abs()).fold(0.0, f64::max)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[best] = true;
            worst = worst.max(dist);
        }
        worst
    } else {
        f64::INFINITY
    };
    let orbit_ok = orbit_defect < 1e-8;

    // Eigenspaces Y_μ and the character of their stabilisers.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (col, mu) in joint.iter().enumerate() {
        if mu[0].abs() > window {
            continue;
        }
        match clusters
            .iter_mut()
            .find(|c| (0..4).all(|i| (joint[c[0]][i] - mu[i]).abs() < 1e-7))
        {
            Some(c) => c.push(col),
            None => clusters.push(vec![col]),
        }
    }
    let mut stabiliser_character: f64 = 0.0;
    let mut regular_defect = 0usize;
    for c in &clusters {
        let mu = joint[c[0]];
        // (n, ε) fixes μ iff ε = -1, φ = 0 and 2μ₀ = nω.
        let mut stab = 1usize;
        if mu[1..].iter().all(|x| x.abs() < 1e-7) {
            let n = 2.0 * mu[0] / omega;
            if (n - n.round()).abs() < 1e-7 {
                stab = 2;
                let jm = j_matrix(m, omega, p.circumference, n.round() as i64, true);
                let tr: C64 = c.iter().map(|&col| v.column(col).dotc(&(&jm * v.column(col)))).sum();
                stabiliser_character = stabiliser_character.max(tr.norm());
            }
        }
        if c.len() != stab {
            regular_defect += 1;
        }
    }

    let mut heat_traces = Vec::new();
    let energies: Vec<f64> = joint.iter().map(|mu| mu.iter().map(|x| x * x).sum()).collect();
    for &shift in &TRANSLATIONS {
        for reflect in [false, true] {
            if shift == 0 && !reflect {
                continue;
            }
            let jm = j_matrix(m, omega, p.circumference, shift, reflect);
            let diag_j: Vec<C64> = (0..2 * m).map(|col| v.column(col).dotc(&(&jm * v.column(col)))).collect();
            for &tau in &HEAT_TAUS {
                let value: C64 = energies.iter().zip(&diag_j).map(|(e, dj)| dj * (-tau * e).exp()).sum();
                heat_traces.push(HeatTrace {
                    shift,
                    reflect,
                    tau,
                    value,
                });
            }
        }
    }

    Ok(SpectrumReport {
        k_used: k,
        eigenvalues: got,
        orbit_defect,
        orbit_ok,
        commutator,
        eigen_residual,
        stabiliser_character,
        regular_defect,
        heat_traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_point_orbit() {
        let p = EquivariantSpectralProblem::new(16, 0.3, [0.2, -0.1, 0.4], 2.0 * std::f64::consts::PI).with_gauge(3);
        let r = flat_orbifold_spectrum(&p).unwrap();
        assert!(r.orbit_ok, "{}", r.orbit_defect);
        assert!(r.max_heat_trace() < 1e-10);
        assert_eq!(r.regular_defect, 0);
    }

    #[test]
    fn fixed_point_carries_regular_rep() {
        for a in [0.0, 0.5] {
            let p = EquivariantSpectralProblem::new(12, a, [0.0; 3], 2.0 * std::f64::consts::PI).with_gauge(9);
            let r = flat_orbifold_spectrum(&p).unwrap();
            assert!(r.orbit_ok);
            assert!(r.stabiliser_character < 1e-10, "{}", r.stabiliser_character);
            assert_eq!(r.regular_defect, 0);
        }
    }

    #[test]
    fn non_commuting_rejected() {
        let mut p = EquivariantSpectralProblem::new(8, 0.3, [0.2, 0.1, 0.0], 3.0);
        p.phi_offdiag = Some([0.5, 0.5, 0.0]);
        assert!(matches!(flat_orbifold_spectrum(&p), Err(Error::NonCommuting(_))));
    }
}
