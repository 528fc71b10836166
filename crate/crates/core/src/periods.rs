//! Periods of the Kähler forms over the exceptional spheres.
//!
//! The sphere lies over the Kronheimer zero section `(α^K, β^K) = (aE₁₂, cE₁₂)`,
//! `[a : c] ∈ ℂP¹`. Each point is lifted to the complex Nahm datum
//! `α = aE₁₂`, `β = [[-iξ, c/L + iξa(L - 2t)], [0, iξ]]`, which solves `∂_αβ = 0`
//! and is stable whenever `ξ^ℝ_0 > ξ^ℝ_L`.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{v3, Mat2, C64, I};
use crate::duy::{solve_duy, DuyOptions};
use crate::error::{Error, Result};
use crate::grid::{make_grid, GridRef, MatFn};
use crate::moduli::{coulomb_project, flat, omega};
use crate::nahm::{ComplexNahm, GaugeTransform, RealNahm};

pub type XiPair = ([f64; 3], [f64; 3]);

/// Icosahedron refined `level` times; faces are oriented outward.
pub fn icosphere(level: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let mut verts: Vec<[f64; 3]> = raw.iter().map(|v| v3::scale(*v, 1.0 / v3::norm(*v))).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = v3::add(verts[a], verts[b]);
                verts.push(v3::scale(m, 1.0 / v3::norm(m)));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.extend([[f[0], ab, ca], [f[1], bc, ab], [f[2], ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Homogeneous coordinates `[a : c]` of a unit vector, through stereographic charts.
pub fn sphere_to_projective(p: [f64; 3]) -> (C64, C64) {
    chart_coords(p, p[2] <= 0.0)
}

/// `(1, ζ)` in the southern chart, `(1/ζ, 1)` in the northern one.
fn chart_coords(p: [f64; 3], south: bool) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    if south {
        (one, C64::new(p[0], p[1]) / (1.0 - p[2]))
    } else {
        (C64::new(p[0], -p[1]) / (1.0 + p[2]), one)
    }
}

/// Complex Nahm lift of the sphere point `[a : c]` with complex FI parameter `ξ` at both ends.
pub fn sphere_point_data(a: C64, c: C64, xi: C64, grid: &GridRef) -> ComplexNahm {
    let l = grid.l;
    let zero = C64::new(0.0, 0.0);
    let alpha = MatFn::constant(grid, Mat2::new(zero, a, zero, zero));
    let beta = MatFn::from_fn(grid, |t| Mat2::new(-I * xi, c / l + I * xi * a * (l - 2.0 * t), zero, I * xi));
    ComplexNahm::new(alpha, beta, xi, xi)
}

/// Rotation `R ∈ SO(3)` with `R d = |d| e₁`.
pub fn rotation_to_e1(d: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let nd = v3::norm(d);
    if nd == 0.0 {
        return Err(Error::InvalidParams("direction vanishes".into()));
    }
    let u = v3::scale(d, 1.0 / nd);
    let seed = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let w = v3::sub(seed, v3::scale(u, v3::dot(seed, u)));
    let v = v3::scale(w, 1.0 / v3::norm(w));
    let x = v3::cross(u, v);
    Ok([u, v, x])
}

fn transpose(r: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| r[j][i]))
}

fn apply(r: &[[f64; 3]; 3], x: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| v3::dot(r[i], x))
}

/// Which exceptional sphere to integrate over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereKind {
    /// Class with period proportional to `ξ₀ - ξ_L`.
    Difference,
    /// Image of the difference sphere at `(ξ₀, -ξ_L)` under `g₁`.
    Sum,
}

impl SphereKind {
    pub fn label(self) -> &'static str {
        match self {
            SphereKind::Difference => "difference",
            SphereKind::Sum => "sum",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PeriodOptions {
    pub n: usize,
    pub l: f64,
    /// Icosahedral refinement level; level 1 has 80 triangles.
    pub level: usize,
    pub fd_step: f64,
    /// Scale `λ` of the Möbius map `[a : c] ↦ [a : λc]` applied before lifting.
    pub chart_scale: f64,
    pub duy: DuyOptions,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            n: 40,
            l: 1.0,
            level: 1,
            fd_step: 1e-4,
            chart_scale: 1.0,
            duy: DuyOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PeriodReport {
    pub xi: XiPair,
    pub sphere: SphereKind,
    /// `∫ω¹, ∫ω², ∫ω³`.
    pub periods: [f64; 3],
    pub mesh: usize,
    pub failed_points: usize,
}

impl PeriodReport {
    /// `∫ω^ℂ = ∫(ω² + iω³)`.
    pub fn omega_c(&self) -> C64 {
        C64::new(self.periods[1], self.periods[2])
    }

    pub fn to_json(&self, form: Option<usize>) -> Value {
        let forms: Vec<Value> = match form {
            Some(i) => vec![json!({"form": format!("omega{}", i + 1), "period": self.periods[i]})],
            None => {
                let mut v: Vec<Value> = (0..3)
                    .map(|i| json!({"form": format!("omega{}", i + 1), "period": self.periods[i]}))
                    .collect();
                v.push(json!({"form": "omegaC", "period": [self.omega_c().re, self.omega_c().im]}));
                v
            }
        };
        json!({
            "xi": [self.xi.0, self.xi.1],
            "sphere": self.sphere.label(),
            "forms": forms,
            "mesh": self.mesh,
            "failed_points": self.failed_points,
        })
    }
}

/// Degree-2 quadrature on the reference triangle (weights sum to 1).
const QUAD: [[f64; 2]; 3] = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]];

struct SphereSetup {
    grid: GridRef,
    /// Inverse rotation back to the caller's frame.
    back: [[f64; 3]; 3],
    xi_c: C64,
    xi_r: (f64, f64),
    twist: Option<GaugeTransform>,
    chart_scale: f64,
}

impl SphereSetup {
    fn solve(&self, p: [f64; 3], chart: bool, opts: &DuyOptions) -> Result<RealNahm> {
        let p = v3::scale(p, 1.0 / v3::norm(p));
        let (a, c) = chart_coords(p, chart);
        let b = sphere_point_data(a, c * self.chart_scale, self.xi_c, &self.grid);
        let r = solve_duy(&b, self.xi_r, opts)?;
        let a = r.a.rotate(&self.back);
        match &self.twist {
            Some(g) => g.act_real(&a),
            None => Ok(a),
        }
    }
}

fn setup(xi: &XiPair, kind: SphereKind, opts: &PeriodOptions) -> Result<SphereSetup> {
    let grid = make_grid(opts.l, opts.n)?;
    let (xi0, xi_l, twist) = match kind {
        SphereKind::Difference => (xi.0, xi.1, None),
        SphereKind::Sum => (xi.0, v3::scale(xi.1, -1.0), Some(GaugeTransform::g1(&grid))),
    };
    let r = rotation_to_e1(v3::sub(xi0, xi_l))?;
    let (p0, pl) = (apply(&r, xi0), apply(&r, xi_l));
    let xi_c = C64::new(0.5 * (p0[1] + pl[1]), 0.5 * (p0[2] + pl[2]));
    Ok(SphereSetup {
        grid,
        back: transpose(&r),
        xi_c,
        xi_r: (p0[0], pl[0]),
        twist,
        chart_scale: opts.chart_scale,
    })
}

fn triangle_integral(s: &SphereSetup, tri: [[f64; 3]; 3], opts: &PeriodOptions) -> Result<[f64; 3]> {
    let h = opts.fd_step;
    let e1 = v3::sub(tri[1], tri[0]);
    let e2 = v3::sub(tri[2], tri[0]);
    let at = |u: f64, v: f64| v3::add(tri[0], v3::add(v3::scale(e1, u), v3::scale(e2, v)));
    let mut acc = [0.0; 3];
    for q in QUAD {
        let base_p = at(q[0], q[1]);
        // One stereographic chart for the point and all its finite-difference neighbours.
        let chart = base_p[2] <= 0.0;
        let base = s.solve(base_p, chart, &opts.duy)?;
        let mut tangents = Vec::with_capacity(2);
        for (du, dv) in [(h, 0.0), (0.0, h)] {
            let plus = s.solve(at(q[0] + du, q[1] + dv), chart, &opts.duy)?;
            let minus = s.solve(at(q[0] - du, q[1] - dv), chart, &opts.duy)?;
            let v = (flat(&plus) - flat(&minus)) / (2.0 * h);
            tangents.push(coulomb_project(&base, &v)?);
        }
        for (i, a) in acc.iter_mut().enumerate() {
            *a += omega(&s.grid, i, &tangents[0], &tangents[1]) / (2.0 * QUAD.len() as f64);
        }
    }
    Ok(acc)
}

/// Periods of `ω¹, ω², ω³` over one exceptional sphere at FI parameters `xi`.
pub fn sphere_periods(xi: &XiPair, kind: SphereKind, opts: &PeriodOptions) -> Result<PeriodReport> {
    let s = setup(xi, kind, opts)?;
    let (verts, faces) = icosphere(opts.level);
    let parts: Vec<Result<[f64; 3]>> = faces
        .par_iter()
        .map(|f| triangle_integral(&s, [verts[f[0]], verts[f[1]], verts[f[2]]], opts))
        .collect();
    let mut periods = [0.0; 3];
    let mut failed = 0;
    for p in parts {
        match p {
            Ok(v) if v.iter().all(|x| x.is_finite()) => {
                for i in 0..3 {
                    periods[i] += v[i];
                }
            }
            Ok(_) | Err(Error::NoConvergence { .. }) => failed += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(PeriodReport {
        xi: *xi,
        sphere: kind,
        periods,
        mesh: faces.len(),
        failed_points: failed,
    })
}

/// One period; fails if any triangle did not converge.
pub fn sphere_period(xi: &XiPair, form_index: usize, kind: SphereKind, opts: &PeriodOptions) -> Result<f64> {
    if form_index > 2 {
        return Err(Error::InvalidParams("form index runs over 0..3".into()));
    }
    let r = sphere_periods(xi, kind, opts)?;
    if r.failed_points > 0 {
        return Err(Error::NonConvergedPoints(r.failed_points));
    }
    Ok(r.periods[form_index])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let (v, f) = icosphere(1);
        assert_eq!((v.len(), f.len()), (42, 80));
        for t in &f {
            let n = v3::cross(v3::sub(v[t[1]], v[t[0]]), v3::sub(v[t[2]], v[t[0]]));
            assert!(v3::dot(n, v[t[0]]) > 0.0);
        }
    }

    #[test]
    fn rotation_aligns() {
        let d = [0.3, -1.2, 0.5];
        let r = rotation_to_e1(d).unwrap();
        let x = apply(&r, d);
        assert!((x[0] - v3::norm(d)).abs() < 1e-14 && x[1].abs() < 1e-14 && x[2].abs() < 1e-14);
        let det = v3::dot(r[0], v3::cross(r[1], r[2]));
        assert!((det - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chart_data_is_holomorphic() {
        let g = make_grid(1.0, 32).unwrap();
        let b = sphere_point_data(C64::new(0.4, -0.3), C64::new(0.2, 0.9), C64::new(0.5, 0.1), &g);
        assert!(crate::nahm::mu_complex(&b).sup_norm() < 1e-12);
    }
}
