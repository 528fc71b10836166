//! Chebyshev discretization of `[0, L]` and matrix-valued fields on it.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::algebra::{Mat2, C64, STRUCT_TOL};
use crate::error::{Error, Result};

/// Chebyshev–Gauss–Lobatto grid on `[0, L]` with spectral differentiation and
/// Clenshaw–Curtis quadrature. Nodes are increasing: `nodes[0] = 0`, `nodes[N-1] = L`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub l: f64,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub diff: DMatrix<f64>,
    pub weights: Vec<f64>,
    bary: Vec<f64>,
}

pub type GridRef = Arc<Grid>;

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<GridRef> {
        make_grid(l, n)
    }

    /// Apply the differentiation matrix to real samples.
    pub fn diff_real(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.diff[(i, j)] * f[j]).sum())
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_c(&self, f: &[C64]) -> C64 {
        self.weights.iter().zip(f).map(|(w, v)| v * *w).sum()
    }

    /// Barycentric interpolation of real samples at an arbitrary point.
    pub fn interpolate(&self, f: &[f64], t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.n {
            let d = t - self.nodes[j];
            if d.abs() < 1e-15 {
                return f[j];
            }
            let c = self.bary[j] / d;
            num += c * f[j];
            den += c;
        }
        num / den
    }

    /// Barycentric interpolation of matrix samples.
    pub fn interpolate_mat(&self, f: &[Mat2], t: f64) -> Mat2 {
        let mut num = Mat2::zero();
        let mut den = 0.0;
        for j in 0..self.n {
            let d = t - self.nodes[j];
            if d.abs() < 1e-15 {
                return f[j];
            }
            let c = self.bary[j] / d;
            num += f[j] * c;
            den += c;
        }
        num * (1.0 / den)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && (self.l - other.l).abs() < 1e-14
    }
}

/// Build the CGL grid of `n` nodes on `[0, l]`.
pub fn make_grid(l: f64, n: usize) -> Result<GridRef> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidSize(format!("length must be positive, got {l}")));
    }
    if n < 8 {
        return Err(Error::InvalidSize(format!("need at least 8 nodes, got {n}")));
    }
    let m = n - 1;
    let mf = m as f64;
    let theta: Vec<f64> = (0..n).map(|j| PI * j as f64 / mf).collect();
    let x: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let nodes: Vec<f64> = x.iter().map(|xi| 0.5 * l * (1.0 - xi)).collect();

    let c = |i: usize| if i == 0 || i == m { 2.0 } else { 1.0 };
    let mut dx = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                // x_i - x_j via the product formula to avoid cancellation.
                let diff = -2.0 * (0.5 * (theta[i] + theta[j])).sin() * (0.5 * (theta[i] - theta[j])).sin();
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                dx[(i, j)] = c(i) / c(j) * sign / diff;
            }
        }
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| dx[(i, j)]).sum();
        dx[(i, i)] = -s;
    }
    let diff = dx * (-2.0 / l);

    // Clenshaw–Curtis weights on [-1, 1].
    let mut w = vec![0.0; n];
    let mut v = vec![1.0; n];
    if m % 2 == 0 {
        let end = 1.0 / (mf * mf - 1.0);
        w[0] = end;
        w[m] = end;
        for k in 1..m / 2 {
            let kf = k as f64;
            for j in 1..m {
                v[j] -= 2.0 * (2.0 * kf * theta[j]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for j in 1..m {
            v[j] -= (mf * theta[j]).cos() / (mf * mf - 1.0);
        }
    } else {
        let end = 1.0 / (mf * mf);
        w[0] = end;
        w[m] = end;
        for k in 1..=(m - 1) / 2 {
            let kf = k as f64;
            for j in 1..m {
                v[j] -= 2.0 * (2.0 * kf * theta[j]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for j in 1..m {
        w[j] = 2.0 * v[j] / mf;
    }
    let weights: Vec<f64> = w.iter().map(|wj| wj * 0.5 * l).collect();

    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m {
                0.5 * s
            } else {
                s
            }
        })
        .collect();

    Ok(Arc::new(Grid {
        l,
        n,
        nodes,
        diff,
        weights,
        bary,
    }))
}

/// A single endpoint constraint on a value or a derivative.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Constraint {
    #[default]
    Free,
    Diagonal,
    OffDiagonal,
    /// Off-diagonal part free, diagonal part fixed to the diagonal of the given matrix.
    OffDiagonalPlus(Mat2),
}

impl Constraint {
    /// Linear conditions on the four entries: `(entry index, target value)`.
    fn conditions(&self) -> Vec<(usize, C64)> {
        let z = C64::new(0.0, 0.0);
        match self {
            Constraint::Free => vec![],
            Constraint::Diagonal => vec![(1, z), (2, z)],
            Constraint::OffDiagonal => vec![(0, z), (3, z)],
            Constraint::OffDiagonalPlus(v) => vec![(0, v.0[0]), (3, v.0[3])],
        }
    }

    pub fn holds(&self, m: &Mat2, tol: f64) -> bool {
        self.conditions().iter().all(|(e, t)| (m.0[*e] - t).norm() <= tol)
    }
}

/// Endpoint tag: constraints on the value and on the derivative.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BcTag {
    pub value: Constraint,
    pub deriv: Constraint,
}

impl BcTag {
    pub const FREE: BcTag = BcTag {
        value: Constraint::Free,
        deriv: Constraint::Free,
    };

    pub fn value(c: Constraint) -> Self {
        BcTag {
            value: c,
            deriv: Constraint::Free,
        }
    }

    /// Gauge-parameter tag: value diagonal, derivative off-diagonal.
    pub fn gauge() -> Self {
        BcTag {
            value: Constraint::Diagonal,
            deriv: Constraint::OffDiagonal,
        }
    }
}

/// Matrix-valued function sampled on a grid, with endpoint tags.
#[derive(Clone, Debug)]
pub struct MatFn {
    pub grid: GridRef,
    pub values: Vec<Mat2>,
    pub bc0: BcTag,
    pub bc_l: BcTag,
}

impl MatFn {
    pub fn new(grid: &GridRef, values: Vec<Mat2>) -> Self {
        assert_eq!(values.len(), grid.n, "sample count must match grid");
        MatFn {
            grid: grid.clone(),
            values,
            bc0: BcTag::FREE,
            bc_l: BcTag::FREE,
        }
    }

    pub fn zeros(grid: &GridRef) -> Self {
        Self::new(grid, vec![Mat2::zero(); grid.n])
    }

    pub fn constant(grid: &GridRef, m: Mat2) -> Self {
        Self::new(grid, vec![m; grid.n])
    }

    pub fn from_fn<F: Fn(f64) -> Mat2>(grid: &GridRef, f: F) -> Self {
        Self::new(grid, grid.nodes.iter().map(|&t| f(t)).collect())
    }

    pub fn with_tags(mut self, bc0: BcTag, bc_l: BcTag) -> Self {
        self.bc0 = bc0;
        self.bc_l = bc_l;
        self
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn map<F: Fn(&Mat2) -> Mat2>(&self, f: F) -> MatFn {
        MatFn {
            values: self.values.iter().map(f).collect(),
            ..self.clone()
        }
    }

    pub fn zip<F: Fn(&Mat2, &Mat2) -> Mat2>(&self, other: &MatFn, f: F) -> MatFn {
        assert!(self.grid.same_as(&other.grid), "grid mismatch");
        MatFn {
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &MatFn) -> MatFn {
        self.zip(other, |a, b| *a + *b)
    }

    pub fn sub(&self, other: &MatFn) -> MatFn {
        self.zip(other, |a, b| *a - *b)
    }

    pub fn mul(&self, other: &MatFn) -> MatFn {
        self.zip(other, |a, b| *a * *b)
    }

    pub fn commutator(&self, other: &MatFn) -> MatFn {
        self.zip(other, |a, b| a.commutator(b))
    }

    pub fn scale(&self, s: C64) -> MatFn {
        self.map(|a| *a * s)
    }

    pub fn scale_re(&self, s: f64) -> MatFn {
        self.map(|a| *a * s)
    }

    pub fn adjoint(&self) -> MatFn {
        self.map(|a| a.adjoint())
    }

    /// Spectral derivative of every entry.
    pub fn derivative(&self) -> MatFn {
        let g = &self.grid;
        let n = g.n;
        let mut out = vec![Mat2::zero(); n];
        for i in 0..n {
            let mut acc = Mat2::zero();
            for j in 0..n {
                acc += self.values[j] * g.diff[(i, j)];
            }
            out[i] = acc;
        }
        MatFn {
            values: out,
            bc0: BcTag::FREE,
            bc_l: BcTag::FREE,
            grid: g.clone(),
        }
    }

    /// `∫ Tr(self · other) dt` by quadrature.
    pub fn integrate_trace_product(&self, other: &MatFn) -> C64 {
        let v: Vec<C64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a * *b).trace())
            .collect();
        self.grid.integrate_c(&v)
    }

    /// `sqrt(∫ Σ |entries|² dt)`.
    pub fn l2_norm(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|a| a.norm().powi(2)).collect();
        self.grid.integrate(&v).max(0.0).sqrt()
    }

    /// Maximum entry modulus over all nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|a| a.max_abs()).fold(0.0, f64::max)
    }

    pub fn first(&self) -> Mat2 {
        self.values[0]
    }

    pub fn last(&self) -> Mat2 {
        self.values[self.values.len() - 1]
    }

    /// Check that samples satisfy their tags; returns the largest defect.
    pub fn tag_defect(&self) -> f64 {
        let d = self.derivative();
        let n = self.n() - 1;
        let mut worst: f64 = 0.0;
        let checks = [
            (&self.bc0.value, self.values[0]),
            (&self.bc0.deriv, d.values[0]),
            (&self.bc_l.value, self.values[n]),
            (&self.bc_l.deriv, d.values[n]),
        ];
        for (c, m) in checks {
            for (e, t) in c.conditions() {
                worst = worst.max((m.0[e] - t).norm());
            }
        }
        worst
    }

    pub fn satisfies_tags(&self, tol: f64) -> bool {
        self.tag_defect() <= tol
    }

    pub fn to_json(&self) -> Value {
        let vals: Vec<Value> = self
            .values
            .iter()
            .map(|m| Value::Array(m.0.iter().map(|z| json!([z.re, z.im])).collect()))
            .collect();
        json!({"L": self.grid.l, "N": self.grid.n, "values": vals})
    }

    /// Parse the JSON layout produced by [`MatFn::to_json`]; the grid is rebuilt from `L` and `N`.
    pub fn from_json(v: &Value) -> Result<MatFn> {
        let bad = |s: &str| Error::InvalidParams(format!("MatFn JSON: {s}"));
        let l = v.get("L").and_then(Value::as_f64).ok_or_else(|| bad("missing L"))?;
        let n = v.get("N").and_then(Value::as_u64).ok_or_else(|| bad("missing N"))? as usize;
        let grid = make_grid(l, n)?;
        let rows = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing values"))?;
        if rows.len() != n {
            return Err(bad("wrong number of samples"));
        }
        let mut values = Vec::with_capacity(n);
        for r in rows {
            let ent = r
                .as_array()
                .filter(|e| e.len() == 4)
                .ok_or_else(|| bad("each sample needs 4 entries"))?;
            let mut m = Mat2::zero();
            for (k, z) in ent.iter().enumerate() {
                let p = z
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| bad("entries are [re, im]"))?;
                let re = p[0].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
                let im = p[1].as_f64().ok_or_else(|| bad("non-numeric entry"))?;
                m.0[k] = C64::new(re, im);
            }
            values.push(m);
        }
        Ok(MatFn::new(&grid, values))
    }
}

/// `-(1/2ℓ) Σ_μ ∫ Tr(a^μ b^μ) dt`, the real pairing on quadruples.
pub fn l2_inner(a: &[MatFn], b: &[MatFn], l_norm: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch);
    }
    let mut s = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        if !x.grid.same_as(&y.grid) {
            return Err(Error::GridMismatch);
        }
        s += x.integrate_trace_product(y);
    }
    Ok(-(s.re) / (2.0 * l_norm))
}

/// Minimally correct endpoint samples so the tags hold.
///
/// Each entry carries at most one condition from the value tag and one from the
/// derivative tag at each end; the correction is the minimum-norm change of the
/// endpoint sample and, when both a value and a derivative condition bind the
/// same entry, the adjacent sample.
pub fn project_bc(f: &MatFn) -> MatFn {
    let mut out = f.clone();
    let n = f.n();
    let g = &f.grid;
    for end in 0..2 {
        let (tag, i0, i1) = if end == 0 { (f.bc0, 0, 1) } else { (f.bc_l, n - 1, n - 2) };
        for e in 0..4 {
            let vc: Vec<C64> = tag
                .value
                .conditions()
                .iter()
                .filter(|(k, _)| *k == e)
                .map(|(_, t)| *t)
                .collect();
            let dc: Vec<C64> = tag
                .deriv
                .conditions()
                .iter()
                .filter(|(k, _)| *k == e)
                .map(|(_, t)| *t)
                .collect();
            if vc.is_empty() && dc.is_empty() {
                continue;
            }
            let samples: Vec<C64> = out.values.iter().map(|m| m.0[e]).collect();
            let dval: C64 = (0..n).map(|j| samples[j] * g.diff[(i0, j)]).sum();
            match (vc.first(), dc.first()) {
                (Some(v), None) => out.values[i0].0[e] = *v,
                (None, Some(d)) => {
                    let delta = (*d - dval) / g.diff[(i0, i0)];
                    out.values[i0].0[e] += delta;
                }
                (Some(v), Some(d)) => {
                    // Fix value at i0, then use i1 to restore the derivative.
                    let dv = *v - samples[i0];
                    let dval2 = dval + dv * g.diff[(i0, i0)];
                    let delta = (*d - dval2) / g.diff[(i0, i1)];
                    out.values[i0].0[e] = *v;
                    out.values[i1].0[e] += delta;
                }
                (None, None) => {}
            }
        }
    }
    out
}

/// Structural tolerance scaled to the size of a field.
pub fn scaled_tol(f: &MatFn) -> f64 {
    STRUCT_TOL * (1.0 + f.sup_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let g = make_grid(1.0, 8).unwrap();
        assert_eq!(g.nodes[0], 0.0);
        assert!((g.nodes[7] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosh_integral() {
        let g = make_grid(1.0, 32).unwrap();
        let f: Vec<f64> = g.nodes.iter().map(|t| (2.0 * 0.5 * t).cosh()).collect();
        assert!((g.integrate(&f) - 1f64.sinh()).abs() < 1e-12);
    }

    #[test]
    fn sine_derivative() {
        let l = 1.3;
        let g = make_grid(l, 48).unwrap();
        let f: Vec<f64> = g.nodes.iter().map(|t| (PI * t / l).sin()).collect();
        let d = g.diff_real(&f);
        assert!((d[0] - PI / l).abs() < 1e-10);
    }

    #[test]
    fn project_offdiagonal_tag() {
        let g = make_grid(1.0, 16).unwrap();
        let m = Mat2::real(2.0, 0.0, 0.0, -2.0);
        let f = MatFn::constant(&g, m).with_tags(BcTag::value(Constraint::OffDiagonal), BcTag::value(Constraint::OffDiagonal));
        let p = project_bc(&f);
        assert_eq!(p.values[0], Mat2::zero());
        assert_eq!(p.values[15], Mat2::zero());
        assert_eq!(p.values[7], m);
    }
}
