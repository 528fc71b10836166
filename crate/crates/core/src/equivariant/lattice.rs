//! Fixed points of a finite-order lattice automorphism on a torus and its dual, and the
//! pairing `⟨μ, p⟩_γ = μ((1 - γ)p)` between them.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::algebra::C64;
use crate::error::{Error, Result};

pub type IntMatrix = Vec<Vec<i64>>;

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn to_real(a: &IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j] as f64)
}

/// Smith normal form `U·A·V = D` with `U`, `V` unimodular and `d₁ | d₂ | ...`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub diag: Vec<i64>,
}

pub fn smith_normal_form(a: &IntMatrix) -> Smith {
    let n = a.len();
    let m = a[0].len();
    let mut d = a.clone();
    let mut u = identity(n);
    let mut v = identity(m);
    let swap_rows = |x: &mut IntMatrix, i: usize, j: usize| x.swap(i, j);
    let swap_cols = |x: &mut IntMatrix, i: usize, j: usize| x.iter_mut().for_each(|r| r.swap(i, j));
    // row_i += k·row_j and col_i += k·col_j
    let add_row = |x: &mut IntMatrix, i: usize, j: usize, k: i64| {
        for c in 0..x[0].len() {
            x[i][c] += k * x[j][c];
        }
    };
    let add_col = |x: &mut IntMatrix, i: usize, j: usize, k: i64| {
        for r in x.iter_mut() {
            r[i] += k * r[j];
        }
    };
    for t in 0..n.min(m) {
        loop {
            let pivot = (t..n)
                .flat_map(|i| (t..m).map(move |j| (i, j)))
                .filter(|&(i, j)| d[i][j] != 0)
                .min_by_key(|&(i, j)| d[i][j].abs());
            let Some((pi, pj)) = pivot else { break };
            swap_rows(&mut d, t, pi);
            swap_rows(&mut u, t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);
            let p = d[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = d[i][t] / p;
                add_row(&mut d, i, t, -q);
                add_row(&mut u, i, t, -q);
                clean &= d[i][t] == 0;
            }
            for j in t + 1..m {
                let q = d[t][j] / p;
                add_col(&mut d, j, t, -q);
                add_col(&mut v, j, t, -q);
                clean &= d[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Enforce divisibility against the remaining block.
            let bad = (t + 1..n).find(|&i| (t + 1..m).any(|j| d[i][j] % p != 0));
            match bad {
                Some(i) => {
                    add_row(&mut d, t, i, 1);
                    add_row(&mut u, t, i, 1);
                }
                None => break,
            }
        }
    }
    for t in 0..n.min(m) {
        if d[t][t] < 0 {
            for c in 0..m {
                d[t][c] = -d[t][c];
            }
            for c in 0..n {
                u[t][c] = -u[t][c];
            }
        }
    }
    let diag = (0..n.min(m)).map(|t| d[t][t]).collect();
    Smith { u, v, diag }
}

/// Representatives of `A⁻¹ℤʳ / ℤʳ`, the kernel of `A` on `ℝʳ/ℤʳ`.
pub fn torsion_points(a: &IntMatrix) -> Vec<DVector<f64>> {
    let s = smith_normal_form(a);
    let r = a.len();
    let v = to_real(&s.v);
    let mut out = Vec::new();
    let total: i64 = s.diag.iter().product();
    for idx in 0..total {
        let mut rem = idx;
        let mut n = DVector::zeros(r);
        for (k, &dk) in s.diag.iter().enumerate() {
            n[k] = (rem % dk) as f64 / dk as f64;
            rem /= dk;
        }
        // A x ∈ ℤʳ with A = U⁻¹DV⁻¹ gives x = V D⁻¹ n.
        let x = (&v * n).map(|c| c - c.floor());
        out.push(x);
    }
    out
}

#[derive(Clone, Debug)]
pub struct PairingReport {
    pub torus_order: usize,
    pub dual_order: usize,
    pub smith_diag: Vec<i64>,
    pub rank: usize,
    pub perfect: bool,
    /// `max |P P† / |G| - I|` for the pairing matrix `P`.
    pub unitarity_defect: f64,
}

impl PairingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "torus_order": self.torus_order,
            "dual_order": self.dual_order,
            "smith_diag": self.smith_diag,
            "rank": self.rank,
            "perfect": self.perfect,
            "unitarity_defect": self.unitarity_defect,
        })
    }
}

/// Express `gamma` (ambient coordinates) in the basis given by the columns of `lambda`.
fn lattice_coords(gamma: &DMatrix<f64>, lambda: &IntMatrix) -> Result<IntMatrix> {
    let l = to_real(lambda);
    let r = l.nrows();
    if gamma.shape() != (r, r) || l.ncols() != r {
        return Err(Error::InvalidSize(
            "gamma and lattice basis must be square of equal size".into(),
        ));
    }
    let linv = l.clone().try_inverse().ok_or(Error::Singular)?;
    let m = &linv * gamma * &l;
    let mut out = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in 0..r {
            let x = m[(i, j)].round();
            if (m[(i, j)] - x).abs() > 1e-9 {
                return Err(Error::InvalidParams("gamma does not preserve the lattice".into()));
            }
            out[i][j] = x as i64;
        }
    }
    let mut p = out.clone();
    for _ in 1..=24 {
        if p == identity(r) {
            return Ok(out);
        }
        p = int_mul(&p, &out);
    }
    Err(Error::InvalidParams("gamma is not of finite order".into()))
}

fn int_det(a: &IntMatrix) -> i64 {
    to_real(a).determinant().round() as i64
}

/// Perfectness of the pairing between `(T_Λ)^γ` and `(T_Λ^∨)^γ`.
///
/// In lattice coordinates γ is an integer matrix `M`; it acts on the dual by `M^{-T}`.
pub fn dft_pairing_rank(gamma: &DMatrix<f64>, lambda: &IntMatrix) -> Result<PairingReport> {
    let m = lattice_coords(gamma, lambda)?;
    let r = m.len();
    let sub = |x: &IntMatrix| -> IntMatrix {
        (0..r)
            .map(|i| (0..r).map(|j| i64::from(i == j) - x[i][j]).collect())
            .collect()
    };
    let one_minus = sub(&m);
    if int_det(&one_minus) == 0 {
        return Err(Error::NonIsolatedAction);
    }
    let minv = to_real(&m).try_inverse().ok_or(Error::Singular)?;
    let dual: IntMatrix = (0..r)
        .map(|i| (0..r).map(|j| minv[(j, i)].round() as i64).collect())
        .collect();
    let one_minus_dual = sub(&dual);

    let fixed = torsion_points(&one_minus);
    let fixed_dual = torsion_points(&one_minus_dual);
    let od = to_real(&one_minus_dual);
    let (nt, nd) = (fixed.len(), fixed_dual.len());
    let p = DMatrix::from_fn(nt, nd, |a, b| {
        let l = &od * &fixed_dual[b];
        C64::from_polar(1.0, 2.0 * std::f64::consts::PI * l.dot(&fixed[a]))
    });
    let gram = &p * p.adjoint() / C64::new(nd as f64, 0.0);
    let unitarity_defect = (gram - DMatrix::<C64>::identity(nt, nt)).camax();
    let sv = p.singular_values();
    let cut = 1e-9 * sv.max().max(1.0);
    let rank = sv.iter().filter(|&&s| s > cut).count();
    Ok(PairingReport {
        torus_order: nt,
        dual_order: nd,
        smith_diag: smith_normal_form(&one_minus).diag,
        rank,
        perfect: nt == nd && rank == nt,
        unitarity_defect,
    })
}
