//! Explicit representatives of every complex gauge orbit of complex Nahm data.

use std::f64::consts::PI;

use super::{rot_x, ComplexNahm};
use crate::algebra::{from_sigma, Mat2, C64, I};
use crate::error::{Error, Result};
use crate::grid::{GridRef, MatFn};

/// Subcases of the families with constant diagonal-dominated `β` and `α = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Special {
    /// `β = -iξσ_z`, with a `ℂ^×` stabilizer.
    Diagonal,
    /// `β = [[-iξ, 1/L], [0, iξ]]`.
    Upper,
    /// `β = [[-iξ, c], [1/L, iξ]]`.
    Lower { c: C64 },
}

/// Orbit types of complex Nahm data, with their continuous parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    I {
        alpha0: C64,
        beta_x: C64,
    },
    II {
        c: C64,
    },
    III {
        c: C64,
    },
    IV {
        c: C64,
    },
    V {
        c: C64,
    },
    /// Requires `ξ^ℂ_0 = ξ^ℂ_L`.
    VI(Special),
    /// Requires `ξ^ℂ_0 = -ξ^ℂ_L`.
    VII(Special),
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::I { .. } => "i",
            Family::II { .. } => "ii",
            Family::III { .. } => "iii",
            Family::IV { .. } => "iv",
            Family::V { .. } => "v",
            Family::VI(_) => "vi",
            Family::VII(_) => "vii",
        }
    }
}

/// Sample the representative of `family` with complex FI parameters `(ξ^ℂ_0, ξ^ℂ_L)`.
pub fn complex_nahm_family(family: Family, xi_c0: C64, xi_cl: C64, grid: &GridRef) -> Result<ComplexNahm> {
    let l = grid.l;
    let (alpha, beta): (Box<dyn Fn(f64) -> Mat2>, Box<dyn Fn(f64) -> Mat2>) = match family {
        Family::I { alpha0, beta_x } => {
            check_family_i(alpha0, l)?;
            let csch = C64::new(1.0, 0.0) / (alpha0 * (2.0 * l)).sinh();
            (
                Box::new(move |_| Mat2::sigma_x() * alpha0),
                Box::new(move |t| {
                    let a = alpha0 * (2.0 * (l - t));
                    let b = alpha0 * (2.0 * t);
                    let by = (-xi_c0 * a.cosh() + xi_cl * b.cosh()) * csch;
                    let bz = -I * (xi_c0 * a.sinh() + xi_cl * b.sinh()) * csch;
                    from_sigma([beta_x, by, bz])
                }),
            )
        }
        Family::II { c } => (Box::new(move |_| upper(l)), Box::new(move |t| beta_ii(t, l, xi_c0, xi_cl, c))),
        Family::III { c } => (
            Box::new(move |_| lower(l)),
            Box::new(move |t| beta_iii(t, l, xi_c0, xi_cl, c)),
        ),
        Family::IV { c } => twisted(
            l,
            Box::new(move |_| upper(l)),
            Box::new(move |t| beta_ii(t, l, xi_c0, -xi_cl, c)),
        ),
        Family::V { c } => twisted(
            l,
            Box::new(move |_| lower(l)),
            Box::new(move |t| beta_iii(t, l, xi_c0, -xi_cl, c)),
        ),
        Family::VI(s) => {
            check_xi(xi_c0, xi_cl, 1.0)?;
            let b = special_beta(s, xi_c0, l);
            (Box::new(|_| Mat2::zero()), Box::new(move |_| b))
        }
        Family::VII(s) => {
            check_xi(xi_c0, xi_cl, -1.0)?;
            let b = special_beta(s, xi_c0, l);
            twisted(l, Box::new(|_| Mat2::zero()), Box::new(move |_| b))
        }
    };
    Ok(ComplexNahm::new(
        MatFn::from_fn(grid, alpha),
        MatFn::from_fn(grid, beta),
        xi_c0,
        xi_cl,
    ))
}

fn check_family_i(alpha0: C64, l: f64) -> Result<()> {
    let (a, c) = (alpha0.re, alpha0.im);
    let top = PI / (2.0 * l);
    let eps = 1e-14 * (1.0 + top);
    if c < -eps || c > top + eps {
        return Err(Error::InvalidParams(format!("Im α₀ = {c} lies outside [0, π/2L]")));
    }
    let on_edge = c.abs() <= eps || (c - top).abs() <= eps;
    if on_edge && a <= 0.0 {
        return Err(Error::InvalidParams("Re α₀ must be positive when Im α₀ ∈ {0, π/2L}".into()));
    }
    Ok(())
}

fn check_xi(xi_c0: C64, xi_cl: C64, sign: f64) -> Result<()> {
    let tol = 1e-12 * (1.0 + xi_c0.norm() + xi_cl.norm());
    if (xi_c0 - xi_cl * sign).norm() > tol {
        let rel = if sign > 0.0 {
            "ξ^ℂ_0 = ξ^ℂ_L"
        } else {
            "ξ^ℂ_0 = -ξ^ℂ_L"
        };
        return Err(Error::XiMismatch(format!("this family needs {rel}, got {xi_c0} and {xi_cl}")));
    }
    Ok(())
}

fn upper(l: f64) -> Mat2 {
    Mat2::real(0.0, 1.0 / l, 0.0, 0.0)
}

fn lower(l: f64) -> Mat2 {
    Mat2::real(0.0, 0.0, 1.0 / l, 0.0)
}

fn beta_ii(t: f64, l: f64, x0: C64, xl: C64, c: C64) -> Mat2 {
    let d = x0 * (l - t) + xl * t;
    let b12 = xl * (l + t * t / l) - x0 * ((l - t) * (l - t) / l) + c;
    let b21 = (x0 - xl) * l;
    Mat2::new(d, b12, b21, -d) * (-I / l)
}

fn beta_iii(t: f64, l: f64, x0: C64, xl: C64, c: C64) -> Mat2 {
    let d = x0 * (l - t) + xl * t;
    let b12 = -(x0 - xl) * l;
    let b21 = x0 * ((l - t) * (l - t) / l) - xl * (l + t * t / l) + c;
    Mat2::new(d, b12, b21, -d) * (-I / l)
}

fn special_beta(s: Special, xi: C64, l: f64) -> Mat2 {
    let d = -I * xi;
    match s {
        Special::Diagonal => Mat2::diag(d, -d),
        Special::Upper => Mat2::new(d, C64::new(1.0 / l, 0.0), C64::new(0.0, 0.0), -d),
        Special::Lower { c } => Mat2::new(d, c, C64::new(1.0 / l, 0.0), -d),
    }
}

type Field = Box<dyn Fn(f64) -> Mat2>;

/// Act with `g₁ = exp(πitσ_x/2L)`, using the closed form `g₁⁻¹∂g₁ = (iπ/2L)σ_x`.
fn twisted(l: f64, alpha: Field, beta: Field) -> (Field, Field) {
    let k = PI / (2.0 * l);
    let conj = move |t: f64, m: Mat2| {
        let g = rot_x(k * t);
        g.adjoint() * m * g
    };
    (
        Box::new(move |t| conj(t, alpha(t)) + Mat2::sigma_x() * (I * k)),
        Box::new(move |t| conj(t, beta(t))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::nahm::mu_complex;

    #[test]
    fn family_i_solves() {
        let g = make_grid(1.0, 96).unwrap();
        let b = complex_nahm_family(
            Family::I {
                alpha0: C64::new(0.5, 0.0),
                beta_x: C64::new(0.0, 0.0),
            },
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            &g,
        )
        .unwrap();
        assert!(mu_complex(&b).sup_norm() < 1e-10);
        assert!(b.beta.satisfies_tags(1e-12));
        assert!(b.alpha.satisfies_tags(1e-12));
    }

    #[test]
    fn vi_diagonal_is_constant() {
        let g = make_grid(1.0, 16).unwrap();
        let xi = C64::new(0.3, -0.2);
        let b = complex_nahm_family(Family::VI(Special::Diagonal), xi, xi, &g).unwrap();
        assert!((b.beta.values[5] - Mat2::sigma_z() * (-I * xi)).max_abs() < 1e-15);
        let err = complex_nahm_family(Family::VI(Special::Diagonal), xi, -xi, &g);
        assert!(matches!(err, Err(Error::XiMismatch(_))));
    }

    #[test]
    fn family_i_rejects_bad_strip() {
        let g = make_grid(1.0, 16).unwrap();
        let z = C64::new(0.0, 0.0);
        let bad = complex_nahm_family(
            Family::I {
                alpha0: C64::new(0.0, 0.0),
                beta_x: z,
            },
            z,
            z,
            &g,
        );
        assert!(matches!(bad, Err(Error::InvalidParams(_))));
        let bad = complex_nahm_family(
            Family::I {
                alpha0: C64::new(0.1, 2.0),
                beta_x: z,
            },
            z,
            z,
            &g,
        );
        assert!(matches!(bad, Err(Error::InvalidParams(_))));
    }
}
