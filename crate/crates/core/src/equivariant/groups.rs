//! Finite subgroups of SU(2), their character tables and the regular-representation data
//! built from them.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{Mat2, C64, I};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Cyclic(usize),
    BinaryDihedral(usize),
    Tetrahedral,
    Octahedral,
    Icosahedral,
}

impl GroupKind {
    pub fn label(&self) -> String {
        match self {
            GroupKind::Cyclic(n) => format!("Z{n}"),
            GroupKind::BinaryDihedral(n) => format!("BD{n}"),
            GroupKind::Tetrahedral => "2T".into(),
            GroupKind::Octahedral => "2O".into(),
            GroupKind::Icosahedral => "2I".into(),
        }
    }

    pub fn parse(s: &str) -> Result<GroupKind> {
        let bad = || Error::InvalidParams(format!("unknown group `{s}`"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match s {
            "2T" | "E6" => Ok(GroupKind::Tetrahedral),
            "2O" | "E7" => Ok(GroupKind::Octahedral),
            "2I" | "E8" => Ok(GroupKind::Icosahedral),
            _ if s.starts_with("BD") => Ok(GroupKind::BinaryDihedral(num(&s[2..])?)),
            _ if s.starts_with('Z') => Ok(GroupKind::Cyclic(num(&s[1..])?)),
            _ => Err(bad()),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            GroupKind::Cyclic(n) => *n,
            GroupKind::BinaryDihedral(n) => 4 * n,
            GroupKind::Tetrahedral => 24,
            GroupKind::Octahedral => 48,
            GroupKind::Icosahedral => 120,
        }
    }

    /// Rank of the simply-laced Lie algebra paired with the group under McKay.
    pub fn mckay_rank(&self) -> usize {
        match self {
            GroupKind::Cyclic(n) => n - 1,
            GroupKind::BinaryDihedral(n) => n + 2,
            GroupKind::Tetrahedral => 6,
            GroupKind::Octahedral => 7,
            GroupKind::Icosahedral => 8,
        }
    }

    pub fn mckay_label(&self) -> String {
        match self {
            GroupKind::Cyclic(n) => format!("A{}", n - 1),
            GroupKind::BinaryDihedral(n) => format!("D{}", n + 2),
            GroupKind::Tetrahedral => "E6".into(),
            GroupKind::Octahedral => "E7".into(),
            GroupKind::Icosahedral => "E8".into(),
        }
    }

    /// Unit quaternions `i, j, k` realised as `iσ_x, iσ_y, -iσ_z`.
    fn generators(&self) -> Result<Vec<Mat2>> {
        let q = |w: f64, x: f64, y: f64, z: f64| {
            Mat2::identity().scale_re(w)
                + (Mat2::sigma_x().scale_re(x) + Mat2::sigma_y().scale_re(y) - Mat2::sigma_z().scale_re(z)).scale(I)
        };
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let t2 = q(0.5, 0.5, 0.5, 0.5);
        Ok(match *self {
            GroupKind::Cyclic(0) | GroupKind::BinaryDihedral(0) => {
                return Err(Error::InvalidParams("group parameter must be positive".into()))
            }
            GroupKind::Cyclic(n) => {
                let t = 2.0 * std::f64::consts::PI / n as f64;
                vec![Mat2::diag(C64::from_polar(1.0, t), C64::from_polar(1.0, -t))]
            }
            GroupKind::BinaryDihedral(n) => {
                let t = std::f64::consts::PI / n as f64;
                vec![
                    Mat2::diag(C64::from_polar(1.0, t), C64::from_polar(1.0, -t)),
                    q(0.0, 0.0, 1.0, 0.0),
                ]
            }
            GroupKind::Tetrahedral => vec![q(0.0, 1.0, 0.0, 0.0), t2],
            GroupKind::Octahedral => {
                let s = 0.5f64.sqrt();
                vec![q(0.0, 1.0, 0.0, 0.0), t2, q(s, s, 0.0, 0.0)]
            }
            GroupKind::Icosahedral => vec![q(0.5 * phi, 0.5 / phi, 0.5, 0.0), t2],
        })
    }
}

/// Rounded entries used as a hash key for group elements.
type Key = [i64; 8];

fn key(m: &Mat2) -> Key {
    let r = |x: f64| (x * 1e9).round() as i64;
    let mut k = [0; 8];
    for (i, z) in m.0.iter().enumerate() {
        k[2 * i] = r(z.re);
        k[2 * i + 1] = r(z.im);
    }
    k
}

const MAX_ORDER: usize = 10_000;

fn closure(gens: &[Mat2]) -> Result<Vec<Mat2>> {
    let mut elems = vec![Mat2::identity()];
    let mut seen: HashMap<Key, usize> = HashMap::from([(key(&Mat2::identity()), 0)]);
    let mut next = 0;
    while next < elems.len() {
        let x = elems[next];
        next += 1;
        for g in gens {
            let y = x * *g;
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key(&y)) {
                e.insert(elems.len());
                elems.push(y);
                if elems.len() > MAX_ORDER {
                    return Err(Error::InvalidParams("generators do not span a finite group".into()));
                }
            }
        }
    }
    Ok(elems)
}

/// A finite subgroup of SU(2) with its multiplication table, classes and characters.
#[derive(Clone, Debug)]
pub struct FiniteSubgroup {
    pub kind: GroupKind,
    pub elements: Vec<Mat2>,
    /// `mult[a][b]` is the index of `elements[a]·elements[b]`.
    pub mult: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    /// Conjugacy classes as lists of element indices; class 0 is the identity.
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    /// `character_table[(irrep, class)]`; the trivial irrep comes first.
    pub character_table: DMatrix<C64>,
    pub irrep_dims: Vec<usize>,
}

/// Tolerance for column orthogonality and `Σ d² = |Γ|`.
pub const CHARACTER_TOL: f64 = 1e-10;

impl FiniteSubgroup {
    pub fn new(kind: GroupKind) -> Result<Self> {
        let elements = closure(&kind.generators()?)?;
        if elements.len() != kind.order() {
            return Err(Error::InvalidParams(format!(
                "{} closed to {} elements, expected {}",
                kind.label(),
                elements.len(),
                kind.order()
            )));
        }
        Self::from_elements(kind, elements)
    }

    fn from_elements(kind: GroupKind, elements: Vec<Mat2>) -> Result<Self> {
        let n = elements.len();
        let index: HashMap<Key, usize> = elements.iter().enumerate().map(|(i, m)| (key(m), i)).collect();
        let find = |m: &Mat2| {
            index
                .get(&key(m))
                .copied()
                .ok_or(Error::InvalidParams("group not closed".into()))
        };
        let mut mult = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                mult[a][b] = find(&(elements[a] * elements[b]))?;
            }
        }
        let inverse: Vec<usize> = (0..n).map(|a| mult[a].iter().position(|&c| c == 0).unwrap()).collect();

        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for a in 0..n {
            if class_of[a] != usize::MAX {
                continue;
            }
            let mut cls: Vec<usize> = (0..n).map(|h| mult[mult[h][a]][inverse[h]]).collect();
            cls.sort_unstable();
            cls.dedup();
            for &c in &cls {
                class_of[c] = classes.len();
            }
            classes.push(cls);
        }

        let (character_table, irrep_dims) = characters(n, &mult, &inverse, &classes)?;
        let g = FiniteSubgroup {
            kind,
            elements,
            mult,
            inverse,
            classes,
            class_of,
            character_table,
            irrep_dims,
        };
        g.check_orthogonality()?;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn num_irreps(&self) -> usize {
        self.irrep_dims.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }

    pub fn character(&self, irrep: usize, element: usize) -> C64 {
        self.character_table[(irrep, self.class_of[element])]
    }

    /// Largest violation of row and column orthogonality and of `Σ d² = |Γ|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.order() as f64;
        let t = &self.character_table;
        let sizes = self.class_sizes();
        let k = sizes.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let col: C64 = (0..k).map(|r| t[(r, a)] * t[(r, b)].conj()).sum();
                let want = if a == b { n / sizes[a] as f64 } else { 0.0 };
                worst = worst.max((col - want).norm());
                let row: C64 = (0..k).map(|c| t[(a, c)] * t[(b, c)].conj() * sizes[c] as f64).sum();
                worst = worst.max((row / n - if a == b { 1.0 } else { 0.0 }).norm());
            }
        }
        let sq: usize = self.irrep_dims.iter().map(|d| d * d).sum();
        worst.max((sq as f64 - n).abs())
    }

    fn check_orthogonality(&self) -> Result<()> {
        let d = self.orthogonality_defect();
        if d > CHARACTER_TOL || self.num_irreps() != self.classes.len() {
            return Err(Error::InvalidParams(format!(
                "character table of {} is inconsistent ({d:e})",
                self.kind.label()
            )));
        }
        Ok(())
    }

    /// Index of an SU(2) matrix within the group.
    pub fn index_of(&self, m: &Mat2) -> Option<usize> {
        self.elements.iter().position(|e| (*e - *m).max_abs() < 1e-8)
    }

    /// Whether every element of `sub` lies in `self`.
    pub fn contains(&self, sub: &FiniteSubgroup) -> bool {
        sub.elements.iter().all(|m| self.index_of(m).is_some())
    }

    pub fn to_json(&self) -> Value {
        let weyl = weyl_group(self, self).map(|w| w.label()).unwrap_or_default();
        json!({
            "group": self.kind.label(),
            "order": self.order(),
            "class_sizes": self.class_sizes(),
            "irrep_dims": self.irrep_dims,
            "fi_dimension": fi_dimension(self),
            "mckay": self.kind.mckay_label(),
            "weyl": weyl,
        })
    }
}

/// Character table from the isotypic projectors of the left regular representation.
///
/// A random Hermitian element of the centre of the group algebra has one eigenvalue per
/// irrep; its eigenspace is the isotypic block of dimension `d²`, and the `(g, e)` entry of
/// the block projector is `d·χ(g⁻¹)/|Γ|`.
fn characters(n: usize, mult: &[Vec<usize>], inverse: &[usize], classes: &[Vec<usize>]) -> Result<(DMatrix<C64>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut h = DMatrix::<C64>::zeros(n, n);
    for cls in classes {
        let (r, s): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let w = C64::new(r, s);
        for &g in cls {
            for x in 0..n {
                // L(g) sends basis vector x to g·x; its adjoint is L(g⁻¹).
                h[(mult[g][x], x)] += w;
                h[(mult[inverse[g]][x], x)] += w.conj();
            }
        }
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match blocks.last_mut() {
            Some(b) if (eig.eigenvalues[i] - eig.eigenvalues[b[0]]).abs() < 1e-7 * scale => b.push(i),
            _ => blocks.push(vec![i]),
        }
    }
    if blocks.len() != classes.len() {
        return Err(Error::Degenerate("character projectors do not separate the classes".into()));
    }
    let mut rows: Vec<(usize, Vec<C64>)> = Vec::new();
    for b in &blocks {
        let d = (b.len() as f64).sqrt().round() as usize;
        if d * d != b.len() {
            return Err(Error::Degenerate("character projectors do not separate the classes".into()));
        }
        let entry = |g: usize| -> C64 {
            b.iter()
                .map(|&i| eig.eigenvectors[(g, i)] * eig.eigenvectors[(0, i)].conj())
                .sum()
        };
        let chi: Vec<C64> = classes
            .iter()
            .map(|cls| (entry(cls[0]) * (n as f64 / d as f64)).conj())
            .collect();
        rows.push((d, chi));
    }
    // Trivial first, then by dimension and by the character on the first nontrivial class.
    rows.sort_by(|a, b| {
        let triv = |r: &(usize, Vec<C64>)| r.1.iter().all(|z| (z - 1.0).norm() < 1e-6);
        triv(b).cmp(&triv(a)).then(a.0.cmp(&b.0)).then_with(|| {
            let key = |r: &(usize, Vec<C64>)| r.1.iter().skip(1).map(|z| (z.re, z.im)).collect::<Vec<_>>();
            key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let k = classes.len();
    let table = DMatrix::from_fn(k, k, |r, c| rows[r].1[c]);
    Ok((table, rows.iter().map(|r| r.0).collect()))
}

/// Subgroup of `g` generated by some of its elements (by index).
pub fn generated_subgroup(g: &FiniteSubgroup, gens: &[usize], kind: GroupKind) -> Result<FiniteSubgroup> {
    let elems = closure(&gens.iter().map(|&i| g.elements[i]).collect::<Vec<_>>())?;
    FiniteSubgroup::from_elements(kind, elems)
}

/// Dimension of the space of FI parameters: irreps of Γ minus the trace direction.
pub fn fi_dimension(g: &FiniteSubgroup) -> usize {
    g.num_irreps() - 1
}

/// Multiplicity of each irrep of `sub` in the restriction of the regular representation of `g`.
pub fn restricted_regular_multiplicities(sub: &FiniteSubgroup, g: &FiniteSubgroup) -> Result<Vec<usize>> {
    if !g.contains(sub) {
        return Err(Error::InvalidParams(format!(
            "{} is not a subgroup of {}",
            sub.kind.label(),
            g.kind.label()
        )));
    }
    // χ_reg vanishes off the identity and equals |Γ| there.
    (0..sub.num_irreps())
        .map(|r| {
            let m = g.order() as f64 * sub.character(r, 0).conj().re / sub.order() as f64;
            let rounded = m.round();
            if (m - rounded).abs() > 1e-8 {
                Err(Error::InvalidParams("non-integral multiplicity".into()))
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

/// A product of symmetric groups, stored as its block sizes in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylGroup {
    pub blocks: Vec<usize>,
    /// `(multiplicity, number of irreps with that multiplicity)`, ascending in multiplicity.
    pub by_multiplicity: Vec<(usize, usize)>,
}

impl WeylGroup {
    /// `S3xS3` style label with trivial factors dropped; `S1` for the trivial group.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.blocks.iter().filter(|&&b| b > 1).map(|b| format!("S{b}")).collect();
        if parts.is_empty() {
            "S1".into()
        } else {
            parts.join("x")
        }
    }

    pub fn order(&self) -> u128 {
        self.blocks.iter().map(|&b| (1..=b as u128).product::<u128>()).product()
    }
}

/// Weyl group of the centraliser of `sub` acting on the restricted regular representation of `g`.
pub fn weyl_group(sub: &FiniteSubgroup, g: &FiniteSubgroup) -> Result<WeylGroup> {
    let mult = restricted_regular_multiplicities(sub, g)?;
    let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
    for m in mult {
        *counts.entry(m).or_default() += 1;
    }
    let by_multiplicity: Vec<(usize, usize)> = counts.into_iter().collect();
    let mut blocks: Vec<usize> = by_multiplicity.iter().map(|&(_, c)| c).collect();
    blocks.sort_unstable_by(|a, b| b.cmp(a));
    Ok(WeylGroup { blocks, by_multiplicity })
}

/// Every irrep of `sub` occurs in the restriction of the regular representation of `g`.
pub fn frobenius_check(sub: &FiniteSubgroup, g: &FiniteSubgroup) -> Result<bool> {
    Ok(restricted_regular_multiplicities(sub, g)?.iter().all(|&m| m > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_and_irreps() {
        for (kind, irreps) in [
            (GroupKind::Cyclic(5), 5),
            (GroupKind::BinaryDihedral(3), 6),
            (GroupKind::Tetrahedral, 7),
            (GroupKind::Octahedral, 8),
            (GroupKind::Icosahedral, 9),
        ] {
            let g = FiniteSubgroup::new(kind).unwrap();
            assert_eq!(g.order(), kind.order());
            assert_eq!(g.num_irreps(), irreps, "{}", kind.label());
            assert!(g.orthogonality_defect() < CHARACTER_TOL);
        }
    }

    #[test]
    fn tetrahedral_dims() {
        let g = FiniteSubgroup::new(GroupKind::Tetrahedral).unwrap();
        let mut d = g.irrep_dims.clone();
        d.sort_unstable();
        assert_eq!(d, vec![1, 1, 1, 2, 2, 2, 3]);
        assert_eq!(weyl_group(&g, &g).unwrap().label(), "S3xS3");
    }

    #[test]
    fn z2_in_tetrahedral() {
        let g = FiniteSubgroup::new(GroupKind::Tetrahedral).unwrap();
        let z2 = FiniteSubgroup::new(GroupKind::Cyclic(2)).unwrap();
        assert_eq!(restricted_regular_multiplicities(&z2, &g).unwrap(), vec![12, 12]);
        assert_eq!(weyl_group(&z2, &z2).unwrap().label(), "S2");
        let triv = FiniteSubgroup::new(GroupKind::Cyclic(1)).unwrap();
        assert_eq!(weyl_group(&triv, &g).unwrap().label(), "S1");
    }

    #[test]
    fn parse_labels() {
        assert_eq!(GroupKind::parse("BD4").unwrap(), GroupKind::BinaryDihedral(4));
        assert_eq!(GroupKind::parse("Z7").unwrap(), GroupKind::Cyclic(7));
        assert!(GroupKind::parse("Q").is_err());
    }
}
