//! Determinant-like invariants over the tagged semirings.

use crate::error::{Result, TropError};
use crate::semiring::{Ext, SemiringTag, TropScalar};
use crate::tropmat::{mat_mul, TropMatrix};
use serde::Serialize;

pub const MAX_PERM_DIM: usize = 8;
pub const MAX_ROOK_DIM: usize = 7;
/// Largest n for the subset-balancing singularity test (2^(n!) subsets).
pub const MAX_SUBSET_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bideterminant {
    pub plus: TropScalar,
    pub minus: TropScalar,
}

/// All permutations of `0..n` with their parity (`true` = even).
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(k: usize, cur: &mut Vec<usize>, even: bool, out: &mut Vec<(Vec<usize>, bool)>) {
        if k == cur.len() {
            out.push((cur.clone(), even));
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, if i == k { even } else { !even }, out);
            cur.swap(k, i);
        }
    }
    let mut out = Vec::new();
    rec(0, &mut (0..n).collect(), true, &mut out);
    out
}

fn square(a: &TropMatrix, cap: usize) -> Result<usize> {
    if !a.is_square() {
        return Err(TropError::DimensionMismatch(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    if a.rows() > cap {
        return Err(TropError::TooLarge(format!("n = {} exceeds {cap}", a.rows())));
    }
    Ok(a.rows())
}

fn perm_product(a: &TropMatrix, sigma: &[usize]) -> Ext {
    let tag = a.tag();
    let mut acc = tag.one();
    for (i, &j) in sigma.iter().enumerate() {
        acc = tag.mul(&acc, a.at(i, j));
    }
    acc
}

fn scalar(tag: SemiringTag, v: Ext) -> TropScalar {
    TropScalar::from_ext(tag, v).expect("semiring operations keep values valid")
}

pub fn bideterminant(a: &TropMatrix) -> Result<Bideterminant> {
    let n = square(a, MAX_PERM_DIM)?;
    let tag = a.tag();
    let (mut plus, mut minus) = (None, None);
    for (sigma, even) in permutations(n) {
        let v = perm_product(a, &sigma);
        if even {
            plus = tag.add(&plus, &v);
        } else {
            minus = tag.add(&minus, &v);
        }
    }
    Ok(Bideterminant { plus: scalar(tag, plus), minus: scalar(tag, minus) })
}

pub fn permanent(a: &TropMatrix) -> Result<TropScalar> {
    let n = square(a, MAX_PERM_DIM)?;
    let tag = a.tag();
    let mut acc = None;
    for (sigma, _) in permutations(n) {
        acc = tag.add(&acc, &perm_product(a, &sigma));
    }
    Ok(scalar(tag, acc))
}

/// `p_0 = 𝟙`, `p_j` = ⊕ of the permanents of all j×j submatrices.
pub fn rook_coefficients(a: &TropMatrix) -> Result<Vec<TropScalar>> {
    let (m, n) = (a.rows(), a.cols());
    if m > MAX_ROOK_DIM || n > MAX_ROOK_DIM {
        return Err(TropError::TooLarge(format!("{m}x{n} exceeds {MAX_ROOK_DIM}x{MAX_ROOK_DIM}")));
    }
    let tag = a.tag();
    // dp[mask]: ⊕ of partial placements using exactly the columns in mask
    let mut dp: Vec<Ext> = vec![None; 1 << n];
    dp[0] = tag.one();
    for i in 0..m {
        let mut next = dp.clone();
        for mask in 0..1usize << n {
            if dp[mask].is_none() {
                continue;
            }
            for j in 0..n {
                if mask >> j & 1 == 0 {
                    let t = tag.mul(&dp[mask], a.at(i, j));
                    next[mask | 1 << j] = tag.add(&next[mask | 1 << j], &t);
                }
            }
        }
        dp = next;
    }
    let mut p = vec![None; m.min(n) + 1];
    for (mask, v) in dp.iter().enumerate() {
        let k = mask.count_ones() as usize;
        if k < p.len() {
            p[k] = tag.add(&p[k], v);
        }
    }
    Ok(p.into_iter().map(|v| scalar(tag, v)).collect())
}

/// The ⊕-optimal permutation value is attained at least twice.
pub fn is_trop_singular(a: &TropMatrix) -> Result<bool> {
    let n = square(a, MAX_PERM_DIM)?;
    let tag = a.tag();
    let values: Vec<Ext> = permutations(n).iter().map(|(s, _)| perm_product(a, s)).collect();
    let best = values.iter().fold(None, |acc, v| tag.add(&acc, v));
    Ok(values.iter().filter(|v| **v == best).count() >= 2)
}

/// Some nonempty proper subset T of permutations balances `⊕_T = ⊕_{S_n \ T}`.
pub fn is_trop_singular_by_subsets(a: &TropMatrix) -> Result<bool> {
    let n = square(a, MAX_SUBSET_DIM)?;
    let tag = a.tag();
    let values: Vec<Ext> = permutations(n).iter().map(|(s, _)| perm_product(a, s)).collect();
    let k = values.len();
    if k < 2 {
        return Ok(false);
    }
    for t in 1..(1u64 << k) - 1 {
        let (mut inside, mut outside) = (None, None);
        for (i, v) in values.iter().enumerate() {
            if t >> i & 1 == 1 {
                inside = tag.add(&inside, v);
            } else {
                outside = tag.add(&outside, v);
            }
        }
        if inside == outside {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSingularity {
    Right,
    Left,
    /// Both an all-𝟘 column and an all-𝟘 row.
    Both,
    None,
}

/// Singularity read off the 𝟘-pattern alone.
pub fn is_pattern_singular(a: &TropMatrix) -> PatternSingularity {
    let zero_col = (0..a.cols()).any(|j| (0..a.rows()).all(|i| a.at(i, j).is_none()));
    let zero_row = (0..a.rows()).any(|i| (0..a.cols()).all(|j| a.at(i, j).is_none()));
    match (zero_col, zero_row) {
        (true, true) => PatternSingularity::Both,
        (true, false) => PatternSingularity::Right,
        (false, true) => PatternSingularity::Left,
        (false, false) => PatternSingularity::None,
    }
}

/// `X ↦ P ⊗ D ⊗ X' ⊗ E ⊗ Q` with `X' = X` or `Xᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardTransform {
    /// Row `i` of `P` has 𝟙 in column `p[i]`.
    pub p: Vec<usize>,
    pub d: Vec<Ext>,
    pub e: Vec<Ext>,
    pub q: Vec<usize>,
    pub transpose: bool,
}

impl StandardTransform {
    pub fn identity(m: usize, n: usize, tag: SemiringTag) -> Self {
        StandardTransform {
            p: (0..m).collect(),
            d: vec![tag.one(); m],
            e: vec![tag.one(); n],
            q: (0..n).collect(),
            transpose: false,
        }
    }

    pub fn perm_matrix(tag: SemiringTag, p: &[usize]) -> Result<TropMatrix> {
        let n = p.len();
        let mut seen = vec![false; n];
        for &j in p {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(TropError::InvalidValue(format!("{p:?} is not a permutation")));
            }
        }
        let mut m = TropMatrix::zeros(tag, n, n);
        for (i, &j) in p.iter().enumerate() {
            m.set(i, j, tag.one())?;
        }
        Ok(m)
    }

    pub fn diag_matrix(tag: SemiringTag, d: &[Ext]) -> Result<TropMatrix> {
        let n = d.len();
        let mut m = TropMatrix::zeros(tag, n, n);
        for (i, v) in d.iter().enumerate() {
            if v.is_none() {
                return Err(TropError::InvalidValue("diagonal transform entries must be invertible".into()));
            }
            m.set(i, i, v.clone())?;
        }
        Ok(m)
    }
}

pub fn apply_standard_transform(a: &TropMatrix, t: &StandardTransform) -> Result<TropMatrix> {
    let tag = a.tag();
    let x = if t.transpose { a.transpose() } else { a.clone() };
    if t.p.len() != x.rows() || t.d.len() != x.rows() || t.e.len() != x.cols() || t.q.len() != x.cols() {
        return Err(TropError::DimensionMismatch(format!(
            "transform sizes ({}, {}, {}, {}) for a {}x{} argument",
            t.p.len(),
            t.d.len(),
            t.e.len(),
            t.q.len(),
            x.rows(),
            x.cols()
        )));
    }
    let p = StandardTransform::perm_matrix(tag, &t.p)?;
    let d = StandardTransform::diag_matrix(tag, &t.d)?;
    let e = StandardTransform::diag_matrix(tag, &t.e)?;
    let q = StandardTransform::perm_matrix(tag, &t.q)?;
    mat_mul(&mat_mul(&mat_mul(&mat_mul(&p, &d)?, &x)?, &e)?, &q)
}
