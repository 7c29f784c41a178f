//! Dense matrices and vectors over a tagged semiring.

use crate::error::{Result, TropError};
use crate::semiring::{ext_max, ext_neg, ext_plus, residual_ext, Ext, Interval, Rat, SemiringTag, TropScalar};
use crate::spectral;
use num_traits::Signed;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TropVector {
    tag: SemiringTag,
    data: Vec<Ext>,
}

impl TropVector {
    pub fn new(tag: SemiringTag, data: Vec<Ext>) -> Result<Self> {
        let data = data.into_iter().map(|v| tag.normalize(v)).collect::<Result<Vec<_>>>()?;
        Ok(TropVector { tag, data })
    }

    pub(crate) fn raw(tag: SemiringTag, data: Vec<Ext>) -> Self {
        TropVector { tag, data }
    }

    pub fn from_ints(tag: SemiringTag, xs: &[Option<i64>]) -> Result<Self> {
        Self::new(tag, xs.iter().map(|x| x.map(crate::semiring::rat)).collect())
    }

    pub fn zeros(tag: SemiringTag, len: usize) -> Self {
        TropVector { tag, data: vec![None; len] }
    }

    pub fn unit(tag: SemiringTag, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(tag, len);
        v.data[i] = tag.one();
        v
    }

    pub fn tag(&self) -> SemiringTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entries(&self) -> &[Ext] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Ext> {
        self.data
    }

    pub fn get(&self, i: usize) -> TropScalar {
        TropScalar::from_ext(self.tag, self.data[i].clone()).expect("stored values are normalized")
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.data.len()).filter(|&i| self.data[i].is_some()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_none())
    }

    pub fn add(&self, other: &TropVector) -> Result<TropVector> {
        check_tags(self.tag, other.tag)?;
        if self.len() != other.len() {
            return Err(dim(format!("vector lengths {} and {}", self.len(), other.len())));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.tag.add(a, b)).collect();
        Ok(TropVector { tag: self.tag, data })
    }

    pub fn scale(&self, c: &TropScalar) -> Result<TropVector> {
        check_tags(self.tag, c.tag())?;
        let data = self.data.iter().map(|a| self.tag.mul(c.value(), a)).collect();
        Ok(TropVector { tag: self.tag, data })
    }

    /// Entrywise canonical order.
    pub fn le(&self, other: &TropVector) -> Result<bool> {
        check_tags(self.tag, other.tag)?;
        if self.len() != other.len() {
            return Err(dim(format!("vector lengths {} and {}", self.len(), other.len())));
        }
        Ok(self.data.iter().zip(&other.data).all(|(a, b)| self.tag.le(a, b)))
    }
}

impl fmt::Display for TropVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.data.iter().map(|v| self.tag.format(v)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TropMatrix {
    tag: SemiringTag,
    rows: usize,
    cols: usize,
    data: Vec<Ext>,
}

impl TropMatrix {
    pub fn new(tag: SemiringTag, rows: usize, cols: usize, data: Vec<Ext>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(dim("matrices need at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(dim(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        let data = data.into_iter().map(|v| tag.normalize(v)).collect::<Result<Vec<_>>>()?;
        Ok(TropMatrix { tag, rows, cols, data })
    }

    pub(crate) fn raw(tag: SemiringTag, rows: usize, cols: usize, data: Vec<Ext>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        TropMatrix { tag, rows, cols, data }
    }

    pub fn from_rows(tag: SemiringTag, rows: Vec<Vec<Ext>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(dim("ragged rows".into()));
        }
        Self::new(tag, r, c, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor; `None` is the semiring zero.
    pub fn from_ints(tag: SemiringTag, rows: &[Vec<Option<i64>>]) -> Result<Self> {
        Self::from_rows(
            tag,
            rows.iter().map(|r| r.iter().map(|x| x.map(crate::semiring::rat)).collect()).collect(),
        )
    }

    pub fn from_columns(tag: SemiringTag, rows: usize, cols: &[TropVector]) -> Result<Self> {
        if cols.is_empty() {
            return Err(dim("no columns".into()));
        }
        let mut data = vec![None; rows * cols.len()];
        for (j, c) in cols.iter().enumerate() {
            check_tags(tag, c.tag)?;
            if c.len() != rows {
                return Err(dim(format!("column {j} has length {}, expected {rows}", c.len())));
            }
            for i in 0..rows {
                data[i * cols.len() + j] = c.data[i].clone();
            }
        }
        Ok(TropMatrix { tag, rows, cols: cols.len(), data })
    }

    pub fn identity(tag: SemiringTag, n: usize) -> Self {
        let mut m = Self::zeros(tag, n, n);
        for i in 0..n {
            m.data[i * n + i] = tag.one();
        }
        m
    }

    pub fn zeros(tag: SemiringTag, rows: usize, cols: usize) -> Self {
        TropMatrix { tag, rows, cols, data: vec![None; rows * cols] }
    }

    pub fn tag(&self) -> SemiringTag {
        self.tag
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Ext] {
        &self.data
    }

    pub fn at(&self, i: usize, j: usize) -> &Ext {
        &self.data[i * self.cols + j]
    }

    pub fn get(&self, i: usize, j: usize) -> TropScalar {
        TropScalar::from_ext(self.tag, self.at(i, j).clone()).expect("stored values are normalized")
    }

    pub fn set(&mut self, i: usize, j: usize, v: Ext) -> Result<()> {
        self.data[i * self.cols + j] = self.tag.normalize(v)?;
        Ok(())
    }

    pub fn row(&self, i: usize) -> TropVector {
        TropVector { tag: self.tag, data: self.data[i * self.cols..(i + 1) * self.cols].to_vec() }
    }

    pub fn col(&self, j: usize) -> TropVector {
        TropVector { tag: self.tag, data: (0..self.rows).map(|i| self.at(i, j).clone()).collect() }
    }

    pub fn columns(&self) -> Vec<TropVector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Ext>> {
        self.data.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> TropMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j).clone());
            }
        }
        TropMatrix { tag: self.tag, rows: self.cols, cols: self.rows, data }
    }

    pub fn add(&self, other: &TropMatrix) -> Result<TropMatrix> {
        check_tags(self.tag, other.tag)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(dim(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.tag.add(a, b)).collect();
        Ok(TropMatrix { tag: self.tag, rows: self.rows, cols: self.cols, data })
    }

    /// Entrywise canonical order.
    pub fn le(&self, other: &TropMatrix) -> Result<bool> {
        check_tags(self.tag, other.tag)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(dim("shapes differ".into()));
        }
        Ok(self.data.iter().zip(&other.data).all(|(a, b)| self.tag.le(a, b)))
    }

    pub fn mul_vec(&self, x: &TropVector) -> Result<TropVector> {
        check_tags(self.tag, x.tag)?;
        if self.cols != x.len() {
            return Err(dim(format!("{}x{} times vector of length {}", self.rows, self.cols, x.len())));
        }
        let data = (0..self.rows)
            .map(|i| {
                let mut acc = None;
                for j in 0..self.cols {
                    acc = self.tag.add(&acc, &self.tag.mul(self.at(i, j), &x.data[j]));
                }
                acc
            })
            .collect();
        Ok(TropVector { tag: self.tag, data })
    }

    /// Adds `c` (⊗) to every entry.
    pub fn scale(&self, c: &TropScalar) -> Result<TropMatrix> {
        check_tags(self.tag, c.tag())?;
        let data = self.data.iter().map(|a| self.tag.mul(c.value(), a)).collect();
        Ok(TropMatrix { tag: self.tag, rows: self.rows, cols: self.cols, data })
    }

    /// Numeric negation of every finite entry; maps max-plus data onto min-plus data and back.
    pub(crate) fn negated(&self, tag: SemiringTag) -> TropMatrix {
        TropMatrix { tag, rows: self.rows, cols: self.cols, data: self.data.iter().map(ext_neg).collect() }
    }

    /// The matrix as max-plus data: identity for max-plus, negation for min-plus.
    pub(crate) fn as_max_plus(&self) -> Result<TropMatrix> {
        match self.tag {
            SemiringTag::MaxPlus => Ok(self.clone()),
            SemiringTag::MinPlus => Ok(self.negated(SemiringTag::MaxPlus)),
            t => Err(TropError::UnsupportedTag(t)),
        }
    }
}

impl fmt::Display for TropMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let parts: Vec<String> = (0..self.cols).map(|j| self.tag.format(self.at(i, j))).collect();
            writeln!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

fn dim(msg: String) -> TropError {
    TropError::DimensionMismatch(msg)
}

fn check_tags(a: SemiringTag, b: SemiringTag) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(TropError::TagMismatch(a, b))
    }
}

pub fn mat_mul(a: &TropMatrix, b: &TropMatrix) -> Result<TropMatrix> {
    check_tags(a.tag, b.tag)?;
    if a.cols != b.rows {
        return Err(dim(format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let tag = a.tag;
    let mut data = vec![None; a.rows * b.cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.at(i, j);
            if aij.is_none() {
                continue;
            }
            for k in 0..b.cols {
                let t = tag.mul(aij, b.at(j, k));
                let slot = &mut data[i * b.cols + k];
                *slot = tag.add(slot, &t);
            }
        }
    }
    Ok(TropMatrix { tag, rows: a.rows, cols: b.cols, data })
}

/// `V\x`: the greatest coefficient vector `l` with `V ⊗ l <= x`.
pub fn mat_residual_left(v: &TropMatrix, x: &TropVector) -> Result<TropVector> {
    check_tags(v.tag, x.tag)?;
    if v.rows != x.len() {
        return Err(dim(format!("{}x{} generators against vector of length {}", v.rows, v.cols, x.len())));
    }
    let tag = v.tag;
    let mut out = Vec::with_capacity(v.cols);
    for j in 0..v.cols {
        let mut acc: Option<Ext> = None;
        for i in 0..v.rows {
            if v.at(i, j).is_none() {
                continue;
            }
            let r = residual_ext(tag, &x.data[i], v.at(i, j))?;
            // meet in the canonical order
            acc = Some(match acc {
                None => r,
                Some(a) => {
                    if tag.le(&a, &r) {
                        a
                    } else {
                        r
                    }
                }
            });
        }
        out.push(acc.ok_or(TropError::ZeroColumn(j))?);
    }
    Ok(TropVector { tag, data: out })
}

/// Raw max-plus product of an `n x m` and an `m x p` array.
pub(crate) fn mp_matmul(a: &[Ext], n: usize, m: usize, b: &[Ext], p: usize) -> Vec<Ext> {
    let mut c: Vec<Ext> = vec![None; n * p];
    for i in 0..n {
        for j in 0..m {
            let Some(aij) = &a[i * m + j] else { continue };
            for k in 0..p {
                if let Some(bjk) = &b[j * p + k] {
                    let t = aij + bjk;
                    let slot = &mut c[i * p + k];
                    match slot {
                        Some(s) if *s >= t => {}
                        _ => *slot = Some(t),
                    }
                }
            }
        }
    }
    c
}

/// Raw max-plus star of an `n x n` array; `Divergent` on a positive cycle.
pub(crate) fn mp_star(a: &[Ext], n: usize) -> Result<Vec<Ext>> {
    if let Some(lambda) = spectral::karp(a, n) {
        if lambda.is_positive() {
            return Err(TropError::Divergent(format!(
                "a cycle has positive mean {}",
                crate::semiring::format_rat(&lambda)
            )));
        }
    }
    let mut b = a.to_vec();
    for i in 0..n {
        b[i * n + i] = ext_max(&b[i * n + i], &Some(Rat::from_integer(0.into())));
    }
    // (I ⊕ A)^(2^k) covers all paths of length < n once 2^k >= n - 1
    let mut len = 1;
    while len + 1 < n {
        b = mp_matmul(&b, n, n, &b, n);
        len *= 2;
    }
    Ok(b)
}

/// Kleene star `A* = I ⊕ A ⊕ A² ⊕ ...`.
pub fn kleene_star(a: &TropMatrix) -> Result<TropMatrix> {
    if !a.is_square() {
        return Err(dim(format!("star of a {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    match a.tag {
        SemiringTag::MaxPlus => Ok(TropMatrix::raw(a.tag, n, n, mp_star(&a.data, n)?)),
        SemiringTag::MinPlus => {
            let s = mp_star(&a.as_max_plus()?.data, n)?;
            Ok(TropMatrix::raw(a.tag, n, n, s.iter().map(ext_neg).collect()))
        }
        SemiringTag::Boolean => {
            let mut b = a.add(&TropMatrix::identity(a.tag, n))?;
            let mut len = 1;
            while len + 1 < n {
                b = mat_mul(&b, &b)?;
                len *= 2;
            }
            Ok(b)
        }
        SemiringTag::MaxTimes => Err(TropError::UnsupportedTag(a.tag)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalMatrix {
    lo: TropMatrix,
    hi: TropMatrix,
}

impl IntervalMatrix {
    pub fn new(lo: TropMatrix, hi: TropMatrix) -> Result<Self> {
        check_tags(lo.tag, hi.tag)?;
        if (lo.rows, lo.cols) != (hi.rows, hi.cols) {
            return Err(dim("endpoint matrices differ in shape".into()));
        }
        if !lo.le(&hi)? {
            return Err(TropError::InvalidValue("interval matrix has lo > hi in some entry".into()));
        }
        Ok(IntervalMatrix { lo, hi })
    }

    pub fn point(a: TropMatrix) -> Self {
        IntervalMatrix { lo: a.clone(), hi: a }
    }

    pub fn lo(&self) -> &TropMatrix {
        &self.lo
    }

    pub fn hi(&self) -> &TropMatrix {
        &self.hi
    }

    pub fn entry(&self, i: usize, j: usize) -> Interval {
        Interval::new(self.lo.get(i, j), self.hi.get(i, j)).expect("validated at construction")
    }

    pub fn contains(&self, a: &TropMatrix) -> Result<bool> {
        Ok(self.lo.le(a)? && a.le(&self.hi)?)
    }
}

/// Endpoint star; exact because star is isotone.
pub fn iv_kleene_star(a: &IntervalMatrix) -> Result<IntervalMatrix> {
    let hi = kleene_star(&a.hi)?;
    let lo = kleene_star(&a.lo)?;
    IntervalMatrix::new(lo, hi)
}

pub fn iv_mat_mul(a: &IntervalMatrix, b: &IntervalMatrix) -> Result<IntervalMatrix> {
    IntervalMatrix::new(mat_mul(&a.lo, &b.lo)?, mat_mul(&a.hi, &b.hi)?)
}

/// Endpoint max cycle means; exact because the cycle mean is isotone in every entry.
pub fn iv_eigenvalue(a: &IntervalMatrix) -> Result<Interval> {
    let lo = spectral::max_cycle_mean(&a.lo);
    let hi = spectral::max_cycle_mean(&a.hi)?;
    let lo = match lo {
        Ok(v) => v,
        Err(TropError::NoCycle) => TropScalar::bottom(a.lo.tag),
        Err(e) => return Err(e),
    };
    Interval::new(lo, hi)
}

/// Raw max-plus matrix-vector product.
pub(crate) fn mp_matvec(a: &[Ext], rows: usize, cols: usize, x: &[Ext]) -> Vec<Ext> {
    (0..rows)
        .map(|i| {
            let mut acc = None;
            for j in 0..cols {
                acc = ext_max(&acc, &ext_plus(&a[i * cols + j], &x[j]));
            }
            acc
        })
        .collect()
}
