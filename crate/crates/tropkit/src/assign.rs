//! Finite assignment problems through the Galois pair `(B, Bᵀ)`.
//!
//! Indices are 0-based; a bijection `F` is stored as `f[i] = F(i)`.

use crate::determ::permutations;
use crate::error::{Result, TropError};
use crate::semiring::{ext_max, Ext, Rat, SemiringTag};
use crate::spectral;
use crate::tropmat::{mp_star, TropMatrix};
use num_traits::{Signed, Zero};
use serde::Serialize;

/// Brute force over all bijections up to this size.
pub const MAX_CERTIFIED_DIM: usize = 8;

/// Square max-plus matrix with a finite entry in every row and column.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignMatrix {
    b: TropMatrix,
}

impl AssignMatrix {
    pub fn new(b: TropMatrix) -> Result<Self> {
        if b.tag() != SemiringTag::MaxPlus {
            return Err(TropError::UnsupportedTag(b.tag()));
        }
        if !b.is_square() {
            return Err(TropError::DimensionMismatch(format!("{}x{} matrix is not square", b.rows(), b.cols())));
        }
        let n = b.rows();
        if let Some(i) = (0..n).find(|&i| (0..n).all(|j| b.at(i, j).is_none())) {
            return Err(TropError::InvalidValue(format!("row {i} has no finite entry")));
        }
        if let Some(j) = (0..n).find(|&j| (0..n).all(|i| b.at(i, j).is_none())) {
            return Err(TropError::InvalidValue(format!("column {j} has no finite entry")));
        }
        Ok(AssignMatrix { b })
    }

    pub fn n(&self) -> usize {
        self.b.rows()
    }

    pub fn matrix(&self) -> &TropMatrix {
        &self.b
    }

    fn at(&self, i: usize, j: usize) -> &Ext {
        self.b.at(i, j)
    }
}

fn check_len(n: usize, f: &[Rat]) -> Result<()> {
    if f.len() != n {
        return Err(TropError::DimensionMismatch(format!("vector of length {} for n = {n}", f.len())));
    }
    Ok(())
}

/// `(Bf)_i = max_j (b_ij - f_j)`, or with `b_ji` when transposed.
pub fn apply_b(b: &AssignMatrix, f: &[Rat], transpose: bool) -> Result<Vec<Rat>> {
    let n = b.n();
    check_len(n, f)?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let e = if transpose { b.at(j, i) } else { b.at(i, j) };
                    e.as_ref().map(|e| e - &f[j])
                })
                .max()
                .expect("every row has a finite entry")
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subdifferential {
    /// `∂ᵀg(i) = {k : (Bᵀg)_k = b_ik - g_i}`.
    pub sets: Vec<Vec<usize>>,
    /// `(∂ᵀg)⁻¹(j) = {i : j ∈ ∂ᵀg(i)}`.
    pub inverse: Vec<Vec<usize>>,
    pub covering: bool,
    pub minimal: bool,
}

pub fn subdifferential(b: &AssignMatrix, g: &[Rat]) -> Result<Subdifferential> {
    let n = b.n();
    let btg = apply_b(b, g, true)?;
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&k| b.at(i, k).as_ref().is_some_and(|e| e - &g[i] == btg[k])).collect())
        .collect();
    Ok(summarize(n, sets))
}

/// `∂f(j) = {i : (Bf)_i = b_ij - f_j}`.
pub fn subdifferential_primal(b: &AssignMatrix, f: &[Rat]) -> Result<Vec<Vec<usize>>> {
    let n = b.n();
    let bf = apply_b(b, f, false)?;
    Ok((0..n)
        .map(|j| (0..n).filter(|&i| b.at(i, j).as_ref().is_some_and(|e| e - &f[j] == bf[i])).collect())
        .collect())
}

fn summarize(n: usize, sets: Vec<Vec<usize>>) -> Subdifferential {
    let mut inverse = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for &j in s {
            inverse[j].push(i);
        }
    }
    let covering = sets.iter().all(|s| !s.is_empty());
    // j is essential iff some i belongs to no other member, i.e. ∂ᵀg(i) = {j}
    let minimal = covering && (0..n).all(|j| sets.iter().any(|s| s.as_slice() == [j]));
    Subdifferential { sets, inverse, covering, minimal }
}

fn assignment_value(b: &AssignMatrix, perm: &[usize]) -> Ext {
    let mut acc = Some(Rat::zero());
    for (i, &j) in perm.iter().enumerate() {
        acc = crate::semiring::ext_plus(&acc, b.at(i, j));
    }
    acc
}

/// Optimal bijection and its value (𝟘 when no finite assignment exists).
pub fn optimal_assignment(b: &AssignMatrix) -> (Vec<usize>, Ext) {
    let n = b.n();
    if n <= MAX_CERTIFIED_DIM {
        let mut best: Option<(Vec<usize>, Ext)> = None;
        for (p, _) in permutations(n) {
            let v = assignment_value(b, &p);
            let better = match &best {
                None => true,
                Some((bp, bv)) => ext_max(bv, &v) != *bv || (v == *bv && p < *bp),
            };
            if better {
                best = Some((p, v));
            }
        }
        best.expect("n >= 1")
    } else {
        let p = hungarian(b);
        let v = assignment_value(b, &p);
        (p, v)
    }
}

/// Kuhn-Munkres with potentials; absent entries get a prohibitive cost.
fn hungarian(b: &AssignMatrix) -> Vec<usize> {
    let n = b.n();
    let big: Rat = b.b.entries().iter().flatten().map(|x| x.abs()).fold(Rat::zero(), |a, x| a + x)
        * Rat::from_integer(2.into())
        + Rat::from_integer(1.into());
    let cost = |i: usize, j: usize| -> Rat {
        match b.at(i, j) {
            Some(x) => -x.clone(),
            None => big.clone(),
        }
    };
    let mut u = vec![Rat::zero(); n + 1];
    let mut v = vec![Rat::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<Rat>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Rat> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - &u[i0] - &v[j];
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().unwrap();
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut f = vec![0; n];
    for j in 1..=n {
        f[p[j] - 1] = j - 1;
    }
    f
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityCertificate {
    pub bijection: Vec<usize>,
    #[serde(serialize_with = "crate::io::ser_rats")]
    pub f: Vec<Rat>,
    #[serde(serialize_with = "crate::io::ser_rats")]
    pub g: Vec<Rat>,
    pub strongly_regular: bool,
    /// The optimum was found by exhaustive search.
    pub certified: bool,
}

/// A cycle through critical edges, as a node sequence.
fn critical_cycle(edges: &[(usize, usize)]) -> Vec<usize> {
    let (start, _) = edges[0];
    let mut path = vec![start];
    let mut cur = start;
    loop {
        let &(_, next) = edges.iter().find(|(u, _)| *u == cur).expect("critical nodes have critical out-edges");
        if let Some(pos) = path.iter().position(|&x| x == next) {
            return path[pos..].to_vec();
        }
        path.push(next);
        cur = next;
    }
}

fn rat_vec(v: &[Rat]) -> String {
    let s: Vec<String> = v.iter().map(crate::semiring::format_rat).collect();
    format!("({})", s.join(", "))
}

/// Unique optimal bijection together with strict dual vectors.
pub fn strong_regularity(b: &AssignMatrix) -> Result<RegularityCertificate> {
    let n = b.n();
    let (perm, value) = optimal_assignment(b);
    if value.is_none() {
        return Err(TropError::NotStronglyRegular { reason: "no finite assignment".into(), second: None });
    }
    // d_il: gain from giving row i the column F(l)
    let base: Vec<Rat> = (0..n).map(|i| b.at(i, perm[i]).clone().expect("finite optimum")).collect();
    let mut d: Vec<Ext> = vec![None; n * n];
    for i in 0..n {
        for l in 0..n {
            if i != l {
                d[i * n + l] = b.at(i, perm[l]).as_ref().map(|x| x - &base[i]);
            }
        }
    }
    let mu = spectral::karp(&d, n);
    let eps = match &mu {
        Some(m) if !m.is_negative() => {
            let dm = TropMatrix::raw(SemiringTag::MaxPlus, n, n, d.clone());
            let crit = spectral::spectral(&dm)?;
            let cycle = critical_cycle(&crit.critical_edges);
            let mut second = perm.clone();
            for (pos, &i) in cycle.iter().enumerate() {
                second[i] = perm[cycle[(pos + 1) % cycle.len()]];
            }
            if m.is_positive() {
                return Err(TropError::CertificateInvalid(format!("bijection {perm:?} is not optimal")));
            }
            return Err(TropError::NotStronglyRegular {
                reason: "the optimal bijection is not unique".into(),
                second: Some(second),
            });
        }
        Some(m) => -m / Rat::from_integer(2.into()),
        None => Rat::from_integer(1.into()),
    };
    let shifted: Vec<Ext> = d.iter().map(|x| x.as_ref().map(|x| x + &eps)).collect();
    let s = mp_star(&shifted, n)?;
    let h: Vec<Rat> = (0..n)
        .map(|l| (0..n).filter_map(|i| s[i * n + l].clone()).max().expect("star diagonal is finite"))
        .collect();
    let mut f = vec![Rat::zero(); n];
    for i in 0..n {
        f[perm[i]] = h[i].clone();
    }
    let g = apply_b(b, &f, false)?;
    let cert = RegularityCertificate {
        bijection: perm,
        f,
        g,
        strongly_regular: true,
        certified: n <= MAX_CERTIFIED_DIM,
    };
    verify_strict(b, &cert)?;
    Ok(cert)
}

/// The strict inequalities: `F(i)` is the unique argmax of `b_ik - f_k`, and `i`
/// the unique argmax of `b_kF(i) - g_k`.
pub fn verify_strict(b: &AssignMatrix, c: &RegularityCertificate) -> Result<()> {
    let n = b.n();
    check_len(n, &c.f)?;
    check_len(n, &c.g)?;
    let mut seen = vec![false; n];
    for &j in &c.bijection {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(TropError::CertificateInvalid(format!("{:?} is not a bijection", c.bijection)));
        }
    }
    for i in 0..n {
        let fi = c.bijection[i];
        let Some(top) = b.at(i, fi) else {
            return Err(TropError::CertificateInvalid(format!("b[{i}][{fi}] is not finite")));
        };
        let row_top = top - &c.f[fi];
        for k in (0..n).filter(|&k| k != fi) {
            if let Some(x) = b.at(i, k) {
                if x - &c.f[k] >= row_top {
                    return Err(TropError::CertificateInvalid(format!(
                        "row {i}: column {k} ties or beats F({i}) = {fi} under f = {}",
                        rat_vec(&c.f)
                    )));
                }
            }
        }
        let col_top = top - &c.g[i];
        for k in (0..n).filter(|&k| k != i) {
            if let Some(x) = b.at(k, fi) {
                if x - &c.g[k] >= col_top {
                    return Err(TropError::CertificateInvalid(format!(
                        "column {fi}: row {k} ties or beats row {i} under g = {}",
                        rat_vec(&c.g)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `c_ij = b_iF(j) - f_F(j) - (b_iF(i) - f_F(i))`, strongly normal.
pub fn normal_form(b: &AssignMatrix, cert: &RegularityCertificate) -> Result<AssignMatrix> {
    if !cert.strongly_regular {
        return Err(TropError::CertificateInvalid("certificate is not strongly regular".into()));
    }
    verify_strict(b, cert)?;
    let n = b.n();
    let p = &cert.bijection;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        let diag = b.at(i, p[i]).as_ref().expect("verified") - &cert.f[p[i]];
        for j in 0..n {
            data.push(b.at(i, p[j]).as_ref().map(|x| x - &cert.f[p[j]] - &diag));
        }
    }
    let c = TropMatrix::raw(SemiringTag::MaxPlus, n, n, data);
    if !is_strongly_normal(&c) {
        return Err(TropError::CertificateInvalid("normal form is not strongly normal".into()));
    }
    AssignMatrix::new(c)
}

/// Zero diagonal and negative off-diagonal entries.
pub fn is_strongly_normal(c: &TropMatrix) -> bool {
    let n = c.rows();
    (0..n).all(|i| {
        (0..n).all(|j| match c.at(i, j) {
            Some(x) if i == j => x.is_zero(),
            Some(x) => x.is_negative(),
            None => i != j,
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Potentials {
    /// Optimal distances `b̃`.
    pub distances: TropMatrix,
    #[serde(serialize_with = "crate::io::ser_rats")]
    pub phi: Vec<Rat>,
    #[serde(serialize_with = "crate::io::ser_rats")]
    pub phi_tilde: Vec<Rat>,
}

/// Optimal distances `b̃ = d⁺` with `d_ij = b_iF(j) - b_jF(j)`, and the potentials.
pub fn distances_potentials(b: &AssignMatrix, perm: &[usize]) -> Result<Potentials> {
    let n = b.n();
    if perm.len() != n {
        return Err(TropError::DimensionMismatch(format!("bijection of length {} for n = {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(TropError::InvalidValue(format!("{perm:?} is not a bijection")));
        }
    }
    let base: Vec<Rat> = (0..n)
        .map(|j| {
            b.at(j, perm[j])
                .clone()
                .ok_or_else(|| TropError::InvalidValue(format!("b[{j}][{}] is not finite", perm[j])))
        })
        .collect::<Result<_>>()?;
    let mut d: Vec<Ext> = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = b.at(i, perm[j]).as_ref().map(|x| x - &base[j]);
        }
    }
    if spectral::karp(&d, n).is_some_and(|m| m.is_positive()) {
        let dm = TropMatrix::raw(SemiringTag::MaxPlus, n, n, d);
        let crit = spectral::spectral(&dm)?;
        return Err(TropError::ImprovingCycle(critical_cycle(&crit.critical_edges)));
    }
    // d has a zero diagonal, so d⁺ = d*
    let s = mp_star(&d, n)?;
    let row_max = |i: usize| (0..n).filter_map(|j| s[i * n + j].clone()).max().expect("zero diagonal");
    let col_max = |i: usize| (0..n).filter_map(|j| s[j * n + i].clone()).max().expect("zero diagonal");
    Ok(Potentials {
        phi: (0..n).map(row_max).collect(),
        phi_tilde: (0..n).map(col_max).collect(),
        distances: TropMatrix::raw(SemiringTag::MaxPlus, n, n, s),
    })
}
