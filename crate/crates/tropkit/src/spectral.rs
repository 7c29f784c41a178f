//! Max-plus eigenproblem. Min-plus matrices are handled through negation,
//! so their eigenvalue is the minimal cycle mean.
//!
//! Node indices are 0-based.

use crate::error::{Result, TropError};
use crate::semiring::{ext_neg, ext_plus, Ext, Rat, SemiringTag, TropScalar};
use crate::tropmat::{mp_matmul, mp_matvec, mp_star, TropMatrix, TropVector};
use num_traits::Zero;
use serde::Serialize;

/// Karp's maximal cycle mean of a raw max-plus array, `None` if acyclic.
pub(crate) fn karp(a: &[Ext], n: usize) -> Option<Rat> {
    // d[k][v]: max weight of a walk with exactly k edges ending at v, any start
    let mut d: Vec<Vec<Ext>> = Vec::with_capacity(n + 1);
    d.push(vec![Some(Rat::zero()); n]);
    for k in 1..=n {
        let prev = &d[k - 1];
        let mut cur: Vec<Ext> = vec![None; n];
        for u in 0..n {
            let Some(du) = &prev[u] else { continue };
            for v in 0..n {
                if let Some(w) = &a[u * n + v] {
                    let t = du + w;
                    match &cur[v] {
                        Some(c) if *c >= t => {}
                        _ => cur[v] = Some(t),
                    }
                }
            }
        }
        d.push(cur);
    }
    let mut best: Option<Rat> = None;
    for v in 0..n {
        let Some(dn) = &d[n][v] else { continue };
        let mut worst: Option<Rat> = None;
        for (k, row) in d.iter().enumerate().take(n) {
            if let Some(dk) = &row[v] {
                let m = (dn - dk) / Rat::from_integer(((n - k) as i64).into());
                if worst.as_ref().is_none_or(|w| m < *w) {
                    worst = Some(m);
                }
            }
        }
        if let Some(w) = worst {
            if best.as_ref().is_none_or(|b| w > *b) {
                best = Some(w);
            }
        }
    }
    best
}

fn square_mp(a: &TropMatrix) -> Result<TropMatrix> {
    if !a.is_square() {
        return Err(TropError::DimensionMismatch(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    a.as_max_plus()
}

fn from_mp(tag: SemiringTag, v: Rat) -> TropScalar {
    let v = if tag == SemiringTag::MinPlus { -v } else { v };
    TropScalar::new(tag, v).expect("finite value")
}

/// λ: the maximal (max-plus) or minimal (min-plus) cycle mean.
pub fn max_cycle_mean(a: &TropMatrix) -> Result<TropScalar> {
    let m = square_mp(a)?;
    let lambda = karp(m.entries(), m.rows()).ok_or(TropError::NoCycle)?;
    Ok(from_mp(a.tag(), lambda))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralResult {
    pub eigenvalue: TropScalar,
    pub critical_nodes: Vec<usize>,
    pub critical_edges: Vec<(usize, usize)>,
    /// Critical classes, each sorted, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// One generator per class, normalized to 𝟙 at the class representative.
    pub eigenvectors: Vec<TropVector>,
}

struct Normalized {
    lambda: Rat,
    n: usize,
    al: Vec<Ext>,
    star: Vec<Ext>,
}

fn normalize(m: &TropMatrix) -> Result<Normalized> {
    let n = m.rows();
    let lambda = karp(m.entries(), n).ok_or(TropError::NoCycle)?;
    let al: Vec<Ext> = m.entries().iter().map(|v| v.as_ref().map(|x| x - &lambda)).collect();
    let star = mp_star(&al, n)?;
    Ok(Normalized { lambda, n, al, star })
}

/// Eigenvalue, critical graph, classes and eigenvector generators.
pub fn spectral(a: &TropMatrix) -> Result<SpectralResult> {
    let tag = a.tag();
    let m = square_mp(a)?;
    let Normalized { lambda, n, al, star } = normalize(&m)?;
    let plus = mp_matmul(&al, n, n, &star, n);
    let zero = Some(Rat::zero());
    let critical_nodes: Vec<usize> = (0..n).filter(|&i| plus[i * n + i] == zero).collect();
    let mut critical_edges = Vec::new();
    for &i in &critical_nodes {
        for &j in &critical_nodes {
            if ext_plus(&al[i * n + j], &star[j * n + i]) == zero {
                critical_edges.push((i, j));
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; n];
    for &i in &critical_nodes {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = critical_nodes
            .iter()
            .copied()
            .filter(|&j| ext_plus(&star[i * n + j], &star[j * n + i]) == zero)
            .collect();
        for &j in &class {
            seen[j] = true;
        }
        classes.push(class);
    }
    let eigenvectors = classes
        .iter()
        .map(|c| {
            let r = c[0];
            let col: Vec<Ext> = (0..n).map(|i| star[i * n + r].clone()).collect();
            let col = if tag == SemiringTag::MinPlus { col.iter().map(ext_neg).collect() } else { col };
            TropVector::raw(tag, col)
        })
        .collect();
    Ok(SpectralResult {
        eigenvalue: from_mp(tag, lambda),
        critical_nodes,
        critical_edges,
        classes,
        eigenvectors,
    })
}

pub fn critical_graph(a: &TropMatrix) -> Result<SpectralResult> {
    spectral(a)
}

pub fn eigenvectors(a: &TropMatrix) -> Result<Vec<TropVector>> {
    Ok(spectral(a)?.eigenvectors)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollatzWielandt {
    pub value: TropScalar,
    /// Finite vector attaining the value.
    pub certificate: TropVector,
}

/// Collatz-Wielandt number with a finite certificate vector.
pub fn collatz_wielandt(a: &TropMatrix) -> Result<CollatzWielandt> {
    let tag = a.tag();
    let m = square_mp(a)?;
    let n = m.rows();
    if let Some(i) = (0..n).find(|&i| (0..n).all(|j| m.at(i, j).is_none())) {
        return Err(TropError::Unbounded(i));
    }
    let nm = normalize(&m)?;
    let res = spectral(&m)?;
    let u: Vec<Ext> = match res.eigenvectors.iter().find(|v| v.entries().iter().all(|x| x.is_some())) {
        Some(v) => v.entries().to_vec(),
        // S ⊗ 0 is a finite super-eigenvector: A ⊗ u <= λ ⊗ u
        None => mp_matvec(&nm.star, n, n, &vec![Some(Rat::zero()); n]),
    };
    let au = mp_matvec(m.entries(), n, n, &u);
    let ratio = (0..n)
        .map(|i| au[i].as_ref().expect("rows are finite") - u[i].as_ref().expect("finite"))
        .max()
        .expect("n >= 1");
    if ratio != nm.lambda {
        return Err(TropError::CertificateInvalid(format!(
            "certificate ratio {} differs from the cycle mean",
            crate::semiring::format_rat(&ratio)
        )));
    }
    let u = if tag == SemiringTag::MinPlus { u.iter().map(ext_neg).collect() } else { u };
    Ok(CollatzWielandt { value: from_mp(tag, nm.lambda), certificate: TropVector::raw(tag, u) })
}
