//! Two-sided max-plus inequalities `A ⊗ x <= B ⊗ x`.

use crate::error::{Result, TropError};
use crate::projector::Semimodule;
use crate::semiring::{ext_max, ext_plus, Ext, Rat, SemiringTag};
use crate::tropmat::{mp_star, TropMatrix, TropVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest m and n accepted by [`solve_system`].
pub const MAX_SYSTEM_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct InequalitySystem {
    a: TropMatrix,
    b: TropMatrix,
}

impl InequalitySystem {
    pub fn new(a: TropMatrix, b: TropMatrix) -> Result<Self> {
        if a.tag() != b.tag() {
            return Err(TropError::TagMismatch(a.tag(), b.tag()));
        }
        if a.tag() != SemiringTag::MaxPlus {
            return Err(TropError::UnsupportedTag(a.tag()));
        }
        if (a.rows(), a.cols()) != (b.rows(), b.cols()) {
            return Err(TropError::DimensionMismatch(format!(
                "A is {}x{}, B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        Ok(InequalitySystem { a, b })
    }

    pub fn a(&self) -> &TropMatrix {
        &self.a
    }

    pub fn b(&self) -> &TropMatrix {
        &self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSet {
    /// Generators as columns.
    pub generators: TropMatrix,
    pub certified: bool,
}

pub fn check_solution(s: &InequalitySystem, x: &TropVector) -> Result<bool> {
    s.a.mul_vec(x)?.le(&s.b.mul_vec(x)?)
}

fn unit(n: usize, j: usize) -> Vec<Ext> {
    let mut v = vec![None; n];
    v[j] = Some(Rat::zero());
    v
}

/// Generators of `{x : a ⊗ x <= b ⊗ x}`.
pub fn row_generators(a: &TropVector, b: &TropVector) -> Result<GeneratorSet> {
    if a.tag() != b.tag() {
        return Err(TropError::TagMismatch(a.tag(), b.tag()));
    }
    if a.tag() != SemiringTag::MaxPlus {
        return Err(TropError::UnsupportedTag(a.tag()));
    }
    if a.len() != b.len() {
        return Err(TropError::DimensionMismatch(format!("lengths {} and {}", a.len(), b.len())));
    }
    let n = a.len();
    let (a, b) = (a.entries(), b.entries());
    let in_j: Vec<bool> = (0..n).map(|j| SemiringTag::MaxPlus.le(&a[j], &b[j])).collect();
    if !in_j.iter().any(|&x| x) {
        return Err(TropError::Infeasible);
    }
    let mut out: Vec<Vec<Ext>> = Vec::new();
    let mut push = |v: Vec<Ext>| {
        if !out.contains(&v) {
            out.push(v);
        }
    };
    for j in (0..n).filter(|&j| in_j[j]) {
        push(unit(n, j));
    }
    for j in (0..n).filter(|&j| in_j[j]) {
        for l in (0..n).filter(|&l| !in_j[l]) {
            let mut v = unit(n, j);
            let al = a[l].as_ref().expect("a_l > b_l forces a finite a_l");
            v[l] = b[j].as_ref().map(|bj| bj - al);
            push(v);
        }
    }
    let cols: Vec<TropVector> = out.into_iter().map(|v| TropVector::raw(SemiringTag::MaxPlus, v)).collect();
    Ok(GeneratorSet { generators: TropMatrix::from_columns(SemiringTag::MaxPlus, n, &cols)?, certified: true })
}

/// Constraint matrix of pivot `p` in row `(a, b)`: `x_p >= W_pj + x_j`.
///
/// Its star exists iff `a_p <= b_p`.
pub fn pivot_matrix(a: &TropVector, b: &TropVector, p: usize) -> Result<TropMatrix> {
    let n = a.len();
    let w = pivot_row(a.entries(), b.entries(), p)
        .ok_or_else(|| TropError::InvalidValue(format!("b_{p} is the semiring zero")))?;
    let mut data = vec![None; n * n];
    data[p * n..(p + 1) * n].clone_from_slice(&w);
    TropMatrix::new(SemiringTag::MaxPlus, n, n, data)
}

fn pivot_row(a: &[Ext], b: &[Ext], p: usize) -> Option<Vec<Ext>> {
    let bp = b[p].as_ref()?;
    Some(
        (0..a.len())
            .map(|j| {
                let top = if j == p { a[j].clone() } else { ext_max(&a[j], &b[j]) };
                top.map(|t| t - bp)
            })
            .collect(),
    )
}

#[derive(Clone)]
enum Pivot {
    /// Row constraint `x_p >= w_j + x_j`.
    At(usize, Vec<Ext>),
    /// Left side vanishes: these coordinates are 𝟘.
    Null(Vec<usize>),
}

fn row_pivots(a: &[Ext], b: &[Ext]) -> Vec<Pivot> {
    let mut out: Vec<Pivot> = (0..a.len())
        .filter(|&p| b[p].is_some() && SemiringTag::MaxPlus.le(&a[p], &b[p]))
        .map(|p| Pivot::At(p, pivot_row(a, b, p).unwrap()))
        .collect();
    out.push(Pivot::Null((0..a.len()).filter(|&j| a[j].is_some()).collect()));
    out
}

/// Generator columns for one choice of pivot per row.
fn combination_generators(n: usize, choice: &[&Pivot]) -> Vec<Vec<Ext>> {
    let mut w: Vec<Ext> = vec![None; n * n];
    let mut forced = vec![false; n];
    for piv in choice {
        match piv {
            Pivot::At(p, row) => {
                for j in 0..n {
                    w[p * n + j] = ext_max(&w[p * n + j], &row[j]);
                }
            }
            Pivot::Null(zs) => {
                for &j in zs {
                    forced[j] = true;
                }
            }
        }
    }
    // nodes on positive cycles cannot carry a finite value
    if let Ok(plus) = positive_cycle_nodes(&w, n) {
        for (i, f) in plus.into_iter().enumerate() {
            forced[i] |= f;
        }
    }
    loop {
        let mut changed = false;
        for p in 0..n {
            if !forced[p] {
                continue;
            }
            for j in 0..n {
                if !forced[j] && w[p * n + j].is_some() {
                    forced[j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let r: Vec<usize> = (0..n).filter(|&i| !forced[i]).collect();
    if r.is_empty() {
        return vec![];
    }
    let k = r.len();
    let wr: Vec<Ext> = r.iter().flat_map(|&i| r.iter().map(move |&j| (i, j))).map(|(i, j)| w[i * n + j].clone()).collect();
    let Ok(s) = mp_star(&wr, k) else {
        return vec![];
    };
    (0..k)
        .map(|c| {
            let mut v = vec![None; n];
            for (ri, &i) in r.iter().enumerate() {
                v[i] = s[ri * k + c].clone();
            }
            v
        })
        .collect()
}

/// Nodes lying on a cycle of positive weight.
fn positive_cycle_nodes(w: &[Ext], n: usize) -> Result<Vec<bool>> {
    // Floyd-Warshall style closure capped at detection of positive diagonals
    let mut d = w.to_vec();
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i * n + k].clone() else { continue };
            for j in 0..n {
                let t = ext_plus(&Some(dik.clone()), &d[k * n + j]);
                if let Some(t) = t {
                    let slot = &mut d[i * n + j];
                    // once a positive cycle is seen the path values are meaningless; cap growth
                    if slot.as_ref().is_none_or(|s| t > *s) {
                        *slot = Some(t);
                    }
                }
            }
        }
    }
    let pos: Vec<bool> = (0..n).map(|i| d[i * n + i].as_ref().is_some_and(|v| *v > Rat::zero())).collect();
    // a node reachable both ways from a positive node also lies on a positive cycle
    let reach = |i: usize, j: usize| i == j || d[i * n + j].is_some();
    Ok((0..n).map(|i| (0..n).any(|p| pos[p] && reach(i, p) && reach(p, i))).collect())
}

fn normalize(v: &[Ext]) -> Option<Vec<Ext>> {
    let first = v.iter().flatten().next()?.clone();
    Some(v.iter().map(|x| x.as_ref().map(|x| x - &first)).collect())
}

/// Minimal generating set of `{x : A ⊗ x <= B ⊗ x}` by pivot expansion.
pub fn solve_system(s: &InequalitySystem) -> Result<GeneratorSet> {
    let (m, n) = (s.a.rows(), s.a.cols());
    if m > MAX_SYSTEM_DIM || n > MAX_SYSTEM_DIM {
        return Err(TropError::TooLarge(format!("{m}x{n} system; the cap is {MAX_SYSTEM_DIM}x{MAX_SYSTEM_DIM}")));
    }
    let rows: Vec<Vec<Pivot>> = (0..m)
        .map(|i| row_pivots(&s.a.to_rows()[i], &s.b.to_rows()[i]))
        .collect();
    let total: usize = rows.iter().map(|r| r.len()).product();
    let found: BTreeSet<Vec<Ext>> = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let choice: Vec<&Pivot> = rows
                .iter()
                .map(|r| {
                    let c = &r[code % r.len()];
                    code /= r.len();
                    c
                })
                .collect();
            combination_generators(n, &choice).into_iter().filter_map(|v| normalize(&v)).collect::<BTreeSet<_>>()
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    let mut gens: Vec<TropVector> = Vec::new();
    for v in found {
        let x = TropVector::raw(SemiringTag::MaxPlus, v);
        if !check_solution(s, &x)? {
            return Err(TropError::CertificateInvalid(format!("generator {x} violates the system")));
        }
        gens.push(x);
    }
    if gens.is_empty() {
        return Err(TropError::Infeasible);
    }
    let gens = prune(gens)?;
    Ok(GeneratorSet {
        generators: TropMatrix::from_columns(SemiringTag::MaxPlus, n, &gens)?,
        certified: true,
    })
}

/// Drops generators lying in the span of the others.
pub fn prune(mut gens: Vec<TropVector>) -> Result<Vec<TropVector>> {
    let mut i = 0;
    while i < gens.len() {
        if gens.len() == 1 {
            break;
        }
        let others: Vec<TropVector> = gens.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, g)| g.clone()).collect();
        if Semimodule::from_vectors(&others)?.contains(&gens[i])? {
            gens.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MP: SemiringTag = SemiringTag::MaxPlus;

    fn v(xs: &[Option<i64>]) -> TropVector {
        TropVector::from_ints(MP, xs).unwrap()
    }

    fn m(rows: &[Vec<Option<i64>>]) -> TropMatrix {
        TropMatrix::from_ints(MP, rows).unwrap()
    }

    #[test]
    fn row_examples() {
        let g = row_generators(&v(&[Some(0), Some(3)]), &v(&[Some(2), Some(1)])).unwrap();
        assert_eq!(g.generators.columns(), vec![v(&[Some(0), None]), v(&[Some(0), Some(-1)])]);
        let g = row_generators(&v(&[Some(0), None]), &v(&[None, Some(0)])).unwrap();
        assert_eq!(g.generators.columns(), vec![v(&[None, Some(0)]), v(&[Some(0), Some(0)])]);
        let a = v(&[Some(1), Some(2)]);
        let g = row_generators(&a, &a).unwrap();
        assert_eq!(g.generators.columns(), vec![v(&[Some(0), None]), v(&[None, Some(0)])]);
        assert_eq!(row_generators(&v(&[Some(1)]), &v(&[Some(0)])), Err(TropError::Infeasible));
    }

    #[test]
    fn check_examples() {
        let s = InequalitySystem::new(m(&[vec![Some(0), Some(3)]]), m(&[vec![Some(2), Some(1)]])).unwrap();
        assert!(check_solution(&s, &v(&[None, None])).unwrap());
        assert!(check_solution(&s, &v(&[Some(0), Some(-1)])).unwrap());
        assert!(!check_solution(&s, &v(&[Some(0), Some(0)])).unwrap());
    }

    #[test]
    fn diagonal_system() {
        // x1 <= x2 and x2 <= x1
        let a = m(&[vec![Some(0), None], vec![None, Some(0)]]);
        let b = m(&[vec![None, Some(0)], vec![Some(0), None]]);
        let g = solve_system(&InequalitySystem::new(a, b).unwrap()).unwrap();
        assert_eq!(g.generators.columns(), vec![v(&[Some(0), Some(0)])]);
    }

    #[test]
    fn identity_system_spans_everything() {
        let a = m(&[vec![Some(1), Some(-2), None], vec![Some(0), Some(0), Some(4)]]);
        let g = solve_system(&InequalitySystem::new(a.clone(), a).unwrap()).unwrap();
        let mut cols = g.generators.columns();
        cols.sort_by_key(|c| c.support());
        assert_eq!(cols, vec![
            TropVector::unit(MP, 3, 0),
            TropVector::unit(MP, 3, 1),
            TropVector::unit(MP, 3, 2)
        ]);
    }

    #[test]
    fn single_row_matches_row_generators() {
        let s = InequalitySystem::new(m(&[vec![Some(0), None]]), m(&[vec![None, Some(0)]])).unwrap();
        let g = solve_system(&s).unwrap();
        let r = row_generators(&v(&[Some(0), None]), &v(&[None, Some(0)])).unwrap();
        let mut a = g.generators.columns();
        let mut b = r.generators.columns();
        a.sort_by(|x, y| x.entries().cmp(y.entries()));
        b.sort_by(|x, y| x.entries().cmp(y.entries()));
        assert_eq!(a, b);
    }

    #[test]
    fn star_criterion() {
        let a = v(&[Some(0), Some(3)]);
        let b = v(&[Some(2), Some(1)]);
        assert!(crate::tropmat::kleene_star(&pivot_matrix(&a, &b, 0).unwrap()).is_ok());
        assert!(crate::tropmat::kleene_star(&pivot_matrix(&a, &b, 1).unwrap()).is_err());
    }
}
