mod common;

use common::*;
use proptest::prelude::*;
use tropkit::assign::{optimal_assignment, AssignMatrix};
use tropkit::determ::{apply_standard_transform, bideterminant, is_trop_singular, is_trop_singular_by_subsets, permanent, rook_coefficients, StandardTransform};
use tropkit::semiring::{rat, sr_add, sr_mul};
use tropkit::tropmat::mat_mul;
use tropkit::{Ext, SemiringTag, TropMatrix, TropScalar};

fn pair() -> impl Strategy<Value = (TropMatrix, TropMatrix)> {
    (prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MaxTimes, SemiringTag::MinPlus]), 1..=4usize)
        .prop_flat_map(|(t, n)| (matrix(t, n, n, 2), matrix(t, n, n, 2)))
}

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn parity(p: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            inv += (p[i] > p[j]) as usize;
        }
    }
    inv % 2 == 0
}

fn inv(tag: SemiringTag, x: &Ext) -> Ext {
    x.as_ref().map(|v| match tag {
        SemiringTag::MaxTimes => v.recip(),
        _ => -v.clone(),
    })
}

fn finite(tag: SemiringTag) -> BoxedStrategy<Ext> {
    ext_for(tag, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weak_multiplicativity((a, b) in pair()) {
        let ab = bideterminant(&mat_mul(&a, &b).unwrap()).unwrap();
        let da = bideterminant(&a).unwrap();
        let db = bideterminant(&b).unwrap();
        let m = |x: &TropScalar, y: &TropScalar| sr_mul(x, y).unwrap();
        let s = |x: TropScalar, y: TropScalar| sr_add(&x, &y).unwrap();
        let lhs = s(s(ab.plus.clone(), m(&da.plus, &db.minus)), m(&da.minus, &db.plus));
        let rhs = s(s(ab.minus.clone(), m(&da.plus, &db.plus)), m(&da.minus, &db.minus));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn even_transforms_keep_bideterminant(
        (x, p, q, d, e, transpose) in (prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MaxTimes]), 1..=4usize)
            .prop_flat_map(|(t, n)| (matrix(t, n, n, 2), perm(n), perm(n), prop::collection::vec(finite(t), n), prop::collection::vec(finite(t), n), any::<bool>()))
    ) {
        let tag = x.tag();
        let n = x.rows();
        // P ⊗ Q even, and det(D ⊗ E) = 𝟙: fix the last entry of E
        let mut q = q;
        if parity(&p) != parity(&q) {
            if n < 2 { return Ok(()); }
            q.swap(0, 1);
        }
        let mut e = e;
        let mut acc = tag.one();
        for i in 0..n { acc = tag.mul(&acc, &d[i]); }
        for i in 0..n - 1 { acc = tag.mul(&acc, &e[i]); }
        e[n - 1] = inv(tag, &acc);
        let t = StandardTransform { p, d, e, q, transpose };
        let y = apply_standard_transform(&x, &t).unwrap();
        prop_assert_eq!(bideterminant(&y).unwrap(), bideterminant(&x).unwrap());
        prop_assert_eq!(rook_coefficients(&y).unwrap()[n].clone(), rook_coefficients(&x).unwrap()[n].clone());
    }

    #[test]
    fn scalar_transforms_keep_all_rook_coefficients(
        (x, p, q, c, transpose) in (prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MaxTimes]), 1..=4usize)
            .prop_flat_map(|(t, n)| (matrix(t, n, n, 2), perm(n), perm(n), finite(t), any::<bool>()))
    ) {
        let tag = x.tag();
        let n = x.rows();
        let t = StandardTransform { p, d: vec![c.clone(); n], e: vec![inv(tag, &c); n], q, transpose };
        let y = apply_standard_transform(&x, &t).unwrap();
        prop_assert_eq!(rook_coefficients(&y).unwrap(), rook_coefficients(&x).unwrap());
    }

    #[test]
    fn permanent_is_optimal_assignment(a in square(SemiringTag::MaxPlus, 6, 2)) {
        let p = permanent(&a).unwrap();
        match AssignMatrix::new(a.clone()) {
            Ok(b) => prop_assert_eq!(p.value(), &optimal_assignment(&b).1),
            Err(_) => prop_assert!(p.is_bottom()),
        }
    }

    #[test]
    fn singularity_paths_agree(a in (1..=3usize).prop_flat_map(|n| int_matrix(n, n, 2))) {
        // the subset path is only complete for finite permanents
        if permanent(&a).unwrap().is_bottom() {
            return Ok(());
        }
        prop_assert_eq!(is_trop_singular(&a).unwrap(), is_trop_singular_by_subsets(&a).unwrap());
    }
}

#[test]
fn identity_rook_coefficients() {
    let r = rook_coefficients(&TropMatrix::identity(SemiringTag::MaxPlus, 3)).unwrap();
    assert!(r.iter().all(|c| c.value() == &Some(rat(0))));
}
