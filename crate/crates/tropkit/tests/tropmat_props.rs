mod common;

use common::*;
use proptest::prelude::*;
use tropkit::semiring::{rat, ratio};
use tropkit::tropmat::{iv_kleene_star, kleene_star, mat_mul, mat_residual_left, IntervalMatrix};
use tropkit::{SemiringTag, TropError, TropMatrix, TropVector};

fn chain() -> impl Strategy<Value = (TropMatrix, TropMatrix, TropMatrix)> {
    (prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MinPlus, SemiringTag::MaxTimes, SemiringTag::Boolean]), 1..=6usize, 1..=6usize, 1..=6usize, 1..=6usize)
        .prop_flat_map(|(t, a, b, c, d)| (matrix(t, a, b, 3), matrix(t, b, c, 3), matrix(t, c, d, 3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_associative((a, b, c) in chain()) {
        let l = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
        let r = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn star_fixed_point(a in prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MinPlus, SemiringTag::Boolean])
        .prop_flat_map(|t| square(t, 6, 4)))
    {
        match kleene_star(&a) {
            Ok(s) => {
                let n = a.rows();
                let rhs = TropMatrix::identity(a.tag(), n).add(&mat_mul(&a, &s).unwrap()).unwrap();
                prop_assert_eq!(s, rhs);
            }
            Err(TropError::Divergent(_)) => prop_assert!(a.tag() != SemiringTag::Boolean),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn residual_adjunction((v, x) in (1..=3usize, 1..=2usize)
        .prop_flat_map(|(n, k)| (int_matrix(n, k, 2), int_vector(n, 2)))
        .prop_filter("generators are nonzero", |(v, _)| v.columns().iter().all(|c| !c.is_zero())))
    {
        let l = mat_residual_left(&v, &x).unwrap();
        prop_assert!(v.mul_vec(&l).unwrap().le(&x).unwrap());
        for g in grid(v.cols(), 6, true) {
            let lam = TropVector::new(SemiringTag::MaxPlus, g).unwrap();
            if v.mul_vec(&lam).unwrap().le(&x).unwrap() {
                prop_assert!(lam.le(&l).unwrap(), "{:?} satisfies V λ <= x but exceeds {:?}", lam, l);
            }
        }
    }

    #[test]
    fn interval_star(hi in square(SemiringTag::MaxPlus, 3, 3), drops in prop::collection::vec(0i64..=8, 9), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        // make every cycle nonpositive
        let hi = match tropkit::spectral::max_cycle_mean(&hi) {
            Ok(l) => match l.value() {
                Some(v) if *v > rat(0) => hi.scale(&tropkit::TropScalar::new(SemiringTag::MaxPlus, -v.clone()).unwrap()).unwrap(),
                _ => hi,
            },
            Err(_) => hi,
        };
        let n = hi.rows();
        let lo_data = hi.entries().iter().zip(&drops).map(|(h, d)| h.as_ref().map(|h| h - ratio(*d, 2))).collect();
        let lo = TropMatrix::new(SemiringTag::MaxPlus, n, n, lo_data).unwrap();
        let iv = IntervalMatrix::new(lo.clone(), hi.clone()).unwrap();
        let out = iv_kleene_star(&iv).unwrap();
        prop_assert_eq!(out.lo(), &kleene_star(&lo).unwrap());
        prop_assert_eq!(out.hi(), &kleene_star(&hi).unwrap());
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let data = lo.entries().iter().zip(hi.entries()).map(|(l, h)| match (l, h) {
                (Some(l), Some(h)) => Some(l + (h - l) * ratio(r.gen_range(0..=8), 8)),
                _ => None,
            }).collect();
            let a = TropMatrix::new(SemiringTag::MaxPlus, n, n, data).unwrap();
            prop_assert!(out.contains(&kleene_star(&a).unwrap()).unwrap());
        }
    }
}
