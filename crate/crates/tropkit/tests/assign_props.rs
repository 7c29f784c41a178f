mod common;

use common::*;
use proptest::prelude::*;
use tropkit::assign::{
    apply_b, distances_potentials, normal_form, optimal_assignment, strong_regularity, subdifferential,
    subdifferential_primal, AssignMatrix,
};
use tropkit::determ::permutations;
use tropkit::semiring::{rat, Rat};
use tropkit::{SemiringTag, TropError};

fn assign_matrix() -> impl Strategy<Value = AssignMatrix> {
    (1..=5usize)
        .prop_flat_map(|n| int_matrix(n, n, 4))
        .prop_filter_map("finite entry in every row and column", |m| AssignMatrix::new(m).ok())
}

fn finite_matrix() -> impl Strategy<Value = AssignMatrix> {
    (1..=5usize)
        .prop_flat_map(|n| prop::collection::vec(-6i64..=6, n * n).prop_map(move |v| (n, v)))
        .prop_map(|(n, v)| {
            let rows: Vec<Vec<Option<i64>>> = v.chunks(n).map(|r| r.iter().map(|&x| Some(x)).collect()).collect();
            AssignMatrix::new(tropkit::TropMatrix::from_ints(SemiringTag::MaxPlus, &rows).unwrap()).unwrap()
        })
}

fn rats(n: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(small_rat(5), n)
}

fn with_vector() -> impl Strategy<Value = (AssignMatrix, Vec<Rat>)> {
    assign_matrix().prop_flat_map(|b| {
        let n = b.n();
        (Just(b), rats(n))
    })
}

fn value(b: &AssignMatrix, p: &[usize]) -> Option<Rat> {
    (0..p.len()).map(|i| b.matrix().at(i, p[i]).clone()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn generalized_inverse((b, f) in with_vector()) {
        let g = apply_b(&b, &f, false).unwrap();
        let back = apply_b(&b, &apply_b(&b, &g, true).unwrap(), false).unwrap();
        prop_assert_eq!(back, g.clone());
        // image membership is exactly the covering condition
        prop_assert!(subdifferential(&b, &g).unwrap().covering);
    }

    #[test]
    fn covering_iff_in_image((b, g) in with_vector()) {
        let fixed = apply_b(&b, &apply_b(&b, &g, true).unwrap(), false).unwrap() == g;
        prop_assert_eq!(subdifferential(&b, &g).unwrap().covering, fixed);
    }

    #[test]
    fn shift_homogeneity((b, f) in with_vector(), c in small_rat(5)) {
        let shifted: Vec<Rat> = f.iter().map(|x| x + &c).collect();
        let expect: Vec<Rat> = apply_b(&b, &f, false).unwrap().iter().map(|x| x - &c).collect();
        prop_assert_eq!(apply_b(&b, &shifted, false).unwrap(), expect);
    }

    #[test]
    fn regularity_matches_exhaustive_uniqueness(b in assign_matrix()) {
        let n = b.n();
        let vals: Vec<Option<Rat>> = permutations(n).into_iter().map(|(p, _)| value(&b, &p)).collect();
        let best = vals.iter().flatten().max().cloned();
        let count = vals.iter().filter(|v| v.is_some() && **v == best).count();
        prop_assert_eq!(optimal_assignment(&b).1, best.clone());
        match strong_regularity(&b) {
            Ok(_) => prop_assert_eq!(count, 1),
            Err(TropError::NotStronglyRegular { .. }) => prop_assert!(count != 1),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn certificate_singleton_equivalences(b in assign_matrix()) {
        let Ok(c) = strong_regularity(&b) else { return Ok(()) };
        let n = b.n();
        let primal = subdifferential_primal(&b, &c.f).unwrap();
        let dual = subdifferential(&b, &c.g).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mapped = c.bijection[i] == j;
                prop_assert_eq!(primal[j] == vec![i], mapped);
                prop_assert_eq!(dual.sets[i] == vec![j], mapped);
            }
        }
        prop_assert!(dual.minimal);
    }

    #[test]
    fn normal_form_is_a_similarity(b in assign_matrix()) {
        let Ok(cert) = strong_regularity(&b) else { return Ok(()) };
        let c = normal_form(&b, &cert).unwrap();
        let n = b.n();
        let p = &cert.bijection;
        let phi: Vec<Rat> = (0..n).map(|i| b.matrix().at(i, p[i]).clone().unwrap() - &cert.f[p[i]]).collect();
        let psi: Vec<Rat> = (0..n).map(|j| cert.f[p[j]].clone()).collect();
        for i in 0..n {
            for j in 0..n {
                let want = b.matrix().at(i, p[j]).as_ref().map(|x| x - &phi[i] - &psi[j]);
                prop_assert_eq!(c.matrix().at(i, j), &want);
            }
        }
    }

    #[test]
    fn potential_properties(b in finite_matrix()) {
        let (perm, _) = optimal_assignment(&b);
        let pot = distances_potentials(&b, &perm).unwrap();
        let n = b.n();
        let zero = rat(0);
        for i in 0..n {
            prop_assert!(pot.distances.at(i, i).as_ref().is_some_and(|d| *d >= zero));
            prop_assert!(pot.phi[i] >= zero && pot.phi_tilde[i] >= zero);
            let rhs = (0..n)
                .filter_map(|j| pot.distances.at(i, j).as_ref().map(|d| d + &pot.phi[j]))
                .max()
                .unwrap();
            prop_assert_eq!(&pot.phi[i], &rhs);
        }
    }

    #[test]
    fn suboptimal_bijections_expose_a_cycle(b in finite_matrix()) {
        let n = b.n();
        let (_, best) = optimal_assignment(&b);
        for (p, _) in permutations(n) {
            let improving = value(&b, &p) < best;
            let r = distances_potentials(&b, &p);
            prop_assert_eq!(matches!(r, Err(TropError::ImprovingCycle(_))), improving);
        }
    }
}
