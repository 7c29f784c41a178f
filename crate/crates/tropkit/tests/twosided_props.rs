mod common;

use common::*;
use proptest::prelude::*;
use tropkit::projector::Semimodule;
use tropkit::tropmat::kleene_star;
use tropkit::twosided::{check_solution, pivot_matrix, row_generators, solve_system, InequalitySystem};
use tropkit::{SemiringTag, TropError, TropMatrix, TropVector};

fn system() -> impl Strategy<Value = InequalitySystem> {
    (1..=2usize, 1..=3usize).prop_flat_map(|(m, n)| {
        (int_matrix(m, n, 3), int_matrix(m, n, 3)).prop_map(|(a, b)| InequalitySystem::new(a, b).unwrap())
    })
}

fn solutions_covered(s: &InequalitySystem, gens: Option<&TropMatrix>) -> Result<(), TestCaseError> {
    let n = s.a().cols();
    let span = gens.map(|g| Semimodule::new(g.clone()).unwrap());
    for p in grid(n, 3, true) {
        let x = TropVector::new(SemiringTag::MaxPlus, p).unwrap();
        if x.is_zero() || !check_solution(s, &x).unwrap() {
            continue;
        }
        let ok = span.as_ref().is_some_and(|v| v.contains(&x).unwrap());
        prop_assert!(ok, "solution {:?} is not generated", x);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn row_generators_sound_and_complete((a, b) in (1..=3usize).prop_flat_map(|n| (int_vector(n, 3), int_vector(n, 3)))) {
        let s = InequalitySystem::new(
            TropMatrix::from_rows(SemiringTag::MaxPlus, vec![a.entries().to_vec()]).unwrap(),
            TropMatrix::from_rows(SemiringTag::MaxPlus, vec![b.entries().to_vec()]).unwrap(),
        ).unwrap();
        match row_generators(&a, &b) {
            Ok(g) => {
                for c in g.generators.columns() {
                    prop_assert!(check_solution(&s, &c).unwrap());
                }
                solutions_covered(&s, Some(&g.generators))?;
            }
            Err(TropError::Infeasible) => solutions_covered(&s, None)?,
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn system_generators_sound_and_complete(s in system()) {
        match solve_system(&s) {
            Ok(g) => {
                for c in g.generators.columns() {
                    prop_assert!(check_solution(&s, &c).unwrap());
                }
                solutions_covered(&s, Some(&g.generators))?;
            }
            Err(TropError::Infeasible) => solutions_covered(&s, None)?,
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn pivot_star_criterion((a, b, p) in (1..=4usize).prop_flat_map(|n| (int_vector(n, 2), int_vector(n, 2), 0..n))) {
        if b.entries()[p].is_none() {
            prop_assert!(pivot_matrix(&a, &b, p).is_err());
            return Ok(());
        }
        let w = pivot_matrix(&a, &b, p).unwrap();
        let feasible = SemiringTag::MaxPlus.le(&a.entries()[p], &b.entries()[p]);
        prop_assert_eq!(kleene_star(&w).is_ok(), feasible);
    }
}
