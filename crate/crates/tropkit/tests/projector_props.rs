mod common;

use common::*;
use proptest::prelude::*;
use tropkit::projector::{cyclic_orbit, cyclic_spectral_radius, hilbert_value, project, Semimodule};
use tropkit::{SemiringTag, TropMatrix, TropScalar, TropVector};

fn semimodule(n: usize) -> impl Strategy<Value = Semimodule> {
    prop::collection::vec(nonzero_int_vector(n), 1..=3).prop_map(|gs| Semimodule::from_vectors(&gs).unwrap())
}

fn setup() -> impl Strategy<Value = (Semimodule, TropVector, TropVector)> {
    (1..=4usize).prop_flat_map(|n| (semimodule(n), int_vector(n, 2), int_vector(n, 2)))
}

fn family() -> impl Strategy<Value = Vec<Semimodule>> {
    (2..=4usize, 1..=3usize).prop_flat_map(|(n, k)| prop::collection::vec(semimodule(n), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projector_laws((v, x, _y) in setup()) {
        let p = project(&v, &x).unwrap();
        prop_assert!(p.le(&x).unwrap());
        prop_assert_eq!(project(&v, &p).unwrap(), p);
        for g in v.generators().columns() {
            prop_assert_eq!(project(&v, &g).unwrap(), g);
        }
    }

    #[test]
    fn isotone_and_homogeneous((v, x, y) in setup(), c in small_rat(6)) {
        let hi = x.add(&y).unwrap();
        prop_assert!(project(&v, &x).unwrap().le(&project(&v, &hi).unwrap()).unwrap());
        let c = TropScalar::new(SemiringTag::MaxPlus, c).unwrap();
        prop_assert_eq!(project(&v, &x.scale(&c).unwrap()).unwrap(), project(&v, &x).unwrap().scale(&c).unwrap());
    }

    #[test]
    fn windowed_hilbert_values_nondecreasing(vs in family()) {
        let n = vs[0].dim();
        let k = vs.len();
        let start = TropVector::new(SemiringTag::MaxPlus, vec![Some(tropkit::semiring::rat(0)); n]).unwrap();
        let orbit = cyclic_orbit(&vs, &start, 6).unwrap();
        if orbit.iter().any(|x| x.is_zero()) {
            return Ok(());
        }
        let mut prev: Option<TropScalar> = None;
        // windows starting at the first projector of each sweep
        for w in orbit.chunks(k).filter(|c| c.len() == k) {
            let h = hilbert_value(w).unwrap();
            if let Some(p) = &prev {
                prop_assert!(p.le(&h).unwrap(), "{} then {}", p, h);
            }
            prev = Some(h);
        }
    }

    #[test]
    fn radius_witnesses_attain_value(vs in family()) {
        let rep = cyclic_spectral_radius(&vs).unwrap();
        prop_assert!(rep.certified);
        if !rep.value.is_bottom() {
            prop_assert_eq!(hilbert_value(&rep.witness_vectors).unwrap(), rep.value.clone());
            for (w, v) in rep.witness_vectors.iter().zip(&vs) {
                prop_assert!(v.contains(w).unwrap());
            }
            // the witness chain starts from an eigenvector of the composed projector
            let y = rep.witness_vectors.last().unwrap().clone();
            let mut z = y.clone();
            for v in &vs {
                z = project(v, &z).unwrap();
            }
            prop_assert!(y.scale(&rep.value).unwrap().le(&z).unwrap() || z == y.scale(&rep.value).unwrap());
        }
    }

    #[test]
    fn single_and_repeated_modules_have_radius_one(v in (2..=4usize).prop_flat_map(semimodule)) {
        let one = TropScalar::one(SemiringTag::MaxPlus);
        prop_assert_eq!(cyclic_spectral_radius(std::slice::from_ref(&v)).unwrap().value, one.clone());
        prop_assert_eq!(cyclic_spectral_radius(&[v.clone(), v]).unwrap().value, one);
    }
}

#[test]
fn identity_generators_fix_everything() {
    let v = Semimodule::new(TropMatrix::identity(SemiringTag::MaxPlus, 3)).unwrap();
    let x = TropVector::from_ints(SemiringTag::MaxPlus, &[Some(1), None, Some(-4)]).unwrap();
    assert_eq!(project(&v, &x).unwrap(), x);
}
