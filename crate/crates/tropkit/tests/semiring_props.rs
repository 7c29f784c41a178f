mod common;

use common::*;
use proptest::prelude::*;
use tropkit::semiring::{iv_binary, rat, sr_add, sr_mul, sr_residual, Interval, IvOp};
use tropkit::{SemiringTag, TropScalar};

fn scalar(tag: SemiringTag) -> impl Strategy<Value = TropScalar> {
    ext_for(tag, 2).prop_map(move |v| TropScalar::from_ext(tag, v).unwrap())
}

fn tagged_triple() -> impl Strategy<Value = (TropScalar, TropScalar, TropScalar)> {
    prop::sample::select(TAGS.to_vec()).prop_flat_map(|t| (scalar(t), scalar(t), scalar(t)))
}

fn interval(tag: SemiringTag) -> impl Strategy<Value = Interval> {
    (scalar(tag), scalar(tag)).prop_map(|(a, b)| {
        if a.le(&b).unwrap() {
            Interval::new(a, b).unwrap()
        } else {
            Interval::new(b, a).unwrap()
        }
    })
}

/// Points of `iv` on a small set: endpoints plus finite values between them.
fn inside(iv: &Interval, picks: &[u8]) -> Vec<TropScalar> {
    let tag = iv.tag();
    let mut out = vec![iv.lo().clone(), iv.hi().clone()];
    if let (Some(l), Some(h)) = (iv.lo().value(), iv.hi().value()) {
        for &p in picks {
            let t = tropkit::semiring::ratio(p as i64, 255);
            out.push(TropScalar::new(tag, l + (h - l) * t).unwrap());
        }
    } else if let Some(h) = iv.hi().value() {
        for &p in picks {
            let v = match tag {
                SemiringTag::MaxTimes => h * tropkit::semiring::ratio(p as i64 + 1, 256),
                SemiringTag::MinPlus => h + rat(p as i64),
                _ => h - rat(p as i64),
            };
            if let Ok(s) = TropScalar::new(tag, v) {
                out.push(s);
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn add_associative_and_distributive((a, b, c) in tagged_triple()) {
        let l = sr_add(&sr_add(&a, &b).unwrap(), &c).unwrap();
        let r = sr_add(&a, &sr_add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        let l = sr_mul(&a, &sr_add(&b, &c).unwrap()).unwrap();
        let r = sr_add(&sr_mul(&a, &b).unwrap(), &sr_mul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        let l = sr_mul(&sr_mul(&a, &b).unwrap(), &c).unwrap();
        let r = sr_mul(&a, &sr_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn add_idempotent_and_commutative((a, b, _c) in tagged_triple()) {
        prop_assert_eq!(sr_add(&a, &a).unwrap(), a.clone());
        prop_assert_eq!(sr_add(&a, &b).unwrap(), sr_add(&b, &a).unwrap());
    }

    #[test]
    fn residual_adjunction(
        tag in prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MinPlus, SemiringTag::MaxTimes]),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pick = |r: &mut rand_chacha::ChaCha8Rng| -> TropScalar {
            let v = match tag {
                SemiringTag::MaxTimes => tropkit::semiring::ratio(r.gen_range(1..=12), r.gen_range(1..=3)),
                _ => tropkit::semiring::ratio(r.gen_range(-12..=12), r.gen_range(1..=3)),
            };
            TropScalar::new(tag, v).unwrap()
        };
        let x = if r.gen_bool(0.2) { TropScalar::bottom(tag) } else { pick(&mut r) };
        let y = pick(&mut r);
        let q = sr_residual(&x, &y).unwrap();
        let mut grid: Vec<TropScalar> = (-24..=24)
            .filter_map(|k| {
                let v = match tag {
                    SemiringTag::MaxTimes if k <= 0 => return None,
                    SemiringTag::MaxTimes => tropkit::semiring::ratio(k, 6),
                    _ => tropkit::semiring::ratio(k, 2),
                };
                TropScalar::new(tag, v).ok()
            })
            .collect();
        grid.push(TropScalar::bottom(tag));
        grid.push(q.clone());
        for l in grid {
            let lhs = sr_mul(&l, &y).unwrap().le(&x).unwrap();
            prop_assert_eq!(lhs, l.le(&q).unwrap());
        }
    }

    #[test]
    fn interval_sound_and_exact(
        (a, b) in prop::sample::select(vec![SemiringTag::MaxPlus, SemiringTag::MinPlus, SemiringTag::MaxTimes])
            .prop_flat_map(|t| (interval(t), interval(t))),
        picks in prop::collection::vec(any::<u8>(), 4),
    ) {
        for op in [IvOp::Add, IvOp::Mul, IvOp::Residual] {
            if op == IvOp::Residual && (b.lo().is_bottom() || b.hi().is_bottom()) {
                continue;
            }
            let out = iv_binary(op, &a, &b).unwrap();
            let f = |x: &TropScalar, y: &TropScalar| match op {
                IvOp::Add => sr_add(x, y).unwrap(),
                IvOp::Mul => sr_mul(x, y).unwrap(),
                IvOp::Residual => sr_residual(x, y).unwrap(),
            };
            let xs = inside(&a, &picks);
            let ys = inside(&b, &picks);
            let mut hit_lo = false;
            let mut hit_hi = false;
            for x in &xs {
                for y in &ys {
                    let v = f(x, y);
                    prop_assert!(out.contains(&v).unwrap(), "{:?} {} {} not in {}", op, x, y, out);
                    hit_lo |= &v == out.lo();
                    hit_hi |= &v == out.hi();
                }
            }
            prop_assert!(hit_lo && hit_hi, "{:?}: endpoints of {} not attained", op, out);
        }
    }
}
