#![allow(dead_code)]

use proptest::prelude::*;
use tropkit::semiring::{rat, ratio};
use tropkit::{Ext, Rat, SemiringTag, TropMatrix, TropVector};

pub const MP: SemiringTag = SemiringTag::MaxPlus;

/// Small rational with denominator in 1..=4.
pub fn small_rat(range: i64) -> impl Strategy<Value = Rat> {
    (-range..=range, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

pub fn small_int(range: i64) -> impl Strategy<Value = Rat> {
    (-range..=range).prop_map(rat)
}

/// Entry for `tag`: finite values in the tag's carrier, or the zero.
pub fn ext_for(tag: SemiringTag, bottom_weight: u32) -> BoxedStrategy<Ext> {
    let finite: BoxedStrategy<Rat> = match tag {
        SemiringTag::MaxPlus | SemiringTag::MinPlus => small_rat(12).boxed(),
        SemiringTag::MaxTimes => (1i64..=12, 1i64..=4).prop_map(|(p, q)| ratio(p, q)).boxed(),
        SemiringTag::Boolean => Just(rat(1)).boxed(),
    };
    prop_oneof![bottom_weight => Just(None), 10 => finite.prop_map(Some)].boxed()
}

pub fn mp_ext(bottom_weight: u32) -> BoxedStrategy<Ext> {
    prop_oneof![bottom_weight => Just(None), 10 => small_int(5).prop_map(Some)].boxed()
}

pub fn matrix(tag: SemiringTag, rows: usize, cols: usize, bottom_weight: u32) -> impl Strategy<Value = TropMatrix> {
    prop::collection::vec(ext_for(tag, bottom_weight), rows * cols)
        .prop_map(move |d| TropMatrix::new(tag, rows, cols, d).unwrap())
}

pub fn int_matrix(rows: usize, cols: usize, bottom_weight: u32) -> impl Strategy<Value = TropMatrix> {
    prop::collection::vec(mp_ext(bottom_weight), rows * cols).prop_map(move |d| TropMatrix::new(MP, rows, cols, d).unwrap())
}

pub fn square(tag: SemiringTag, max_n: usize, bottom_weight: u32) -> impl Strategy<Value = TropMatrix> {
    (1..=max_n).prop_flat_map(move |n| matrix(tag, n, n, bottom_weight))
}

pub fn vector(tag: SemiringTag, n: usize, bottom_weight: u32) -> impl Strategy<Value = TropVector> {
    prop::collection::vec(ext_for(tag, bottom_weight), n).prop_map(move |d| TropVector::new(tag, d).unwrap())
}

pub fn int_vector(n: usize, bottom_weight: u32) -> impl Strategy<Value = TropVector> {
    prop::collection::vec(mp_ext(bottom_weight), n).prop_map(|d| TropVector::new(MP, d).unwrap())
}

pub fn nonzero_int_vector(n: usize) -> impl Strategy<Value = TropVector> {
    int_vector(n, 2).prop_filter("nonzero", |v| !v.is_zero())
}

pub const TAGS: [SemiringTag; 4] = [SemiringTag::MaxPlus, SemiringTag::MinPlus, SemiringTag::MaxTimes, SemiringTag::Boolean];

/// All vectors over {𝟘, -r..=r}.
pub fn grid(n: usize, r: i64, with_bottom: bool) -> Vec<Vec<Ext>> {
    let mut vals: Vec<Ext> = (-r..=r).map(|i| Some(rat(i))).collect();
    if with_bottom {
        vals.insert(0, None);
    }
    let mut out: Vec<Vec<Ext>> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| vals.iter().map(move |v| {
                let mut q = p.clone();
                q.push(v.clone());
                q
            }))
            .collect();
    }
    out
}
