//! Tropical Plücker functions on subsets of `{1..n}`.
//!
//! Subsets are bitmasks: bit `e - 1` stands for element `e`. A value of `None`
//! is −∞ and is skipped by every relation check.

use crate::error::{Result, TropError};
use crate::io::{ext_from_json, ext_to_json};
use crate::semiring::{Ext, Rat, SemiringTag};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{Map, Value};

pub const MAX_GROUND: usize = 8;
pub const MAX_FLOW_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetFunction {
    n: usize,
    values: Vec<Ext>,
}

impl SubsetFunction {
    pub fn new(n: usize, values: Vec<Ext>) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(TropError::TooLarge(format!("ground set of size {n} exceeds {MAX_GROUND}")));
        }
        if values.len() != 1 << n {
            return Err(TropError::DimensionMismatch(format!("{} values for 2^{n} subsets", values.len())));
        }
        Ok(SubsetFunction { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(u32) -> Rat) -> Result<Self> {
        Self::new(n, (0..1u32 << n).map(|s| Some(f(s))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: u32) -> &Ext {
        &self.values[s as usize]
    }

    pub fn set(&mut self, s: u32, v: Ext) {
        self.values[s as usize] = v;
    }

    pub fn values(&self) -> &[Ext] {
        &self.values
    }

    pub fn restrict_to_intervals(&self) -> IntervalData {
        let mut out = IntervalData::new(self.n);
        for s in 0..1u32 << self.n {
            if is_interval(s) {
                out.values.push((s, self.values[s as usize].clone()));
            }
        }
        out
    }

    /// `{"n":3,"values":{"0b101":"3/2",...}}`
    pub fn to_json(&self) -> Value {
        subset_map_json(self.n, self.values.iter().enumerate().map(|(s, v)| (s as u32, v)))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (n, pairs) = parse_subset_map(v)?;
        let mut values: Vec<Option<Ext>> = vec![None; 1 << n];
        for (s, x) in pairs {
            values[s as usize] = Some(x);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(s, x)| x.ok_or_else(|| TropError::Parse(format!("missing value for subset {s:#b}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, values)
    }
}

/// Values on ∅ and the intervals `{i, ..., j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalData {
    n: usize,
    values: Vec<(u32, Ext)>,
}

impl IntervalData {
    pub fn new(n: usize) -> Self {
        IntervalData { n, values: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, s: u32, v: Rat) -> Result<()> {
        if !is_interval(s) || s >> self.n != 0 {
            return Err(TropError::InvalidValue(format!("{s:#b} is not an interval of 1..{}", self.n)));
        }
        self.values.retain(|(t, _)| *t != s);
        self.values.push((s, Some(v)));
        Ok(())
    }

    pub fn get(&self, s: u32) -> Option<&Ext> {
        self.values.iter().find(|(t, _)| *t == s).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.values.clone();
        v.sort_by_key(|(s, _)| *s);
        subset_map_json(self.n, v.iter().map(|(s, x)| (*s, x)))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let (n, pairs) = parse_subset_map(v)?;
        let mut out = IntervalData::new(n);
        for (s, x) in pairs {
            if !is_interval(s) {
                return Err(TropError::InvalidValue(format!("{s:#b} is not an interval")));
            }
            out.values.push((s, x));
        }
        Ok(out)
    }
}

fn subset_map_json<'a>(n: usize, it: impl Iterator<Item = (u32, &'a Ext)>) -> Value {
    let mut m = Map::new();
    for (s, v) in it {
        m.insert(format!("{s:#b}"), ext_to_json(SemiringTag::MaxPlus, v));
    }
    serde_json::json!({"n": n, "values": Value::Object(m)})
}

fn parse_subset_map(v: &Value) -> Result<(usize, Vec<(u32, Ext)>)> {
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| TropError::Parse("missing integer field \"n\"".into()))? as usize;
    if n > MAX_GROUND {
        return Err(TropError::TooLarge(format!("ground set of size {n} exceeds {MAX_GROUND}")));
    }
    let m = v
        .get("values")
        .and_then(Value::as_object)
        .ok_or_else(|| TropError::Parse("missing object field \"values\"".into()))?;
    let mut out = Vec::with_capacity(m.len());
    for (k, x) in m {
        let digits = k.strip_prefix("0b").ok_or_else(|| TropError::Parse(format!("subset key {k:?} must start with 0b")))?;
        let s = u32::from_str_radix(digits, 2).map_err(|_| TropError::Parse(format!("bad subset key {k:?}")))?;
        if s >> n != 0 {
            return Err(TropError::InvalidValue(format!("subset {k} outside 1..{n}")));
        }
        out.push((s, ext_from_json(SemiringTag::MaxPlus, x)?));
    }
    Ok((n, out))
}

/// ∅ or a set of consecutive elements.
pub fn is_interval(s: u32) -> bool {
    if s == 0 {
        return true;
    }
    let t = s >> s.trailing_zeros();
    t & (t + 1) == 0
}

/// Elements of `s`, 1-based and increasing.
pub fn elements(s: u32) -> Vec<usize> {
    (0..32).filter(|&b| s >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Bitmask of A.
    pub a: u32,
    /// 1-based elements `i < j < k` (and `l` for four-term relations).
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub witness: Option<Violation>,
}

impl Check {
    fn pass() -> Self {
        Check { holds: true, witness: None }
    }

    fn fail(a: u32, indices: Vec<usize>) -> Self {
        Check { holds: false, witness: Some(Violation { a, indices }) }
    }
}

fn sum(f: &SubsetFunction, x: u32, y: u32) -> Option<Rat> {
    Some(f.get(x).as_ref()? + f.get(y).as_ref()?)
}

/// All (A, i<j<k) with A disjoint from {i,j,k}, bit indices 0-based.
fn triples(n: usize) -> impl Iterator<Item = (u32, usize, usize, usize)> {
    let full = (1u32 << n) - 1;
    (0..n).flat_map(move |i| {
        (i + 1..n).flat_map(move |j| {
            (j + 1..n).flat_map(move |k| {
                let rest = full & !(1 << i | 1 << j | 1 << k);
                subsets_of(rest).map(move |a| (a, i, j, k))
            })
        })
    })
}

fn subsets_of(m: u32) -> impl Iterator<Item = u32> {
    // all submasks of m, increasing
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some(((cur | !m).wrapping_add(1)) & m) };
        Some(cur)
    })
}

pub fn is_tp(f: &SubsetFunction) -> Check {
    for (a, i, j, k) in triples(f.n) {
        let (bi, bj, bk) = (1u32 << i, 1u32 << j, 1u32 << k);
        let (Some(l), Some(r1), Some(r2)) =
            (sum(f, a | bi | bk, a | bj), sum(f, a | bi | bj, a | bk), sum(f, a | bj | bk, a | bi))
        else {
            continue;
        };
        if l != r1.max(r2) {
            return Check::fail(a, vec![i + 1, j + 1, k + 1]);
        }
    }
    Check::pass()
}

fn attained_twice(xs: [Rat; 3]) -> bool {
    let m = xs.iter().max().unwrap();
    xs.iter().filter(|x| *x == m).count() >= 2
}

pub fn is_dmtp(f: &SubsetFunction) -> Check {
    for (a, i, j, k) in triples(f.n) {
        let (bi, bj, bk) = (1u32 << i, 1u32 << j, 1u32 << k);
        let (Some(x), Some(y), Some(z)) =
            (sum(f, a | bi | bk, a | bj), sum(f, a | bi | bj, a | bk), sum(f, a | bj | bk, a | bi))
        else {
            continue;
        };
        if !attained_twice([x, y, z]) {
            return Check::fail(a, vec![i + 1, j + 1, k + 1]);
        }
    }
    let n = f.n;
    let full = (1u32 << n) - 1;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let (bi, bj, bk, bl) = (1u32 << i, 1u32 << j, 1u32 << k, 1u32 << l);
                    for a in subsets_of(full & !(bi | bj | bk | bl)) {
                        let (Some(x), Some(y), Some(z)) = (
                            sum(f, a | bi | bk, a | bj | bl),
                            sum(f, a | bi | bj, a | bk | bl),
                            sum(f, a | bj | bk, a | bi | bl),
                        ) else {
                            continue;
                        };
                        if !attained_twice([x, y, z]) {
                            return Check::fail(a, vec![i + 1, j + 1, k + 1, l + 1]);
                        }
                    }
                }
            }
        }
    }
    Check::pass()
}

/// Edge weights on the n×n grid; `None` means the edge is absent.
///
/// Vertex `(i, j)`, `1 <= i, j <= n`, has edges up to `(i-1, j)` and right to
/// `(i, j+1)`. Element `e` is the source `(n+1-e, 1)`; sinks are `(1, 1..k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFlowNet {
    n: usize,
    up: Vec<Ext>,
    right: Vec<Ext>,
}

impl GridFlowNet {
    /// `up[(i-1)*n + (j-1)]` weighs `(i,j)→(i-1,j)`; `right` likewise for `(i,j)→(i,j+1)`.
    pub fn new(n: usize, up: Vec<Ext>, right: Vec<Ext>) -> Result<Self> {
        if n == 0 || up.len() != n * n || right.len() != n * n {
            return Err(TropError::DimensionMismatch(format!("grid weights must be {n}x{n}")));
        }
        for j in 0..n {
            if up[j].is_some() {
                return Err(TropError::InvalidValue(format!("vertex (1,{}) has no upward edge", j + 1)));
            }
        }
        for i in 0..n {
            if right[i * n + n - 1].is_some() {
                return Err(TropError::InvalidValue(format!("vertex ({},{n}) has no rightward edge", i + 1)));
            }
        }
        Ok(GridFlowNet { n, up, right })
    }

    /// Full grid with every edge weighted by `w(from, to)`.
    pub fn full(n: usize, mut w: impl FnMut((usize, usize), (usize, usize)) -> Rat) -> Self {
        let mut up = vec![None; n * n];
        let mut right = vec![None; n * n];
        for i in 1..=n {
            for j in 1..=n {
                if i > 1 {
                    up[(i - 1) * n + j - 1] = Some(w((i, j), (i - 1, j)));
                }
                if j < n {
                    right[(i - 1) * n + j - 1] = Some(w((i, j), (i, j + 1)));
                }
            }
        }
        GridFlowNet { n, up, right }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `((i, j), (i2, j2), weight)`, 1-based.
    pub fn edges(&self) -> Vec<((usize, usize), (usize, usize), Rat)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if let Some(w) = &self.up[(i - 1) * n + j - 1] {
                    out.push(((i, j), (i - 1, j), w.clone()));
                }
                if let Some(w) = &self.right[(i - 1) * n + j - 1] {
                    out.push(((i, j), (i, j + 1), w.clone()));
                }
            }
        }
        out
    }

    /// `{"n":2,"up":[[...]],"right":[[...]]}` with `null` or `"-inf"` for absent edges.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| TropError::Parse("missing integer field \"n\"".into()))?
            as usize;
        let grid = |name: &str| -> Result<Vec<Ext>> {
            let rows = v
                .get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| TropError::Parse(format!("missing array field {name:?}")))?;
            if rows.len() != n {
                return Err(TropError::DimensionMismatch(format!("{name} must have {n} rows")));
            }
            let mut out = Vec::with_capacity(n * n);
            for r in rows {
                let r = r.as_array().ok_or_else(|| TropError::Parse(format!("{name} rows must be arrays")))?;
                if r.len() != n {
                    return Err(TropError::DimensionMismatch(format!("{name} rows must have {n} entries")));
                }
                for x in r {
                    out.push(ext_from_json(SemiringTag::MaxPlus, x)?);
                }
            }
            Ok(out)
        };
        Self::new(n, grid("up")?, grid("right")?)
    }
}

/// `f(S')` = max weight of a normal flow from `S'`, `None` when there is none.
pub fn flow_values(net: &GridFlowNet) -> Result<SubsetFunction> {
    let n = net.n;
    if n > MAX_FLOW_DIM {
        return Err(TropError::TooLarge(format!("grid size {n} exceeds {MAX_FLOW_DIM}")));
    }
    // vertices in topological order: rows bottom-up, columns left to right
    let order: Vec<(usize, usize)> = (1..=n).rev().flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    let idx = |(i, j): (usize, usize)| (i - 1) * n + (j - 1);
    let outs: Vec<Vec<(usize, Rat)>> = order
        .iter()
        .map(|&(i, j)| {
            let mut o = Vec::new();
            if let Some(w) = &net.up[idx((i, j))] {
                o.push((idx((i - 1, j)), w.clone()));
            }
            if let Some(w) = &net.right[idx((i, j))] {
                o.push((idx((i, j + 1)), w.clone()));
            }
            o
        })
        .collect();
    let mut values = Vec::with_capacity(1 << n);
    for mask in 0..1u32 << n {
        let mut r = vec![0i32; n * n];
        let s = elements(mask);
        for &e in &s {
            r[idx((n + 1 - e, 1))] += 1;
        }
        for t in 1..=s.len() {
            r[idx((1, t))] -= 1;
        }
        let mut inflow = vec![0i32; n * n];
        let mut best: Option<Rat> = None;
        search(&order, &outs, &r, &mut inflow, 0, Rat::zero(), &mut best, &idx);
        values.push(best);
    }
    SubsetFunction::new(n, values)
}

#[allow(clippy::too_many_arguments)]
fn search(
    order: &[(usize, usize)],
    outs: &[Vec<(usize, Rat)>],
    r: &[i32],
    inflow: &mut Vec<i32>,
    pos: usize,
    acc: Rat,
    best: &mut Option<Rat>,
    idx: &dyn Fn((usize, usize)) -> usize,
) {
    if pos == order.len() {
        if best.as_ref().is_none_or(|b| acc > *b) {
            *best = Some(acc);
        }
        return;
    }
    let v = idx(order[pos]);
    let need = r[v] + inflow[v];
    let o = &outs[pos];
    if need < 0 || need as usize > o.len() {
        return;
    }
    for pick in 0u32..1 << o.len() {
        if pick.count_ones() as i32 != need {
            continue;
        }
        let mut add = acc.clone();
        for (b, (t, w)) in o.iter().enumerate() {
            if pick >> b & 1 == 1 {
                inflow[*t] += 1;
                add += w;
            }
        }
        search(order, outs, r, inflow, pos + 1, add, best, idx);
        for (b, (t, _)) in o.iter().enumerate() {
            if pick >> b & 1 == 1 {
                inflow[*t] -= 1;
            }
        }
    }
}

/// Like [`flow_values`] but every subset must admit a flow.
pub fn flow_tp(net: &GridFlowNet) -> Result<SubsetFunction> {
    let f = flow_values(net)?;
    if let Some(s) = (0..1u32 << net.n).find(|&s| f.get(s).is_none()) {
        return Err(TropError::NoFlow { subset: s });
    }
    Ok(f)
}

fn gaps(s: u32) -> u32 {
    if s == 0 {
        return 0;
    }
    let span = 32 - s.leading_zeros() - s.trailing_zeros();
    span - s.count_ones()
}

/// Unique TP extension of data given on ∅ and all intervals.
pub fn reconstruct_from_intervals(g: &IntervalData) -> Result<SubsetFunction> {
    let n = g.n;
    if n > MAX_GROUND {
        return Err(TropError::TooLarge(format!("ground set of size {n} exceeds {MAX_GROUND}")));
    }
    let mut values: Vec<Ext> = vec![None; 1 << n];
    let mut known = vec![false; 1 << n];
    for s in 0..1u32 << n {
        if is_interval(s) {
            let v = g
                .get(s)
                .ok_or_else(|| TropError::InvalidValue(format!("missing value for interval {s:#b}")))?;
            if v.is_none() {
                return Err(TropError::InvalidValue(format!("interval {s:#b} has value -inf")));
            }
            values[s as usize] = v.clone();
            known[s as usize] = true;
        }
    }
    let mut rest: Vec<u32> = (0..1u32 << n).filter(|&s| !is_interval(s)).collect();
    rest.sort_by_key(|&s| (s.count_ones(), gaps(s), elements(s).iter().sum::<usize>(), s));
    for s in rest {
        let i = s.trailing_zeros();
        let j = (i + 1..32).find(|&b| s >> b & 1 == 0).expect("non-interval has a gap");
        let k = (j + 1..32).find(|&b| s >> b & 1 == 1).expect("element after the gap");
        let a = s & !(1 << i | 1 << k);
        let get = |t: u32| -> &Rat {
            debug_assert!(known[t as usize], "propagation order visits {t:#b} too early");
            values[t as usize].as_ref().expect("known values are finite")
        };
        let (bi, bj, bk) = (1u32 << i, 1u32 << j, 1u32 << k);
        let v = (get(a | bi | bj) + get(a | bk)).max(get(a | bj | bk) + get(a | bi)) - get(a | bj);
        values[s as usize] = Some(v);
        known[s as usize] = true;
    }
    let f = SubsetFunction::new(n, values)?;
    let c = is_tp(&f);
    if let Some(w) = c.witness {
        return Err(TropError::Inconsistent(format!(
            "relation fails at A = {:#b}, (i,j,k) = {:?}",
            w.a, w.indices
        )));
    }
    Ok(f)
}

/// `f(A) + f(B) >= f(A ∪ B) + f(A ∩ B)` over all pairs, or over interval pairs.
pub fn is_submodular(f: &SubsetFunction, on_intervals_only: bool) -> bool {
    let sets: Vec<u32> = (0..1u32 << f.n).filter(|&s| !on_intervals_only || is_interval(s)).collect();
    for &a in &sets {
        for &b in &sets {
            let (Some(l), Some(r)) = (sum(f, a, b), sum(f, a | b, a & b)) else { continue };
            if l < r {
                return false;
            }
        }
    }
    true
}
