//! Degree-one homogeneous min-plus dynamics: exclusion process, event-graph
//! roads, crossings, eigenproblem reduction, the tent map and T1H systems.
//!
//! Coordinates are 0-based in code; cell numbers in configuration are 1-based.

use crate::error::{Result, TropError};
use crate::semiring::{format_rat, rat, Ext, Rat, SemiringTag};
use crate::spectral;
use crate::tropmat::{mat_mul, TropMatrix};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default bound on `max_i x_i - min_i x_i` before a run counts as diverged.
pub const DEFAULT_SPREAD_BOUND: i64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingWord {
    bits: Vec<bool>,
}

impl RingWord {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(TropError::BadConfig("a ring needs at least one cell".into()));
        }
        Ok(RingWord { bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(TropError::Parse(format!("ring words use 0 and 1, got {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn cars(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> Rat {
        Rat::new(self.cars().into(), self.len().into())
    }

    /// One synchronous application of `10 → 01`; returns the number of moves.
    pub fn step(&self) -> (RingWord, usize) {
        let m = self.len();
        let mut next = self.bits.clone();
        let mut moved = 0;
        for i in 0..m {
            let j = (i + 1) % m;
            if self.bits[i] && !self.bits[j] {
                next[i] = false;
                next[j] = true;
                moved += 1;
            }
        }
        (RingWord { bits: next }, moved)
    }
}

impl fmt::Display for RingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionRun {
    /// `steps + 1` words, starting with the initial one.
    pub words: Vec<RingWord>,
    /// Moves per cell at each step.
    pub flows: Vec<Rat>,
}

pub fn exclusion_run(w: &RingWord, steps: usize) -> ExclusionRun {
    let mut words = vec![w.clone()];
    let mut flows = Vec::with_capacity(steps);
    let m = w.len();
    for _ in 0..steps {
        let (next, moved) = words.last().unwrap().step();
        flows.push(Rat::new(moved.into(), m.into()));
        words.push(next);
    }
    ExclusionRun { words, flows }
}

/// `constant + Σ e_j x_j + Σ e'_j y_j`, where `x` is the previous state and `y`
/// the coordinates already updated in the current step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub constant: Rat,
    pub exponents: Vec<(usize, Rat)>,
    pub current: Vec<(usize, Rat)>,
}

impl Term {
    pub fn new(constant: Rat, exponents: Vec<(usize, Rat)>) -> Self {
        Term { constant, exponents, current: vec![] }
    }

    pub fn with_current(mut self, current: Vec<(usize, Rat)>) -> Self {
        self.current = current;
        self
    }

    /// `c + x_j`
    pub fn shift(constant: Rat, j: usize) -> Self {
        Term::new(constant, vec![(j, Rat::one())])
    }

    pub fn degree(&self) -> Rat {
        self.exponents.iter().chain(&self.current).map(|(_, e)| e.clone()).sum()
    }

    fn eval(&self, x: &[Rat], y: &[Rat]) -> Rat {
        // accumulate unreduced; states share denominators, so one gcd at the end
        let mut num = self.constant.numer().clone();
        let mut den = self.constant.denom().clone();
        let parts = self.exponents.iter().map(|(j, e)| (e, &x[*j])).chain(self.current.iter().map(|(j, e)| (e, &y[*j])));
        for (e, v) in parts {
            let (en, ed) = (e.numer() * v.numer(), e.denom() * v.denom());
            if ed == den {
                num += en;
            } else {
                num = num * &ed + en * &den;
                den *= ed;
            }
        }
        Rat::new(num, den)
    }
}

/// `x_i' = min over terms`, coordinates updated in index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousMap {
    terms: Vec<Vec<Term>>,
}

impl HomogeneousMap {
    pub fn new(terms: Vec<Vec<Term>>) -> Result<Self> {
        let dim = terms.len();
        if dim == 0 {
            return Err(TropError::BadConfig("map of dimension zero".into()));
        }
        for (i, ts) in terms.iter().enumerate() {
            if ts.is_empty() {
                return Err(TropError::BadConfig(format!("coordinate {i} has no term")));
            }
            for t in ts {
                if t.degree() != Rat::one() {
                    return Err(TropError::BadConfig(format!(
                        "a term of coordinate {i} has degree {}, expected 1",
                        format_rat(&t.degree())
                    )));
                }
                if let Some((j, _)) = t.exponents.iter().find(|(j, _)| *j >= dim) {
                    return Err(TropError::BadConfig(format!("coordinate {i} references x_{j} out of range")));
                }
                if let Some((j, _)) = t.current.iter().find(|(j, _)| *j >= i) {
                    return Err(TropError::BadConfig(format!(
                        "coordinate {i} uses the new value of {j}, which is not yet updated"
                    )));
                }
            }
        }
        Ok(HomogeneousMap { terms })
    }

    /// The min-plus linear map `x ↦ A ⊗ x`.
    pub fn from_min_plus(a: &TropMatrix) -> Result<Self> {
        if a.tag() != SemiringTag::MinPlus {
            return Err(TropError::UnsupportedTag(a.tag()));
        }
        if !a.is_square() {
            return Err(TropError::DimensionMismatch("map matrix must be square".into()));
        }
        let n = a.rows();
        Self::new(
            (0..n)
                .map(|i| (0..n).filter_map(|j| a.at(i, j).clone().map(|c| Term::shift(c, j))).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Vec<Term>] {
        &self.terms
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        let mut y: Vec<Rat> = Vec::with_capacity(x.len());
        for ts in &self.terms {
            let v = ts.iter().map(|t| t.eval(x, &y)).min().expect("nonempty");
            y.push(v);
        }
        y
    }
}

fn spread(x: &[Rat]) -> Rat {
    let max = x.iter().max().unwrap();
    let min = x.iter().min().unwrap();
    max - min
}

fn check_dim(f: &HomogeneousMap, x0: &[Rat]) -> Result<()> {
    if x0.len() != f.dim() {
        return Err(TropError::DimensionMismatch(format!("initial state of length {} for dimension {}", x0.len(), f.dim())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomRun {
    /// `x^0, ..., x^K`.
    pub trajectory: Vec<Vec<Rat>>,
    pub throughput: Rat,
}

/// `(x_i^K - x_i^{K/2}) / (K - K/2)`, averaged over `i`.
pub fn throughput(early: &[Rat], late: &[Rat], steps: usize) -> Rat {
    let total: Rat = late.iter().zip(early).map(|(b, a)| b - a).sum();
    total / Rat::from_integer((early.len() * steps).into())
}

pub fn hom_iterate(f: &HomogeneousMap, x0: &[Rat], k: usize) -> Result<HomRun> {
    hom_iterate_bounded(f, x0, k, &rat(DEFAULT_SPREAD_BOUND))
}

pub fn hom_iterate_bounded(f: &HomogeneousMap, x0: &[Rat], k: usize, bound: &Rat) -> Result<HomRun> {
    check_dim(f, x0)?;
    if k < 2 {
        return Err(TropError::BadConfig("at least two steps are needed".into()));
    }
    let mut trajectory = vec![x0.to_vec()];
    for step in 1..=k {
        let x = f.apply(trajectory.last().unwrap());
        if spread(&x) > *bound {
            return Err(TropError::Diverged(format!("coordinate spread exceeds {} at step {step}", format_rat(bound))));
        }
        trajectory.push(x);
    }
    let throughput = throughput(&trajectory[k / 2], &trajectory[k], k - k / 2);
    Ok(HomRun { trajectory, throughput })
}

/// Same measurement as [`hom_iterate`] without keeping the trajectory.
pub fn hom_throughput(f: &HomogeneousMap, x0: &[Rat], k: usize) -> Result<Rat> {
    check_dim(f, x0)?;
    if k < 2 {
        return Err(TropError::BadConfig("at least two steps are needed".into()));
    }
    let bound = rat(DEFAULT_SPREAD_BOUND);
    let mut x = x0.to_vec();
    let mut mid = None;
    for step in 1..=k {
        x = f.apply(&x);
        if spread(&x) > bound {
            return Err(TropError::Diverged(format!("coordinate spread exceeds {DEFAULT_SPREAD_BOUND} at step {step}")));
        }
        if step == k / 2 {
            mid = Some(x.clone());
        }
    }
    let mid = mid.unwrap_or_else(|| x0.to_vec());
    Ok(throughput(&mid, &x, k - k / 2))
}

/// Circular road `x_i' = min(a_{i-1} + x_{i-1}, ā_i + x_{i+1})` as a min-plus matrix.
pub fn road_matrix(a: &[bool]) -> Result<TropMatrix> {
    let m = a.len();
    if m == 0 {
        return Err(TropError::BadConfig("a road needs at least one cell".into()));
    }
    let mut mat = TropMatrix::zeros(SemiringTag::MinPlus, m, m);
    for i in 0..m {
        let prev = (i + m - 1) % m;
        let next = (i + 1) % m;
        let back = rat(a[prev] as i64);
        let fwd = rat(1 - a[i] as i64);
        // on short rings the neighbours coincide
        let cur_prev = mat.at(i, prev).clone();
        mat.set(i, prev, Some(cur_prev.map_or(back.clone(), |c| c.min(back))))?;
        let cur_next = mat.at(i, next).clone();
        mat.set(i, next, Some(cur_next.map_or(fwd.clone(), |c| c.min(fwd))))?;
    }
    Ok(mat)
}

pub fn road_event_graph(a: &[bool]) -> Result<HomogeneousMap> {
    HomogeneousMap::from_min_plus(&road_matrix(a)?)
}

/// Fixed-point form of the eigenproblem, normalized at coordinate `pivot`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedMap {
    f: HomogeneousMap,
    pivot: usize,
}

pub fn eigen_reduce(f: &HomogeneousMap, pivot: usize) -> Result<ReducedMap> {
    if pivot >= f.dim() {
        return Err(TropError::DimensionMismatch(format!("pivot {pivot} for dimension {}", f.dim())));
    }
    Ok(ReducedMap { f: f.clone(), pivot })
}

impl ReducedMap {
    pub fn dim(&self) -> usize {
        self.f.dim() - 1
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    fn embed(&self, y: &[Rat]) -> Vec<Rat> {
        let mut x = y.to_vec();
        x.insert(self.pivot, Rat::zero());
        x
    }

    /// `g(y) = f(x) - f_pivot(x)` with `x` equal to `y` plus a zero at the pivot.
    pub fn g(&self, y: &[Rat]) -> Result<Vec<Rat>> {
        if y.len() != self.dim() {
            return Err(TropError::DimensionMismatch(format!("reduced point of length {}", y.len())));
        }
        let fx = self.f.apply(&self.embed(y));
        let base = fx[self.pivot].clone();
        Ok(fx.into_iter().enumerate().filter(|(i, _)| *i != self.pivot).map(|(_, v)| v - &base).collect())
    }

    /// `λ = f_pivot(x)` at a fixed point `y`.
    pub fn eigenvalue(&self, y: &[Rat]) -> Result<Rat> {
        if y.len() != self.dim() {
            return Err(TropError::DimensionMismatch(format!("reduced point of length {}", y.len())));
        }
        Ok(self.f.apply(&self.embed(y))[self.pivot].clone())
    }

    pub fn is_fixed(&self, y: &[Rat]) -> Result<bool> {
        Ok(self.g(y)? == y)
    }
}

/// `x1' = min(2x1 - x2, 2 + 3x2 - 2x1)`, `x2' = x2`.
pub fn tent_system() -> HomogeneousMap {
    HomogeneousMap::new(vec![
        vec![
            Term::new(rat(0), vec![(0, rat(2)), (1, rat(-1))]),
            Term::new(rat(2), vec![(0, rat(-2)), (1, rat(3))]),
        ],
        vec![Term::shift(rat(0), 1)],
    ])
    .expect("degrees are one")
}

pub fn tent_step(y: &Rat) -> Rat {
    let a = y * rat(2);
    let b = rat(2) - &a;
    a.min(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TentRun {
    /// `y_0, ..., y_K`.
    pub orbit: Vec<Rat>,
    /// Counts of `y_1, ..., y_K` in equal bins over `[0, 1]`.
    pub histogram: Vec<u64>,
}

pub fn bin_of(y: &Rat, bins: usize) -> usize {
    let b = (y * Rat::from_integer(bins.into())).floor().to_integer();
    b.to_usize().unwrap_or(0).min(bins - 1)
}

pub fn tent_trajectory(y0: &Rat, k: usize, bins: usize) -> Result<TentRun> {
    if y0.is_negative() || *y0 > Rat::one() {
        return Err(TropError::InvalidValue(format!("y0 = {} is outside [0, 1]", format_rat(y0))));
    }
    if bins == 0 {
        return Err(TropError::BadConfig("histogram needs at least one bin".into()));
    }
    let mut orbit = Vec::with_capacity(k + 1);
    orbit.push(y0.clone());
    let mut histogram = vec![0u64; bins];
    for _ in 0..k {
        let y = tent_step(orbit.last().unwrap());
        histogram[bin_of(&y, bins)] += 1;
        orbit.push(y);
    }
    Ok(TentRun { orbit, histogram })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingPolicy {
    /// The second road yields to the first at the crossing.
    Priority,
    /// Entrance capacity shared evenly between the roads.
    FiftyFifty,
}

/// Two circular roads sharing one crossing cell.
///
/// Road 1 is cells `1..=n1` and road 2 cells `n1+1..=n1+n2`; cells `n1` and
/// `n1+n2` both stand for the crossing. Cars are given by cell number in
/// `1..n1+n2`, where a car at cell `n1` occupies the crossing.
pub fn build_crossing(n1: usize, n2: usize, cars: &[usize], policy: CrossingPolicy) -> Result<HomogeneousMap> {
    if n1 < 3 || n2 < 3 {
        return Err(TropError::BadConfig("each road needs at least three cells".into()));
    }
    let dim = n1 + n2;
    let mut occ = vec![false; dim + 1];
    for &c in cars {
        if c == 0 || c >= dim {
            return Err(TropError::BadConfig(format!("car position {c} outside 1..{}", dim - 1)));
        }
        if std::mem::replace(&mut occ[c], true) {
            return Err(TropError::BadConfig(format!("two cars at cell {c}")));
        }
    }
    let ac = occ[n1];
    occ[dim] = ac;
    let a = |i: usize| rat(occ[i] as i64);
    let abar = |i: usize| rat(1 - occ[i] as i64);
    let half = Rat::new(1.into(), 2.into());
    let (c1, c2, e1, e2) = (n1, dim, 1usize, n1 + 1);
    // 0-based coordinate of cell i
    let ix = |i: usize| i - 1;
    let mut terms: Vec<Vec<Term>> = vec![vec![]; dim];
    for i in (2..c1).chain(e2 + 1..c2) {
        terms[ix(i)] = vec![Term::shift(a(i - 1), ix(i - 1)), Term::shift(abar(i), ix(i + 1))];
    }
    let free = rat(1 - ac as i64);
    match policy {
        CrossingPolicy::Priority => {
            terms[ix(c1)] = vec![
                Term::new(free.clone(), vec![(ix(e1), rat(1)), (ix(e2), rat(1)), (ix(c2), rat(-1))]),
                Term::shift(a(c1 - 1), ix(c1 - 1)),
            ];
            terms[ix(c2)] = vec![
                Term::new(free, vec![(ix(e1), rat(1)), (ix(e2), rat(1))]).with_current(vec![(ix(c1), rat(-1))]),
                Term::shift(a(c2 - 1), ix(c2 - 1)),
            ];
        }
        CrossingPolicy::FiftyFifty => {
            for (c, prev) in [(c1, c1 - 1), (c2, c2 - 1)] {
                terms[ix(c)] = vec![
                    Term::new(&free * &half, vec![(ix(e1), half.clone()), (ix(e2), half.clone())]),
                    Term::shift(a(prev), ix(prev)),
                ];
            }
        }
    }
    let exit = Term::new(a(c1) * &half, vec![(ix(c1), half.clone()), (ix(c2), half.clone())]);
    terms[ix(e1)] = vec![exit.clone(), Term::shift(abar(e1), ix(e1 + 1))];
    terms[ix(e2)] = vec![exit, Term::shift(abar(e2), ix(e2 + 1))];
    HomogeneousMap::new(terms)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "network", rename_all = "snake_case")]
pub enum Network {
    Ring { cells: usize },
    Crossing { road1: usize, road2: usize, policy: CrossingPolicy },
}

impl Network {
    /// Number of cells cars can occupy.
    pub fn places(&self) -> usize {
        match self {
            Network::Ring { cells } => *cells,
            Network::Crossing { road1, road2, .. } => road1 + road2 - 1,
        }
    }

    /// Builds the map for `cars` vehicles spread evenly; crossing cars alternate roads
    /// and the crossing itself is filled last.
    pub fn build(&self, cars: usize) -> Result<HomogeneousMap> {
        let places = self.places();
        if cars > places {
            return Err(TropError::BadConfig(format!("{cars} cars on {places} places")));
        }
        match self {
            Network::Ring { cells } => {
                let mut bits = vec![false; *cells];
                for t in 0..cars {
                    bits[t * cells / cars] = true;
                }
                road_event_graph(&bits)
            }
            Network::Crossing { road1, road2, policy } => {
                let r1: Vec<usize> = (1..*road1).collect();
                let r2: Vec<usize> = (road1 + 1..road1 + road2).collect();
                let mut order = Vec::with_capacity(r1.len() + r2.len());
                for j in 0..r1.len().max(r2.len()) {
                    order.extend(r1.get(j));
                    order.extend(r2.get(j));
                }
                let l = order.len();
                let mut pos: Vec<usize> = if cars >= l {
                    order
                } else {
                    (0..cars).map(|t| order[t * l / cars]).collect()
                };
                if cars > l {
                    pos.push(*road1);
                }
                build_crossing(*road1, *road2, &pos, *policy)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramPoint {
    /// Requested density.
    #[serde(serialize_with = "crate::io::ser_rat")]
    pub target: Rat,
    pub cars: usize,
    /// Realized density `cars / places`.
    #[serde(serialize_with = "crate::io::ser_rat")]
    pub density: Rat,
    #[serde(serialize_with = "crate::io::ser_rat")]
    pub flow: Rat,
}

/// Car count closest to `rho * places`, halves rounded up.
pub fn cars_for_density(rho: &Rat, places: usize) -> Result<usize> {
    if rho.is_negative() || *rho > Rat::one() {
        return Err(TropError::InvalidValue(format!("density {} outside [0, 1]", format_rat(rho))));
    }
    let x = rho * Rat::from_integer(places.into());
    Ok((x + Rat::new(1.into(), 2.into())).floor().to_integer().to_usize().expect("bounded"))
}

/// Throughput over `steps` steps from the zero state, one run per density.
pub fn fundamental_diagram(net: &Network, densities: &[Rat], steps: usize) -> Result<Vec<DiagramPoint>> {
    let places = net.places();
    densities
        .par_iter()
        .map(|rho| {
            let cars = cars_for_density(rho, places)?;
            let f = net.build(cars)?;
            let flow = hom_throughput(&f, &vec![Rat::zero(); f.dim()], steps)?;
            Ok(DiagramPoint {
                target: rho.clone(),
                cars,
                density: Rat::new(cars.into(), places.into()),
                flow,
            })
        })
        .collect()
}

/// Entry of a 0-homogeneous matrix: min over terms, 𝟘 (+∞) when empty.
pub type ZeroHomEntry = Vec<Term>;

fn eval_entry(e: &ZeroHomEntry, u: &[Rat]) -> Ext {
    e.iter().map(|t| t.eval(u, &[])).min()
}

/// `u' = C ⊗ u`, `x' = A(u) ⊗ x ⊕ B(u) ⊗ u` over min-plus.
#[derive(Clone, Debug, PartialEq)]
pub struct T1HSystem {
    pub c: TropMatrix,
    pub a: Vec<Vec<ZeroHomEntry>>,
    pub b: Vec<Vec<ZeroHomEntry>>,
    pub u0: Vec<Rat>,
    pub x0: Vec<Rat>,
}

impl T1HSystem {
    pub fn new(c: TropMatrix, a: Vec<Vec<ZeroHomEntry>>, b: Vec<Vec<ZeroHomEntry>>, u0: Vec<Rat>, x0: Vec<Rat>) -> Result<Self> {
        if c.tag() != SemiringTag::MinPlus || !c.is_square() {
            return Err(TropError::BadConfig("C must be a square min-plus matrix".into()));
        }
        let (p, n) = (c.rows(), x0.len());
        if u0.len() != p {
            return Err(TropError::DimensionMismatch(format!("u0 has length {}, C is {p}x{p}", u0.len())));
        }
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(TropError::DimensionMismatch(format!("A must be {n}x{n}")));
        }
        if b.len() != n || b.iter().any(|r| r.len() != p) {
            return Err(TropError::DimensionMismatch(format!("B must be {n}x{p}")));
        }
        for t in a.iter().chain(&b).flatten().flatten() {
            if !t.degree().is_zero() || !t.current.is_empty() {
                return Err(TropError::BadConfig("A(u) and B(u) entries must be 0-homogeneous in u".into()));
            }
            if t.exponents.iter().any(|(j, _)| *j >= p) {
                return Err(TropError::BadConfig("A(u) or B(u) references a missing u coordinate".into()));
            }
        }
        Ok(T1HSystem { c, a, b, u0, x0 })
    }

    pub fn a_at(&self, u: &[Rat]) -> TropMatrix {
        let n = self.x0.len();
        let data = self.a.iter().flat_map(|r| r.iter().map(|e| eval_entry(e, u))).collect();
        TropMatrix::new(SemiringTag::MinPlus, n, n, data).expect("shape checked")
    }

    fn step(&self, u: &[Rat], x: &[Rat]) -> Result<(Vec<Rat>, Vec<Rat>)> {
        let nu: Vec<Rat> = (0..u.len())
            .map(|i| {
                (0..u.len())
                    .filter_map(|j| self.c.at(i, j).as_ref().map(|c| c + &u[j]))
                    .min()
                    .ok_or_else(|| TropError::Diverged(format!("u coordinate {i} became +inf")))
            })
            .collect::<Result<_>>()?;
        let nx: Vec<Rat> = (0..x.len())
            .map(|i| {
                let from_x = self.a[i].iter().zip(x).filter_map(|(e, xj)| eval_entry(e, u).map(|c| c + xj));
                let from_u = self.b[i].iter().zip(u).filter_map(|(e, uj)| eval_entry(e, u).map(|c| c + uj));
                from_x
                    .chain(from_u)
                    .min()
                    .ok_or_else(|| TropError::Diverged(format!("x coordinate {i} became +inf")))
            })
            .collect::<Result<_>>()?;
        Ok((nu, nx))
    }
}

/// `u_{k+p} = u_k + growth` for all `k >= start`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Periodicity {
    pub start: usize,
    pub period: usize,
    #[serde(serialize_with = "crate::io::ser_rat")]
    pub growth: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct T1HRun {
    pub u: Vec<Vec<Rat>>,
    pub x: Vec<Vec<Rat>>,
    pub periodicity: Option<Periodicity>,
}

impl T1HRun {
    pub fn steps(&self) -> usize {
        self.x.len() - 1
    }

    /// Average growth rate of the given x coordinates over the second half.
    pub fn rate(&self, coords: &[usize]) -> Rat {
        let k = self.steps();
        let early: Vec<Rat> = coords.iter().map(|&i| self.x[k / 2][i].clone()).collect();
        let late: Vec<Rat> = coords.iter().map(|&i| self.x[k][i].clone()).collect();
        throughput(&early, &late, k - k / 2)
    }
}

fn detect_period(u: &[Vec<Rat>]) -> Option<Periodicity> {
    let k = u.len() - 1;
    for p in 1..=k / 3 {
        let shift = |t: usize| -> Option<Rat> {
            let d = &u[t + p][0] - &u[t][0];
            u[t + p].iter().zip(&u[t]).all(|(a, b)| a - b == d).then_some(d)
        };
        // scan back from the end for the start of the periodic regime
        let Some(growth) = shift(k - p) else { continue };
        let mut start = k - p;
        while start > 0 && shift(start - 1).as_ref() == Some(&growth) {
            start -= 1;
        }
        if k - start >= 2 * p {
            return Some(Periodicity { start, period: p, growth });
        }
    }
    None
}

pub fn t1h_simulate(s: &T1HSystem, k: usize) -> Result<T1HRun> {
    if k < 2 {
        return Err(TropError::BadConfig("at least two steps are needed".into()));
    }
    let mut u = vec![s.u0.clone()];
    let mut x = vec![s.x0.clone()];
    let bound = rat(DEFAULT_SPREAD_BOUND);
    for step in 1..=k {
        let (nu, nx) = s.step(u.last().unwrap(), x.last().unwrap())?;
        if spread(&nx) > bound {
            return Err(TropError::Diverged(format!("x spread exceeds {DEFAULT_SPREAD_BOUND} at step {step}")));
        }
        u.push(nu);
        x.push(nx);
    }
    let periodicity = detect_period(&u);
    Ok(T1HRun { u, x, periodicity })
}

/// Two circular roads controlled by a four-phase traffic light.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficLight {
    pub system: T1HSystem,
    /// Green-light entries for road 1 and road 2.
    pub a0: ZeroHomEntry,
    pub b0: ZeroHomEntry,
    pub road1: Vec<usize>,
    pub road2: Vec<usize>,
    /// Light cycle length in steps.
    pub cycle: usize,
}

fn circular_entries(a: &[bool], offset: usize, rows: &mut [Vec<ZeroHomEntry>]) {
    let m = a.len();
    for i in 0..m {
        let prev = (i + m - 1) % m;
        let next = (i + 1) % m;
        rows[offset + i][offset + prev].push(Term::new(rat(a[prev] as i64), vec![]));
        rows[offset + i][offset + next].push(Term::new(rat(1 - a[i] as i64), vec![]));
    }
}

/// Light ring with phase durations `d` (green 1, amber 1, green 2, amber 2), and
/// one token; `a0(u) = 1 + u1 - u2`, `b0(u) = u3 - u4` with `u1..u4` the phase
/// start transitions. The last cell of each road waits at the light.
pub fn traffic_light(road1: &[bool], road2: &[bool], durations: [usize; 4]) -> Result<TrafficLight> {
    if road1.len() < 3 || road2.len() < 3 {
        return Err(TropError::BadConfig("each road needs at least three cells".into()));
    }
    if durations.contains(&0) {
        return Err(TropError::BadConfig("phase durations must be positive".into()));
    }
    let d: usize = durations.iter().sum();
    // transition t fires into place t; the token starts in place 0
    let mut c = TropMatrix::zeros(SemiringTag::MinPlus, d, d);
    for t in 0..d {
        let from = (t + d - 1) % d;
        let marking = if from == 0 { 1 } else { 0 };
        c.set(t, from, Some(rat(marking)))?;
    }
    let starts = [0, durations[0], durations[0] + durations[1], durations[0] + durations[1] + durations[2]];
    let a0: ZeroHomEntry = vec![Term::new(rat(1), vec![(starts[0], rat(1)), (starts[1], rat(-1))])];
    let b0: ZeroHomEntry = vec![Term::new(rat(0), vec![(starts[2], rat(1)), (starts[3], rat(-1))])];
    let (m1, m2) = (road1.len(), road2.len());
    let n = m1 + m2;
    let mut a: Vec<Vec<ZeroHomEntry>> = vec![vec![vec![]; n]; n];
    circular_entries(road1, 0, &mut a);
    circular_entries(road2, m1, &mut a);
    a[m1 - 1][m1 - 1] = a0.clone();
    a[n - 1][n - 1] = b0.clone();
    let b = vec![vec![vec![]; d]; n];
    let system = T1HSystem::new(c, a, b, vec![Rat::zero(); d], vec![Rat::zero(); n])?;
    Ok(TrafficLight { system, a0, b0, road1: (0..m1).collect(), road2: (m1..n).collect(), cycle: d })
}

impl TrafficLight {
    /// `(a0(u_k), b0(u_k))` along the run.
    pub fn phases(&self, run: &T1HRun) -> Vec<(Rat, Rat)> {
        run.u
            .iter()
            .map(|u| (eval_entry(&self.a0, u).unwrap(), eval_entry(&self.b0, u).unwrap()))
            .collect()
    }

    /// Min-plus eigenvalue of `A₁(u^{s+D-1}) ⋯ A₁(u^s)` over one light cycle
    /// starting at step `s`, restricted to road 1.
    pub fn cycle_eigenvalue(&self, run: &T1HRun, s: usize) -> Result<Rat> {
        let idx = &self.road1;
        let m = idx.len();
        let mut prod = TropMatrix::identity(SemiringTag::MinPlus, m);
        for k in s..s + self.cycle {
            let full = self.system.a_at(&run.u[k]);
            let data = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| full.at(i, j).clone()).collect();
            let sub = TropMatrix::new(SemiringTag::MinPlus, m, m, data)?;
            prod = mat_mul(&sub, &prod)?;
        }
        let lambda = spectral::max_cycle_mean(&prod)?;
        Ok(lambda.into_value().expect("finite cycle mean"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::ratio;

    #[test]
    fn exclusion_examples() {
        let w = RingWord::parse("1101001001").unwrap();
        assert_eq!(w.step().0.to_string(), "1010100101");
        let w = RingWord::parse("1010").unwrap();
        let (next, moved) = w.step();
        assert_eq!((next.to_string(), moved), ("0101".to_string(), 2));
        let run = exclusion_run(&RingWord::parse("0000").unwrap(), 3);
        assert!(run.flows.iter().all(|f| f.is_zero()));
        assert_eq!(run.words[3].to_string(), "0000");
    }

    #[test]
    fn road_eigenvalues() {
        let lam = |bits: &[bool]| spectral::max_cycle_mean(&road_matrix(bits).unwrap()).unwrap().into_value().unwrap();
        assert_eq!(lam(&[true, false, false, false]), ratio(1, 4));
        assert_eq!(lam(&[true, false]), ratio(1, 2));
        assert_eq!(lam(&[false, false, false]), rat(0));
        let f = road_event_graph(&[true, false, false, false]).unwrap();
        let run = hom_iterate(&f, &vec![rat(0); 4], 64).unwrap();
        assert_eq!(run.throughput, ratio(1, 4));
    }

    #[test]
    fn identity_map_has_zero_throughput() {
        let f = HomogeneousMap::new(vec![vec![Term::shift(rat(0), 0)], vec![Term::shift(rat(0), 1)]]).unwrap();
        assert_eq!(hom_iterate(&f, &[rat(3), rat(-1)], 10).unwrap().throughput, rat(0));
    }

    #[test]
    fn tent_reduction() {
        let f = tent_system();
        let run = hom_iterate(&f, &[rat(0), rat(0)], 20).unwrap();
        assert_eq!(run.throughput, rat(0));
        let g = eigen_reduce(&f, 1).unwrap();
        for y in [rat(0), ratio(2, 3)] {
            assert!(g.is_fixed(std::slice::from_ref(&y)).unwrap());
            assert_eq!(g.eigenvalue(&[y]).unwrap(), rat(0));
        }
        for k in 0..=20 {
            let y = ratio(k, 20);
            assert_eq!(g.g(std::slice::from_ref(&y)).unwrap(), vec![tent_step(&y)]);
        }
    }

    #[test]
    fn reduce_linear_map() {
        // min-plus 2x2 with eigenvector (0, -1)
        let a = TropMatrix::from_ints(SemiringTag::MinPlus, &[vec![None, Some(0)], vec![Some(-2), None]]).unwrap();
        let f = HomogeneousMap::from_min_plus(&a).unwrap();
        let g = eigen_reduce(&f, 0).unwrap();
        assert!(g.is_fixed(&[rat(-1)]).unwrap());
        assert_eq!(g.eigenvalue(&[rat(-1)]).unwrap(), rat(-1));
        assert_eq!(spectral::max_cycle_mean(&a).unwrap().into_value().unwrap(), rat(-1));
        let one = HomogeneousMap::new(vec![vec![Term::shift(rat(5), 0)]]).unwrap();
        let g = eigen_reduce(&one, 0).unwrap();
        assert_eq!((g.dim(), g.eigenvalue(&[]).unwrap()), (0, rat(5)));
    }

    #[test]
    fn tent_orbits() {
        let run = tent_trajectory(&ratio(1, 5), 4, 10).unwrap();
        assert_eq!(run.orbit, vec![ratio(1, 5), ratio(2, 5), ratio(4, 5), ratio(2, 5), ratio(4, 5)]);
        assert!(tent_trajectory(&rat(0), 5, 4).unwrap().orbit.iter().all(|y| y.is_zero()));
        assert!(tent_trajectory(&ratio(2, 3), 5, 4).unwrap().orbit.iter().all(|y| *y == ratio(2, 3)));
    }

    #[test]
    fn crossing_is_homogeneous() {
        for policy in [CrossingPolicy::Priority, CrossingPolicy::FiftyFifty] {
            let f = build_crossing(4, 4, &[1, 3, 6], policy).unwrap();
            let x: Vec<Rat> = (0..8).map(|i| ratio(i * 3 % 7, 2)).collect();
            let shifted: Vec<Rat> = x.iter().map(|v| v + ratio(5, 3)).collect();
            let fx: Vec<Rat> = f.apply(&x).iter().map(|v| v + ratio(5, 3)).collect();
            assert_eq!(f.apply(&shifted), fx);
        }
        assert!(matches!(build_crossing(4, 4, &[2, 2], CrossingPolicy::Priority), Err(TropError::BadConfig(_))));
    }

    #[test]
    fn traffic_light_phases() {
        let road = [true, false, false, true, false, false];
        let tl = traffic_light(&road, &road, [1, 1, 1, 1]).unwrap();
        let run = t1h_simulate(&tl.system, 8).unwrap();
        let ph = tl.phases(&run);
        let want = [(1, 0), (0, 0), (0, 1), (0, 0)];
        for (k, (a, b)) in ph.iter().take(8).enumerate() {
            assert_eq!((a.clone(), b.clone()), (rat(want[k % 4].0), rat(want[k % 4].1)));
        }
    }

    #[test]
    fn ring_diagram_matches_law() {
        let net = Network::Ring { cells: 10 };
        let rhos: Vec<Rat> = (0..=10).map(|k| ratio(k, 10)).collect();
        for p in fundamental_diagram(&net, &rhos, 80).unwrap() {
            let rho = p.density.clone();
            let law = rho.clone().min(Rat::one() - &rho);
            assert_eq!(p.flow, law, "rho = {}", format_rat(&rho));
        }
    }
}
