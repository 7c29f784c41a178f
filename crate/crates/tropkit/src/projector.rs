//! Projectors onto finitely generated max-plus semimodules, cyclic projectors
//! and separation of several semimodules by halfspaces.

use crate::error::{Result, TropError};
use crate::semiring::{ext_cmp, ext_max, Ext, Rat, SemiringTag, TropScalar};
use crate::tropmat::{mat_residual_left, TropMatrix, TropVector};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

/// Largest dimension for which all supports are enumerated.
pub const MAX_CERTIFIED_DIM: usize = 12;
const MAX_PERIOD: usize = 24;
const MAX_STEPS: usize = 3000;

#[derive(Clone, Debug, PartialEq)]
pub struct Semimodule {
    gens: TropMatrix,
}

impl Semimodule {
    pub fn new(generators: TropMatrix) -> Result<Self> {
        if let Some(j) = (0..generators.cols()).find(|&j| generators.col(j).is_zero()) {
            return Err(TropError::ZeroColumn(j));
        }
        Ok(Semimodule { gens: generators })
    }

    pub fn from_vectors(gens: &[TropVector]) -> Result<Self> {
        let first = gens.first().ok_or_else(|| TropError::DimensionMismatch("no generators".into()))?;
        Self::new(TropMatrix::from_columns(first.tag(), first.len(), gens)?)
    }

    pub fn generators(&self) -> &TropMatrix {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn tag(&self) -> SemiringTag {
        self.gens.tag()
    }

    pub fn project(&self, x: &TropVector) -> Result<TropVector> {
        project(self, x)
    }

    pub fn contains(&self, x: &TropVector) -> Result<bool> {
        Ok(&project(self, x)? == x)
    }
}

/// `P_V(x) = V ⊗ (V\x)`, the greatest element of V below x.
pub fn project(v: &Semimodule, x: &TropVector) -> Result<TropVector> {
    let l = mat_residual_left(&v.gens, x)?;
    v.gens.mul_vec(&l)
}

/// Orbit `x¹ = P₁x⁰, x² = P₂x¹, ...` over `sweeps` full cycles.
pub fn cyclic_orbit(vs: &[Semimodule], x0: &TropVector, sweeps: usize) -> Result<Vec<TropVector>> {
    let mut out = Vec::with_capacity(vs.len() * sweeps);
    let mut x = x0.clone();
    for _ in 0..sweeps {
        for v in vs {
            x = project(v, &x)?;
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// `x/y = max{c : c ⊗ y <= x}`; `None` is 𝟘.
pub fn vec_residual(x: &TropVector, y: &TropVector) -> Result<Ext> {
    if x.len() != y.len() {
        return Err(TropError::DimensionMismatch(format!("lengths {} and {}", x.len(), y.len())));
    }
    if y.is_zero() {
        return Err(TropError::EmptySupport);
    }
    Ok(vres(x.entries(), y.entries()))
}

fn vres(x: &[Ext], y: &[Ext]) -> Ext {
    let mut m: Option<Rat> = None;
    for (xi, yi) in x.iter().zip(y) {
        let Some(yi) = yi else { continue };
        let xi = xi.as_ref()?;
        let d = xi - yi;
        if m.as_ref().is_none_or(|m| d < *m) {
            m = Some(d);
        }
    }
    m
}

/// `(x¹/x²) ⊗ (x²/x³) ⊗ ... ⊗ (x^k/x¹)`.
pub fn hilbert_value(xs: &[TropVector]) -> Result<TropScalar> {
    let first = xs.first().ok_or(TropError::EmptySupport)?;
    let mut total = Some(Rat::zero());
    for i in 0..xs.len() {
        let r = vec_residual(&xs[i], &xs[(i + 1) % xs.len()])?;
        total = crate::semiring::ext_plus(&total, &r);
    }
    TropScalar::from_ext(first.tag(), total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HilbertReport {
    pub value: TropScalar,
    /// `x̄^i = P_i ⋯ P_1 y` for a sub-eigenvector y; empty when the value is 𝟘.
    pub witness_vectors: Vec<TropVector>,
    pub support_set: Vec<usize>,
    /// True when every support was examined and an upper bound matched.
    pub certified: bool,
}

/// Raw max-plus form of a list of semimodules.
struct Cyclic {
    n: usize,
    mods: Vec<Vec<Vec<Ext>>>,
}

impl Cyclic {
    fn new(vs: &[Semimodule]) -> Result<Self> {
        let first = vs.first().ok_or_else(|| TropError::DimensionMismatch("no semimodules".into()))?;
        let n = first.dim();
        for v in vs {
            if v.tag() != SemiringTag::MaxPlus {
                return Err(TropError::UnsupportedTag(v.tag()));
            }
            if v.dim() != n {
                return Err(TropError::DimensionMismatch(format!("ambient dimensions {n} and {}", v.dim())));
            }
        }
        let mods = vs.iter().map(|v| v.gens.columns().into_iter().map(|c| c.into_entries()).collect()).collect();
        Ok(Cyclic { n, mods })
    }

    fn proj(gens: &[Vec<Ext>], x: &[Ext]) -> Vec<Ext> {
        let mut y: Vec<Ext> = vec![None; x.len()];
        for g in gens {
            let Some(c) = vres(x, g) else { continue };
            for (yi, gi) in y.iter_mut().zip(g) {
                if let Some(gi) = gi {
                    *yi = ext_max(yi, &Some(gi + &c));
                }
            }
        }
        y
    }

    fn apply(&self, x: &[Ext]) -> Vec<Ext> {
        let mut x = x.to_vec();
        for g in &self.mods {
            x = Self::proj(g, &x);
        }
        x
    }

    fn chain(&self, y: &[Ext]) -> Vec<Vec<Ext>> {
        let mut out = Vec::with_capacity(self.mods.len());
        let mut x = y.to_vec();
        for g in &self.mods {
            x = Self::proj(g, &x);
            out.push(x.clone());
        }
        out
    }
}

/// Eventually periodic orbit data: `x^{t+p} = η ⊗ x^t` for `t >= start`.
struct Periodic {
    hist: Vec<Vec<Ext>>,
    start: usize,
    period: usize,
    eta: Vec<Ext>,
}

fn diff(a: &[Ext], b: &[Ext]) -> Option<Vec<Ext>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (None, None) => Some(None),
            (Some(x), Some(y)) => Some(Some(x - y)),
            _ => None,
        })
        .collect()
}

/// First apparent period detected at time `t >= min_t`.
fn find_period(f: &Cyclic, x0: Vec<Ext>, min_t: usize) -> Result<Periodic> {
    let mut hist = vec![x0];
    for t in 1..MAX_STEPS {
        let next = f.apply(&hist[t - 1]);
        hist.push(next);
        if t < min_t {
            continue;
        }
        for p in 1..=MAX_PERIOD {
            if 3 * p > t {
                break;
            }
            let Some(d1) = diff(&hist[t], &hist[t - p]) else { continue };
            if diff(&hist[t - p], &hist[t - 2 * p]).as_ref() != Some(&d1) {
                continue;
            }
            if diff(&hist[t - 2 * p], &hist[t - 3 * p]).as_ref() != Some(&d1) {
                continue;
            }
            return Ok(Periodic { hist, start: t - p, period: p, eta: d1 });
        }
    }
    Err(TropError::TooLarge(format!(
        "cyclic projector orbit not periodic within {MAX_STEPS} steps and period {MAX_PERIOD}"
    )))
}

struct SupportValue {
    value: Rat,
    witnesses: Vec<Vec<Ext>>,
    sub_eigen: Vec<Ext>,
    /// Growth rate bound from the full-support orbit.
    upper: Option<Rat>,
}

fn int(n: usize) -> Rat {
    Rat::from_integer((n as i64).into())
}

/// Per-support value; an apparent period seen too early (still in the transient)
/// fails the exact checks, and detection is retried later in the orbit.
fn support_value(f: &Cyclic, mask: u32, with_upper: bool, min_t: usize) -> Result<Option<SupportValue>> {
    let mut min_t = min_t;
    loop {
        match support_value_at(f, mask, with_upper, min_t) {
            Err(TropError::CertificateInvalid(_)) if 2 * min_t + 8 < MAX_STEPS => min_t = 2 * min_t + 8,
            other => return other,
        }
    }
}

fn support_value_at(f: &Cyclic, mask: u32, with_upper: bool, min_t: usize) -> Result<Option<SupportValue>> {
    let n = f.n;
    let x0: Vec<Ext> = (0..n).map(|i| if mask >> i & 1 == 1 { Some(Rat::zero()) } else { None }).collect();
    let per = find_period(f, x0, min_t)?;
    let s: Vec<usize> = (0..n).filter(|&i| per.eta[i].is_some()).collect();
    if s.is_empty() {
        return Ok(None);
    }
    let p = per.period;
    let rates: Vec<Rat> = s.iter().map(|&i| per.eta[i].clone().unwrap() / int(p)).collect();
    let rho = rates.iter().min().unwrap().clone();
    let mut y: Vec<Ext> = vec![None; n];
    for k in 0..p {
        let shift = &rho * int(k);
        for &i in &s {
            let v = per.hist[per.start + k][i].as_ref().map(|v| v - &shift);
            y[i] = ext_max(&y[i], &v);
        }
    }
    let fy = f.apply(&y);
    for &i in &s {
        let ok = match (&fy[i], &y[i]) {
            (Some(a), Some(b)) => *a >= &rho + b,
            _ => false,
        };
        if !ok {
            return Err(TropError::CertificateInvalid("sub-eigenvector check failed".into()));
        }
    }
    let witnesses = f.chain(&y);
    let value = cyc_hilbert(&witnesses).ok_or_else(|| TropError::CertificateInvalid("witness value is bottom".into()))?;
    if value < rho {
        return Err(TropError::CertificateInvalid("witness value below the growth rate".into()));
    }
    let upper = if with_upper {
        let mu = rates.iter().max().unwrap().clone();
        let mut z: Vec<Ext> = vec![None; n];
        for k in 0..p {
            let shift = &mu * int(k);
            for &i in &s {
                let v = per.hist[per.start + k][i].as_ref().unwrap() - &shift;
                z[i] = Some(match &z[i] {
                    Some(c) if *c <= v => c.clone(),
                    _ => v,
                });
            }
        }
        let fz = f.apply(&z);
        let ok = (0..n).all(|i| match (&fz[i], &z[i]) {
            (None, _) => true,
            (Some(a), Some(b)) => *a <= &mu + b,
            (Some(_), None) => false,
        });
        ok.then_some(mu)
    } else {
        None
    };
    Ok(Some(SupportValue { value, witnesses, sub_eigen: y, upper }))
}

fn cyc_hilbert(xs: &[Vec<Ext>]) -> Option<Rat> {
    let mut total = Rat::zero();
    for i in 0..xs.len() {
        total += vres(&xs[i], &xs[(i + 1) % xs.len()])?;
    }
    Some(total)
}

struct Radius {
    report: HilbertReport,
    sub_eigen: Option<Vec<Ext>>,
}

fn radius(vs: &[Semimodule]) -> Result<Radius> {
    let f = Cyclic::new(vs)?;
    let n = f.n;
    let full: u32 = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
    let masks: Vec<u32> = if n <= MAX_CERTIFIED_DIM { (1..=full).collect() } else { vec![full] };
    // lengthen the observed orbits until the bounds meet
    let mut min_t = 0;
    loop {
        let r = radius_at(&f, &masks, full, min_t)?;
        if r.report.certified || n > MAX_CERTIFIED_DIM || 2 * min_t + 8 >= MAX_STEPS {
            return Ok(r);
        }
        min_t = 2 * min_t + 8;
    }
}

fn radius_at(f: &Cyclic, masks: &[u32], full: u32, min_t: usize) -> Result<Radius> {
    let n = f.n;
    let results: Vec<(u32, Option<SupportValue>)> = masks
        .par_iter()
        .map(|&m| support_value(f, m, m == full, min_t).map(|r| (m, r)))
        .collect::<Result<_>>()?;
    let upper = results.iter().find(|(m, _)| *m == full).and_then(|(_, r)| r.as_ref()).and_then(|r| r.upper.clone());
    let mut best: Option<(u32, SupportValue)> = None;
    for (m, r) in results {
        let Some(r) = r else { continue };
        // ties keep the smallest mask for determinism
        if best.as_ref().is_none_or(|(_, b)| r.value > b.value) {
            best = Some((m, r));
        }
    }
    let tag = SemiringTag::MaxPlus;
    let Some((mask, b)) = best else {
        // every orbit reaches 𝟘
        return Ok(Radius {
            report: HilbertReport {
                value: TropScalar::bottom(tag),
                witness_vectors: vec![],
                support_set: vec![],
                certified: n <= MAX_CERTIFIED_DIM,
            },
            sub_eigen: None,
        });
    };
    let certified = n <= MAX_CERTIFIED_DIM && upper.as_ref() == Some(&b.value);
    Ok(Radius {
        report: HilbertReport {
            value: TropScalar::new(tag, b.value).expect("finite"),
            witness_vectors: b.witnesses.into_iter().map(|w| TropVector::raw(tag, w)).collect(),
            support_set: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
            certified,
        },
        sub_eigen: Some(b.sub_eigen),
    })
}

/// Spectral radius of `P_k ∘ ... ∘ P_1`, maximized over supports.
pub fn cyclic_spectral_radius(vs: &[Semimodule]) -> Result<HilbertReport> {
    Ok(radius(vs)?.report)
}

/// `{x : u/x >= v/x} ∪ {𝟘}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Halfspace {
    pub u: TropVector,
    pub v: TropVector,
}

impl Halfspace {
    pub fn contains(&self, x: &TropVector) -> Result<bool> {
        if x.is_zero() {
            return Ok(true);
        }
        let a = vec_residual(&self.u, x)?;
        let b = vec_residual(&self.v, x)?;
        Ok(ext_cmp(&a, &b) != Ordering::Less)
    }
}

/// Halfspaces `H_i ⊇ V_i` with trivial intersection, or a common nonzero point.
pub fn separate(vs: &[Semimodule]) -> Result<Vec<Halfspace>> {
    let r = radius(vs)?;
    let f = Cyclic::new(vs)?;
    let n = f.n;
    let (mu, c) = match r.report.value.value() {
        Some(rho) if rho.is_zero() => {
            let y = r.sub_eigen.expect("finite radius has a sub-eigenvector");
            let w = f.apply(&y);
            return Err(TropError::NotSeparable { witness: TropVector::raw(SemiringTag::MaxPlus, w) });
        }
        Some(rho) if *rho > Rat::zero() => {
            return Err(TropError::CertificateInvalid("cyclic projector radius above zero".into()));
        }
        Some(rho) => (rho / int(2), -rho.clone()),
        None => (-Rat::from_integer(1.into()), Rat::from_integer(2.into())),
    };
    // G(x) = F(x) ⊕ (x - c) grows at rate < μ from a finite start
    let g = |x: &[Ext]| -> Vec<Ext> {
        let fx = f.apply(x);
        fx.iter().zip(x).map(|(a, b)| ext_max(a, &b.as_ref().map(|b| b - &c))).collect()
    };
    let mut orbit: Vec<Vec<Ext>> = vec![vec![Some(Rat::zero()); n]];
    let mut steps = n.max(4);
    while steps <= 1 << 16 {
        while orbit.len() <= steps {
            let next = g(orbit.last().unwrap());
            orbit.push(next);
        }
        let mut z: Vec<Rat> = vec![Rat::zero(); n];
        for (s, x) in orbit.iter().enumerate() {
            let shift = &mu * int(s);
            for i in 0..n {
                let v = x[i].as_ref().expect("orbit stays finite") - &shift;
                if v < z[i] {
                    z[i] = v;
                }
            }
        }
        let z: Vec<Ext> = z.into_iter().map(Some).collect();
        let fz = f.apply(&z);
        let ok = fz.iter().zip(&z).all(|(a, b)| match (a, b) {
            (None, _) => true,
            (Some(a), Some(b)) => *a <= &mu + b,
            _ => false,
        });
        if ok {
            let mut prev = z.clone();
            let mut out = Vec::with_capacity(vs.len());
            for u in f.chain(&z) {
                out.push(Halfspace {
                    u: TropVector::raw(SemiringTag::MaxPlus, u.clone()),
                    v: TropVector::raw(SemiringTag::MaxPlus, prev),
                });
                prev = u;
            }
            return Ok(out);
        }
        steps *= 2;
    }
    Err(TropError::TooLarge("super-eigenvector search did not terminate".into()))
}
