//! Scalar arithmetic over the tagged idempotent semirings, with residuation,
//! scalar star and endpoint-exact interval operations.
//!
//! Values are exact rationals. The semiring zero is stored as `None` for every
//! tag, so `0` in max-times and `false` in the Boolean semiring are both `None`.
//! Boolean `true` is stored as the rational 1.

use crate::error::{Result, TropError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

pub type Rat = BigRational;

/// Raw semiring entry; `None` is the semiring zero.
pub type Ext = Option<Rat>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `-1.25`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || TropError::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rat::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    if s.contains(['e', 'E']) {
        return Err(bad());
    }
    s.parse::<BigInt>().map(Rat::from_integer).map_err(|_| bad())
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// max with `None` as the least element.
pub(crate) fn ext_max(a: &Ext, b: &Ext) -> Ext {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(if x >= y { x.clone() } else { y.clone() }),
    }
}

/// min with `None` as the greatest element.
pub(crate) fn ext_min_top(a: &Ext, b: &Ext) -> Ext {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
    }
}

pub(crate) fn ext_plus(a: &Ext, b: &Ext) -> Ext {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

/// Order with `None` below every rational (max-plus reading).
pub(crate) fn ext_cmp(a: &Ext, b: &Ext) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

pub(crate) fn ext_neg(a: &Ext) -> Ext {
    a.as_ref().map(|x| -x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemiringTag {
    MaxPlus,
    MinPlus,
    MaxTimes,
    Boolean,
}

impl fmt::Display for SemiringTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl SemiringTag {
    pub fn name(self) -> &'static str {
        match self {
            SemiringTag::MaxPlus => "max-plus",
            SemiringTag::MinPlus => "min-plus",
            SemiringTag::MaxTimes => "max-times",
            SemiringTag::Boolean => "boolean",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "max-plus" => Ok(SemiringTag::MaxPlus),
            "min-plus" => Ok(SemiringTag::MinPlus),
            "max-times" => Ok(SemiringTag::MaxTimes),
            "boolean" => Ok(SemiringTag::Boolean),
            _ => Err(TropError::Parse(format!("unknown semiring {s:?}"))),
        }
    }

    pub fn one(self) -> Ext {
        match self {
            SemiringTag::MaxPlus | SemiringTag::MinPlus => Some(Rat::zero()),
            SemiringTag::MaxTimes | SemiringTag::Boolean => Some(Rat::one()),
        }
    }

    pub fn add(self, a: &Ext, b: &Ext) -> Ext {
        match self {
            SemiringTag::MinPlus => ext_min_top(a, b),
            _ => ext_max(a, b),
        }
    }

    pub fn mul(self, a: &Ext, b: &Ext) -> Ext {
        match (a, b) {
            (Some(x), Some(y)) => Some(match self {
                SemiringTag::MaxPlus | SemiringTag::MinPlus => x + y,
                SemiringTag::MaxTimes => x * y,
                SemiringTag::Boolean => Rat::one(),
            }),
            _ => None,
        }
    }

    /// Canonical order: `a <= b` iff `a ⊕ b = b`.
    pub fn le(self, a: &Ext, b: &Ext) -> bool {
        self.add(a, b) == *b
    }

    /// Validates a raw value for this tag and normalizes the zero to `None`.
    pub fn normalize(self, v: Ext) -> Result<Ext> {
        let Some(x) = v else { return Ok(None) };
        match self {
            SemiringTag::MaxPlus | SemiringTag::MinPlus => Ok(Some(x)),
            SemiringTag::MaxTimes => {
                if x.is_negative() {
                    Err(TropError::InvalidValue(format!(
                        "max-times values are nonnegative, got {}",
                        format_rat(&x)
                    )))
                } else if x.is_zero() {
                    Ok(None)
                } else {
                    Ok(Some(x))
                }
            }
            SemiringTag::Boolean => {
                if x.is_zero() {
                    Ok(None)
                } else if x.is_one() {
                    Ok(Some(x))
                } else {
                    Err(TropError::InvalidValue(format!(
                        "boolean values are 0 or 1, got {}",
                        format_rat(&x)
                    )))
                }
            }
        }
    }

    /// Text form of the zero element.
    pub fn bottom_token(self) -> &'static str {
        match self {
            SemiringTag::MaxPlus => "-inf",
            SemiringTag::MinPlus => "+inf",
            SemiringTag::MaxTimes | SemiringTag::Boolean => "0",
        }
    }

    pub fn format(self, v: &Ext) -> String {
        match v {
            None => self.bottom_token().to_string(),
            Some(x) => format_rat(x),
        }
    }

    fn same(self, other: SemiringTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(TropError::TagMismatch(self, other))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TropScalar {
    tag: SemiringTag,
    value: Ext,
}

impl fmt::Display for TropScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag.format(&self.value))
    }
}

impl TropScalar {
    pub fn new(tag: SemiringTag, value: Rat) -> Result<Self> {
        Ok(TropScalar { tag, value: tag.normalize(Some(value))? })
    }

    pub fn from_ext(tag: SemiringTag, value: Ext) -> Result<Self> {
        Ok(TropScalar { tag, value: tag.normalize(value)? })
    }

    pub fn int(tag: SemiringTag, n: i64) -> Result<Self> {
        Self::new(tag, rat(n))
    }

    pub fn bottom(tag: SemiringTag) -> Self {
        TropScalar { tag, value: None }
    }

    pub fn one(tag: SemiringTag) -> Self {
        TropScalar { tag, value: tag.one() }
    }

    pub fn tag(&self) -> SemiringTag {
        self.tag
    }

    pub fn value(&self) -> &Ext {
        &self.value
    }

    pub fn into_value(self) -> Ext {
        self.value
    }

    pub fn is_bottom(&self) -> bool {
        self.value.is_none()
    }

    /// Canonical semiring order.
    pub fn le(&self, other: &TropScalar) -> Result<bool> {
        self.tag.same(other.tag)?;
        Ok(self.tag.le(&self.value, &other.value))
    }
}

pub fn sr_add(a: &TropScalar, b: &TropScalar) -> Result<TropScalar> {
    a.tag.same(b.tag)?;
    Ok(TropScalar { tag: a.tag, value: a.tag.add(&a.value, &b.value) })
}

pub fn sr_mul(a: &TropScalar, b: &TropScalar) -> Result<TropScalar> {
    a.tag.same(b.tag)?;
    Ok(TropScalar { tag: a.tag, value: a.tag.mul(&a.value, &b.value) })
}

/// Largest `l` with `l ⊗ y <= x`.
pub fn sr_residual(x: &TropScalar, y: &TropScalar) -> Result<TropScalar> {
    x.tag.same(y.tag)?;
    let tag = x.tag;
    let value = residual_ext(tag, &x.value, &y.value)?;
    Ok(TropScalar { tag, value })
}

pub(crate) fn residual_ext(tag: SemiringTag, x: &Ext, y: &Ext) -> Result<Ext> {
    if tag == SemiringTag::Boolean {
        return Err(TropError::UnsupportedTag(tag));
    }
    let Some(y) = y else { return Err(TropError::DivisionByBottom) };
    Ok(x.as_ref().map(|x| match tag {
        SemiringTag::MaxTimes => x / y,
        _ => x - y,
    }))
}

pub fn sr_star(a: &TropScalar) -> Result<TropScalar> {
    let tag = a.tag;
    match tag {
        SemiringTag::MaxTimes => Err(TropError::UnsupportedTag(tag)),
        SemiringTag::Boolean => Ok(TropScalar::one(tag)),
        SemiringTag::MaxPlus | SemiringTag::MinPlus => {
            let converges = match &a.value {
                None => true,
                Some(x) if tag == SemiringTag::MaxPlus => !x.is_positive(),
                Some(x) => !x.is_negative(),
            };
            if converges {
                Ok(TropScalar::one(tag))
            } else {
                Err(TropError::Divergent(format!("scalar {a} exceeds the unit")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: TropScalar,
    hi: TropScalar,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: TropScalar, hi: TropScalar) -> Result<Self> {
        if !lo.le(&hi)? {
            return Err(TropError::InvalidValue(format!("interval endpoints out of order: {lo} > {hi}")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: TropScalar) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &TropScalar {
        &self.lo
    }

    pub fn hi(&self) -> &TropScalar {
        &self.hi
    }

    pub fn tag(&self) -> SemiringTag {
        self.lo.tag
    }

    pub fn contains(&self, x: &TropScalar) -> Result<bool> {
        Ok(self.lo.le(x)? && x.le(&self.hi)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IvOp {
    Add,
    Mul,
    Residual,
}

/// Interval image of a monotone scalar operation, from its endpoints.
pub fn iv_binary(op: IvOp, a: &Interval, b: &Interval) -> Result<Interval> {
    a.tag().same(b.tag())?;
    let (lo, hi) = match op {
        IvOp::Add => (sr_add(&a.lo, &b.lo)?, sr_add(&a.hi, &b.hi)?),
        IvOp::Mul => (sr_mul(&a.lo, &b.lo)?, sr_mul(&a.hi, &b.hi)?),
        // antitone in the divisor
        IvOp::Residual => (sr_residual(&a.lo, &b.hi)?, sr_residual(&a.hi, &b.lo)?),
    };
    Interval::new(lo, hi)
}
