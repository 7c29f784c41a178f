//! JSON and CSV forms.
//!
//! Scalars: integers are JSON numbers, other rationals are `"p/q"` strings and
//! the semiring zero is `"-inf"` (max-plus), `"+inf"` (min-plus) or `0`.
//! Matrices: `{"semiring":"max-plus","rows":R,"cols":C,"data":[[...]]}`.

use crate::error::{Result, TropError};
use crate::semiring::{format_rat, parse_rat, Ext, Interval, Rat, SemiringTag, TropScalar};
use crate::tropmat::{IntervalMatrix, TropMatrix, TropVector};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

pub fn ext_to_json(tag: SemiringTag, v: &Ext) -> Value {
    match v {
        None => match tag {
            SemiringTag::MaxPlus | SemiringTag::MinPlus => Value::String(tag.bottom_token().into()),
            _ => json!(0),
        },
        Some(x) if x.is_integer() => match i64::try_from(x.numer()) {
            Ok(i) => json!(i),
            Err(_) => Value::String(format_rat(x)),
        },
        Some(x) => Value::String(format_rat(x)),
    }
}

pub fn ext_from_json(tag: SemiringTag, v: &Value) -> Result<Ext> {
    let raw = match v {
        Value::Number(n) => Some(parse_rat(&n.to_string()).map_err(|_| {
            TropError::Parse(format!("number {n} is not an exact decimal; use a \"p/q\" string"))
        })?),
        Value::String(s) => return ext_from_str(tag, s),
        Value::Bool(b) if tag == SemiringTag::Boolean => {
            if *b {
                tag.one()
            } else {
                None
            }
        }
        Value::Null => None,
        other => return Err(TropError::Parse(format!("not a scalar: {other}"))),
    };
    tag.normalize(raw)
}

/// Parses one token; accepts the zero tokens `-inf`, `+inf`/`inf` for the matching tag.
pub fn ext_from_str(tag: SemiringTag, s: &str) -> Result<Ext> {
    let t = s.trim();
    match (t, tag) {
        ("-inf", SemiringTag::MaxPlus) | ("+inf" | "inf", SemiringTag::MinPlus) => Ok(None),
        ("-inf" | "+inf" | "inf", _) => {
            Err(TropError::InvalidValue(format!("{t} is not the zero of the {tag} semiring")))
        }
        _ => tag.normalize(Some(parse_rat(t)?)),
    }
}

impl Serialize for TropScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ext_to_json(self.tag(), self.value()).serialize(s)
    }
}

impl Serialize for TropVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for v in self.entries() {
            seq.serialize_element(&ext_to_json(self.tag(), v))?;
        }
        seq.end()
    }
}

impl Serialize for TropMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data: Vec<Vec<Value>> = self
            .to_rows()
            .iter()
            .map(|r| r.iter().map(|v| ext_to_json(self.tag(), v)).collect())
            .collect();
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("semiring", self.tag().name())?;
        m.serialize_entry("rows", &self.rows())?;
        m.serialize_entry("cols", &self.cols())?;
        m.serialize_entry("data", &data)?;
        m.end()
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("lo", self.lo())?;
        m.serialize_entry("hi", self.hi())?;
        m.end()
    }
}

impl Serialize for IntervalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("lo", self.lo())?;
        m.serialize_entry("hi", self.hi())?;
        m.end()
    }
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| TropError::Parse(format!("missing field {name:?}")))
}

fn tag_of(v: &Value, default: Option<SemiringTag>) -> Result<SemiringTag> {
    match v.get("semiring") {
        Some(Value::String(s)) => SemiringTag::parse(s),
        Some(other) => Err(TropError::Parse(format!("semiring must be a string, got {other}"))),
        None => default.ok_or_else(|| TropError::Parse("missing field \"semiring\"".into())),
    }
}

fn usize_field(v: &Value, name: &str) -> Result<Option<usize>> {
    match v.get(name) {
        None => Ok(None),
        Some(x) => x
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| TropError::Parse(format!("{name} must be a nonnegative integer"))),
    }
}

pub fn matrix_from_value(v: &Value) -> Result<TropMatrix> {
    let tag = tag_of(v, None)?;
    let data = field(v, "data")?
        .as_array()
        .ok_or_else(|| TropError::Parse("data must be an array of rows".into()))?;
    let mut rows = Vec::with_capacity(data.len());
    for r in data {
        let r = r.as_array().ok_or_else(|| TropError::Parse("each row must be an array".into()))?;
        rows.push(r.iter().map(|x| ext_from_json(tag, x)).collect::<Result<Vec<_>>>()?);
    }
    let m = TropMatrix::from_rows(tag, rows)?;
    if let Some(r) = usize_field(v, "rows")? {
        if r != m.rows() {
            return Err(TropError::DimensionMismatch(format!("rows says {r}, data has {}", m.rows())));
        }
    }
    if let Some(c) = usize_field(v, "cols")? {
        if c != m.cols() {
            return Err(TropError::DimensionMismatch(format!("cols says {c}, data has {}", m.cols())));
        }
    }
    Ok(m)
}

pub fn matrix_from_json(text: &str) -> Result<TropMatrix> {
    let v: Value = serde_json::from_str(text).map_err(|e| TropError::Parse(e.to_string()))?;
    matrix_from_value(&v)
}

pub fn matrix_to_json(m: &TropMatrix) -> String {
    serde_json::to_string(m).expect("matrices serialize")
}

/// A vector is either `{"semiring":..., "data":[...]}` or a bare array read with `tag`.
pub fn vector_from_value(v: &Value, tag: SemiringTag) -> Result<TropVector> {
    let (tag, data) = match v {
        Value::Array(a) => (tag, a),
        Value::Object(_) => (
            tag_of(v, Some(tag))?,
            field(v, "data")?.as_array().ok_or_else(|| TropError::Parse("data must be an array".into()))?,
        ),
        other => return Err(TropError::Parse(format!("not a vector: {other}"))),
    };
    TropVector::new(tag, data.iter().map(|x| ext_from_json(tag, x)).collect::<Result<Vec<_>>>()?)
}

/// Interval matrix JSON: `{"lo": matrix, "hi": matrix}`.
pub fn interval_matrix_from_value(v: &Value) -> Result<IntervalMatrix> {
    IntervalMatrix::new(matrix_from_value(field(v, "lo")?)?, matrix_from_value(field(v, "hi")?)?)
}

/// CSV with one matrix row per record, using the same scalar tokens.
pub fn matrix_from_csv(tag: SemiringTag, text: &str) -> Result<TropMatrix> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows.push(line.split(',').map(|t| ext_from_str(tag, t)).collect::<Result<Vec<_>>>()?);
    }
    TropMatrix::from_rows(tag, rows)
}

pub fn matrix_to_csv(m: &TropMatrix) -> String {
    let mut out = String::new();
    for r in m.to_rows() {
        let cells: Vec<String> = r.iter().map(|v| m.tag().format(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn rat_to_json(r: &Rat) -> Value {
    ext_to_json(SemiringTag::MaxPlus, &Some(r.clone()))
}

pub fn ser_rat<S: Serializer>(v: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    rat_to_json(v).serialize(s)
}

/// `serialize_with` helper for plain rational vectors.
pub fn ser_rats<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(rat_to_json).collect::<Vec<_>>().serialize(s)
}

pub fn scalar_to_json(s: &TropScalar) -> Value {
    ext_to_json(s.tag(), s.value())
}

pub fn interval_to_json(i: &Interval) -> Value {
    json!({"lo": scalar_to_json(i.lo()), "hi": scalar_to_json(i.hi())})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{rat, ratio};

    #[test]
    fn round_trip() {
        let text = r#"{"semiring":"max-plus","rows":2,"cols":2,"data":[[0,"-inf"],["1/3",2.5]]}"#;
        let m = matrix_from_json(text).unwrap();
        assert_eq!(m.at(1, 0), &Some(ratio(1, 3)));
        assert_eq!(m.at(1, 1), &Some(ratio(5, 2)));
        assert_eq!(m.at(0, 1), &None);
        let back = matrix_to_json(&m);
        assert_eq!(back, r#"{"semiring":"max-plus","rows":2,"cols":2,"data":[[0,"-inf"],["1/3","5/2"]]}"#);
        assert_eq!(matrix_from_json(&back).unwrap(), m);
    }

    #[test]
    fn tokens_follow_tag() {
        assert_eq!(ext_from_str(SemiringTag::MinPlus, "+inf").unwrap(), None);
        assert!(ext_from_str(SemiringTag::MaxPlus, "+inf").is_err());
        assert_eq!(ext_from_json(SemiringTag::MaxTimes, &json!(0)).unwrap(), None);
        assert_eq!(ext_to_json(SemiringTag::MaxTimes, &None), json!(0));
        assert_eq!(ext_from_json(SemiringTag::MaxPlus, &json!(-7)).unwrap(), Some(rat(-7)));
    }

    #[test]
    fn shape_checks() {
        let bad = r#"{"semiring":"max-plus","rows":3,"cols":2,"data":[[0,1],[1,0]]}"#;
        assert!(matches!(matrix_from_json(bad), Err(TropError::DimensionMismatch(_))));
        let ragged = r#"{"semiring":"max-plus","data":[[0,1],[1]]}"#;
        assert!(matches!(matrix_from_json(ragged), Err(TropError::DimensionMismatch(_))));
    }

    #[test]
    fn csv_round_trip() {
        let m = matrix_from_csv(SemiringTag::MaxPlus, "0,-inf\n1/2,3\n").unwrap();
        assert_eq!(matrix_from_csv(SemiringTag::MaxPlus, &matrix_to_csv(&m)).unwrap(), m);
    }
}
