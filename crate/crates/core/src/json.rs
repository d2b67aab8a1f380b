//! JSON helpers shared by the exporters and the command-line reports.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that every value parses back to the identical `f64`.

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

use crate::matlib::ComplexMat3;

/// Formats `x` with 17 significant digits; non-finite values become `null`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_owned()
    }
}

/// An `f64` that serializes through [`format_f64`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format_f64(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// A matrix as `[[[re, im]; 3]; 3]`.
pub struct MatrixJson<'a>(pub &'a ComplexMat3);

impl Serialize for MatrixJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(3))?;
        for row in self.0.entries() {
            let cells: Vec<[Sig17; 2]> = row.iter().map(|z| [Sig17(z.re), Sig17(z.im)]).collect();
            rows.serialize_element(&cells)?;
        }
        rows.end()
    }
}

/// A free-form parameter value in a report.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ParamValue::Int(i) => serializer.serialize_i64(*i),
            ParamValue::Real(x) => Sig17(*x).serialize(serializer),
            ParamValue::Text(s) => serializer.serialize_str(s),
        }
    }
}

/// Ordered key/value pairs serialized as a JSON object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub Vec<(String, ParamValue)>);

impl Params {
    pub fn int(mut self, key: &str, value: i64) -> Self {
        self.0.push((key.to_owned(), ParamValue::Int(value)));
        self
    }

    pub fn real(mut self, key: &str, value: f64) -> Self {
        self.0.push((key.to_owned(), ParamValue::Real(value)));
        self
    }

    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.0.push((key.to_owned(), ParamValue::Text(value.into())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}
