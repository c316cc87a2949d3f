//! Attribute values.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metamodel::{Schema, ValueType};

/// A runtime attribute value. Containers hold scalars only; sets are kept
/// sorted and deduplicated so that equality is structural.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "t", content = "v", rename_all = "lowercase")]
pub enum Value {
    Bool(bool),
    Int(i64),
    Double(f64),
    Str(String),
    Enum { ty: String, item: String },
    Set(Vec<Value>),
    Map(Vec<(Value, Value)>),
    Array(Vec<Value>),
}

impl Value {
    /// Zero / empty / first-item default for a declared type.
    pub fn default_for(vt: &ValueType, schema: &Schema) -> Value {
        match vt {
            ValueType::Boolean => Value::Bool(false),
            ValueType::Integer => Value::Int(0),
            ValueType::Double => Value::Double(0.0),
            ValueType::String => Value::Str(String::new()),
            ValueType::Enum(name) => {
                let item = schema
                    .enum_def(name)
                    .and_then(|e| e.items.first())
                    .map(|(n, _)| n.clone())
                    .unwrap_or_default();
                Value::Enum {
                    ty: name.clone(),
                    item,
                }
            }
            ValueType::Set(_) => Value::Set(Vec::new()),
            ValueType::Map(..) => Value::Map(Vec::new()),
            ValueType::Array(_) => Value::Array(Vec::new()),
        }
    }

    pub fn conforms(&self, vt: &ValueType, schema: &Schema) -> bool {
        match (self, vt) {
            (Value::Bool(_), ValueType::Boolean)
            | (Value::Int(_), ValueType::Integer)
            | (Value::Double(_), ValueType::Double)
            | (Value::Str(_), ValueType::String) => true,
            (Value::Enum { ty, item }, ValueType::Enum(name)) => {
                ty == name
                    && schema
                        .enum_def(name)
                        .is_some_and(|e| e.item_value(item).is_some())
            }
            (Value::Set(items), ValueType::Set(t)) | (Value::Array(items), ValueType::Array(t)) => {
                items.iter().all(|v| v.conforms(t, schema))
            }
            (Value::Map(entries), ValueType::Map(k, v)) => entries
                .iter()
                .all(|(a, b)| a.conforms(k, schema) && b.conforms(v, schema)),
            _ => false,
        }
    }

    /// Converts a value into the declared type where a lossless widening
    /// exists (integer to double), otherwise returns it unchanged.
    pub fn coerce(self, vt: &ValueType) -> Value {
        match (self, vt) {
            (Value::Int(i), ValueType::Double) => Value::Double(i as f64),
            (Value::Set(mut items), ValueType::Set(_)) => {
                items.sort_by(total_cmp);
                items.dedup_by(|a, b| total_cmp(a, b) == Ordering::Equal);
                Value::Set(items)
            }
            (v, _) => v,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "int",
            Value::Double(_) => "double",
            Value::Str(_) => "string",
            Value::Enum { .. } => "enum",
            Value::Set(_) => "set",
            Value::Map(_) => "map",
            Value::Array(_) => "array",
        }
    }
}

/// Total order used for set normalization and comparisons; doubles use
/// IEEE total ordering.
pub fn total_cmp(a: &Value, b: &Value) -> Ordering {
    fn rank(v: &Value) -> u8 {
        match v {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::Double(_) => 2,
            Value::Str(_) => 3,
            Value::Enum { .. } => 4,
            Value::Set(_) => 5,
            Value::Map(_) => 6,
            Value::Array(_) => 7,
        }
    }
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Double(x), Value::Double(y)) => x.total_cmp(y),
        (Value::Str(x), Value::Str(y)) => x.cmp(y),
        (Value::Enum { ty: t1, item: i1 }, Value::Enum { ty: t2, item: i2 }) => {
            (t1, i1).cmp(&(t2, i2))
        }
        (Value::Set(x), Value::Set(y)) | (Value::Array(x), Value::Array(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = total_cmp(p, q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        (Value::Map(x), Value::Map(y)) => {
            for ((k1, v1), (k2, v2)) in x.iter().zip(y) {
                let o = total_cmp(k1, k2).then_with(|| total_cmp(v1, v2));
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        total_cmp(self, other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(
            f: &mut fmt::Formatter<'_>,
            open: &str,
            items: &[Value],
            close: &str,
        ) -> fmt::Result {
            f.write_str(open)?;
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(close)
        }
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Double(d) => write!(f, "{d}"),
            Value::Str(s) => f.write_str(s),
            Value::Enum { ty, item } => write!(f, "{ty}::{item}"),
            Value::Set(items) => list(f, "set{", items, "}"),
            Value::Array(items) => list(f, "array[", items, "]"),
            Value::Map(entries) => {
                f.write_str("map{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}->{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}
