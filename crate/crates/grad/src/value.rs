//! Typed scalar and composite values carried by identifiers, literals,
//! edge attributes and contexts.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{GradError, Result};

/// A typed value. The engine stores values as declared by the loader and
/// never coerces them in place; comparisons widen numerics on the fly.
#[derive(Debug, Clone)]
pub enum Value {
    Text(String),
    Int(i64),
    Decimal(f64),
    Bool(bool),
    Composite(Vec<Value>),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, Value::Composite(_))
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Text(_) => 0,
            Value::Int(_) => 1,
            Value::Decimal(_) => 2,
            Value::Bool(_) => 3,
            Value::Composite(_) => 4,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Decimal(d) => Some(*d),
            _ => None,
        }
    }
}

/// Structural equality: same type, same content. `Int(3)` and `Decimal(3.0)`
/// are structurally distinct; use [`compare_values`] for domain comparison.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical total order used for identity keys, deduplication and
/// serialization. Not the domain order: see [`compare_values`].
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Decimal(a), Value::Decimal(b)) => a.total_cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Composite(a), Value::Composite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => write!(f, "{s}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Composite(vs) => {
                write!(f, "[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Comparison operators usable in predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CompOp {
    pub fn is_equality(self) -> bool {
        matches!(self, CompOp::Eq | CompOp::Ne)
    }

    fn admits_ordering(self, ord: Ordering) -> bool {
        match self {
            CompOp::Lt => ord == Ordering::Less,
            CompOp::Le => ord != Ordering::Greater,
            CompOp::Eq => ord == Ordering::Equal,
            CompOp::Ge => ord != Ordering::Less,
            CompOp::Gt => ord == Ordering::Greater,
            CompOp::Ne => ord != Ordering::Equal,
        }
    }
}

impl fmt::Display for CompOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompOp::Lt => "<",
            CompOp::Le => "<=",
            CompOp::Eq => "=",
            CompOp::Ge => ">=",
            CompOp::Gt => ">",
            CompOp::Ne => "!=",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for CompOp {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "<" => CompOp::Lt,
            "<=" => CompOp::Le,
            "=" => CompOp::Eq,
            ">=" => CompOp::Ge,
            ">" => CompOp::Gt,
            "!=" => CompOp::Ne,
            _ => return Err(()),
        })
    }
}

/// Domain comparison between two values.
///
/// Numerics widen (integer against decimal compares numerically), text
/// compares by code point, booleans and composites support only `=`/`!=`.
/// Values of unrelated types are never equal; ordering them is an error.
pub fn compare_values(a: &Value, op: CompOp, b: &Value) -> Result<bool> {
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => Ok(op.admits_ordering(x.cmp(y))),
        (Value::Bool(x), Value::Bool(y)) => {
            if op.is_equality() {
                Ok(op.admits_ordering(x.cmp(y)))
            } else {
                Err(GradError::IncomparableTypes)
            }
        }
        (Value::Composite(x), Value::Composite(y)) => {
            if op.is_equality() {
                Ok(op.admits_ordering(x.cmp(y)))
            } else {
                Err(GradError::IncomparableTypes)
            }
        }
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(_), Some(_)) => {
                if let (Value::Int(x), Value::Int(y)) = (a, b) {
                    return Ok(op.admits_ordering(x.cmp(y)));
                }
                let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
                match x.partial_cmp(&y) {
                    Some(ord) => Ok(op.admits_ordering(ord)),
                    // NaN on either side: nothing is equal to it.
                    None => Ok(op == CompOp::Ne),
                }
            }
            _ => {
                if op.is_equality() {
                    Ok(op == CompOp::Ne)
                } else {
                    Err(GradError::IncomparableTypes)
                }
            }
        },
    }
}
