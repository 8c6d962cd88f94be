//! Identity keys: deterministic, content-based identities for entity nodes,
//! entity edges and attribute nodes. Strong entities are identified by class
//! and identifier set, weak entities recursively include the key of the node
//! they are composed into, edges by label plus endpoint keys, attribute nodes
//! by label plus owner key.

use std::fmt;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum KeyPart {
    /// Class label or edge/attribute label.
    Label(String),
    /// Sorted identifier pairs of an entity node.
    Identifiers(Vec<(String, Value)>),
    /// Key of a parent or endpoint node.
    Nested(Box<IdentityKey>),
    /// Marker used only when a composition cycle makes the true key
    /// unresolvable and a total order is still required.
    CycleMark,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IdentityKey(pub Vec<KeyPart>);

impl IdentityKey {
    pub fn strong(class: &str, ids: Vec<(String, Value)>) -> Self {
        IdentityKey(vec![
            KeyPart::Label(class.to_string()),
            KeyPart::Identifiers(ids),
        ])
    }

    pub fn weak(class: &str, parent: IdentityKey, ids: Vec<(String, Value)>) -> Self {
        IdentityKey(vec![
            KeyPart::Label(class.to_string()),
            KeyPart::Nested(Box::new(parent)),
            KeyPart::Identifiers(ids),
        ])
    }

    pub fn edge(label: &str, start: IdentityKey, end: IdentityKey) -> Self {
        IdentityKey(vec![
            KeyPart::Label(label.to_string()),
            KeyPart::Nested(Box::new(start)),
            KeyPart::Nested(Box::new(end)),
        ])
    }

    pub fn attribute(label: &str, owner: IdentityKey) -> Self {
        IdentityKey(vec![
            KeyPart::Label(label.to_string()),
            KeyPart::Nested(Box::new(owner)),
        ])
    }

    /// Encodes the key as a composite value so whole-key equality can be
    /// expressed as an ordinary predicate constant.
    pub fn to_value(&self) -> Value {
        Value::Composite(self.0.iter().map(KeyPart::to_value).collect())
    }
}

impl KeyPart {
    fn to_value(&self) -> Value {
        match self {
            KeyPart::Label(s) => Value::Text(s.clone()),
            KeyPart::Identifiers(ids) => Value::Composite(
                ids.iter()
                    .map(|(n, v)| Value::Composite(vec![Value::Text(n.clone()), v.clone()]))
                    .collect(),
            ),
            KeyPart::Nested(k) => Value::Composite(vec![Value::Text("^".into()), k.to_value()]),
            KeyPart::CycleMark => Value::Text("\u{1}cycle".into()),
        }
    }
}

impl fmt::Display for IdentityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [KeyPart::Label(l), KeyPart::Identifiers(ids)] => {
                write!(f, "{l}")?;
                write_ids(f, ids)
            }
            [KeyPart::Label(l), KeyPart::Nested(p), KeyPart::Identifiers(ids)] => {
                write!(f, "{l}({p})")?;
                write_ids(f, ids)
            }
            [KeyPart::Label(l), KeyPart::Nested(a), KeyPart::Nested(b)] => {
                write!(f, "{l}({a},{b})")
            }
            [KeyPart::Label(l), KeyPart::Nested(p)] => write!(f, "{l}({p})"),
            parts => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    match p {
                        KeyPart::Label(l) => write!(f, "{l}")?,
                        KeyPart::Identifiers(ids) => write_ids(f, ids)?,
                        KeyPart::Nested(k) => write!(f, "({k})")?,
                        KeyPart::CycleMark => write!(f, "<cycle>")?,
                    }
                }
                Ok(())
            }
        }
    }
}

fn write_ids(f: &mut fmt::Formatter<'_>, ids: &[(String, Value)]) -> fmt::Result {
    write!(f, "{{")?;
    for (i, (n, v)) in ids.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{n}={v}")?;
    }
    write!(f, "}}")
}
