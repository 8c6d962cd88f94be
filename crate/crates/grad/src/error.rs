use thiserror::Error;

use crate::pattern::PatternViolation;

/// Unified error type for every fallible operation in the engine.
#[derive(Debug, Error)]
pub enum GradError {
    #[error("label must not be empty")]
    EmptyLabel,
    #[error("identifier set must not be empty and names must not be empty")]
    EmptyIdentifier,
    #[error("identity already present in strict graph: {0}")]
    DuplicateIdentity(String),
    #[error("unknown node reference")]
    UnknownNode,
    #[error("unknown edge reference")]
    UnknownEdge,
    #[error("node already has an outgoing {0} edge")]
    DuplicateParentEdge(&'static str),
    #[error("an edge with this label already links this node pair")]
    DuplicateEdgeLabelPair,
    #[error("context values must be scalar, got a composite for {0:?}")]
    CompositeContextValue(String),
    #[error("ordering comparison between incompatible value types")]
    IncomparableTypes,
    #[error("element kind has no identity key")]
    UnsupportedElement,
    #[error("composition cycle while resolving identity key")]
    CompositionCycle,
    #[error("invalid pattern: {}", render_pattern_violations(.0))]
    InvalidPattern(Vec<PatternViolation>),
    #[error("brute-force cap exceeded: {0}")]
    CapExceeded(String),
    #[error("match limit exceeded: more than {0} matches")]
    MatchLimitExceeded(usize),
    #[error("template references unbound variable or field: {0}")]
    UnboundTemplateVariable(String),
    #[error("template output is not a well-formed graph: {0}")]
    TemplateNotGradCompliant(String),
    #[error("conflicting identifier values for {name:?} while merging {key}")]
    ConflictingIdentifiers { name: String, key: String },
    #[error("invalid join rule: {0}")]
    InvalidJoinRule(String),
    #[error("invalid assertion: {0}")]
    InvalidAssertion(String),
    #[error("invalid multiplicity: {0}")]
    InvalidMultiplicity(String),
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("unsupported document version: {0:?}")]
    UnsupportedVersion(String),
    #[error("mapping error: {0}")]
    MappingError(String),
    #[error("line {line}, column {column:?}: cannot read {text:?} as {ty}")]
    TypeCoercionError {
        line: usize,
        column: String,
        text: String,
        ty: &'static str,
    },
    #[error("io error: {0}")]
    SinkError(#[from] std::io::Error),
}

fn render_pattern_violations(vs: &[PatternViolation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, GradError>;
