//! Graph patterns: conjunctions of atomic predicates over a small typed
//! topology. A pattern describes a minimum shape; data elements may carry
//! more edges and attributes than the pattern names.

use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{EdgeRef, EntityEdgeKind, GradGraph, NodeRef};
use crate::value::{compare_values, CompOp, Value};

/// What a predicate reads from the element under test.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PredicateTarget {
    /// Named identifier of an entity node.
    EntityIdentifier(String),
    /// Value of a literal node.
    LiteralValue,
    /// Named attribute of an entity edge, or context entry of a literal edge.
    EdgeAttribute(String),
    /// Class label of an entity node or label of an attribute node.
    NodeLabel,
    /// Label of an entity edge.
    EdgeLabel,
    /// Whole identity key of an entity node, encoded as a composite value.
    EntityKey,
    /// Whole identifier map of an entity node, encoded as a composite value.
    IdentifierMap,
    /// Whole attribute map of an entity edge (or context map of a literal
    /// edge), encoded as a composite value.
    AttributeMap,
}

impl PredicateTarget {
    /// Whole-map/key targets and labels admit only equality operators.
    pub fn equality_only(&self) -> bool {
        matches!(
            self,
            PredicateTarget::NodeLabel
                | PredicateTarget::EdgeLabel
                | PredicateTarget::EntityKey
                | PredicateTarget::IdentifierMap
                | PredicateTarget::AttributeMap
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicPredicate {
    pub target: PredicateTarget,
    pub op: CompOp,
    pub constant: Value,
}

impl AtomicPredicate {
    pub fn new(target: PredicateTarget, op: CompOp, constant: Value) -> Self {
        AtomicPredicate {
            target,
            op,
            constant,
        }
    }

    pub fn label_eq(label: &str) -> Self {
        AtomicPredicate::new(PredicateTarget::NodeLabel, CompOp::Eq, Value::text(label))
    }

    pub fn edge_label_eq(label: &str) -> Self {
        AtomicPredicate::new(PredicateTarget::EdgeLabel, CompOp::Eq, Value::text(label))
    }

    pub fn identifier(name: &str, op: CompOp, v: Value) -> Self {
        AtomicPredicate::new(PredicateTarget::EntityIdentifier(name.into()), op, v)
    }

    pub fn literal_value(op: CompOp, v: Value) -> Self {
        AtomicPredicate::new(PredicateTarget::LiteralValue, op, v)
    }

    pub fn edge_attribute(name: &str, op: CompOp, v: Value) -> Self {
        AtomicPredicate::new(PredicateTarget::EdgeAttribute(name.into()), op, v)
    }

    /// Applies the predicate to a fetched value. A missing value or an
    /// impossible comparison fails the conjunction instead of erroring.
    fn holds_over(&self, fetched: Option<&Value>) -> bool {
        match fetched {
            Some(v) => compare_values(v, self.op, &self.constant).unwrap_or(false),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternNodeKind {
    Entity,
    Attribute,
    Literal,
}

impl PatternNodeKind {
    pub fn name(self) -> &'static str {
        match self {
            PatternNodeKind::Entity => "entity",
            PatternNodeKind::Attribute => "attribute",
            PatternNodeKind::Literal => "literal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternNode {
    pub var: String,
    pub kind: PatternNodeKind,
    pub predicates: Vec<AtomicPredicate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternEdgeKind {
    /// Entity edge, optionally constrained to one of the four kinds.
    Entity(Option<EntityEdgeKind>),
    Attribute,
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternEdge {
    pub start_var: String,
    pub end_var: String,
    pub kind: PatternEdgeKind,
    pub predicates: Vec<AtomicPredicate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphPattern {
    pub nodes: Vec<PatternNode>,
    pub edges: Vec<PatternEdge>,
}

impl GraphPattern {
    pub fn new() -> Self {
        GraphPattern::default()
    }

    pub fn node(
        mut self,
        var: &str,
        kind: PatternNodeKind,
        predicates: Vec<AtomicPredicate>,
    ) -> Self {
        self.nodes.push(PatternNode {
            var: var.to_string(),
            kind,
            predicates,
        });
        self
    }

    pub fn entity(self, var: &str, predicates: Vec<AtomicPredicate>) -> Self {
        self.node(var, PatternNodeKind::Entity, predicates)
    }

    pub fn attribute(self, var: &str, predicates: Vec<AtomicPredicate>) -> Self {
        self.node(var, PatternNodeKind::Attribute, predicates)
    }

    pub fn literal(self, var: &str, predicates: Vec<AtomicPredicate>) -> Self {
        self.node(var, PatternNodeKind::Literal, predicates)
    }

    pub fn edge(
        mut self,
        start_var: &str,
        end_var: &str,
        kind: PatternEdgeKind,
        predicates: Vec<AtomicPredicate>,
    ) -> Self {
        self.edges.push(PatternEdge {
            start_var: start_var.to_string(),
            end_var: end_var.to_string(),
            kind,
            predicates,
        });
        self
    }

    pub fn entity_edge(self, start: &str, end: &str, predicates: Vec<AtomicPredicate>) -> Self {
        self.edge(start, end, PatternEdgeKind::Entity(None), predicates)
    }

    pub fn attribute_edge(self, start: &str, end: &str) -> Self {
        self.edge(start, end, PatternEdgeKind::Attribute, vec![])
    }

    pub fn literal_edge(self, start: &str, end: &str, predicates: Vec<AtomicPredicate>) -> Self {
        self.edge(start, end, PatternEdgeKind::Literal, predicates)
    }

    pub fn find_node(&self, var: &str) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.var == var)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }
}

/// A structural defect that makes a pattern unmatchable against well-formed
/// data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternViolation {
    UnknownVariable { var: String },
    DuplicateVariable { var: String },
    EndpointKindMismatch { start: String, end: String },
    IllegalPredicateTarget { on: String, target: String },
    IllegalLabelOperator { on: String },
    MissingParent { var: String },
    MultipleAttributeParents { var: String },
    MultipleLiteralParents { var: String },
}

impl PatternViolation {
    pub fn rule(&self) -> &'static str {
        match self {
            PatternViolation::UnknownVariable { .. } => "UnknownVariable",
            PatternViolation::DuplicateVariable { .. } => "DuplicateVariable",
            PatternViolation::EndpointKindMismatch { .. } => "EndpointKindMismatch",
            PatternViolation::IllegalPredicateTarget { .. } => "IllegalPredicateTarget",
            PatternViolation::IllegalLabelOperator { .. } => "IllegalLabelOperator",
            PatternViolation::MissingParent { .. } => "MissingParent",
            PatternViolation::MultipleAttributeParents { .. } => "MultipleAttributeParents",
            PatternViolation::MultipleLiteralParents { .. } => "MultipleLiteralParents",
        }
    }
}

impl fmt::Display for PatternViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternViolation::UnknownVariable { var } => write!(f, "UnknownVariable({var})"),
            PatternViolation::DuplicateVariable { var } => write!(f, "DuplicateVariable({var})"),
            PatternViolation::EndpointKindMismatch { start, end } => {
                write!(f, "EndpointKindMismatch({start},{end})")
            }
            PatternViolation::IllegalPredicateTarget { on, target } => {
                write!(f, "IllegalPredicateTarget({on},{target})")
            }
            PatternViolation::IllegalLabelOperator { on } => {
                write!(f, "IllegalLabelOperator({on})")
            }
            PatternViolation::MissingParent { var } => write!(f, "MissingParent({var})"),
            PatternViolation::MultipleAttributeParents { var } => {
                write!(f, "MultipleAttributeParents({var})")
            }
            PatternViolation::MultipleLiteralParents { var } => {
                write!(f, "MultipleLiteralParents({var})")
            }
        }
    }
}

fn target_name(t: &PredicateTarget) -> String {
    match t {
        PredicateTarget::EntityIdentifier(n) => format!("id.{n}"),
        PredicateTarget::LiteralValue => "value".into(),
        PredicateTarget::EdgeAttribute(n) => format!("attr.{n}"),
        PredicateTarget::NodeLabel => "label".into(),
        PredicateTarget::EdgeLabel => "label".into(),
        PredicateTarget::EntityKey => "key".into(),
        PredicateTarget::IdentifierMap => "idmap".into(),
        PredicateTarget::AttributeMap => "attrmap".into(),
    }
}

fn node_target_legal(kind: PatternNodeKind, t: &PredicateTarget) -> bool {
    match kind {
        PatternNodeKind::Entity => matches!(
            t,
            PredicateTarget::EntityIdentifier(_)
                | PredicateTarget::NodeLabel
                | PredicateTarget::EntityKey
                | PredicateTarget::IdentifierMap
        ),
        PatternNodeKind::Attribute => matches!(t, PredicateTarget::NodeLabel),
        PatternNodeKind::Literal => matches!(t, PredicateTarget::LiteralValue),
    }
}

fn edge_target_legal(kind: PatternEdgeKind, t: &PredicateTarget) -> bool {
    match kind {
        PatternEdgeKind::Entity(_) => matches!(
            t,
            PredicateTarget::EdgeAttribute(_)
                | PredicateTarget::EdgeLabel
                | PredicateTarget::AttributeMap
        ),
        // Attribute edges carry no labels and no attributes.
        PatternEdgeKind::Attribute => false,
        PatternEdgeKind::Literal => matches!(
            t,
            PredicateTarget::EdgeAttribute(_) | PredicateTarget::AttributeMap
        ),
    }
}

/// Checks a pattern against the structural rules of the data model. An empty
/// result means the pattern can be matched.
pub fn validate_pattern(p: &GraphPattern) -> Vec<PatternViolation> {
    let mut out = Vec::new();
    let mut kinds: BTreeMap<&str, PatternNodeKind> = BTreeMap::new();
    for n in &p.nodes {
        if kinds.insert(n.var.as_str(), n.kind).is_some() {
            out.push(PatternViolation::DuplicateVariable { var: n.var.clone() });
        }
        for pred in &n.predicates {
            if !node_target_legal(n.kind, &pred.target) {
                out.push(PatternViolation::IllegalPredicateTarget {
                    on: n.var.clone(),
                    target: target_name(&pred.target),
                });
            } else if pred.target.equality_only() && !pred.op.is_equality() {
                out.push(PatternViolation::IllegalLabelOperator { on: n.var.clone() });
            }
        }
    }

    let mut attr_parents: BTreeMap<&str, usize> = BTreeMap::new();
    let mut literal_parents: BTreeMap<&str, usize> = BTreeMap::new();
    for (idx, e) in p.edges.iter().enumerate() {
        let edge_desc = format!("edge#{idx}");
        let sk = kinds.get(e.start_var.as_str()).copied();
        let ek = kinds.get(e.end_var.as_str()).copied();
        if sk.is_none() {
            out.push(PatternViolation::UnknownVariable {
                var: e.start_var.clone(),
            });
        }
        if ek.is_none() {
            out.push(PatternViolation::UnknownVariable {
                var: e.end_var.clone(),
            });
        }
        if let (Some(sk), Some(ek)) = (sk, ek) {
            let ok = match e.kind {
                PatternEdgeKind::Entity(_) => {
                    sk == PatternNodeKind::Entity && ek == PatternNodeKind::Entity
                }
                PatternEdgeKind::Attribute => {
                    sk == PatternNodeKind::Entity && ek == PatternNodeKind::Attribute
                }
                PatternEdgeKind::Literal => {
                    sk == PatternNodeKind::Attribute && ek == PatternNodeKind::Literal
                }
            };
            if !ok {
                out.push(PatternViolation::EndpointKindMismatch {
                    start: e.start_var.clone(),
                    end: e.end_var.clone(),
                });
            } else {
                match e.kind {
                    PatternEdgeKind::Attribute => {
                        *attr_parents.entry(e.end_var.as_str()).or_insert(0) += 1;
                    }
                    PatternEdgeKind::Literal => {
                        *literal_parents.entry(e.end_var.as_str()).or_insert(0) += 1;
                    }
                    PatternEdgeKind::Entity(_) => {}
                }
            }
        }
        for pred in &e.predicates {
            if !edge_target_legal(e.kind, &pred.target) {
                out.push(PatternViolation::IllegalPredicateTarget {
                    on: edge_desc.clone(),
                    target: target_name(&pred.target),
                });
            } else if pred.target.equality_only() && !pred.op.is_equality() {
                out.push(PatternViolation::IllegalLabelOperator {
                    on: edge_desc.clone(),
                });
            }
        }
    }

    for n in &p.nodes {
        match n.kind {
            PatternNodeKind::Attribute => {
                match attr_parents.get(n.var.as_str()).copied().unwrap_or(0) {
                    0 => out.push(PatternViolation::MissingParent { var: n.var.clone() }),
                    1 => {}
                    _ => {
                        out.push(PatternViolation::MultipleAttributeParents { var: n.var.clone() })
                    }
                }
            }
            PatternNodeKind::Literal => {
                match literal_parents.get(n.var.as_str()).copied().unwrap_or(0) {
                    0 => out.push(PatternViolation::MissingParent { var: n.var.clone() }),
                    1 => {}
                    _ => out.push(PatternViolation::MultipleLiteralParents { var: n.var.clone() }),
                }
            }
            PatternNodeKind::Entity => {}
        }
    }
    out
}

// ---- evaluation against graph elements ----

/// True iff the data node can stand for the pattern node: same kind, all
/// node-local predicates hold.
pub fn node_satisfies(g: &GradGraph, pn: &PatternNode, node: NodeRef) -> bool {
    match (pn.kind, node) {
        (PatternNodeKind::Entity, NodeRef::Entity(id)) => {
            let Ok(n) = g.entity(id) else { return false };
            pn.predicates.iter().all(|p| match &p.target {
                PredicateTarget::NodeLabel => p.holds_over(Some(&Value::text(n.class_label()))),
                PredicateTarget::EntityIdentifier(name) => p.holds_over(n.identifiers().get(name)),
                PredicateTarget::EntityKey => match g.entity_key(id) {
                    Ok(k) => p.holds_over(Some(&k.to_value())),
                    Err(_) => false,
                },
                PredicateTarget::IdentifierMap => p.holds_over(Some(&map_value(n.identifiers()))),
                _ => false,
            })
        }
        (PatternNodeKind::Attribute, NodeRef::Attribute(id)) => {
            let Ok(n) = g.attribute(id) else { return false };
            pn.predicates.iter().all(|p| match &p.target {
                PredicateTarget::NodeLabel => p.holds_over(Some(&Value::text(n.label()))),
                _ => false,
            })
        }
        (PatternNodeKind::Literal, NodeRef::Literal(id)) => {
            let Ok(n) = g.literal(id) else { return false };
            pn.predicates.iter().all(|p| match &p.target {
                PredicateTarget::LiteralValue => p.holds_over(Some(n.value())),
                _ => false,
            })
        }
        _ => false,
    }
}

/// True iff the data edge can stand for the pattern edge (kind, optional
/// entity-edge kind constraint, and all edge predicates).
pub fn edge_satisfies(g: &GradGraph, pe: &PatternEdge, edge: EdgeRef) -> bool {
    match (pe.kind, edge) {
        (PatternEdgeKind::Entity(kind_req), EdgeRef::Entity(id)) => {
            let Ok(e) = g.entity_edge(id) else {
                return false;
            };
            if let Some(k) = kind_req {
                if e.kind() != k {
                    return false;
                }
            }
            pe.predicates.iter().all(|p| match &p.target {
                PredicateTarget::EdgeLabel => p.holds_over(Some(&Value::text(e.label()))),
                PredicateTarget::EdgeAttribute(name) => p.holds_over(e.attributes().get(name)),
                PredicateTarget::AttributeMap => p.holds_over(Some(&map_value(e.attributes()))),
                _ => false,
            })
        }
        (PatternEdgeKind::Attribute, EdgeRef::Attribute(_)) => pe.predicates.is_empty(),
        (PatternEdgeKind::Literal, EdgeRef::Literal(id)) => {
            let Ok(l) = g.literal(id) else { return false };
            pe.predicates.iter().all(|p| match &p.target {
                PredicateTarget::EdgeAttribute(name) => p.holds_over(l.context().get(name)),
                PredicateTarget::AttributeMap => p.holds_over(Some(&map_value(l.context()))),
                _ => false,
            })
        }
        _ => false,
    }
}

/// Encodes a name → value map as a composite value for whole-map equality.
pub fn map_value(m: &BTreeMap<String, Value>) -> Value {
    Value::Composite(
        m.iter()
            .map(|(k, v)| Value::Composite(vec![Value::text(k.clone()), v.clone()]))
            .collect(),
    )
}
