//! Integrity checking: structural identity rules, user assertions and
//! multiplicity bounds, all reported as structured violations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{GradError, Result};
use crate::graph::{EntityEdgeKind, EntityId, GradGraph, NodeRef};
use crate::key::IdentityKey;
use crate::matcher::match_graph;
use crate::pattern::{validate_pattern, GraphPattern, PatternNodeKind, PredicateTarget};
use crate::value::{CompOp, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// The violated rule. Cycle violations cover all three hierarchical edge
/// kinds; the offending kind is named in the violation elements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    DuplicateEntityIdentity,
    DuplicateEdgeIdentity,
    DuplicateAttributeIdentity,
    EdgeLabelClassConflict,
    ParentEdgeCardinality,
    CompositionCycle,
    DanglingReference,
    AssertionFailed { assertion: String },
    MultiplicityFailed { spec: String, observed: u64 },
    DuplicateLiteralContext,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::DuplicateEntityIdentity => "DuplicateEntityIdentity",
            Rule::DuplicateEdgeIdentity => "DuplicateEdgeIdentity",
            Rule::DuplicateAttributeIdentity => "DuplicateAttributeIdentity",
            Rule::EdgeLabelClassConflict => "EdgeLabelClassConflict",
            Rule::ParentEdgeCardinality => "ParentEdgeCardinality",
            Rule::CompositionCycle => "CompositionCycle",
            Rule::DanglingReference => "DanglingReference",
            Rule::AssertionFailed { .. } => "AssertionFailed",
            Rule::MultiplicityFailed { .. } => "MultiplicityFailed",
            Rule::DuplicateLiteralContext => "DuplicateLiteralContext",
        }
    }

    fn order_index(&self) -> u8 {
        match self {
            Rule::DuplicateEntityIdentity => 0,
            Rule::DuplicateEdgeIdentity => 1,
            Rule::DuplicateAttributeIdentity => 2,
            Rule::EdgeLabelClassConflict => 3,
            Rule::ParentEdgeCardinality => 4,
            Rule::CompositionCycle => 5,
            Rule::DanglingReference => 6,
            Rule::AssertionFailed { .. } => 7,
            Rule::MultiplicityFailed { .. } => 8,
            Rule::DuplicateLiteralContext => 9,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::AssertionFailed { assertion } => write!(f, "AssertionFailed({assertion})"),
            Rule::MultiplicityFailed { spec, observed } => {
                write!(f, "MultiplicityFailed({spec}; observed {observed})")
            }
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub severity: Severity,
    pub elements: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}",
            self.severity,
            self.rule,
            self.elements.join(", ")
        )
    }
}

/// Scope of the equal-label-implies-equal-end-class rule. The default holds
/// per shared start node; `Global` demands one end class per label
/// graph-wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeLabelScope {
    #[default]
    PerStartNode,
    Global,
}

fn entity_key_string(g: &GradGraph, id: EntityId) -> String {
    match g.entity_key(id) {
        Ok(k) => k.to_string(),
        Err(_) => g.entity_order_key(id).to_string(),
    }
}

/// Structural identity rules: duplicate identities, edge-label/class
/// consistency, hierarchical cycles, duplicate literal contexts.
pub fn check_entity_integrity(g: &GradGraph) -> Vec<Violation> {
    check_entity_integrity_scoped(g, EdgeLabelScope::default())
}

pub fn check_entity_integrity_scoped(g: &GradGraph, scope: EdgeLabelScope) -> Vec<Violation> {
    let mut out = Vec::new();

    // (a) entity identity duplicates; entities on a hierarchical cycle have
    // no well-defined key and are covered by the cycle rule instead.
    let mut entity_buckets: BTreeMap<IdentityKey, u64> = BTreeMap::new();
    for (id, _) in g.entities() {
        if let Ok(k) = g.entity_key(id) {
            *entity_buckets.entry(k).or_default() += 1;
        }
    }
    for (key, n) in entity_buckets {
        if n > 1 {
            out.push(Violation {
                rule: Rule::DuplicateEntityIdentity,
                severity: Severity::Error,
                elements: vec![key.to_string(), format!("count={n}")],
            });
        }
    }

    // (b) entity-edge identity duplicates.
    let mut edge_buckets: BTreeMap<IdentityKey, u64> = BTreeMap::new();
    for (id, _) in g.entity_edges() {
        *edge_buckets.entry(g.edge_order_key(id)).or_default() += 1;
    }
    for (key, n) in edge_buckets {
        if n > 1 {
            out.push(Violation {
                rule: Rule::DuplicateEdgeIdentity,
                severity: Severity::Error,
                elements: vec![key.to_string(), format!("count={n}")],
            });
        }
    }

    // (c) equal edge labels imply equal end-node class.
    match scope {
        EdgeLabelScope::PerStartNode => {
            let mut classes: BTreeMap<(EntityId, &str), BTreeSet<&str>> = BTreeMap::new();
            for (_, e) in g.entity_edges() {
                if let Ok(end) = g.entity(e.end()) {
                    classes
                        .entry((e.start(), e.label()))
                        .or_default()
                        .insert(end.class_label());
                }
            }
            for ((start, label), ends) in classes {
                if ends.len() > 1 {
                    out.push(Violation {
                        rule: Rule::EdgeLabelClassConflict,
                        severity: Severity::Error,
                        elements: vec![
                            entity_key_string(g, start),
                            format!("label={label}"),
                            format!("classes={}", ends.into_iter().collect::<Vec<_>>().join("|")),
                        ],
                    });
                }
            }
        }
        EdgeLabelScope::Global => {
            let mut classes: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for (_, e) in g.entity_edges() {
                if let Ok(end) = g.entity(e.end()) {
                    classes
                        .entry(e.label())
                        .or_default()
                        .insert(end.class_label());
                }
            }
            for (label, ends) in classes {
                if ends.len() > 1 {
                    out.push(Violation {
                        rule: Rule::EdgeLabelClassConflict,
                        severity: Severity::Error,
                        elements: vec![
                            format!("label={label}"),
                            format!("classes={}", ends.into_iter().collect::<Vec<_>>().join("|")),
                        ],
                    });
                }
            }
        }
    }

    // (d) attribute identity duplicates.
    let mut attr_buckets: BTreeMap<IdentityKey, u64> = BTreeMap::new();
    for (id, _) in g.attributes() {
        *attr_buckets.entry(g.attribute_order_key(id)).or_default() += 1;
    }
    for (key, n) in attr_buckets {
        if n > 1 {
            out.push(Violation {
                rule: Rule::DuplicateAttributeIdentity,
                severity: Severity::Error,
                elements: vec![key.to_string(), format!("count={n}")],
            });
        }
    }

    // (e) hierarchical cycles, one violation per cycle per kind.
    for kind in [
        EntityEdgeKind::Generalization,
        EntityEdgeKind::Aggregation,
        EntityEdgeKind::Composition,
    ] {
        for cycle in hierarchical_cycles(g, kind) {
            let mut elements = vec![format!("kind={}", kind.name())];
            elements.extend(cycle.iter().map(|id| g.entity_order_key(*id).to_string()));
            out.push(Violation {
                rule: Rule::CompositionCycle,
                severity: Severity::Error,
                elements,
            });
        }
    }

    // (f) duplicate literal contexts under one attribute (warning).
    let mut ctx_buckets: BTreeMap<(crate::graph::AttrId, Vec<(String, String)>), u64> =
        BTreeMap::new();
    for (owner, _, ctx) in g.literal_edges() {
        let rendered: Vec<(String, String)> = ctx
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        *ctx_buckets.entry((owner, rendered)).or_default() += 1;
    }
    for ((owner, ctx), n) in ctx_buckets {
        if n > 1 {
            let ctx_str = ctx
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("&");
            out.push(Violation {
                rule: Rule::DuplicateLiteralContext,
                severity: Severity::Warning,
                elements: vec![
                    g.attribute_order_key(owner).to_string(),
                    format!("context={{{ctx_str}}}"),
                    format!("count={n}"),
                ],
            });
        }
    }

    out
}

/// Nodes forming directed cycles under the parent edges of one hierarchical
/// kind. Each cycle is reported once, rotated to start at its smallest node
/// handle.
fn hierarchical_cycles(g: &GradGraph, kind: EntityEdgeKind) -> Vec<Vec<EntityId>> {
    let mut parent: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    for (_, e) in g.entity_edges() {
        if e.kind() == kind {
            // At most one outgoing parent edge per kind is enforced at
            // insertion; a defensive first-wins keeps this total anyway.
            parent.entry(e.start()).or_insert(e.end());
        }
    }
    let mut cycles = Vec::new();
    let mut resolved: BTreeSet<EntityId> = BTreeSet::new();
    for (start, _) in g.entities() {
        if resolved.contains(&start) {
            continue;
        }
        let mut path = Vec::new();
        let mut seen_at: BTreeMap<EntityId, usize> = BTreeMap::new();
        let mut cur = start;
        loop {
            if resolved.contains(&cur) {
                break;
            }
            if let Some(&at) = seen_at.get(&cur) {
                let cycle = &path[at..];
                let min_pos = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, id)| **id)
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                let mut rotated: Vec<EntityId> = cycle[min_pos..].to_vec();
                rotated.extend_from_slice(&cycle[..min_pos]);
                cycles.push(rotated);
                break;
            }
            seen_at.insert(cur, path.len());
            path.push(cur);
            match parent.get(&cur) {
                Some(&next) => cur = next,
                None => break,
            }
        }
        resolved.extend(path);
    }
    cycles
}

/// Defensive re-verification of laws the construction API already enforces:
/// parent-edge cardinality and reference integrity.
pub fn check_structure(g: &GradGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut outgoing: BTreeMap<(EntityId, EntityEdgeKind), u64> = BTreeMap::new();
    for (_, e) in g.entity_edges() {
        if e.kind().is_hierarchical() {
            *outgoing.entry((e.start(), e.kind())).or_default() += 1;
        }
    }
    for ((start, kind), n) in outgoing {
        if n > 1 {
            out.push(Violation {
                rule: Rule::ParentEdgeCardinality,
                severity: Severity::Error,
                elements: vec![
                    format!("kind={}", kind.name()),
                    entity_key_string(g, start),
                    format!("count={n}"),
                ],
            });
        }
    }

    for (id, e) in g.entity_edges() {
        for (end_name, endpoint) in [("start", e.start()), ("end", e.end())] {
            if g.entity(endpoint).is_err() {
                out.push(Violation {
                    rule: Rule::DanglingReference,
                    severity: Severity::Error,
                    elements: vec![format!("edge=#{}", id.raw()), format!("missing={end_name}")],
                });
            }
        }
    }
    for (id, a) in g.attributes() {
        if g.entity(a.owner()).is_err() {
            out.push(Violation {
                rule: Rule::DanglingReference,
                severity: Severity::Error,
                elements: vec![format!("attribute=#{}", id.raw()), "missing=owner".into()],
            });
        }
    }
    for (id, l) in g.literals() {
        if g.attribute(l.owner()).is_err() {
            out.push(Violation {
                rule: Rule::DanglingReference,
                severity: Severity::Error,
                elements: vec![format!("literal=#{}", id.raw()), "missing=owner".into()],
            });
        }
    }

    out
}

/// A pattern that must embed around every entity of the governed classes.
/// Each anchor variable carries exactly one label-equality predicate; its
/// constant is the class whose members the assertion governs.
#[derive(Debug, Clone)]
pub struct Assertion {
    pub name: String,
    pub pattern: GraphPattern,
    pub anchor_vars: Vec<String>,
}

impl Assertion {
    pub fn new(name: &str, pattern: GraphPattern, anchor_vars: Vec<String>) -> Result<Self> {
        if name.is_empty() {
            return Err(GradError::InvalidAssertion("empty assertion name".into()));
        }
        if anchor_vars.is_empty() {
            return Err(GradError::InvalidAssertion(format!(
                "assertion {name} has no anchor variables"
            )));
        }
        let violations = validate_pattern(&pattern);
        if !violations.is_empty() {
            return Err(GradError::InvalidPattern(violations));
        }
        let a = Assertion {
            name: name.to_string(),
            pattern,
            anchor_vars,
        };
        for var in &a.anchor_vars {
            a.anchor_class(var)?;
        }
        Ok(a)
    }

    /// The class label an anchor variable governs.
    pub fn anchor_class(&self, var: &str) -> Result<&str> {
        let node = self.pattern.find_node(var).ok_or_else(|| {
            GradError::InvalidAssertion(format!(
                "assertion {}: anchor {var} is not a pattern variable",
                self.name
            ))
        })?;
        if node.kind != PatternNodeKind::Entity {
            return Err(GradError::InvalidAssertion(format!(
                "assertion {}: anchor {var} must be an entity variable",
                self.name
            )));
        }
        let mut label_consts = node.predicates.iter().filter_map(|p| {
            if p.target == PredicateTarget::NodeLabel && p.op == CompOp::Eq {
                match &p.constant {
                    Value::Text(s) => Some(s.as_str()),
                    _ => None,
                }
            } else {
                None
            }
        });
        match (label_consts.next(), label_consts.next()) {
            (Some(class), None) => Ok(class),
            _ => Err(GradError::InvalidAssertion(format!(
                "assertion {}: anchor {var} needs exactly one label-equality predicate",
                self.name
            ))),
        }
    }
}

/// Every entity of an anchored class must be bound by that anchor in at
/// least one match of the assertion pattern.
pub fn check_assertion(g: &GradGraph, a: &Assertion) -> Result<Vec<Violation>> {
    let matches = match_graph(g, &a.pattern)?;
    let mut out = Vec::new();
    for anchor in &a.anchor_vars {
        let class = a.anchor_class(anchor)?;
        let bound: BTreeSet<EntityId> = matches
            .iter()
            .filter_map(|m| match m.bindings.get(anchor) {
                Some(NodeRef::Entity(id)) => Some(*id),
                _ => None,
            })
            .collect();
        for (id, node) in g.entities() {
            if node.class_label() == class && !bound.contains(&id) {
                out.push(Violation {
                    rule: Rule::AssertionFailed {
                        assertion: a.name.clone(),
                    },
                    severity: Severity::Error,
                    elements: vec![format!("anchor={anchor}"), entity_key_string(g, id)],
                });
            }
        }
    }
    Ok(out)
}

/// Closed or half-open edge-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Range {
    pub min: u64,
    pub max: Option<u64>,
}

impl Range {
    pub fn new(min: u64, max: Option<u64>) -> Result<Self> {
        if let Some(mx) = max {
            if min > mx {
                return Err(GradError::InvalidMultiplicity(format!(
                    "range [{min}..{mx}] has min above max"
                )));
            }
        }
        Ok(Range { min, max })
    }

    /// `[0..*]`, the default when a side is unconstrained.
    pub fn unbounded() -> Self {
        Range { min: 0, max: None }
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.min && self.max.is_none_or(|mx| n <= mx)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.min, self.max) {
            (0, None) => f.write_str("[*]"),
            (min, None) => write!(f, "[{min}..*]"),
            (min, Some(max)) if min == max => write!(f, "[{min}]"),
            (min, Some(max)) => write!(f, "[{min}..{max}]"),
        }
    }
}

/// Bounds on the number of edges with a given label between two classes.
/// Edges are counted per node on each side, direction-agnostically: an edge
/// counts for a node when it touches the node and its other endpoint lies in
/// the opposite class. An optional kind filter restricts which edges count;
/// hierarchical kinds admit at most one outgoing parent edge, so bounds
/// demanding more than one on the source side are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplicity {
    pub source_class: String,
    pub edge_label: String,
    pub target_class: String,
    pub forward: Range,
    pub backward: Range,
    pub kind: Option<EntityEdgeKind>,
}

impl Multiplicity {
    pub fn new(
        source_class: &str,
        edge_label: &str,
        target_class: &str,
        forward: Range,
        backward: Range,
        kind: Option<EntityEdgeKind>,
    ) -> Result<Self> {
        if let Some(k) = kind {
            if k.is_hierarchical() && (forward.min > 1 || forward.max.is_some_and(|m| m > 1)) {
                return Err(GradError::InvalidMultiplicity(format!(
                    "{} edges admit at most one parent; forward bound {} is unsatisfiable",
                    k.name(),
                    forward
                )));
            }
        }
        Ok(Multiplicity {
            source_class: source_class.to_string(),
            edge_label: edge_label.to_string(),
            target_class: target_class.to_string(),
            forward,
            backward,
            kind,
        })
    }

    fn edge_counts(&self, g: &GradGraph) -> (BTreeMap<EntityId, u64>, BTreeMap<EntityId, u64>) {
        let class = |id: EntityId| g.entity(id).map(|n| n.class_label().to_string()).ok();
        let mut forward: BTreeMap<EntityId, u64> = BTreeMap::new();
        let mut backward: BTreeMap<EntityId, u64> = BTreeMap::new();
        for (id, node) in g.entities() {
            if node.class_label() == self.source_class {
                forward.insert(id, 0);
            }
            if node.class_label() == self.target_class {
                backward.insert(id, 0);
            }
        }
        for (_, e) in g.entity_edges() {
            if e.label() != self.edge_label {
                continue;
            }
            if let Some(k) = self.kind {
                if e.kind() != k {
                    continue;
                }
            }
            let (sc, tc) = (class(e.start()), class(e.end()));
            let endpoints: &[(EntityId, &Option<String>)] = if e.start() == e.end() {
                &[(e.start(), &tc)][..]
            } else {
                &[(e.start(), &tc), (e.end(), &sc)][..]
            };
            for &(node, other_class) in endpoints {
                if let Some(oc) = other_class {
                    if forward.contains_key(&node) && *oc == self.target_class {
                        *forward.get_mut(&node).unwrap() += 1;
                    }
                    if backward.contains_key(&node) && *oc == self.source_class {
                        *backward.get_mut(&node).unwrap() += 1;
                    }
                }
            }
        }
        (forward, backward)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.source_class, self.edge_label, self.target_class, self.forward, self.backward
        )?;
        if let Some(k) = self.kind {
            write!(f, " kind={}", k.name())?;
        }
        Ok(())
    }
}

/// Per-node edge counts on each side of the multiplicity must lie within its
/// ranges.
pub fn check_multiplicity(g: &GradGraph, m: &Multiplicity) -> Vec<Violation> {
    let (forward, backward) = m.edge_counts(g);
    let mut out = Vec::new();
    for (side, range, counts) in [
        ("forward", m.forward, &forward),
        ("backward", m.backward, &backward),
    ] {
        for (&id, &n) in counts {
            if !range.contains(n) {
                out.push(Violation {
                    rule: Rule::MultiplicityFailed {
                        spec: m.to_string(),
                        observed: n,
                    },
                    severity: Severity::Error,
                    elements: vec![
                        format!("side={side}"),
                        entity_key_string(g, id),
                        format!("required={range}"),
                    ],
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
            .count()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs every structural rule plus the given assertions and multiplicities,
/// returning the deterministically ordered aggregate report.
pub fn validate(
    g: &GradGraph,
    assertions: &[Assertion],
    multiplicities: &[Multiplicity],
) -> Result<ValidationReport> {
    validate_scoped(g, assertions, multiplicities, EdgeLabelScope::default())
}

pub fn validate_scoped(
    g: &GradGraph,
    assertions: &[Assertion],
    multiplicities: &[Multiplicity],
    scope: EdgeLabelScope,
) -> Result<ValidationReport> {
    let mut violations = check_entity_integrity_scoped(g, scope);
    violations.extend(check_structure(g));
    for a in assertions {
        violations.extend(check_assertion(g, a)?);
    }
    for m in multiplicities {
        violations.extend(check_multiplicity(g, m));
    }
    violations.sort_by(|a, b| {
        (a.rule.order_index(), &a.rule, &a.elements).cmp(&(
            b.rule.order_index(),
            &b.rule,
            &b.elements,
        ))
    });
    Ok(ValidationReport { violations })
}
