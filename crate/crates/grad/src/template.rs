//! Graph templates: graph-shaped output blueprints whose labels, identifier
//! values, literal values and edge attributes may be `${var.field}` slots
//! filled from the bindings of a pattern match.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{GradError, Result};
use crate::graph::{EntityEdgeKind, EntityId, GradGraph, NodeRef};
use crate::matcher::Match;
use crate::pattern::GraphPattern;
use crate::value::Value;

/// A string position that is either fixed or filled from a binding.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateStr {
    Const(String),
    Slot { var: String, field: String },
}

impl TemplateStr {
    pub fn constant(s: &str) -> Self {
        TemplateStr::Const(s.to_string())
    }

    pub fn slot(var: &str, field: &str) -> Self {
        TemplateStr::Slot {
            var: var.to_string(),
            field: field.to_string(),
        }
    }
}

impl fmt::Display for TemplateStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateStr::Const(s) => f.write_str(s),
            TemplateStr::Slot { var, field } => write!(f, "${{{var}.{field}}}"),
        }
    }
}

/// A value position that is either fixed or filled from a binding.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateValue {
    Const(Value),
    Slot { var: String, field: String },
}

impl TemplateValue {
    pub fn constant(v: Value) -> Self {
        TemplateValue::Const(v)
    }

    pub fn slot(var: &str, field: &str) -> Self {
        TemplateValue::Slot {
            var: var.to_string(),
            field: field.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateEntity {
    pub name: String,
    pub class: TemplateStr,
    pub identifiers: Vec<(String, TemplateValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAttribute {
    pub name: String,
    /// Template name of the owning entity.
    pub owner: String,
    pub label: TemplateStr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateLiteral {
    pub name: String,
    /// Template name of the owning attribute.
    pub owner: String,
    pub value: TemplateValue,
    pub context: Vec<(String, TemplateValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateEdge {
    pub start: String,
    pub end: String,
    pub kind: EntityEdgeKind,
    pub label: TemplateStr,
    pub attributes: Vec<(String, TemplateValue)>,
    /// Order the instantiated endpoints canonically by identity key, so the
    /// two matches of a symmetric pattern produce one identical edge.
    pub symmetric: bool,
}

/// The output blueprint for composition: entity nodes, their
/// attribute/literal subtrees, and the edges between them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphTemplate {
    pub entities: Vec<TemplateEntity>,
    pub attributes: Vec<TemplateAttribute>,
    pub literals: Vec<TemplateLiteral>,
    pub edges: Vec<TemplateEdge>,
}

impl GraphTemplate {
    pub fn new() -> Self {
        GraphTemplate::default()
    }

    pub fn entity(
        mut self,
        name: &str,
        class: TemplateStr,
        identifiers: Vec<(String, TemplateValue)>,
    ) -> Self {
        self.entities.push(TemplateEntity {
            name: name.to_string(),
            class,
            identifiers,
        });
        self
    }

    pub fn attribute(mut self, name: &str, owner: &str, label: TemplateStr) -> Self {
        self.attributes.push(TemplateAttribute {
            name: name.to_string(),
            owner: owner.to_string(),
            label,
        });
        self
    }

    pub fn literal(
        mut self,
        name: &str,
        owner: &str,
        value: TemplateValue,
        context: Vec<(String, TemplateValue)>,
    ) -> Self {
        self.literals.push(TemplateLiteral {
            name: name.to_string(),
            owner: owner.to_string(),
            value,
            context,
        });
        self
    }

    pub fn edge(
        mut self,
        start: &str,
        end: &str,
        kind: EntityEdgeKind,
        label: TemplateStr,
        attributes: Vec<(String, TemplateValue)>,
        symmetric: bool,
    ) -> Self {
        self.edges.push(TemplateEdge {
            start: start.to_string(),
            end: end.to_string(),
            kind,
            label,
            attributes,
            symmetric,
        });
        self
    }

    fn slots(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        fn push_str<'a>(s: &'a TemplateStr, out: &mut Vec<(&'a str, &'a str)>) {
            if let TemplateStr::Slot { var, field } = s {
                out.push((var.as_str(), field.as_str()));
            }
        }
        fn push_val<'a>(v: &'a TemplateValue, out: &mut Vec<(&'a str, &'a str)>) {
            if let TemplateValue::Slot { var, field } = v {
                out.push((var.as_str(), field.as_str()));
            }
        }
        for e in &self.entities {
            push_str(&e.class, &mut out);
            for (_, v) in &e.identifiers {
                push_val(v, &mut out);
            }
        }
        for a in &self.attributes {
            push_str(&a.label, &mut out);
        }
        for l in &self.literals {
            push_val(&l.value, &mut out);
            for (_, v) in &l.context {
                push_val(v, &mut out);
            }
        }
        for e in &self.edges {
            push_str(&e.label, &mut out);
            for (_, v) in &e.attributes {
                push_val(v, &mut out);
            }
        }
        out
    }

    /// Checks the template shape and that every slot variable is declared by
    /// the pattern. Instantiation assumes a validated template.
    pub fn validate(&self, pattern: &GraphPattern) -> Result<()> {
        let mut entity_names = BTreeSet::new();
        for e in &self.entities {
            if !entity_names.insert(e.name.as_str()) {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "duplicate template entity {}",
                    e.name
                )));
            }
            if e.identifiers.is_empty() {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "template entity {} has no identifiers",
                    e.name
                )));
            }
        }
        let mut attr_names = BTreeSet::new();
        for a in &self.attributes {
            if !attr_names.insert(a.name.as_str()) {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "duplicate template attribute {}",
                    a.name
                )));
            }
            if !entity_names.contains(a.owner.as_str()) {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "template attribute {} owned by unknown entity {}",
                    a.name, a.owner
                )));
            }
        }
        let mut literal_names = BTreeSet::new();
        for l in &self.literals {
            if !literal_names.insert(l.name.as_str()) {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "duplicate template literal {}",
                    l.name
                )));
            }
            if !attr_names.contains(l.owner.as_str()) {
                return Err(GradError::TemplateNotGradCompliant(format!(
                    "template literal {} owned by unknown attribute {}",
                    l.name, l.owner
                )));
            }
        }
        for e in &self.edges {
            for endpoint in [&e.start, &e.end] {
                if !entity_names.contains(endpoint.as_str()) {
                    return Err(GradError::TemplateNotGradCompliant(format!(
                        "template edge endpoint {endpoint} is not a template entity"
                    )));
                }
            }
        }
        for (var, field) in self.slots() {
            if pattern.find_node(var).is_none() {
                return Err(GradError::UnboundTemplateVariable(format!("{var}.{field}")));
            }
        }
        Ok(())
    }

    /// Builds one fresh graph from this template and a single match.
    pub fn instantiate(&self, g: &GradGraph, m: &Match) -> Result<GradGraph> {
        let not_compliant = |e: GradError| GradError::TemplateNotGradCompliant(e.to_string());
        let mut out = GradGraph::new();
        let mut entity_ids: BTreeMap<&str, EntityId> = BTreeMap::new();
        for e in &self.entities {
            let class = resolve_str(&e.class, g, m)?;
            let mut ids = BTreeMap::new();
            for (name, v) in &e.identifiers {
                ids.insert(name.clone(), resolve_value(v, g, m)?);
            }
            let id = out.add_entity_node(&class, ids).map_err(not_compliant)?;
            entity_ids.insert(e.name.as_str(), id);
        }
        let mut attr_ids = BTreeMap::new();
        for a in &self.attributes {
            let label = resolve_str(&a.label, g, m)?;
            let owner = entity_ids[a.owner.as_str()];
            let id = out.add_attribute(owner, &label).map_err(not_compliant)?;
            attr_ids.insert(a.name.as_str(), id);
        }
        for l in &self.literals {
            let value = resolve_value(&l.value, g, m)?;
            let mut ctx = BTreeMap::new();
            for (name, v) in &l.context {
                ctx.insert(name.clone(), resolve_value(v, g, m)?);
            }
            out.add_literal(attr_ids[l.owner.as_str()], value, ctx)
                .map_err(not_compliant)?;
        }
        for e in &self.edges {
            let label = resolve_str(&e.label, g, m)?;
            let mut attrs = BTreeMap::new();
            for (name, v) in &e.attributes {
                attrs.insert(name.clone(), resolve_value(v, g, m)?);
            }
            let (mut start, mut end) = (entity_ids[e.start.as_str()], entity_ids[e.end.as_str()]);
            if e.symmetric && out.entity_order_key(start) > out.entity_order_key(end) {
                std::mem::swap(&mut start, &mut end);
            }
            out.add_entity_edge(start, end, e.kind, &label, attrs)
                .map_err(not_compliant)?;
        }
        Ok(out)
    }
}

/// Reads `${var.field}` against a match: entity bindings expose `label` and
/// their identifier names, attribute bindings expose `label`, literal
/// bindings expose `value` and their context names.
fn slot_value(g: &GradGraph, m: &Match, var: &str, field: &str) -> Result<Value> {
    let missing = || GradError::UnboundTemplateVariable(format!("{var}.{field}"));
    let binding = m
        .bindings
        .get(var)
        .copied()
        .ok_or_else(|| GradError::UnboundTemplateVariable(var.to_string()))?;
    match binding {
        NodeRef::Entity(id) => {
            let n = g.entity(id)?;
            if field == "label" {
                Ok(Value::text(n.class_label()))
            } else {
                n.identifiers().get(field).cloned().ok_or_else(missing)
            }
        }
        NodeRef::Attribute(id) => {
            let n = g.attribute(id)?;
            if field == "label" {
                Ok(Value::text(n.label()))
            } else {
                Err(missing())
            }
        }
        NodeRef::Literal(id) => {
            let n = g.literal(id)?;
            if field == "value" {
                Ok(n.value().clone())
            } else {
                n.context().get(field).cloned().ok_or_else(missing)
            }
        }
    }
}

fn resolve_str(s: &TemplateStr, g: &GradGraph, m: &Match) -> Result<String> {
    match s {
        TemplateStr::Const(s) => Ok(s.clone()),
        TemplateStr::Slot { var, field } => Ok(match slot_value(g, m, var, field)? {
            Value::Text(s) => s,
            other => other.to_string(),
        }),
    }
}

fn resolve_value(v: &TemplateValue, g: &GradGraph, m: &Match) -> Result<Value> {
    match v {
        TemplateValue::Const(v) => Ok(v.clone()),
        TemplateValue::Slot { var, field } => slot_value(g, m, var, field),
    }
}
