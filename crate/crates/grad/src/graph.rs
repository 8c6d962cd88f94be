//! The graph store: three node partitions (entity, attribute, literal), a
//! multiset of labeled entity edges, and the implicit attribute/literal
//! edges that tie a hypernode together.
//!
//! Elements are addressed by opaque handles drawn from one per-graph counter,
//! so the partitions can never collide. Domain identity (identity keys) is a
//! separate notion checked by the constraint layer; a lax-mode graph may hold
//! several elements with the same key.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{GradError, Result};
use crate::key::{IdentityKey, KeyPart};
use crate::value::Value;

macro_rules! handle_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) u64);

        impl $name {
            pub fn raw(self) -> u64 {
                self.0
            }
        }
    };
}

handle_type!(
    /// Handle of an entity node.
    EntityId
);
handle_type!(
    /// Handle of an attribute node.
    AttrId
);
handle_type!(
    /// Handle of a literal node.
    LitId
);
handle_type!(
    /// Handle of an entity edge.
    EntityEdgeId
);

/// Any node, across the three partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Entity(EntityId),
    Attribute(AttrId),
    Literal(LitId),
}

/// Any edge. Attribute and literal edges are identified by their end node,
/// which has exactly one incident edge of that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeRef {
    Entity(EntityEdgeId),
    Attribute(AttrId),
    Literal(LitId),
}

/// Any graph element, for operations that span nodes and edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementRef {
    Node(NodeRef),
    Edge(EdgeRef),
}

/// The four entity-edge kinds. Generalization, aggregation and composition
/// are hierarchical: a node has at most one outgoing edge of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityEdgeKind {
    Association,
    Generalization,
    Aggregation,
    Composition,
}

impl EntityEdgeKind {
    pub fn is_hierarchical(self) -> bool {
        !matches!(self, EntityEdgeKind::Association)
    }

    pub fn name(self) -> &'static str {
        match self {
            EntityEdgeKind::Association => "association",
            EntityEdgeKind::Generalization => "generalization",
            EntityEdgeKind::Aggregation => "aggregation",
            EntityEdgeKind::Composition => "composition",
        }
    }
}

impl std::str::FromStr for EntityEdgeKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "association" => EntityEdgeKind::Association,
            "generalization" => EntityEdgeKind::Generalization,
            "aggregation" => EntityEdgeKind::Aggregation,
            "composition" => EntityEdgeKind::Composition,
            _ => return Err(()),
        })
    }
}

/// Insertion discipline. Lax (the default) admits duplicate identities and
/// leaves them to the validator; strict rejects them at insert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    Lax,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityNode {
    class_label: String,
    identifiers: BTreeMap<String, Value>,
}

impl EntityNode {
    pub fn class_label(&self) -> &str {
        &self.class_label
    }

    pub fn identifiers(&self) -> &BTreeMap<String, Value> {
        &self.identifiers
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeNode {
    label: String,
    owner: EntityId,
}

impl AttributeNode {
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The entity node this attribute belongs to (its attribute edge's start).
    pub fn owner(&self) -> EntityId {
        self.owner
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralNode {
    value: Value,
    owner: AttrId,
    context: BTreeMap<String, Value>,
}

impl LiteralNode {
    pub fn value(&self) -> &Value {
        &self.value
    }

    /// The attribute node this literal hangs off (its literal edge's start).
    pub fn owner(&self) -> AttrId {
        self.owner
    }

    /// Context map carried by the literal edge.
    pub fn context(&self) -> &BTreeMap<String, Value> {
        &self.context
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityEdge {
    start: EntityId,
    end: EntityId,
    kind: EntityEdgeKind,
    label: String,
    attributes: BTreeMap<String, Value>,
}

impl EntityEdge {
    pub fn start(&self) -> EntityId {
        self.start
    }

    pub fn end(&self) -> EntityId {
        self.end
    }

    pub fn kind(&self) -> EntityEdgeKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn attributes(&self) -> &BTreeMap<String, Value> {
        &self.attributes
    }
}

/// The two-level tree rooted at an entity node: its attribute nodes and
/// their literals. Edges are implied: (root, attr) and (attr, literal).
#[derive(Debug, Clone)]
pub struct Hypernode {
    pub root: EntityId,
    pub attribute_nodes: Vec<AttrId>,
    pub literal_nodes: Vec<LitId>,
}

impl Hypernode {
    pub fn node_count(&self) -> usize {
        1 + self.attribute_nodes.len() + self.literal_nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.attribute_nodes.len() + self.literal_nodes.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct GradGraph {
    mode: GraphModeField,
    next_handle: u64,
    entities: BTreeMap<EntityId, EntityNode>,
    attributes: BTreeMap<AttrId, AttributeNode>,
    literals: BTreeMap<LitId, LiteralNode>,
    entity_edges: BTreeMap<EntityEdgeId, EntityEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GraphModeField(GraphMode);

impl Default for GraphModeField {
    fn default() -> Self {
        GraphModeField(GraphMode::Lax)
    }
}

impl GradGraph {
    /// New empty graph in lax mode.
    pub fn new() -> Self {
        GradGraph::default()
    }

    pub fn with_mode(mode: GraphMode) -> Self {
        GradGraph {
            mode: GraphModeField(mode),
            ..GradGraph::default()
        }
    }

    pub fn mode(&self) -> GraphMode {
        self.mode.0
    }

    fn fresh(&mut self) -> u64 {
        let h = self.next_handle;
        self.next_handle += 1;
        h
    }

    // ---- insertion ----

    pub fn add_entity_node(
        &mut self,
        class_label: &str,
        identifiers: BTreeMap<String, Value>,
    ) -> Result<EntityId> {
        if class_label.is_empty() {
            return Err(GradError::EmptyLabel);
        }
        if identifiers.is_empty() || identifiers.keys().any(|k| k.is_empty()) {
            return Err(GradError::EmptyIdentifier);
        }
        if self.mode.0 == GraphMode::Strict {
            let key = strong_key(class_label, &identifiers);
            for id in self.entities.keys().copied().collect::<Vec<_>>() {
                if self.entity_key(id)? == key {
                    return Err(GradError::DuplicateIdentity(key.to_string()));
                }
            }
        }
        let id = EntityId(self.fresh());
        self.entities.insert(
            id,
            EntityNode {
                class_label: class_label.to_string(),
                identifiers,
            },
        );
        Ok(id)
    }

    pub fn add_entity_edge(
        &mut self,
        start: EntityId,
        end: EntityId,
        kind: EntityEdgeKind,
        label: &str,
        attributes: BTreeMap<String, Value>,
    ) -> Result<EntityEdgeId> {
        if !self.entities.contains_key(&start) || !self.entities.contains_key(&end) {
            return Err(GradError::UnknownNode);
        }
        if label.is_empty() {
            return Err(GradError::EmptyLabel);
        }
        for e in self.entity_edges.values() {
            if e.start == start && e.end == end && e.label == label {
                return Err(GradError::DuplicateEdgeLabelPair);
            }
            if kind.is_hierarchical() && e.start == start && e.kind == kind {
                return Err(GradError::DuplicateParentEdge(kind.name()));
            }
        }
        let id = EntityEdgeId(self.fresh());
        self.entity_edges.insert(
            id,
            EntityEdge {
                start,
                end,
                kind,
                label: label.to_string(),
                attributes,
            },
        );
        Ok(id)
    }

    /// Adds an attribute node (and its attribute edge) under an entity.
    /// Idempotent per (entity, label): re-adding returns the existing node.
    pub fn add_attribute(&mut self, entity: EntityId, label: &str) -> Result<AttrId> {
        if !self.entities.contains_key(&entity) {
            return Err(GradError::UnknownNode);
        }
        if label.is_empty() {
            return Err(GradError::EmptyLabel);
        }
        if let Some((id, _)) = self
            .attributes
            .iter()
            .find(|(_, a)| a.owner == entity && a.label == label)
        {
            return Ok(*id);
        }
        let id = AttrId(self.fresh());
        self.attributes.insert(
            id,
            AttributeNode {
                label: label.to_string(),
                owner: entity,
            },
        );
        Ok(id)
    }

    /// Adds a literal node and its literal edge carrying the context map.
    /// A sibling literal with the same context is admitted; the validator
    /// reports it as a warning.
    pub fn add_literal(
        &mut self,
        attribute: AttrId,
        value: Value,
        context: BTreeMap<String, Value>,
    ) -> Result<LitId> {
        if !self.attributes.contains_key(&attribute) {
            return Err(GradError::UnknownNode);
        }
        if let Some((name, _)) = context.iter().find(|(_, v)| v.is_composite()) {
            return Err(GradError::CompositeContextValue(name.clone()));
        }
        let id = LitId(self.fresh());
        self.literals.insert(
            id,
            LiteralNode {
                value,
                owner: attribute,
                context,
            },
        );
        Ok(id)
    }

    // ---- removal ----

    /// Removes a node and everything that depends on it: incident edges, the
    /// hypernode subtree for entities, and recursively every entity composed
    /// into a removed entity. Returns the number of removed elements
    /// (nodes plus edges, implicit parent edges included).
    pub fn remove_node(&mut self, node: NodeRef) -> Result<usize> {
        match node {
            NodeRef::Literal(l) => {
                self.literals.remove(&l).ok_or(GradError::UnknownNode)?;
                Ok(2)
            }
            NodeRef::Attribute(a) => {
                self.attributes.remove(&a).ok_or(GradError::UnknownNode)?;
                let lits: Vec<LitId> = self
                    .literals
                    .iter()
                    .filter(|(_, n)| n.owner == a)
                    .map(|(id, _)| *id)
                    .collect();
                for l in &lits {
                    self.literals.remove(l);
                }
                Ok(2 + lits.len() * 2)
            }
            NodeRef::Entity(e) => {
                if !self.entities.contains_key(&e) {
                    return Err(GradError::UnknownNode);
                }
                let mut doomed = BTreeSet::new();
                let mut queue = vec![e];
                while let Some(v) = queue.pop() {
                    if !doomed.insert(v) {
                        continue;
                    }
                    for edge in self.entity_edges.values() {
                        if edge.end == v
                            && edge.kind == EntityEdgeKind::Composition
                            && !doomed.contains(&edge.start)
                        {
                            queue.push(edge.start);
                        }
                    }
                }
                let mut count = 0;
                let edge_ids: Vec<EntityEdgeId> = self
                    .entity_edges
                    .iter()
                    .filter(|(_, ed)| doomed.contains(&ed.start) || doomed.contains(&ed.end))
                    .map(|(id, _)| *id)
                    .collect();
                for id in edge_ids {
                    self.entity_edges.remove(&id);
                    count += 1;
                }
                let attr_ids: Vec<AttrId> = self
                    .attributes
                    .iter()
                    .filter(|(_, a)| doomed.contains(&a.owner))
                    .map(|(id, _)| *id)
                    .collect();
                for a in attr_ids {
                    self.attributes.remove(&a);
                    count += 2;
                    let lits: Vec<LitId> = self
                        .literals
                        .iter()
                        .filter(|(_, n)| n.owner == a)
                        .map(|(id, _)| *id)
                        .collect();
                    for l in lits {
                        self.literals.remove(&l);
                        count += 2;
                    }
                }
                for v in &doomed {
                    self.entities.remove(v);
                    count += 1;
                }
                Ok(count)
            }
        }
    }

    // ---- views ----

    pub fn entity(&self, id: EntityId) -> Result<&EntityNode> {
        self.entities.get(&id).ok_or(GradError::UnknownNode)
    }

    pub fn attribute(&self, id: AttrId) -> Result<&AttributeNode> {
        self.attributes.get(&id).ok_or(GradError::UnknownNode)
    }

    pub fn literal(&self, id: LitId) -> Result<&LiteralNode> {
        self.literals.get(&id).ok_or(GradError::UnknownNode)
    }

    pub fn entity_edge(&self, id: EntityEdgeId) -> Result<&EntityEdge> {
        self.entity_edges.get(&id).ok_or(GradError::UnknownEdge)
    }

    pub fn entities(&self) -> impl Iterator<Item = (EntityId, &EntityNode)> {
        self.entities.iter().map(|(id, n)| (*id, n))
    }

    pub fn attributes(&self) -> impl Iterator<Item = (AttrId, &AttributeNode)> {
        self.attributes.iter().map(|(id, n)| (*id, n))
    }

    pub fn literals(&self) -> impl Iterator<Item = (LitId, &LiteralNode)> {
        self.literals.iter().map(|(id, n)| (*id, n))
    }

    pub fn entity_edges(&self) -> impl Iterator<Item = (EntityEdgeId, &EntityEdge)> {
        self.entity_edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn literal_count(&self) -> usize {
        self.literals.len()
    }

    pub fn entity_edge_count(&self) -> usize {
        self.entity_edges.len()
    }

    /// Attribute edges, one per attribute node: (owner entity, attribute).
    pub fn attribute_edges(&self) -> impl Iterator<Item = (EntityId, AttrId)> + '_ {
        self.attributes.iter().map(|(id, a)| (a.owner, *id))
    }

    /// Literal edges, one per literal node: (owner attribute, literal, context).
    pub fn literal_edges(&self) -> impl Iterator<Item = (AttrId, LitId, &BTreeMap<String, Value>)> {
        self.literals
            .iter()
            .map(|(id, l)| (l.owner, *id, &l.context))
    }

    pub fn edge_count(&self) -> usize {
        self.entity_edges.len() + self.attributes.len() + self.literals.len()
    }

    pub fn node_count(&self) -> usize {
        self.entities.len() + self.attributes.len() + self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    pub fn contains_node(&self, node: NodeRef) -> bool {
        match node {
            NodeRef::Entity(e) => self.entities.contains_key(&e),
            NodeRef::Attribute(a) => self.attributes.contains_key(&a),
            NodeRef::Literal(l) => self.literals.contains_key(&l),
        }
    }

    pub fn hypernode_of(&self, entity: EntityId) -> Result<Hypernode> {
        if !self.entities.contains_key(&entity) {
            return Err(GradError::UnknownNode);
        }
        let attribute_nodes: Vec<AttrId> = self
            .attributes
            .iter()
            .filter(|(_, a)| a.owner == entity)
            .map(|(id, _)| *id)
            .collect();
        let literal_nodes: Vec<LitId> = self
            .literals
            .iter()
            .filter(|(_, l)| attribute_nodes.contains(&l.owner))
            .map(|(id, _)| *id)
            .collect();
        Ok(Hypernode {
            root: entity,
            attribute_nodes,
            literal_nodes,
        })
    }

    // ---- identity ----

    /// The node a weak entity is composed into, if any.
    pub fn composition_parent(&self, entity: EntityId) -> Option<EntityId> {
        self.entity_edges
            .values()
            .find(|e| e.start == entity && e.kind == EntityEdgeKind::Composition)
            .map(|e| e.end)
    }

    pub fn identity_key(&self, element: ElementRef) -> Result<IdentityKey> {
        match element {
            ElementRef::Node(NodeRef::Entity(e)) => self.entity_key(e),
            ElementRef::Node(NodeRef::Attribute(a)) => {
                let attr = self.attribute(a)?;
                Ok(IdentityKey::attribute(
                    &attr.label,
                    self.entity_key(attr.owner)?,
                ))
            }
            ElementRef::Edge(EdgeRef::Entity(e)) => {
                let edge = self.entity_edge(e)?;
                Ok(IdentityKey::edge(
                    &edge.label,
                    self.entity_key(edge.start)?,
                    self.entity_key(edge.end)?,
                ))
            }
            _ => Err(GradError::UnsupportedElement),
        }
    }

    pub fn entity_key(&self, entity: EntityId) -> Result<IdentityKey> {
        self.entity_key_inner(entity, &mut BTreeSet::new())
    }

    fn entity_key_inner(
        &self,
        entity: EntityId,
        visiting: &mut BTreeSet<EntityId>,
    ) -> Result<IdentityKey> {
        let node = self.entity(entity)?;
        if !visiting.insert(entity) {
            return Err(GradError::CompositionCycle);
        }
        let ids: Vec<(String, Value)> = node
            .identifiers
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let key = match self.composition_parent(entity) {
            Some(parent) => {
                let parent_key = self.entity_key_inner(parent, visiting)?;
                IdentityKey::weak(&node.class_label, parent_key, ids)
            }
            None => IdentityKey::strong(&node.class_label, ids),
        };
        visiting.remove(&entity);
        Ok(key)
    }

    /// Total ordering key for an entity: the identity key, or a
    /// cycle-flagged (class, identifiers) fallback when the composition
    /// chain is cyclic. Serialization and match ordering stay total even
    /// over graphs the validator would reject.
    pub fn entity_order_key(&self, entity: EntityId) -> IdentityKey {
        match self.entity_key(entity) {
            Ok(k) => k,
            Err(_) => {
                let node = &self.entities[&entity];
                let ids: Vec<(String, Value)> = node
                    .identifiers
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                IdentityKey(vec![
                    KeyPart::Label(node.class_label.clone()),
                    KeyPart::CycleMark,
                    KeyPart::Identifiers(ids),
                ])
            }
        }
    }

    pub fn edge_order_key(&self, edge: EntityEdgeId) -> IdentityKey {
        let e = &self.entity_edges[&edge];
        IdentityKey::edge(
            &e.label,
            self.entity_order_key(e.start),
            self.entity_order_key(e.end),
        )
    }

    pub fn attribute_order_key(&self, attr: AttrId) -> IdentityKey {
        let a = &self.attributes[&attr];
        IdentityKey::attribute(&a.label, self.entity_order_key(a.owner))
    }
}

fn strong_key(class: &str, ids: &BTreeMap<String, Value>) -> IdentityKey {
    IdentityKey::strong(
        class,
        ids.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
    )
}
