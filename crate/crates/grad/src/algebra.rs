//! The six whole-graph operators: selection, cartesian product, composition,
//! union, difference and join. All operators are pure — inputs are never
//! mutated, outputs are fresh graphs with fresh handles — and all outputs
//! are lax-mode graphs (union in particular must be able to hold duplicate
//! identities).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{GradError, Result};
use crate::graph::{AttrId, EntityEdgeId, EntityId, GradGraph, NodeRef};
use crate::key::IdentityKey;
use crate::matcher::match_graph;
use crate::pattern::{map_value, AtomicPredicate, GraphPattern, PatternEdgeKind, PredicateTarget};
use crate::template::GraphTemplate;
use crate::value::{CompOp, Value};

/// An ordered set of graphs, kept in canonical order (members sorted by
/// their content fingerprints, which lead with the sorted entity identity
/// keys).
#[derive(Debug, Clone, Default)]
pub struct GraphCollection {
    pub graphs: Vec<GradGraph>,
}

impl GraphCollection {
    pub fn new() -> Self {
        GraphCollection::default()
    }

    pub fn from_graphs(graphs: Vec<GradGraph>) -> Self {
        let mut c = GraphCollection { graphs };
        c.canonicalize();
        c
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GradGraph> {
        self.graphs.iter()
    }

    fn canonicalize(&mut self) {
        self.graphs.sort_by_cached_key(fingerprint);
    }
}

/// Handle-independent content summary: equal fingerprints mean the graphs
/// are isomorphic up to internal handles (and graph mode).
pub(crate) type Fingerprint = (
    Vec<IdentityKey>,
    Vec<IdentityKey>,
    Vec<(IdentityKey, Vec<(String, Value)>, Value)>,
    Vec<(IdentityKey, &'static str, Vec<(String, Value)>)>,
);

pub(crate) fn fingerprint(g: &GradGraph) -> Fingerprint {
    let mut entities: Vec<IdentityKey> =
        g.entities().map(|(id, _)| g.entity_order_key(id)).collect();
    entities.sort();
    let mut attrs: Vec<IdentityKey> = g
        .attributes()
        .map(|(id, _)| g.attribute_order_key(id))
        .collect();
    attrs.sort();
    #[allow(clippy::type_complexity)]
    let mut literals: Vec<(IdentityKey, Vec<(String, Value)>, Value)> = g
        .literals()
        .map(|(_, l)| {
            (
                g.attribute_order_key(l.owner()),
                l.context()
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
                l.value().clone(),
            )
        })
        .collect();
    literals.sort();
    #[allow(clippy::type_complexity)]
    let mut edges: Vec<(IdentityKey, &'static str, Vec<(String, Value)>)> = g
        .entity_edges()
        .map(|(id, e)| {
            (
                g.edge_order_key(id),
                e.kind().name(),
                e.attributes()
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            )
        })
        .collect();
    edges.sort();
    (entities, attrs, literals, edges)
}

/// Copies every element of `src` into `dst` under fresh handles, returning
/// the entity handle mapping. Valid graphs always copy cleanly.
pub(crate) fn copy_into(dst: &mut GradGraph, src: &GradGraph) -> BTreeMap<EntityId, EntityId> {
    let mut entity_map = BTreeMap::new();
    for (id, n) in src.entities() {
        let copy = dst
            .add_entity_node(n.class_label(), n.identifiers().clone())
            .expect("entity copies cleanly");
        entity_map.insert(id, copy);
    }
    let mut attr_map = BTreeMap::new();
    for (id, a) in src.attributes() {
        let copy = dst
            .add_attribute(entity_map[&a.owner()], a.label())
            .expect("attribute copies cleanly");
        attr_map.insert(id, copy);
    }
    for (_, l) in src.literals() {
        dst.add_literal(attr_map[&l.owner()], l.value().clone(), l.context().clone())
            .expect("literal copies cleanly");
    }
    for (_, e) in src.entity_edges() {
        dst.add_entity_edge(
            entity_map[&e.start()],
            entity_map[&e.end()],
            e.kind(),
            e.label(),
            e.attributes().clone(),
        )
        .expect("edge copies cleanly");
    }
    entity_map
}

/// σ: every match of the pattern, materialized as an independent subgraph.
pub fn selection(g: &GradGraph, p: &GraphPattern) -> Result<GraphCollection> {
    let matches = match_graph(g, p)?;
    let mut graphs = Vec::with_capacity(matches.len());
    for m in matches.iter() {
        graphs.push(m.subgraph(g)?);
    }
    Ok(GraphCollection::from_graphs(graphs))
}

/// ×: all pairs, each pair juxtaposed disjointly into one graph (no new
/// edges, no merging).
pub fn cartesian_product(s1: &GraphCollection, s2: &GraphCollection) -> GraphCollection {
    let mut graphs = Vec::with_capacity(s1.len() * s2.len());
    for g1 in s1.iter() {
        for g2 in s2.iter() {
            graphs.push(union(g1, g2));
        }
    }
    GraphCollection::from_graphs(graphs)
}

/// ∪: both inputs side by side under fresh handles. Elements sharing an
/// identity key both survive — the result is unified, not merged, and the
/// validator reports the duplicates.
pub fn union(g: &GradGraph, h: &GradGraph) -> GradGraph {
    let mut out = GradGraph::new();
    copy_into(&mut out, g);
    copy_into(&mut out, h);
    out
}

/// ω: instantiates the template once per match of the pattern, then merges
/// all instances by identity key into a single graph.
pub fn composition(g: &GradGraph, p: &GraphPattern, t: &GraphTemplate) -> Result<GradGraph> {
    t.validate(p)?;
    let matches = match_graph(g, p)?;
    let mut acc = GradGraph::new();
    for m in matches.iter() {
        let instance = t.instantiate(g, m)?;
        copy_into(&mut acc, &instance);
    }
    unify_all_by_key(&acc).map_err(|e| match e {
        GradError::CompositionCycle => GradError::TemplateNotGradCompliant(
            "instantiated template forms a hierarchical cycle".into(),
        ),
        other => other,
    })
}

/// −: converts each connected component of `h` into an exact pattern
/// (whole-key equality on every node, exact labels, kinds and attribute
/// maps on every edge), removes every match's nodes from a copy of `g`, and
/// lets the removal cascade handle incident edges and orphaned weak parts.
pub fn difference(g: &GradGraph, h: &GradGraph) -> Result<GradGraph> {
    let mut out = GradGraph::new();
    copy_into(&mut out, g);
    let mut doomed: BTreeSet<NodeRef> = BTreeSet::new();
    for component in components(h) {
        let pattern = exact_pattern(h, &component)?;
        let matches = match_graph(&out, &pattern)?;
        for m in matches.iter() {
            doomed.extend(m.bindings.values().copied());
        }
    }
    // Entities sort first, so subtree cascades run before their leftovers
    // come up for removal.
    for node in doomed {
        if out.contains_node(node) {
            out.remove_node(node)?;
        }
    }
    Ok(out)
}

/// Connected components of the entity layer (edges taken undirected), each
/// listed in ascending handle order.
fn components(g: &GradGraph) -> Vec<Vec<EntityId>> {
    let mut uf = UnionFind::new(g.entities().map(|(id, _)| id));
    for (_, e) in g.entity_edges() {
        uf.unite(e.start(), e.end());
    }
    let mut buckets: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for (id, _) in g.entities() {
        buckets.entry(uf.find(id)).or_default().push(id);
    }
    buckets.into_values().collect()
}

/// Builds the pattern that matches exact copies of one component of `h`:
/// whole identity keys on entities, labels on attributes, values plus whole
/// context maps on literals, and label/kind/whole-attribute-map equality on
/// entity edges.
fn exact_pattern(h: &GradGraph, component: &[EntityId]) -> Result<GraphPattern> {
    let mut p = GraphPattern::new();
    let mut entity_vars: BTreeMap<EntityId, String> = BTreeMap::new();
    for (i, &id) in component.iter().enumerate() {
        let var = format!("n{i}");
        let key = h.entity_key(id)?;
        p = p.entity(
            &var,
            vec![AtomicPredicate::new(
                PredicateTarget::EntityKey,
                CompOp::Eq,
                key.to_value(),
            )],
        );
        entity_vars.insert(id, var);
    }
    let mut counter = 0usize;
    for (owner, attr_id) in h.attribute_edges() {
        let Some(owner_var) = entity_vars.get(&owner) else {
            continue;
        };
        let attr = h.attribute(attr_id)?;
        let attr_var = format!("a{counter}");
        p = p
            .attribute(&attr_var, vec![AtomicPredicate::label_eq(attr.label())])
            .attribute_edge(owner_var, &attr_var);
        let mut lit_counter = 0usize;
        for (lit_owner, _lit_id, ctx) in h.literal_edges() {
            if lit_owner != attr_id {
                continue;
            }
            let lit = h.literal(_lit_id)?;
            let lit_var = format!("{attr_var}l{lit_counter}");
            p = p
                .literal(
                    &lit_var,
                    vec![AtomicPredicate::literal_value(
                        CompOp::Eq,
                        lit.value().clone(),
                    )],
                )
                .literal_edge(
                    &attr_var,
                    &lit_var,
                    vec![AtomicPredicate::new(
                        PredicateTarget::AttributeMap,
                        CompOp::Eq,
                        map_value(ctx),
                    )],
                );
            lit_counter += 1;
        }
        counter += 1;
    }
    for (_, e) in h.entity_edges() {
        let (Some(sv), Some(tv)) = (entity_vars.get(&e.start()), entity_vars.get(&e.end())) else {
            continue;
        };
        p = p.edge(
            sv,
            tv,
            PatternEdgeKind::Entity(Some(e.kind())),
            vec![
                AtomicPredicate::edge_label_eq(e.label()),
                AtomicPredicate::new(
                    PredicateTarget::AttributeMap,
                    CompOp::Eq,
                    map_value(e.attributes()),
                ),
            ],
        );
    }
    Ok(p)
}

/// One merge criterion: entities of `class_label` merge when they agree on
/// every identifier named in `match_on`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub class_label: String,
    pub match_on: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinPredicate {
    pub rules: Vec<MergeRule>,
}

impl JoinPredicate {
    pub fn new(rules: Vec<MergeRule>) -> Result<Self> {
        for r in &rules {
            if r.match_on.is_empty() {
                return Err(GradError::InvalidJoinRule(format!(
                    "rule for class {} names no identifiers",
                    r.class_label
                )));
            }
            if r.class_label.is_empty() {
                return Err(GradError::InvalidJoinRule("empty class label".into()));
            }
        }
        Ok(JoinPredicate { rules })
    }
}

/// ⋈: pairs the collections, keeps the pairs where the predicate merges at
/// least one entity across the two sides, and unifies each kept pair.
/// Strong entities merge directly on rule agreement; weak entities (those
/// with a composition parent) merge only once their parents have merged.
pub fn join(
    s1: &GraphCollection,
    s2: &GraphCollection,
    pr: &JoinPredicate,
) -> Result<GraphCollection> {
    let mut graphs = Vec::new();
    for g1 in s1.iter() {
        for g2 in s2.iter() {
            let mut combined = GradGraph::new();
            copy_into(&mut combined, g1);
            let from_second: BTreeSet<EntityId> =
                copy_into(&mut combined, g2).into_values().collect();
            let (roots, merged_cross_pair) = merge_roots(&combined, pr, &from_second);
            if !merged_cross_pair {
                continue;
            }
            graphs.push(unify_groups(&combined, &roots)?);
        }
    }
    Ok(GraphCollection::from_graphs(graphs))
}

/// Computes the merge groups for one combined pair graph. Returns the
/// node → group-root map and whether any merge united nodes from the two
/// different sides. The ETL loader reuses this with an empty `from_second`
/// set to fold tabular rows into hypernodes.
pub(crate) fn merge_roots(
    g: &GradGraph,
    pr: &JoinPredicate,
    from_second: &BTreeSet<EntityId>,
) -> (BTreeMap<EntityId, EntityId>, bool) {
    let mut candidate_pairs: Vec<(EntityId, EntityId)> = Vec::new();
    for rule in &pr.rules {
        // Bucket the rule's class by the tuple of matched identifier values;
        // nodes missing any named identifier never merge.
        let mut buckets: BTreeMap<Vec<Value>, Vec<EntityId>> = BTreeMap::new();
        for (id, n) in g.entities() {
            if n.class_label() != rule.class_label {
                continue;
            }
            let values: Option<Vec<Value>> = rule
                .match_on
                .iter()
                .map(|name| n.identifiers().get(name).cloned())
                .collect();
            if let Some(values) = values {
                buckets.entry(values).or_default().push(id);
            }
        }
        for members in buckets.into_values() {
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    candidate_pairs.push((members[i], members[j]));
                }
            }
        }
    }

    let mut uf = UnionFind::new(g.entities().map(|(id, _)| id));
    let is_weak = |id: EntityId| g.composition_parent(id).is_some();
    // Strong pairs merge unconditionally; weak pairs wait for their parents,
    // so iterate to a fixpoint (each pass unites at least one pair).
    for &(a, b) in &candidate_pairs {
        if !is_weak(a) && !is_weak(b) {
            uf.unite(a, b);
        }
    }
    loop {
        let mut changed = false;
        for &(a, b) in &candidate_pairs {
            if uf.find(a) == uf.find(b) {
                continue;
            }
            if let (Some(pa), Some(pb)) = (g.composition_parent(a), g.composition_parent(b)) {
                if uf.find(pa) == uf.find(pb) {
                    uf.unite(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let merged_cross_pair = candidate_pairs.iter().any(|&(a, b)| {
        uf.find(a) == uf.find(b) && (from_second.contains(&a) != from_second.contains(&b))
    });
    let roots: BTreeMap<EntityId, EntityId> =
        g.entities().map(|(id, _)| (id, uf.find(id))).collect();
    (roots, merged_cross_pair)
}

/// Merges every group of entities sharing an identity key. Used by
/// composition (and the streaming loader) to collapse per-instance
/// duplicates.
pub(crate) fn unify_all_by_key(g: &GradGraph) -> Result<GradGraph> {
    let mut buckets: BTreeMap<IdentityKey, EntityId> = BTreeMap::new();
    let mut roots: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    for (id, _) in g.entities() {
        let key = g.entity_key(id)?;
        let root = *buckets.entry(key).or_insert(id);
        roots.insert(id, root);
    }
    unify_groups(g, &roots)
}

/// Rebuilds `g` with each entity group collapsed to one node: identifier
/// maps union (disagreement on a shared name is an error), attributes merge
/// by label under the merged owner, literals merge by context plus value
/// (context-equal value-different literals stay side by side), and entity
/// edges merge by ⟨label, start, end⟩ with canonically-first kind and
/// attribute values winning conflicts.
pub(crate) fn unify_groups(
    g: &GradGraph,
    root_of: &BTreeMap<EntityId, EntityId>,
) -> Result<GradGraph> {
    let mut out = GradGraph::new();
    let mut members: BTreeMap<EntityId, Vec<EntityId>> = BTreeMap::new();
    for (id, _) in g.entities() {
        members.entry(root_of[&id]).or_default().push(id);
    }

    let mut entity_map: BTreeMap<EntityId, EntityId> = BTreeMap::new();
    for (&root, group) in &members {
        let mut ids: BTreeMap<String, Value> = BTreeMap::new();
        for &member in group {
            for (name, value) in g.entity(member)?.identifiers() {
                match ids.get(name) {
                    None => {
                        ids.insert(name.clone(), value.clone());
                    }
                    Some(existing) if existing == value => {}
                    Some(_) => {
                        let key = g
                            .entity_key(member)
                            .map(|k| k.to_string())
                            .unwrap_or_else(|_| g.entity(member).unwrap().class_label().into());
                        return Err(GradError::ConflictingIdentifiers {
                            name: name.clone(),
                            key,
                        });
                    }
                }
            }
        }
        let class = g.entity(root)?.class_label().to_string();
        let merged = out.add_entity_node(&class, ids)?;
        for &member in group {
            entity_map.insert(member, merged);
        }
    }

    let mut attr_map: BTreeMap<AttrId, AttrId> = BTreeMap::new();
    for (id, a) in g.attributes() {
        let merged_owner = entity_map[&a.owner()];
        // add_attribute is idempotent per (owner, label): merge by label.
        attr_map.insert(id, out.add_attribute(merged_owner, a.label())?);
    }

    let mut seen_literals: BTreeSet<(AttrId, BTreeMap<String, Value>, Value)> = BTreeSet::new();
    for (_, l) in g.literals() {
        let target = attr_map[&l.owner()];
        if seen_literals.insert((target, l.context().clone(), l.value().clone())) {
            out.add_literal(target, l.value().clone(), l.context().clone())?;
        }
    }

    let mut edge_groups: BTreeMap<(String, EntityId, EntityId), Vec<EntityEdgeId>> =
        BTreeMap::new();
    for (id, e) in g.entity_edges() {
        edge_groups
            .entry((
                e.label().to_string(),
                entity_map[&e.start()],
                entity_map[&e.end()],
            ))
            .or_default()
            .push(id);
    }
    for ((label, start, end), mut group) in edge_groups {
        group.sort_by_cached_key(|id| {
            let e = g.entity_edge(*id).expect("grouped edge exists");
            (e.kind().name(), e.attributes().clone(), id.raw())
        });
        let first = g.entity_edge(group[0])?;
        let mut attrs = BTreeMap::new();
        for id in &group {
            for (name, value) in g.entity_edge(*id)?.attributes() {
                attrs.entry(name.clone()).or_insert_with(|| value.clone());
            }
        }
        out.add_entity_edge(start, end, first.kind(), &label, attrs)?;
    }

    Ok(out)
}

/// Entity-handle union-find with the smallest member as root.
struct UnionFind {
    parent: BTreeMap<EntityId, EntityId>,
}

impl UnionFind {
    fn new(ids: impl Iterator<Item = EntityId>) -> Self {
        UnionFind {
            parent: ids.map(|id| (id, id)).collect(),
        }
    }

    fn find(&mut self, id: EntityId) -> EntityId {
        let p = self.parent[&id];
        if p == id {
            return id;
        }
        let root = self.find(p);
        self.parent.insert(id, root);
        root
    }

    fn unite(&mut self, a: EntityId, b: EntityId) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (min, max) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(max, min);
    }
}
