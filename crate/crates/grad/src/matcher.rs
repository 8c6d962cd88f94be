//! Subgraph-isomorphism matching of patterns against graphs.
//!
//! `match_graph` runs a predicate-pruned backtracking search: pattern nodes
//! are processed in ascending candidate-set order, candidates are
//! pre-filtered on node-local predicates and degree, and each assignment is
//! checked against pattern edges whose other endpoint is already bound (with
//! a one-step lookahead on unbound neighbors). `brute_force_match` is the
//! deliberately naive oracle: declaration-order enumeration of injective
//! assignments over unindexed scans. Both enumerate parallel-edge choices as
//! distinct matches.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{GradError, Result};
use crate::graph::{EdgeRef, EntityId, GradGraph, NodeRef};
use crate::key::IdentityKey;
use crate::pattern::{
    edge_satisfies, node_satisfies, validate_pattern, GraphPattern, PatternEdge, PatternEdgeKind,
    PatternNodeKind,
};
use crate::value::Value;

/// One way the pattern embeds into the graph: a node binding per pattern
/// variable plus one bound edge per pattern edge (in pattern-edge order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub bindings: BTreeMap<String, NodeRef>,
    pub edge_bindings: Vec<EdgeRef>,
}

impl Match {
    pub fn node(&self, var: &str) -> Option<NodeRef> {
        self.bindings.get(var).copied()
    }

    /// Copies the bound elements into a fresh graph: the induced matched
    /// fragment. Pattern validity guarantees every bound attribute/literal
    /// has its owner bound as well.
    pub fn subgraph(&self, g: &GradGraph) -> Result<GradGraph> {
        let mut out = GradGraph::new();
        let mut entity_map: BTreeMap<EntityId, EntityId> = BTreeMap::new();
        for r in self.bindings.values() {
            if let NodeRef::Entity(id) = r {
                let n = g.entity(*id)?;
                let copy = out.add_entity_node(n.class_label(), n.identifiers().clone())?;
                entity_map.insert(*id, copy);
            }
        }
        let mut attr_map = BTreeMap::new();
        for r in self.bindings.values() {
            if let NodeRef::Attribute(id) = r {
                let a = g.attribute(*id)?;
                let owner = entity_map
                    .get(&a.owner())
                    .copied()
                    .ok_or(GradError::UnknownNode)?;
                attr_map.insert(*id, out.add_attribute(owner, a.label())?);
            }
        }
        for r in self.bindings.values() {
            if let NodeRef::Literal(id) = r {
                let l = g.literal(*id)?;
                let owner = attr_map
                    .get(&l.owner())
                    .copied()
                    .ok_or(GradError::UnknownNode)?;
                out.add_literal(owner, l.value().clone(), l.context().clone())?;
            }
        }
        for b in &self.edge_bindings {
            if let EdgeRef::Entity(id) = b {
                let e = g.entity_edge(*id)?;
                let (Some(s), Some(t)) = (entity_map.get(&e.start()), entity_map.get(&e.end()))
                else {
                    return Err(GradError::UnknownNode);
                };
                out.add_entity_edge(*s, *t, e.kind(), e.label(), e.attributes().clone())?;
            }
        }
        Ok(out)
    }
}

/// All matches, in canonical order: sorted by the identity keys of bound
/// entity nodes in variable declaration order, full binding and edge-binding
/// content as tiebreak.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchSet {
    pub matches: Vec<Match>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Match> {
        self.matches.iter()
    }

    /// Order- and subgraph-insensitive equality: same set of binding maps.
    pub fn same_bindings(&self, other: &MatchSet) -> bool {
        let a: BTreeSet<_> = self
            .matches
            .iter()
            .map(|m| (m.bindings.clone(), m.edge_bindings.clone()))
            .collect();
        let b: BTreeSet<_> = other
            .matches
            .iter()
            .map(|m| (m.bindings.clone(), m.edge_bindings.clone()))
            .collect();
        a == b
    }

    fn canonicalize(mut self, g: &GradGraph, p: &GraphPattern) -> Self {
        let var_order: Vec<&str> = p.nodes.iter().map(|n| n.var.as_str()).collect();
        self.matches.sort_by_cached_key(|m| {
            let entity_keys: Vec<IdentityKey> = var_order
                .iter()
                .filter_map(|v| match m.bindings.get(*v) {
                    Some(NodeRef::Entity(id)) => Some(g.entity_order_key(*id)),
                    _ => None,
                })
                .collect();
            #[allow(clippy::type_complexity)]
            let tokens: Vec<(
                u8,
                IdentityKey,
                Vec<(String, Value)>,
                Option<Value>,
                u64,
            )> = var_order
                .iter()
                .filter_map(|v| m.bindings.get(*v))
                .map(|r| binding_token(g, *r))
                .collect();
            let edges: Vec<u64> = m.edge_bindings.iter().map(edge_raw).collect();
            (entity_keys, tokens, edges)
        });
        self
    }
}

fn binding_token(
    g: &GradGraph,
    r: NodeRef,
) -> (u8, IdentityKey, Vec<(String, Value)>, Option<Value>, u64) {
    match r {
        NodeRef::Entity(id) => (0, g.entity_order_key(id), vec![], None, id.raw()),
        NodeRef::Attribute(id) => (1, g.attribute_order_key(id), vec![], None, id.raw()),
        NodeRef::Literal(id) => {
            let l = &g.literal(id).expect("bound literal in graph");
            let ctx = l
                .context()
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            (
                2,
                g.attribute_order_key(l.owner()),
                ctx,
                Some(l.value().clone()),
                id.raw(),
            )
        }
    }
}

fn edge_raw(e: &EdgeRef) -> u64 {
    match e {
        EdgeRef::Entity(id) => id.raw(),
        EdgeRef::Attribute(id) => id.raw(),
        EdgeRef::Literal(id) => id.raw(),
    }
}

/// Finds every match of `p` in `g`.
pub fn match_graph(g: &GradGraph, p: &GraphPattern) -> Result<MatchSet> {
    match_graph_limited(g, p, None)
}

/// Like [`match_graph`], aborting with `MatchLimitExceeded` when more than
/// `limit` matches exist.
pub fn match_graph_limited(
    g: &GradGraph,
    p: &GraphPattern,
    limit: Option<usize>,
) -> Result<MatchSet> {
    let violations = validate_pattern(p);
    if !violations.is_empty() {
        return Err(GradError::InvalidPattern(violations));
    }
    if p.nodes.is_empty() {
        // The vacuous bijection.
        return Ok(MatchSet {
            matches: vec![Match {
                bindings: BTreeMap::new(),
                edge_bindings: Vec::new(),
            }],
        });
    }

    let search = Search::new(g, p);
    let mut matches = Vec::new();
    search.run(&mut matches, limit)?;
    Ok(MatchSet { matches }.canonicalize(g, p))
}

/// Precomputed search state shared across the backtracking recursion.
struct Search<'a> {
    g: &'a GradGraph,
    p: &'a GraphPattern,
    /// Candidate data nodes per pattern-node index, pre-filtered on kind,
    /// node-local predicates and degree.
    candidates: Vec<Vec<NodeRef>>,
    /// Pattern-node indexes in assignment order (ascending candidate count).
    order: Vec<usize>,
    /// For each pattern node: (pattern edge index, this node is the start).
    incident: Vec<Vec<(usize, bool)>>,
    var_index: BTreeMap<&'a str, usize>,
    /// Directional entity-edge index.
    by_endpoints: BTreeMap<(EntityId, EntityId), Vec<crate::graph::EntityEdgeId>>,
}

impl<'a> Search<'a> {
    fn new(g: &'a GradGraph, p: &'a GraphPattern) -> Self {
        let var_index: BTreeMap<&str, usize> = p
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.var.as_str(), i))
            .collect();

        let mut by_endpoints: BTreeMap<(EntityId, EntityId), Vec<_>> = BTreeMap::new();
        let mut out_degree: BTreeMap<EntityId, usize> = BTreeMap::new();
        let mut in_degree: BTreeMap<EntityId, usize> = BTreeMap::new();
        for (id, e) in g.entity_edges() {
            by_endpoints
                .entry((e.start(), e.end()))
                .or_default()
                .push(id);
            *out_degree.entry(e.start()).or_default() += 1;
            *in_degree.entry(e.end()).or_default() += 1;
        }
        let mut attr_children: BTreeMap<EntityId, usize> = BTreeMap::new();
        for (_, a) in g.attributes() {
            *attr_children.entry(a.owner()).or_default() += 1;
        }
        let mut literal_children: BTreeMap<crate::graph::AttrId, usize> = BTreeMap::new();
        for (_, l) in g.literals() {
            *literal_children.entry(l.owner()).or_default() += 1;
        }

        let mut incident: Vec<Vec<(usize, bool)>> = vec![Vec::new(); p.nodes.len()];
        // Degree demanded of a candidate by the pattern topology.
        let mut need = vec![[0usize; 4]; p.nodes.len()]; // out, in, attrs, literals
        for (ei, e) in p.edges.iter().enumerate() {
            let (si, ti) = (
                var_index[e.start_var.as_str()],
                var_index[e.end_var.as_str()],
            );
            incident[si].push((ei, true));
            incident[ti].push((ei, false));
            match e.kind {
                PatternEdgeKind::Entity(_) => {
                    need[si][0] += 1;
                    need[ti][1] += 1;
                }
                PatternEdgeKind::Attribute => need[si][2] += 1,
                PatternEdgeKind::Literal => need[si][3] += 1,
            }
        }

        let mut candidates = Vec::with_capacity(p.nodes.len());
        for (i, pn) in p.nodes.iter().enumerate() {
            let mut cands: Vec<NodeRef> = Vec::new();
            match pn.kind {
                PatternNodeKind::Entity => {
                    for (id, _) in g.entities() {
                        let r = NodeRef::Entity(id);
                        if node_satisfies(g, pn, r)
                            && out_degree.get(&id).copied().unwrap_or(0) >= need[i][0]
                            && in_degree.get(&id).copied().unwrap_or(0) >= need[i][1]
                            && attr_children.get(&id).copied().unwrap_or(0) >= need[i][2]
                        {
                            cands.push(r);
                        }
                    }
                }
                PatternNodeKind::Attribute => {
                    for (id, _) in g.attributes() {
                        let r = NodeRef::Attribute(id);
                        if node_satisfies(g, pn, r)
                            && literal_children.get(&id).copied().unwrap_or(0) >= need[i][3]
                        {
                            cands.push(r);
                        }
                    }
                }
                PatternNodeKind::Literal => {
                    for (id, _) in g.literals() {
                        let r = NodeRef::Literal(id);
                        if node_satisfies(g, pn, r) {
                            cands.push(r);
                        }
                    }
                }
            }
            candidates.push(cands);
        }

        let mut order: Vec<usize> = (0..p.nodes.len()).collect();
        order.sort_by_key(|&i| (candidates[i].len(), i));

        Search {
            g,
            p,
            candidates,
            order,
            incident,
            var_index,
            by_endpoints,
        }
    }

    /// Data edges that can stand for pattern edge `pe` between two bound
    /// endpoints.
    fn edge_options(&self, pe: &PatternEdge, start: NodeRef, end: NodeRef) -> Vec<EdgeRef> {
        match (pe.kind, start, end) {
            (PatternEdgeKind::Entity(_), NodeRef::Entity(s), NodeRef::Entity(t)) => self
                .by_endpoints
                .get(&(s, t))
                .map(|ids| {
                    ids.iter()
                        .map(|id| EdgeRef::Entity(*id))
                        .filter(|e| edge_satisfies(self.g, pe, *e))
                        .collect()
                })
                .unwrap_or_default(),
            (PatternEdgeKind::Attribute, NodeRef::Entity(s), NodeRef::Attribute(a)) => {
                let owner = self.g.attribute(a).map(|n| n.owner()).ok();
                if owner == Some(s) && edge_satisfies(self.g, pe, EdgeRef::Attribute(a)) {
                    vec![EdgeRef::Attribute(a)]
                } else {
                    vec![]
                }
            }
            (PatternEdgeKind::Literal, NodeRef::Attribute(a), NodeRef::Literal(l)) => {
                let owner = self.g.literal(l).map(|n| n.owner()).ok();
                if owner == Some(a) && edge_satisfies(self.g, pe, EdgeRef::Literal(l)) {
                    vec![EdgeRef::Literal(l)]
                } else {
                    vec![]
                }
            }
            _ => vec![],
        }
    }

    fn edge_endpoints(&self, ei: usize) -> (usize, usize) {
        let e = &self.p.edges[ei];
        (
            self.var_index[e.start_var.as_str()],
            self.var_index[e.end_var.as_str()],
        )
    }

    fn run(&self, out: &mut Vec<Match>, limit: Option<usize>) -> Result<()> {
        let mut assignment: Vec<Option<NodeRef>> = vec![None; self.p.nodes.len()];
        let mut used: BTreeSet<NodeRef> = BTreeSet::new();
        self.assign(0, &mut assignment, &mut used, out, limit)
    }

    fn assign(
        &self,
        depth: usize,
        assignment: &mut Vec<Option<NodeRef>>,
        used: &mut BTreeSet<NodeRef>,
        out: &mut Vec<Match>,
        limit: Option<usize>,
    ) -> Result<()> {
        if depth == self.order.len() {
            return self.emit(assignment, out, limit);
        }
        let ni = self.order[depth];
        'cand: for &cand in &self.candidates[ni] {
            if used.contains(&cand) {
                continue;
            }
            // Consistency with already-bound neighbors.
            for &(ei, as_start) in &self.incident[ni] {
                let (si, ti) = self.edge_endpoints(ei);
                let other = if as_start { ti } else { si };
                if other == ni {
                    // Self-loop pattern edge: both ends are this candidate.
                    if self.edge_options(&self.p.edges[ei], cand, cand).is_empty() {
                        continue 'cand;
                    }
                    continue;
                }
                match assignment[other] {
                    Some(other_img) => {
                        let (s_img, t_img) = if as_start {
                            (cand, other_img)
                        } else {
                            (other_img, cand)
                        };
                        if self
                            .edge_options(&self.p.edges[ei], s_img, t_img)
                            .is_empty()
                        {
                            continue 'cand;
                        }
                    }
                    None => {
                        // Lookahead: some unused candidate of the neighbor
                        // must support this edge.
                        let viable = self.candidates[other].iter().any(|&oc| {
                            if used.contains(&oc) || oc == cand {
                                return false;
                            }
                            let (s_img, t_img) = if as_start { (cand, oc) } else { (oc, cand) };
                            !self
                                .edge_options(&self.p.edges[ei], s_img, t_img)
                                .is_empty()
                        });
                        if !viable {
                            continue 'cand;
                        }
                    }
                }
            }
            assignment[ni] = Some(cand);
            used.insert(cand);
            self.assign(depth + 1, assignment, used, out, limit)?;
            used.remove(&cand);
            assignment[ni] = None;
        }
        Ok(())
    }

    /// All pattern nodes are bound; enumerate injective edge-binding
    /// combinations (parallel edges bind explicitly).
    fn emit(
        &self,
        assignment: &[Option<NodeRef>],
        out: &mut Vec<Match>,
        limit: Option<usize>,
    ) -> Result<()> {
        let mut options: Vec<Vec<EdgeRef>> = Vec::with_capacity(self.p.edges.len());
        for (ei, pe) in self.p.edges.iter().enumerate() {
            let (si, ti) = self.edge_endpoints(ei);
            let opts = self.edge_options(pe, assignment[si].unwrap(), assignment[ti].unwrap());
            if opts.is_empty() {
                return Ok(());
            }
            options.push(opts);
        }
        let bindings: BTreeMap<String, NodeRef> = self
            .p
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.var.clone(), assignment[i].unwrap()))
            .collect();
        let mut chosen: Vec<EdgeRef> = Vec::with_capacity(options.len());
        let mut used: BTreeSet<EdgeRef> = BTreeSet::new();
        emit_edge_combos(&options, 0, &mut chosen, &mut used, &mut |edges| {
            if let Some(lim) = limit {
                if out.len() >= lim {
                    return Err(GradError::MatchLimitExceeded(lim));
                }
            }
            out.push(Match {
                bindings: bindings.clone(),
                edge_bindings: edges.to_vec(),
            });
            Ok(())
        })
    }
}

fn emit_edge_combos(
    options: &[Vec<EdgeRef>],
    idx: usize,
    chosen: &mut Vec<EdgeRef>,
    used: &mut BTreeSet<EdgeRef>,
    sink: &mut impl FnMut(&[EdgeRef]) -> Result<()>,
) -> Result<()> {
    if idx == options.len() {
        return sink(chosen);
    }
    for &e in &options[idx] {
        if !used.insert(e) {
            continue;
        }
        chosen.push(e);
        emit_edge_combos(options, idx + 1, chosen, used, sink)?;
        chosen.pop();
        used.remove(&e);
    }
    Ok(())
}

/// Caps protecting the exponential oracle.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceCaps {
    pub max_pattern_nodes: usize,
    pub max_graph_nodes: usize,
}

impl Default for BruteForceCaps {
    fn default() -> Self {
        BruteForceCaps {
            max_pattern_nodes: 8,
            max_graph_nodes: 64,
        }
    }
}

/// The testing oracle: enumerates injective assignments of pattern nodes to
/// graph nodes in declaration order, with no candidate indexing, ordering
/// heuristics or lookahead, and filters by the matching conditions.
pub fn brute_force_match(g: &GradGraph, p: &GraphPattern) -> Result<MatchSet> {
    brute_force_match_capped(g, p, BruteForceCaps::default())
}

pub fn brute_force_match_capped(
    g: &GradGraph,
    p: &GraphPattern,
    caps: BruteForceCaps,
) -> Result<MatchSet> {
    let violations = validate_pattern(p);
    if !violations.is_empty() {
        return Err(GradError::InvalidPattern(violations));
    }
    if p.nodes.len() > caps.max_pattern_nodes {
        return Err(GradError::CapExceeded(format!(
            "{} pattern nodes > {}",
            p.nodes.len(),
            caps.max_pattern_nodes
        )));
    }
    if g.node_count() > caps.max_graph_nodes {
        return Err(GradError::CapExceeded(format!(
            "{} graph nodes > {}",
            g.node_count(),
            caps.max_graph_nodes
        )));
    }
    if p.nodes.is_empty() {
        return Ok(MatchSet {
            matches: vec![Match {
                bindings: BTreeMap::new(),
                edge_bindings: Vec::new(),
            }],
        });
    }

    let all_nodes: Vec<NodeRef> = g
        .entities()
        .map(|(id, _)| NodeRef::Entity(id))
        .chain(g.attributes().map(|(id, _)| NodeRef::Attribute(id)))
        .chain(g.literals().map(|(id, _)| NodeRef::Literal(id)))
        .collect();
    let var_index: BTreeMap<&str, usize> = p
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.var.as_str(), i))
        .collect();

    let mut matches = Vec::new();
    let mut assignment: Vec<Option<NodeRef>> = vec![None; p.nodes.len()];
    brute_assign(
        g,
        p,
        &var_index,
        &all_nodes,
        0,
        &mut assignment,
        &mut matches,
    );
    Ok(MatchSet { matches }.canonicalize(g, p))
}

fn brute_edge_options(
    g: &GradGraph,
    pe: &PatternEdge,
    start: NodeRef,
    end: NodeRef,
) -> Vec<EdgeRef> {
    let mut opts = Vec::new();
    match pe.kind {
        PatternEdgeKind::Entity(_) => {
            for (id, e) in g.entity_edges() {
                if NodeRef::Entity(e.start()) == start
                    && NodeRef::Entity(e.end()) == end
                    && edge_satisfies(g, pe, EdgeRef::Entity(id))
                {
                    opts.push(EdgeRef::Entity(id));
                }
            }
        }
        PatternEdgeKind::Attribute => {
            for (owner, a) in g.attribute_edges() {
                if NodeRef::Entity(owner) == start
                    && NodeRef::Attribute(a) == end
                    && edge_satisfies(g, pe, EdgeRef::Attribute(a))
                {
                    opts.push(EdgeRef::Attribute(a));
                }
            }
        }
        PatternEdgeKind::Literal => {
            for (owner, l, _) in g.literal_edges() {
                if NodeRef::Attribute(owner) == start
                    && NodeRef::Literal(l) == end
                    && edge_satisfies(g, pe, EdgeRef::Literal(l))
                {
                    opts.push(EdgeRef::Literal(l));
                }
            }
        }
    }
    opts
}

fn brute_assign(
    g: &GradGraph,
    p: &GraphPattern,
    var_index: &BTreeMap<&str, usize>,
    all_nodes: &[NodeRef],
    idx: usize,
    assignment: &mut Vec<Option<NodeRef>>,
    out: &mut Vec<Match>,
) {
    if idx == p.nodes.len() {
        let mut options = Vec::with_capacity(p.edges.len());
        for pe in &p.edges {
            let s = assignment[var_index[pe.start_var.as_str()]].unwrap();
            let t = assignment[var_index[pe.end_var.as_str()]].unwrap();
            let opts = brute_edge_options(g, pe, s, t);
            if opts.is_empty() {
                return;
            }
            options.push(opts);
        }
        let bindings: BTreeMap<String, NodeRef> = p
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.var.clone(), assignment[i].unwrap()))
            .collect();
        let mut chosen = Vec::new();
        let mut used = BTreeSet::new();
        let _ = emit_edge_combos(&options, 0, &mut chosen, &mut used, &mut |edges| {
            out.push(Match {
                bindings: bindings.clone(),
                edge_bindings: edges.to_vec(),
            });
            Ok(())
        });
        return;
    }
    'cand: for &cand in all_nodes {
        if assignment[..idx].contains(&Some(cand)) {
            continue;
        }
        if !node_satisfies(g, &p.nodes[idx], cand) {
            continue;
        }
        // Every pattern edge with both endpoints assigned must have an image.
        for pe in &p.edges {
            let si = var_index[pe.start_var.as_str()];
            let ti = var_index[pe.end_var.as_str()];
            let s = if si == idx {
                Some(cand)
            } else {
                assignment[si]
            };
            let t = if ti == idx {
                Some(cand)
            } else {
                assignment[ti]
            };
            if si <= idx && ti <= idx {
                if let (Some(s), Some(t)) = (s, t) {
                    if brute_edge_options(g, pe, s, t).is_empty() {
                        continue 'cand;
                    }
                }
            }
        }
        assignment[idx] = Some(cand);
        brute_assign(g, p, var_index, all_nodes, idx + 1, assignment, out);
        assignment[idx] = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example11_pattern, example8};
    use crate::pattern::AtomicPredicate;
    use crate::value::CompOp;

    #[test]
    fn example11_has_one_match() {
        let fx = example8();
        let p = example11_pattern();
        let ms = match_graph(&fx.graph, &p).unwrap();
        assert_eq!(ms.len(), 1);
        let m = &ms.matches[0];
        assert_eq!(m.node("m"), Some(NodeRef::Entity(fx.movie)));
        assert_eq!(m.node("a"), Some(NodeRef::Entity(fx.eric_bana)));
        assert_eq!(m.node("r"), Some(NodeRef::Attribute(fx.rating)));
        assert!(m.edge_bindings.contains(&EdgeRef::Entity(fx.e15.unwrap())));
    }

    #[test]
    fn empty_pattern_yields_one_vacuous_match() {
        let fx = example8();
        let ms = match_graph(&fx.graph, &GraphPattern::new()).unwrap();
        assert_eq!(ms.len(), 1);
        assert!(ms.matches[0].bindings.is_empty());
    }

    #[test]
    fn absent_class_yields_no_match() {
        let fx = example8();
        let p = GraphPattern::new().entity("u", vec![AtomicPredicate::label_eq("USER")]);
        assert!(match_graph(&fx.graph, &p).unwrap().is_empty());
    }

    #[test]
    fn single_node_pattern_counts_entities() {
        let fx = example8();
        let p = GraphPattern::new().entity("x", vec![]);
        assert_eq!(match_graph(&fx.graph, &p).unwrap().len(), 6);
        assert_eq!(brute_force_match(&fx.graph, &p).unwrap().len(), 6);
    }

    #[test]
    fn parallel_edges_bind_explicitly() {
        use crate::graph::EntityEdgeKind;
        use std::collections::BTreeMap;
        let mut g = GradGraph::new();
        let ids = |v: i64| {
            let mut m = BTreeMap::new();
            m.insert("id".to_string(), Value::Int(v));
            m
        };
        let a = g.add_entity_node("A", ids(1)).unwrap();
        let b = g.add_entity_node("B", ids(2)).unwrap();
        g.add_entity_edge(a, b, EntityEdgeKind::Association, "r1", BTreeMap::new())
            .unwrap();
        g.add_entity_edge(a, b, EntityEdgeKind::Association, "r2", BTreeMap::new())
            .unwrap();
        let p = GraphPattern::new()
            .entity("x", vec![])
            .entity("y", vec![])
            .entity_edge("x", "y", vec![]);
        let ms = match_graph(&g, &p).unwrap();
        // Two parallel edges satisfy the unlabeled pattern edge.
        assert_eq!(ms.len(), 2);
        assert!(ms.same_bindings(&brute_force_match(&g, &p).unwrap()));
    }

    #[test]
    fn missing_attribute_fails_the_conjunction() {
        let fx = example8();
        // e16 has no ranking attribute, so only e15 satisfies ranking = 1.
        let p = GraphPattern::new()
            .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
            .entity("a", vec![AtomicPredicate::label_eq("ACTOR")])
            .entity_edge(
                "m",
                "a",
                vec![AtomicPredicate::edge_attribute(
                    "ranking",
                    CompOp::Eq,
                    Value::Int(1),
                )],
            );
        let ms = match_graph(&fx.graph, &p).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms.matches[0].node("a"), Some(NodeRef::Entity(fx.eric_bana)));
    }

    #[test]
    fn invalid_pattern_is_rejected() {
        let fx = example8();
        let p = GraphPattern::new().attribute("a", vec![]);
        assert!(matches!(
            match_graph(&fx.graph, &p),
            Err(GradError::InvalidPattern(_))
        ));
    }

    #[test]
    fn oracle_caps_are_enforced() {
        let fx = example8();
        let p = GraphPattern::new().entity("x", vec![]);
        let caps = BruteForceCaps {
            max_pattern_nodes: 8,
            max_graph_nodes: 4,
        };
        assert!(matches!(
            brute_force_match_capped(&fx.graph, &p, caps),
            Err(GradError::CapExceeded(_))
        ));
    }

    #[test]
    fn match_limit_aborts() {
        let fx = example8();
        let p = GraphPattern::new().entity("x", vec![]);
        assert!(matches!(
            match_graph_limited(&fx.graph, &p, Some(3)),
            Err(GradError::MatchLimitExceeded(3))
        ));
    }

    #[test]
    fn matching_is_deterministic() {
        let fx = example8();
        let p = example11_pattern();
        let a = match_graph(&fx.graph, &p).unwrap();
        let b = match_graph(&fx.graph, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subgraph_is_the_induced_fragment() {
        let fx = example8();
        let ms = match_graph(&fx.graph, &example11_pattern()).unwrap();
        let sub = ms.matches[0].subgraph(&fx.graph).unwrap();
        assert_eq!(sub.entity_count(), 2);
        assert_eq!(sub.attribute_count(), 1);
        assert_eq!(sub.literal_count(), 1);
        assert_eq!(sub.entity_edge_count(), 1);
        // The unmatched FILMED IN / DIRECTS edges are not dragged along.
        let labels: Vec<&str> = sub.entity_edges().map(|(_, e)| e.label()).collect();
        assert_eq!(labels, vec!["ACTS"]);
    }

    #[test]
    fn strengthening_a_predicate_never_adds_matches() {
        let fx = example8();
        let base = GraphPattern::new()
            .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
            .entity("a", vec![])
            .entity_edge("m", "a", vec![]);
        let strengthened = GraphPattern::new()
            .entity("m", vec![AtomicPredicate::label_eq("MOVIE")])
            .entity("a", vec![AtomicPredicate::label_eq("ACTOR")])
            .entity_edge("m", "a", vec![]);
        let all = match_graph(&fx.graph, &base).unwrap();
        let fewer = match_graph(&fx.graph, &strengthened).unwrap();
        assert!(fewer.len() <= all.len());
        for m in fewer.iter() {
            assert!(all
                .iter()
                .any(|n| n.bindings == m.bindings && n.edge_bindings == m.edge_bindings));
        }
    }
}
