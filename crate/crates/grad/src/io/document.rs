//! The `grad/1` graph document: one header line, then one record per line.
//!
//! Record types, in canonical emission order:
//!
//! ```text
//! grad/1 mode=lax
//! vE <id> <class> <identifier-map>      entity nodes
//! vA <id> <label>                       attribute nodes
//! vL <id> <value>                       literal nodes
//! eE <start> <end> <kind> <label> <attribute-map>
//! eA <entity> <attribute>
//! eL <attribute> <literal> <context-map>
//! ```
//!
//! Node records are sorted by identity key (full content plus insertion
//! order as tiebreaks) and local ids `n1..nk` are assigned in emission
//! order, so saving is canonical: loading a document and saving it again
//! reproduces the canonical bytes exactly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::graph::{AttrId, EntityId, GradGraph, GraphMode, LitId};
use crate::value::Value;

use super::{
    escape, expect_header, format_map, format_value, parse_err, parse_map, parse_value, unescape,
};

/// Serializes the graph into `sink` and returns the byte count.
pub fn save<W: Write>(g: &GradGraph, sink: &mut W) -> Result<usize> {
    let text = save_to_string(g);
    sink.write_all(text.as_bytes())?;
    Ok(text.len())
}

pub fn save_file(g: &GradGraph, path: impl AsRef<Path>) -> Result<usize> {
    let mut f = std::fs::File::create(path)?;
    save(g, &mut f)
}

pub fn save_to_string(g: &GradGraph) -> String {
    let mode = match g.mode() {
        GraphMode::Strict => "strict",
        GraphMode::Lax => "lax",
    };
    let mut out = format!("grad/1 mode={mode}\n");

    // Entity nodes by identity key; ties broken by content, then by
    // insertion handle so that a reload (which re-inserts in line order)
    // re-serializes byte-identically even among exact duplicates.
    let mut entities: Vec<EntityId> = g.entities().map(|(id, _)| id).collect();
    entities.sort_by_cached_key(|&id| {
        let n = g.entity(id).expect("listed entity");
        (
            g.entity_order_key(id),
            n.class_label().to_string(),
            n.identifiers().clone(),
            id.raw(),
        )
    });

    let mut attrs: Vec<AttrId> = g.attributes().map(|(id, _)| id).collect();
    attrs.sort_by_cached_key(|&id| {
        let a = g.attribute(id).expect("listed attribute");
        (g.attribute_order_key(id), a.label().to_string(), id.raw())
    });

    let mut literals: Vec<LitId> = g.literals().map(|(id, _)| id).collect();
    literals.sort_by_cached_key(|&id| {
        let l = g.literal(id).expect("listed literal");
        (
            g.attribute_order_key(l.owner()),
            l.context().clone(),
            l.value().clone(),
            id.raw(),
        )
    });

    let mut local = BTreeMap::new();
    let mut counter = 0usize;
    let mut name_of = |key: u64, local: &mut BTreeMap<u64, String>| {
        counter += 1;
        let name = format!("n{counter}");
        local.insert(key, name.clone());
        name
    };

    // Entity, attribute and literal handles never collide (one counter
    // feeds all three), so one map keyed by raw handle suffices.
    let mut entity_local = BTreeMap::new();
    for &id in &entities {
        let n = g.entity(id).expect("listed entity");
        let name = name_of(id.raw(), &mut entity_local);
        out.push_str(&format!(
            "vE {name} {} {}\n",
            escape(n.class_label()),
            format_map(n.identifiers())
        ));
    }
    for &id in &attrs {
        let a = g.attribute(id).expect("listed attribute");
        let name = name_of(id.raw(), &mut local);
        out.push_str(&format!("vA {name} {}\n", escape(a.label())));
    }
    for &id in &literals {
        let l = g.literal(id).expect("listed literal");
        let name = name_of(id.raw(), &mut local);
        out.push_str(&format!("vL {name} {}\n", format_value(l.value())));
    }

    let mut edges: Vec<_> = g.entity_edges().map(|(id, _)| id).collect();
    edges.sort_by_cached_key(|&id| {
        let e = g.entity_edge(id).expect("listed edge");
        (
            g.edge_order_key(id),
            e.kind().name(),
            e.attributes().clone(),
            id.raw(),
        )
    });
    for id in edges {
        let e = g.entity_edge(id).expect("listed edge");
        out.push_str(&format!(
            "eE {} {} {} {} {}\n",
            entity_local[&e.start().raw()],
            entity_local[&e.end().raw()],
            e.kind().name(),
            escape(e.label()),
            format_map(e.attributes())
        ));
    }
    for &id in &attrs {
        let a = g.attribute(id).expect("listed attribute");
        out.push_str(&format!(
            "eA {} {}\n",
            entity_local[&a.owner().raw()],
            local[&id.raw()]
        ));
    }
    for &id in &literals {
        let l = g.literal(id).expect("listed literal");
        out.push_str(&format!(
            "eL {} {} {}\n",
            local[&l.owner().raw()],
            local[&id.raw()],
            format_map(l.context())
        ));
    }
    out
}

pub fn load_file(path: impl AsRef<Path>) -> Result<GradGraph> {
    let text = std::fs::read_to_string(path)?;
    load(&text)
}

/// Parses a `grad/1` document. Structural invariants are enforced while
/// the graph is rebuilt: every attribute and literal node must be wired by
/// exactly one attribute/literal edge, every reference must resolve, and a
/// strict-mode document must be free of duplicate identities.
pub fn load(text: &str) -> Result<GradGraph> {
    let (header_tail, lines) = expect_header(text, "grad", "1")?;
    let mode = match header_tail {
        "mode=strict" => GraphMode::Strict,
        "mode=lax" => GraphMode::Lax,
        other => return Err(parse_err(1, format!("bad header fields {other:?}"))),
    };

    struct EntityRec<'a> {
        line: usize,
        class: String,
        ids: BTreeMap<String, Value>,
        local: &'a str,
    }
    struct AttrRec<'a> {
        line: usize,
        label: String,
        local: &'a str,
    }
    struct LitRec<'a> {
        line: usize,
        value: Value,
        local: &'a str,
    }

    let mut entity_recs: Vec<EntityRec> = Vec::new();
    let mut attr_recs: Vec<AttrRec> = Vec::new();
    let mut lit_recs: Vec<LitRec> = Vec::new();
    let mut attr_edges: Vec<(usize, &str, &str)> = Vec::new();
    let mut lit_edges: Vec<(usize, &str, &str, BTreeMap<String, Value>)> = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut entity_edges: Vec<(usize, &str, &str, &str, String, BTreeMap<String, Value>)> =
        Vec::new();
    let mut seen_locals: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();

    for (n, line) in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        let arity = |want: usize| -> Result<()> {
            if fields.len() != want {
                return Err(parse_err(
                    n,
                    format!(
                        "{} record needs {} fields, found {}",
                        fields[0],
                        want,
                        fields.len()
                    ),
                ));
            }
            Ok(())
        };
        match fields[0] {
            "vE" => {
                arity(4)?;
                if !seen_locals.insert(fields[1]) {
                    return Err(parse_err(n, format!("duplicate node id {}", fields[1])));
                }
                entity_recs.push(EntityRec {
                    line: n,
                    class: unescape(fields[2]).map_err(|e| parse_err(n, e))?,
                    ids: parse_map(fields[3]).map_err(|e| parse_err(n, e))?,
                    local: fields[1],
                });
            }
            "vA" => {
                arity(3)?;
                if !seen_locals.insert(fields[1]) {
                    return Err(parse_err(n, format!("duplicate node id {}", fields[1])));
                }
                attr_recs.push(AttrRec {
                    line: n,
                    label: unescape(fields[2]).map_err(|e| parse_err(n, e))?,
                    local: fields[1],
                });
            }
            "vL" => {
                arity(3)?;
                if !seen_locals.insert(fields[1]) {
                    return Err(parse_err(n, format!("duplicate node id {}", fields[1])));
                }
                lit_recs.push(LitRec {
                    line: n,
                    value: parse_value(fields[2]).map_err(|e| parse_err(n, e))?,
                    local: fields[1],
                });
            }
            "eE" => {
                arity(6)?;
                entity_edges.push((
                    n,
                    fields[1],
                    fields[2],
                    fields[3],
                    unescape(fields[4]).map_err(|e| parse_err(n, e))?,
                    parse_map(fields[5]).map_err(|e| parse_err(n, e))?,
                ));
            }
            "eA" => {
                arity(3)?;
                attr_edges.push((n, fields[1], fields[2]));
            }
            "eL" => {
                arity(4)?;
                lit_edges.push((
                    n,
                    fields[1],
                    fields[2],
                    parse_map(fields[3]).map_err(|e| parse_err(n, e))?,
                ));
            }
            other => return Err(parse_err(n, format!("unknown record type {other:?}"))),
        }
    }

    let mut g = GradGraph::with_mode(mode);
    let mut entity_ids: BTreeMap<&str, EntityId> = BTreeMap::new();
    for rec in &entity_recs {
        let id = g
            .add_entity_node(&rec.class, rec.ids.clone())
            .map_err(|e| parse_err(rec.line, e.to_string()))?;
        entity_ids.insert(rec.local, id);
    }

    // Attribute nodes need their owner, which lives on the eA record; wire
    // them up before inserting. Exactly one edge per node.
    let mut owner_of_attr: BTreeMap<&str, (&str, usize)> = BTreeMap::new();
    for &(n, owner, attr) in &attr_edges {
        if owner_of_attr.insert(attr, (owner, n)).is_some() {
            return Err(parse_err(
                n,
                format!("attribute node {attr} has more than one attribute edge"),
            ));
        }
    }
    let mut attr_ids: BTreeMap<&str, AttrId> = BTreeMap::new();
    for rec in &attr_recs {
        let Some(&(owner, edge_line)) = owner_of_attr.get(rec.local) else {
            return Err(parse_err(
                rec.line,
                format!("attribute node {} has no attribute edge", rec.local),
            ));
        };
        let Some(&owner_id) = entity_ids.get(owner) else {
            return Err(parse_err(
                edge_line,
                format!("dangling reference: {owner} is not an entity node"),
            ));
        };
        let id = g
            .add_attribute(owner_id, &rec.label)
            .map_err(|e| parse_err(rec.line, e.to_string()))?;
        attr_ids.insert(rec.local, id);
    }
    for &(n, _, attr) in &attr_edges {
        if !attr_recs.iter().any(|r| r.local == attr) {
            return Err(parse_err(
                n,
                format!("dangling reference: {attr} is not an attribute node"),
            ));
        }
    }

    let mut owner_of_lit: BTreeMap<&str, (&str, &BTreeMap<String, Value>, usize)> = BTreeMap::new();
    for (n, attr, lit, ctx) in &lit_edges {
        if owner_of_lit.insert(*lit, (*attr, ctx, *n)).is_some() {
            return Err(parse_err(
                *n,
                format!("literal node {lit} has more than one literal edge"),
            ));
        }
    }
    for rec in &lit_recs {
        let Some(&(attr, ctx, edge_line)) = owner_of_lit.get(rec.local) else {
            return Err(parse_err(
                rec.line,
                format!("literal node {} has no literal edge", rec.local),
            ));
        };
        let Some(&attr_id) = attr_ids.get(attr) else {
            return Err(parse_err(
                edge_line,
                format!("dangling reference: {attr} is not an attribute node"),
            ));
        };
        g.add_literal(attr_id, rec.value.clone(), ctx.clone())
            .map_err(|e| parse_err(rec.line, e.to_string()))?;
    }
    for (n, _, lit, _) in &lit_edges {
        if !lit_recs.iter().any(|r| &r.local == lit) {
            return Err(parse_err(
                *n,
                format!("dangling reference: {lit} is not a literal node"),
            ));
        }
    }

    for (n, start, end, kind, label, attrs) in entity_edges {
        let (Some(&s), Some(&e)) = (entity_ids.get(start), entity_ids.get(end)) else {
            let missing = if entity_ids.contains_key(start) {
                end
            } else {
                start
            };
            return Err(parse_err(
                n,
                format!("dangling reference: {missing} is not an entity node"),
            ));
        };
        let kind = kind
            .parse()
            .map_err(|_| parse_err(n, format!("unknown edge kind {kind:?}")))?;
        g.add_entity_edge(s, e, kind, &label, attrs)
            .map_err(|err| parse_err(n, err.to_string()))?;
    }

    Ok(g)
}
